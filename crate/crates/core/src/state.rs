// Copyright 2026 The stmqc Authors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;

use crate::basis;
use crate::config::ChainConfig;
use crate::error::{Error, Result};
use crate::hamiltonian::SecularModel;

/// Pure state of an `n_ions` chain over the 4^N product basis laid out as
/// in [`crate::basis`].
///
/// Amplitudes are held in the interaction frame of the secular chain
/// Hamiltonian (measured from the all-ground energy) at time `time`.
/// Populations are frame independent; [`ChainState::lab_amplitudes`]
/// restores the Schrodinger-picture phases.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    n_ions: usize,
    amplitudes: Vec<Complex64>,
    time: f64,
}

/// Norm tolerance for a state to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-10;

impl ChainState {
    /// Basis state `index` at t = 0.
    pub fn basis_state(n_ions: usize, index: usize) -> Result<Self> {
        check_ions(n_ions)?;
        let dim = basis::dimension(n_ions);
        if index >= dim {
            return Err(Error::Shape {
                expected: dim,
                actual: index,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(ChainState {
            n_ions,
            amplitudes,
            time: 0.0,
        })
    }

    /// Every spin in its ground state.
    pub fn ground(n_ions: usize) -> Result<Self> {
        Self::basis_state(n_ions, 0)
    }

    /// Electrons in their ground state, nuclei excited where `nuclear[k]`.
    pub fn with_nuclear_bits(nuclear: &[bool]) -> Result<Self> {
        let n = nuclear.len();
        Self::basis_state(n, basis::index_of(nuclear, &vec![false; n]))
    }

    /// Builds a state from raw amplitudes; they must be normalized.
    pub fn from_amplitudes(n_ions: usize, amplitudes: Vec<Complex64>, time: f64) -> Result<Self> {
        let s = Self::from_unnormalized(n_ions, amplitudes, time)?;
        let norm = s.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Numeric(format!("state norm {norm} is not 1")));
        }
        Ok(s)
    }

    /// Shape-checked constructor that accepts any norm, for importing
    /// externally computed vectors. Consumers that need a physical state
    /// check the norm themselves.
    pub fn from_unnormalized(n_ions: usize, amplitudes: Vec<Complex64>, time: f64) -> Result<Self> {
        check_ions(n_ions)?;
        let dim = basis::dimension(n_ions);
        if amplitudes.len() != dim {
            return Err(Error::Shape {
                expected: dim,
                actual: amplitudes.len(),
            });
        }
        Ok(ChainState {
            n_ions,
            amplitudes,
            time,
        })
    }

    /// Unchecked constructor used by the evolution kernels.
    pub(crate) fn from_parts(n_ions: usize, amplitudes: Vec<Complex64>, time: f64) -> Self {
        ChainState {
            n_ions,
            amplitudes,
            time,
        }
    }

    pub fn n_ions(&self) -> usize {
        self.n_ions
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub(crate) fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    fn marginal(&self, mask: usize) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn nuclear_excited_population(&self, k: usize) -> f64 {
        self.marginal(basis::nuclear_bit(k))
    }

    pub fn electron_excited_population(&self, k: usize) -> f64 {
        self.marginal(basis::electron_bit(k))
    }

    /// Total population with any electron excited.
    pub fn electron_excitation(&self) -> f64 {
        self.marginal(basis::electron_mask(self.n_ions))
    }

    /// Probability of finding the nuclei in configuration `nuclear`
    /// (electrons traced out).
    pub fn nuclear_configuration_probability(&self, nuclear: &[bool]) -> f64 {
        let target = basis::index_of(nuclear, &[]);
        let mask = basis::nuclear_mask(self.n_ions);
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == target)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// <self|other>.
    pub fn inner(&self, other: &ChainState) -> Result<Complex64> {
        self.check_same_shape(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |<self|other>|^2.
    pub fn fidelity(&self, other: &ChainState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn check_same_shape(&self, other: &ChainState) -> Result<()> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::Shape {
                expected: self.amplitudes.len(),
                actual: other.amplitudes.len(),
            });
        }
        Ok(())
    }

    pub fn check_config(&self, config: &ChainConfig) -> Result<()> {
        let dim = basis::dimension(config.n_ions);
        if self.n_ions != config.n_ions || self.amplitudes.len() != dim {
            return Err(Error::Shape {
                expected: dim,
                actual: self.amplitudes.len(),
            });
        }
        Ok(())
    }

    /// Schrodinger-picture amplitudes `exp(-2 pi i E t) c`.
    pub fn lab_amplitudes(&self, config: &ChainConfig) -> Result<Vec<Complex64>> {
        self.check_config(config)?;
        let model = SecularModel::new(config)?;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| a * phase_factor(-model.excitation_energy(i) * self.time))
            .collect())
    }

    /// Applies a diagonal phase `exp(i angle(idx))` (frame updates).
    pub fn apply_diagonal_phase(&mut self, mut angle: impl FnMut(usize) -> f64) {
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            let th = angle(i);
            if th != 0.0 {
                *a *= Complex64::from_polar(1.0, th);
            }
        }
    }

    /// Projects onto the basis states accepted by `keep` and renormalizes.
    /// Returns the kept probability.
    pub fn project(&mut self, keep: impl Fn(usize) -> bool) -> Result<f64> {
        let mut p = 0.0;
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if keep(i) {
                p += a.norm_sqr();
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        if p <= 0.0 {
            return Err(Error::Numeric("projection onto an empty subspace".into()));
        }
        let s = 1.0 / p.sqrt();
        for a in &mut self.amplitudes {
            *a *= s;
        }
        Ok(p)
    }
}

/// `exp(2 pi i cycles)` with the integer part removed first.
pub fn phase_factor(cycles: f64) -> Complex64 {
    let frac = cycles - cycles.round();
    Complex64::from_polar(1.0, std::f64::consts::TAU * frac)
}

fn check_ions(n_ions: usize) -> Result<()> {
    if n_ions == 0 {
        return Err(Error::InvalidConfig("n_ions must be >= 1".into()));
    }
    if n_ions > crate::config::MAX_STATE_IONS {
        return Err(Error::Capacity {
            n_ions,
            max: crate::config::MAX_STATE_IONS,
        });
    }
    Ok(())
}
