// Copyright 2026 The stmqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Spin Hamiltonians in frequency units (H/h, Hz).
//!
//! Single ion: `f_e S_z + f_n I_z - A S.I`. The chain form adds the secular
//! electron-nuclear dipolar terms `b_jk S_z(j) I_z(k)` between different
//! sites; nuclear-nuclear and electron-electron couplings are not modelled.
//! Projections are taken along each spin's excitation axis (see
//! [`crate::basis`]), which makes every Zeeman coefficient positive.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::basis::{self, projection};
use crate::config::ChainConfig;
use crate::error::{Error, Result};
use crate::frequency::{dipole_coupling, field_at_site};
use crate::species::IonSpecies;

/// Sparse Hermitian operator on the 4^N product space.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    dimension: usize,
    diagonal: Vec<Complex64>,
    off_diagonal: BTreeMap<(usize, usize), Complex64>,
}

/// Dense matrices are only materialised up to this dimension (4^6).
pub const MAX_DENSE_DIMENSION: usize = 4096;

impl HamiltonianMatrix {
    pub fn zeros(dimension: usize) -> Self {
        HamiltonianMatrix {
            dimension,
            diagonal: vec![Complex64::new(0.0, 0.0); dimension],
            off_diagonal: BTreeMap::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn add(&mut self, row: usize, col: usize, value: Complex64) {
        if row == col {
            self.diagonal[row] += value;
        } else {
            *self
                .off_diagonal
                .entry((row, col))
                .or_insert(Complex64::new(0.0, 0.0)) += value;
        }
    }

    /// Adds `value` at (row, col) and its conjugate at (col, row).
    pub fn add_hermitian_pair(&mut self, row: usize, col: usize, value: Complex64) {
        self.add(row, col, value);
        self.add(col, row, value.conj());
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        if row == col {
            self.diagonal[row]
        } else {
            self.off_diagonal
                .get(&(row, col))
                .copied()
                .unwrap_or_default()
        }
    }

    pub fn diagonal(&self) -> &[Complex64] {
        &self.diagonal
    }

    /// Stored off-diagonal entries as `((row, col), value)`.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (&(usize, usize), &Complex64)> {
        self.off_diagonal.iter()
    }

    pub fn is_diagonal(&self) -> bool {
        self.off_diagonal.values().all(|v| v.norm() == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.diagonal
            .iter()
            .chain(self.off_diagonal.values())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// max |H - H^dagger|.
    pub fn hermiticity_defect(&self) -> f64 {
        let diag = self.diagonal.iter().map(|d| 2.0 * d.im.abs());
        let off = self
            .off_diagonal
            .iter()
            .map(|(&(r, c), v)| (v - self.get(c, r).conj()).norm());
        diag.chain(off).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= 1e-12 * self.max_abs()
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        if self.dimension > MAX_DENSE_DIMENSION {
            return Err(Error::Capacity {
                n_ions: (self.dimension.trailing_zeros() / 2) as usize,
                max: (MAX_DENSE_DIMENSION.trailing_zeros() / 2) as usize,
            });
        }
        let mut m = DMatrix::zeros(self.dimension, self.dimension);
        for (i, d) in self.diagonal.iter().enumerate() {
            m[(i, i)] = *d;
        }
        for (&(r, c), v) in &self.off_diagonal {
            m[(r, c)] = *v;
        }
        Ok(m)
    }

    /// Eigenvalues in ascending order (dense solver).
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let eig = self.to_dense()?.symmetric_eigen();
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        Ok(v)
    }

    /// Eigenvalues labelled by the basis state with which each eigenvector
    /// overlaps most; entry `i` is the energy adiabatically connected to
    /// basis state `i`.
    pub fn labelled_eigenvalues(&self) -> Result<Vec<f64>> {
        let eig = self.to_dense()?.symmetric_eigen();
        let n = self.dimension;
        let mut out = vec![f64::NAN; n];
        for j in 0..n {
            let col = eig.eigenvectors.column(j);
            let (best, _) = col
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm_sqr()))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !out[best].is_nan() {
                return Err(Error::Numeric(format!(
                    "eigenvectors {best} ambiguously labelled; levels strongly mixed"
                )));
            }
            out[best] = eig.eigenvalues[j];
        }
        Ok(out)
    }
}

/// Exact 4x4 Hamiltonian of one ion in field `b`, basis index
/// `electron + 2 * nucleus`. Includes the hyperfine flip-flop terms.
pub fn single_ion_hamiltonian(species: &IonSpecies, b: f64) -> Result<HamiltonianMatrix> {
    species.validate()?;
    if !(b > 0.0) {
        return Err(Error::Domain(format!("field must be positive, got {b}")));
    }
    let mut h = HamiltonianMatrix::zeros(4);
    add_ion_terms(
        &mut h,
        species,
        species.electron_hz_per_tesla() * b,
        species.nuclear_hz_per_tesla() * b,
        basis::electron_bit(0),
        basis::nuclear_bit(0),
        false,
    );
    Ok(h)
}

fn add_ion_terms(
    h: &mut HamiltonianMatrix,
    species: &IonSpecies,
    f_e: f64,
    f_n: f64,
    e_bit: usize,
    n_bit: usize,
    secular: bool,
) {
    let a = species.hyperfine_a_over_h;
    let sigma = species.hyperfine_sign();
    for idx in 0..h.dimension() {
        let sz = projection(idx & e_bit != 0);
        let iz = projection(idx & n_bit != 0);
        let e = f_e * sz + f_n * iz - a * sigma * sz * iz;
        h.add(idx, idx, Complex64::new(e, 0.0));
    }
    if secular {
        return;
    }
    // -A/2 (S+ I- + S- I+). With a negative nuclear moment the physical
    // I- lowers the excitation; otherwise it raises it.
    for idx in 0..h.dimension() {
        if idx & e_bit != 0 {
            continue;
        }
        let partner_nuclear_excited = sigma > 0.0;
        if (idx & n_bit != 0) != partner_nuclear_excited {
            continue;
        }
        let target = (idx | e_bit) ^ n_bit;
        h.add_hermitian_pair(target, idx, Complex64::new(-a / 2.0, 0.0));
    }
}

/// Hamiltonian of the whole chain. `secular` keeps only `-A S_z I_z` of
/// the hyperfine term; the dipolar terms are always secular.
pub fn chain_hamiltonian(config: &ChainConfig, secular: bool) -> Result<HamiltonianMatrix> {
    config.validate()?;
    config.check_state_capacity()?;
    let n = config.n_ions;
    let mut h = HamiltonianMatrix::zeros(basis::dimension(n));
    let sp = &config.species;
    for k in 0..n {
        let b = field_at_site(config, k)?;
        add_ion_terms(
            &mut h,
            sp,
            sp.electron_hz_per_tesla() * b,
            sp.nuclear_hz_per_tesla() * b,
            basis::electron_bit(k),
            basis::nuclear_bit(k),
            secular,
        );
    }
    let model = SecularModel::new(config)?;
    for idx in 0..h.dimension() {
        h.add(idx, idx, Complex64::new(model.dipolar_energy(idx), 0.0));
    }
    Ok(h)
}

/// Diagonal of the secular chain Hamiltonian, evaluated on demand.
#[derive(Debug, Clone)]
pub struct SecularModel {
    n_ions: usize,
    f_e: Vec<f64>,
    f_n: Vec<f64>,
    hyperfine: f64,
    sigma: f64,
    /// coupling[j][k]: electron j on nucleus k.
    coupling: Vec<Vec<f64>>,
}

impl SecularModel {
    pub fn new(config: &ChainConfig) -> Result<Self> {
        config.validate()?;
        let n = config.n_ions;
        let sp = &config.species;
        let mut f_e = Vec::with_capacity(n);
        let mut f_n = Vec::with_capacity(n);
        for k in 0..n {
            let b = field_at_site(config, k)?;
            f_e.push(sp.electron_hz_per_tesla() * b);
            f_n.push(sp.nuclear_hz_per_tesla() * b);
        }
        let mut coupling = vec![vec![0.0; n]; n];
        for (j, row) in coupling.iter_mut().enumerate() {
            for (k, c) in row.iter_mut().enumerate() {
                if j != k {
                    *c = dipole_coupling(config, j, k)?;
                }
            }
        }
        Ok(SecularModel {
            n_ions: n,
            f_e,
            f_n,
            hyperfine: sp.hyperfine_a_over_h,
            sigma: sp.hyperfine_sign(),
            coupling,
        })
    }

    pub fn n_ions(&self) -> usize {
        self.n_ions
    }

    fn dipolar_energy(&self, idx: usize) -> f64 {
        let mut e = 0.0;
        for j in 0..self.n_ions {
            let sz = projection(basis::electron_excited(idx, j));
            for k in 0..self.n_ions {
                if j != k {
                    e += self.coupling[j][k] * sz * projection(basis::nuclear_excited(idx, k));
                }
            }
        }
        e
    }

    /// Energy of basis state `idx`, Hz.
    pub fn energy(&self, idx: usize) -> f64 {
        let mut e = self.dipolar_energy(idx);
        for k in 0..self.n_ions {
            let sz = projection(basis::electron_excited(idx, k));
            let iz = projection(basis::nuclear_excited(idx, k));
            e += self.f_e[k] * sz + self.f_n[k] * iz - self.hyperfine * self.sigma * sz * iz;
        }
        e
    }

    /// Energy relative to the all-ground state. Smaller numbers keep more
    /// phase precision over long evolutions.
    pub fn excitation_energy(&self, idx: usize) -> f64 {
        let mut e = 0.0;
        for k in 0..self.n_ions {
            let ne = basis::electron_excited(idx, k);
            let nn = basis::nuclear_excited(idx, k);
            let sz = projection(ne);
            let iz = projection(nn);
            if ne {
                e += self.f_e[k];
            }
            if nn {
                e += self.f_n[k];
            }
            e -= self.hyperfine * self.sigma * (sz * iz - 0.25);
        }
        for j in 0..self.n_ions {
            let sz = projection(basis::electron_excited(idx, j));
            for k in 0..self.n_ions {
                if j != k {
                    let iz = projection(basis::nuclear_excited(idx, k));
                    e += self.coupling[j][k] * (sz * iz - 0.25);
                }
            }
        }
        e
    }

    /// Frequency of the electron flip at site `k` out of basis state `from`
    /// (electron `k` in `from` must be in its ground state).
    pub fn electron_transition(&self, from: usize, k: usize) -> f64 {
        debug_assert!(!basis::electron_excited(from, k));
        let iz = projection(basis::nuclear_excited(from, k));
        let mut f = self.f_e[k] - self.hyperfine * self.sigma * iz;
        for m in 0..self.n_ions {
            if m != k {
                f += self.coupling[k][m] * projection(basis::nuclear_excited(from, m));
            }
        }
        f
    }

    /// Frequency of the nuclear flip at site `k` out of basis state `from`.
    pub fn nuclear_transition(&self, from: usize, k: usize) -> f64 {
        debug_assert!(!basis::nuclear_excited(from, k));
        let sz = projection(basis::electron_excited(from, k));
        let mut f = self.f_n[k] - self.hyperfine * self.sigma * sz;
        for j in 0..self.n_ions {
            if j != k {
                f += self.coupling[j][k] * projection(basis::electron_excited(from, j));
            }
        }
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frequency::{build_frequency_table, dipole_shift};

    #[test]
    fn zero_hyperfine_gives_bare_zeeman() {
        let mut sp = IonSpecies::te125();
        sp.hyperfine_a_over_h = f64::MIN_POSITIVE;
        let h = single_ion_hamiltonian(&sp, 10.0).unwrap();
        let fe = sp.electron_hz_per_tesla() * 10.0;
        let fn_ = sp.nuclear_hz_per_tesla() * 10.0;
        let mut expected = vec![
            -fe / 2.0 - fn_ / 2.0,
            -fe / 2.0 + fn_ / 2.0,
            fe / 2.0 - fn_ / 2.0,
            fe / 2.0 + fn_ / 2.0,
        ];
        expected.sort_by(f64::total_cmp);
        for (a, b) in h.eigenvalues().unwrap().iter().zip(&expected) {
            assert!((a - b).abs() <= 1e-12 * fe, "{a} {b}");
        }
    }

    #[test]
    fn single_ion_is_hermitian_and_mixes_correct_pair() {
        let h = single_ion_hamiltonian(&IonSpecies::te125(), 10.0).unwrap();
        assert!(h.is_hermitian());
        // Te: (e=0, n=1) <-> (e=1, n=0), indices 2 and 1
        assert_eq!(h.get(1, 2), Complex64::new(-1.75e9, 0.0));
        assert_eq!(h.get(0, 3), Complex64::new(0.0, 0.0));
        let mut pos = IonSpecies::te125();
        pos.gamma_n_over_2pi = pos.gamma_n_over_2pi.abs();
        let h = single_ion_hamiltonian(&pos, 10.0).unwrap();
        assert_eq!(h.get(0, 3), Complex64::new(-1.75e9, 0.0));
    }

    #[test]
    fn high_field_level_scheme() {
        // electron splitting dominates; within each electron manifold the
        // hyperfine term resolves the nuclear state
        let h = single_ion_hamiltonian(&IonSpecies::te125(), 10.0).unwrap();
        let e = h.labelled_eigenvalues().unwrap();
        let (g0, g1, x0, x1) = (e[0], e[2], e[1], e[3]);
        assert!(g0.max(g1) < x0.min(x1));
        assert!((x0 - g0) > (x1 - g1)); // f_e0 > f_e1
        assert!((x0 - g0) - (x1 - g1) > 3.4e9);
    }

    #[test]
    fn rejects_nonpositive_field() {
        assert!(matches!(
            single_ion_hamiltonian(&IonSpecies::te125(), 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn one_ion_chain_equals_single_ion() {
        let cfg = ChainConfig::reference(1);
        let single = single_ion_hamiltonian(&cfg.species, cfg.b0).unwrap();
        assert_eq!(chain_hamiltonian(&cfg, false).unwrap(), single);
        let sec = chain_hamiltonian(&cfg, true).unwrap();
        assert!(sec.is_diagonal());
        for i in 0..4 {
            assert_eq!(sec.get(i, i), single.get(i, i));
        }
    }

    #[test]
    fn capacity_enforced() {
        assert!(matches!(
            chain_hamiltonian(&ChainConfig::reference(8), true),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn two_ion_nuclear_line_shifted_by_one_neighbour() {
        let cfg = ChainConfig::reference(2);
        let h = chain_hamiltonian(&cfg, true).unwrap();
        let e = h.labelled_eigenvalues().unwrap();
        let from = 0;
        let to = basis::nuclear_bit(1);
        let gap = e[to] - e[from];
        let t = build_frequency_table(&cfg).unwrap();
        let bare = t.sites[1].f_n + cfg.species.hyperfine_a_over_h / 2.0;
        let s = dipole_shift(&cfg, 0, 1).unwrap();
        assert!((bare - gap - s).abs() < 1e-3, "{}", bare - gap);
        assert!((s - 100.0).abs() < 5.0);
        assert!((gap - t.sites[1].f_nmr).abs() < 1e-3);
    }

    #[test]
    fn secular_model_matches_matrix_diagonal() {
        let cfg = ChainConfig::reference(3);
        let h = chain_hamiltonian(&cfg, true).unwrap();
        let m = SecularModel::new(&cfg).unwrap();
        let e0 = m.energy(0);
        for idx in 0..h.dimension() {
            let d = h.get(idx, idx).re;
            assert!((m.energy(idx) - d).abs() <= 1e-15 * d.abs().max(1.0) * 8.0);
            let rel = m.excitation_energy(idx);
            assert!((rel - (d - e0)).abs() < 1e-3, "{idx}: {rel} vs {}", d - e0);
        }
    }

    #[test]
    fn transitions_match_energy_differences() {
        let cfg = ChainConfig::reference(3);
        let m = SecularModel::new(&cfg).unwrap();
        for from in 0..basis::dimension(3) {
            for k in 0..3 {
                if !basis::electron_excited(from, k) {
                    let to = from | basis::electron_bit(k);
                    let d = m.excitation_energy(to) - m.excitation_energy(from);
                    let tol = 1e-15 * m.excitation_energy(to).abs().max(1.0) * 4.0;
                    assert!((d - m.electron_transition(from, k)).abs() < tol);
                }
                if !basis::nuclear_excited(from, k) {
                    let to = from | basis::nuclear_bit(k);
                    let d = m.excitation_energy(to) - m.excitation_energy(from);
                    let tol = 1e-15 * m.excitation_energy(to).abs().max(1.0) * 4.0;
                    assert!((d - m.nuclear_transition(from, k)).abs() < tol);
                }
            }
        }
    }

    #[test]
    fn flipping_control_electron_moves_neighbour_nmr_by_f_nd() {
        let cfg = ChainConfig::reference(3);
        let m = SecularModel::new(&cfg).unwrap();
        let t = build_frequency_table(&cfg).unwrap();
        let before = m.nuclear_transition(0, 1);
        let after = m.nuclear_transition(basis::electron_bit(0), 1);
        assert!((after - before - t.f_nd).abs() < 1e-6);
        assert!((t.f_nd - 200.0).abs() < 20.0);
    }
}
