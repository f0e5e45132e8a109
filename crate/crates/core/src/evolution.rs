// Copyright 2026 The stmqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Unitary evolution of a chain under rectangular pulses.
//!
//! In the frame rotating at the pulse carrier (rotating-wave approximation)
//! the generator is time independent:
//!
//! ```text
//! H_rot = sum_a (E_a - nu n_a) |a><a| + (f_R / 2) sum_k (e^{i phi} s+_k + h.c.)
//! ```
//!
//! where `n_a` counts excited spins of the driven channel and `s+_k` raises
//! spin `k` of that channel. The drive reaches every spin of the channel;
//! selectivity comes only from detuning. Because the drive never changes
//! the other channel, `H_rot` splits into 2^N blocks of size 2^N, each
//! exponentiated through a Hermitian eigendecomposition.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::basis;
use crate::config::ChainConfig;
use crate::error::{Error, Result};
use crate::hamiltonian::SecularModel;
use crate::pulse::{Channel, PulseSequence, PulseSpec, SequenceStep};
use crate::state::{phase_factor, ChainState};

fn channel_bits(channel: Channel, n_ions: usize) -> Vec<usize> {
    (0..n_ions)
        .map(|k| match channel {
            Channel::Electron => basis::electron_bit(k),
            Channel::Nuclear => basis::nuclear_bit(k),
        })
        .collect()
}

/// Applies one pulse. The state's clock advances by the pulse duration.
pub fn evolve_pulse(
    state: &ChainState,
    pulse: &PulseSpec,
    config: &ChainConfig,
) -> Result<ChainState> {
    pulse.validate()?;
    state.check_config(config)?;
    let model = SecularModel::new(config)?;
    evolve_pulse_with(&model, state, pulse)
}

fn evolve_pulse_with(
    model: &SecularModel,
    state: &ChainState,
    pulse: &PulseSpec,
) -> Result<ChainState> {
    let n = model.n_ions();
    let dim = basis::dimension(n);
    let bits = channel_bits(pulse.channel, n);
    let mask: usize = bits.iter().sum();
    let block = 1usize << n;
    let t0 = state.time();
    let tau = pulse.duration;
    let t1 = t0 + tau;
    let drive = Complex64::from_polar(pulse.rabi_frequency / 2.0, pulse.phase);
    let input = state.amplitudes();
    let mut out = vec![Complex64::new(0.0, 0.0); dim];

    let mut members = vec![0usize; block];
    let mut detuning = vec![0.0f64; block];
    let mut psi = nalgebra::DVector::<Complex64>::zeros(block);

    for base in (0..dim).filter(|i| i & mask == 0) {
        for (l, m) in members.iter_mut().enumerate() {
            *m = base
                | bits
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| l >> k & 1 == 1)
                    .map(|(_, b)| b)
                    .sum::<usize>();
        }
        if members.iter().all(|&m| input[m].norm_sqr() == 0.0) {
            continue;
        }
        for l in 0..block {
            detuning[l] = model.excitation_energy(members[l])
                - pulse.carrier_frequency * l.count_ones() as f64;
        }
        let offset = detuning[0];
        for d in detuning.iter_mut() {
            *d -= offset;
        }

        let mut h = DMatrix::<Complex64>::zeros(block, block);
        for l in 0..block {
            h[(l, l)] = Complex64::new(detuning[l], 0.0);
            for k in 0..n {
                if l >> k & 1 == 0 {
                    let j = l | 1 << k;
                    h[(j, l)] = drive;
                    h[(l, j)] = drive.conj();
                }
            }
        }
        let eig = h.symmetric_eigen();
        let v = &eig.eigenvectors;

        for l in 0..block {
            psi[l] = input[members[l]] * phase_factor(-detuning[l] * t0);
        }
        let mut coeffs = v.adjoint() * &psi;
        for (c, lam) in coeffs.iter_mut().zip(eig.eigenvalues.iter()) {
            *c *= phase_factor(-lam * tau);
        }
        let evolved = v * coeffs;
        for l in 0..block {
            out[members[l]] = evolved[l] * phase_factor(detuning[l] * t1);
        }
    }
    let result = ChainState::from_parts(n, out, t1);
    let norm = result.norm();
    if !norm.is_finite() {
        return Err(Error::Numeric("non-finite amplitudes after pulse".into()));
    }
    Ok(result)
}

/// Free evolution under the secular chain Hamiltonian. With amplitudes
/// held in its interaction frame this only advances the clock; lab-frame
/// phases follow from [`ChainState::lab_amplitudes`].
pub fn evolve_free(state: &ChainState, duration: f64, config: &ChainConfig) -> Result<ChainState> {
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::Domain(format!(
            "free evolution duration must be >= 0, got {duration}"
        )));
    }
    state.check_config(config)?;
    let mut out = state.clone();
    out.set_time(state.time() + duration);
    Ok(out)
}

/// Applies the steps of `seq` left to right.
pub fn run_sequence(
    state: &ChainState,
    seq: &PulseSequence,
    config: &ChainConfig,
) -> Result<ChainState> {
    seq.validate()?;
    state.check_config(config)?;
    let model = SecularModel::new(config)?;
    let mut s = state.clone();
    for step in &seq.steps {
        s = match step {
            SequenceStep::Pulse(p) => evolve_pulse_with(&model, &s, p)?,
            SequenceStep::Delay(d) => {
                let mut next = s;
                next.set_time(next.time() + d);
                next
            }
        };
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frequency::build_frequency_table;
    use crate::pulse::pi_pulse_duration;

    #[test]
    fn resonant_pi_flips_isolated_nucleus() {
        let cfg = ChainConfig::reference(1);
        let t = build_frequency_table(&cfg).unwrap();
        let p = PulseSpec::pi(Channel::Nuclear, t.sites[0].f_nmr, 5e3);
        let s = evolve_pulse(&ChainState::ground(1).unwrap(), &p, &cfg).unwrap();
        assert!(s.nuclear_excited_population(0) > 1.0 - 1e-9);
        assert!((s.time() - pi_pulse_duration(5e3)).abs() < 1e-18);
    }

    #[test]
    fn electron_pi_selects_hyperfine_branch() {
        let cfg = ChainConfig::reference(1);
        let t = build_frequency_table(&cfg).unwrap();
        let p = PulseSpec::pi(Channel::Electron, t.sites[0].f_e1, 1e6);
        let g = evolve_pulse(&ChainState::ground(1).unwrap(), &p, &cfg).unwrap();
        assert!(g.electron_excited_population(0) < 1e-6);
        let x = ChainState::with_nuclear_bits(&[true]).unwrap();
        let x = evolve_pulse(&x, &p, &cfg).unwrap();
        assert!(x.electron_excited_population(0) > 1.0 - 1e-9);
    }

    #[test]
    fn shape_mismatch() {
        let cfg = ChainConfig::reference(2);
        let p = PulseSpec::pi(Channel::Nuclear, 1e9, 1e3);
        assert!(matches!(
            evolve_pulse(&ChainState::ground(1).unwrap(), &p, &cfg),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn free_evolution_keeps_populations() {
        let cfg = ChainConfig::reference(2);
        let s = ChainState::with_nuclear_bits(&[true, false]).unwrap();
        let f = evolve_free(&s, 0.0, &cfg).unwrap();
        assert_eq!(f, s);
        let f = evolve_free(&s, 1e-3, &cfg).unwrap();
        assert_eq!(f.amplitudes(), s.amplitudes());
        assert!(evolve_free(&s, -1.0, &cfg).is_err());
    }

    #[test]
    fn empty_sequence_is_identity() {
        let cfg = ChainConfig::reference(2);
        let s = ChainState::with_nuclear_bits(&[true, true]).unwrap();
        assert_eq!(run_sequence(&s, &PulseSequence::new(), &cfg).unwrap(), s);
    }
}
