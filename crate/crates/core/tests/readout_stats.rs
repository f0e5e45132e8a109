// Copyright 2026 The stmqc Authors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stmqc::basis;
use stmqc::config::ChainConfig;
use stmqc::frequency::build_frequency_table;
use stmqc::readout::{
    detect_larmor, measure_nuclear, periodogram, site_candidates, synthesize_trace, Candidates,
    NuclearState, ReadoutParams, TraceSpec, DEFAULT_SNR_THRESHOLD,
};
use stmqc::state::ChainState;
use stmqc::Error;

fn reference_candidates() -> Candidates {
    let t = build_frequency_table(&ChainConfig::reference(1)).unwrap();
    Candidates {
        f_e0: t.sites[0].f_e0,
        f_e1: t.sites[0].f_e1,
    }
}

fn trace_spec(f: f64, sigma: f64, c: Candidates) -> TraceSpec {
    let p = ReadoutParams::default();
    TraceSpec {
        true_frequency: f,
        modulation_depth: p.modulation_depth,
        noise_sigma: sigma,
        duration: p.duration,
        sample_rate: p.sample_rate,
        mixdown_frequency: p.local_oscillator(c, 3.5e9),
    }
}

fn superposition(n: usize, k: usize) -> ChainState {
    let mut amps = vec![Complex64::new(0.0, 0.0); basis::dimension(n)];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    amps[0] = Complex64::new(h, 0.0);
    amps[basis::nuclear_bit(k)] = Complex64::new(0.0, h);
    ChainState::from_amplitudes(n, amps, 0.0).unwrap()
}

#[test]
fn decision_rate_over_a_thousand_seeds() {
    let c = reference_candidates();
    let spec0 = trace_spec(c.f_e0, 1.0, c);
    assert!(1.0 / spec0.duration < (c.f_e0 - c.f_e1) / 10.0);
    for (truth, want) in [
        (c.f_e0, NuclearState::Ground),
        (c.f_e1, NuclearState::Excited),
    ] {
        let spec = trace_spec(truth, 1.0, c);
        let correct = (0..1000u64)
            .filter(|&seed| {
                let tr = synthesize_trace(&spec, seed).unwrap();
                detect_larmor(&tr, c, DEFAULT_SNR_THRESHOLD)
                    .unwrap()
                    .decided_state
                    == want
            })
            .count();
        assert!(correct as f64 / 1000.0 >= 0.99, "{want:?}: {correct}");
    }
}

#[test]
fn fixed_seed_is_bit_identical() {
    let c = reference_candidates();
    let spec = trace_spec(c.f_e1, 1.0, c);
    let a = synthesize_trace(&spec, 42).unwrap();
    let b = synthesize_trace(&spec, 42).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, synthesize_trace(&spec, 43).unwrap());
    let s = superposition(2, 1);
    let cfg = ChainConfig::reference(2);
    let p = ReadoutParams::default();
    assert_eq!(
        measure_nuclear(&s, 1, &cfg, &p, 9).unwrap(),
        measure_nuclear(&s, 1, &cfg, &p, 9).unwrap()
    );
}

#[test]
fn beat_against_mean_line() {
    let c = reference_candidates();
    let mean = 0.5 * (c.f_e0 + c.f_e1);
    let spec = TraceSpec {
        noise_sigma: 0.0,
        mixdown_frequency: mean,
        ..trace_spec(c.f_e0, 0.0, c)
    };
    let tr = synthesize_trace(&spec, 1).unwrap();
    let p = periodogram(&tr.samples);
    let kp = (1..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
    let bin = tr.sample_rate / tr.samples.len() as f64;
    assert!((kp as f64 * bin - 1.75e9).abs() <= bin);
}

#[test]
fn superposition_outcomes_are_binomial() {
    let cfg = ChainConfig::reference(1);
    let s = superposition(1, 0);
    let params = ReadoutParams {
        duration: 4096.0 / 16e9,
        ..ReadoutParams::noiseless()
    };
    let trials = 10_000u64;
    let ones = (0..trials)
        .filter(|&seed| measure_nuclear(&s, 0, &cfg, &params, seed).unwrap().bit)
        .count() as f64;
    let sigma = (trials as f64 * 0.25).sqrt();
    assert!((ones - 5000.0).abs() <= 3.0 * sigma, "{ones}");
}

#[test]
fn measurement_projects_and_repeats() {
    let cfg = ChainConfig::reference(3);
    let params = ReadoutParams::default();
    for seed in 0..40u64 {
        let s = superposition(3, 1);
        let m = measure_nuclear(&s, 1, &cfg, &params, seed).unwrap();
        assert_eq!(m.bit, m.projected);
        assert!((m.state.norm() - 1.0).abs() < 1e-12);
        for i in 0..m.state.dimension() {
            if basis::nuclear_excited(i, 1) != m.bit {
                assert_eq!(m.state.amplitudes()[i].norm(), 0.0);
            }
        }
        let again =
            measure_nuclear(&m.state, 1, &cfg, &params, seed.wrapping_mul(7919) + 1).unwrap();
        assert_eq!(again.bit, m.bit);
        assert_eq!(again.state, m.state);
    }
}

#[test]
fn eigenstate_reads_its_line() {
    let cfg = ChainConfig::reference(3);
    let s = ChainState::with_nuclear_bits(&[false, true, false]).unwrap();
    for (k, bit) in [(0, false), (1, true), (2, false)] {
        let m = measure_nuclear(&s, k, &cfg, &ReadoutParams::noiseless(), 5).unwrap();
        assert_eq!(m.bit, bit);
        let c = site_candidates(&s, k, &cfg).unwrap();
        let want = if bit { c.f_e1 } else { c.f_e0 };
        let bin = 1.0 / ReadoutParams::default().duration;
        assert!((m.detection.estimated_frequency - want).abs() < bin);
    }
}

#[test]
fn estimator_accuracy() {
    let c = reference_candidates();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for sigma in [1.0, 1.5, 2.0] {
        let (mut ok, mut counted) = (0, 0);
        for seed in 0..500u64 {
            let truth =
                if seed % 2 == 0 { c.f_e0 } else { c.f_e1 } + 5e6 * (rng.random::<f64>() - 0.5);
            let spec = trace_spec(truth, sigma, c);
            let tr = synthesize_trace(&spec, seed).unwrap();
            let d = detect_larmor(&tr, c, DEFAULT_SNR_THRESHOLD).unwrap();
            if d.peak_snr >= 5.0 {
                counted += 1;
                if (d.estimated_frequency - truth).abs() <= 1.0 / (2.0 * spec.duration) {
                    ok += 1;
                }
            }
        }
        assert!(counted > 0);
        assert!(
            ok as f64 >= 0.99 * counted as f64,
            "sigma {sigma}: {ok}/{counted}"
        );
    }
}

#[test]
fn short_trace_is_indeterminate_not_an_error() {
    let c = reference_candidates();
    let spec = TraceSpec {
        duration: 0.5 / (c.f_e0 - c.f_e1),
        ..trace_spec(c.f_e0, 0.0, c)
    };
    let tr = synthesize_trace(&spec, 3).unwrap();
    let d = detect_larmor(&tr, c, DEFAULT_SNR_THRESHOLD).unwrap();
    assert_eq!(d.decided_state, NuclearState::Indeterminate);
}

#[test]
fn nyquist_violation_names_minimum_rate() {
    let c = reference_candidates();
    let spec = TraceSpec {
        sample_rate: 4e9,
        ..trace_spec(c.f_e0, 0.0, c)
    };
    match synthesize_trace(&spec, 0) {
        Err(Error::Nyquist { min_rate, .. }) => assert!((min_rate - 10.5e9).abs() < 1e3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn constant_trace_is_indeterminate() {
    let c = reference_candidates();
    let tr = stmqc::readout::ReadoutTrace {
        samples: vec![1.0; 1024],
        sample_rate: 16e9,
        mixdown_frequency: c.f_e1 - 1.75e9,
    };
    let d = detect_larmor(&tr, c, DEFAULT_SNR_THRESHOLD).unwrap();
    assert_eq!(d.decided_state, NuclearState::Indeterminate);
    assert_eq!(d.peak_snr, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decision_agrees_with_nearest_candidate(seed in any::<u64>(), sigma in 0.0f64..20.0, excited in any::<bool>()) {
        let c = reference_candidates();
        let spec = TraceSpec {
            duration: 4096.0 / 16e9,
            ..trace_spec(if excited { c.f_e1 } else { c.f_e0 }, sigma, c)
        };
        let tr = synthesize_trace(&spec, seed).unwrap();
        let d = detect_larmor(&tr, c, DEFAULT_SNR_THRESHOLD).unwrap();
        if let Some(bit) = d.decided_state.bit() {
            let nearest_excited =
                (d.estimated_frequency - c.f_e1).abs() < (d.estimated_frequency - c.f_e0).abs();
            prop_assert_eq!(bit, nearest_excited);
            prop_assert!(d.peak_snr >= DEFAULT_SNR_THRESHOLD);
        }
    }
}
