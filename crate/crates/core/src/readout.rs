// Copyright 2026 The stmqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Readout of a nuclear spin through the Larmor frequency of its electron.
//!
//! The tunnelling current is modelled phenomenologically: a unit baseline
//! modulated at the electron precession frequency plus white Gaussian
//! noise. The detector is heterodyne, so a trace holds the beat against a
//! local oscillator. Detection is a periodogram peak search refined by
//! three-point parabolic interpolation.

use std::cell::RefCell;
use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::{Fft, FftPlanner};

use crate::basis;
use crate::config::ChainConfig;
use crate::error::{Error, Result};
use crate::frequency::{build_frequency_table, dipole_coupling};
use crate::state::ChainState;

/// Sampled beat signal.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutTrace {
    pub samples: Vec<f64>,
    /// Hz.
    pub sample_rate: f64,
    /// Local-oscillator frequency subtracted before sampling, Hz.
    pub mixdown_frequency: f64,
}

impl ReadoutTrace {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# sample_rate={:e}\n# mixdown_frequency={:e}\nt,current\n",
            self.sample_rate, self.mixdown_frequency
        );
        for (i, s) in self.samples.iter().enumerate() {
            out.push_str(&format!("{:e},{:e}\n", i as f64 / self.sample_rate, s));
        }
        out
    }
}

/// Inputs of [`synthesize_trace`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSpec {
    /// Larmor frequency carried by the current, Hz.
    pub true_frequency: f64,
    /// Relative modulation depth.
    pub modulation_depth: f64,
    /// Relative noise standard deviation per sample.
    pub noise_sigma: f64,
    /// s.
    pub duration: f64,
    /// Hz.
    pub sample_rate: f64,
    /// Hz.
    pub mixdown_frequency: f64,
}

/// Samples `1 + depth cos(2 pi (f - f_lo) t + phi0) + noise`. The phase
/// `phi0` and the noise come from a ChaCha8 stream seeded with `seed`.
pub fn synthesize_trace(spec: &TraceSpec, seed: u64) -> Result<ReadoutTrace> {
    let n = (spec.duration * spec.sample_rate).round();
    if !(n >= 2.0) || !n.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "trace needs at least 2 samples, duration*sample_rate = {n}"
        )));
    }
    if !(spec.noise_sigma >= 0.0) {
        return Err(Error::InvalidConfig("noise_sigma must be >= 0".into()));
    }
    let beat = spec.true_frequency - spec.mixdown_frequency;
    check_nyquist(spec.sample_rate, beat)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi0 = rng.random::<f64>() * TAU;
    let noise = Normal::new(0.0, spec.noise_sigma)
        .map_err(|e| Error::InvalidConfig(format!("noise: {e}")))?;
    let samples = (0..n as usize)
        .map(|i| {
            let t = i as f64 / spec.sample_rate;
            // beat * t reduced to a fraction of a cycle before scaling
            let cycles = beat * t;
            let arg = TAU * (cycles - cycles.floor()) + phi0;
            let mut v = 1.0 + spec.modulation_depth * arg.cos();
            if spec.noise_sigma > 0.0 {
                v += noise.sample(&mut rng);
            }
            v
        })
        .collect();
    Ok(ReadoutTrace {
        samples,
        sample_rate: spec.sample_rate,
        mixdown_frequency: spec.mixdown_frequency,
    })
}

/// Errors unless `sample_rate > 2 |beat|`.
pub fn check_nyquist(sample_rate: f64, beat: f64) -> Result<()> {
    let min_rate = 2.0 * beat.abs();
    if !(sample_rate > min_rate) {
        return Err(Error::Nyquist {
            sample_rate,
            beat: beat.abs(),
            min_rate,
        });
    }
    Ok(())
}

/// Electron lines expected for the two nuclear states of one site, Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidates {
    pub f_e0: f64,
    pub f_e1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuclearState {
    Ground,
    Excited,
    Indeterminate,
}

impl NuclearState {
    pub fn bit(self) -> Option<bool> {
        match self {
            NuclearState::Ground => Some(false),
            NuclearState::Excited => Some(true),
            NuclearState::Indeterminate => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionResult {
    /// Absolute frequency estimate (beat plus local oscillator), Hz.
    pub estimated_frequency: f64,
    pub decided_state: NuclearState,
    /// Peak spectral amplitude over the RMS off-peak amplitude, i.e. the
    /// square root of peak power over mean off-peak power.
    pub peak_snr: f64,
}

pub const DEFAULT_SNR_THRESHOLD: f64 = 5.0;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_for(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

/// Hann window of length `n` and its energy, cached per thread.
fn hann(n: usize) -> (Arc<Vec<f64>>, f64) {
    thread_local! {
        static CACHE: RefCell<Option<(Arc<Vec<f64>>, f64)>> = const { RefCell::new(None) };
    }
    CACHE.with(|c| {
        let mut c = c.borrow_mut();
        if let Some((w, e)) = c.as_ref() {
            if w.len() == n {
                return (w.clone(), *e);
            }
        }
        let w: Vec<f64> = (0..n)
            .map(|i| 0.5 - 0.5 * (TAU * i as f64 / n as f64).cos())
            .collect();
        let e = w.iter().map(|x| x * x).sum::<f64>();
        let entry = (Arc::new(w), e);
        *c = Some(entry.clone());
        entry
    })
}

/// One-sided periodogram `|X_k|^2 / sum(w^2)` of the mean-removed,
/// Hann-windowed trace for bins 0..=N/2.
pub fn periodogram(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let (w, energy) = hann(n);
    let mut buf: Vec<Complex64> = samples
        .iter()
        .zip(w.iter())
        .map(|(&s, &w)| Complex64::new((s - mean) * w, 0.0))
        .collect();
    fft_for(n).process(&mut buf);
    buf[..=n / 2]
        .iter()
        .map(|x| x.norm_sqr() / energy.max(f64::MIN_POSITIVE))
        .collect()
}

/// Folds a beat frequency into the first Nyquist zone [0, fs/2].
fn fold(freq: f64, fs: f64) -> f64 {
    let f = freq.abs().rem_euclid(fs);
    if f > fs / 2.0 {
        fs - f
    } else {
        f
    }
}

/// Estimates the Larmor frequency in `trace` and classifies the nuclear
/// state by the nearest candidate line.
pub fn detect_larmor(
    trace: &ReadoutTrace,
    candidates: Candidates,
    snr_threshold: f64,
) -> Result<DetectionResult> {
    if candidates.f_e0 == candidates.f_e1 {
        return Err(Error::Domain("candidate frequencies must differ".into()));
    }
    let n = trace.samples.len();
    if n < 2 {
        return Err(Error::InvalidConfig(
            "trace needs at least 2 samples".into(),
        ));
    }
    let fs = trace.sample_rate;
    let lo = trace.mixdown_frequency;
    let bin = fs / n as f64;
    let indeterminate = |f: f64, snr: f64| DetectionResult {
        estimated_frequency: f,
        decided_state: NuclearState::Indeterminate,
        peak_snr: snr,
    };

    let power = periodogram(&trace.samples);
    let last = power.len() - 1;
    if last < 1 {
        return Ok(indeterminate(lo, 0.0));
    }
    let (kp, peak) = power[1..]
        .iter()
        .enumerate()
        .map(|(i, p)| (i + 1, *p))
        .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    if peak <= 0.0 {
        return Ok(indeterminate(lo, 0.0));
    }
    let (mut floor_sum, mut floor_n) = (0.0, 0usize);
    for (k, p) in power.iter().enumerate().skip(1) {
        if k.abs_diff(kp) > 2 {
            floor_sum += p;
            floor_n += 1;
        }
    }
    let floor = if floor_n > 0 {
        floor_sum / floor_n as f64
    } else {
        0.0
    };
    let snr = if floor > 0.0 {
        (peak / floor).sqrt()
    } else {
        f64::INFINITY
    };

    let mut offset = 0.0;
    if kp > 1 && kp < last {
        let (a, b, c) = (power[kp - 1].ln(), peak.ln(), power[kp + 1].ln());
        let denom = a - 2.0 * b + c;
        if denom.is_finite() && denom != 0.0 {
            offset = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
        }
    }
    let beat = (kp as f64 + offset) * bin;

    let b0 = fold(candidates.f_e0 - lo, fs);
    let b1 = fold(candidates.f_e1 - lo, fs);
    let (d0, d1) = ((beat - b0).abs(), (beat - b1).abs());
    let (nearest_state, nearest_f, nearest_d) = if d0 <= d1 {
        (NuclearState::Ground, candidates.f_e0, d0)
    } else {
        (NuclearState::Excited, candidates.f_e1, d1)
    };
    let side = if nearest_f >= lo { 1.0 } else { -1.0 };
    let estimate = lo + side * beat;

    let resolution = 1.0 / trace.duration();
    let separation = (b0 - b1).abs();
    if resolution >= (candidates.f_e0 - candidates.f_e1).abs() || separation <= resolution {
        return Ok(indeterminate(estimate, snr));
    }
    if snr < snr_threshold || nearest_d > separation / 2.0 {
        return Ok(indeterminate(estimate, snr));
    }
    Ok(DetectionResult {
        estimated_frequency: estimate,
        decided_state: nearest_state,
        peak_snr: snr,
    })
}

/// Trace and detector settings for a single-site measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutParams {
    pub modulation_depth: f64,
    pub noise_sigma: f64,
    /// s.
    pub duration: f64,
    /// Hz.
    pub sample_rate: f64,
    /// Local oscillator, Hz. `None` puts it half a hyperfine splitting
    /// below the lower of the two lines.
    pub mixdown_frequency: Option<f64>,
    pub snr_threshold: f64,
}

impl Default for ReadoutParams {
    /// Depth 0.1, noise 1.0, 65536 samples at 16 GS/s (4.096 us).
    fn default() -> Self {
        ReadoutParams {
            modulation_depth: 0.1,
            noise_sigma: 1.0,
            duration: 65536.0 / 16e9,
            sample_rate: 16e9,
            mixdown_frequency: None,
            snr_threshold: DEFAULT_SNR_THRESHOLD,
        }
    }
}

impl ReadoutParams {
    pub fn noiseless() -> Self {
        ReadoutParams {
            noise_sigma: 0.0,
            ..Self::default()
        }
    }

    pub fn local_oscillator(&self, c: Candidates, hyperfine: f64) -> f64 {
        self.mixdown_frequency
            .unwrap_or_else(|| c.f_e0.min(c.f_e1) - hyperfine / 2.0)
    }
}

/// Outcome of [`measure_nuclear`].
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    /// Bit reported by the detector.
    pub bit: bool,
    /// Projection outcome actually realised in the state.
    pub projected: bool,
    pub detection: DetectionResult,
    pub candidates: Candidates,
    pub state: ChainState,
}

/// Electron lines of site `k`, including the mean dipole field of the
/// other nuclei in `state`.
pub fn site_candidates(state: &ChainState, k: usize, config: &ChainConfig) -> Result<Candidates> {
    config.check_site(k)?;
    let table = build_frequency_table(config)?;
    let s = table.site(k)?;
    let mut shift = 0.0;
    for m in 0..config.n_ions {
        if m != k {
            let iz = state.nuclear_excited_population(m) - 0.5;
            shift += dipole_coupling(config, k, m)? * iz;
        }
    }
    Ok(Candidates {
        f_e0: s.f_e0 + shift,
        f_e1: s.f_e1 + shift,
    })
}

/// Projective measurement of nuclear spin `k` through its electron line.
///
/// The outcome is drawn from the state's populations, a trace carrying
/// the matching electron frequency is synthesized and detected, and the
/// state is projected onto the drawn nuclear value with electron `k` in
/// its ground state. An indeterminate detection leaves the state untouched
/// and returns [`Error::MeasurementFailure`].
pub fn measure_nuclear(
    state: &ChainState,
    k: usize,
    config: &ChainConfig,
    params: &ReadoutParams,
    seed: u64,
) -> Result<Measurement> {
    state.check_config(config)?;
    let candidates = site_candidates(state, k, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p1 = state.nuclear_excited_population(k);
    let outcome = rng.random::<f64>() < p1;
    let lo = params.local_oscillator(candidates, config.species.hyperfine_a_over_h);
    let spec = TraceSpec {
        true_frequency: if outcome {
            candidates.f_e1
        } else {
            candidates.f_e0
        },
        modulation_depth: params.modulation_depth,
        noise_sigma: params.noise_sigma,
        duration: params.duration,
        sample_rate: params.sample_rate,
        mixdown_frequency: lo,
    };
    let trace = synthesize_trace(&spec, rng.next_u64())?;
    let detection = detect_larmor(&trace, candidates, params.snr_threshold)?;
    let bit = detection
        .decided_state
        .bit()
        .ok_or_else(|| Error::MeasurementFailure {
            site: k,
            reason: format!(
                "indeterminate detection (estimate {:e} Hz, snr {:.3})",
                detection.estimated_frequency, detection.peak_snr
            ),
        })?;
    let mut post = state.clone();
    let nbit = basis::nuclear_bit(k);
    let ebit = basis::electron_bit(k);
    post.project(|i| (i & nbit != 0) == outcome && i & ebit == 0)
        .map_err(|_| Error::MeasurementFailure {
            site: k,
            reason: "no weight left with the monitored electron in its ground state".into(),
        })?;
    Ok(Measurement {
        bit,
        projected: outcome,
        detection,
        candidates,
        state: post,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(f: f64, lo: f64, sigma: f64) -> TraceSpec {
        TraceSpec {
            true_frequency: f,
            modulation_depth: 0.1,
            noise_sigma: sigma,
            duration: 4096.0 / 16e9,
            sample_rate: 16e9,
            mixdown_frequency: lo,
        }
    }

    #[test]
    fn noiseless_tone_peak_within_one_bin() {
        let lo = 100e9;
        let tr = synthesize_trace(&spec(lo + 1.3e9, lo, 0.0), 7).unwrap();
        let p = periodogram(&tr.samples);
        let kp = (1..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
        let bin = tr.sample_rate / tr.samples.len() as f64;
        assert!((kp as f64 * bin - 1.3e9).abs() <= bin);
    }

    #[test]
    fn beat_for_f_e0_at_mean_lo() {
        let cfg = ChainConfig::reference(1);
        let t = build_frequency_table(&cfg).unwrap();
        let lo = t.electron_larmor(0).unwrap();
        assert!((t.sites[0].f_e0 - lo - 1.75e9).abs() < 1e-3);
        let mut sp = spec(t.sites[0].f_e0, lo, 0.0);
        sp.sample_rate = 3.4e9;
        assert!(matches!(
            synthesize_trace(&sp, 1),
            Err(Error::Nyquist { .. })
        ));
        sp.sample_rate = 3.6e9;
        assert!(synthesize_trace(&sp, 1).is_ok());
    }

    #[test]
    fn deterministic_for_seed() {
        let a = synthesize_trace(&spec(101e9, 100e9, 1.0), 42).unwrap();
        let b = synthesize_trace(&spec(101e9, 100e9, 1.0), 42).unwrap();
        let c = synthesize_trace(&spec(101e9, 100e9, 1.0), 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn constant_trace_is_indeterminate() {
        let tr = ReadoutTrace {
            samples: vec![1.0; 1024],
            sample_rate: 16e9,
            mixdown_frequency: 0.0,
        };
        let c = Candidates {
            f_e0: 5e9,
            f_e1: 1.5e9,
        };
        let d = detect_larmor(&tr, c, 5.0).unwrap();
        assert_eq!(d.decided_state, NuclearState::Indeterminate);
        assert_eq!(d.peak_snr, 0.0);
    }

    #[test]
    fn short_trace_is_indeterminate() {
        let c = Candidates {
            f_e0: 105.25e9,
            f_e1: 101.75e9,
        };
        let mut sp = spec(c.f_e0, 100e9, 0.0);
        sp.duration = 4.0 / 16e9; // 0.25 ns < 1/(3.5 GHz)
        let tr = synthesize_trace(&sp, 3).unwrap();
        let d = detect_larmor(&tr, c, 5.0).unwrap();
        assert_eq!(d.decided_state, NuclearState::Indeterminate);
    }

    #[test]
    fn lo_midway_cannot_discriminate() {
        let c = Candidates {
            f_e0: 101.75e9,
            f_e1: 98.25e9,
        };
        let tr = synthesize_trace(&spec(c.f_e0, 100e9, 0.0), 3).unwrap();
        let d = detect_larmor(&tr, c, 5.0).unwrap();
        assert_eq!(d.decided_state, NuclearState::Indeterminate);
    }

    #[test]
    fn noiseless_decisions() {
        let c = Candidates {
            f_e0: 105.25e9,
            f_e1: 101.75e9,
        };
        for (f, want) in [
            (c.f_e0, NuclearState::Ground),
            (c.f_e1, NuclearState::Excited),
        ] {
            let tr = synthesize_trace(&spec(f, 100e9, 0.0), 11).unwrap();
            let d = detect_larmor(&tr, c, 5.0).unwrap();
            assert_eq!(d.decided_state, want);
            let bin = 16e9 / 4096.0;
            assert!((d.estimated_frequency - f).abs() < bin / 2.0);
        }
    }

    #[test]
    fn measuring_eigenstate() {
        let cfg = ChainConfig::reference(2);
        let s = ChainState::with_nuclear_bits(&[false, true]).unwrap();
        for seed in 0..5 {
            let m0 = measure_nuclear(&s, 0, &cfg, &ReadoutParams::noiseless(), seed).unwrap();
            assert!(!m0.bit && !m0.projected);
            assert_eq!(m0.state, s);
            let m1 = measure_nuclear(&s, 1, &cfg, &ReadoutParams::noiseless(), seed).unwrap();
            assert!(m1.bit);
        }
    }
}
