// Copyright 2026 The stmqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Executable protocols: chain initialization, one-qubit rotations, the
//! three-pulse Control-Not, and probe-set gate fidelity.
//!
//! Fidelities are evaluated in the interaction frame of the secular chain
//! Hamiltonian, the frame in which every idle qubit is stationary.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis;
use crate::config::ChainConfig;
use crate::constants::CODATA;
use crate::error::{Error, Result};
use crate::evolution::{evolve_pulse, run_sequence};
use crate::frequency::{build_frequency_table, FrequencyTable};
use crate::hamiltonian::SecularModel;
use crate::pulse::{synchronized_rabi, Channel, PulseSequence, PulseSpec, SequenceStep};
use crate::readout::{measure_nuclear, ReadoutParams};
use crate::state::ChainState;

/// Electron excitation above which a state does not count as polarized.
pub const POLARIZATION_TOLERANCE: f64 = 1e-9;

/// Carrier assigned to one protocol step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub label: String,
    pub channel: Channel,
    pub site: usize,
    pub frequency: f64,
}

/// Execution record of a protocol run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProtocolReport {
    pub name: String,
    pub sequence: PulseSequence,
    pub steps: Vec<StepRecord>,
    /// (site, reported bit) for every readout performed.
    pub outcomes: Vec<(usize, bool)>,
    /// Named quality metrics, each in [0, 1].
    pub fidelities: Vec<(String, f64)>,
    /// Sum of pulse and delay durations, s.
    pub duration: f64,
    pub warnings: Vec<String>,
    /// Frame phases (rad) applied after the pulses, per nuclear site.
    pub frame_phases: Vec<(usize, f64)>,
}

impl ProtocolReport {
    fn new(name: &str) -> Self {
        ProtocolReport {
            name: name.into(),
            ..Default::default()
        }
    }

    fn push_pulse(&mut self, label: &str, site: usize, pulse: PulseSpec) {
        self.steps.push(StepRecord {
            label: label.into(),
            channel: pulse.channel,
            site,
            frequency: pulse.carrier_frequency,
        });
        self.sequence.push(SequenceStep::Pulse(pulse));
        self.duration = self.sequence.total_duration();
    }

    pub fn fidelity(&self, name: &str) -> Option<f64> {
        self.fidelities
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }

    pub fn pulse_count(&self) -> usize {
        self.sequence
            .steps
            .iter()
            .filter(|s| matches!(s, SequenceStep::Pulse(_)))
            .count()
    }

    /// Plain-text report, one `key: value` per line.
    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let _ = writeln!(o, "protocol: {}", self.name);
        let _ = writeln!(o, "duration_s: {:e}", self.duration);
        let _ = writeln!(o, "pulses: {}", self.pulse_count());
        for s in &self.steps {
            let _ = writeln!(
                o,
                "step: {} channel={} site={} frequency_hz={:e}",
                s.label, s.channel, s.site, s.frequency
            );
        }
        for (site, bit) in &self.outcomes {
            let _ = writeln!(o, "outcome: site={site} bit={}", *bit as u8);
        }
        for (site, ph) in &self.frame_phases {
            let _ = writeln!(o, "frame_phase: site={site} rad={ph:e}");
        }
        for (n, v) in &self.fidelities {
            let _ = writeln!(o, "fidelity: {n}={v:e}");
        }
        for w in &self.warnings {
            let _ = writeln!(o, "warning: {w}");
        }
        o
    }

    pub const CSV_HEADER: &'static str = "protocol,pulses,duration_s,outcomes,fidelities,warnings";

    /// One CSV row for batch sweeps; list fields are `;`-separated.
    pub fn to_csv_row(&self) -> String {
        let outcomes: Vec<String> = self
            .outcomes
            .iter()
            .map(|(s, b)| format!("{s}:{}", *b as u8))
            .collect();
        let fids: Vec<String> = self
            .fidelities
            .iter()
            .map(|(n, v)| format!("{n}={v:e}"))
            .collect();
        format!(
            "{},{},{:e},{},{},{}",
            self.name,
            self.pulse_count(),
            self.duration,
            outcomes.join(";"),
            fids.join(";"),
            self.warnings.len()
        )
    }
}

/// A protocol that stopped part-way, with what it had done so far.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{} aborted: {error}", report.name)]
pub struct ProtocolAbort {
    pub error: Error,
    pub report: ProtocolReport,
}

/// Equilibrium excited-state population of the electron at site `k`.
pub fn thermal_electron_excitation(config: &ChainConfig, k: usize) -> Result<f64> {
    let t = build_frequency_table(config)?;
    let f = t.electron_larmor(k)?;
    let x = CODATA.planck_h * f / (CODATA.boltzmann_k * config.temperature);
    Ok(1.0 / (1.0 + x.exp()))
}

fn check_polarized(state: &ChainState) -> Result<()> {
    let p = state.electron_excitation();
    if p > POLARIZATION_TOLERANCE {
        return Err(Error::Precondition(format!(
            "electrons must be polarized; excited population is {p:e}"
        )));
    }
    Ok(())
}

/// Default one-qubit Rabi frequency: the largest value not above a fifth
/// of the nuclear site step whose pi-pulse leaves the neighbouring lines
/// unflipped.
pub fn default_onequbit_rabi(table: &FrequencyTable) -> Result<f64> {
    synchronized_rabi(table.delta_f_n, table.delta_f_n.abs() / 5.0)
}

/// Default electron Rabi frequency: synchronized against the electron site
/// step, at most a tenth of it.
pub fn default_electron_rabi(table: &FrequencyTable) -> Result<f64> {
    synchronized_rabi(table.delta_f_e, table.delta_f_e.abs() / 10.0)
}

/// Default Rabi frequency of the conditional nuclear pulse.
pub fn default_gate_rabi(table: &FrequencyTable) -> Result<f64> {
    synchronized_rabi(table.f_nd, table.f_nd / 2.0)
}

/// Measures every site in turn and flips the nuclei found excited.
pub fn initialize_chain(
    config: &ChainConfig,
    state: &ChainState,
    readout: &ReadoutParams,
    nuclear_rabi: f64,
    seed: u64,
) -> std::result::Result<(ChainState, ProtocolReport), Box<ProtocolAbort>> {
    let mut report = ProtocolReport::new("initialize");
    let abort = |error: Error, report: &ProtocolReport| {
        Box::new(ProtocolAbort {
            error,
            report: report.clone(),
        })
    };
    let prepared = (|| -> Result<FrequencyTable> {
        state.check_config(config)?;
        check_polarized(state)?;
        build_frequency_table(config)
    })();
    let table = prepared.map_err(|e| abort(e, &report))?;
    if nuclear_rabi >= table.delta_f_n.abs() {
        report.warnings.push(format!(
            "nuclear Rabi {nuclear_rabi:e} Hz is not below the site step {:e} Hz",
            table.delta_f_n.abs()
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = state.clone();
    for k in 0..config.n_ions {
        let m = measure_nuclear(&s, k, config, readout, rng.next_u64())
            .map_err(|e| abort(e, &report))?;
        report.outcomes.push((k, m.bit));
        s = m.state;
        if m.bit {
            let pulse = PulseSpec::pi(Channel::Nuclear, table.sites[k].f_nmr, nuclear_rabi);
            s = evolve_pulse(&s, &pulse, config).map_err(|e| abort(e, &report))?;
            report.push_pulse("reset", k, pulse);
        }
    }
    let all_ground = s.nuclear_configuration_probability(&vec![false; config.n_ions]);
    report
        .fidelities
        .push(("all_ground_probability".into(), all_ground));
    Ok((s, report))
}

/// Ideal rotation by `angle` about the equatorial axis at `phase`, acting
/// on nuclear spin `k`.
pub fn ideal_nuclear_rotation(state: &ChainState, k: usize, angle: f64, phase: f64) -> ChainState {
    let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    let minus_i = Complex64::new(0.0, -1.0);
    let up = minus_i * s * Complex64::from_polar(1.0, phase);
    let down = minus_i * s * Complex64::from_polar(1.0, -phase);
    let bit = basis::nuclear_bit(k);
    let a = state.amplitudes();
    let mut out = a.to_vec();
    for i in (0..a.len()).filter(|i| i & bit == 0) {
        let j = i | bit;
        out[i] = a[i] * c + a[j] * down;
        out[j] = a[i] * up + a[j] * c;
    }
    ChainState::from_parts(state.n_ions(), out, state.time())
}

/// Rotates nuclear spin `k` by `angle` with a pulse on its NMR line.
pub fn one_qubit_rotation(
    state: &ChainState,
    k: usize,
    angle: f64,
    phase: f64,
    config: &ChainConfig,
    nuclear_rabi: f64,
) -> Result<(ChainState, ProtocolReport)> {
    state.check_config(config)?;
    config.check_site(k)?;
    if !(angle > 0.0) {
        return Err(Error::Domain(format!(
            "rotation angle must be > 0, got {angle}"
        )));
    }
    let table = build_frequency_table(config)?;
    let mut report = ProtocolReport::new("one_qubit_rotation");
    if nuclear_rabi >= table.delta_f_n.abs() {
        report.warnings.push(format!(
            "nuclear Rabi {nuclear_rabi:e} Hz is not below the site step {:e} Hz",
            table.delta_f_n.abs()
        ));
    }
    let pulse = PulseSpec::rotation(
        Channel::Nuclear,
        table.sites[k].f_nmr,
        nuclear_rabi,
        angle,
        phase,
    );
    let out = evolve_pulse(state, &pulse, config)?;
    report.push_pulse("rotation", k, pulse);
    let ideal = ideal_nuclear_rotation(state, k, angle, phase);
    report
        .fidelities
        .push(("rotation_fidelity".into(), ideal.fidelity(&out)?));
    Ok((out, report))
}

/// Carrier of the electron pulse that restores the control electron.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestoreCarrier {
    /// Same carrier as the first electron pulse.
    RepeatFirst,
    /// First carrier moved by the dipole field of the flipped target nucleus.
    TargetAdjusted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateSpec {
    pub control: usize,
    pub target: usize,
    /// Rabi frequency of the conditional nuclear pulse, Hz.
    pub nuclear_rabi: f64,
    /// Rabi frequency of the two electron pulses, Hz.
    pub electron_rabi: f64,
    pub restore: RestoreCarrier,
    /// Apply the calibrated frame phases that absorb the deterministic
    /// single-qubit phases of the pulse sequence.
    pub frame_correction: bool,
}

impl GateSpec {
    /// Gate with the default Rabi frequencies: the conditional pulse is
    /// synchronized against the Control-Not shift (at most half of it), so
    /// the off-resonant branch completes whole generalized cycles.
    pub fn new(control: usize, target: usize, config: &ChainConfig) -> Result<Self> {
        let table = build_frequency_table(config)?;
        Ok(GateSpec {
            control,
            target,
            nuclear_rabi: default_gate_rabi(&table)?,
            electron_rabi: default_electron_rabi(&table)?,
            restore: RestoreCarrier::TargetAdjusted,
            frame_correction: true,
        })
    }

    pub fn validate(&self, config: &ChainConfig) -> Result<()> {
        config.check_site(self.control)?;
        config.check_site(self.target)?;
        if self.control.abs_diff(self.target) != 1 {
            return Err(Error::Domain(format!(
                "control {} and target {} are not nearest neighbours",
                self.control, self.target
            )));
        }
        for (name, v) in [
            ("nuclear_rabi", self.nuclear_rabi),
            ("electron_rabi", self.electron_rabi),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// The three carriers: control-electron excite, conditional target
    /// NMR, control-electron restore.
    pub fn carriers(&self, config: &ChainConfig) -> Result<[f64; 3]> {
        let model = SecularModel::new(config)?;
        let (c, t) = (self.control, self.target);
        let excite = model.electron_transition(basis::nuclear_bit(c), c);
        let conditional = model.nuclear_transition(basis::electron_bit(c), t);
        let restore = match self.restore {
            RestoreCarrier::RepeatFirst => excite,
            RestoreCarrier::TargetAdjusted => {
                model.electron_transition(basis::nuclear_bit(c) | basis::nuclear_bit(t), c)
            }
        };
        Ok([excite, conditional, restore])
    }

    pub fn sequence(&self, config: &ChainConfig) -> Result<PulseSequence> {
        let [e1, n, e3] = self.carriers(config)?;
        Ok(PulseSequence::new()
            .pulse(PulseSpec::pi(Channel::Electron, e1, self.electron_rabi))
            .pulse(PulseSpec::pi(Channel::Nuclear, n, self.nuclear_rabi))
            .pulse(PulseSpec::pi(Channel::Electron, e3, self.electron_rabi)))
    }
}

/// Embeds two-qubit amplitudes `[|00>, |01>, |10>, |11>]` (control bit
/// first) into a chain with every other spin in its ground state.
pub fn embed_pair(
    n_ions: usize,
    control: usize,
    target: usize,
    pair: &[Complex64; 4],
) -> Result<ChainState> {
    let mut amps = vec![Complex64::new(0.0, 0.0); basis::dimension(n_ions)];
    for (p, a) in pair.iter().enumerate() {
        let mut idx = 0;
        if p & 2 != 0 {
            idx |= basis::nuclear_bit(control);
        }
        if p & 1 != 0 {
            idx |= basis::nuclear_bit(target);
        }
        amps[idx] = *a;
    }
    ChainState::from_amplitudes(n_ions, amps, 0.0)
}

/// Frame phases (control, target) that map the reference amplitudes of
/// the raw pulse sequence, started at `time`, onto the ideal Control-Not.
fn calibrate_frame(
    gate: &GateSpec,
    seq: &PulseSequence,
    config: &ChainConfig,
    time: f64,
) -> Result<(f64, f64)> {
    let n = config.n_ions;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let run = |input: usize, output: usize| -> Result<f64> {
        let mut pair = [zero; 4];
        pair[input] = one;
        let mut s = embed_pair(n, gate.control, gate.target, &pair)?;
        s.set_time(time);
        let out = run_sequence(&s, seq, config)?;
        let mut probe = [zero; 4];
        probe[output] = one;
        let want = embed_pair(n, gate.control, gate.target, &probe)?;
        Ok(want.inner(&out)?.arg())
    };
    let a00 = run(0b00, 0b00)?;
    let a01 = run(0b01, 0b01)?;
    let a11 = run(0b10, 0b11)?;
    let target_phase = a01 - a00;
    let control_phase = a11 - a00 - target_phase;
    Ok((-control_phase, -target_phase))
}

/// A Control-Not with its pulse sequence built and its frame phases
/// calibrated for states whose clock reads `start_time`.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedGate {
    pub spec: GateSpec,
    pub sequence: PulseSequence,
    pub start_time: f64,
    /// (control, target) frame phases, rad.
    pub frame: Option<(f64, f64)>,
    pub warnings: Vec<String>,
}

impl PreparedGate {
    pub fn new(gate: &GateSpec, config: &ChainConfig, start_time: f64) -> Result<Self> {
        gate.validate(config)?;
        let table = build_frequency_table(config)?;
        let sequence = gate.sequence(config)?;
        let frame = if gate.frame_correction {
            Some(calibrate_frame(gate, &sequence, config, start_time)?)
        } else {
            None
        };
        Ok(PreparedGate {
            spec: *gate,
            warnings: gate_warnings(gate, &table),
            sequence,
            start_time,
            frame,
        })
    }

    pub fn apply(
        &self,
        state: &ChainState,
        config: &ChainConfig,
    ) -> Result<(ChainState, ProtocolReport)> {
        state.check_config(config)?;
        check_polarized(state)?;
        if state.time() != self.start_time {
            return Err(Error::Precondition(format!(
                "gate calibrated for t = {:e} s, state is at t = {:e} s",
                self.start_time,
                state.time()
            )));
        }
        let gate = &self.spec;
        let mut report = ProtocolReport::new("cn_gate");
        report.warnings = self.warnings.clone();
        let labels = [
            ("excite_control_electron", gate.control),
            ("conditional_target_flip", gate.target),
            ("restore_control_electron", gate.control),
        ];
        for (step, (label, site)) in self.sequence.steps.iter().zip(labels) {
            if let SequenceStep::Pulse(p) = step {
                report.push_pulse(label, site, *p);
            }
        }
        let mut out = run_sequence(state, &self.sequence, config)?;
        if let Some((pc, pt)) = self.frame {
            apply_frame(&mut out, gate, pc, pt);
            report.frame_phases = vec![(gate.control, pc), (gate.target, pt)];
        }
        report.fidelities.push((
            "control_electron_ground".into(),
            1.0 - out.electron_excited_population(gate.control),
        ));
        Ok((out, report))
    }
}

/// Three-step Control-Not between neighbouring nuclei.
pub fn cn_gate(
    state: &ChainState,
    gate: &GateSpec,
    config: &ChainConfig,
) -> Result<(ChainState, ProtocolReport)> {
    state.check_config(config)?;
    gate.validate(config)?;
    check_polarized(state)?;
    PreparedGate::new(gate, config, state.time())?.apply(state, config)
}

fn apply_frame(state: &mut ChainState, gate: &GateSpec, control_phase: f64, target_phase: f64) {
    let (cb, tb) = (
        basis::nuclear_bit(gate.control),
        basis::nuclear_bit(gate.target),
    );
    state.apply_diagonal_phase(|i| {
        let mut th = 0.0;
        if i & cb != 0 {
            th += control_phase;
        }
        if i & tb != 0 {
            th += target_phase;
        }
        th
    });
}

/// Selectivity warnings for a gate: the conditional pulse must be slower
/// than the Control-Not shift and the electron pulse must resolve sites.
pub fn gate_warnings(gate: &GateSpec, table: &FrequencyTable) -> Vec<String> {
    let mut w = Vec::new();
    if gate.nuclear_rabi >= table.f_nd {
        w.push(format!(
            "gate nuclear Rabi {:e} Hz is not below f_nd {:e} Hz",
            gate.nuclear_rabi, table.f_nd
        ));
    }
    if gate.electron_rabi >= table.delta_f_e.abs() {
        w.push(format!(
            "electron Rabi {:e} Hz is not below the electron site step {:e} Hz",
            gate.electron_rabi,
            table.delta_f_e.abs()
        ));
    }
    w
}

/// Ideal Control-Not in the `[|00>, |01>, |10>, |11>]` ordering.
pub fn cnot_matrix() -> [[Complex64; 4]; 4] {
    let o = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    [[o, z, z, z], [z, o, z, z], [z, z, z, o], [z, z, o, z]]
}

pub fn identity_matrix() -> [[Complex64; 4]; 4] {
    let o = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    [[o, z, z, z], [z, o, z, z], [z, z, o, z], [z, z, z, o]]
}

pub fn apply_two_qubit(m: &[[Complex64; 4]; 4], v: &[Complex64; 4]) -> [Complex64; 4] {
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for (r, row) in m.iter().enumerate() {
        out[r] = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeSet {
    /// The four computational basis states.
    Basis,
    /// Products of {|0>, |1>, |+>, |+i>} on both qubits (16 states).
    Standard,
}

impl ProbeSet {
    pub fn states(self) -> Vec<[Complex64; 4]> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let singles: Vec<[Complex64; 2]> = match self {
            ProbeSet::Basis => vec![
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            ],
            ProbeSet::Standard => vec![
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
                [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
                [Complex64::new(h, 0.0), Complex64::new(0.0, h)],
            ],
        };
        let mut out = Vec::new();
        for c in &singles {
            for t in &singles {
                out.push([c[0] * t[0], c[0] * t[1], c[1] * t[0], c[1] * t[1]]);
            }
        }
        out
    }
}

/// Mean overlap `|<ideal|achieved>|^2` over a probe set. Each probe is the
/// pair state embedded in an otherwise ground chain; `achieved` maps it to
/// the output chain state, which must be normalized.
pub fn gate_fidelity<F>(
    n_ions: usize,
    control: usize,
    target: usize,
    ideal: &[[Complex64; 4]; 4],
    probes: ProbeSet,
    mut achieved: F,
) -> Result<f64>
where
    F: FnMut(&ChainState) -> Result<ChainState>,
{
    let states = probes.states();
    let mut total = 0.0;
    for p in &states {
        let input = embed_pair(n_ions, control, target, p)?;
        let out = achieved(&input)?;
        let norm = out.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Numeric(format!("probe output norm {norm} is not 1")));
        }
        let want = embed_pair(n_ions, control, target, &apply_two_qubit(ideal, p))?;
        total += want.fidelity(&out)?;
    }
    Ok(total / states.len() as f64)
}

/// One row of a Control-Not truth table; bits are (control, target)
/// packed as `2 * control + target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthRow {
    pub input: usize,
    pub expected: usize,
    /// Population of the expected nuclear configuration.
    pub population: f64,
    /// Excited population left on the control electron.
    pub electron_excitation: f64,
}

/// Runs the gate on the four nuclear basis inputs of the pair, all other
/// spins ground.
pub fn cn_truth_table(gate: &GateSpec, config: &ChainConfig) -> Result<[TruthRow; 4]> {
    let prepared = PreparedGate::new(gate, config, 0.0)?;
    let bits = |p: usize| {
        let mut v = vec![false; config.n_ions];
        v[gate.control] = p & 2 != 0;
        v[gate.target] = p & 1 != 0;
        v
    };
    let mut rows = [TruthRow {
        input: 0,
        expected: 0,
        population: 0.0,
        electron_excitation: 0.0,
    }; 4];
    for (p, row) in rows.iter_mut().enumerate() {
        let s = ChainState::with_nuclear_bits(&bits(p))?;
        let (out, _) = prepared.apply(&s, config)?;
        let expected = if p & 2 != 0 { p ^ 1 } else { p };
        *row = TruthRow {
            input: p,
            expected,
            population: out.nuclear_configuration_probability(&bits(expected)),
            electron_excitation: out.electron_excited_population(gate.control),
        };
    }
    Ok(rows)
}
