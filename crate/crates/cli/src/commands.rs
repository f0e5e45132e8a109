// Copyright 2026 The stmqc Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use stmqc::evolution::run_sequence;
use stmqc::frequency::{build_frequency_table, FrequencyTable};
use stmqc::planner::{alias_site_offset, check_budget, CheckStatus, ConstraintReport};
use stmqc::protocols::{
    cn_truth_table, cnot_matrix, gate_fidelity, initialize_chain, GateSpec, PreparedGate, ProbeSet,
    ProtocolReport, StepRecord,
};
use stmqc::pulse::{Channel, PulseSequence, SequenceStep};
use stmqc::readout::{
    detect_larmor, synthesize_trace, Candidates, DetectionResult, NuclearState, ReadoutParams,
    TraceSpec,
};
use stmqc::{ChainConfig, ChainState, Error, KvDocument};

use crate::artifact::{Stamp, Writer};
use crate::settings;

pub const EXIT_USAGE: u8 = 64;
pub const EXIT_DATA: u8 = 65;
pub const EXIT_SOFTWARE: u8 = 70;
pub const EXIT_IO: u8 = 74;

/// Population and fidelity floor for a gate run to pass.
pub const GATE_PASS: f64 = 0.99;
/// Largest control-electron excitation left by a passing gate.
pub const GATE_ELECTRON_LIMIT: f64 = 1e-3;
/// All-ground probability for a passing initialization.
pub const INIT_PASS: f64 = 0.99;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}", path = .0.display(), source = .1)]
    Io(PathBuf, std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(..) => EXIT_IO,
            CliError::Core(e) => match e {
                Error::SiteIndex { .. } => EXIT_USAGE,
                Error::Parse { .. }
                | Error::MissingField { .. }
                | Error::InvalidConfig(_)
                | Error::Capacity { .. }
                | Error::Nyquist { .. }
                | Error::Shape { .. }
                | Error::Domain(_) => EXIT_DATA,
                _ => EXIT_SOFTWARE,
            },
        }
    }
}

/// Verdict of a subcommand, mapped onto the process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Warning,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Warning => 2,
        }
    }

    fn from_parts(failed: bool, warned: bool) -> Self {
        if failed {
            Outcome::Fail
        } else if warned {
            Outcome::Warning
        } else {
            Outcome::Pass
        }
    }
}

pub struct Context {
    pub config: ChainConfig,
    pub doc: KvDocument,
    pub seed: u64,
    pub out: PathBuf,
}

impl Context {
    pub fn load(
        path: &Path,
        overrides: &[String],
        seed: u64,
        out: PathBuf,
    ) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        let (config, doc) = ChainConfig::from_text(&text, &path.display().to_string(), overrides)?;
        Ok(Context {
            config,
            doc,
            seed,
            out,
        })
    }

    fn writer(&self, command: &'static str) -> Result<Writer, CliError> {
        Writer::new(
            &self.out,
            Stamp::new(command, &self.doc.canonical(), self.seed),
        )
    }
}

fn echo(w: &Writer, text: &str) {
    print!("{}{text}", w.stamp().header());
}

fn parse_bits(bits: &str, n_ions: usize) -> Result<Vec<bool>, CliError> {
    if bits.len() != n_ions {
        return Err(CliError::Usage(format!(
            "expected {n_ions} bits, got `{bits}`"
        )));
    }
    bits.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(CliError::Usage(format!(
                "bits must be 0 or 1, got `{bits}`"
            ))),
        })
        .collect()
}

fn chain_summary(table: &FrequencyTable) -> String {
    format!(
        "delta_f_n_hz: {:.6e}\ndelta_f_e_hz: {:.6e}\nf_nd_hz: {:.6e}\nf_nd_prime_hz: {:.6e}\n\
         hyperfine_hz: {:.6e}\nalias_site_offset: {:.3}\n",
        table.delta_f_n,
        table.delta_f_e,
        table.f_nd,
        table.f_nd_prime,
        table.hyperfine,
        alias_site_offset(table)
    )
}

fn planner_warnings(report: &ConstraintReport) -> Vec<String> {
    report
        .checks
        .iter()
        .filter(|c| c.status != CheckStatus::Pass)
        .map(|c| {
            format!(
                "planner {} {}: {} (margin {:.3e})",
                c.name, c.status, c.formula, c.margin
            )
        })
        .collect()
}

pub fn plan(ctx: &Context) -> Result<Outcome, CliError> {
    let table = build_frequency_table(&ctx.config)?;
    let settings::PlanSection { plan, t1e, notes } = settings::pulse_plan(&ctx.doc, &table)?;
    let mut report = check_budget(&ctx.config, &plan, t1e)?;
    report.notes.extend(notes);
    let w = ctx.writer("plan")?;
    w.write("frequency_table.csv", &table.to_csv())?;
    w.write("constraints.csv", &report.to_csv())?;
    let text = format!(
        "{}f_nR_onequbit_hz: {:.6e}\nf_nR_gate_hz: {:.6e}\nf_eR_hz: {:.6e}\nt1e_s: {:.6e}\n\n{}",
        chain_summary(&table),
        plan.f_nr_onequbit,
        plan.f_nr_gate,
        plan.f_er,
        t1e,
        report.to_text()
    );
    w.write("constraints.txt", &text)?;
    echo(&w, &text);
    Ok(match report.exit_code() {
        0 => Outcome::Pass,
        1 => Outcome::Fail,
        _ => Outcome::Warning,
    })
}

/// Site and channel whose line lies closest to a pulse carrier.
fn nearest_line(table: &FrequencyTable, channel: Channel, carrier: f64) -> usize {
    let dist = |k: usize| {
        let s = &table.sites[k];
        match channel {
            Channel::Nuclear => (s.f_nmr - carrier).abs(),
            Channel::Electron => (s.f_e0 - carrier).abs().min((s.f_e1 - carrier).abs()),
        }
    };
    (0..table.sites.len())
        .min_by(|&a, &b| dist(a).total_cmp(&dist(b)))
        .unwrap_or(0)
}

pub fn simulate(
    ctx: &Context,
    sequence: &Path,
    initial: Option<&str>,
) -> Result<Outcome, CliError> {
    ctx.config.check_state_capacity()?;
    let n = ctx.config.n_ions;
    let text = fs::read_to_string(sequence).map_err(|e| CliError::Io(sequence.to_path_buf(), e))?;
    let seq = PulseSequence::parse(&text, &sequence.display().to_string())?;
    let bits = match initial {
        Some(b) => parse_bits(b, n)?,
        None => vec![false; n],
    };
    let table = build_frequency_table(&ctx.config)?;
    let start = ChainState::with_nuclear_bits(&bits)?;
    let end = run_sequence(&start, &seq, &ctx.config)?;

    let mut report = ProtocolReport {
        name: "simulate".into(),
        sequence: seq.clone(),
        duration: seq.total_duration(),
        ..Default::default()
    };
    for step in &seq.steps {
        if let SequenceStep::Pulse(p) = step {
            report.steps.push(StepRecord {
                label: "pulse".into(),
                channel: p.channel,
                site: nearest_line(&table, p.channel, p.carrier_frequency),
                frequency: p.carrier_frequency,
            });
        }
    }

    let mut pops = String::from("site,nuclear_excited,electron_excited\n");
    for k in 0..n {
        let _ = writeln!(
            pops,
            "{k},{:e},{:e}",
            end.nuclear_excited_population(k),
            end.electron_excited_population(k)
        );
    }
    let w = ctx.writer("simulate")?;
    w.write("populations.csv", &pops)?;
    w.write("simulate_report.txt", &report.to_text())?;
    echo(&w, &format!("{}\n{pops}", report.to_text()));
    Ok(Outcome::Pass)
}

pub fn gate(
    ctx: &Context,
    control: Option<usize>,
    target: Option<usize>,
) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    let section = settings::gate_section(&ctx.doc)?;
    let control = control
        .or(section.control)
        .ok_or_else(|| CliError::Usage("gate needs --control or gate.control".into()))?;
    let target = target
        .or(section.target)
        .ok_or_else(|| CliError::Usage("gate needs --target or gate.target".into()))?;
    for site in [control, target] {
        if site >= cfg.n_ions {
            return Err(CliError::Usage(format!(
                "site {site} out of range for {} ions",
                cfg.n_ions
            )));
        }
    }
    if control.abs_diff(target) != 1 {
        return Err(CliError::Usage(format!(
            "control {control} and target {target} are not neighbours"
        )));
    }
    cfg.check_state_capacity()?;

    let table = build_frequency_table(cfg)?;
    let settings::PlanSection { plan, t1e, notes } = settings::pulse_plan(&ctx.doc, &table)?;
    let budget = check_budget(cfg, &plan, t1e)?;
    let mut spec = GateSpec::new(control, target, cfg)?;
    spec.nuclear_rabi = plan.f_nr_gate;
    spec.electron_rabi = plan.f_er;
    spec.restore = section.restore;
    spec.frame_correction = section.frame_correction;

    let rows = cn_truth_table(&spec, cfg)?;
    let prepared = PreparedGate::new(&spec, cfg, 0.0)?;
    let fidelity = gate_fidelity(
        cfg.n_ions,
        control,
        target,
        &cnot_matrix(),
        ProbeSet::Standard,
        |s| prepared.apply(s, cfg).map(|(out, _)| out),
    )?;
    let probe = ChainState::with_nuclear_bits(&vec![false; cfg.n_ions])?;
    let (_, mut report) = prepared.apply(&probe, cfg)?;
    report
        .fidelities
        .retain(|(name, _)| name != "control_electron_ground");
    report.warnings.extend(notes);
    report.warnings.extend(planner_warnings(&budget));

    let min_population = rows.iter().map(|r| r.population).fold(1.0, f64::min);
    let max_electron = rows
        .iter()
        .map(|r| r.electron_excitation)
        .fold(0.0, f64::max);
    report
        .fidelities
        .push(("min_truth_population".into(), min_population));
    report.fidelities.push(("probe_fidelity".into(), fidelity));
    report
        .fidelities
        .push(("control_electron_ground".into(), 1.0 - max_electron));

    let mut csv = String::from("input,expected,population,electron_excitation\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{:02b},{:02b},{:e},{:e}",
            r.input, r.expected, r.population, r.electron_excitation
        );
    }
    let w = ctx.writer("gate")?;
    w.write("truth_table.csv", &csv)?;
    w.write("gate_sequence.txt", &report.sequence.to_text())?;
    w.write(
        "gate_summary.csv",
        &format!("{}\n{}\n", ProtocolReport::CSV_HEADER, report.to_csv_row()),
    )?;
    let text = format!("control: {control}\ntarget: {target}\n{}", report.to_text());
    w.write("gate_report.txt", &text)?;
    echo(&w, &format!("{text}\n{csv}"));

    let failed =
        min_population < GATE_PASS || fidelity < GATE_PASS || max_electron > GATE_ELECTRON_LIMIT;
    Ok(Outcome::from_parts(failed, !report.warnings.is_empty()))
}

fn state_name(s: NuclearState) -> &'static str {
    match s {
        NuclearState::Ground => "ground",
        NuclearState::Excited => "excited",
        NuclearState::Indeterminate => "indeterminate",
    }
}

fn trace_spec(
    p: &ReadoutParams,
    c: Candidates,
    hyperfine: f64,
    excited: bool,
    noise: f64,
) -> TraceSpec {
    TraceSpec {
        true_frequency: if excited { c.f_e1 } else { c.f_e0 },
        modulation_depth: p.modulation_depth,
        noise_sigma: noise,
        duration: p.duration,
        sample_rate: p.sample_rate,
        mixdown_frequency: p.local_oscillator(c, hyperfine),
    }
}

fn detect(
    spec: &TraceSpec,
    c: Candidates,
    threshold: f64,
    seed: u64,
) -> stmqc::Result<DetectionResult> {
    detect_larmor(&synthesize_trace(spec, seed)?, c, threshold)
}

pub fn readout(
    ctx: &Context,
    site: usize,
    excited: bool,
    noise: &[f64],
    trials: usize,
) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    if site >= cfg.n_ions {
        return Err(CliError::Usage(format!(
            "site {site} out of range for {} ions",
            cfg.n_ions
        )));
    }
    let params = settings::readout_params(&ctx.doc)?;
    let table = build_frequency_table(cfg)?;
    let s = table.site(site)?;
    let c = Candidates {
        f_e0: s.f_e0,
        f_e1: s.f_e1,
    };
    let hf = cfg.species.hyperfine_a_over_h;
    let spec = trace_spec(&params, c, hf, excited, params.noise_sigma);
    let trace = synthesize_trace(&spec, ctx.seed)?;
    let d = detect_larmor(&trace, c, params.snr_threshold)?;
    let want = if excited {
        NuclearState::Excited
    } else {
        NuclearState::Ground
    };
    let resolution = 1.0 / trace.duration();
    let beats = [
        (c.f_e0 - spec.mixdown_frequency).abs(),
        (c.f_e1 - spec.mixdown_frequency).abs(),
    ];
    let min_rate = 2.0 * beats[0].max(beats[1]);

    let mut text = String::new();
    let _ = writeln!(text, "site: {site}");
    let _ = writeln!(text, "truth: {}", state_name(want));
    let _ = writeln!(text, "f_e0_hz: {:.9e}", c.f_e0);
    let _ = writeln!(text, "f_e1_hz: {:.9e}", c.f_e1);
    let _ = writeln!(text, "mixdown_hz: {:.9e}", spec.mixdown_frequency);
    let _ = writeln!(text, "samples: {}", trace.samples.len());
    let _ = writeln!(text, "resolution_hz: {resolution:.6e}");
    let _ = writeln!(text, "nyquist_min_sample_rate_hz: {min_rate:.6e}");
    let _ = writeln!(
        text,
        "estimated_frequency_hz: {:.9e}",
        d.estimated_frequency
    );
    let _ = writeln!(text, "peak_snr: {:.4}", d.peak_snr);
    let _ = writeln!(text, "decided: {}", state_name(d.decided_state));
    if resolution >= (c.f_e0 - c.f_e1).abs() {
        let _ = writeln!(
            text,
            "warning: resolution {resolution:e} Hz does not resolve the {:e} Hz splitting",
            (c.f_e0 - c.f_e1).abs()
        );
    }

    let w = ctx.writer("readout")?;
    w.write("trace.csv", &trace.to_csv())?;
    if !noise.is_empty() {
        if trials == 0 {
            return Err(CliError::Usage("--trials must be at least 1".into()));
        }
        let rows = sweep(&params, c, hf, excited, noise, trials, ctx.seed)?;
        let mut csv = String::from("noise_sigma,trials,correct,indeterminate,correct_rate\n");
        for (sigma, correct, undecided) in rows {
            let _ = writeln!(
                csv,
                "{sigma:e},{trials},{correct},{undecided},{:e}",
                correct as f64 / trials as f64
            );
        }
        w.write("noise_sweep.csv", &csv)?;
        let _ = write!(text, "\n{csv}");
    }
    w.write("detection.txt", &text)?;
    echo(&w, &text);

    Ok(match d.decided_state {
        s if s == want => Outcome::Pass,
        NuclearState::Indeterminate => Outcome::Warning,
        _ => Outcome::Fail,
    })
}

/// Correct and indeterminate counts per noise level, one thread per level.
/// Trial `i` uses seed `seed + i`.
fn sweep(
    params: &ReadoutParams,
    c: Candidates,
    hf: f64,
    excited: bool,
    noise: &[f64],
    trials: usize,
    seed: u64,
) -> stmqc::Result<Vec<(f64, usize, usize)>> {
    let want = if excited {
        NuclearState::Excited
    } else {
        NuclearState::Ground
    };
    std::thread::scope(|scope| {
        let handles: Vec<_> = noise
            .iter()
            .map(|&sigma| {
                scope.spawn(move || -> stmqc::Result<(f64, usize, usize)> {
                    let spec = trace_spec(params, c, hf, excited, sigma);
                    let (mut correct, mut undecided) = (0, 0);
                    for i in 0..trials as u64 {
                        match detect(&spec, c, params.snr_threshold, seed.wrapping_add(i))?
                            .decided_state
                        {
                            s if s == want => correct += 1,
                            NuclearState::Indeterminate => undecided += 1,
                            _ => {}
                        }
                    }
                    Ok((sigma, correct, undecided))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    })
}

pub fn init(ctx: &Context, bits: &str) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    cfg.check_state_capacity()?;
    let bits = parse_bits(bits, cfg.n_ions)?;
    let table = build_frequency_table(cfg)?;
    let plan = settings::pulse_plan(&ctx.doc, &table)?.plan;
    let params = settings::readout_params(&ctx.doc)?;
    let start = ChainState::with_nuclear_bits(&bits)?;
    let w = ctx.writer("init")?;
    let (report, outcome) =
        match initialize_chain(cfg, &start, &params, plan.f_nr_onequbit, ctx.seed) {
            Ok((_, report)) => {
                let p = report.fidelity("all_ground_probability").unwrap_or(0.0);
                let outcome = Outcome::from_parts(p <= INIT_PASS, !report.warnings.is_empty());
                (report, outcome)
            }
            Err(abort) => {
                let mut report = abort.report;
                report.warnings.push(format!("aborted: {}", abort.error));
                (report, Outcome::Fail)
            }
        };
    w.write("init_report.txt", &report.to_text())?;
    w.write("init_sequence.txt", &report.sequence.to_text())?;
    w.write(
        "init_summary.csv",
        &format!("{}\n{}\n", ProtocolReport::CSV_HEADER, report.to_csv_row()),
    )?;
    echo(&w, &report.to_text());
    Ok(outcome)
}
