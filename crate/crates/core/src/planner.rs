// Copyright 2026 The stmqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Frequency-budget checks and cross-site collision scanning. Works on
//! frequency tables only, so chain length is unbounded.

use std::fmt;
use std::fmt::Write as _;

use crate::config::ChainConfig;
use crate::error::{Error, Result};
use crate::frequency::{build_frequency_table, FrequencyTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckStatus {
    Pass,
    Warning,
    Fail,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Warning => "warning",
            CheckStatus::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// The requirement the check enforces.
    pub anchor: &'static str,
    /// Inequality rendered with numeric values.
    pub formula: String,
    pub status: CheckStatus,
    /// Allowed over required; > 1 means the inequality holds.
    pub margin: f64,
}

/// Rabi frequencies of a planned experiment, Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulsePlan {
    pub f_nr_onequbit: f64,
    pub f_nr_gate: f64,
    pub f_er: f64,
}

impl PulsePlan {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("f_nR_onequbit", self.f_nr_onequbit),
            ("f_nR_gate", self.f_nr_gate),
            ("f_eR", self.f_er),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn nuclear_linewidth(&self) -> f64 {
        self.f_nr_onequbit.max(self.f_nr_gate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Transition {
    /// Electron line, own nucleus ground.
    ElectronE0,
    /// Electron line, own nucleus excited.
    ElectronE1,
    /// NMR line with all electrons ground.
    Nuclear,
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transition::ElectronE0 => "f_e0",
            Transition::ElectronE1 => "f_e1",
            Transition::Nuclear => "f_n",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Collision {
    pub site_j: usize,
    pub transition_j: Transition,
    pub site_k: usize,
    pub transition_k: Transition,
    pub separation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub checks: Vec<Check>,
    pub collisions: Vec<Collision>,
    /// Informational lines outside pass/fail.
    pub notes: Vec<String>,
}

impl ConstraintReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn worst(&self) -> CheckStatus {
        self.checks
            .iter()
            .map(|c| c.status)
            .max()
            .unwrap_or(CheckStatus::Pass)
    }

    /// 0 all pass, 1 any fail, 2 warnings only.
    pub fn exit_code(&self) -> i32 {
        match self.worst() {
            CheckStatus::Pass => 0,
            CheckStatus::Fail => 1,
            CheckStatus::Warning => 2,
        }
    }

    pub fn to_text(&self) -> String {
        let w_name = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(4)
            .max(5);
        let mut o = String::new();
        let _ = writeln!(
            o,
            "{:<w_name$}  {:<7}  {:>12}  formula",
            "check", "status", "margin"
        );
        for c in &self.checks {
            let _ = writeln!(
                o,
                "{:<w_name$}  {:<7}  {:>12.4e}  {}  [{}]",
                c.name,
                c.status.to_string(),
                c.margin,
                c.formula,
                c.anchor
            );
        }
        if !self.collisions.is_empty() {
            let _ = writeln!(o, "collisions: {}", self.collisions.len());
            for c in &self.collisions {
                let _ = writeln!(
                    o,
                    "  site {} {} ~ site {} {}: {:e} Hz",
                    c.site_j, c.transition_j, c.site_k, c.transition_k, c.separation
                );
            }
        }
        for n in &self.notes {
            let _ = writeln!(o, "note: {n}");
        }
        o
    }

    pub const CSV_HEADER: &'static str = "check,status,margin,formula";

    pub fn to_csv(&self) -> String {
        let mut o = String::new();
        let _ = writeln!(o, "{}", Self::CSV_HEADER);
        for c in &self.checks {
            let _ = writeln!(
                o,
                "{},{},{:e},\"{}\"",
                c.name, c.status, c.margin, c.formula
            );
        }
        o
    }
}

fn ratio_check(
    name: &'static str,
    anchor: &'static str,
    formula: String,
    margin: f64,
    on_fail: CheckStatus,
) -> Check {
    Check {
        name,
        anchor,
        formula,
        status: if margin > 1.0 {
            CheckStatus::Pass
        } else {
            on_fail
        },
        margin,
    }
}

/// Site offset at which the excited-nucleus electron line of one site
/// lands on the ground-nucleus line of another.
pub fn alias_site_offset(table: &FrequencyTable) -> f64 {
    table.hyperfine.abs() / table.delta_f_e.abs()
}

/// Every line of the chain, grouped for scanning.
fn transition_lines(table: &FrequencyTable) -> Vec<(f64, usize, Transition)> {
    let mut lines = Vec::with_capacity(3 * table.sites.len());
    for s in &table.sites {
        lines.push((s.f_e0, s.k, Transition::ElectronE0));
        lines.push((s.f_e1, s.k, Transition::ElectronE1));
        lines.push((s.f_nmr, s.k, Transition::Nuclear));
    }
    lines
}

fn is_electron(t: Transition) -> bool {
    !matches!(t, Transition::Nuclear)
}

fn scan_lines(
    table: &FrequencyTable,
    electron_linewidth: f64,
    nuclear_linewidth: f64,
) -> Vec<Collision> {
    let mut lines = transition_lines(table);
    lines.sort_by(|a, b| a.0.total_cmp(&b.0));
    let reach = electron_linewidth.max(nuclear_linewidth);
    let mut out = Vec::new();
    for i in 0..lines.len() {
        let (fi, si, ti) = lines[i];
        for &(fj, sj, tj) in &lines[i + 1..] {
            let d = fj - fi;
            if d >= reach {
                break;
            }
            if si == sj || is_electron(ti) != is_electron(tj) {
                continue;
            }
            let width = if is_electron(ti) {
                electron_linewidth
            } else {
                nuclear_linewidth
            };
            if d < width {
                let (a, b) = if (si, ti) <= (sj, tj) {
                    ((si, ti), (sj, tj))
                } else {
                    ((sj, tj), (si, ti))
                };
                out.push(Collision {
                    site_j: a.0,
                    transition_j: a.1,
                    site_k: b.0,
                    transition_k: b.1,
                    separation: d,
                });
            }
        }
    }
    out.sort_by_key(|c| (c.site_j, c.site_k, c.transition_j, c.transition_k));
    out
}

/// Collision widths per channel, Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linewidths {
    pub electron: f64,
    pub nuclear: f64,
}

impl Linewidths {
    pub fn uniform(width: f64) -> Self {
        Linewidths {
            electron: width,
            nuclear: width,
        }
    }

    /// Power-broadened widths of a plan: the largest Rabi frequency used
    /// on each channel.
    pub fn from_plan(plan: &PulsePlan) -> Self {
        Linewidths {
            electron: plan.f_er,
            nuclear: plan.nuclear_linewidth(),
        }
    }
}

/// Cross-site pairs of same-channel lines closer than the channel's width.
pub fn scan_frequency_collisions(
    config: &ChainConfig,
    widths: Linewidths,
) -> Result<Vec<Collision>> {
    for (name, w) in [("electron", widths.electron), ("nuclear", widths.nuclear)] {
        if !(w > 0.0) {
            return Err(Error::Domain(format!(
                "{name} linewidth must be > 0, got {w}"
            )));
        }
    }
    let table = build_frequency_table(config)?;
    Ok(scan_lines(&table, widths.electron, widths.nuclear))
}

/// Smallest cross-site separation within each channel, (electron, nuclear).
fn min_separations(table: &FrequencyTable) -> (f64, f64) {
    let mut lines = transition_lines(table);
    lines.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut e, mut n) = (f64::INFINITY, f64::INFINITY);
    for want_electron in [true, false] {
        let chan: Vec<_> = lines
            .iter()
            .filter(|l| is_electron(l.2) == want_electron)
            .collect();
        let mut best = f64::INFINITY;
        for (i, a) in chan.iter().enumerate() {
            // nearest line from a different site above a
            if let Some(b) = chan[i + 1..].iter().find(|b| b.1 != a.1) {
                best = best.min(b.0 - a.0);
            }
        }
        if want_electron {
            e = best;
        } else {
            n = best;
        }
    }
    (e, n)
}

/// Evaluates every selectivity inequality of a planned experiment.
pub fn check_budget(config: &ChainConfig, plan: &PulsePlan, t1e: f64) -> Result<ConstraintReport> {
    plan.validate()?;
    if !(t1e > 0.0) {
        return Err(Error::Domain(format!("t1e must be > 0, got {t1e}")));
    }
    let t = build_frequency_table(config)?;
    let dfn = t.delta_f_n.abs();
    let dfe = t.delta_f_e.abs();
    let gate_tau = 1.0 / (2.0 * plan.f_nr_gate);

    let mut checks = vec![
        ratio_check(
            "onequbit_selectivity",
            "one-qubit Rabi frequency below the nuclear site step",
            format!(
                "f_nR_onequbit {:.4e} Hz < delta_f_n {:.4e} Hz",
                plan.f_nr_onequbit, dfn
            ),
            dfn / plan.f_nr_onequbit,
            CheckStatus::Fail,
        ),
        ratio_check(
            "gate_selectivity",
            "gate Rabi frequency below the nearest-neighbour dipole shift",
            format!(
                "f_nR_gate {:.4e} Hz < f_nd {:.4e} Hz",
                plan.f_nr_gate, t.f_nd
            ),
            t.f_nd / plan.f_nr_gate,
            CheckStatus::Warning,
        ),
        ratio_check(
            "dipole_below_step",
            "dipole shift smaller than the nuclear site step",
            format!("f_nd {:.4e} Hz < delta_f_n {:.4e} Hz", t.f_nd, dfn),
            dfn / t.f_nd,
            CheckStatus::Fail,
        ),
        ratio_check(
            "electron_selectivity",
            "electron Rabi frequency below the electron site step",
            format!("f_eR {:.4e} Hz < delta_f_e {:.4e} Hz", plan.f_er, dfe),
            dfe / plan.f_er,
            CheckStatus::Fail,
        ),
        ratio_check(
            "gate_within_t1e",
            "electron relaxation time longer than the conditional pulse",
            format!("1/(2 f_nR_gate) {:.4e} s < t1e {:.4e} s", gate_tau, t1e),
            t1e / gate_tau,
            CheckStatus::Fail,
        ),
    ];

    let collisions = scan_lines(&t, plan.f_er, plan.nuclear_linewidth());
    let (sep_e, sep_n) = min_separations(&t);
    let margin = (sep_e / plan.f_er).min(sep_n / plan.nuclear_linewidth());
    checks.push(Check {
        name: "collision_scan",
        anchor: "every addressed line unique within its linewidth",
        formula: format!(
            "{} pairs closer than linewidth (f_eR {:.4e} Hz, f_nR {:.4e} Hz)",
            collisions.len(),
            plan.f_er,
            plan.nuclear_linewidth()
        ),
        status: if collisions.is_empty() {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        margin,
    });

    let notes = vec![
        format!(
            "informational: hyperfine splitting {:.4e} Hz vs delta_f_e {:.4e} Hz (ratio {:.4e})",
            t.hyperfine.abs(),
            dfe,
            t.hyperfine.abs() / dfe
        ),
        format!(
            "hyperfine alias offset: {:.4} sites (~{} sites)",
            alias_site_offset(&t),
            alias_site_offset(&t).round()
        ),
    ];
    Ok(ConstraintReport {
        checks,
        collisions,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan() -> PulsePlan {
        PulsePlan {
            f_nr_onequbit: 1000.0,
            f_nr_gate: 100.0,
            f_er: 1e6,
        }
    }

    #[test]
    fn reference_passes() {
        let r = check_budget(&ChainConfig::reference(5), &plan(), 10e-3).unwrap();
        assert_eq!(r.exit_code(), 0, "{}", r.to_text());
        assert!((r.check("gate_within_t1e").unwrap().margin - 2.0).abs() < 1e-12);
        let m = r.check("dipole_below_step").unwrap().margin;
        assert!((m - 33.7).abs() < 0.3, "{m}");
    }

    #[test]
    fn flat_field_fails_addressing() {
        let mut cfg = ChainConfig::reference(3);
        cfg.gradient_db0_dx = 0.0;
        let r = check_budget(&cfg, &plan(), 10e-3).unwrap();
        assert_eq!(
            r.check("onequbit_selectivity").unwrap().status,
            CheckStatus::Fail
        );
        assert_eq!(
            r.check("dipole_below_step").unwrap().status,
            CheckStatus::Fail
        );
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn fast_gate_is_a_warning() {
        let p = PulsePlan {
            f_nr_gate: 500.0,
            ..plan()
        };
        let r = check_budget(&ChainConfig::reference(3), &p, 10e-3).unwrap();
        assert_eq!(
            r.check("gate_selectivity").unwrap().status,
            CheckStatus::Warning
        );
        assert_eq!(r.exit_code(), 2);
    }

    #[test]
    fn alias_offset_reference() {
        let t = build_frequency_table(&ChainConfig::reference(2)).unwrap();
        assert_eq!(alias_site_offset(&t).round(), 250.0);
    }

    #[test]
    fn linewidth_must_be_positive() {
        let cfg = ChainConfig::reference(2);
        assert!(scan_frequency_collisions(&cfg, Linewidths::uniform(0.0)).is_err());
        let w = Linewidths {
            electron: 1e6,
            nuclear: -1.0,
        };
        assert!(scan_frequency_collisions(&cfg, w).is_err());
    }
}
