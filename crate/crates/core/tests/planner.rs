// Copyright 2026 The stmqc Authors
// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use stmqc::config::ChainConfig;
use stmqc::frequency::build_frequency_table;
use stmqc::planner::*;

fn plan() -> PulsePlan {
    PulsePlan {
        f_nr_onequbit: 1000.0,
        f_nr_gate: 100.0,
        f_er: 1e6,
    }
}

fn with_gradient(n: usize, g: f64) -> ChainConfig {
    let mut c = ChainConfig::reference(n);
    c.gradient_db0_dx = g;
    c
}

/// Every cross-site pair of same-channel lines closer than `width`.
fn brute_force(cfg: &ChainConfig, w: Linewidths) -> Vec<(usize, Transition, usize, Transition)> {
    let t = build_frequency_table(cfg).unwrap();
    let mut lines = Vec::new();
    for s in &t.sites {
        lines.push((s.k, Transition::ElectronE0, s.f_e0));
        lines.push((s.k, Transition::ElectronE1, s.f_e1));
        lines.push((s.k, Transition::Nuclear, s.f_nmr));
    }
    let electron = |t: Transition| t != Transition::Nuclear;
    let mut out = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a, b) = (lines[i], lines[j]);
            let width = if electron(a.1) { w.electron } else { w.nuclear };
            if a.0 != b.0 && electron(a.1) == electron(b.1) && (a.2 - b.2).abs() < width {
                let (x, y) = if (a.0, a.1) <= (b.0, b.1) {
                    (a, b)
                } else {
                    (b, a)
                };
                out.push((x.0, x.1, y.0, y.1));
            }
        }
    }
    out.sort();
    out
}

fn reported(cfg: &ChainConfig, width: Linewidths) -> Vec<(usize, Transition, usize, Transition)> {
    let mut v: Vec<_> = scan_frequency_collisions(cfg, width)
        .unwrap()
        .into_iter()
        .map(|c| (c.site_j, c.transition_j, c.site_k, c.transition_k))
        .collect();
    v.sort();
    v
}

#[test]
fn reference_budget() {
    let r = check_budget(&ChainConfig::reference(10), &plan(), 10e-3).unwrap();
    assert_eq!(r.exit_code(), 0, "{}", r.to_text());
    assert!((r.check("gate_within_t1e").unwrap().margin - 2.0).abs() < 1e-12);
    let m = r.check("dipole_below_step").unwrap().margin;
    assert!((m / 33.75 - 1.0).abs() < 0.01, "{m}");
    assert!(r.notes.iter().any(|n| n.starts_with("informational")));
    assert!(r.collisions.is_empty());
}

#[test]
fn flat_field_loses_addressing() {
    let r = check_budget(&with_gradient(4, 0.0), &plan(), 10e-3).unwrap();
    assert_eq!(
        r.check("onequbit_selectivity").unwrap().status,
        CheckStatus::Fail
    );
    assert_eq!(
        r.check("dipole_below_step").unwrap().status,
        CheckStatus::Fail
    );
    assert_eq!(r.check("collision_scan").unwrap().status, CheckStatus::Fail);
    assert_eq!(r.exit_code(), 1);
}

#[test]
fn ratio_margins_match_status() {
    for g in [0.0, 1e3, 1e4, 1e5, 1e6] {
        for gate in [20.0, 100.0, 400.0] {
            let p = PulsePlan {
                f_nr_gate: gate,
                ..plan()
            };
            let r = check_budget(&with_gradient(6, g), &p, 3e-3).unwrap();
            for c in &r.checks {
                assert_eq!(c.margin > 1.0, c.status == CheckStatus::Pass, "{c:?}");
            }
        }
    }
}

#[test]
fn ten_ions_have_no_collisions_at_one_megahertz() {
    let w = Linewidths {
        electron: 1e6,
        nuclear: 1e3,
    };
    assert!(scan_frequency_collisions(&ChainConfig::reference(10), w)
        .unwrap()
        .is_empty());
}

#[test]
fn hyperfine_alias_in_long_chain() {
    let t = build_frequency_table(&ChainConfig::reference(2)).unwrap();
    assert_eq!(alias_site_offset(&t).round(), 250.0);
    let cfg = ChainConfig::reference(251);
    let w = Linewidths {
        electron: 1e6,
        nuclear: 1e3,
    };
    let c = scan_frequency_collisions(&cfg, w).unwrap();
    assert_eq!(c.len(), 1, "{c:?}");
    assert_eq!(
        (c[0].site_j, c[0].transition_j),
        (0, Transition::ElectronE0)
    );
    assert_eq!(
        (c[0].site_k, c[0].transition_k),
        (250, Transition::ElectronE1)
    );
    assert!(c[0].separation < 1e6);
    let r = check_budget(&cfg, &plan(), 10e-3).unwrap();
    assert!(r.notes.iter().any(|n| n.contains("~250 sites")));
}

#[test]
fn ten_kilohertz_flags_adjacent_nuclei() {
    let n = 12;
    let w = Linewidths {
        electron: 1e6,
        nuclear: 10e3,
    };
    let c = scan_frequency_collisions(&ChainConfig::reference(n), w).unwrap();
    let nuclear: Vec<_> = c
        .iter()
        .filter(|c| c.transition_j == Transition::Nuclear)
        .collect();
    assert_eq!(nuclear.len(), n - 1);
    assert!(nuclear.iter().all(|c| c.site_k == c.site_j + 1));
}

#[test]
fn report_renderings() {
    let p = PulsePlan {
        f_nr_gate: 500.0,
        ..plan()
    };
    let r = check_budget(&ChainConfig::reference(3), &p, 10e-3).unwrap();
    assert_eq!(r.exit_code(), 2);
    let text = r.to_text();
    assert!(text.lines().next().unwrap().starts_with("check"));
    assert!(text.contains("warning"));
    let csv = r.to_csv();
    assert_eq!(csv.lines().count(), r.checks.len() + 1);
    assert!(check_budget(
        &ChainConfig::reference(3),
        &PulsePlan {
            f_er: 0.0,
            ..plan()
        },
        1.0
    )
    .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn collision_scan_is_complete(n in 1usize..120, g in 0.0f64..3e5, e in 1.0f64..5e7, nu in 1.0f64..1e6) {
        let cfg = with_gradient(n, g);
        let width = Linewidths { electron: e, nuclear: nu };
        prop_assert_eq!(reported(&cfg, width), brute_force(&cfg, width));
    }

    #[test]
    fn scale_covariance(g in 1e3f64..1e6, n in 2usize..40) {
        let a = with_gradient(n, g);
        let b = with_gradient(n, 2.0 * g);
        let (ta, tb) = (build_frequency_table(&a).unwrap(), build_frequency_table(&b).unwrap());
        prop_assert!((tb.delta_f_e / ta.delta_f_e - 2.0).abs() < 1e-12);
        prop_assert!((tb.delta_f_n / ta.delta_f_n - 2.0).abs() < 1e-12);
        prop_assert!((alias_site_offset(&tb) / alias_site_offset(&ta) - 0.5).abs() < 1e-12);
        let (ra, rb) = (check_budget(&a, &plan(), 1e-2).unwrap(), check_budget(&b, &plan(), 1e-2).unwrap());
        for name in ["onequbit_selectivity", "dipole_below_step", "electron_selectivity"] {
            let ratio = rb.check(name).unwrap().margin / ra.check(name).unwrap().margin;
            prop_assert!((ratio - 2.0).abs() < 1e-12, "{}: {}", name, ratio);
        }
        for name in ["gate_selectivity", "gate_within_t1e"] {
            prop_assert_eq!(rb.check(name).unwrap().margin, ra.check(name).unwrap().margin);
        }
    }
}
