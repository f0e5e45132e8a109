// Copyright 2026 The stmqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Site-resolved transition frequencies of a graded-field ion chain.
//!
//! All frequencies are magnitudes in Hz. The static field grows linearly
//! along the chain, so every electron and nuclear line moves by a fixed
//! step between neighbouring sites.

use std::fmt::Write as _;

use crate::config::ChainConfig;
use crate::constants::CODATA;
use crate::error::{Error, Result};

/// Field at site `k`: `b0 + k a dB/dx`.
pub fn field_at_site(config: &ChainConfig, k: usize) -> Result<f64> {
    config.check_site(k)?;
    Ok(field_unchecked(config, k))
}

fn field_unchecked(config: &ChainConfig, k: usize) -> f64 {
    config.b0 + k as f64 * config.spacing_a * config.gradient_db0_dx
}

/// Angular factor `1 - 3 cos^2(theta)` of the secular dipolar coupling.
pub fn dipolar_angle_factor(theta: f64) -> f64 {
    1.0 - 3.0 * theta.cos().powi(2)
}

/// Nuclear frequency shift at one spacing from a single fully polarized
/// electron, Hz (magnitude).
fn unit_dipole_shift(config: &ChainConfig) -> f64 {
    let s = &config.species;
    CODATA.vacuum_permeability_over_4pi
        * (s.g_e * CODATA.bohr_magneton / 2.0)
        * dipolar_angle_factor(config.chain_axis_angle_theta).abs()
        / config.spacing_a.powi(3)
        * s.nuclear_hz_per_tesla()
}

/// Magnitude of the shift a polarized electron at `source` imposes on the
/// nuclear line at `target`, Hz.
pub fn dipole_shift(config: &ChainConfig, source: usize, target: usize) -> Result<f64> {
    config.check_site(source)?;
    config.check_site(target)?;
    if source == target {
        return Err(Error::Domain(format!(
            "dipole shift needs distinct sites, got {source} twice"
        )));
    }
    let d = source.abs_diff(target) as f64;
    Ok(unit_dipole_shift(config) / d.powi(3))
}

/// Signed coefficient `b` of the secular term `b S_z(source) I_z(target)`
/// in the chain Hamiltonian, Hz. Spin projections are measured relative
/// to the excitation axis (ground = -1/2), so `b = 2 * shift` with the sign
/// of `1 - 3 cos^2(theta)`.
pub fn dipole_coupling(config: &ChainConfig, source: usize, target: usize) -> Result<f64> {
    let shift = dipole_shift(config, source, target)?;
    Ok(2.0 * shift * dipolar_angle_factor(config.chain_axis_angle_theta).signum())
}

/// Per-site entries of a [`FrequencyTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct SiteFrequencies {
    pub k: usize,
    pub field_b: f64,
    /// Electron line with the nucleus in its ground state.
    pub f_e0: f64,
    /// Electron line with the nucleus excited.
    pub f_e1: f64,
    /// Bare nuclear Larmor frequency |gamma_n/2pi| B_k.
    pub f_n: f64,
    /// NMR line with every electron in its ground state: bare frequency
    /// plus the hyperfine offset and the static dipole field of the chain.
    pub f_nmr: f64,
    /// Dipole shift from the nearest-neighbour electrons of this site.
    pub f_nd: f64,
    /// Dipole shift from all electrons two or more spacings away.
    pub f_nd_prime: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    pub sites: Vec<SiteFrequencies>,
    /// Electron line step between adjacent sites.
    pub delta_f_e: f64,
    /// Nuclear line step between adjacent sites.
    pub delta_f_n: f64,
    /// Two-neighbour bulk dipole shift; also the change in a nucleus'
    /// frequency when one neighbouring electron flips.
    pub f_nd: f64,
    /// Largest far-electron shift over the sites of this chain.
    pub f_nd_prime: f64,
    /// A/h.
    pub hyperfine: f64,
}

impl FrequencyTable {
    pub fn site(&self, k: usize) -> Result<&SiteFrequencies> {
        self.sites.get(k).ok_or(Error::SiteIndex {
            index: k,
            n_ions: self.sites.len(),
        })
    }

    /// Electron Larmor frequency without hyperfine splitting at site k.
    pub fn electron_larmor(&self, k: usize) -> Result<f64> {
        let s = self.site(k)?;
        Ok(0.5 * (s.f_e0 + s.f_e1))
    }

    pub const CSV_HEADER: &'static str = "k,B_k,f_e0,f_e1,f_n,f_nmr,f_nd,f_nd_prime";

    /// CSV with one row per site. Chain-level values ride in `#` lines so
    /// the table re-parses exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# delta_f_e={:e}", self.delta_f_e);
        let _ = writeln!(out, "# delta_f_n={:e}", self.delta_f_n);
        let _ = writeln!(out, "# f_nd={:e}", self.f_nd);
        let _ = writeln!(out, "# f_nd_prime={:e}", self.f_nd_prime);
        let _ = writeln!(out, "# hyperfine={:e}", self.hyperfine);
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for s in &self.sites {
            let _ = writeln!(
                out,
                "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                s.k, s.field_b, s.f_e0, s.f_e1, s.f_n, s.f_nmr, s.f_nd, s.f_nd_prime
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |line: usize, field: &str, msg: String| Error::Parse {
            file: "frequency table".into(),
            line,
            field: field.into(),
            message: msg,
        };
        let mut chain = [f64::NAN; 5];
        const NAMES: [&str; 5] = ["delta_f_e", "delta_f_n", "f_nd", "f_nd_prime", "hyperfine"];
        let mut sites = Vec::new();
        let mut seen_header = false;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                if let Some((k, v)) = c.trim().split_once('=') {
                    if let Some(slot) = NAMES.iter().position(|&nm| nm == k.trim()) {
                        chain[slot] = v
                            .trim()
                            .parse()
                            .map_err(|e| bad(n, k.trim(), format!("{e}")))?;
                    }
                }
                continue;
            }
            if !seen_header {
                if line != Self::CSV_HEADER {
                    return Err(bad(n, "header", format!("unexpected header `{line}`")));
                }
                seen_header = true;
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 8 {
                return Err(bad(
                    n,
                    "row",
                    format!("expected 8 columns, got {}", cols.len()),
                ));
            }
            let num = |j: usize| -> Result<f64> {
                cols[j]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| bad(n, "value", format!("column {j}: {e}")))
            };
            sites.push(SiteFrequencies {
                k: cols[0]
                    .trim()
                    .parse()
                    .map_err(|e| bad(n, "k", format!("{e}")))?,
                field_b: num(1)?,
                f_e0: num(2)?,
                f_e1: num(3)?,
                f_n: num(4)?,
                f_nmr: num(5)?,
                f_nd: num(6)?,
                f_nd_prime: num(7)?,
            });
        }
        if let Some(i) = chain.iter().position(|v| v.is_nan()) {
            return Err(bad(0, NAMES[i], "missing chain-level value".into()));
        }
        Ok(FrequencyTable {
            sites,
            delta_f_e: chain[0],
            delta_f_n: chain[1],
            f_nd: chain[2],
            f_nd_prime: chain[3],
            hyperfine: chain[4],
        })
    }
}

/// Builds the per-site frequency table of a chain.
pub fn build_frequency_table(config: &ChainConfig) -> Result<FrequencyTable> {
    config.validate()?;
    let sp = &config.species;
    let e_rate = sp.electron_hz_per_tesla();
    let n_rate = sp.nuclear_hz_per_tesla();
    let a = sp.hyperfine_a_over_h;
    let sigma = sp.hyperfine_sign();
    let unit = unit_dipole_shift(config);
    let coupling_sign = dipolar_angle_factor(config.chain_axis_angle_theta).signum();
    let n = config.n_ions;

    // far[d] = sum_{m=2}^{d} 1/m^3
    let mut far = vec![0.0; n.max(2)];
    for d in 2..n {
        far[d] = far[d - 1] + 1.0 / (d as f64).powi(3);
    }

    let sites = (0..n)
        .map(|k| {
            let b = field_unchecked(config, k);
            let f_e = e_rate * b;
            let f_n = n_rate * b;
            let neighbours = (k > 0) as usize + (k + 1 < n) as usize;
            let f_nd = unit * neighbours as f64;
            let f_nd_prime = unit * (far[k] + far[n - 1 - k]);
            SiteFrequencies {
                k,
                field_b: b,
                f_e0: f_e + sigma * a / 2.0,
                f_e1: f_e - sigma * a / 2.0,
                f_n,
                f_nmr: f_n + sigma * a / 2.0 - coupling_sign * (f_nd + f_nd_prime),
                f_nd,
                f_nd_prime,
            }
        })
        .collect::<Vec<_>>();

    let step = config.spacing_a * config.gradient_db0_dx;
    let f_nd_prime = sites.iter().map(|s| s.f_nd_prime).fold(0.0, f64::max);
    Ok(FrequencyTable {
        sites,
        delta_f_e: e_rate * step,
        delta_f_n: n_rate * step,
        f_nd: 2.0 * unit,
        f_nd_prime,
        hyperfine: a,
    })
}
