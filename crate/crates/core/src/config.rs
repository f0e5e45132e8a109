// Copyright 2026 The stmqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Chain configuration and the sectioned `key = value` file format.
//!
//! ```text
//! # 125Te chain at the reference operating point
//! [species]
//! preset = Te-125
//!
//! [chain]
//! n_ions = 3
//! a = 5e-9
//! B0 = 10
//! dBdx = 1e5
//! T = 1
//! theta = 1.5707963267948966
//! ```
//!
//! Species keys: `preset`, `name`, `g_e`, `gamma_n_over_2pi`, `A_over_h`.
//! With a preset, the remaining species keys are optional overrides.
//! Chain keys: `n_ions`, `a`, `B0`, `dBdx`, `T` (required) and `theta`
//! (optional, defaults to pi/2). Other sections are carried through for
//! front ends to read.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::species::IonSpecies;

/// Largest chain for which a full 4^N state vector is built.
pub const MAX_STATE_IONS: usize = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub n_ions: usize,
    /// Lattice spacing, m.
    pub spacing_a: f64,
    /// Field at site 0, T.
    pub b0: f64,
    /// Field gradient along the chain, T/m.
    pub gradient_db0_dx: f64,
    /// K.
    pub temperature: f64,
    pub species: IonSpecies,
    /// Angle between the chain axis and the static field, rad.
    pub chain_axis_angle_theta: f64,
}

impl ChainConfig {
    /// a = 5 nm, dB/dx = 1e5 T/m, B0 = 10 T, T = 1 K, Te-125.
    pub fn reference(n_ions: usize) -> Self {
        ChainConfig {
            n_ions,
            spacing_a: 5e-9,
            b0: 10.0,
            gradient_db0_dx: 1e5,
            temperature: 1.0,
            species: IonSpecies::te125(),
            chain_axis_angle_theta: FRAC_PI_2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.species.validate()?;
        if self.n_ions == 0 {
            return Err(Error::InvalidConfig("n_ions must be >= 1".into()));
        }
        let positive = [
            ("a", self.spacing_a),
            ("B0", self.b0),
            ("T", self.temperature),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be > 0, got {v}")));
            }
        }
        if !self.gradient_db0_dx.is_finite() || !self.chain_axis_angle_theta.is_finite() {
            return Err(Error::InvalidConfig("dBdx and theta must be finite".into()));
        }
        Ok(())
    }

    /// Errors unless a full state vector for this chain fits under the cap.
    pub fn check_state_capacity(&self) -> Result<()> {
        if self.n_ions > MAX_STATE_IONS {
            return Err(Error::Capacity {
                n_ions: self.n_ions,
                max: MAX_STATE_IONS,
            });
        }
        Ok(())
    }

    pub fn check_site(&self, k: usize) -> Result<()> {
        if k >= self.n_ions {
            return Err(Error::SiteIndex {
                index: k,
                n_ions: self.n_ions,
            });
        }
        Ok(())
    }

    /// Parses a config document, applying `overrides` (`key=value` or
    /// `section.key=value`) before validation.
    pub fn from_text(text: &str, file: &str, overrides: &[String]) -> Result<(Self, KvDocument)> {
        let mut doc = KvDocument::parse(text, file)?;
        for o in overrides {
            doc.apply_override(o)?;
        }
        let cfg = Self::from_document(&doc)?;
        Ok((cfg, doc))
    }

    pub fn from_document(doc: &KvDocument) -> Result<Self> {
        let species = match doc.get("species", "preset") {
            Some(entry) => {
                let mut s = IonSpecies::preset(&entry.value).ok_or_else(|| Error::Parse {
                    file: doc.file.clone(),
                    line: entry.line,
                    field: "species.preset".into(),
                    message: format!("unknown preset `{}`", entry.value),
                })?;
                if let Some(e) = doc.get("species", "name") {
                    s.name = e.value.clone();
                }
                if let Some(v) = doc.optional::<f64>("species", "g_e")? {
                    s.g_e = v;
                }
                if let Some(v) = doc.optional::<f64>("species", "gamma_n_over_2pi")? {
                    s.gamma_n_over_2pi = v;
                }
                if let Some(v) = doc.optional::<f64>("species", "A_over_h")? {
                    s.hyperfine_a_over_h = v;
                }
                s
            }
            None => IonSpecies {
                name: doc.required::<String>("species", "name")?,
                g_e: doc.required("species", "g_e")?,
                gamma_n_over_2pi: doc.required("species", "gamma_n_over_2pi")?,
                hyperfine_a_over_h: doc.required("species", "A_over_h")?,
            },
        };
        let cfg = ChainConfig {
            n_ions: doc.required("chain", "n_ions")?,
            spacing_a: doc.required("chain", "a")?,
            b0: doc.required("chain", "B0")?,
            gradient_db0_dx: doc.required("chain", "dBdx")?,
            temperature: doc.required("chain", "T")?,
            species,
            chain_axis_angle_theta: doc.optional("chain", "theta")?.unwrap_or(FRAC_PI_2),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Renders the config back into the file format (shortest round-trip
    /// float representation).
    pub fn to_text(&self) -> String {
        let s = &self.species;
        format!(
            "[species]\nname = {}\ng_e = {:?}\ngamma_n_over_2pi = {:?}\nA_over_h = {:?}\n\n\
             [chain]\nn_ions = {}\na = {:?}\nB0 = {:?}\ndBdx = {:?}\nT = {:?}\ntheta = {:?}\n",
            s.name,
            s.g_e,
            s.gamma_n_over_2pi,
            s.hyperfine_a_over_h,
            self.n_ions,
            self.spacing_a,
            self.b0,
            self.gradient_db0_dx,
            self.temperature,
            self.chain_axis_angle_theta
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KvEntry {
    pub section: String,
    pub key: String,
    pub value: String,
    /// 1-based source line; 0 for command-line overrides.
    pub line: usize,
}

/// A parsed sectioned key/value file. Keys before any section header
/// belong to the empty section.
#[derive(Debug, Clone, PartialEq)]
pub struct KvDocument {
    pub file: String,
    pub entries: Vec<KvEntry>,
}

impl KvDocument {
    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let mut section = String::new();
        let mut entries: Vec<KvEntry> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| Error::Parse {
                    file: file.into(),
                    line: line_no,
                    field: line.into(),
                    message: "unterminated section header".into(),
                })?;
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                file: file.into(),
                line: line_no,
                field: line.into(),
                message: "expected `key = value`".into(),
            })?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(Error::Parse {
                    file: file.into(),
                    line: line_no,
                    field: String::new(),
                    message: "empty key".into(),
                });
            }
            if entries.iter().any(|e| e.section == section && e.key == key) {
                return Err(Error::Parse {
                    file: file.into(),
                    line: line_no,
                    field: qualified(&section, &key),
                    message: "duplicate key".into(),
                });
            }
            entries.push(KvEntry {
                section: section.clone(),
                key,
                value: v.trim().to_string(),
                line: line_no,
            });
        }
        Ok(KvDocument {
            file: file.into(),
            entries,
        })
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&KvEntry> {
        self.entries
            .iter()
            .find(|e| e.section == section && e.key == key)
    }

    pub fn optional<T>(&self, section: &str, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        match self.get(section, key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|err| Error::Parse {
                file: self.file.clone(),
                line: e.line,
                field: qualified(section, key),
                message: format!("cannot parse `{}`: {err}", e.value),
            }),
        }
    }

    pub fn required<T>(&self, section: &str, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.optional(section, key)?
            .ok_or_else(|| Error::MissingField {
                file: self.file.clone(),
                field: qualified(section, key),
            })
    }

    /// Applies `section.key=value`, or `key=value` when the key is unique
    /// across sections. Unknown bare keys are rejected; unknown qualified
    /// keys are added.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let bad = |msg: &str| Error::Parse {
            file: "--set".into(),
            line: 0,
            field: spec.into(),
            message: msg.into(),
        };
        let (k, v) = spec
            .split_once('=')
            .ok_or_else(|| bad("expected key=value"))?;
        let (k, v) = (k.trim(), v.trim().to_string());
        let (section, key) = match k.rsplit_once('.') {
            Some((s, key)) => (s.to_string(), key.to_string()),
            None => {
                let hits: Vec<&KvEntry> = self.entries.iter().filter(|e| e.key == k).collect();
                match hits.as_slice() {
                    [one] => (one.section.clone(), k.to_string()),
                    [] => return Err(bad("unknown key; qualify it as section.key")),
                    _ => return Err(bad("ambiguous key; qualify it as section.key")),
                }
            }
        };
        match self
            .entries
            .iter_mut()
            .find(|e| e.section == section && e.key == key)
        {
            Some(e) => {
                e.value = v;
                e.line = 0;
            }
            None => self.entries.push(KvEntry {
                section,
                key,
                value: v,
                line: 0,
            }),
        }
        Ok(())
    }

    /// Canonical text used for hashing: sorted `section.key=value` lines.
    pub fn canonical(&self) -> String {
        let mut lines: Vec<String> = self
            .entries
            .iter()
            .map(|e| format!("{}={}", qualified(&e.section, &e.key), e.value))
            .collect();
        lines.sort();
        lines.join("\n")
    }
}

fn qualified(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}
