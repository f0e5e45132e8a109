// Copyright 2026 The stmqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Rectangular rotating-field pulses and pulse sequences.
//!
//! Sequence file format, one step per line, `#` starts a comment:
//!
//! ```text
//! # channel  carrier_hz            rabi_hz  phase_rad  duration_s
//! nuclear    1.8844839512345679e9  3000     0          1.6666666666666666e-4
//! delay      1e-3
//! electron   2.7809e11             1e6      0          5e-7
//! ```
//!
//! Numbers are written in shortest round-trip form, so a parsed file
//! reproduces every value bit for bit.

use std::fmt;
use std::str::FromStr;

use crate::constants::CODATA;
use crate::error::{Error, Result};
use crate::species::IonSpecies;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Electron,
    Nuclear,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Electron => "electron",
            Channel::Nuclear => "nuclear",
        })
    }
}

impl FromStr for Channel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "electron" | "e" => Ok(Channel::Electron),
            "nuclear" | "n" => Ok(Channel::Nuclear),
            _ => Err(format!("unknown channel `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub channel: Channel,
    /// Hz.
    pub carrier_frequency: f64,
    /// Hz.
    pub rabi_frequency: f64,
    /// rad.
    pub phase: f64,
    /// s.
    pub duration: f64,
}

impl PulseSpec {
    /// Pulse rotating its resonant transition by `angle` radians.
    pub fn rotation(channel: Channel, carrier: f64, rabi: f64, angle: f64, phase: f64) -> Self {
        PulseSpec {
            channel,
            carrier_frequency: carrier,
            rabi_frequency: rabi,
            phase,
            duration: angle / (std::f64::consts::TAU * rabi),
        }
    }

    pub fn pi(channel: Channel, carrier: f64, rabi: f64) -> Self {
        PulseSpec {
            channel,
            carrier_frequency: carrier,
            rabi_frequency: rabi,
            phase: 0.0,
            duration: pi_pulse_duration(rabi),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rabi_frequency > 0.0 && self.rabi_frequency.is_finite()) {
            return Err(Error::Domain(format!(
                "rabi frequency must be > 0, got {}",
                self.rabi_frequency
            )));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::Domain(format!(
                "pulse duration must be > 0, got {}",
                self.duration
            )));
        }
        if !self.carrier_frequency.is_finite() || !self.phase.is_finite() {
            return Err(Error::Domain("carrier and phase must be finite".into()));
        }
        Ok(())
    }

    /// Rotation angle on a resonant transition, rad.
    pub fn angle(&self) -> f64 {
        std::f64::consts::TAU * self.rabi_frequency * self.duration
    }
}

/// Rabi frequency produced by a rotating field of amplitude `b_perp`.
pub fn rabi_from_field(species: &IonSpecies, channel: Channel, b_perp: f64) -> Result<f64> {
    if !(b_perp > 0.0) {
        return Err(Error::Domain(format!("b_perp must be > 0, got {b_perp}")));
    }
    Ok(match channel {
        Channel::Nuclear => species.nuclear_hz_per_tesla() * b_perp,
        Channel::Electron => species.g_e * CODATA.bohr_magneton * b_perp / CODATA.planck_h,
    })
}

/// Duration of a pi-pulse at Rabi frequency `f_r`: `1 / (2 f_r)`.
pub fn pi_pulse_duration(f_r: f64) -> f64 {
    assert!(f_r > 0.0, "Rabi frequency must be positive");
    1.0 / (2.0 * f_r)
}

/// Largest Rabi frequency not above `max_rabi` for which a pi-pulse
/// returns a transition detuned by `detuning` exactly to its start
/// population: `detuning / sqrt(4 m^2 - 1)` for the smallest integer m.
pub fn synchronized_rabi(detuning: f64, max_rabi: f64) -> Result<f64> {
    let d = detuning.abs();
    if !(d > 0.0 && max_rabi > 0.0) {
        return Err(Error::Domain(
            "detuning and rabi bound must be positive".into(),
        ));
    }
    let mut m = 1.0f64;
    loop {
        let f = d / (4.0 * m * m - 1.0).sqrt();
        if f <= max_rabi {
            return Ok(f);
        }
        m += 1.0;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceStep {
    Pulse(PulseSpec),
    /// Free evolution, s.
    Delay(f64),
}

impl SequenceStep {
    pub fn duration(&self) -> f64 {
        match self {
            SequenceStep::Pulse(p) => p.duration,
            SequenceStep::Delay(d) => *d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseSequence {
    pub steps: Vec<SequenceStep>,
}

impl PulseSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pulse(mut self, p: PulseSpec) -> Self {
        self.steps.push(SequenceStep::Pulse(p));
        self
    }

    pub fn delay(mut self, d: f64) -> Self {
        self.steps.push(SequenceStep::Delay(d));
        self
    }

    pub fn push(&mut self, step: SequenceStep) {
        self.steps.push(step);
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn total_duration(&self) -> f64 {
        self.steps.iter().map(SequenceStep::duration).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.steps {
            match s {
                SequenceStep::Pulse(p) => p.validate()?,
                SequenceStep::Delay(d) => {
                    if !(*d >= 0.0 && d.is_finite()) {
                        return Err(Error::Domain(format!("delay must be >= 0, got {d}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# channel carrier_hz rabi_hz phase_rad duration_s\n");
        for s in &self.steps {
            match s {
                SequenceStep::Pulse(p) => out.push_str(&format!(
                    "{} {:e} {:e} {:e} {:e}\n",
                    p.channel, p.carrier_frequency, p.rabi_frequency, p.phase, p.duration
                )),
                SequenceStep::Delay(d) => out.push_str(&format!("delay {d:e}\n")),
            }
        }
        out
    }

    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let mut seq = PulseSequence::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |field: &str, message: String| Error::Parse {
                file: file.into(),
                line: line_no,
                field: field.into(),
                message,
            };
            let cols: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|c| !c.is_empty())
                .collect();
            let num = |j: usize, field: &str| -> Result<f64> {
                cols.get(j)
                    .ok_or_else(|| err(field, "missing value".into()))?
                    .parse::<f64>()
                    .map_err(|e| err(field, e.to_string()))
            };
            if cols[0].eq_ignore_ascii_case("delay") {
                if cols.len() != 2 {
                    return Err(err("delay", "expected `delay <duration_s>`".into()));
                }
                seq.push(SequenceStep::Delay(num(1, "duration")?));
                continue;
            }
            let channel: Channel = cols[0].parse().map_err(|e| err("channel", e))?;
            if cols.len() != 5 {
                return Err(err(
                    "pulse",
                    format!("expected 5 columns, got {}", cols.len()),
                ));
            }
            seq.push(SequenceStep::Pulse(PulseSpec {
                channel,
                carrier_frequency: num(1, "carrier")?,
                rabi_frequency: num(2, "rabi")?,
                phase: num(3, "phase")?,
                duration: num(4, "duration")?,
            }));
        }
        seq.validate()?;
        Ok(seq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_pulse_durations() {
        assert!((pi_pulse_duration(6.75e3) - 74.07e-6).abs() / 74.07e-6 < 1e-3);
        assert!((pi_pulse_duration(200.0) - 2.5e-3).abs() < 1e-12);
        assert_eq!(pi_pulse_duration(0.5), 1.0);
        let p = PulseSpec::pi(Channel::Nuclear, 1e6, 123.0);
        assert!((p.duration * 2.0 * p.rabi_frequency - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rabi_from_field_values() {
        let te = IonSpecies::te125();
        let e = rabi_from_field(&te, Channel::Electron, 1e-3).unwrap();
        assert!((e - 28.0e6).abs() / 28.0e6 < 1e-3, "{e}");
        let n1 = rabi_from_field(&te, Channel::Nuclear, 2e-4).unwrap();
        let n2 = rabi_from_field(&te, Channel::Nuclear, 4e-4).unwrap();
        assert!((n2 / n1 - 2.0).abs() < 1e-15);
        // field giving f_nR = 6.76 kHz -> tau ~ 74 us
        let b = 6.76e3 / te.nuclear_hz_per_tesla();
        let f = rabi_from_field(&te, Channel::Nuclear, b).unwrap();
        assert!((pi_pulse_duration(f) - 74e-6).abs() / 74e-6 < 0.01);
        assert!(rabi_from_field(&te, Channel::Nuclear, 0.0).is_err());
    }

    #[test]
    fn synchronized_rabi_completes_whole_cycles() {
        for (d, max) in [(200.0, 100.0), (6.7e3, 1.5e3), (14e6, 1.4e6)] {
            let f = synchronized_rabi(d, max).unwrap();
            assert!(f <= max);
            let cycles = (f * f + d * d).sqrt() * pi_pulse_duration(f);
            assert!((cycles - cycles.round()).abs() < 1e-12, "{cycles}");
        }
        assert!((synchronized_rabi(200.0, 200.0).unwrap() - 200.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        let mut p = PulseSpec::pi(Channel::Electron, 1e9, 1e6);
        assert!(p.validate().is_ok());
        p.rabi_frequency = 0.0;
        assert!(p.validate().is_err());
        let s = PulseSequence::new().delay(-1.0);
        assert!(s.validate().is_err());
        assert!(PulseSequence::new().validate().is_ok());
    }

    #[test]
    fn parse_reports_line() {
        let text = "delay 1e-3\nnuclear 1e6 100 0\n";
        match PulseSequence::parse(text, "s.seq").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("{e}"),
        }
        assert!(PulseSequence::parse("photon 1 2 3 4", "s").is_err());
    }
}
