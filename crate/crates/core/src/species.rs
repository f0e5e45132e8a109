// Copyright 2026 The stmqc Authors
// SPDX-License-Identifier: Apache-2.0

use crate::constants::CODATA;
use crate::error::{Error, Result};

/// Physical parameters of one paramagnetic ion species.
///
/// `gamma_n_over_2pi` carries the sign of the nuclear moment. Frequencies
/// derived from it use the magnitude; the sign only decides which nuclear
/// spin projection is the ground state and hence the sign of the hyperfine
/// shift seen by each labelled state.
#[derive(Debug, Clone, PartialEq)]
pub struct IonSpecies {
    pub name: String,
    pub g_e: f64,
    /// Nuclear gyromagnetic ratio over 2 pi, Hz/T (signed).
    pub gamma_n_over_2pi: f64,
    /// Hyperfine constant A/h, Hz.
    pub hyperfine_a_over_h: f64,
}

impl IonSpecies {
    /// Nuclear moment of Te-125 in nuclear magnetons (negative).
    pub const TE125_MOMENT_NM: f64 = -0.882;

    /// The 125Te+ A-center: g_e = 2, A/h = 3.5 GHz, moment -0.882 mu_N.
    pub fn te125() -> Self {
        IonSpecies {
            name: "Te-125".to_string(),
            g_e: 2.0,
            gamma_n_over_2pi: gamma_from_moment(Self::TE125_MOMENT_NM, 0.5),
            hyperfine_a_over_h: 3.5e9,
        }
    }

    /// Looks up a built-in preset by name (case-insensitive).
    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "te-125" | "te125" | "125te" => Some(Self::te125()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g_e > 0.0 && self.g_e.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "g_e must be > 0, got {}",
                self.g_e
            )));
        }
        if !(self.hyperfine_a_over_h > 0.0 && self.hyperfine_a_over_h.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "A_over_h must be > 0, got {}",
                self.hyperfine_a_over_h
            )));
        }
        if !(self.gamma_n_over_2pi != 0.0 && self.gamma_n_over_2pi.is_finite()) {
            return Err(Error::InvalidConfig(
                "gamma_n_over_2pi must be finite and nonzero".to_string(),
            ));
        }
        Ok(())
    }

    /// Electron Larmor frequency per tesla, Hz/T.
    pub fn electron_hz_per_tesla(&self) -> f64 {
        CODATA.electron_hz_per_tesla(self.g_e)
    }

    /// |gamma_n / 2 pi|, Hz/T.
    pub fn nuclear_hz_per_tesla(&self) -> f64 {
        self.gamma_n_over_2pi.abs()
    }

    /// +1 when the nuclear moment is negative (nuclear ground state has
    /// m_I = -1/2, same as the electron), -1 otherwise.
    pub fn hyperfine_sign(&self) -> f64 {
        if self.gamma_n_over_2pi < 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// gamma/2pi in Hz/T for a nucleus of spin `spin` whose moment is
/// `moment_nm` nuclear magnetons: mu = gamma hbar I, so gamma/2pi = mu / (h I).
pub fn gamma_from_moment(moment_nm: f64, spin: f64) -> f64 {
    moment_nm * CODATA.nuclear_magneton / (CODATA.planck_h * spin)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn te125_gamma_from_moment() {
        let s = IonSpecies::te125();
        assert!(s.gamma_n_over_2pi < 0.0);
        let g = s.nuclear_hz_per_tesla();
        assert!((g - 13.45e6).abs() / 13.45e6 < 1e-3, "{g}");
        assert_eq!(s.hyperfine_sign(), 1.0);
        s.validate().unwrap();
    }

    #[test]
    fn preset_lookup() {
        assert_eq!(IonSpecies::preset("TE-125"), Some(IonSpecies::te125()));
        assert!(IonSpecies::preset("P-31").is_none());
    }

    #[test]
    fn rejects_bad_values() {
        let mut s = IonSpecies::te125();
        s.g_e = 0.0;
        assert!(s.validate().is_err());
        let mut s = IonSpecies::te125();
        s.hyperfine_a_over_h = -1.0;
        assert!(s.validate().is_err());
    }
}
