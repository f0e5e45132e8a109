// Copyright 2026 The stmqc Authors
// SPDX-License-Identifier: Apache-2.0

//! CODATA 2018 physical constants in SI units.

/// Fixed set of physical constants. Only [`PhysicalConstants::CODATA_2018`]
/// is used by the simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Bohr magneton, J/T.
    pub bohr_magneton: f64,
    /// Nuclear magneton, J/T.
    pub nuclear_magneton: f64,
    /// Planck constant, J s.
    pub planck_h: f64,
    /// Boltzmann constant, J/K.
    pub boltzmann_k: f64,
    /// mu_0 / 4 pi, T m^3 / (J/T).
    pub vacuum_permeability_over_4pi: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        bohr_magneton: 9.274_010_078_3e-24,
        nuclear_magneton: 5.050_783_746_1e-27,
        planck_h: 6.626_070_15e-34,
        boltzmann_k: 1.380_649e-23,
        vacuum_permeability_over_4pi: 1.000_000_000_55e-7,
    };

    /// Electron Larmor frequency per tesla for a given g-factor, Hz/T.
    pub fn electron_hz_per_tesla(&self, g_e: f64) -> f64 {
        g_e * self.bohr_magneton / self.planck_h
    }
}

/// Shorthand for the constant set used everywhere.
pub const CODATA: PhysicalConstants = PhysicalConstants::CODATA_2018;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_positive() {
        let c = CODATA;
        for v in [
            c.bohr_magneton,
            c.nuclear_magneton,
            c.planck_h,
            c.boltzmann_k,
            c.vacuum_permeability_over_4pi,
        ] {
            assert!(v > 0.0);
        }
    }

    #[test]
    fn free_electron_ratio() {
        // g = 2 electron: 27.99 GHz/T
        let r = CODATA.electron_hz_per_tesla(2.0);
        assert!((r - 27.992_49e9).abs() / r < 1e-5, "{r}");
    }
}
