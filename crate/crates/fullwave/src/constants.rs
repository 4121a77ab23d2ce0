//! Physical constants (CODATA 2018) and the built-in species table.
//!
//! All values are SI. The constants live in one table and are never inlined
//! at use sites, so a different vintage can be swapped in for reproducing
//! older computations.

use crate::error::Error;
use crate::Result;

/// Table of fundamental constants, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Vacuum permittivity ε₀ (F/m).
    pub eps0: f64,
    /// Vacuum permeability μ₀ (H/m).
    pub mu0: f64,
    /// Speed of light c (m/s).
    pub c: f64,
    /// Electron mass (kg).
    pub m_e: f64,
    /// Elementary charge, positive (C).
    pub q_e: f64,
    /// Boltzmann constant (J/K).
    pub k_b: f64,
}

/// CODATA 2018 values.
pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    eps0: 8.854_187_812_8e-12,
    mu0: 1.256_637_062_12e-6,
    c: 299_792_458.0,
    m_e: 9.109_383_701_5e-31,
    q_e: 1.602_176_634e-19,
    k_b: 1.380_649e-23,
};

/// Proton mass (kg), CODATA 2018.
pub const M_PROTON: f64 = 1.672_621_923_69e-27;
/// Deuteron mass (kg), CODATA 2018.
pub const M_DEUTERON: f64 = 3.343_583_772_4e-27;
/// Triton mass (kg), CODATA 2018.
pub const M_TRITON: f64 = 5.007_356_744_6e-27;
/// Alpha particle mass (kg), CODATA 2018.
pub const M_ALPHA: f64 = 6.644_657_335_7e-27;

impl Default for PhysicalConstants {
    fn default() -> Self {
        CODATA_2018
    }
}

impl PhysicalConstants {
    /// Checks ε₀ μ₀ c² = 1 (to 1e-9 relative) and positivity of all entries.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("eps0", self.eps0),
            ("mu0", self.mu0),
            ("c", self.c),
            ("m_e", self.m_e),
            ("q_e", self.q_e),
            ("k_b", self.k_b),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid_parameter(name, "must be strictly positive"));
            }
        }
        let unity = self.eps0 * self.mu0 * self.c * self.c;
        if (unity - 1.0).abs() > 1e-9 {
            return Err(Error::invalid_parameter(
                "eps0*mu0*c^2",
                format!("must equal 1 to 1e-9, got {unity:.12}"),
            ));
        }
        Ok(())
    }

    /// Mass and charge number for a built-in species label.
    ///
    /// Known labels: `e`, `H+`, `D+`, `T+`, `He2+`.
    pub fn builtin_species(&self, label: &str) -> Option<(f64, i32)> {
        match label {
            "e" | "e-" => Some((self.m_e, -1)),
            "H+" | "p" => Some((M_PROTON, 1)),
            "D+" => Some((M_DEUTERON, 1)),
            "T+" => Some((M_TRITON, 1)),
            "He2+" => Some((M_ALPHA, 2)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codata_2018_is_consistent() {
        CODATA_2018.validate().unwrap();
    }

    #[test]
    fn bad_constants_rejected() {
        let mut c = CODATA_2018;
        c.c = 3.0e8; // breaks eps0*mu0*c^2 = 1
        assert!(c.validate().is_err());
        let mut c = CODATA_2018;
        c.m_e = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn species_table() {
        let t = CODATA_2018;
        assert_eq!(t.builtin_species("e").unwrap().1, -1);
        assert_eq!(t.builtin_species("D+").unwrap().1, 1);
        assert_eq!(t.builtin_species("He2+").unwrap().1, 2);
        assert!(t.builtin_species("Xe44+").is_none());
    }
}
