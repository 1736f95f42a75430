//! Physical constants (SI) and material defaults.
//!
//! Internal unit convention: Hamiltonians and all angular frequencies are in
//! rad/s with ħ = 1 absorbed; decay rates in 1/s; times in seconds. Conversions
//! to/from laboratory Hz always go through an explicit 2π.

use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_8128e-12;
/// Vacuum permeability (H/m).
pub const MU_0: f64 = 1.256_637_062_12e-6;
/// Speed of light (m/s).
pub const C_LIGHT: f64 = 299_792_458.0;
/// Vacuum impedance (Ohm).
pub const Z_0: f64 = MU_0 * C_LIGHT;
/// Bohr magneton (J/T).
pub const MU_B: f64 = 9.274_010_0783e-24;

/// NV center Landé factor.
pub const G_NV: f64 = 2.0;
/// NV zero-field splitting (rad/s).
pub const D_NV: f64 = TWO_PI * 2.87e9;

/// Convert an ordinary frequency in Hz to rad/s.
pub fn rad_per_sec(hz: f64) -> f64 {
    TWO_PI * hz
}

/// Convert rad/s to an ordinary frequency in Hz.
pub fn hz(rad_per_sec: f64) -> f64 {
    rad_per_sec / TWO_PI
}

/// Bulk material constants of the beam. Handbook values for single-crystal
/// diamond; every field can be overridden through the run configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialConstants {
    /// Young's modulus (Pa).
    pub youngs_modulus: f64,
    /// Mass density (kg/m^3).
    pub density: f64,
    /// Relative permittivity (dimensionless).
    pub relative_permittivity: f64,
}

pub const DIAMOND: MaterialConstants = MaterialConstants {
    youngs_modulus: 1.05e12,
    density: 3515.0,
    relative_permittivity: 5.7,
};

impl Default for MaterialConstants {
    fn default() -> Self {
        DIAMOND
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn impedance_matches_codata() {
        assert!((Z_0 - 376.730_313).abs() < 1e-3);
    }

    #[test]
    fn hz_roundtrip() {
        assert!((hz(rad_per_sec(320e3)) - 320e3).abs() < 1e-6);
    }
}
