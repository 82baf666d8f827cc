//! CODATA 2018 constants.

use std::f64::consts::PI;

/// Vacuum permeability (N/A²).
pub const MU_0: f64 = 1.256_637_062_12e-6;
/// Planck constant (J·s), exact.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant (J·s).
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Elementary charge (C), exact.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Speed of light in vacuum (m/s), exact.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Superconducting flux quantum h/2e (Wb).
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);
/// Flux period of the single-electron Aharonov-Bohm phase, h/e (Wb).
pub const AB_FLUX_PERIOD: f64 = PLANCK / ELEMENTARY_CHARGE;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_values() {
        assert!((HBAR - 1.054_571_817e-34).abs() < 1e-42);
        assert!((FLUX_QUANTUM - 2.067_833_848e-15).abs() < 1e-23);
        assert_eq!(AB_FLUX_PERIOD, 2.0 * FLUX_QUANTUM);
    }
}
