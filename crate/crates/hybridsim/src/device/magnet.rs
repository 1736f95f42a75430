//! Micromagnet field gradient and the spin-motion coupling it induces.

use super::MagnetSpec;
use crate::constants::{G_NV, HBAR, MU_0, MU_B};
use crate::error::Result;

/// Field gradient of the bar magnet in the point-dipole approximation:
/// dB/dx = 3 mu0 |m| / (4 pi d0^4), |m| = l w t M.
pub fn field_gradient(magnet: &MagnetSpec) -> Result<f64> {
    magnet.validate()?;
    let (l, w, t) = magnet.dimensions;
    let moment = l * w * t * magnet.magnetization;
    Ok(3.0 * MU_0 * moment / (4.0 * std::f64::consts::PI * magnet.standoff.powi(4)))
}

/// Spin-motion coupling lambda = (g_NV mu_B / sqrt(2) hbar) (dB/dx) x_zpf
/// (rad/s) for a mode of motional mass `mass` and frequency `omega_m`.
pub fn spin_motion_coupling(mass: f64, omega_m: f64, gradient: f64) -> f64 {
    let x_zpf = (HBAR / (2.0 * mass * omega_m)).sqrt();
    (G_NV * MU_B / (std::f64::consts::SQRT_2 * HBAR)) * gradient * x_zpf
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cobalt_bar() -> MagnetSpec {
        MagnetSpec {
            dimensions: (200e-9, 50e-9, 50e-9),
            magnetization: 1.5e6,
            standoff: 60e-9,
            bias_field: 0.1,
        }
    }

    #[test]
    fn cobalt_bar_gradient() {
        // Frozen: 1.736e7 T/m, consistent with the quoted 1e7 T/m scale.
        let g = field_gradient(&cobalt_bar()).unwrap();
        assert_relative_eq!(g, 1.736_11e7, max_relative = 1e-5);
        assert!((1e7..2e7).contains(&g));
    }

    #[test]
    fn standoff_fourth_power() {
        let near = field_gradient(&cobalt_bar()).unwrap();
        let mut far_spec = cobalt_bar();
        far_spec.standoff *= 2.0;
        let far = field_gradient(&far_spec).unwrap();
        assert_relative_eq!(near / far, 16.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_magnetization_gives_zero() {
        let mut spec = cobalt_bar();
        spec.magnetization = 0.0;
        assert_eq!(field_gradient(&spec).unwrap(), 0.0);
    }

    #[test]
    fn coupling_scalings() {
        let mass = 9.055e-15;
        let omega = 2.0332e6;
        let lam = spin_motion_coupling(mass, omega, 1e7);
        // Frozen reference for the 82 um beam.
        assert_relative_eq!(lam, 6.655_7e4, max_relative = 1e-4);
        // Linear in the gradient.
        assert_relative_eq!(spin_motion_coupling(mass, omega, 2e7), 2.0 * lam, max_relative = 1e-12);
        assert_eq!(spin_motion_coupling(mass, omega, 0.0), 0.0);
        // Quadrupling the mass halves the coupling at fixed frequency.
        assert_relative_eq!(
            spin_motion_coupling(4.0 * mass, omega, 1e7),
            0.5 * lam,
            max_relative = 1e-12
        );
    }
}
