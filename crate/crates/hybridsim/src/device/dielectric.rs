//! Polarizability of the beam in the prolate-spheroid surrogate.

use super::BeamSpec;
use crate::constants::EPSILON_0;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Polarizability {
    /// Transverse polarizability (F/m).
    pub alpha_perp: f64,
    /// Longitudinal polarizability (F/m).
    pub alpha_z: f64,
    /// Depolarization factor along the long axis.
    pub n_z: f64,
    /// Depolarization factor transverse to the long axis.
    pub n_perp: f64,
}

/// Depolarization factor N_z(e) for eccentricity e in (0, 1).
fn depolarization_z(e: f64) -> f64 {
    if e < 1e-4 {
        // Series around the sphere; the closed form cancels badly here.
        let e2 = e * e;
        (1.0 - e2) * (1.0 / 3.0 + e2 / 5.0 + e2 * e2 / 7.0)
    } else {
        (1.0 - e * e) / (2.0 * e.powi(3)) * (((1.0 + e) / (1.0 - e)).ln() - 2.0 * e)
    }
}

/// Transverse and longitudinal polarizabilities of a prolate spheroid with
/// the beam's aspect ratio and permittivity.
pub fn polarizability(beam: &BeamSpec) -> Result<Polarizability> {
    if beam.radius >= beam.length {
        return Err(Error::Domain(
            "polarizability needs r < l (eccentricity undefined otherwise)".into(),
        ));
    }
    beam.validate()?;
    let ratio = beam.radius / beam.length;
    let e = (1.0 - ratio * ratio).sqrt();
    let n_z = depolarization_z(e);
    let n_perp = 0.5 * (1.0 - n_z);
    let chi = beam.relative_permittivity - 1.0;
    Ok(Polarizability {
        alpha_perp: EPSILON_0 * chi / (1.0 + n_perp * chi),
        alpha_z: EPSILON_0 * chi / (1.0 + n_z * chi),
        n_z,
        n_perp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::DIAMOND;
    use approx::assert_relative_eq;

    fn beam(l: f64, r: f64) -> BeamSpec {
        BeamSpec::with_material(l, r, 1e5, &DIAMOND)
    }

    #[test]
    fn thin_needle_limit() {
        let p = polarizability(&beam(1.0, 1e-6)).unwrap();
        assert!(p.n_z < 1e-9);
        assert_relative_eq!(p.n_perp, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn sphere_limit_is_one_third() {
        // r -> l means e -> 0; series oracle gives N_z -> 1/3.
        for ratio in [0.999, 0.99999, 0.9999999] {
            let p = polarizability(&beam(1.0, ratio)).unwrap();
            assert!((p.n_z - 1.0 / 3.0).abs() < 2.0 * (1.0 - ratio), "ratio {ratio}: {}", p.n_z);
        }
    }

    #[test]
    fn reference_aspect_ratio_value() {
        // Frozen: eps_r = 5.7, r/l = 1/800 -> alpha_perp / eps0 = 1.402995.
        let p = polarizability(&beam(800.0, 1.0)).unwrap();
        assert_relative_eq!(p.alpha_perp / EPSILON_0, 1.402_995, max_relative = 1e-5);
    }

    #[test]
    fn depolarization_sum_rule() {
        for ratio in [1e-4, 1e-2, 0.1, 0.5, 0.9, 0.999] {
            let p = polarizability(&beam(1.0, ratio)).unwrap();
            assert_relative_eq!(p.n_z + 2.0 * p.n_perp, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn degenerate_aspect_rejected() {
        assert!(polarizability(&beam(1.0, 1.0)).is_err());
    }
}
