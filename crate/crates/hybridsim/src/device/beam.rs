//! Euler-Bernoulli flexural modes of the doubly clamped beam.

use serde::{Deserialize, Serialize};

use super::BeamSpec;
use crate::error::{Error, Result};

/// k_n l for the first five doubly clamped modes (roots of
/// cos(kl) cosh(kl) = 1).
pub const CLAMPED_ROOTS: [f64; 5] = [4.730, 7.853, 10.996, 14.137, 17.279];

/// Area moment of inertia of the circular cross section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InertiaConvention {
    /// I = pi r^4 / 8 (the convention all reference rates are quoted with).
    EighthPiR4,
    /// I = pi r^4 / 4 (textbook value for bending about a diameter).
    QuarterPiR4,
}

impl Default for InertiaConvention {
    fn default() -> Self {
        InertiaConvention::EighthPiR4
    }
}

impl InertiaConvention {
    pub fn moment(self, radius: f64) -> f64 {
        let r4 = radius.powi(4);
        match self {
            InertiaConvention::EighthPiR4 => std::f64::consts::PI * r4 / 8.0,
            InertiaConvention::QuarterPiR4 => std::f64::consts::PI * r4 / 4.0,
        }
    }
}

/// First `n_modes` flexural frequencies w_n = (k_n)^2 sqrt(E I / rho A)
/// in rad/s. Limited to the five tabulated roots.
pub fn mode_frequencies(
    beam: &BeamSpec,
    n_modes: usize,
    inertia: InertiaConvention,
) -> Result<Vec<f64>> {
    beam.validate()?;
    if n_modes == 0 {
        return Err(Error::Domain("need at least one mode".into()));
    }
    if n_modes > CLAMPED_ROOTS.len() {
        return Err(Error::Domain(format!(
            "only the first {} clamped-mode roots are tabulated",
            CLAMPED_ROOTS.len()
        )));
    }
    let area = std::f64::consts::PI * beam.radius * beam.radius;
    let stiffness = (beam.youngs_modulus * inertia.moment(beam.radius) / (beam.density * area))
        .sqrt();
    Ok(CLAMPED_ROOTS[..n_modes]
        .iter()
        .map(|kl| {
            let k = kl / beam.length;
            k * k * stiffness
        })
        .collect())
}
