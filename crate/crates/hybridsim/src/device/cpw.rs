//! Coplanar-waveguide cavity mode: frequency, zero-point field, and the
//! transverse mode-function series of the magnetic-wall waveguide model.

use super::CavitySpec;
use crate::constants::{C_LIGHT, EPSILON_0, HBAR};
use crate::error::{Error, Result};

/// Nominal number of odd series terms.
pub const SERIES_TERMS: usize = 50;
/// Hard cap when the convergence check forces continuation (close to the
/// plane the terms decay slowly; at x = 0 they do not decay at all).
pub const SERIES_TERMS_MAX: usize = 500;
/// Relative size of the last term at which the series is declared converged.
pub const SERIES_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct ModeVector {
    pub x: f64,
    pub y: f64,
    pub magnitude: f64,
}

/// Half-wavelength CPW mode (m = 1, lambda_c = 2L).
#[derive(Debug, Clone, Copy)]
pub struct CpwMode {
    /// Mode frequency (rad/s).
    pub omega_c: f64,
    /// Single-photon field amplitude sqrt(hbar w_c / eps0 V_c) (V/m).
    pub e0: f64,
    /// Effective mode volume pi d^2 L (m^3).
    pub mode_volume: f64,
    delta: f64,
    lateral_period: f64,
    gamma_scale: f64,
}

impl CpwMode {
    /// Dimensionless transverse mode function at height x above the plane,
    /// lateral position y.
    pub fn series_value(&self, x: f64, y: f64) -> Result<ModeVector> {
        self.series_eval(x, y, false)
    }

    /// d/dx of the transverse mode function (1/m).
    pub fn series_gradient_x(&self, x: f64, y: f64) -> Result<ModeVector> {
        self.series_eval(x, y, true)
    }

    fn series_eval(&self, x: f64, y: f64, gradient: bool) -> Result<ModeVector> {
        let b = self.lateral_period;
        let mut ex = 0.0f64;
        let mut ey = 0.0f64;
        let mut last = f64::INFINITY;
        let mut terms = 0usize;
        while terms < SERIES_TERMS_MAX {
            let n = (2 * terms + 1) as f64;
            let arg = n * std::f64::consts::PI * self.delta / 2.0;
            let s_n = (arg.sin() / arg) * arg.sin();
            let gamma_n = (n * std::f64::consts::PI / b).hypot(self.gamma_scale);
            let f_n = gamma_n * b / (n * std::f64::consts::PI);
            let decay = (-gamma_n * x).exp();
            let scale = if gradient { -gamma_n } else { 1.0 };
            let tx = -(1.0 / f_n) * s_n * (n * std::f64::consts::PI * y / b).cos() * decay * scale;
            let ty = s_n * (n * std::f64::consts::PI * y / b).sin() * decay * scale;
            ex += tx;
            ey += ty;
            last = tx.hypot(ty);
            terms += 1;
            if terms >= SERIES_TERMS && last <= SERIES_TOL * ex.hypot(ey) {
                break;
            }
        }
        let mag = ex.hypot(ey);
        if mag > 0.0 && last > SERIES_TOL * mag {
            return Err(Error::NonConvergent(format!(
                "mode-function series at (x = {x:.3e}, y = {y:.3e}): last term {:.2e} of {:.2e} \
                 after {terms} odd terms",
                last, mag
            )));
        }
        Ok(ModeVector { x: ex, y: ey, magnitude: mag })
    }
}

/// Mode frequency, zero-point field and mode-function evaluator for the
/// half-wavelength mode.
pub fn mode(cavity: &CavitySpec) -> Result<CpwMode> {
    cavity.validate()?;
    let l = cavity.stripline_length;
    let eps_eff = cavity.effective_permittivity;
    let omega_c = std::f64::consts::PI * C_LIGHT / (l * eps_eff.sqrt());
    let mode_volume = std::f64::consts::PI * cavity.electrode_distance.powi(2) * l;
    let e0 = (HBAR * omega_c / (EPSILON_0 * mode_volume)).sqrt();
    // Free-space wavelength of the mode and the slow-wave factor entering
    // gamma_n = sqrt((n pi / b)^2 + (2 pi v / lambda0)^2), v = sqrt(eps_eff - 1).
    let lambda0 = 2.0 * l * eps_eff.sqrt();
    let v = (eps_eff - 1.0).max(0.0).sqrt();
    Ok(CpwMode {
        omega_c,
        e0,
        mode_volume,
        delta: cavity.electrode_distance / cavity.lateral_period(),
        lateral_period: cavity.lateral_period(),
        gamma_scale: 2.0 * std::f64::consts::PI * v / lambda0,
    })
}
