//! Adaptive embedded Runge-Kutta integration (Dormand-Prince 5(4)) over
//! complex state vectors.
//!
//! The controller clamps steps so every requested output time is hit exactly,
//! which keeps runs bit-deterministic for a fixed configuration.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Smallest step relative to the total span before stiffness is reported.
    pub min_step_frac: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, max_steps: 50_000_000, min_step_frac: 1e-14 }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub rhs_evals: usize,
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// b - b_hat (5th minus embedded 4th order weights).
const E1: f64 = B1 - 5179.0 / 57600.0;
const E3: f64 = B3 - 7571.0 / 16695.0;
const E4: f64 = B4 - 393.0 / 640.0;
const E5: f64 = B5 + 92097.0 / 339200.0;
const E6: f64 = B6 - 187.0 / 2100.0;
const E7: f64 = -1.0 / 40.0;

fn max_abs(v: &[C64]) -> f64 {
    v.iter().fold(0.0_f64, |m, z| m.max(z.norm_sqr())).sqrt()
}

/// y = a; y += h * sum(c_i * k_i)
fn combine(y: &mut [C64], a: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    y.copy_from_slice(a);
    for &(c, k) in terms {
        let ch = C64::new(c * h, 0.0);
        for (yi, ki) in y.iter_mut().zip(k.iter()) {
            *yi += ch * *ki;
        }
    }
}

/// Integrate dy/dt = f(t, y) from `times[0]`, invoking `observe` with the
/// state at every entry of `times` (including the first).
///
/// `times` must be strictly increasing.
pub fn integrate<F, O>(
    rhs: F,
    y0: &[C64],
    times: &[f64],
    opts: &OdeOptions,
    observe: O,
) -> Result<OdeStats>
where
    F: Fn(f64, &[C64], &mut [C64]),
    O: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    integrate_with_post_step(rhs, y0, times, opts, observe, |_, _| {})
}

/// [`integrate`] with a mutation hook invoked after every accepted step
/// (used for trace renormalization of density-matrix states).
pub fn integrate_with_post_step<F, O, P>(
    rhs: F,
    y0: &[C64],
    times: &[f64],
    opts: &OdeOptions,
    mut observe: O,
    mut post_step: P,
) -> Result<OdeStats>
where
    F: Fn(f64, &[C64], &mut [C64]),
    O: FnMut(usize, f64, &[C64]) -> Result<()>,
    P: FnMut(f64, &mut [C64]),
{
    if times.len() < 2 {
        return Err(Error::Integration("need at least two output times".into()));
    }
    for w in times.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Integration("output times must be strictly increasing".into()));
        }
    }
    let n = y0.len();
    let span = times[times.len() - 1] - times[0];
    let mut stats = OdeStats::default();

    let mut y = y0.to_vec();
    let mut ynew = vec![C64::new(0.0, 0.0); n];
    let mut ytmp = vec![C64::new(0.0, 0.0); n];
    let mut k1 = vec![C64::new(0.0, 0.0); n];
    let mut k2 = vec![C64::new(0.0, 0.0); n];
    let mut k3 = vec![C64::new(0.0, 0.0); n];
    let mut k4 = vec![C64::new(0.0, 0.0); n];
    let mut k5 = vec![C64::new(0.0, 0.0); n];
    let mut k6 = vec![C64::new(0.0, 0.0); n];
    let mut k7 = vec![C64::new(0.0, 0.0); n];

    let mut t = times[0];
    observe(0, t, &y)?;

    rhs(t, &y, &mut k1);
    stats.rhs_evals += 1;

    // Initial step size from the first derivative scale.
    let scale0 = opts.atol + opts.rtol * max_abs(&y).max(1e-30);
    let f0 = max_abs(&k1).max(1e-30);
    let mut h = (0.01 * scale0 / f0).min(span / 10.0).max(span * 1e-12);

    let mut next_out = 1usize;
    let mut err_prev: f64 = 1.0;

    while next_out < times.len() {
        if stats.steps_accepted + stats.steps_rejected > opts.max_steps {
            return Err(Error::Integration(format!(
                "exceeded {} steps at t = {t:.6e}",
                opts.max_steps
            )));
        }
        if h < span * opts.min_step_frac {
            return Err(Error::Integration(format!(
                "step size underflow (h = {h:.3e}) at t = {t:.6e}: problem too stiff \
                 for the requested tolerance"
            )));
        }
        let t_target = times[next_out];
        let mut clamped = false;
        let mut hstep = h;
        if t + hstep >= t_target {
            hstep = t_target - t;
            clamped = true;
        }

        // Stage evaluations.
        combine(&mut ytmp, &y, hstep, &[(A21, &k1)]);
        rhs(t + C2 * hstep, &ytmp, &mut k2);
        combine(&mut ytmp, &y, hstep, &[(A31, &k1), (A32, &k2)]);
        rhs(t + C3 * hstep, &ytmp, &mut k3);
        combine(&mut ytmp, &y, hstep, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        rhs(t + C4 * hstep, &ytmp, &mut k4);
        combine(&mut ytmp, &y, hstep, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        rhs(t + C5 * hstep, &ytmp, &mut k5);
        combine(
            &mut ytmp,
            &y,
            hstep,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        rhs(t + hstep, &ytmp, &mut k6);
        combine(&mut ynew, &y, hstep, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        rhs(t + hstep, &ynew, &mut k7);
        stats.rhs_evals += 6;

        // Embedded error estimate, norm-scaled.
        let mut err_max2: f64 = 0.0;
        for i in 0..n {
            let e = E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i];
            err_max2 = err_max2.max(e.norm_sqr());
        }
        let err_norm = hstep * err_max2.sqrt();
        let scale = opts.atol + opts.rtol * max_abs(&y).max(max_abs(&ynew));
        let err = err_norm / scale;

        if err <= 1.0 {
            stats.steps_accepted += 1;
            t += hstep;
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7); // FSAL
            post_step(t, &mut y);
            if clamped {
                observe(next_out, t, &y)?;
                next_out += 1;
            }
            // PI step controller (Gustafsson).
            let e = err.max(1e-10);
            let fac = 0.9 * e.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            err_prev = e;
            h = hstep * fac.clamp(0.2, 5.0);
        } else {
            stats.steps_rejected += 1;
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            h = hstep * fac;
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay() {
        let kappa = 2.3;
        let y0 = [C64::new(1.0, 0.0)];
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let mut vals = Vec::new();
        integrate(
            |_t, y, dy| dy[0] = -C64::new(kappa, 0.0) * y[0],
            &y0,
            &times,
            &OdeOptions::default(),
            |_, t, y| {
                vals.push((t, y[0].re));
                Ok(())
            },
        )
        .unwrap();
        for (t, v) in vals {
            assert_relative_eq!(v, (-kappa * t).exp(), epsilon = 1e-9);
        }
    }

    #[test]
    fn oscillator_phase_accuracy() {
        // dy/dt = i w y; |y| conserved, phase = w t.
        let w = 7.0;
        let y0 = [C64::new(1.0, 0.0)];
        let times = vec![0.0, 50.0];
        let mut last = C64::new(0.0, 0.0);
        integrate(
            |_t, y, dy| dy[0] = C64::new(0.0, w) * y[0],
            &y0,
            &times,
            &OdeOptions::default(),
            |_, _, y| {
                last = y[0];
                Ok(())
            },
        )
        .unwrap();
        let expect = C64::new(0.0, w * 50.0).exp();
        assert!((last - expect).norm() < 1e-6, "phase error {}", (last - expect).norm());
    }

    #[test]
    fn rejects_non_increasing_times() {
        let y0 = [C64::new(1.0, 0.0)];
        let r = integrate(
            |_, _, dy| dy[0] = C64::new(0.0, 0.0),
            &y0,
            &[0.0, 0.0],
            &OdeOptions::default(),
            |_, _, _| Ok(()),
        );
        assert!(r.is_err());
    }

    #[test]
    fn stiffness_reported_as_underflow() {
        // Decay rate so fast that resolving it needs steps below the floor.
        let y0 = [C64::new(1.0, 0.0)];
        let r = integrate(
            |_t, y, dy| dy[0] = C64::new(-1e20, 0.0) * y[0],
            &y0,
            &[0.0, 1.0],
            &OdeOptions { rtol: 1e-13, atol: 1e-16, ..Default::default() },
            |_, _, _| Ok(()),
        );
        match r {
            Err(Error::Integration(msg)) => assert!(msg.contains("underflow"), "{msg}"),
            other => panic!("expected step underflow, got {other:?}"),
        }
    }
}
