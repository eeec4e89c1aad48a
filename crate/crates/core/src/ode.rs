//! Adaptive ODE integrators for small dense systems.
//!
//! Two steppers are provided:
//!
//! * [`Dopri5`] — explicit Dormand–Prince 5(4) with PI-free step control.
//!   Used as the high-accuracy oracle for the closed-form mode propagator.
//! * [`TrBdf2`] — one-step L-stable TR-BDF2 (trapezoid + BDF2 composite)
//!   with Newton iteration. Used for long comparison-ODE runs where the
//!   damping mode makes explicit steppers stability-limited.
//!
//! Both support an optional event function `g(t, y)`; integration stops at
//! the first upward zero crossing of `g`, located by bisection on the cubic
//! Hermite interpolant of the bracketing step.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget exhausted after {steps} steps at t = {t}")]
    TooManySteps { steps: usize, t: f64 },
    #[error("Newton iteration failed to converge at t = {t}")]
    NewtonFailure { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

/// Result of an adaptive integration run.
#[derive(Debug, Clone)]
pub struct Integration {
    /// Final time reached (event time if an event fired).
    pub t: f64,
    /// State at `t`.
    pub y: Vec<f64>,
    /// Whether the event function fired before `t_end`.
    pub event_fired: bool,
    /// Accepted steps taken.
    pub steps: usize,
}

type EventFn<'a> = &'a dyn Fn(f64, &[f64]) -> f64;

/// Locate the upward zero crossing of `g` inside a step via bisection on the
/// cubic Hermite interpolant through `(t0, y0, f0)` and `(t1, y1, f1)`.
fn locate_event(
    g: EventFn<'_>,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    t1: f64,
    y1: &[f64],
    f1: &[f64],
) -> (f64, Vec<f64>) {
    let n = y0.len();
    let h = t1 - t0;
    let interp = |theta: f64, out: &mut [f64]| {
        // Cubic Hermite basis on [0, 1].
        let h00 = (1.0 + 2.0 * theta) * (1.0 - theta) * (1.0 - theta);
        let h10 = theta * (1.0 - theta) * (1.0 - theta);
        let h01 = theta * theta * (3.0 - 2.0 * theta);
        let h11 = theta * theta * (theta - 1.0);
        for i in 0..n {
            out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
        }
    };
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut buf = vec![0.0; n];
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        interp(mid, &mut buf);
        if g(t0 + mid * h, &buf) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    interp(hi, &mut buf);
    (t0 + hi * h, buf)
}

// ---------------------------------------------------------------------------
// Dormand–Prince 5(4)
// ---------------------------------------------------------------------------

/// Explicit adaptive Dormand–Prince 5(4) stepper.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 1e-4,
            h_max: f64::INFINITY,
            max_steps: 50_000_000,
        }
    }
}

#[rustfmt::skip]
mod dp {
    pub const A21: f64 = 1.0 / 5.0;
    pub const A31: f64 = 3.0 / 40.0;       pub const A32: f64 = 9.0 / 40.0;
    pub const A41: f64 = 44.0 / 45.0;      pub const A42: f64 = -56.0 / 15.0;
    pub const A43: f64 = 32.0 / 9.0;
    pub const A51: f64 = 19372.0 / 6561.0; pub const A52: f64 = -25360.0 / 2187.0;
    pub const A53: f64 = 64448.0 / 6561.0; pub const A54: f64 = -212.0 / 729.0;
    pub const A61: f64 = 9017.0 / 3168.0;  pub const A62: f64 = -355.0 / 33.0;
    pub const A63: f64 = 46732.0 / 5247.0; pub const A64: f64 = 49.0 / 176.0;
    pub const A65: f64 = -5103.0 / 18656.0;
    pub const B1: f64 = 35.0 / 384.0;      pub const B3: f64 = 500.0 / 1113.0;
    pub const B4: f64 = 125.0 / 192.0;     pub const B5: f64 = -2187.0 / 6784.0;
    pub const B6: f64 = 11.0 / 84.0;
    // b - b_hat (5th minus embedded 4th order weights).
    pub const E1: f64 = 71.0 / 57600.0;    pub const E3: f64 = -71.0 / 16695.0;
    pub const E4: f64 = 71.0 / 1920.0;     pub const E5: f64 = -17253.0 / 339200.0;
    pub const E6: f64 = 22.0 / 525.0;      pub const E7: f64 = -1.0 / 40.0;
    pub const C2: f64 = 1.0 / 5.0;         pub const C3: f64 = 3.0 / 10.0;
    pub const C4: f64 = 4.0 / 5.0;         pub const C5: f64 = 8.0 / 9.0;
}

impl Dopri5 {
    pub fn with_tol(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    /// Integrate from `(t0, y0)` to `t_end`, stopping early at the first
    /// upward zero crossing of `event` if one is supplied.
    pub fn integrate<F>(
        &self,
        mut rhs: F,
        t0: f64,
        y0: &[f64],
        t_end: f64,
        event: Option<EventFn<'_>>,
    ) -> Result<Integration, OdeError>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y0.len();
        let mut t = t0;
        let mut y = y0.to_vec();
        let mut h = self.h_init.min(t_end - t0).min(self.h_max);
        let mut k1 = vec![0.0; n];
        rhs(t, &y, &mut k1);
        let mut k = vec![vec![0.0; n]; 6];
        let mut ytmp = vec![0.0; n];
        let mut ynew = vec![0.0; n];
        let mut k_new = vec![0.0; n];
        let mut steps = 0usize;
        let mut g_prev = event.map(|g| g(t, &y));

        while t < t_end {
            if steps >= self.max_steps {
                return Err(OdeError::TooManySteps { steps, t });
            }
            if h < 32.0 * f64::EPSILON * t.abs().max(1.0) {
                return Err(OdeError::StepUnderflow { t, h });
            }
            h = h.min(t_end - t);

            use dp::*;
            for i in 0..n {
                ytmp[i] = y[i] + h * A21 * k1[i];
            }
            rhs(t + C2 * h, &ytmp, &mut k[1]);
            for i in 0..n {
                ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k[1][i]);
            }
            rhs(t + C3 * h, &ytmp, &mut k[2]);
            for i in 0..n {
                ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k[1][i] + A43 * k[2][i]);
            }
            rhs(t + C4 * h, &ytmp, &mut k[3]);
            for i in 0..n {
                ytmp[i] =
                    y[i] + h * (A51 * k1[i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
            }
            rhs(t + C5 * h, &ytmp, &mut k[4]);
            for i in 0..n {
                ytmp[i] = y[i]
                    + h * (A61 * k1[i]
                        + A62 * k[1][i]
                        + A63 * k[2][i]
                        + A64 * k[3][i]
                        + A65 * k[4][i]);
            }
            rhs(t + h, &ytmp, &mut k[5]);
            for i in 0..n {
                ynew[i] = y[i]
                    + h * (B1 * k1[i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
            }
            rhs(t + h, &ynew, &mut k_new);

            // Embedded error estimate.
            let mut err = 0.0f64;
            for i in 0..n {
                let e = h
                    * (E1 * k1[i]
                        + E3 * k[2][i]
                        + E4 * k[3][i]
                        + E5 * k[4][i]
                        + E6 * k[5][i]
                        + E7 * k_new[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(ynew[i].abs());
                err += (e / sc) * (e / sc);
            }
            let err = (err / n as f64).sqrt();

            if err <= 1.0 {
                // Accept.
                let t_new = t + h;
                if !ynew.iter().all(|v| v.is_finite()) {
                    return Err(OdeError::NonFinite { t: t_new });
                }
                if let (Some(g), Some(gp)) = (event, g_prev) {
                    let g_new = g(t_new, &ynew);
                    if gp < 0.0 && g_new >= 0.0 {
                        let (te, ye) = locate_event(g, t, &y, &k1, t_new, &ynew, &k_new);
                        return Ok(Integration { t: te, y: ye, event_fired: true, steps });
                    }
                    g_prev = Some(g_new);
                }
                t = t_new;
                std::mem::swap(&mut y, &mut ynew);
                std::mem::swap(&mut k1, &mut k_new); // FSAL
                steps += 1;
            }
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
            h = (h * fac).min(self.h_max);
        }
        Ok(Integration { t, y, event_fired: false, steps })
    }
}

// ---------------------------------------------------------------------------
// TR-BDF2
// ---------------------------------------------------------------------------

/// L-stable one-step TR-BDF2 stepper (trapezoid to `t + gamma h`, BDF2 to
/// `t + h`, `gamma = 2 - sqrt(2)`), with analytic-Jacobian Newton solves and
/// a third-order embedded error estimate.
#[derive(Debug, Clone)]
pub struct TrBdf2 {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for TrBdf2 {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            h_init: 1e-4,
            h_max: f64::INFINITY,
            max_steps: 20_000_000,
        }
    }
}

/// Solve the dense system `A x = b` in place by partial-pivot Gaussian
/// elimination. Sized for the tiny systems used here.
fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        if a[piv * n + col] == 0.0 {
            return false;
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in (col + 1)..n {
            let m = a[r * n + col] / d;
            if m != 0.0 {
                for c in col..n {
                    a[r * n + c] -= m * a[col * n + c];
                }
                b[r] -= m * b[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for c in (col + 1)..n {
            s -= a[col * n + c] * b[c];
        }
        b[col] = s / a[col * n + col];
    }
    true
}

const TRBDF2_GAMMA: f64 = 2.0 - std::f64::consts::SQRT_2;

impl TrBdf2 {
    pub fn with_tol(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    /// Newton solve of `y - d_h * f(t, y) = rhs_const`, starting from `y`.
    #[allow(clippy::too_many_arguments)]
    fn newton<F, J>(
        rhs: &mut F,
        jac: &mut J,
        t: f64,
        d_h: f64,
        rhs_const: &[f64],
        y: &mut [f64],
        scale_ref: &[f64],
        rtol: f64,
        atol: f64,
    ) -> bool
    where
        F: FnMut(f64, &[f64], &mut [f64]),
        J: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y.len();
        let mut f = vec![0.0; n];
        let mut jmat = vec![0.0; n * n];
        let mut a = vec![0.0; n * n];
        let mut delta = vec![0.0; n];
        for _ in 0..20 {
            rhs(t, y, &mut f);
            for i in 0..n {
                delta[i] = rhs_const[i] + d_h * f[i] - y[i];
                if !delta[i].is_finite() {
                    return false;
                }
            }
            jac(t, y, &mut jmat);
            for r in 0..n {
                for c in 0..n {
                    a[r * n + c] = -d_h * jmat[r * n + c] + if r == c { 1.0 } else { 0.0 };
                }
            }
            if !solve_dense(&mut a, &mut delta, n) {
                return false;
            }
            let mut worst = 0.0f64;
            for i in 0..n {
                y[i] += delta[i];
                let sc = atol + rtol * scale_ref[i].abs().max(y[i].abs());
                worst = worst.max((delta[i] / sc).abs());
            }
            if !worst.is_finite() {
                return false;
            }
            if worst < 1e-3 {
                return true;
            }
        }
        false
    }

    /// Integrate with analytic Jacobian `jac` filling a row-major `n x n`
    /// matrix. Stops at the first upward zero crossing of `event`.
    pub fn integrate<F, J>(
        &self,
        mut rhs: F,
        mut jac: J,
        t0: f64,
        y0: &[f64],
        t_end: f64,
        event: Option<EventFn<'_>>,
    ) -> Result<Integration, OdeError>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
        J: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y0.len();
        let g = TRBDF2_GAMMA;
        let rho = (1.0 - g) / g;
        let a_coef = (1.0 + rho) * (1.0 + rho) / (1.0 + 2.0 * rho);
        let b_coef = rho * rho / (1.0 + 2.0 * rho);
        let d = g / 2.0;
        // Third-order quadrature weights on nodes {0, gamma, 1}.
        let w1 = 1.0 / (6.0 * g * (1.0 - g));
        let w2 = 0.5 - w1 * g;
        let w0 = 1.0 - w1 - w2;

        let mut t = t0;
        let mut y = y0.to_vec();
        let mut h = self.h_init.min(t_end - t0).min(self.h_max);
        let mut f_n = vec![0.0; n];
        rhs(t, &y, &mut f_n);
        let mut steps = 0usize;
        let mut g_prev = event.map(|gf| gf(t, &y));

        let mut rhs_const = vec![0.0; n];
        let mut ya = vec![0.0; n];
        let mut y1 = vec![0.0; n];
        let mut fa = vec![0.0; n];
        let mut f1 = vec![0.0; n];
        let mut est = vec![0.0; n];
        let mut jmat = vec![0.0; n * n];
        let mut amat = vec![0.0; n * n];

        while t < t_end {
            if steps >= self.max_steps {
                return Err(OdeError::TooManySteps { steps, t });
            }
            if h < 32.0 * f64::EPSILON * t.abs().max(1.0) {
                return Err(OdeError::StepUnderflow { t, h });
            }
            h = h.min(t_end - t);

            // Trapezoid stage to t + gamma h.
            for i in 0..n {
                rhs_const[i] = y[i] + d * h * f_n[i];
                ya[i] = y[i] + g * h * f_n[i]; // explicit predictor
            }
            let ok_a = Self::newton(
                &mut rhs,
                &mut jac,
                t + g * h,
                d * h,
                &rhs_const,
                &mut ya,
                &y,
                self.rtol,
                self.atol,
            );
            let mut ok_b = false;
            if ok_a {
                rhs(t + g * h, &ya, &mut fa);
                // BDF2 stage to t + h.
                for i in 0..n {
                    rhs_const[i] = a_coef * ya[i] - b_coef * y[i];
                    y1[i] = ya[i] + (1.0 - g) * h * fa[i]; // predictor
                }
                ok_b = Self::newton(
                    &mut rhs,
                    &mut jac,
                    t + h,
                    d * h,
                    &rhs_const,
                    &mut y1,
                    &y,
                    self.rtol,
                    self.atol,
                );
            }
            if !(ok_a && ok_b) {
                h *= 0.25;
                continue;
            }
            rhs(t + h, &y1, &mut f1);

            // Embedded third-order comparison, filtered through
            // (I - d h J)^-1 so stiff components do not dominate it.
            for i in 0..n {
                let y3 = y[i] + h * (w0 * f_n[i] + w1 * fa[i] + w2 * f1[i]);
                est[i] = y3 - y1[i];
            }
            jac(t + h, &y1, &mut jmat);
            for r in 0..n {
                for c in 0..n {
                    amat[r * n + c] = -d * h * jmat[r * n + c] + if r == c { 1.0 } else { 0.0 };
                }
            }
            if !solve_dense(&mut amat, &mut est, n) {
                h *= 0.25;
                continue;
            }
            let mut err = 0.0f64;
            for i in 0..n {
                let sc = self.atol + self.rtol * y[i].abs().max(y1[i].abs());
                err += (est[i] / sc) * (est[i] / sc);
            }
            let err = (err / n as f64).sqrt();

            if err <= 1.0 {
                let t_new = t + h;
                if !y1.iter().all(|v| v.is_finite()) {
                    return Err(OdeError::NonFinite { t: t_new });
                }
                if let (Some(gf), Some(gp)) = (event, g_prev) {
                    let g_new = gf(t_new, &y1);
                    if gp < 0.0 && g_new >= 0.0 {
                        let (te, ye) = locate_event(gf, t, &y, &f_n, t_new, &y1, &f1);
                        return Ok(Integration { t: te, y: ye, event_fired: true, steps });
                    }
                    g_prev = Some(g_new);
                }
                t = t_new;
                std::mem::swap(&mut y, &mut y1);
                std::mem::swap(&mut f_n, &mut f1);
                steps += 1;
            }
            let fac = (0.9 * err.powf(-1.0 / 3.0)).clamp(0.2, 4.0);
            h = (h * fac).min(self.h_max);
        }
        Ok(Integration { t, y, event_fired: false, steps })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dopri5_matches_exponential_decay() {
        let solver = Dopri5::with_tol(1e-12, 1e-14);
        let out = solver
            .integrate(|_, y, dy| dy[0] = -2.0 * y[0], 0.0, &[1.0], 3.0, None)
            .unwrap();
        assert!((out.y[0] - (-6.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn dopri5_matches_harmonic_oscillator() {
        let solver = Dopri5::with_tol(1e-12, 1e-14);
        let out = solver
            .integrate(
                |_, y, dy| {
                    dy[0] = y[1];
                    dy[1] = -4.0 * y[0];
                },
                0.0,
                &[1.0, 0.0],
                10.0,
                None,
            )
            .unwrap();
        assert!((out.y[0] - (20.0f64).cos()).abs() < 1e-10);
        assert!((out.y[1] + 2.0 * (20.0f64).sin()).abs() < 1e-10);
    }

    #[test]
    fn dopri5_event_detection_hits_crossing() {
        // y' = y, crossing y = e at t = 1.
        let solver = Dopri5::with_tol(1e-12, 1e-14);
        let ev = |_t: f64, y: &[f64]| y[0] - std::f64::consts::E;
        let out = solver
            .integrate(|_, y, dy| dy[0] = y[0], 0.0, &[1.0], 5.0, Some(&ev))
            .unwrap();
        assert!(out.event_fired);
        assert!((out.t - 1.0).abs() < 1e-9, "event at {}", out.t);
    }

    #[test]
    fn trbdf2_matches_exponential_decay() {
        let solver = TrBdf2::with_tol(1e-10, 1e-13);
        let out = solver
            .integrate(
                |_, y, dy| dy[0] = -2.0 * y[0],
                |_, _, j| j[0] = -2.0,
                0.0,
                &[1.0],
                3.0,
                None,
            )
            .unwrap();
        assert!((out.y[0] - (-6.0f64).exp()).abs() < 1e-9, "got {}", out.y[0]);
    }

    #[test]
    fn trbdf2_handles_stiff_relaxation() {
        // y' = -1e6 (y - cos t) - sin t, exact solution y = cos t after the
        // initial layer; start on the slow manifold.
        let solver = TrBdf2::with_tol(1e-8, 1e-10);
        let out = solver
            .integrate(
                |t, y, dy| dy[0] = -1e6 * (y[0] - t.cos()) - t.sin(),
                |_, _, j| j[0] = -1e6,
                0.0,
                &[1.0],
                2.0,
                None,
            )
            .unwrap();
        assert!((out.y[0] - (2.0f64).cos()).abs() < 1e-6, "got {}", out.y[0]);
        assert!(out.steps < 20_000, "took {} steps", out.steps);
    }

    #[test]
    fn trbdf2_is_efficient_on_long_damped_spans() {
        // V'' + V' = V^3 with tiny data takes ~1e7 time units to blow up;
        // the damping eigenvalue would cap an explicit stepper at h ~ 3.
        let p = 3.0;
        let solver = TrBdf2 { h_init: 1e-2, ..TrBdf2::with_tol(1e-8, 1e-12) };
        // Threshold low enough that the pre-crossing steps stay resolvable
        // in f64 at t ~ 1e7; the remaining gap to the asymptote is ~1e-4.
        let ev = |_t: f64, y: &[f64]| y[0] - 1e4;
        let out = solver
            .integrate(
                |_, y, dy| {
                    dy[0] = y[1];
                    dy[1] = y[0].abs().powf(p) - y[1];
                },
                |_, y, j| {
                    j[0] = 0.0;
                    j[1] = 1.0;
                    j[2] = p * y[0].abs().powf(p - 1.0) * y[0].signum();
                    j[3] = -1.0;
                },
                0.0,
                &[1e-4, 1e-4],
                1e9,
                Some(&ev),
            )
            .unwrap();
        assert!(out.event_fired);
        // Blow-up time scale is 1/((p-1) (2 eps)^(p-1)) = 1.25e7.
        assert!(out.t > 1e6 && out.t < 1e8, "lifespan {}", out.t);
        assert!(out.steps < 100_000, "took {} steps", out.steps);
    }
}
