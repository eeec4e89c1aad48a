//! Exact per-mode propagators for the damped mode ODE
//!
//! ```text
//!     c'' + b c' + (mu + m^2) c = 0,      mu = lambda^(2 alpha),
//! ```
//!
//! whose characteristic roots are `-b/2 +- sqrt(disc)` with
//! `disc = b^2/4 - mu - m^2`. The solution is written with the two entire
//! functions `A0(t) = Psi(disc t^2)` and `A1(t) = t Phi(disc t^2)` where
//! `Psi(z) = sum z^k/(2k)!` and `Phi(z) = sum z^k/(2k+1)!`; these reduce to
//! `cosh`/`sinh`, `cos`/`sin` or `1`/`t` depending on the sign of the
//! discriminant, and a short power series takes over near `disc = 0` where
//! the closed forms cancel. `A1` is normalized by `A1(0) = 0, A1'(0) = 1`,
//! the unique choice solving the mode ODE.
//!
//! The undamped massless case `(b, m^2) = (1, 0)` is the sharp-decay
//! setting; positive `(b, m^2)` is the exponentially decaying mass case.
//! One code path covers both.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harmonics::{RepIndex, SpectralField};

#[derive(Debug, Error)]
pub enum PropagatorError {
    #[error("evolution state fields use different duals")]
    DualMismatch,
    #[error("target time {target} is before state time {current}")]
    TimeReversed { target: f64, current: f64 },
}

/// Equation parameters: fractional order, damping, squared mass and
/// nonlinearity exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub alpha: f64,
    pub b: f64,
    pub m2: f64,
    pub p: f64,
}

impl WaveParams {
    pub fn new(alpha: f64, b: f64, m2: f64, p: f64) -> Self {
        assert!(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
        assert!(b >= 0.0 && m2 >= 0.0, "damping and mass must be nonnegative");
        assert!(p > 1.0, "nonlinearity exponent must exceed 1");
        Self { alpha, b, m2, p }
    }

    /// The sharp-decay configuration of the damped problem.
    pub fn damped(alpha: f64, p: f64) -> Self {
        Self::new(alpha, 1.0, 0.0, p)
    }

    /// Spectral multiplier `mu = (lambda^2)^alpha` of `(-L)^alpha`.
    pub fn mu(&self, casimir: f64) -> f64 {
        if casimir == 0.0 {
            0.0
        } else {
            casimir.powf(self.alpha)
        }
    }
}

/// Per-mode quantities derived from the equation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCoefficients {
    pub mu: f64,
    pub disc: f64,
}

impl ModeCoefficients {
    pub fn new(params: &WaveParams, casimir: f64) -> Self {
        let mu = params.mu(casimir);
        Self { mu, disc: discriminant(mu, params.b, params.m2) }
    }
}

/// `disc = b^2/4 - mu - m^2`.
pub fn discriminant(mu: f64, b: f64, m2: f64) -> f64 {
    b * b / 4.0 - mu - m2
}

/// Threshold on `|disc t^2|` below which the power series is used.
const SERIES_THRESHOLD: f64 = 1e-6;

fn psi_phi_series(z: f64) -> (f64, f64) {
    // Six terms; truncation below 1e-16 relative for |z| < 1e-6.
    let mut psi = 0.0;
    let mut phi = 0.0;
    let mut term = 1.0f64; // z^k / (2k)!
    for k in 0..6 {
        psi += term;
        phi += term / (2.0 * k as f64 + 1.0);
        term *= z / ((2.0 * k as f64 + 1.0) * (2.0 * k as f64 + 2.0));
    }
    (psi, phi)
}

/// The pair `(A0, A1)(t)` for a given discriminant.
pub fn phi_pair(t: f64, disc: f64) -> (f64, f64) {
    let z = disc * t * t;
    if z.abs() < SERIES_THRESHOLD {
        let (psi, phi) = psi_phi_series(z);
        (psi, t * phi)
    } else if disc > 0.0 {
        let w = disc.sqrt();
        ((w * t).cosh(), (w * t).sinh() / w)
    } else {
        let w = (-disc).sqrt();
        ((w * t).cos(), (w * t).sin() / w)
    }
}

/// Damped propagator entries `(E0, E1) = e^(-bt/2) (A0, A1)`, evaluated in
/// combined form so the hyperbolic branch never overflows.
pub fn propagator_entries(t: f64, b: f64, nu: f64) -> (f64, f64) {
    let disc = b * b / 4.0 - nu;
    let z = disc * t * t;
    if z.abs() < SERIES_THRESHOLD {
        let (psi, phi) = psi_phi_series(z);
        let e = (-0.5 * b * t).exp();
        (e * psi, e * t * phi)
    } else if disc > 0.0 {
        let w = disc.sqrt();
        let ep = ((w - 0.5 * b) * t).exp();
        let em = ((-w - 0.5 * b) * t).exp();
        (0.5 * (ep + em), (ep - em) / (2.0 * w))
    } else {
        let w = (-disc).sqrt();
        let e = (-0.5 * b * t).exp();
        (e * (w * t).cos(), e * (w * t).sin() / w)
    }
}

/// Advance one Fourier coefficient pair by time `t` under the homogeneous
/// mode ODE. Returns `(c(t), c'(t))`; `t = 0` reproduces the data exactly.
pub fn evolve_mode(
    c0: Complex64,
    c1: Complex64,
    t: f64,
    mu: f64,
    b: f64,
    m2: f64,
) -> (Complex64, Complex64) {
    if t == 0.0 {
        return (c0, c1);
    }
    let nu = mu + m2;
    let (e0, e1) = propagator_entries(t, b, nu);
    let c = e0 * c0 + e1 * (c1 + 0.5 * b * c0);
    let cdot = e0 * c1 - e1 * (0.5 * b * c1 + nu * c0);
    (c, cdot)
}

/// Duhamel kernel values `(K1, K1')(dt)` for the forced mode ODE, where
/// `K1` solves the homogeneous equation with data `(0, 1)`.
pub fn mode_kernel(dt: f64, b: f64, nu: f64) -> (f64, f64) {
    let (e0, e1) = propagator_entries(dt, b, nu);
    (e1, e0 - 0.5 * b * e1)
}

/// `g(x) = (x - 1 + e^(-x)) / x^2`, the `nu = 0` kernel mass profile.
fn kernel_mass_profile(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        // g(x) = sum_j (-x)^j / (j+2)!
        let mut acc = 0.0;
        let mut term = 0.5; // 1/2!
        for j in 0..8 {
            acc += term;
            term *= -x / (j as f64 + 3.0);
        }
        acc
    } else {
        (x - 1.0 + (-x).exp()) / (x * x)
    }
}

/// Exact integral `I1(dt) = \int_0^dt K1(s) ds` of the Duhamel kernel.
/// This is the weight multiplying a frozen nonlinear coefficient in the
/// exponential time steppers.
pub fn kernel_integral(dt: f64, b: f64, nu: f64) -> f64 {
    if nu * dt * dt < 1e-8 {
        // nu = 0 limit: K1 = (1 - e^(-b s))/b, integral dt^2 g(b dt).
        dt * dt * kernel_mass_profile(b * dt)
    } else {
        // Integrate the mode ODE: K1'(dt) - 1 + b K1(dt) + nu I1 = 0.
        let (k1, k1p) = mode_kernel(dt, b, nu);
        (1.0 - k1p - b * k1) / nu
    }
}

/// Spectral region of a representation in the damped massless analysis:
/// `R1` holds the modes with `lambda^(2 alpha) < 1/16` (on the groups here,
/// only the trivial representation), `R2` the spectrally gapped rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    R1,
    R2,
}

pub fn classify_region(rep: &RepIndex, alpha: f64) -> Region {
    let mu = if rep.casimir == 0.0 { 0.0 } else { rep.casimir.powf(alpha) };
    if mu < 1.0 / 16.0 {
        Region::R1
    } else {
        Region::R2
    }
}

/// Which norm a decay envelope bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    L2,
    Seminorm,
    TimeDeriv,
}

/// Decay function `A_{b, m^2}(t)` of the mass case, split over the three
/// root configurations; with zero mass the polynomial envelopes of the
/// damped case are returned per norm kind (the `L2` entry is the stated
/// growth bound, not a decay).
pub fn decay_envelope(t: f64, params: &WaveParams, kind: NormKind) -> f64 {
    assert!(t >= 0.0);
    let (b, m2) = (params.b, params.m2);
    if m2 > 0.0 {
        let gap = b * b - 4.0 * m2;
        if gap < 0.0 {
            (-0.5 * b * t).exp()
        } else if gap == 0.0 {
            (t + 1.0) * (-0.5 * b * t).exp()
        } else {
            ((-0.5 * b + (0.25 * b * b - m2).sqrt()) * t).exp()
        }
    } else {
        match kind {
            NormKind::L2 => 1.0 + t,
            NormKind::Seminorm => (1.0 + t).powf(-0.5),
            NormKind::TimeDeriv => (1.0 + t).powi(-1),
        }
    }
}

/// Position/velocity pair of spectral fields at a point in time.
#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub u_hat: SpectralField,
    pub v_hat: SpectralField,
    pub time: f64,
}

impl EvolutionState {
    pub fn new(u_hat: SpectralField, v_hat: SpectralField, time: f64) -> Result<Self, PropagatorError> {
        if !u_hat.same_dual(&v_hat) {
            return Err(PropagatorError::DualMismatch);
        }
        Ok(Self { u_hat, v_hat, time })
    }
}

/// Advance the whole state to absolute time `t` by applying the exact mode
/// propagator blockwise.
pub fn linear_evolve(
    state: &EvolutionState,
    t: f64,
    params: &WaveParams,
) -> Result<EvolutionState, PropagatorError> {
    if t < state.time {
        return Err(PropagatorError::TimeReversed { target: t, current: state.time });
    }
    let dt = t - state.time;
    let mut u = state.u_hat.clone();
    let mut v = state.v_hat.clone();
    let dual = state.u_hat.dual().clone();
    for i in 0..dual.len() {
        let rep = &dual.reps()[i];
        let nu = params.mu(rep.casimir) + params.m2;
        let (e0, e1) = propagator_entries(dt, params.b, nu);
        let d2 = rep.dim * rep.dim;
        let off = dual.block_offset(i);
        for j in off..off + d2 {
            let c0 = state.u_hat.coeffs()[j];
            let c1 = state.v_hat.coeffs()[j];
            u.coeffs_mut()[j] = e0 * c0 + e1 * (c1 + 0.5 * params.b * c0);
            v.coeffs_mut()[j] = e0 * c1 - e1 * (0.5 * params.b * c1 + nu * c0);
        }
    }
    Ok(EvolutionState { u_hat: u, v_hat: v, time: t })
}
