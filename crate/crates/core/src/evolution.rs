//! Mild-solution machinery for the semilinear problem.
//!
//! The linear flow is applied exactly per mode; the nonlinearity `|u|^p` is
//! evaluated pseudospectrally (synthesis, pointwise power, analysis with
//! truncation back to the band) and fed through the Duhamel kernel, whose
//! time integral over one step is available in closed form. Two exponential
//! steppers are provided: `DuhamelEuler` freezes the nonlinear coefficients
//! at the left endpoint (order 1), `DuhamelMidpoint` evaluates them at a
//! predicted midpoint state (order 2). Both are unconditionally stable for
//! the linear part, so discretization error is attributable solely to the
//! nonlinear quadrature.
//!
//! `picard_solve` mirrors the fixed-point operator of the mild-solution
//! construction directly: starting from the linear flow, it applies the
//! Duhamel integral operator by composite trapezoid quadrature over the
//! whole window and reports the per-iteration contraction ratios.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harmonics::{
    analyze, apply_fractional_laplacian, build_grid, enumerate_dual, lq_norm, plancherel_norm,
    synthesize, DualBasis, GridField, GroupSpec, HarmonicsError, QuadratureGrid, SpectralField,
};
use crate::propagator::{
    decay_envelope, kernel_integral, linear_evolve, mode_kernel, EvolutionState, NormKind,
    PropagatorError, WaveParams,
};

/// Hard ceiling on `|u|_inf`; one step beyond it aborts a nonlinear run.
pub const OVERFLOW_GUARD: f64 = 1e8;

/// Imaginary residue above which a nonlinearity evaluation warns.
pub const IMAG_RESIDUE_WARN: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error(transparent)]
    Harmonics(#[from] HarmonicsError),
    #[error(transparent)]
    Propagator(#[from] PropagatorError),
    #[error("|u|_inf = {linf:.3e} exceeded the overflow guard at t = {t}")]
    Overflow { t: f64, linf: f64 },
    #[error("NaN in nonlinearity input")]
    NanInput,
    #[error("Picard iteration did not converge within {max_iter} iterations")]
    PicardNonConvergence { max_iter: usize, report: IteratesReport },
}

/// Time stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    DuhamelEuler,
    DuhamelMidpoint,
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "euler" | "duhameleuler" => Ok(Scheme::DuhamelEuler),
            "midpoint" | "duhamelmidpoint" => Ok(Scheme::DuhamelMidpoint),
            other => Err(format!("unknown scheme '{other}'")),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::DuhamelEuler => write!(f, "euler"),
            Scheme::DuhamelMidpoint => write!(f, "midpoint"),
        }
    }
}

/// Time discretization configuration. `dealias` selects the oversampled
/// grid for nonlinear products; `nonlinear` switches the `|u|^p` term off
/// entirely (linear consistency runs); `enforce_real` re-projects the
/// coefficients of real data after every nonlinear evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub dealias: bool,
    pub nonlinear: bool,
    pub enforce_real: bool,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, dt: f64) -> Self {
        assert!(dt > 0.0, "dt must be positive");
        Self { scheme, dt, dealias: true, nonlinear: true, enforce_real: true }
    }
}

/// Pointwise `|u(x)|^p` of a real-valued field. The imaginary part is
/// discarded; a residue above [`IMAG_RESIDUE_WARN`] logs a warning.
pub fn nonlinearity(field: &GridField, p: f64) -> Result<GridField, EvolutionError> {
    assert!(p > 1.0);
    let residue = field.max_imag();
    if residue > IMAG_RESIDUE_WARN {
        log::warn!("nonlinearity input has imaginary residue {residue:.3e}; discarding");
    }
    let mut out = Vec::with_capacity(field.len());
    for v in field.values.iter() {
        if v.re.is_nan() || v.im.is_nan() {
            return Err(EvolutionError::NanInput);
        }
        out.push(Complex64::new(v.re.abs().powf(p), 0.0));
    }
    Ok(GridField { values: out.into() })
}

/// How a simulation run ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    Completed,
    /// The overflow guard tripped; `t_last` is the last valid state time.
    BlowupOverflow { t_last: f64 },
}

/// Time series of the solution norms. `envelope` is the solution-space
/// weight `A_{b, m^2}(t)` in the mass case and `1` otherwise; `ratio` is
/// the weighted norm sum and `x_running` its running supremum.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NormTrace {
    pub times: Vec<f64>,
    pub l2: Vec<f64>,
    pub seminorm: Vec<f64>,
    pub dt_l2: Vec<f64>,
    pub envelope: Vec<f64>,
    pub ratio: Vec<f64>,
    pub x_running: Vec<f64>,
}

impl NormTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, l2: f64, semi: f64, dt_l2: f64, envelope: f64) {
        if let Some(&last) = self.times.last() {
            assert!(t > last, "trace times must increase");
        }
        let ratio = (l2 + semi + dt_l2) / envelope;
        let running = self.x_running.last().copied().unwrap_or(0.0).max(ratio);
        self.times.push(t);
        self.l2.push(l2);
        self.seminorm.push(semi);
        self.dt_l2.push(dt_l2);
        self.envelope.push(envelope);
        self.ratio.push(ratio);
        self.x_running.push(running);
    }
}

/// Solution-space norm of a recorded trace: the supremum in time of
/// `l2 + seminorm + dt_l2`, each weighted by `A_{b, m^2}(t)^-1` in the
/// weighted (mass) variant.
pub fn x_norm(trace: &NormTrace, params: &WaveParams, weighted: bool) -> f64 {
    assert!(!trace.is_empty(), "x_norm of an empty trace");
    let mut sup: f64 = 0.0;
    for i in 0..trace.len() {
        let sum = trace.l2[i] + trace.seminorm[i] + trace.dt_l2[i];
        let w = if weighted {
            decay_envelope(trace.times[i], params, NormKind::L2).recip()
        } else {
            1.0
        };
        sup = sup.max(sum * w);
    }
    sup
}

/// Energy functional `1/2 |du/dt|^2 + 1/2 |(-L)^(alpha/2) u|^2
/// + m^2/2 |u|^2`, evaluated by Plancherel sums.
pub fn energy(state: &EvolutionState, params: &WaveParams) -> f64 {
    let kinetic = plancherel_norm(&state.v_hat);
    let semi = plancherel_norm(&apply_fractional_laplacian(&state.u_hat, params.alpha));
    let mass = plancherel_norm(&state.u_hat);
    0.5 * kinetic * kinetic + 0.5 * semi * semi + 0.5 * params.m2 * mass * mass
}

/// Per-iteration report of the Picard fixed-point loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IteratesReport {
    pub iterations: usize,
    /// X-norm distances between consecutive iterates.
    pub distances: Vec<f64>,
    /// `distances[k] / distances[k-1]`.
    pub contraction_ratios: Vec<f64>,
    pub converged: bool,
}

/// Output of [`Simulator::picard_solve`].
#[derive(Debug, Clone)]
pub struct PicardSolution {
    pub trace: NormTrace,
    pub report: IteratesReport,
    pub final_state: EvolutionState,
}

/// Pseudospectral integrator for one `(group, params, scheme)` choice.
///
/// Holds the dual enumeration, the nonlinear evaluation grid and the
/// per-representation multiplier tables. Stepping is sequential in time;
/// everything else is pure, so a `Simulator` is freely shareable.
pub struct Simulator {
    group: GroupSpec,
    params: WaveParams,
    cfg: SchemeConfig,
    dual: Arc<DualBasis>,
    grid: QuadratureGrid,
    /// `nu_i = mu_i + m^2` per representation.
    nu: Vec<f64>,
    /// Seminorm multiplier `lambda^(2 alpha)` per representation.
    lam2alpha: Vec<f64>,
}

impl Simulator {
    pub fn new(group: GroupSpec, params: WaveParams, cfg: SchemeConfig) -> Self {
        let dual = enumerate_dual(&group);
        let grid_spec = if cfg.dealias {
            group.clone()
        } else {
            GroupSpec { oversample: 1.0, ..group.clone() }
        };
        let grid = build_grid(&grid_spec);
        let nu: Vec<f64> = dual.reps().iter().map(|r| params.mu(r.casimir) + params.m2).collect();
        let lam2alpha: Vec<f64> = dual
            .reps()
            .iter()
            .map(|r| if r.casimir == 0.0 { 0.0 } else { r.casimir.powf(params.alpha) })
            .collect();
        Self { group, params, cfg, dual, grid, nu, lam2alpha }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn params(&self) -> &WaveParams {
        &self.params
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn dual(&self) -> &Arc<DualBasis> {
        &self.dual
    }

    /// The grid nonlinear products are evaluated on.
    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    /// Build the initial state from sampled data.
    pub fn state_from_data(
        &self,
        u0: &GridField,
        u1: &GridField,
    ) -> Result<EvolutionState, EvolutionError> {
        let mut u_hat = analyze(u0, &self.grid, &self.dual)?;
        let mut v_hat = analyze(u1, &self.grid, &self.dual)?;
        if self.cfg.enforce_real {
            u_hat.enforce_reality();
            v_hat.enforce_reality();
        }
        Ok(EvolutionState::new(u_hat, v_hat, 0.0)?)
    }

    /// Spectral coefficients of `|u|^p`, dealiased by truncation to the
    /// band. Errors if the field has overflowed the guard.
    fn nonlinear_coeffs(
        &self,
        u_hat: &SpectralField,
        t: f64,
    ) -> Result<SpectralField, EvolutionError> {
        let g = synthesize(u_hat, &self.grid)?;
        let linf = g.linf_norm();
        if !linf.is_finite() {
            return Err(EvolutionError::NanInput);
        }
        if linf > OVERFLOW_GUARD {
            return Err(EvolutionError::Overflow { t, linf });
        }
        let powered = nonlinearity(&g, self.params.p)?;
        let mut f_hat = analyze(&powered, &self.grid, &self.dual)?;
        if self.cfg.enforce_real {
            f_hat.enforce_reality();
        }
        Ok(f_hat)
    }

    /// Add the Duhamel increment of a frozen forcing coefficient: the
    /// position part receives `F * I1(dt)` and the velocity part
    /// `F * K1(dt)` blockwise.
    fn add_forcing(&self, state: &mut EvolutionState, f_hat: &SpectralField, dt: f64) {
        for i in 0..self.dual.len() {
            let w_u = kernel_integral(dt, self.params.b, self.nu[i]);
            let w_v = mode_kernel(dt, self.params.b, self.nu[i]).0;
            let rep = &self.dual.reps()[i];
            let off = self.dual.block_offset(i);
            for j in off..off + rep.dim * rep.dim {
                let f = f_hat.coeffs()[j];
                state.u_hat.coeffs_mut()[j] += f * w_u;
                state.v_hat.coeffs_mut()[j] += f * w_v;
            }
        }
    }

    /// One Duhamel step of size `cfg.dt`.
    pub fn duhamel_step(&self, state: &EvolutionState) -> Result<EvolutionState, EvolutionError> {
        self.duhamel_step_sized(state, self.cfg.dt)
    }

    pub(crate) fn duhamel_step_sized(
        &self,
        state: &EvolutionState,
        dt: f64,
    ) -> Result<EvolutionState, EvolutionError> {
        let t1 = state.time + dt;
        if !self.cfg.nonlinear {
            return Ok(linear_evolve(state, t1, &self.params)?);
        }
        match self.cfg.scheme {
            Scheme::DuhamelEuler => {
                let f0 = self.nonlinear_coeffs(&state.u_hat, state.time)?;
                let mut next = linear_evolve(state, t1, &self.params)?;
                self.add_forcing(&mut next, &f0, dt);
                Ok(next)
            }
            Scheme::DuhamelMidpoint => {
                let f0 = self.nonlinear_coeffs(&state.u_hat, state.time)?;
                let mut half = linear_evolve(state, state.time + 0.5 * dt, &self.params)?;
                self.add_forcing(&mut half, &f0, 0.5 * dt);
                let fm = self.nonlinear_coeffs(&half.u_hat, half.time)?;
                let mut next = linear_evolve(state, t1, &self.params)?;
                self.add_forcing(&mut next, &fm, dt);
                Ok(next)
            }
        }
    }

    pub(crate) fn record(&self, trace: &mut NormTrace, state: &EvolutionState) {
        let l2 = plancherel_norm(&state.u_hat);
        let dt_l2 = plancherel_norm(&state.v_hat);
        let mut semi2 = 0.0;
        for i in 0..self.dual.len() {
            let rep = &self.dual.reps()[i];
            let off = self.dual.block_offset(i);
            let hs: f64 = state.u_hat.coeffs()[off..off + rep.dim * rep.dim]
                .iter()
                .map(|v| v.norm_sqr())
                .sum();
            semi2 += rep.dim as f64 * self.lam2alpha[i] * hs;
        }
        let envelope = if self.params.m2 > 0.0 {
            decay_envelope(state.time, &self.params, NormKind::L2)
        } else {
            1.0
        };
        trace.push(state.time, l2, semi2.sqrt(), dt_l2, envelope);
    }

    /// Step to `t_end`, recording norms after every step. A blow-up
    /// overflow aborts cleanly, keeping the trace up to the last valid
    /// state.
    pub fn simulate(
        &self,
        u0: &GridField,
        u1: &GridField,
        t_end: f64,
    ) -> Result<(NormTrace, EvolutionState, Outcome), EvolutionError> {
        assert!(t_end > 0.0);
        let state = self.state_from_data(u0, u1)?;
        self.simulate_state(state, t_end)
    }

    pub fn simulate_state(
        &self,
        mut state: EvolutionState,
        t_end: f64,
    ) -> Result<(NormTrace, EvolutionState, Outcome), EvolutionError> {
        let mut trace = NormTrace::default();
        self.record(&mut trace, &state);
        let steps = ((t_end - state.time) / self.cfg.dt).round().max(1.0) as usize;
        let t0 = state.time;
        for k in 1..=steps {
            let target = if k == steps { t_end } else { t0 + k as f64 * self.cfg.dt };
            let dt = target - state.time;
            if dt <= 0.0 {
                continue;
            }
            match self.duhamel_step_sized(&state, dt) {
                Ok(next) => {
                    state = next;
                    self.record(&mut trace, &state);
                }
                Err(EvolutionError::Overflow { .. }) => {
                    return Ok((
                        trace,
                        state.clone(),
                        Outcome::BlowupOverflow { t_last: state.time },
                    ));
                }
                Err(e) => return Err(e),
            }
        }
        Ok((trace, state, Outcome::Completed))
    }

    /// Picard iteration for the mild-solution fixed point on `[0, T]`.
    ///
    /// Iterate trajectories are held at the quadrature nodes
    /// `t_i = i T / n`, `n = ceil(T / dt)`; the Duhamel integral is a
    /// composite trapezoid sum against the exact per-mode kernel. Stops
    /// when the X-distance between consecutive iterates drops below `tol`.
    pub fn picard_solve(
        &self,
        u0: &GridField,
        u1: &GridField,
        t_window: f64,
        tol: f64,
        max_iter: usize,
    ) -> Result<PicardSolution, EvolutionError> {
        assert!(t_window > 0.0 && tol > 0.0);
        let n = (t_window / self.cfg.dt).ceil().max(1.0) as usize;
        let h = t_window / n as f64;
        let times: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();

        let base = self.state_from_data(u0, u1)?;
        let mut linear: Vec<EvolutionState> = Vec::with_capacity(n + 1);
        for &t in &times {
            linear.push(linear_evolve(&base, t, &self.params)?);
        }

        // Kernel tables K1, K1' per representation and node separation.
        let reps = self.dual.len();
        let mut k1 = vec![0.0; reps * (n + 1)];
        let mut k1p = vec![0.0; reps * (n + 1)];
        for i in 0..reps {
            for j in 0..=n {
                let (a, b) = mode_kernel(j as f64 * h, self.params.b, self.nu[i]);
                k1[i * (n + 1) + j] = a;
                k1p[i * (n + 1) + j] = b;
            }
        }

        let weighted = self.params.m2 > 0.0;
        let inv_weight: Vec<f64> = times
            .iter()
            .map(|&t| {
                if weighted {
                    decay_envelope(t, &self.params, NormKind::L2).recip()
                } else {
                    1.0
                }
            })
            .collect();

        let x_dist = |a: &[EvolutionState], b: &[EvolutionState]| -> f64 {
            let mut sup: f64 = 0.0;
            for (i, (sa, sb)) in a.iter().zip(b).enumerate() {
                let mut du = sa.u_hat.clone();
                for (x, y) in du.coeffs_mut().iter_mut().zip(sb.u_hat.coeffs()) {
                    *x -= y;
                }
                let mut dv = sa.v_hat.clone();
                for (x, y) in dv.coeffs_mut().iter_mut().zip(sb.v_hat.coeffs()) {
                    *x -= y;
                }
                let sum = plancherel_norm(&du)
                    + plancherel_norm(&apply_fractional_laplacian(&du, self.params.alpha))
                    + plancherel_norm(&dv);
                sup = sup.max(sum * inv_weight[i]);
            }
            sup
        };

        let mut traj = linear.clone();
        let mut distances = Vec::new();
        let mut ratios = Vec::new();
        let mut converged = false;

        for _iter in 0..max_iter {
            let mut forces: Vec<SpectralField> = Vec::with_capacity(n + 1);
            for state in &traj {
                forces.push(self.nonlinear_coeffs(&state.u_hat, state.time)?);
            }
            let mut next = linear.clone();
            for (i, target) in next.iter_mut().enumerate().skip(1) {
                for (j, force) in forces.iter().enumerate().take(i + 1) {
                    let w = if j == 0 || j == i { 0.5 * h } else { h };
                    let sep = i - j;
                    for r in 0..reps {
                        let ku = w * k1[r * (n + 1) + sep];
                        let kv = w * k1p[r * (n + 1) + sep];
                        let rep = &self.dual.reps()[r];
                        let off = self.dual.block_offset(r);
                        for idx in off..off + rep.dim * rep.dim {
                            let f = force.coeffs()[idx];
                            target.u_hat.coeffs_mut()[idx] += f * ku;
                            target.v_hat.coeffs_mut()[idx] += f * kv;
                        }
                    }
                }
            }
            let dist = x_dist(&next, &traj);
            if let Some(&prev) = distances.last() {
                ratios.push(if prev > 0.0 { dist / prev } else { 0.0 });
            }
            distances.push(dist);
            traj = next;
            if dist < tol {
                converged = true;
                break;
            }
        }

        let report = IteratesReport {
            iterations: distances.len(),
            distances,
            contraction_ratios: ratios,
            converged,
        };
        if !converged {
            return Err(EvolutionError::PicardNonConvergence { max_iter, report });
        }

        let mut trace = NormTrace::default();
        for state in &traj {
            self.record(&mut trace, state);
        }
        let final_state = traj.pop().expect("nonempty trajectory");
        Ok(PicardSolution { trace, report, final_state })
    }
}

/// `L^q` norm of the synthesized position field of a state.
pub fn state_lq_norm(
    state: &EvolutionState,
    q: f64,
    grid: &QuadratureGrid,
) -> Result<f64, EvolutionError> {
    let g = synthesize(&state.u_hat, grid)?;
    Ok(lq_norm(&g, q, grid))
}
