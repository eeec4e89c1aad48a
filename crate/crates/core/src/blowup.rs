//! Finite-time blow-up laboratory.
//!
//! The zero-mode functional `U0(t) = \int_G u dx` (the trivial-block
//! coefficient under normalized Haar measure) satisfies the integrated
//! identity `U0'(t) - U0'(0) + U0(t) - U0(0) = \int_0^t \int |u|^p`, which
//! Jensen's inequality bounds below by the comparison system
//! `V'' + V' = |V|^p` with matching initial mean data. The comparison
//! lifespans obey the scaling law `T(eps) ~ C eps^(1-p)`; both an ODE route
//! and a full PDE route (overflow-driven) are available for lifespan scans.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::evolution::{EvolutionError, Simulator};
use crate::harmonics::{synthesize, GridField};
use crate::ode::{OdeError, TrBdf2};
use crate::propagator::EvolutionState;

/// Finite or right-open lifespan of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Lifespan {
    Finite(f64),
    /// No blow-up before the scan horizon.
    Infinite,
}

impl Lifespan {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Lifespan::Finite(t) => Some(*t),
            Lifespan::Infinite => None,
        }
    }
}

/// How a lifespan was measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanMethod {
    ComparisonOde,
    FullPde,
}

impl std::fmt::Display for ScanMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScanMethod::ComparisonOde => write!(f, "comparison-ode"),
            ScanMethod::FullPde => write!(f, "full-pde"),
        }
    }
}

/// One scan entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LifespanRecord {
    pub epsilon: f64,
    pub lifespan: Lifespan,
    pub method: ScanMethod,
    pub threshold: f64,
    /// Diagnostic flags, e.g. `dt-underflow` or `resolution-limit`.
    pub flags: Vec<String>,
}

/// Zero-mode functional and its derivative: the real parts of the
/// trivial-representation coefficients. Asserts that the imaginary
/// residues are numerically negligible.
pub fn zero_mode(state: &EvolutionState) -> (f64, f64) {
    let u = state.u_hat.trivial_coeff();
    let v = state.v_hat.trivial_coeff();
    assert!(
        u.im.abs() < 1e-8 && v.im.abs() < 1e-8,
        "zero mode has imaginary residue ({}, {})",
        u.im,
        v.im
    );
    (u.re, v.re)
}

fn comparison_solver() -> TrBdf2 {
    TrBdf2 { rtol: 1e-9, atol: 1e-12, h_init: 1e-3, ..TrBdf2::default() }
}

fn integrate_to_threshold(
    p: f64,
    t0: f64,
    y0: [f64; 2],
    threshold: f64,
    t_end: f64,
) -> Result<(f64, [f64; 2], bool, bool), OdeError> {
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = y[0].abs().powf(p) - y[1];
    };
    let jac = |_t: f64, y: &[f64], j: &mut [f64]| {
        j[0] = 0.0;
        j[1] = 1.0;
        j[2] = p * y[0].abs().powf(p - 1.0) * y[0].signum();
        j[3] = -1.0;
    };
    let event = move |_t: f64, y: &[f64]| y[0] - threshold;
    match comparison_solver().integrate(rhs, jac, t0, &y0, t_end, Some(&event)) {
        Ok(out) => Ok((out.t, [out.y[0], out.y[1]], out.event_fired, false)),
        // Near the asymptote the required step can drop below the f64
        // resolution of t itself; the remaining gap to the crossing is
        // below time resolution, so report the time reached and flag it.
        Err(OdeError::StepUnderflow { t, .. }) | Err(OdeError::NonFinite { t }) => {
            Ok((t, [threshold, 0.0], true, true))
        }
        Err(e) => Err(e),
    }
}

/// Blow-up time of the comparison system `V'' + V' = |V|^p` with data
/// `(v0, v1)`, defined as the first crossing of `threshold` and refined
/// over the threshold pair `(theta, 10 theta)` by extrapolating the
/// power-law approach to the vertical asymptote. Returns `Infinite` if no
/// crossing occurs before `t_max`. The boolean marks runs clipped by the
/// f64 time resolution.
pub fn comparison_lifespan(
    p: f64,
    v0: f64,
    v1: f64,
    threshold: f64,
    t_max: f64,
) -> (Lifespan, bool) {
    assert!(p > 1.0);
    assert!(v0 >= 0.0 && v1 >= 0.0 && v0 + v1 > 0.0, "data must be nonnegative, not both zero");
    assert!(threshold > 10.0 * (v0 + v1), "threshold must dominate the data");

    let (t1, y1, fired, clipped) =
        integrate_to_threshold(p, 0.0, [v0, v1], threshold, t_max).expect("comparison ODE run");
    if !fired {
        return (Lifespan::Infinite, false);
    }
    if clipped {
        return (Lifespan::Finite(t1), true);
    }
    // Continue to 10 theta; near the asymptote this is a short hop.
    let horizon = t1 + 10.0;
    let (t2, _, fired2, clipped2) =
        integrate_to_threshold(p, t1, y1, 10.0 * threshold, horizon).expect("refinement run");
    if !fired2 {
        return (Lifespan::Finite(t1), true);
    }
    // V ~ kappa (T* - t)^(-2/(p-1)) near blow-up, so crossing offsets of
    // the two thresholds contract by r = 10^(-(p-1)/2).
    let r = 10f64.powf(-(p - 1.0) / 2.0);
    let t_star = t1 + (t2 - t1) / (1.0 - r);
    (Lifespan::Finite(t_star), clipped2)
}

/// Result of a PDE-side blow-up search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupDetection {
    pub time: f64,
    /// Set when the step size underflowed before a clean crossing.
    pub dt_underflow: bool,
}

/// Step the full nonlinear problem looking for the first time `|u|_inf`
/// crosses `threshold`, halving `dt` whenever the sup norm more than
/// doubles within one step. `None` means no crossing before `t_max`.
pub fn detect_blowup(
    sim: &Simulator,
    u0: &GridField,
    u1: &GridField,
    threshold: f64,
    t_max: f64,
) -> Result<Option<BlowupDetection>, EvolutionError> {
    assert!(threshold >= 1e4, "threshold must be at least 1e4");
    let mut state = sim.state_from_data(u0, u1)?;
    let mut dt = sim.config().dt;
    let mut prev_linf = synthesize(&state.u_hat, sim.grid())?.linf_norm();
    const DT_FLOOR: f64 = 1e-12;

    while state.time < t_max {
        let step = dt.min(t_max - state.time);
        match sim.duhamel_step_sized(&state, step) {
            Ok(next) => {
                let linf = synthesize(&next.u_hat, sim.grid())?.linf_norm();
                if prev_linf > 0.0 && linf > 2.0 * prev_linf {
                    if dt <= DT_FLOOR {
                        return Ok(Some(BlowupDetection { time: state.time, dt_underflow: true }));
                    }
                    dt *= 0.5;
                    continue;
                }
                state = next;
                prev_linf = linf;
                if linf >= threshold {
                    return Ok(Some(BlowupDetection { time: state.time, dt_underflow: false }));
                }
            }
            Err(EvolutionError::Overflow { .. }) => {
                if dt <= DT_FLOOR {
                    return Ok(Some(BlowupDetection { time: state.time, dt_underflow: true }));
                }
                dt *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// Least-squares fit of `log T` against `log eps`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence half-width of the slope.
    pub ci_half_width: f64,
    pub samples: usize,
}

/// Two-sided 95% Student-t quantile for `df` degrees of freedom.
fn t_quantile_95(df: usize) -> f64 {
    const TABLE: [f64; 16] = [
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179,
        2.160, 2.145, 2.131, 2.120,
    ];
    if df == 0 {
        f64::INFINITY
    } else if df <= TABLE.len() {
        TABLE[df - 1]
    } else if df <= 30 {
        2.042
    } else {
        1.96
    }
}

/// Fit `log T = slope log eps + intercept` over `(eps, T)` pairs.
pub fn fit_power_law(pairs: &[(f64, f64)]) -> PowerLawFit {
    assert!(pairs.len() >= 2, "power-law fit needs at least two samples");
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|(e, _)| e.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|(_, t)| t.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let df = pairs.len().saturating_sub(2);
    let se = if df > 0 { (ss_res / df as f64).sqrt() / sxx.sqrt() } else { f64::NAN };
    PowerLawFit {
        slope,
        intercept,
        ci_half_width: if df > 0 { t_quantile_95(df) * se } else { f64::NAN },
        samples: pairs.len(),
    }
}

/// Scan output: per-epsilon records plus the fitted scaling law.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanResult {
    pub records: Vec<LifespanRecord>,
    pub fit: PowerLawFit,
    /// The theoretical slope `1 - p`.
    pub expected_slope: f64,
}

/// Lifespans across an epsilon sweep. Data profiles `u0`, `u1` are scaled
/// by each epsilon; the comparison route reduces them to their means. Runs
/// execute concurrently. Infinite records are excluded from the fit with
/// a warning.
pub fn lifespan_scan(
    sim: &Simulator,
    u0: &GridField,
    u1: &GridField,
    epsilons: &[f64],
    method: ScanMethod,
    threshold: f64,
    t_max: f64,
) -> Result<ScanResult, EvolutionError> {
    assert!(epsilons.iter().all(|&e| e > 0.0), "epsilons must be positive");
    let p = sim.params().p;
    let records: Vec<LifespanRecord> = match method {
        ScanMethod::ComparisonOde => {
            let w = sim.grid().weights();
            let mean0: f64 = u0.values.iter().zip(w).map(|(v, w)| v.re * w).sum();
            let mean1: f64 = u1.values.iter().zip(w).map(|(v, w)| v.re * w).sum();
            epsilons
                .par_iter()
                .map(|&eps| {
                    let (lifespan, clipped) =
                        comparison_lifespan(p, eps * mean0, eps * mean1, threshold, t_max);
                    LifespanRecord {
                        epsilon: eps,
                        lifespan,
                        method,
                        threshold,
                        flags: if clipped { vec!["resolution-limit".into()] } else { vec![] },
                    }
                })
                .collect()
        }
        ScanMethod::FullPde => {
            let scaled = |field: &GridField, eps: f64| GridField {
                values: field.values.mapv(|v| v * eps),
            };
            let results: Vec<Result<LifespanRecord, EvolutionError>> = epsilons
                .par_iter()
                .map(|&eps| {
                    let det = detect_blowup(sim, &scaled(u0, eps), &scaled(u1, eps), threshold, t_max)?;
                    Ok(match det {
                        Some(d) => LifespanRecord {
                            epsilon: eps,
                            lifespan: Lifespan::Finite(d.time),
                            method,
                            threshold,
                            flags: if d.dt_underflow { vec!["dt-underflow".into()] } else { vec![] },
                        },
                        None => LifespanRecord {
                            epsilon: eps,
                            lifespan: Lifespan::Infinite,
                            method,
                            threshold,
                            flags: vec![],
                        },
                    })
                })
                .collect();
            results.into_iter().collect::<Result<Vec<_>, _>>()?
        }
    };

    let finite: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.lifespan.finite().map(|t| (r.epsilon, t)))
        .collect();
    if finite.len() < records.len() {
        log::warn!(
            "{} of {} lifespan records were infinite and are excluded from the fit",
            records.len() - finite.len(),
            records.len()
        );
    }
    let fit = fit_power_law(&finite);
    Ok(ScanResult { records, fit, expected_slope: 1.0 - p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{Scheme, SchemeConfig};
    use crate::harmonics::{
        build_grid, enumerate_dual, GroupSpec, QuadratureGrid, RepLabel, SpectralField,
    };
    use crate::propagator::WaveParams;
    use num_complex::Complex64;

    fn constant_field(grid: &QuadratureGrid, c: f64) -> GridField {
        GridField::constant(grid, Complex64::new(c, 0.0))
    }

    #[test]
    fn zero_mode_reads_the_trivial_block() {
        let group = GroupSpec::torus(2, 2, 1.0);
        let dual = enumerate_dual(&group);
        let grid = build_grid(&group);
        let mut u = SpectralField::zeros(&dual);
        u.coeffs_mut()[dual.block_offset(dual.trivial())] = Complex64::new(2.5, 0.0);
        let state = EvolutionState::new(u, SpectralField::zeros(&dual), 0.0).unwrap();
        assert_eq!(zero_mode(&state), (2.5, 0.0));

        // A single nonzero mode has zero mean; the two routes to the mean
        // (trivial coefficient vs quadrature of the synthesis) agree.
        let mut v = SpectralField::zeros(&dual);
        let idx = dual.position(&RepLabel::Torus(vec![1, 0])).unwrap();
        v.coeffs_mut()[dual.block_offset(idx)] = Complex64::new(0.9, 0.4);
        let state = EvolutionState::new(v, SpectralField::zeros(&dual), 0.0).unwrap();
        let (u0, _) = zero_mode(&state);
        assert_eq!(u0, 0.0);
        let g = synthesize(&state.u_hat, &grid).unwrap();
        let quad: Complex64 = g.values.iter().zip(grid.weights()).map(|(v, w)| v * *w).sum();
        assert!((quad.re - u0).abs() < 1e-10 && quad.im.abs() < 1e-10);
    }

    #[test]
    fn comparison_blowup_is_fast_for_large_data() {
        let (t, _) = comparison_lifespan(2.0, 10.0, 0.0, 1e6, 100.0);
        let t = t.finite().expect("blow-up expected");
        assert!(t < 1.0, "lifespan {t}");
    }

    #[test]
    fn comparison_lifespan_threshold_insensitive() {
        let (a, _) = comparison_lifespan(2.0, 0.1, 0.1, 1e6, 1e4);
        let (b, _) = comparison_lifespan(2.0, 0.1, 0.1, 1e7, 1e4);
        let (a, b) = (a.finite().unwrap(), b.finite().unwrap());
        assert!((a - b).abs() / a < 0.01, "threshold sensitivity {a} vs {b}");
    }

    #[test]
    fn comparison_lifespan_is_monotone_in_data() {
        let mut prev = f64::INFINITY;
        for &eps in &[0.01, 0.02, 0.05, 0.1, 0.5] {
            let (t, _) = comparison_lifespan(2.0, eps, eps, 1e6, 1e5);
            let t = t.finite().unwrap();
            assert!(t < prev, "lifespan not decreasing at eps={eps}");
            prev = t;
        }
    }

    #[test]
    fn comparison_slope_matches_scaling_law() {
        // The lifespan law is asymptotic in eps; sample the scaling regime.
        for &p in &[1.5f64, 2.0, 3.0] {
            let epsilons = [3e-3, 1e-3, 3e-4, 1e-4, 3e-5];
            let pairs: Vec<(f64, f64)> = epsilons
                .iter()
                .map(|&e| {
                    let (t, _) = comparison_lifespan(p, e, e, 1e6, 1e15);
                    (e, t.finite().expect("finite lifespan"))
                })
                .collect();
            let fit = fit_power_law(&pairs);
            assert!(
                (fit.slope - (1.0 - p)).abs() < 0.1,
                "p={p}: slope {} vs {}",
                fit.slope,
                1.0 - p
            );
        }
    }

    #[test]
    fn detect_blowup_none_for_linear_problem() {
        let mut cfg = SchemeConfig::new(Scheme::DuhamelMidpoint, 0.05);
        cfg.nonlinear = false;
        let sim = Simulator::new(GroupSpec::torus(2, 2, 2.0), WaveParams::damped(0.5, 2.0), cfg);
        let grid = sim.grid().clone();
        let out =
            detect_blowup(&sim, &constant_field(&grid, 1.0), &constant_field(&grid, 1.0), 1e4, 20.0)
                .unwrap();
        assert!(out.is_none());
    }

    #[test]
    fn detect_blowup_fires_on_damped_nonlinear_run() {
        let cfg = SchemeConfig::new(Scheme::DuhamelMidpoint, 0.01);
        let sim = Simulator::new(GroupSpec::torus(2, 2, 2.0), WaveParams::damped(0.5, 2.0), cfg);
        let grid = sim.grid().clone();
        let eps = 0.5;
        let det = detect_blowup(
            &sim,
            &constant_field(&grid, eps),
            &constant_field(&grid, eps),
            1e6,
            100.0,
        )
        .unwrap()
        .expect("finite lifespan");
        assert!(det.time > 0.5 && det.time < 20.0, "lifespan {}", det.time);
        // The comparison ODE with identical means is an equality here
        // (constant data saturates Jensen), so the times agree closely.
        let (ode_t, _) = comparison_lifespan(2.0, eps, eps, 1e6, 100.0);
        let ode_t = ode_t.finite().unwrap();
        assert!(
            (det.time - ode_t).abs() / ode_t < 0.05,
            "pde {} vs ode {}",
            det.time,
            ode_t
        );
    }

    #[test]
    fn integrated_identity_and_ordering_hold_along_a_pde_run() {
        // Nonnegative, nonconstant data: u0 = 1 + 0.4 cos(x1), u1 = 1.
        let cfg = SchemeConfig::new(Scheme::DuhamelMidpoint, 1e-3);
        let params = WaveParams::damped(0.5, 2.0);
        let sim = Simulator::new(GroupSpec::torus(2, 4, 2.0), params, cfg);
        let grid = sim.grid().clone();
        let u0 = GridField {
            values: grid
                .nodes()
                .map(|p| match p {
                    crate::harmonics::GroupPoint::Torus(x) => {
                        Complex64::new(1.0 + 0.4 * x[0].cos(), 0.0)
                    }
                    _ => unreachable!(),
                })
                .collect::<Vec<_>>()
                .into(),
        };
        let u1 = constant_field(&grid, 1.0);
        let mut state = sim.state_from_data(&u0, &u1).unwrap();
        let (mean0, dmean0) = zero_mode(&state);
        assert!((mean0 - 1.0).abs() < 1e-12 && (dmean0 - 1.0).abs() < 1e-12);

        // March and accumulate \int\int |u|^p by trapezoid; track U0.
        let t_end = 2.0;
        let steps = (t_end / 1e-3) as usize;
        let mut nonlin_mass_prev = {
            let g = synthesize(&state.u_hat, &grid).unwrap();
            crate::evolution::nonlinearity(&g, params.p)
                .unwrap()
                .values
                .iter()
                .zip(grid.weights())
                .map(|(v, w)| v.re * w)
                .sum::<f64>()
        };
        let mut accumulated = 0.0;
        let mut worst_residual = 0.0f64;
        let mut worst_ordering = f64::INFINITY;
        for _ in 0..steps {
            state = sim.duhamel_step(&state).unwrap();
            let g = synthesize(&state.u_hat, &grid).unwrap();
            let mass: f64 = crate::evolution::nonlinearity(&g, params.p)
                .unwrap()
                .values
                .iter()
                .zip(grid.weights())
                .map(|(v, w)| v.re * w)
                .sum();
            accumulated += 0.5 * (mass + nonlin_mass_prev) * 1e-3;
            nonlin_mass_prev = mass;
            let (u0t, v0t) = zero_mode(&state);
            let residual = (v0t - dmean0 + u0t - mean0 - accumulated).abs();
            worst_residual = worst_residual.max(residual);
            // Positivity lower bound.
            let lower = mean0 + dmean0 * (1.0 - (-state.time).exp());
            worst_ordering = worst_ordering.min(u0t - lower);
        }
        assert!(worst_residual < 1e-4, "identity residual {worst_residual}");
        assert!(worst_ordering > -1e-6, "positivity violated by {worst_ordering}");

        // Comparison solution with identical means stays below U0.
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = y[0].abs().powf(params.p) - y[1];
        };
        let jac = |_t: f64, y: &[f64], j: &mut [f64]| {
            j[0] = 0.0;
            j[1] = 1.0;
            j[2] = params.p * y[0].abs().powf(params.p - 1.0) * y[0].signum();
            j[3] = -1.0;
        };
        let sol = comparison_solver()
            .integrate(rhs, jac, 0.0, &[mean0, dmean0], t_end, None)
            .unwrap();
        let (u0t, _) = zero_mode(&state);
        assert!(u0t >= sol.y[0] - 1e-3, "U0 {} below comparison {}", u0t, sol.y[0]);
    }

    #[test]
    fn scan_fits_the_scaling_law() {
        let cfg = SchemeConfig::new(Scheme::DuhamelMidpoint, 0.01);
        let sim = Simulator::new(GroupSpec::torus(2, 2, 2.0), WaveParams::damped(0.5, 2.0), cfg);
        let grid = sim.grid().clone();
        let u0 = constant_field(&grid, 1.0);
        let u1 = constant_field(&grid, 1.0);
        let scan = lifespan_scan(
            &sim,
            &u0,
            &u1,
            &[1e-2, 3e-3, 1e-3, 3e-4, 1e-4],
            ScanMethod::ComparisonOde,
            1e6,
            1e9,
        )
        .unwrap();
        assert_eq!(scan.records.len(), 5);
        assert!((scan.fit.slope - scan.expected_slope).abs() < 0.1, "slope {}", scan.fit.slope);
        assert!(scan.fit.ci_half_width.is_finite());
    }

    #[test]
    fn fit_power_law_recovers_exact_slopes() {
        let pairs: Vec<(f64, f64)> = [0.1f64, 0.01, 0.001]
            .iter()
            .map(|&e| (e, 3.0 * e.powf(-1.5)))
            .collect();
        let fit = fit_power_law(&pairs);
        assert!((fit.slope + 1.5).abs() < 1e-12);
        assert!((fit.intercept - 3.0f64.ln()).abs() < 1e-12);
        assert!(fit.ci_half_width < 1e-9);
    }
}
