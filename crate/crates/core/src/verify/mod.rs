//! Property-check harness for the quantitative statements: Plancherel and
//! round-trip exactness, propagator-vs-oracle agreement, the decay
//! envelopes of the damped and mass cases, the Gagliardo–Nirenberg
//! interpolation inequality, and energy dissipation.
//!
//! Every check is deterministic given its seed and configuration. Hidden
//! "up to a constant" factors are pinned in [`fixtures`] and
//! regression-tested against their calibration values.

pub mod fixtures;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harmonics::{
    analyze, apply_fractional_laplacian, build_grid, enumerate_dual, lq_norm, plancherel_norm,
    random_band_limited, sobolev_norm, synthesize, GroupKind, GroupSpec, SpectralField,
};
use crate::ode::Dopri5;
use crate::propagator::{
    classify_region, decay_envelope, evolve_mode, linear_evolve, EvolutionState, NormKind, Region,
    WaveParams,
};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("inadmissible Gagliardo-Nirenberg parameters: violated {0}")]
    GnInadmissible(String),
}

/// Outcome of one named check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub worst_ratio: f64,
    pub worst_case: String,
    pub tolerance: f64,
    pub samples: usize,
}

impl CheckReport {
    pub fn summary_line(&self) -> String {
        format!(
            "{} {}: worst {:.6e} vs tolerance {:.6e} ({} samples; worst case {})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst_ratio,
            self.tolerance,
            self.samples,
            self.worst_case
        )
    }
}

/// Relative Plancherel error `| |f|_L2 - |f^|_l2 | / |f|_L2` maximized
/// over random band-limited fields.
pub fn check_plancherel(group: &GroupSpec, trials: usize, seed: u64) -> CheckReport {
    assert!(trials >= 1);
    let dual = enumerate_dual(group);
    let grid = build_grid(group);
    let tol = match group.kind {
        GroupKind::Torus(_) => 1e-10,
        GroupKind::So3 => 1e-8,
    };
    let results: Vec<(f64, u64)> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let f = random_band_limited(&dual, seed + i, 0.3, false);
            let g = synthesize(&f, &grid).expect("band-limited synthesis");
            let l2 = lq_norm(&g, 2.0, &grid);
            let pl = plancherel_norm(&analyze(&g, &grid, &dual).expect("analysis"));
            ((pl - l2).abs() / l2, i)
        })
        .collect();
    let (worst, arg) =
        results.iter().fold((0.0, 0), |acc, &(r, i)| if r > acc.0 { (r, i) } else { acc });
    CheckReport {
        name: format!("plancherel[{}]", group.kind),
        passed: worst <= tol,
        worst_ratio: worst,
        worst_case: format!("seed offset {arg}"),
        tolerance: tol,
        samples: trials,
    }
}

/// Coefficient-wise round-trip error of `analyze(synthesize(f))` relative
/// to the field's largest coefficient.
pub fn check_round_trip(group: &GroupSpec, trials: usize, seed: u64) -> CheckReport {
    assert!(trials >= 1);
    let dual = enumerate_dual(group);
    let grid = build_grid(group);
    let tol = match group.kind {
        GroupKind::Torus(_) => 1e-10,
        GroupKind::So3 => 1e-8,
    };
    let results: Vec<(f64, u64)> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let f = random_band_limited(&dual, seed + 7919 * i, 0.3, false);
            let g = synthesize(&f, &grid).expect("synthesis");
            let back = analyze(&g, &grid, &dual).expect("analysis");
            let scale = f.coeffs().iter().map(|v| v.norm()).fold(0.0, f64::max);
            let err = f
                .coeffs()
                .iter()
                .zip(back.coeffs())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            (err / scale, i)
        })
        .collect();
    let (worst, arg) =
        results.iter().fold((0.0, 0), |acc, &(r, i)| if r > acc.0 { (r, i) } else { acc });
    CheckReport {
        name: format!("round-trip[{}]", group.kind),
        passed: worst <= tol,
        worst_ratio: worst,
        worst_case: format!("seed offset {arg}"),
        tolerance: tol,
        samples: trials,
    }
}

/// Maximum deviation of the closed-form mode propagator from an adaptive
/// high-order ODE integration, over a `(mu, t)` lattice and fundamental
/// initial data. The `mu` list should straddle the degenerate
/// discriminant.
pub fn check_mode_oracle(b: f64, m2: f64, mu_list: &[f64], t_list: &[f64]) -> CheckReport {
    assert!(!mu_list.is_empty() && !t_list.is_empty());
    let solver = Dopri5::with_tol(1e-11, 1e-13);
    let mut worst = 0.0f64;
    let mut worst_case = String::new();
    let mut samples = 0usize;
    for &mu in mu_list {
        let nu = mu + m2;
        for ic in [[1.0, 0.0], [0.0, 1.0]] {
            for &t in t_list {
                let oracle = if t == 0.0 {
                    crate::ode::Integration { t: 0.0, y: ic.to_vec(), event_fired: false, steps: 0 }
                } else {
                    solver
                        .integrate(
                            |_, y, dy| {
                                dy[0] = y[1];
                                dy[1] = -b * y[1] - nu * y[0];
                            },
                            0.0,
                            &ic,
                            t,
                            None,
                        )
                        .expect("oracle integration")
                };
                let (c, cdot) = evolve_mode(ic[0].into(), ic[1].into(), t, mu, b, m2);
                let dev = (c.re - oracle.y[0]).abs().max((cdot.re - oracle.y[1]).abs());
                samples += 1;
                if dev > worst {
                    worst = dev;
                    worst_case = format!("mu={mu} t={t} ic=({}, {})", ic[0], ic[1]);
                }
            }
        }
    }
    CheckReport {
        name: format!("mode-oracle[b={b}, m2={m2}]"),
        passed: worst <= 1e-8,
        worst_ratio: worst,
        worst_case,
        tolerance: 1e-8,
        samples,
    }
}

/// Default time grid for the decay checks: dense through the transient,
/// unit steps out to `t = 200`.
pub fn default_decay_t_grid() -> Vec<f64> {
    let mut ts = Vec::new();
    for i in 0..=40 {
        ts.push(i as f64 * 0.05);
    }
    let mut t = 2.25;
    while t < 10.0 {
        ts.push(t);
        t += 0.25;
    }
    let mut t = 10.0;
    while t <= 200.0 {
        ts.push(t);
        t += 1.0;
    }
    ts
}

struct DecaySups {
    l2_uniform: (f64, String),
    l2_growth: (f64, String),
    seminorm: (f64, String),
    timederiv: (f64, String),
}

fn decay_family_sups(
    group: &GroupSpec,
    params: &WaveParams,
    family_size: usize,
    t_grid: &[f64],
    seed: u64,
) -> DecaySups {
    let dual = enumerate_dual(group);
    // The spectral-gap bookkeeping the estimates rely on: only the trivial
    // representation sits below the region threshold.
    for rep in dual.reps() {
        let region = classify_region(rep, params.alpha);
        if rep.casimir == 0.0 {
            assert_eq!(region, Region::R1, "trivial representation must be in R1");
        } else {
            assert_eq!(region, Region::R2, "nonzero mode {} must be in R2", rep.label);
        }
    }
    let per_member: Vec<[(f64, f64); 4]> = (0..family_size as u64)
        .into_par_iter()
        .map(|i| {
            let u0 = random_band_limited(&dual, seed + 2 * i, 0.5, true);
            let u1 = random_band_limited(&dual, seed + 2 * i + 1, 0.5, true);
            let n0 = plancherel_norm(&u0);
            let n1 = plancherel_norm(&u1);
            let d_l2 = n0 + n1;
            let d_sob = sobolev_norm(&u0, params.alpha) + n1;
            let d_growth = |t: f64| n0 + t * n1;
            let state = EvolutionState::new(u0, u1, 0.0).expect("same dual");
            let mut sups = [(0.0f64, 0.0f64); 4]; // (ratio, t)
            for &t in t_grid {
                let s = linear_evolve(&state, t, params).expect("forward evolution");
                let l2 = plancherel_norm(&s.u_hat);
                let semi =
                    plancherel_norm(&apply_fractional_laplacian(&s.u_hat, params.alpha));
                let dt_l2 = plancherel_norm(&s.v_hat);
                let (r_l2u, r_l2g, r_semi, r_dt) = if params.m2 > 0.0 {
                    let a = decay_envelope(t, params, NormKind::L2);
                    (l2 / (a * d_sob), l2 / (a * d_growth(t)), semi / (a * d_sob), dt_l2 / (a * d_sob))
                } else {
                    (
                        l2 / d_l2,
                        l2 / d_growth(t),
                        semi * (1.0 + t).sqrt() / d_sob,
                        dt_l2 * (1.0 + t) / d_sob,
                    )
                };
                for (slot, r) in sups.iter_mut().zip([r_l2u, r_l2g, r_semi, r_dt]) {
                    if r > slot.0 {
                        *slot = (r, t);
                    }
                }
            }
            sups
        })
        .collect();

    let fold = |idx: usize| -> (f64, String) {
        let mut best = (0.0f64, String::new());
        for (m, sups) in per_member.iter().enumerate() {
            if sups[idx].0 > best.0 {
                best = (sups[idx].0, format!("member {m} at t={}", sups[idx].1));
            }
        }
        best
    };
    DecaySups { l2_uniform: fold(0), l2_growth: fold(1), seminorm: fold(2), timederiv: fold(3) }
}

/// Decay-envelope checks against the calibrated constants. For the damped
/// massless case this verifies the polynomial envelopes per norm kind
/// (both the uniform and the literal growth form of the `L^2` bound); for
/// positive mass it verifies `A_{b, m^2}(t)` in the active regime.
pub fn check_decay_bounds(
    group: &GroupSpec,
    params: &WaveParams,
    family_size: usize,
    t_grid: &[f64],
    seed: u64,
) -> Vec<CheckReport> {
    assert!(family_size >= 10, "family must have at least 10 members");
    let sups = decay_family_sups(group, params, family_size, t_grid, seed);
    let samples = family_size * t_grid.len();
    let make = |name: &str, measured: (f64, String), stored: f64| CheckReport {
        name: name.to_string(),
        passed: measured.0 <= stored * (1.0 + fixtures::DECAY_REGRESSION_BAND),
        worst_ratio: measured.0,
        worst_case: measured.1,
        tolerance: stored * (1.0 + fixtures::DECAY_REGRESSION_BAND),
        samples,
    };
    if params.m2 > 0.0 {
        let gap = params.b * params.b - 4.0 * params.m2;
        let (regime, stored) = if gap < 0.0 {
            ("osc", fixtures::prop2::OSC)
        } else if gap == 0.0 {
            ("crit", fixtures::prop2::CRIT)
        } else {
            ("over", fixtures::prop2::OVER)
        };
        vec![
            make(&format!("prop2-{regime}-l2"), sups.l2_uniform, stored[0]),
            make(&format!("prop2-{regime}-seminorm"), sups.seminorm, stored[1]),
            make(&format!("prop2-{regime}-timederiv"), sups.timederiv, stored[2]),
        ]
    } else {
        vec![
            make("prop1-l2-uniform", sups.l2_uniform, fixtures::prop1::L2_UNIFORM_C),
            make("prop1-l2-growth", sups.l2_growth, fixtures::prop1::L2_GROWTH_C),
            make("prop1-seminorm", sups.seminorm, fixtures::prop1::SEMINORM_C),
            make("prop1-timederiv", sups.timederiv, fixtures::prop1::TIMEDERIV_C),
        ]
    }
}

/// Check admissibility of `(n, q, alpha)` for the interpolation
/// inequality and return the exponent `theta = (n/alpha)(1/2 - 1/q)`.
pub fn gn_theta(n: usize, q: f64, alpha: f64) -> Result<f64, VerifyError> {
    let nf = n as f64;
    if (n as i64) < 2 * (alpha.floor() as i64) + 2 {
        return Err(VerifyError::GnInadmissible(format!("n >= 2[alpha]+2 (n = {n})")));
    }
    if q < 2.0 {
        return Err(VerifyError::GnInadmissible(format!("q >= 2 (q = {q})")));
    }
    let q_max = 2.0 * nf / (nf - 2.0 * alpha);
    if q > q_max {
        return Err(VerifyError::GnInadmissible(format!(
            "q <= 2n/(n-2 alpha) (q = {q}, limit {q_max})"
        )));
    }
    Ok(nf / alpha * (0.5 - 1.0 / q))
}

/// Worst interpolation ratio `|f|_Lq / (|f|_{H^alpha}^theta
/// |f|_L2^(1-theta))` over a random family, against the calibrated
/// constant.
pub fn check_gn(
    group: &GroupSpec,
    alpha: f64,
    q: f64,
    family_size: usize,
    seed: u64,
) -> Result<CheckReport, VerifyError> {
    let theta = gn_theta(group.kind.dimension(), q, alpha)?;
    let dual = enumerate_dual(group);
    let grid = build_grid(group);
    let decays = [0.0, 0.5, 1.0, 2.0];
    let ratios: Vec<(f64, u64)> = (0..family_size as u64)
        .into_par_iter()
        .map(|i| {
            let f = random_band_limited(&dual, seed + i, decays[(i % 4) as usize], true);
            (gn_ratio(&f, &grid, alpha, q, theta), i)
        })
        .collect();
    let (worst, arg) =
        ratios.iter().fold((0.0, 0), |acc, &(r, i)| if r > acc.0 { (r, i) } else { acc });
    Ok(CheckReport {
        name: format!("gagliardo-nirenberg[{} q={q} alpha={alpha}]", group.kind),
        passed: worst <= fixtures::gn::CONSTANT * (1.0 + fixtures::GN_REGRESSION_BAND),
        worst_ratio: worst,
        worst_case: format!("seed offset {arg}"),
        tolerance: fixtures::gn::CONSTANT * (1.0 + fixtures::GN_REGRESSION_BAND),
        samples: family_size,
    })
}

/// The interpolation ratio of one spectral field.
pub fn gn_ratio(
    f: &SpectralField,
    grid: &crate::harmonics::QuadratureGrid,
    alpha: f64,
    q: f64,
    theta: f64,
) -> f64 {
    let g = synthesize(f, grid).expect("synthesis");
    let lq = lq_norm(&g, q, grid);
    let sob = sobolev_norm(f, alpha);
    let l2 = plancherel_norm(f);
    lq / (sob.powf(theta) * l2.powf(1.0 - theta))
}

/// Energy monotonicity and the dissipation identity `dE/dt = -b |u_t|^2`
/// along the exact linear flow, by five-point stencils.
pub fn check_energy_monotone(
    group: &GroupSpec,
    params: &WaveParams,
    seed: u64,
    t_end: f64,
    samples: usize,
) -> CheckReport {
    assert!(params.b > 0.0, "dissipation check requires b > 0");
    let dual = enumerate_dual(group);
    let u0 = random_band_limited(&dual, seed, 0.5, true);
    let u1 = random_band_limited(&dual, seed + 1, 0.5, true);
    let state = EvolutionState::new(u0, u1, 0.0).expect("same dual");
    let e0 = crate::evolution::energy(&state, params);
    let slack = 1e-9 * e0.max(1.0);

    let h = 1e-3;
    let mut worst_dev = 0.0f64;
    let mut worst_case = String::new();
    let mut prev_e = e0;
    let mut monotone = true;
    for k in 1..=samples {
        let t = t_end * k as f64 / samples as f64;
        let at = |tt: f64| {
            let s = linear_evolve(&state, tt, params).expect("evolve");
            crate::evolution::energy(&s, params)
        };
        let e = at(t);
        if e > prev_e + slack {
            monotone = false;
            worst_case = format!("energy rose at t={t}");
        }
        prev_e = e;
        // Five-point first derivative of E at t.
        let diff = (at(t - 2.0 * h) - 8.0 * at(t - h) + 8.0 * at(t + h) - at(t + 2.0 * h))
            / (12.0 * h);
        let s = linear_evolve(&state, t, params).expect("evolve");
        let rhs = -params.b * plancherel_norm(&s.v_hat).powi(2);
        let scale = rhs.abs().max(params.b * crate::evolution::energy(&s, params)).max(1e-300);
        let dev = (diff - rhs).abs() / scale;
        if dev > worst_dev {
            worst_dev = dev;
            worst_case = format!("dissipation residual at t={t}");
        }
    }
    CheckReport {
        name: format!("energy-dissipation[b={}, m2={}]", params.b, params.m2),
        passed: monotone && worst_dev <= 1e-5,
        worst_ratio: worst_dev,
        worst_case: if worst_case.is_empty() { "-".into() } else { worst_case },
        tolerance: 1e-5,
        samples,
    }
}

/// Which checks to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SuiteSelector {
    Plancherel,
    Modes,
    Decay,
    Gn,
    Energy,
    All,
}

impl std::str::FromStr for SuiteSelector {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "plancherel" => Ok(Self::Plancherel),
            "modes" => Ok(Self::Modes),
            "decay" => Ok(Self::Decay),
            "gn" => Ok(Self::Gn),
            "energy" => Ok(Self::Energy),
            "all" => Ok(Self::All),
            other => Err(format!("unknown suite '{other}'")),
        }
    }
}

/// The standard mode-oracle lattice: `mu` values straddling the
/// degenerate discriminant of the damped case, `t` through `[0, 20]`.
pub fn standard_mode_lattice() -> (Vec<f64>, Vec<f64>) {
    let mu = vec![0.0, 1.0 / 16.0, 0.25 - 1e-9, 0.25, 0.5, 10.0];
    let t = (0..=40).map(|i| i as f64 * 0.5).collect();
    (mu, t)
}

/// Run the pinned verification suite.
pub fn run_suite(selector: SuiteSelector) -> Vec<CheckReport> {
    let mut reports = Vec::new();
    let torus = GroupSpec::torus(2, 16, 1.0);
    let so3 = GroupSpec::so3(8, 1.0);
    if matches!(selector, SuiteSelector::Plancherel | SuiteSelector::All) {
        reports.push(check_plancherel(&torus, 20, 101));
        reports.push(check_plancherel(&so3, 20, 102));
        reports.push(check_round_trip(&torus, 20, 103));
        reports.push(check_round_trip(&so3, 20, 104));
    }
    if matches!(selector, SuiteSelector::Modes | SuiteSelector::All) {
        let (mu, t) = standard_mode_lattice();
        for (b, m2) in [(1.0, 0.0), (2.0, 2.0), (2.0, 1.0), (3.0, 2.0)] {
            reports.push(check_mode_oracle(b, m2, &mu, &t));
        }
    }
    if matches!(selector, SuiteSelector::Decay | SuiteSelector::All) {
        let group = GroupSpec::torus(2, 8, 1.0);
        let grid = default_decay_t_grid();
        reports.extend(check_decay_bounds(
            &group,
            &WaveParams::damped(0.75, 2.0),
            fixtures::prop1::FAMILY,
            &grid,
            fixtures::prop1::SEED,
        ));
        for (b, m2) in [(2.0, 2.0), (2.0, 1.0), (3.0, 2.0)] {
            reports.extend(check_decay_bounds(
                &group,
                &WaveParams::new(0.75, b, m2, 2.0),
                fixtures::prop2::FAMILY,
                &grid,
                fixtures::prop2::SEED,
            ));
        }
    }
    if matches!(selector, SuiteSelector::Gn | SuiteSelector::All) {
        let group = GroupSpec::torus(2, 8, 1.0);
        reports.push(
            check_gn(&group, 0.75, fixtures::gn::Q, fixtures::gn::FAMILY, fixtures::gn::SEED)
                .expect("pinned GN config is admissible"),
        );
    }
    if matches!(selector, SuiteSelector::Energy | SuiteSelector::All) {
        let group = GroupSpec::torus(2, 8, 1.0);
        reports.push(check_energy_monotone(&group, &WaveParams::damped(0.75, 2.0), 77, 50.0, 60));
        reports.push(check_energy_monotone(
            &group,
            &WaveParams::new(0.75, 2.0, 2.0, 2.0),
            78,
            50.0,
            60,
        ));
    }
    reports
}
