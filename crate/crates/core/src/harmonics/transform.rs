//! Group Fourier analysis and synthesis.
//!
//! Analysis computes `u(xi)_{kl} = sum_nodes w f(x) conj(xi(x)_{lk})`,
//! synthesis the Peter–Weyl sum `f(x) = sum_xi d_xi Tr(xi(x) u(xi))`. Both
//! are evaluated separably: per-axis phase contractions on the torus, and
//! phase contractions in `alpha`, `gamma` plus a Wigner-d contraction in
//! `beta` on `SO(3)`. Each output entry is accumulated by its own
//! sequential sum, so results are deterministic regardless of the rayon
//! split.

use std::sync::Arc;

use ndarray::Array1;
use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::GridLayout;
use super::wigner::wigner_d_matrices;
use super::{DualBasis, GridField, HarmonicsError, QuadratureGrid, SpectralField};

const PAR_THRESHOLD: usize = 1 << 15;

fn check_compat(grid: &QuadratureGrid, dual: &DualBasis) -> Result<(), HarmonicsError> {
    if grid.kind() != dual.kind() {
        return Err(HarmonicsError::GroupMismatch);
    }
    if dual.bandlimit() > grid.design_band() {
        return Err(HarmonicsError::BandExceeded {
            dual: dual.bandlimit(),
            grid: grid.design_band(),
        });
    }
    Ok(())
}

/// Phase table `tbl[m + K][i] = exp(i m x_i)` on a uniform grid of `m_pts`
/// angles.
fn phase_table(k_max: usize, m_pts: usize) -> Vec<Vec<Complex64>> {
    let mut tbl = Vec::with_capacity(2 * k_max + 1);
    for m in -(k_max as i64)..=(k_max as i64) {
        let row = (0..m_pts)
            .map(|i| {
                Complex64::from_polar(1.0, m as f64 * std::f64::consts::TAU * i as f64 / m_pts as f64)
            })
            .collect();
        tbl.push(row);
    }
    tbl
}

/// One contraction stage: view `input` as `(s_count, width)` row-major and
/// produce `(rows, s_count)` with `out[o, s] = sum_i tbl[o][i] input[s, i]`.
/// The contracted axis moves to the front, which cycles the remaining axes.
fn contract_stage(
    input: &[Complex64],
    s_count: usize,
    width: usize,
    tbl: &[Vec<Complex64>],
) -> Vec<Complex64> {
    let rows = tbl.len();
    let mut out = vec![Complex64::new(0.0, 0.0); rows * s_count];
    let fill = |(o, chunk): (usize, &mut [Complex64])| {
        let t = &tbl[o];
        for (s, slot) in chunk.iter_mut().enumerate() {
            let base = s * width;
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..width {
                acc += t[i] * input[base + i];
            }
            *slot = acc;
        }
    };
    if rows * s_count >= PAR_THRESHOLD && rows > 1 {
        out.par_chunks_mut(s_count).enumerate().for_each(fill);
    } else {
        out.chunks_mut(s_count).enumerate().for_each(fill);
    }
    out
}

/// Group Fourier transform of a sampled field.
pub fn analyze(
    field: &GridField,
    grid: &QuadratureGrid,
    dual: &Arc<DualBasis>,
) -> Result<SpectralField, HarmonicsError> {
    check_compat(grid, dual)?;
    if field.len() != grid.len() {
        return Err(HarmonicsError::ShapeMismatch { expected: grid.len(), found: field.len() });
    }
    let k_max = dual.bandlimit();
    let mut out = SpectralField::zeros(dual);
    match &grid.layout {
        GridLayout::Torus { points_per_dim } => {
            let n = points_per_dim.len();
            let modes = 2 * k_max + 1;
            // conj(phase) tables per dimension.
            let mut data: Vec<Complex64> = field.values.to_vec();
            for d in (0..n).rev() {
                let m = points_per_dim[d];
                let tbl: Vec<Vec<Complex64>> = phase_table(k_max, m)
                    .into_iter()
                    .map(|row| row.into_iter().map(|v| v.conj()).collect())
                    .collect();
                let s_count = data.len() / m;
                data = contract_stage(&data, s_count, m, &tbl);
            }
            debug_assert_eq!(data.len(), modes.pow(n as u32));
            let total_nodes: f64 = points_per_dim.iter().map(|&m| m as f64).product();
            // data is row-major over (k_1, ..., k_n) with k_d in -K..=K.
            for i in 0..dual.len() {
                let label = match &dual.reps()[i].label {
                    super::RepLabel::Torus(k) => k,
                    _ => unreachable!(),
                };
                let mut flat = 0usize;
                for &kd in label {
                    flat = flat * modes + (kd + k_max as i64) as usize;
                }
                out.coeffs_mut()[dual.block_offset(i)] = data[flat] / total_nodes;
            }
        }
        GridLayout::So3 { n_alpha, beta_cos, beta_w } => {
            let n_beta = beta_cos.len();
            let na = *n_alpha;
            let modes = 2 * k_max + 1;
            // Contract gamma (last axis), then alpha.
            let tbl: Vec<Vec<Complex64>> = phase_table(k_max, na);
            let data: Vec<Complex64> = field.values.to_vec();
            // g1[c, i, j] = sum_k e^(i c gamma_k) f[i, j, k]
            let g1 = contract_stage(&data, na * n_beta, na, &tbl);
            // View g1 as (c, i, j): reorder to (i, j) rows? The next
            // contraction must run over i, which is no longer last. Work
            // per (c): rows of length n_beta, stride over i.
            // g2[a, c, j] = sum_i e^(i a alpha_i) g1[c, i, j]
            let mut g2 = vec![Complex64::new(0.0, 0.0); modes * modes * n_beta];
            let fill = |(a, chunk): (usize, &mut [Complex64])| {
                let t = &tbl[a];
                for c in 0..modes {
                    for j in 0..n_beta {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for i in 0..na {
                            acc += t[i] * g1[(c * na + i) * n_beta + j];
                        }
                        chunk[c * n_beta + j] = acc;
                    }
                }
            };
            if modes * modes * n_beta >= PAR_THRESHOLD {
                g2.par_chunks_mut(modes * n_beta).enumerate().for_each(fill);
            } else {
                g2.chunks_mut(modes * n_beta).enumerate().for_each(fill);
            }
            // Wait: g1 layout after contract_stage is (c, s) with
            // s = i * n_beta + j, i.e. g1[c, i, j] — consistent above.
            let ab_w = 1.0 / (na * na) as f64;
            let dtabs: Vec<Vec<ndarray::Array2<f64>>> =
                beta_cos.iter().map(|&x| wigner_d_matrices(k_max, x)).collect();
            for idx in 0..dual.len() {
                let l = match dual.reps()[idx].label {
                    super::RepLabel::So3(l) => l as usize,
                    _ => unreachable!(),
                };
                let dim = 2 * l + 1;
                let off = dual.block_offset(idx);
                for mi in 0..dim {
                    let m = mi as i64 - l as i64;
                    for ni in 0..dim {
                        let n = ni as i64 - l as i64;
                        // conj(D^l_{nm}) = e^(+i n alpha) d^l_{nm} e^(+i m gamma)
                        let a_row = (n + k_max as i64) as usize;
                        let c_row = (m + k_max as i64) as usize;
                        let mut acc = Complex64::new(0.0, 0.0);
                        for j in 0..n_beta {
                            let dv = dtabs[j][l][[ni, mi]];
                            acc += beta_w[j] * dv * g2[(a_row * modes + c_row) * n_beta + j];
                        }
                        out.coeffs_mut()[off + mi * dim + ni] = acc * ab_w;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Pointwise Peter–Weyl sum of a spectral field on the grid nodes.
pub fn synthesize(
    spec: &SpectralField,
    grid: &QuadratureGrid,
) -> Result<GridField, HarmonicsError> {
    let dual = spec.dual();
    check_compat(grid, dual)?;
    let k_max = dual.bandlimit();
    match &grid.layout {
        GridLayout::Torus { points_per_dim } => {
            let n = points_per_dim.len();
            let modes = 2 * k_max + 1;
            // Scatter coefficients into the dense (k_1, ..., k_n) cube.
            let mut data = vec![Complex64::new(0.0, 0.0); modes.pow(n as u32)];
            for i in 0..dual.len() {
                let label = match &dual.reps()[i].label {
                    super::RepLabel::Torus(k) => k,
                    _ => unreachable!(),
                };
                let mut flat = 0usize;
                for &kd in label {
                    flat = flat * modes + (kd + k_max as i64) as usize;
                }
                data[flat] = spec.coeffs()[dual.block_offset(i)];
            }
            for d in (0..n).rev() {
                let m = points_per_dim[d];
                // tbl[x][k] = e^(i k x): transpose of the phase table.
                let pt = phase_table(k_max, m);
                let tbl: Vec<Vec<Complex64>> =
                    (0..m).map(|x| (0..modes).map(|k| pt[k][x]).collect()).collect();
                let s_count = data.len() / modes;
                data = contract_stage(&data, s_count, modes, &tbl);
            }
            Ok(GridField { values: Array1::from_vec(data) })
        }
        GridLayout::So3 { n_alpha, beta_cos, .. } => {
            let n_beta = beta_cos.len();
            let na = *n_alpha;
            let modes = 2 * k_max + 1;
            let dtabs: Vec<Vec<ndarray::Array2<f64>>> =
                beta_cos.iter().map(|&x| wigner_d_matrices(k_max, x)).collect();
            // s[j, m, n] = sum_l d_l d^l_{mn}(beta_j) u(l)_{nm}
            let mut s = vec![Complex64::new(0.0, 0.0); n_beta * modes * modes];
            for (j, slab) in s.chunks_mut(modes * modes).enumerate() {
                for idx in 0..dual.len() {
                    let l = match dual.reps()[idx].label {
                        super::RepLabel::So3(l) => l as usize,
                        _ => unreachable!(),
                    };
                    let dim = 2 * l + 1;
                    let dl = dim as f64;
                    let off = dual.block_offset(idx);
                    let dmat = &dtabs[j][l];
                    for mi in 0..dim {
                        let m_row = mi + k_max - l;
                        for ni in 0..dim {
                            let n_row = ni + k_max - l;
                            slab[m_row * modes + n_row] +=
                                dl * dmat[[mi, ni]] * spec.coeffs()[off + ni * dim + mi];
                        }
                    }
                }
            }
            // f[i, j, k] = sum_{m,n} e^(-i m alpha_i) e^(-i n gamma_k) s[j, m, n]
            let pt = phase_table(k_max, na);
            let mut values = vec![Complex64::new(0.0, 0.0); na * n_beta * na];
            let fill = |(i, chunk): (usize, &mut [Complex64])| {
                // t[j, n] = sum_m conj(pt[m][i]) s[j, m, n]
                let mut t = vec![Complex64::new(0.0, 0.0); n_beta * modes];
                for j in 0..n_beta {
                    for mr in 0..modes {
                        let ph = pt[mr][i].conj();
                        let base = (j * modes + mr) * modes;
                        for nr in 0..modes {
                            t[j * modes + nr] += ph * s[base + nr];
                        }
                    }
                }
                for j in 0..n_beta {
                    for k in 0..na {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for nr in 0..modes {
                            acc += pt[nr][k].conj() * t[j * modes + nr];
                        }
                        chunk[j * na + k] = acc;
                    }
                }
            };
            if na * n_beta * na >= PAR_THRESHOLD {
                values.par_chunks_mut(n_beta * na).enumerate().for_each(fill);
            } else {
                values.chunks_mut(n_beta * na).enumerate().for_each(fill);
            }
            Ok(GridField { values: Array1::from_vec(values) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{
        build_grid, enumerate_dual, lq_norm, plancherel_norm, random_band_limited, GroupPoint,
        GroupSpec, RepLabel,
    };
    use super::*;

    #[test]
    fn analyze_constant_field_hits_trivial_rep() {
        for spec in [GroupSpec::torus(2, 3, 1.0), GroupSpec::so3(3, 1.0)] {
            let dual = enumerate_dual(&spec);
            let grid = build_grid(&spec);
            let c = Complex64::new(2.5, 0.0);
            let f = GridField::constant(&grid, c);
            let hat = analyze(&f, &grid, &dual).unwrap();
            assert!((hat.trivial_coeff() - c).norm() < 1e-12);
            for (rep, block) in hat.blocks() {
                if rep.casimir > 0.0 {
                    for v in block.iter() {
                        assert!(v.norm() < 1e-12, "{}: {v}", rep.label);
                    }
                }
            }
        }
    }

    #[test]
    fn analyze_pure_torus_mode() {
        let spec = GroupSpec::torus(1, 4, 1.0);
        let dual = enumerate_dual(&spec);
        let grid = build_grid(&spec);
        let values: Vec<Complex64> = grid
            .nodes()
            .map(|p| match p {
                GroupPoint::Torus(x) => Complex64::from_polar(1.0, 3.0 * x[0]),
                _ => unreachable!(),
            })
            .collect();
        let hat = analyze(&GridField { values: Array1::from_vec(values) }, &grid, &dual).unwrap();
        let k3 = dual.position(&RepLabel::Torus(vec![3])).unwrap();
        assert!((hat.coeffs()[dual.block_offset(k3)] - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        let total: f64 = hat.coeffs().iter().map(|v| v.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analyze_so3_character() {
        // The character of degree l analyzes to I / (2l+1) in block l.
        let spec = GroupSpec::so3(3, 1.0);
        let dual = enumerate_dual(&spec);
        let grid = build_grid(&spec);
        let values: Vec<Complex64> = grid
            .nodes()
            .map(|p| match p {
                GroupPoint::Euler { alpha, beta, gamma } => {
                    let d = super::super::wigner::wigner_matrix(2, alpha, beta, gamma);
                    (0..5).map(|i| d[[i, i]]).sum()
                }
                _ => unreachable!(),
            })
            .collect();
        let hat = analyze(&GridField { values: Array1::from_vec(values) }, &grid, &dual).unwrap();
        for (rep, block) in hat.blocks() {
            let want_diag = if rep.label == RepLabel::So3(2) { 1.0 / 5.0 } else { 0.0 };
            for r in 0..rep.dim {
                for c in 0..rep.dim {
                    let want = if r == c { want_diag } else { 0.0 };
                    assert!(
                        (block[[r, c]] - Complex64::new(want, 0.0)).norm() < 1e-12,
                        "l={} entry ({r},{c}) = {}",
                        rep.label,
                        block[[r, c]]
                    );
                }
            }
        }
    }

    #[test]
    fn round_trip_torus() {
        let spec = GroupSpec::torus(2, 5, 1.0);
        let dual = enumerate_dual(&spec);
        let grid = build_grid(&spec);
        let f = random_band_limited(&dual, 42, 0.3, false);
        let g = synthesize(&f, &grid).unwrap();
        let back = analyze(&g, &grid, &dual).unwrap();
        let err: f64 = f
            .coeffs()
            .iter()
            .zip(back.coeffs())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "round-trip error {err}");
    }

    #[test]
    fn round_trip_so3() {
        let spec = GroupSpec::so3(4, 1.0);
        let dual = enumerate_dual(&spec);
        let grid = build_grid(&spec);
        let f = random_band_limited(&dual, 9, 0.2, false);
        let g = synthesize(&f, &grid).unwrap();
        let back = analyze(&g, &grid, &dual).unwrap();
        let err: f64 = f
            .coeffs()
            .iter()
            .zip(back.coeffs())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "round-trip error {err}");
    }

    #[test]
    fn plancherel_matches_quadrature_l2() {
        for spec in [GroupSpec::torus(2, 4, 1.0), GroupSpec::so3(4, 1.0)] {
            let dual = enumerate_dual(&spec);
            let grid = build_grid(&spec);
            let f = random_band_limited(&dual, 5, 0.4, false);
            let g = synthesize(&f, &grid).unwrap();
            let a = plancherel_norm(&f);
            let b = lq_norm(&g, 2.0, &grid);
            assert!((a - b).abs() <= 1e-10 * a, "{spec:?}: {a} vs {b}");
        }
    }

    #[test]
    fn so3_pure_block_is_mean_free() {
        let spec = GroupSpec::so3(2, 1.0);
        let dual = enumerate_dual(&spec);
        let grid = build_grid(&spec);
        let mut f = SpectralField::zeros(&dual);
        let l1 = dual.position(&RepLabel::So3(1)).unwrap();
        let off = dual.block_offset(l1);
        f.coeffs_mut()[off] = Complex64::new(0.7, -0.2);
        f.coeffs_mut()[off + 4] = Complex64::new(-0.3, 0.1);
        let g = synthesize(&f, &grid).unwrap();
        let mean: Complex64 =
            g.values.iter().zip(grid.weights()).map(|(v, w)| v * *w).sum();
        assert!(mean.norm() < 1e-12, "mean = {mean}");
    }

    #[test]
    fn quadrature_exact_on_coefficient_products() {
        // Schur orthogonality through the quadrature: the analysis of one
        // matrix coefficient recovers exactly one entry.
        let spec = GroupSpec::so3(3, 1.0);
        let dual = enumerate_dual(&spec);
        let grid = build_grid(&spec);
        let l = 3usize;
        let (a, b) = (1usize, 4usize); // entry (m, n) = (-2, 1)
        let values: Vec<Complex64> = grid
            .nodes()
            .map(|p| match p {
                GroupPoint::Euler { alpha, beta, gamma } => {
                    super::super::wigner::wigner_matrix(l, alpha, beta, gamma)[[a, b]]
                }
                _ => unreachable!(),
            })
            .collect();
        let hat = analyze(&GridField { values: Array1::from_vec(values) }, &grid, &dual).unwrap();
        let idx = dual.position(&RepLabel::So3(l as u32)).unwrap();
        let dim = 2 * l + 1;
        let off = dual.block_offset(idx);
        for r in 0..dim {
            for c in 0..dim {
                let want = if (r, c) == (b, a) { 1.0 / dim as f64 } else { 0.0 };
                let got = hat.coeffs()[off + r * dim + c];
                assert!((got - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
        // All other blocks vanish.
        for (rep, block) in hat.blocks() {
            if rep.label != RepLabel::So3(l as u32) {
                for v in block.iter() {
                    assert!(v.norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn analyze_is_linear() {
        let spec = GroupSpec::torus(2, 3, 1.0);
        let dual = enumerate_dual(&spec);
        let grid = build_grid(&spec);
        let f = synthesize(&random_band_limited(&dual, 1, 0.0, false), &grid).unwrap();
        let g = synthesize(&random_band_limited(&dual, 2, 0.0, false), &grid).unwrap();
        let (a, b) = (Complex64::new(1.7, -0.4), Complex64::new(-0.9, 2.2));
        let combo = GridField {
            values: Array1::from_iter(
                f.values.iter().zip(g.values.iter()).map(|(x, y)| a * x + b * y),
            ),
        };
        let lhs = analyze(&combo, &grid, &dual).unwrap();
        let fa = analyze(&f, &grid, &dual).unwrap();
        let ga = analyze(&g, &grid, &dual).unwrap();
        for i in 0..lhs.coeffs().len() {
            let want = a * fa.coeffs()[i] + b * ga.coeffs()[i];
            assert!((lhs.coeffs()[i] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn reality_projection_gives_real_synthesis() {
        for spec in [GroupSpec::torus(2, 3, 1.0), GroupSpec::so3(3, 1.0)] {
            let dual = enumerate_dual(&spec);
            let grid = build_grid(&spec);
            let f = random_band_limited(&dual, 13, 0.2, true);
            let g = synthesize(&f, &grid).unwrap();
            assert!(g.max_imag() < 1e-10, "{spec:?}: imag {}", g.max_imag());
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let spec = GroupSpec::torus(1, 2, 1.0);
        let dual = enumerate_dual(&spec);
        let grid = build_grid(&spec);
        let bad = GridField { values: Array1::zeros(3) };
        assert!(matches!(
            analyze(&bad, &grid, &dual),
            Err(HarmonicsError::ShapeMismatch { .. })
        ));
    }
}
