//! Wigner matrix coefficients for `SO(3)`.
//!
//! The irreducible unitary representation of degree `l` is evaluated in ZYZ
//! Euler angles as `D^l_{mn}(alpha, beta, gamma) =
//! exp(-i m alpha) d^l_{mn}(beta) exp(-i n gamma)` with the real Wigner-d
//! functions obtained from the three-term recurrence in `l` at fixed
//! `(m, n)`, which stays stable well past the bandlimits used here.

use ndarray::Array2;
use num_complex::Complex64;

/// All Wigner-d matrices `d^l(beta)` for `l = 0..=l_max` at `x = cos(beta)`.
/// Matrix index `[m + l, n + l]` for `m, n in -l..=l`.
pub fn wigner_d_matrices(l_max: usize, x: f64) -> Vec<Array2<f64>> {
    let mut mats: Vec<Array2<f64>> =
        (0..=l_max).map(|l| Array2::zeros((2 * l + 1, 2 * l + 1))).collect();
    let half_c = ((1.0 + x) / 2.0).max(0.0).sqrt(); // cos(beta/2)
    let half_s = ((1.0 - x) / 2.0).max(0.0).sqrt(); // sin(beta/2)

    let li = l_max as i64;
    for m in -li..=li {
        for n in -li..=li {
            let l0 = m.abs().max(n.abs());
            // Seed at l = max(|m|, |n|).
            let a = (m - n).unsigned_abs() as usize;
            let sign = if n >= m || (m - n) % 2 == 0 { 1.0 } else { -1.0 };
            let b = (m + n).unsigned_abs() as usize;
            let seed = sign
                * binomial(2 * l0 as usize, a).sqrt()
                * half_s.powi(a as i32)
                * half_c.powi(b as i32);
            let mut prev = 0.0f64;
            let mut cur = seed;
            set_entry(&mut mats, l0 as usize, m, n, cur);
            for l in l0..li {
                let next = if l == 0 {
                    // Only reached for (m, n) = (0, 0); the generic step is
                    // degenerate there.
                    x
                } else {
                    let lf = l as f64;
                    let mf = m as f64;
                    let nf = n as f64;
                    let c_plus = lf * (((lf + 1.0) * (lf + 1.0) - mf * mf)
                        * ((lf + 1.0) * (lf + 1.0) - nf * nf))
                        .sqrt();
                    let c_mid = (2.0 * lf + 1.0) * (lf * (lf + 1.0) * x - mf * nf);
                    let c_minus =
                        (lf + 1.0) * ((lf * lf - mf * mf) * (lf * lf - nf * nf)).sqrt();
                    (c_mid * cur - c_minus * prev) / c_plus
                };
                prev = cur;
                cur = next;
                set_entry(&mut mats, (l + 1) as usize, m, n, cur);
            }
        }
    }
    mats
}

fn set_entry(mats: &mut [Array2<f64>], l: usize, m: i64, n: i64, value: f64) {
    let li = l as i64;
    if m.abs() <= li && n.abs() <= li {
        mats[l][[(m + li) as usize, (n + li) as usize]] = value;
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Full matrix coefficient `D^l(alpha, beta, gamma)`.
pub fn wigner_matrix(l: usize, alpha: f64, beta: f64, gamma: f64) -> Array2<Complex64> {
    let d = wigner_d_matrices(l, beta.cos()).pop().unwrap();
    let dim = 2 * l + 1;
    let mut out = Array2::zeros((dim, dim));
    for (row, m) in (-(l as i64)..=l as i64).enumerate() {
        let pa = Complex64::from_polar(1.0, -(m as f64) * alpha);
        for (col, n) in (-(l as i64)..=l as i64).enumerate() {
            let pg = Complex64::from_polar(1.0, -(n as f64) * gamma);
            out[[row, col]] = pa * d[[row, col]] * pg;
        }
    }
    out
}

// --- 3x3 rotations for cross-checks --------------------------------------

pub type Mat3 = [[f64; 3]; 3];

pub fn rot_z(theta: f64) -> Mat3 {
    let (s, c) = theta.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

pub fn rot_y(theta: f64) -> Mat3 {
    let (s, c) = theta.sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

pub fn rot_x(theta: f64) -> Mat3 {
    let (s, c) = theta.sin_cos();
    [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Rotation matrix from ZYZ Euler angles, `R = Rz(alpha) Ry(beta) Rz(gamma)`.
pub fn rotation_from_euler(alpha: f64, beta: f64, gamma: f64) -> Mat3 {
    mat_mul(&rot_z(alpha), &mat_mul(&rot_y(beta), &rot_z(gamma)))
}

/// ZYZ Euler angles of a rotation matrix. Defined away from the gimbal
/// configurations `beta = 0, pi`; callers pick generic rotations.
pub fn euler_from_rotation(r: &Mat3) -> (f64, f64, f64) {
    let beta = r[2][2].clamp(-1.0, 1.0).acos();
    let alpha = r[1][2].atan2(r[0][2]);
    let gamma = r[2][1].atan2(-r[2][0]);
    (alpha, beta, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct factorial sum formula, used only as an independent oracle.
    fn wigner_d_sum_formula(l: i64, m: i64, n: i64, beta: f64) -> f64 {
        fn ln_fact(k: i64) -> f64 {
            (2..=k).map(|v| (v as f64).ln()).sum()
        }
        let pref = 0.5 * (ln_fact(l + m) + ln_fact(l - m) + ln_fact(l + n) + ln_fact(l - n));
        let c = (beta / 2.0).cos();
        let s = (beta / 2.0).sin();
        let s_lo = 0.max(n - m);
        let s_hi = (l + n).min(l - m);
        let mut acc = 0.0;
        for k in s_lo..=s_hi {
            let ln_den = ln_fact(l + n - k) + ln_fact(k) + ln_fact(m - n + k) + ln_fact(l - m - k);
            let sign = if (m - n + k) % 2 == 0 { 1.0 } else { -1.0 };
            let cp = 2 * l + n - m - 2 * k;
            let sp = m - n + 2 * k;
            acc += sign * (pref - ln_den).exp() * c.powi(cp as i32) * s.powi(sp as i32);
        }
        acc
    }

    #[test]
    fn matches_degree_one_table() {
        let beta = 0.7f64;
        let d = wigner_d_matrices(1, beta.cos()).pop().unwrap();
        let c = beta.cos();
        let s = beta.sin();
        let sq = std::f64::consts::FRAC_1_SQRT_2;
        // Rows/cols ordered m = -1, 0, 1.
        let expect = [
            [(1.0 + c) / 2.0, sq * s, (1.0 - c) / 2.0],
            [-sq * s, c, sq * s],
            [(1.0 - c) / 2.0, -sq * s, (1.0 + c) / 2.0],
        ];
        for r in 0..3 {
            for cc in 0..3 {
                assert!(
                    (d[[r, cc]] - expect[r][cc]).abs() < 1e-14,
                    "entry ({r},{cc}): {} vs {}",
                    d[[r, cc]],
                    expect[r][cc]
                );
            }
        }
    }

    #[test]
    fn recursion_matches_sum_formula() {
        for &beta in &[0.3f64, 1.1, 2.4] {
            let mats = wigner_d_matrices(8, beta.cos());
            for l in 0..=8i64 {
                for m in -l..=l {
                    for n in -l..=l {
                        let got = mats[l as usize][[(m + l) as usize, (n + l) as usize]];
                        let want = wigner_d_sum_formula(l, m, n, beta);
                        assert!(
                            (got - want).abs() < 1e-11,
                            "l={l} m={m} n={n} beta={beta}: {got} vs {want}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn d_matrices_are_orthogonal() {
        let mats = wigner_d_matrices(6, 0.35f64.cos());
        for d in &mats {
            let n = d.nrows();
            for i in 0..n {
                for j in 0..n {
                    let dot: f64 = (0..n).map(|k| d[[i, k]] * d[[j, k]]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn wigner_is_a_homomorphism() {
        let g1 = (0.4, 0.9, -1.3);
        let g2 = (2.1, 1.7, 0.6);
        let r1 = rotation_from_euler(g1.0, g1.1, g1.2);
        let r2 = rotation_from_euler(g2.0, g2.1, g2.2);
        let (a, b, c) = euler_from_rotation(&mat_mul(&r1, &r2));
        for l in 1..=4 {
            let d1 = wigner_matrix(l, g1.0, g1.1, g1.2);
            let d2 = wigner_matrix(l, g2.0, g2.1, g2.2);
            let d12 = wigner_matrix(l, a, b, c);
            let prod = d1.dot(&d2);
            for (x, y) in prod.iter().zip(d12.iter()) {
                assert!((x - y).norm() < 1e-12, "l={l}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn character_matches_rotation_angle() {
        // tr D^1(g) equals the trace 1 + 2 cos(theta) of the 3x3 rotation.
        for &(a, b, c) in &[(0.3, 0.8, 1.9), (-1.2, 2.0, 0.4)] {
            let d = wigner_matrix(1, a, b, c);
            let chi: Complex64 = (0..3).map(|i| d[[i, i]]).sum();
            let r = rotation_from_euler(a, b, c);
            let tr = r[0][0] + r[1][1] + r[2][2];
            assert!(chi.im.abs() < 1e-13);
            assert!((chi.re - tr).abs() < 1e-12);
        }
    }

    #[test]
    fn euler_round_trip() {
        let (a, b, c) = (0.77, 1.21, -2.4);
        let r = rotation_from_euler(a, b, c);
        let (a2, b2, c2) = euler_from_rotation(&r);
        let r2 = rotation_from_euler(a2, b2, c2);
        for i in 0..3 {
            for j in 0..3 {
                assert!((r[i][j] - r2[i][j]).abs() < 1e-13);
            }
        }
    }
}
