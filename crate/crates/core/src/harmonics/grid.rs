//! Quadrature grids realizing the normalized Haar integral.
//!
//! Torus: tensor product of uniform grids, `ceil(oversample * (2K+1))`
//! points per dimension. `SO(3)`: ZYZ Euler angles with `2B` uniform points
//! in `alpha` and `gamma` and `B` Gauss–Legendre points in `cos(beta)`,
//! `B = ceil(oversample * (K+1))`. Both choices integrate products of
//! matrix coefficients exactly up to the design band, and the weights sum
//! to one.

use super::{GroupKind, GroupSpec};

/// One grid node, as angles.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupPoint {
    Torus(Vec<f64>),
    Euler { alpha: f64, beta: f64, gamma: f64 },
}

/// Structured layout of the grid, used by the fast transforms.
#[derive(Debug, Clone)]
pub(crate) enum GridLayout {
    /// Row-major over dimensions, last dimension fastest.
    Torus { points_per_dim: Vec<usize> },
    /// Index `(i_alpha * n_beta + j_beta) * n_alpha + k_gamma`; `alpha` and
    /// `gamma` share the same uniform grid of `n_alpha = 2B` points.
    So3 { n_alpha: usize, beta_cos: Vec<f64>, beta_w: Vec<f64> },
}

/// Quadrature nodes and normalized Haar weights for one group.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    kind: GroupKind,
    design_band: usize,
    weights: Vec<f64>,
    pub(crate) layout: GridLayout,
}

impl QuadratureGrid {
    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    /// Bandlimit this grid was designed for.
    pub fn design_band(&self) -> usize {
        self.design_band
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Node angles in storage order.
    pub fn node(&self, idx: usize) -> GroupPoint {
        match &self.layout {
            GridLayout::Torus { points_per_dim } => {
                let mut rem = idx;
                let n = points_per_dim.len();
                let mut angles = vec![0.0; n];
                for d in (0..n).rev() {
                    let m = points_per_dim[d];
                    angles[d] = std::f64::consts::TAU * (rem % m) as f64 / m as f64;
                    rem /= m;
                }
                GroupPoint::Torus(angles)
            }
            GridLayout::So3 { n_alpha, beta_cos, .. } => {
                let n_beta = beta_cos.len();
                let k = idx % n_alpha;
                let j = (idx / n_alpha) % n_beta;
                let i = idx / (n_alpha * n_beta);
                GroupPoint::Euler {
                    alpha: std::f64::consts::TAU * i as f64 / *n_alpha as f64,
                    beta: beta_cos[j].acos(),
                    gamma: std::f64::consts::TAU * k as f64 / *n_alpha as f64,
                }
            }
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = GroupPoint> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (weights sum to 2),
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th root from the top.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_n' at x by upward recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Build the quadrature grid for a group spec.
pub fn build_grid(group: &GroupSpec) -> QuadratureGrid {
    let k = group.bandlimit;
    match group.kind {
        GroupKind::Torus(n) => {
            let m = (group.oversample * (2 * k + 1) as f64).ceil() as usize;
            let total: usize = m.pow(n as u32);
            QuadratureGrid {
                kind: group.kind,
                design_band: k,
                weights: vec![1.0 / total as f64; total],
                layout: GridLayout::Torus { points_per_dim: vec![m; n] },
            }
        }
        GroupKind::So3 => {
            let b = (group.oversample * (k + 1) as f64).ceil() as usize;
            let n_alpha = 2 * b;
            let (beta_cos, gl_w) = gauss_legendre(b);
            let beta_w: Vec<f64> = gl_w.iter().map(|w| w / 2.0).collect();
            let mut weights = Vec::with_capacity(n_alpha * b * n_alpha);
            let ab_w = 1.0 / (n_alpha * n_alpha) as f64;
            for _i in 0..n_alpha {
                for j in 0..b {
                    for _k in 0..n_alpha {
                        weights.push(beta_w[j] * ab_w);
                    }
                }
            }
            QuadratureGrid {
                kind: group.kind,
                design_band: k,
                weights,
                layout: GridLayout::So3 { n_alpha, beta_cos, beta_w },
            }
        }
    }
}
