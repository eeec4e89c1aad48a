//! Harmonic analysis on the supported compact groups.
//!
//! The unitary dual is enumerated up to a bandlimit `K`: lattice points
//! `k` with `|k|_inf <= K` on `Torus(n)` (all one-dimensional, Casimir
//! `|k|^2`), and `l in 0..=K` on `SO(3)` (dimension `2l+1`, Casimir
//! `l(l+1)`). A [`SpectralField`] stores one `d x d` coefficient block per
//! representation; [`analyze`]/[`synthesize`] move between spectral blocks
//! and samples on a [`QuadratureGrid`] whose weights realize the normalized
//! Haar measure, so the quadrature is exact on products of matrix
//! coefficients up to the design band.

mod grid;
mod transform;
pub mod wigner;

pub use grid::{build_grid, gauss_legendre, GroupPoint, QuadratureGrid};
pub use transform::{analyze, synthesize};

use std::collections::HashMap;
use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView2, ArrayViewMut2};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarmonicsError {
    #[error("invalid group spec: {0}")]
    InvalidSpec(String),
    #[error("grid field has {found} values but the grid has {expected} nodes")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("spectral fields are indexed by different duals")]
    DualMismatch,
    #[error("grid and dual belong to different groups")]
    GroupMismatch,
    #[error("dual bandlimit {dual} exceeds the grid design band {grid}")]
    BandExceeded { dual: usize, grid: usize },
    #[error("malformed spectral field payload: {0}")]
    Payload(String),
}

/// Which compact group a computation runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    /// Flat torus `T^n = (R/2 pi Z)^n`.
    Torus(usize),
    /// Rotation group, integer-spin representations only.
    So3,
}

impl GroupKind {
    /// Topological dimension of the group manifold.
    pub fn dimension(&self) -> usize {
        match self {
            GroupKind::Torus(n) => *n,
            GroupKind::So3 => 3,
        }
    }
}

impl std::fmt::Display for GroupKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GroupKind::Torus(n) => write!(f, "torus:{n}"),
            GroupKind::So3 => write!(f, "so3"),
        }
    }
}

/// Group together with the dual truncation and grid refinement used for a
/// run. `oversample >= 1` refines the quadrature grid beyond the design
/// band, which is what keeps pseudospectral products alias-free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub kind: GroupKind,
    pub bandlimit: usize,
    pub oversample: f64,
}

impl GroupSpec {
    pub fn new(kind: GroupKind, bandlimit: usize, oversample: f64) -> Result<Self, HarmonicsError> {
        if let GroupKind::Torus(n) = kind {
            if n == 0 {
                return Err(HarmonicsError::InvalidSpec("torus dimension must be >= 1".into()));
            }
        }
        if bandlimit == 0 {
            return Err(HarmonicsError::InvalidSpec("bandlimit must be >= 1".into()));
        }
        if !(oversample >= 1.0) {
            return Err(HarmonicsError::InvalidSpec("oversample must be >= 1".into()));
        }
        Ok(Self { kind, bandlimit, oversample })
    }

    pub fn torus(n: usize, bandlimit: usize, oversample: f64) -> Self {
        Self::new(GroupKind::Torus(n), bandlimit, oversample).expect("valid torus spec")
    }

    pub fn so3(bandlimit: usize, oversample: f64) -> Self {
        Self::new(GroupKind::So3, bandlimit, oversample).expect("valid so3 spec")
    }
}

/// Label of one equivalence class in the unitary dual.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RepLabel {
    Torus(Vec<i64>),
    So3(u32),
}

impl std::fmt::Display for RepLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RepLabel::Torus(k) => {
                let parts: Vec<String> = k.iter().map(|v| v.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
            RepLabel::So3(l) => write!(f, "{l}"),
        }
    }
}

/// One entry of the unitary dual: label, dimension and Casimir eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepIndex {
    pub label: RepLabel,
    pub dim: usize,
    pub casimir: f64,
}

/// Casimir eigenvalue `lambda^2` of a representation: `|k|^2` on the torus,
/// `l(l+1)` on `SO(3)`.
pub fn casimir_eigenvalue(label: &RepLabel) -> f64 {
    match label {
        RepLabel::Torus(k) => k.iter().map(|&v| (v * v) as f64).sum(),
        RepLabel::So3(l) => (*l as f64) * (*l as f64 + 1.0),
    }
}

fn rep_dim(label: &RepLabel) -> usize {
    match label {
        RepLabel::Torus(_) => 1,
        RepLabel::So3(l) => 2 * *l as usize + 1,
    }
}

/// The enumerated dual up to a bandlimit, with block offsets into the flat
/// coefficient storage of a [`SpectralField`].
#[derive(Debug)]
pub struct DualBasis {
    kind: GroupKind,
    bandlimit: usize,
    reps: Vec<RepIndex>,
    offsets: Vec<usize>,
    total_len: usize,
    by_label: HashMap<RepLabel, usize>,
}

impl PartialEq for DualBasis {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.bandlimit == other.bandlimit
    }
}

impl DualBasis {
    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn reps(&self) -> &[RepIndex] {
        &self.reps
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Total number of scalar coefficients (`sum of d^2`).
    pub fn coeff_len(&self) -> usize {
        self.total_len
    }

    pub fn block_offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    pub fn position(&self, label: &RepLabel) -> Option<usize> {
        self.by_label.get(label).copied()
    }

    /// Index of the trivial representation (always present, always first).
    pub fn trivial(&self) -> usize {
        0
    }
}

/// Enumerate the unitary dual of `group` up to its bandlimit, sorted by
/// Casimir eigenvalue then label, trivial representation first.
pub fn enumerate_dual(group: &GroupSpec) -> Arc<DualBasis> {
    let mut reps: Vec<RepIndex> = Vec::new();
    match group.kind {
        GroupKind::Torus(n) => {
            let k = group.bandlimit as i64;
            let mut label = vec![-k; n];
            loop {
                reps.push(RepIndex {
                    label: RepLabel::Torus(label.clone()),
                    dim: 1,
                    casimir: casimir_eigenvalue(&RepLabel::Torus(label.clone())),
                });
                // Odometer over [-K, K]^n in lexicographic order.
                let mut d = n;
                loop {
                    if d == 0 {
                        break;
                    }
                    d -= 1;
                    if label[d] < k {
                        label[d] += 1;
                        for v in label.iter_mut().skip(d + 1) {
                            *v = -k;
                        }
                        break;
                    }
                    if d == 0 {
                        label.clear();
                        break;
                    }
                }
                if label.is_empty() {
                    break;
                }
            }
        }
        GroupKind::So3 => {
            for l in 0..=group.bandlimit as u32 {
                let label = RepLabel::So3(l);
                reps.push(RepIndex {
                    dim: rep_dim(&label),
                    casimir: casimir_eigenvalue(&label),
                    label,
                });
            }
        }
    }
    // Lexicographic generation + stable sort keeps ties ordered by label.
    reps.sort_by(|a, b| {
        a.casimir.partial_cmp(&b.casimir).unwrap().then_with(|| a.label.cmp(&b.label))
    });

    let mut offsets = Vec::with_capacity(reps.len());
    let mut total = 0usize;
    let mut by_label = HashMap::with_capacity(reps.len());
    for (i, r) in reps.iter().enumerate() {
        offsets.push(total);
        total += r.dim * r.dim;
        by_label.insert(r.label.clone(), i);
    }
    Arc::new(DualBasis {
        kind: group.kind,
        bandlimit: group.bandlimit,
        reps,
        offsets,
        total_len: total,
        by_label,
    })
}

/// Fourier coefficients of a field: one `d x d` complex block per
/// representation, stored flat in dual order.
#[derive(Debug, Clone)]
pub struct SpectralField {
    dual: Arc<DualBasis>,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(dual: &Arc<DualBasis>) -> Self {
        Self { dual: Arc::clone(dual), data: vec![Complex64::new(0.0, 0.0); dual.coeff_len()] }
    }

    pub fn dual(&self) -> &Arc<DualBasis> {
        &self.dual
    }

    pub fn same_dual(&self, other: &SpectralField) -> bool {
        Arc::ptr_eq(&self.dual, &other.dual) || *self.dual == *other.dual
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.data
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn block(&self, i: usize) -> ArrayView2<'_, Complex64> {
        let d = self.dual.reps[i].dim;
        let off = self.dual.offsets[i];
        ArrayView2::from_shape((d, d), &self.data[off..off + d * d]).unwrap()
    }

    pub fn block_mut(&mut self, i: usize) -> ArrayViewMut2<'_, Complex64> {
        let d = self.dual.reps[i].dim;
        let off = self.dual.offsets[i];
        ArrayViewMut2::from_shape((d, d), &mut self.data[off..off + d * d]).unwrap()
    }

    pub fn set_block(&mut self, i: usize, value: &Array2<Complex64>) {
        self.block_mut(i).assign(value);
    }

    /// Coefficient of the trivial representation.
    pub fn trivial_coeff(&self) -> Complex64 {
        self.data[self.dual.offsets[self.dual.trivial()]]
    }

    /// Visit `(rep, block)` pairs.
    pub fn blocks(&self) -> impl Iterator<Item = (&RepIndex, ArrayView2<'_, Complex64>)> {
        (0..self.dual.len()).map(move |i| (&self.dual.reps[i], self.block(i)))
    }

    /// Apply a per-representation scalar multiplier.
    pub fn scale_blocks(&mut self, mut multiplier: impl FnMut(&RepIndex) -> f64) {
        for i in 0..self.dual.len() {
            let m = multiplier(&self.dual.reps[i]);
            let d = self.dual.reps[i].dim;
            let off = self.dual.offsets[i];
            for v in &mut self.data[off..off + d * d] {
                *v *= m;
            }
        }
    }

    /// Project the coefficients onto the subspace of fields with real-valued
    /// synthesis. On the torus this averages `u(k)` with `conj(u(-k))`; on
    /// `SO(3)` the pairing is `u(l)_{ab} <-> (-1)^(a-b) conj(u(l)_{-a,-b})`.
    pub fn enforce_reality(&mut self) {
        match self.dual.kind {
            GroupKind::Torus(_) => {
                for i in 0..self.dual.len() {
                    let label = match &self.dual.reps[i].label {
                        RepLabel::Torus(k) => k.clone(),
                        _ => unreachable!(),
                    };
                    let neg: Vec<i64> = label.iter().map(|v| -v).collect();
                    let j = self.dual.position(&RepLabel::Torus(neg)).expect("dual is symmetric");
                    if j < i {
                        continue;
                    }
                    let oi = self.dual.offsets[i];
                    let oj = self.dual.offsets[j];
                    let avg = 0.5 * (self.data[oi] + self.data[oj].conj());
                    self.data[oi] = avg;
                    self.data[oj] = avg.conj();
                }
            }
            GroupKind::So3 => {
                for i in 0..self.dual.len() {
                    let d = self.dual.reps[i].dim;
                    let l = (d - 1) / 2;
                    let off = self.dual.offsets[i];
                    let block: Vec<Complex64> = self.data[off..off + d * d].to_vec();
                    for a in 0..d {
                        for b in 0..d {
                            // Matrix rows/cols index m = a - l in [-l, l].
                            let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                            let mirrored = block[(2 * l - a) * d + (2 * l - b)].conj() * sign;
                            self.data[off + a * d + b] = 0.5 * (block[a * d + b] + mirrored);
                        }
                    }
                }
            }
        }
    }
}

/// Samples of a function at the nodes of a [`QuadratureGrid`].
#[derive(Debug, Clone)]
pub struct GridField {
    pub values: Array1<Complex64>,
}

impl GridField {
    pub fn from_real(values: Array1<f64>) -> Self {
        Self { values: values.mapv(|v| Complex64::new(v, 0.0)) }
    }

    pub fn constant(grid: &QuadratureGrid, c: Complex64) -> Self {
        Self { values: Array1::from_elem(grid.len(), c) }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest absolute value over the grid.
    pub fn linf_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest imaginary part in absolute value.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }
}

/// Quadrature `L^q` norm `(sum w |f|^q)^(1/q)` with respect to the
/// normalized Haar weights.
pub fn lq_norm(field: &GridField, q: f64, grid: &QuadratureGrid) -> f64 {
    assert!(q >= 1.0, "lq_norm requires q >= 1");
    assert_eq!(field.len(), grid.len(), "field/grid length mismatch");
    if q == 2.0 {
        let s: f64 =
            field.values.iter().zip(grid.weights()).map(|(v, w)| w * v.norm_sqr()).sum();
        return s.sqrt();
    }
    let s: f64 =
        field.values.iter().zip(grid.weights()).map(|(v, w)| w * v.norm().powf(q)).sum();
    s.powf(1.0 / q)
}

/// Plancherel norm `sqrt(sum_xi d_xi |u(xi)|_HS^2)`.
pub fn plancherel_norm(spec: &SpectralField) -> f64 {
    let dual = spec.dual();
    let mut s = 0.0;
    for i in 0..dual.len() {
        let d = dual.reps()[i].dim;
        let off = dual.block_offset(i);
        let hs: f64 = spec.coeffs()[off..off + d * d].iter().map(|v| v.norm_sqr()).sum();
        s += d as f64 * hs;
    }
    s.sqrt()
}

/// Apply the spectral multiplier of `(-L)^(s/2)`: each block is scaled by
/// `(lambda^2)^(s/2)`; the trivial block is annihilated.
pub fn apply_fractional_laplacian(spec: &SpectralField, s: f64) -> SpectralField {
    assert!(s > 0.0, "fractional order must be positive");
    let mut out = spec.clone();
    out.scale_blocks(|rep| if rep.casimir == 0.0 { 0.0 } else { rep.casimir.powf(s / 2.0) });
    out
}

/// Fractional Sobolev norm `|f|_L2 + |(-L)^(alpha/2) f|_L2` via Plancherel.
pub fn sobolev_norm(spec: &SpectralField, alpha: f64) -> f64 {
    plancherel_norm(spec) + plancherel_norm(&apply_fractional_laplacian(spec, alpha))
}

/// Draw a band-limited field with i.i.d. standard complex Gaussian blocks
/// scaled by `(1 + lambda^2)^(-decay_rate)`. Deterministic in `seed`; the
/// reality projection is applied when `real` is set.
pub fn random_band_limited(
    dual: &Arc<DualBasis>,
    seed: u64,
    decay_rate: f64,
    real: bool,
) -> SpectralField {
    assert!(decay_rate >= 0.0, "decay_rate must be nonnegative");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = SpectralField::zeros(dual);
    let normal = StandardNormal;
    for i in 0..dual.len() {
        let rep = &dual.reps()[i];
        let scale = (1.0 + rep.casimir).powf(-decay_rate);
        let off = dual.block_offset(i);
        for v in &mut field.coeffs_mut()[off..off + rep.dim * rep.dim] {
            let re: f64 = normal.sample(&mut rng);
            let im: f64 = normal.sample(&mut rng);
            *v = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2 * scale;
        }
    }
    if real {
        field.enforce_reality();
    }
    field
}

// --- serialization -----------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SpectralEntry {
    label: RepLabel,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct SpectralPayload {
    group: String,
    bandlimit: usize,
    entries: Vec<SpectralEntry>,
}

impl SpectralField {
    /// Serialize as `{group, bandlimit, entries: [{label, re, im}]}`.
    pub fn to_json(&self) -> String {
        let dual = self.dual();
        let entries = (0..dual.len())
            .map(|i| {
                let rep = &dual.reps()[i];
                let block = self.block(i);
                let re = block.rows().into_iter().map(|r| r.iter().map(|v| v.re).collect()).collect();
                let im = block.rows().into_iter().map(|r| r.iter().map(|v| v.im).collect()).collect();
                SpectralEntry { label: rep.label.clone(), re, im }
            })
            .collect();
        let payload = SpectralPayload {
            group: dual.kind().to_string(),
            bandlimit: dual.bandlimit(),
            entries,
        };
        serde_json::to_string(&payload).expect("spectral field serializes")
    }

    pub fn from_json(text: &str, dual: &Arc<DualBasis>) -> Result<Self, HarmonicsError> {
        let payload: SpectralPayload =
            serde_json::from_str(text).map_err(|e| HarmonicsError::Payload(e.to_string()))?;
        if payload.group != dual.kind().to_string() || payload.bandlimit != dual.bandlimit() {
            return Err(HarmonicsError::Payload(format!(
                "payload is for {} K={}, dual is {} K={}",
                payload.group,
                payload.bandlimit,
                dual.kind(),
                dual.bandlimit()
            )));
        }
        let mut field = SpectralField::zeros(dual);
        for entry in &payload.entries {
            let i = dual
                .position(&entry.label)
                .ok_or_else(|| HarmonicsError::Payload(format!("unknown label {}", entry.label)))?;
            let d = dual.reps()[i].dim;
            if entry.re.len() != d || entry.im.len() != d {
                return Err(HarmonicsError::Payload(format!("block {} has wrong shape", entry.label)));
            }
            let mut block = field.block_mut(i);
            for r in 0..d {
                if entry.re[r].len() != d || entry.im[r].len() != d {
                    return Err(HarmonicsError::Payload(format!(
                        "block {} has ragged rows",
                        entry.label
                    )));
                }
                for c in 0..d {
                    block[[r, c]] = Complex64::new(entry.re[r][c], entry.im[r][c]);
                }
            }
        }
        Ok(field)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus1_dual_enumeration() {
        let dual = enumerate_dual(&GroupSpec::torus(1, 2, 1.0));
        let labels: Vec<i64> = dual
            .reps()
            .iter()
            .map(|r| match &r.label {
                RepLabel::Torus(k) => k[0],
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(labels, vec![0, -1, 1, -2, 2]);
        assert!(dual.reps().iter().all(|r| r.dim == 1));
        assert_eq!(dual.reps()[0].casimir, 0.0);
    }

    #[test]
    fn torus2_dual_casimirs() {
        let dual = enumerate_dual(&GroupSpec::torus(2, 1, 1.0));
        assert_eq!(dual.len(), 9);
        let cas: Vec<f64> = dual.reps().iter().map(|r| r.casimir).collect();
        assert_eq!(cas, vec![0.0, 1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn so3_dual_enumeration() {
        let dual = enumerate_dual(&GroupSpec::so3(2, 1.0));
        let expect = [(0u32, 1usize, 0.0), (1, 3, 2.0), (2, 5, 6.0)];
        for (rep, (l, d, c)) in dual.reps().iter().zip(expect) {
            assert_eq!(rep.label, RepLabel::So3(l));
            assert_eq!(rep.dim, d);
            assert_eq!(rep.casimir, c);
        }
    }

    #[test]
    fn casimir_values() {
        assert_eq!(casimir_eigenvalue(&RepLabel::Torus(vec![3])), 9.0);
        assert_eq!(casimir_eigenvalue(&RepLabel::Torus(vec![0, 0])), 0.0);
        assert_eq!(casimir_eigenvalue(&RepLabel::So3(1)), 2.0);
    }

    #[test]
    fn fractional_multiplier_values() {
        let dual = enumerate_dual(&GroupSpec::torus(1, 4, 1.0));
        let mut f = SpectralField::zeros(&dual);
        let k4 = dual.position(&RepLabel::Torus(vec![4])).unwrap();
        let k0 = dual.trivial();
        f.coeffs_mut()[dual.block_offset(k4)] = Complex64::new(1.0, 0.0);
        f.coeffs_mut()[dual.block_offset(k0)] = Complex64::new(5.0, 0.0);
        // s = 2 is the classical Laplacian: multiplier k^2 = 16.
        let lap = apply_fractional_laplacian(&f, 2.0);
        assert_eq!(lap.coeffs()[dual.block_offset(k4)].re, 16.0);
        // s = 1/2 (alpha = 1/2 seminorm): multiplier |k|^(1/2) = 2.
        let half = apply_fractional_laplacian(&f, 0.5);
        assert!((half.coeffs()[dual.block_offset(k4)].re - 2.0).abs() < 1e-15);
        // Constants are annihilated.
        assert_eq!(lap.coeffs()[dual.block_offset(k0)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn sobolev_norm_single_mode() {
        let dual = enumerate_dual(&GroupSpec::torus(1, 4, 1.0));
        let mut f = SpectralField::zeros(&dual);
        let k4 = dual.position(&RepLabel::Torus(vec![4])).unwrap();
        f.coeffs_mut()[dual.block_offset(k4)] = Complex64::new(1.0, 0.0);
        assert!((sobolev_norm(&f, 0.5) - 3.0).abs() < 1e-12);
        // Constant field: seminorm vanishes.
        let mut c = SpectralField::zeros(&dual);
        c.coeffs_mut()[dual.block_offset(dual.trivial())] = Complex64::new(-2.5, 0.0);
        assert!((sobolev_norm(&c, 0.5) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn plancherel_norm_of_character() {
        let dual = enumerate_dual(&GroupSpec::so3(2, 1.0));
        let mut f = SpectralField::zeros(&dual);
        let l1 = dual.position(&RepLabel::So3(1)).unwrap();
        let d = 3;
        let off = dual.block_offset(l1);
        for r in 0..d {
            f.coeffs_mut()[off + r * d + r] = Complex64::new(1.0 / 3.0, 0.0);
        }
        assert!((plancherel_norm(&f) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_fields_are_deterministic() {
        let dual = enumerate_dual(&GroupSpec::torus(2, 3, 1.0));
        let a = random_band_limited(&dual, 7, 0.5, false);
        let b = random_band_limited(&dual, 7, 0.5, false);
        assert_eq!(a.coeffs(), b.coeffs());
        let c = random_band_limited(&dual, 8, 0.5, false);
        assert_ne!(a.coeffs(), c.coeffs());
    }

    #[test]
    fn spectral_json_round_trip() {
        let dual = enumerate_dual(&GroupSpec::so3(2, 1.0));
        let f = random_band_limited(&dual, 3, 0.3, false);
        let text = f.to_json();
        let g = SpectralField::from_json(&text, &dual).unwrap();
        for (a, b) in f.coeffs().iter().zip(g.coeffs()) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
