//! Manifold-to-manifold kernels over parameterizations.
//!
//! Three families compare two D x n coefficient matrices:
//!
//! * matrix-based: the cosine trace kernel and the column-wise Euclidean
//!   distance;
//! * curve-based: discrete Frechet (coupling) distance and an edit distance
//!   that matches skipped points against the origin, both over the columns
//!   as ordered points in R^D;
//! * subspace-based: Grassmannian kernels built from the principal angles
//!   between column spans.
//!
//! Distances pass through `exp(-omega * delta)`. The normalization omega is
//! resolved once on training data (reciprocal median of the positive
//! training distances when set to auto) and must be reused for test rows;
//! mixing omegas makes train and test kernels incomparable.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::container::{read_file, Reader, Writer};
use crate::error::{Error, Result};
use crate::manifold::Parameterization;

const GRAM_MAGIC: &[u8; 4] = b"MKPG";
const FLAG_OMEGA: u32 = 1;

/// The seven kernel choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelKind {
    Cosine,
    Euclid,
    EditDist,
    Frechet,
    Grassm,
    GrassmCC,
    GrassmDiff,
}

impl KernelKind {
    pub const ALL: [KernelKind; 7] = [
        KernelKind::Cosine,
        KernelKind::Euclid,
        KernelKind::EditDist,
        KernelKind::Frechet,
        KernelKind::Grassm,
        KernelKind::GrassmCC,
        KernelKind::GrassmDiff,
    ];

    /// Kinds whose raw value is a distance mapped through exp(-omega delta).
    pub fn is_distance(self) -> bool {
        matches!(
            self,
            KernelKind::Euclid | KernelKind::EditDist | KernelKind::Frechet
        )
    }

    /// Kinds operating on difference-augmented parameterizations.
    pub fn needs_diff(self) -> bool {
        self == KernelKind::GrassmDiff
    }

    pub fn tag(self) -> u32 {
        match self {
            KernelKind::Cosine => 1,
            KernelKind::Euclid => 2,
            KernelKind::EditDist => 3,
            KernelKind::Frechet => 4,
            KernelKind::Grassm => 5,
            KernelKind::GrassmCC => 6,
            KernelKind::GrassmDiff => 7,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.tag() == tag)
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            KernelKind::Cosine => "Cosine",
            KernelKind::Euclid => "Euclid",
            KernelKind::EditDist => "EditDist",
            KernelKind::Frechet => "Frechet",
            KernelKind::Grassm => "Grassm",
            KernelKind::GrassmCC => "GrassmCC",
            KernelKind::GrassmDiff => "GrassmDiff",
        };
        f.write_str(name)
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown kernel {s:?}")))
    }
}

/// Distance normalization: fixed, or resolved from training distances.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Omega {
    #[default]
    Auto,
    Fixed(f64),
}

impl Serialize for Omega {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Omega::Auto => s.serialize_str("auto"),
            Omega::Fixed(w) => s.serialize_f64(*w),
        }
    }
}

impl<'de> Deserialize<'de> for Omega {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct OmegaVisitor;
        impl Visitor<'_> for OmegaVisitor {
            type Value = Omega;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("\"auto\" or a positive number")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Omega, E> {
                if v.eq_ignore_ascii_case("auto") {
                    Ok(Omega::Auto)
                } else {
                    v.parse::<f64>()
                        .map(Omega::Fixed)
                        .map_err(|_| E::custom(format!("bad omega {v:?}")))
                }
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Omega, E> {
                Ok(Omega::Fixed(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Omega, E> {
                Ok(Omega::Fixed(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Omega, E> {
                Ok(Omega::Fixed(v as f64))
            }
        }
        d.deserialize_any(OmegaVisitor)
    }
}

/// Kernel choice plus hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    #[serde(default)]
    pub omega: Omega,
    /// Weight of the canonical correlation term in the Grassmann kernel.
    #[serde(default = "default_weight")]
    pub a1: f64,
    /// Weight of the projection term in the Grassmann kernel.
    #[serde(default = "default_weight")]
    pub a2: f64,
}

fn default_weight() -> f64 {
    0.5
}

impl KernelSpec {
    pub fn new(kind: KernelKind) -> Self {
        KernelSpec {
            kind,
            omega: Omega::Auto,
            a1: 0.5,
            a2: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Omega::Fixed(w) = self.omega {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::invalid(format!(
                    "omega must be positive and finite, got {w}"
                )));
            }
        }
        if self.a1 < 0.0 || self.a2 < 0.0 {
            return Err(Error::invalid(format!(
                "a1/a2 must be nonnegative, got {} / {}",
                self.a1, self.a2
            )));
        }
        if matches!(self.kind, KernelKind::Grassm | KernelKind::GrassmDiff)
            && self.a1 + self.a2 <= 0.0
        {
            return Err(Error::invalid("Grassmann kernel needs a1 + a2 > 0"));
        }
        Ok(())
    }
}

fn check_shapes(ci: &DMatrix<f64>, cj: &DMatrix<f64>) -> Result<()> {
    if ci.shape() != cj.shape() {
        return Err(Error::invalid(format!(
            "parameterization shapes differ: {}x{} vs {}x{}",
            ci.nrows(),
            ci.ncols(),
            cj.nrows(),
            cj.ncols()
        )));
    }
    Ok(())
}

/// Cosine kernel `tr(Ci Cj')^2 / (|Ci|_F |Cj|_F)`, with the trace computed
/// as the Frobenius inner product so the D x D product is never formed.
/// Follows the printed formula verbatim: the denominator norms are not
/// squared, so K(C, C) equals |C|_F^2 rather than 1.
pub fn cosine_kernel(ci: &DMatrix<f64>, cj: &DMatrix<f64>) -> Result<f64> {
    check_shapes(ci, cj)?;
    let ni = ci.norm();
    let nj = cj.norm();
    if ni == 0.0 || nj == 0.0 {
        return Err(Error::invalid(
            "cosine kernel needs nonzero parameterizations",
        ));
    }
    let trace: f64 = ci.iter().zip(cj.iter()).map(|(a, b)| a * b).sum();
    Ok(trace * trace / (ni * nj))
}

/// Column-wise squared Euclidean distance, `sum_i |u_i - v_i|^2`; equals
/// the squared Frobenius distance.
pub fn euclid_delta(ci: &DMatrix<f64>, cj: &DMatrix<f64>) -> Result<f64> {
    check_shapes(ci, cj)?;
    Ok(ci
        .iter()
        .zip(cj.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

fn column_distance(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize) -> f64 {
    a.column(i)
        .iter()
        .zip(b.column(j).iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Discrete Frechet (coupling) distance between the column curves:
/// the minimum over monotone couplings covering all points of both curves
/// of the largest matched-pair Euclidean distance, by the standard
/// O(n m) dynamic program.
pub fn frechet_distance(ci: &DMatrix<f64>, cj: &DMatrix<f64>) -> Result<f64> {
    if ci.nrows() != cj.nrows() {
        return Err(Error::invalid(format!(
            "curve point dimensions differ: {} vs {}",
            ci.nrows(),
            cj.nrows()
        )));
    }
    let (p, q) = (ci.ncols(), cj.ncols());
    if p == 0 || q == 0 {
        return Err(Error::invalid(
            "Frechet distance is undefined for empty curves",
        ));
    }
    let mut ca = vec![0.0_f64; p * q];
    for i in 0..p {
        for j in 0..q {
            let d = column_distance(ci, i, cj, j);
            let reach = match (i, j) {
                (0, 0) => d,
                (_, 0) => ca[(i - 1) * q].max(d),
                (0, _) => ca[j - 1].max(d),
                _ => {
                    let best = ca[(i - 1) * q + j - 1]
                        .min(ca[(i - 1) * q + j])
                        .min(ca[i * q + j - 1]);
                    best.max(d)
                }
            };
            ca[i * q + j] = reach;
        }
    }
    Ok(ca[p * q - 1])
}

/// Edit distance between the column curves. Matched pairs cost their
/// Euclidean distance, skipped points cost their distance to the origin,
/// matching obeys the column ordering, and the total is the sum over the
/// alignment. Empty curves are permitted.
pub fn edit_distance(ci: &DMatrix<f64>, cj: &DMatrix<f64>) -> Result<f64> {
    if ci.nrows() != cj.nrows() && ci.ncols() > 0 && cj.ncols() > 0 {
        return Err(Error::invalid(format!(
            "curve point dimensions differ: {} vs {}",
            ci.nrows(),
            cj.nrows()
        )));
    }
    let (p, q) = (ci.ncols(), cj.ncols());
    let origin_cost = |m: &DMatrix<f64>, k: usize| m.column(k).norm();
    let mut cost = vec![0.0_f64; (p + 1) * (q + 1)];
    for i in 1..=p {
        cost[i * (q + 1)] = cost[(i - 1) * (q + 1)] + origin_cost(ci, i - 1);
    }
    for j in 1..=q {
        cost[j] = cost[j - 1] + origin_cost(cj, j - 1);
    }
    for i in 1..=p {
        for j in 1..=q {
            let matched = cost[(i - 1) * (q + 1) + j - 1] + column_distance(ci, i - 1, cj, j - 1);
            let skip_i = cost[(i - 1) * (q + 1) + j] + origin_cost(ci, i - 1);
            let skip_j = cost[i * (q + 1) + j - 1] + origin_cost(cj, j - 1);
            cost[i * (q + 1) + j] = matched.min(skip_i).min(skip_j);
        }
    }
    Ok(cost[p * (q + 1) + q])
}

/// `exp(-omega * delta)`, in (0, 1] with 1 exactly at delta = 0.
pub fn distance_to_kernel(delta: f64, omega: f64) -> Result<f64> {
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::invalid(format!(
            "distances must be nonnegative, got {delta}"
        )));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::invalid(format!(
            "omega must be positive and finite, got {omega}"
        )));
    }
    Ok((-omega * delta).exp())
}

/// Auto normalization: the reciprocal median of the strictly positive
/// distances (even counts average the two middle values).
pub fn median_omega(deltas: &[f64]) -> Result<f64> {
    let mut positive: Vec<f64> = deltas.iter().copied().filter(|d| *d > 0.0).collect();
    if positive.is_empty() {
        return Err(Error::invalid(
            "cannot resolve omega: no strictly positive distances",
        ));
    }
    positive.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = positive.len();
    let median = if n % 2 == 1 {
        positive[n / 2]
    } else {
        0.5 * (positive[n / 2 - 1] + positive[n / 2])
    };
    Ok(1.0 / median)
}

/// Orthonormal basis of the column span by twice-iterated modified
/// Gram-Schmidt. Columns whose residual norm falls below 1e-12 are dropped,
/// so the result has d <= n columns.
pub fn orthonormalize(c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if c.nrows() < c.ncols() {
        return Err(Error::invalid(format!(
            "orthonormalization needs D >= n, got {}x{}",
            c.nrows(),
            c.ncols()
        )));
    }
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(c.ncols());
    for j in 0..c.ncols() {
        let mut v = c.column(j).into_owned();
        for _ in 0..2 {
            for q in &basis {
                let coeff = q.dot(&v);
                v.axpy(-coeff, q, 1.0);
            }
        }
        let norm = v.norm();
        if norm >= 1e-12 {
            basis.push(v / norm);
        }
    }
    if basis.is_empty() {
        return Err(Error::invalid("orthonormalization of a zero matrix"));
    }
    Ok(DMatrix::from_columns(&basis))
}

/// Projection kernel `|Pi_i' Pi_j|_F^2`: the sum of squared principal-angle
/// cosines between the two subspaces.
pub fn projection_kernel(pi_i: &DMatrix<f64>, pi_j: &DMatrix<f64>) -> f64 {
    let m = pi_i.transpose() * pi_j;
    m.iter().map(|v| v * v).sum()
}

/// Canonical correlation kernel: the largest principal-angle cosine,
/// i.e. the largest singular value of `Pi_i' Pi_j`.
pub fn cc_kernel(pi_i: &DMatrix<f64>, pi_j: &DMatrix<f64>) -> f64 {
    let m = pi_i.transpose() * pi_j;
    let sv = m.svd(false, false).singular_values;
    sv.iter().copied().fold(0.0_f64, f64::max).min(1.0)
}

/// Combined Grassmann kernel `a1 K_cc + a2 K_proj` after orthonormalizing
/// both inputs.
pub fn grassmann_kernel(ci: &DMatrix<f64>, cj: &DMatrix<f64>, a1: f64, a2: f64) -> Result<f64> {
    let pi_i = orthonormalize(ci)?;
    let pi_j = orthonormalize(cj)?;
    Ok(a1 * cc_kernel(&pi_i, &pi_j) + a2 * projection_kernel(&pi_i, &pi_j))
}

/// An N x N Gram matrix with the kernel settings that produced it and the
/// resolved omega for distance kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    k: DMatrix<f64>,
    spec: KernelSpec,
    omega: Option<f64>,
}

impl GramMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn len(&self) -> usize {
        self.k.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.k.nrows() == 0
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    /// The omega actually used; `None` for non-distance kinds.
    pub fn omega(&self) -> Option<f64> {
        self.omega
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for i in 0..self.k.nrows() {
            let row: Vec<String> = self.k.row(i).iter().map(|v| format!("{v}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Header (magic, N, spec tag, flags) + omega + N*N row-major f64.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut w = Writer::new(GRAM_MAGIC);
        w.u32(self.k.nrows() as u32)
            .u32(self.spec.kind.tag())
            .u32(if self.omega.is_some() { FLAG_OMEGA } else { 0 })
            .f64(self.omega.unwrap_or(0.0))
            .matrix(&self.k);
        w.write(path)
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let bytes = read_file(path)?;
        let mut r = Reader::new(&bytes, path, GRAM_MAGIC)?;
        let n = r.u32()? as usize;
        let tag = r.u32()?;
        let flags = r.u32()?;
        let omega = r.f64()?;
        let k = r.matrix(n, n)?;
        r.finish()?;
        let kind =
            KernelKind::from_tag(tag).ok_or_else(|| r.bad(format!("unknown kernel tag {tag}")))?;
        let omega = (flags & FLAG_OMEGA != 0).then_some(omega);
        let spec = KernelSpec {
            kind,
            omega: omega.map_or(Omega::Auto, Omega::Fixed),
            a1: 0.5,
            a2: 0.5,
        };
        Ok(GramMatrix { k, spec, omega })
    }
}

/// A test unit's similarities to the N training parameterizations, tagged
/// with the kernel and omega it was computed under.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRow {
    pub values: DVector<f64>,
    pub kind: KernelKind,
    pub omega: Option<f64>,
}

fn validate_family(params: &[Parameterization], spec: &KernelSpec) -> Result<()> {
    spec.validate()?;
    if params.is_empty() {
        return Err(Error::invalid("need at least one parameterization"));
    }
    let (d, n) = (params[0].dim(), params[0].basis_count());
    if let Some(bad) = params
        .iter()
        .position(|p| p.dim() != d || p.basis_count() != n)
    {
        return Err(Error::invalid(format!(
            "parameterization {bad} is {}x{}, expected {d}x{n}",
            params[bad].dim(),
            params[bad].basis_count()
        )));
    }
    if spec.kind.needs_diff() {
        if let Some(bad) = params.iter().position(|p| !p.is_diff()) {
            return Err(Error::invalid(format!(
                "{} requires difference-augmented parameterizations, but item {bad} is plain",
                spec.kind
            )));
        }
    }
    Ok(())
}

fn pair_at(i: usize, j: usize, e: Error) -> Error {
    Error::KernelPair {
        i,
        j,
        source: Box::new(e),
    }
}

/// Raw pair value before any distance-to-kernel mapping: a distance for
/// distance kinds, the kernel value otherwise.
fn raw_pair(spec: &KernelSpec, ci: &Parameterization, cj: &Parameterization) -> Result<f64> {
    match spec.kind {
        KernelKind::Cosine => cosine_kernel(ci.matrix(), cj.matrix()),
        KernelKind::Euclid => euclid_delta(ci.matrix(), cj.matrix()),
        KernelKind::EditDist => edit_distance(ci.matrix(), cj.matrix()),
        KernelKind::Frechet => frechet_distance(ci.matrix(), cj.matrix()),
        KernelKind::Grassm | KernelKind::GrassmDiff => {
            grassmann_kernel(ci.matrix(), cj.matrix(), spec.a1, spec.a2)
        }
        KernelKind::GrassmCC => {
            let pi_i = orthonormalize(ci.matrix())?;
            let pi_j = orthonormalize(cj.matrix())?;
            Ok(cc_kernel(&pi_i, &pi_j))
        }
    }
}

/// Assemble the training Gram matrix: upper-triangle pairs are computed in
/// parallel and mirrored, so the result is symmetric by construction. For
/// distance kinds an auto omega is resolved from the strictly-upper
/// distances and recorded in the result.
pub fn gram_matrix(params: &[Parameterization], spec: &KernelSpec) -> Result<GramMatrix> {
    validate_family(params, spec)?;
    let n = params.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let raw: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| raw_pair(spec, &params[i], &params[j]).map_err(|e| pair_at(i, j, e)))
        .collect::<Result<_>>()?;

    let omega = if spec.kind.is_distance() {
        Some(match spec.omega {
            Omega::Fixed(w) => w,
            Omega::Auto => {
                let upper: Vec<f64> = pairs
                    .iter()
                    .zip(&raw)
                    .filter(|((i, j), _)| i != j)
                    .map(|(_, &d)| d)
                    .collect();
                median_omega(&upper)?
            }
        })
    } else {
        None
    };

    let mut k = DMatrix::zeros(n, n);
    for (&(i, j), &value) in pairs.iter().zip(&raw) {
        let entry = match omega {
            Some(w) => distance_to_kernel(value, w).map_err(|e| pair_at(i, j, e))?,
            None => value,
        };
        k[(i, j)] = entry;
        k[(j, i)] = entry;
    }
    Ok(GramMatrix {
        k,
        spec: spec.clone(),
        omega,
    })
}

/// Kernel row of a test parameterization against the training set, under
/// the identical spec and the training-resolved omega.
pub fn kernel_row(
    test: &Parameterization,
    params: &[Parameterization],
    spec: &KernelSpec,
    omega: Option<f64>,
) -> Result<KernelRow> {
    validate_family(params, spec)?;
    if test.dim() != params[0].dim() || test.basis_count() != params[0].basis_count() {
        return Err(Error::invalid(format!(
            "test parameterization is {}x{}, training is {}x{}",
            test.dim(),
            test.basis_count(),
            params[0].dim(),
            params[0].basis_count()
        )));
    }
    if spec.kind.needs_diff() && !test.is_diff() {
        return Err(Error::invalid(format!(
            "{} requires a difference-augmented test parameterization",
            spec.kind
        )));
    }
    let omega = if spec.kind.is_distance() {
        match omega {
            Some(w) if w > 0.0 && w.is_finite() => Some(w),
            Some(w) => {
                return Err(Error::invalid(format!(
                    "resolved omega must be positive, got {w}"
                )))
            }
            None => {
                return Err(Error::invalid(
                    "distance kernels need the omega resolved at training time",
                ))
            }
        }
    } else {
        None
    };
    let values: Vec<f64> = params
        .par_iter()
        .enumerate()
        .map(|(kidx, p)| {
            let raw = raw_pair(spec, test, p).map_err(|e| pair_at(kidx, kidx, e))?;
            match omega {
                Some(w) => distance_to_kernel(raw, w),
                None => Ok(raw),
            }
        })
        .collect::<Result<_>>()?;
    Ok(KernelRow {
        values: DVector::from_vec(values),
        kind: spec.kind,
        omega,
    })
}
