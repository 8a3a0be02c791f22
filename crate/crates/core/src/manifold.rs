//! Per-sequence manifold parameterization.
//!
//! Each visual unit's frames are regressed onto a shared coordinate line
//! `[0, 1]` through a Gaussian-RBF basis. The ridge-regularized closed form
//!
//! ```text
//! C' = (A'A + lambda G)^-1 A' X
//! ```
//!
//! yields a single D x n coefficient matrix per sequence regardless of its
//! frame count, which is what makes sequences of different lengths
//! comparable downstream.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::container::{read_file, Reader, Writer};
use crate::error::{Error, Result};
use crate::features::FeatureSequence;

const PARAM_MAGIC: &[u8; 4] = b"MKPC";
const FLAG_DIFF: u32 = 1;

/// Gaussian-RBF basis layout on the unit interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisConfig {
    /// Basis count n.
    pub n: usize,
    /// Ridge regularizer lambda.
    pub lambda: f64,
    /// RBF width sigma in exp(-sigma * (z - w)^2).
    pub sigma: f64,
    /// Basis centers w_j, strictly increasing within [0, 1].
    pub centers: Vec<f64>,
}

impl BasisConfig {
    /// Defaults: lambda = 50, sigma = 2 n^2 (neighboring basis functions
    /// overlap near e^-2), centers uniform on [0, 1].
    pub fn new(n: usize) -> Result<Self> {
        Self::with(n, 50.0, None, None)
    }

    pub fn with(
        n: usize,
        lambda: f64,
        sigma: Option<f64>,
        centers: Option<Vec<f64>>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 basis functions, got {n}"
            )));
        }
        let sigma = sigma.unwrap_or(2.0 * (n * n) as f64);
        let centers =
            centers.unwrap_or_else(|| (0..n).map(|j| j as f64 / (n - 1) as f64).collect());
        let config = BasisConfig {
            n,
            lambda,
            sigma,
            centers,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 basis functions, got {}",
                self.n
            )));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!(
                "sigma must be finite and > 0, got {}",
                self.sigma
            )));
        }
        if self.centers.len() != self.n {
            return Err(Error::invalid(format!(
                "{} centers for {} basis functions",
                self.centers.len(),
                self.n
            )));
        }
        let in_range = self.centers.iter().all(|w| (0.0..=1.0).contains(w));
        let increasing = self.centers.windows(2).all(|w| w[0] < w[1]);
        if !in_range || !increasing {
            return Err(Error::invalid(
                "centers must be strictly increasing within [0, 1]",
            ));
        }
        Ok(())
    }
}

/// Serde-facing form of [`BasisConfig`] with optional fields resolved to
/// the documented defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisOptions {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub centers: Option<Vec<f64>>,
}

fn default_n() -> usize {
    8
}

fn default_lambda() -> f64 {
    50.0
}

impl Default for BasisOptions {
    fn default() -> Self {
        BasisOptions {
            n: default_n(),
            lambda: default_lambda(),
            sigma: None,
            centers: None,
        }
    }
}

impl BasisOptions {
    pub fn build(&self) -> Result<BasisConfig> {
        BasisConfig::with(self.n, self.lambda, self.sigma, self.centers.clone())
    }
}

/// Sequence coordinates on the unit interval: strictly increasing,
/// starting at 0 and ending at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Timestamps(Vec<f64>);

impl Timestamps {
    pub fn new(z: Vec<f64>) -> Result<Self> {
        if z.len() < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 timestamps, got {}",
                z.len()
            )));
        }
        if z[0] != 0.0 || *z.last().unwrap() != 1.0 {
            return Err(Error::invalid("timestamps must start at 0 and end at 1"));
        }
        if z.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("timestamps must be strictly increasing"));
        }
        Ok(Timestamps(z))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Index-uniform coordinates z_i = (i - 1) / (n_k - 1).
pub fn assign_timestamps(n_k: usize) -> Result<Timestamps> {
    if n_k < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 frames to place timestamps, got {n_k}"
        )));
    }
    Timestamps::new((0..n_k).map(|i| i as f64 / (n_k - 1) as f64).collect())
}

fn rbf(sigma: f64, a: f64, b: f64) -> f64 {
    let d = a - b;
    (-sigma * d * d).exp()
}

/// Design matrices of the ridge system: `A[i][j] = exp(-sigma (z_i - w_j)^2)`
/// (n_k x n) and the basis Gram `G[i][j] = exp(-sigma (w_i - w_j)^2)` (n x n).
pub fn rbf_design(z: &Timestamps, config: &BasisConfig) -> (DMatrix<f64>, DMatrix<f64>) {
    let a = DMatrix::from_fn(z.len(), config.n, |i, j| {
        rbf(config.sigma, z.values()[i], config.centers[j])
    });
    let g = DMatrix::from_fn(config.n, config.n, |i, j| {
        rbf(config.sigma, config.centers[i], config.centers[j])
    });
    (a, g)
}

/// The basis response vector Psi(z).
fn basis_at(z: f64, config: &BasisConfig) -> DVector<f64> {
    DVector::from_fn(config.n, |j, _| rbf(config.sigma, z, config.centers[j]))
}

/// A fitted D x n coefficient matrix. `diff` marks matrices produced by
/// [`diff_parameterization`], which stack the plain fit over the fit of the
/// frame differences.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameterization {
    c: DMatrix<f64>,
    diff: bool,
}

impl Parameterization {
    pub fn from_matrix(c: DMatrix<f64>, diff: bool) -> Result<Self> {
        if c.nrows() == 0 || c.ncols() == 0 {
            return Err(Error::invalid("parameterization must be nonempty"));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("parameterization entries must be finite"));
        }
        Ok(Parameterization { c, diff })
    }

    /// Feature dimensionality D (2D for diff-augmented matrices).
    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    /// Basis count n.
    pub fn basis_count(&self) -> usize {
        self.c.ncols()
    }

    pub fn is_diff(&self) -> bool {
        self.diff
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// D rows of n comma-separated values.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for i in 0..self.c.nrows() {
            let row: Vec<String> = self.c.row(i).iter().map(|v| format!("{v}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// 16-byte header (magic, D, n, flags) then D*n row-major f64, little-endian.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut w = Writer::new(PARAM_MAGIC);
        w.u32(self.c.nrows() as u32)
            .u32(self.c.ncols() as u32)
            .u32(if self.diff { FLAG_DIFF } else { 0 })
            .matrix(&self.c);
        w.write(path)
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let bytes = read_file(path)?;
        let mut r = Reader::new(&bytes, path, PARAM_MAGIC)?;
        let d = r.u32()? as usize;
        let n = r.u32()? as usize;
        let flags = r.u32()?;
        let c = r.matrix(d, n)?;
        r.finish()?;
        Parameterization::from_matrix(c, flags & FLAG_DIFF != 0)
    }
}

/// Solve `(A'A + lambda G) Y = A' X` for `Y = C'`.
///
/// For lambda > 0 the system is symmetric positive definite and a Cholesky
/// factorization applies; otherwise (or if Cholesky fails) a fully pivoted
/// LU is used. A system that is still unsolvable reports its condition
/// estimate.
fn solve_normal_equations(
    a: &DMatrix<f64>,
    g: &DMatrix<f64>,
    lambda: f64,
    x: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let m = a.transpose() * a + g * lambda;
    let rhs = a.transpose() * x;
    let solution = if lambda > 0.0 {
        nalgebra::Cholesky::new(m.clone()).map(|chol| chol.solve(&rhs))
    } else {
        None
    };
    let solution = match solution {
        Some(s) => s,
        None => {
            // lambda = 0 leaves the system only as definite as A'A; a
            // rank-deficient A (n_k < n) makes it exactly singular, which
            // pivoted elimination cannot be trusted to detect on its own
            let cond = condition_number(&m);
            if cond.is_nan() || cond > 1e12 {
                return Err(singular_error(cond));
            }
            match m.clone().full_piv_lu().solve(&rhs) {
                Some(s) => s,
                None => return Err(singular_error(cond)),
            }
        }
    };
    if solution.iter().any(|v| !v.is_finite()) {
        return Err(singular_error(condition_number(&m)));
    }
    Ok(solution)
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

fn singular_error(cond: f64) -> Error {
    Error::Singular {
        msg: "normal equations (A'A + lambda G) are not solvable".into(),
        cond,
    }
}

/// Fit the closed-form parameterization of one sequence with index-uniform
/// timestamps.
pub fn fit_parameterization(x: &FeatureSequence, config: &BasisConfig) -> Result<Parameterization> {
    config.validate()?;
    let z = assign_timestamps(x.len())?;
    let (a, g) = rbf_design(&z, config);
    let ct = solve_normal_equations(&a, &g, config.lambda, x.matrix())?;
    Parameterization::from_matrix(ct.transpose(), false)
}

/// Evaluate the regression curve gamma(z) = C Psi(z) at arbitrary points;
/// one output row per point.
pub fn evaluate(c: &Parameterization, points: &[f64], config: &BasisConfig) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(points.len(), c.dim());
    for (i, &z) in points.iter().enumerate() {
        let gamma = c.matrix() * basis_at(z, config);
        out.row_mut(i).copy_from(&gamma.transpose());
    }
    out
}

/// Reconstruct frames at the given timestamps.
pub fn reconstruct(
    c: &Parameterization,
    z: &Timestamps,
    config: &BasisConfig,
) -> Result<FeatureSequence> {
    FeatureSequence::from_matrix(evaluate(c, z.values(), config))
}

/// Fit the plain parameterization over the fit of the first differences
/// (fresh timestamps each) and stack them vertically into a (2D) x n matrix.
/// Encodes temporal ordering for the order-blind Grassmann kernels.
pub fn diff_parameterization(
    x: &FeatureSequence,
    config: &BasisConfig,
) -> Result<Parameterization> {
    if x.len() < 3 {
        return Err(Error::invalid(format!(
            "difference parameterization needs at least 3 frames, got {}",
            x.len()
        )));
    }
    let base = fit_parameterization(x, config)?;
    let m = x.matrix();
    let dx = DMatrix::from_fn(x.len() - 1, x.dim(), |i, j| m[(i + 1, j)] - m[(i, j)]);
    let delta = fit_parameterization(&FeatureSequence::from_matrix(dx)?, config)?;
    let d = x.dim();
    let mut stacked = DMatrix::zeros(2 * d, config.n);
    stacked
        .view_mut((0, 0), (d, config.n))
        .copy_from(base.matrix());
    stacked
        .view_mut((d, 0), (d, config.n))
        .copy_from(delta.matrix());
    Parameterization::from_matrix(stacked, true)
}

/// The regularized objective of the fit: data term plus
/// `lambda * tr(C G C')` (the RKHS smoothness penalty whose minimizer is
/// the closed form).
pub fn objective(
    x: &FeatureSequence,
    c: &Parameterization,
    z: &Timestamps,
    config: &BasisConfig,
) -> f64 {
    let (a, g) = rbf_design(z, config);
    let residual = x.matrix() - a * c.matrix().transpose();
    let data_term: f64 = residual.iter().map(|v| v * v).sum();
    data_term + config.lambda * smoothness_penalty(c, &g)
}

/// tr(C G C').
pub fn smoothness_penalty(c: &Parameterization, g: &DMatrix<f64>) -> f64 {
    let cg = c.matrix() * g;
    cg.iter().zip(c.matrix().iter()).map(|(a, b)| a * b).sum()
}
