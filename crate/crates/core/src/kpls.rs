//! Supervised latent embedding via kernel partial least squares.
//!
//! Components are extracted iteratively: each score t is a fixed point of
//! `t = K u / |K u|`, `c = Y' t`, `u = Y c / |Y c|`, after which both the
//! (centered) Gram matrix and the targets are deflated by the projection
//! `I - t t'`. The projection `R = U (T' K_c U)^-1` maps centered kernel
//! rows to latent scores, so training rows reproduce their own scores:
//! `T = K_c R`.
//!
//! Speech recognition and speaker identification get one model each; the
//! two models of a [`dual_fit`] share the Gram matrix, its centering
//! statistics and the resolved omega.

use std::fmt;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::container::{read_file, Reader, Writer};
use crate::error::{Error, Result};
use crate::kernels::{GramMatrix, KernelKind, KernelRow};

const MODEL_MAGIC: &[u8; 4] = b"MKPM";
const MODEL_VERSION: u32 = 1;
const FLAG_OMEGA: u32 = 1;
const FLAG_SPEAKER: u32 = 2;

/// Which label a latent space predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Speech,
    Speaker,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Task::Speech => f.write_str("speech"),
            Task::Speaker => f.write_str("speaker"),
        }
    }
}

/// Column-centered one-hot targets plus the removed column means.
#[derive(Debug, Clone, PartialEq)]
pub struct OneHot {
    /// N x q, column-centered.
    pub y: DMatrix<f64>,
    /// Per-class means of the raw indicator matrix (the class frequencies).
    pub means: DVector<f64>,
    pub vocabulary: Vec<String>,
}

impl OneHot {
    /// True when centering cancelled every column (all labels identical).
    pub fn is_degenerate(&self) -> bool {
        self.y.iter().all(|v| *v == 0.0)
    }
}

/// Encode labels against a closed vocabulary: raw rows are indicator
/// vectors (each sums to 1), then every column is centered.
pub fn one_hot(labels: &[String], vocabulary: &[String]) -> Result<OneHot> {
    if labels.is_empty() {
        return Err(Error::invalid("need at least one label"));
    }
    if vocabulary.is_empty() {
        return Err(Error::invalid("empty vocabulary"));
    }
    let indices: Vec<usize> = labels
        .iter()
        .map(|l| {
            vocabulary
                .iter()
                .position(|v| v == l)
                .ok_or_else(|| Error::invalid(format!("label {l:?} not in vocabulary")))
        })
        .collect::<Result<_>>()?;
    let n = labels.len();
    let q = vocabulary.len();
    let mut y = DMatrix::zeros(n, q);
    for (row, &class) in indices.iter().enumerate() {
        y[(row, class)] = 1.0;
    }
    let means = DVector::from_fn(q, |j, _| y.column(j).sum() / n as f64);
    for j in 0..q {
        let mu = means[j];
        for i in 0..n {
            y[(i, j)] -= mu;
        }
    }
    Ok(OneHot {
        y,
        means,
        vocabulary: vocabulary.to_vec(),
    })
}

/// A double-centered Gram matrix plus the statistics needed to center
/// test rows consistently.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredGram {
    /// `(I - J/N) K (I - J/N)`.
    pub k_c: DMatrix<f64>,
    /// Column means of the training K (equal to row means by symmetry).
    pub row_means: DVector<f64>,
    pub grand_mean: f64,
}

/// Double-center a symmetric Gram matrix:
/// `K_c[i][j] = K[i][j] - rowmean_i - colmean_j + grandmean`.
pub fn center_gram(k: &DMatrix<f64>) -> CenteredGram {
    let n = k.nrows();
    let row_means = DVector::from_fn(n, |i, _| k.row(i).sum() / n as f64);
    let grand_mean = row_means.sum() / n as f64;
    let k_c = DMatrix::from_fn(n, n, |i, j| {
        k[(i, j)] - row_means[i] - row_means[j] + grand_mean
    });
    CenteredGram {
        k_c,
        row_means,
        grand_mean,
    }
}

/// Center a test kernel row with the training statistics:
/// `v_c[j] = v[j] - colmean_j - mean(v) + grandmean`.
pub fn center_test_row(
    v: &DVector<f64>,
    row_means: &DVector<f64>,
    grand_mean: f64,
) -> Result<DVector<f64>> {
    if v.len() != row_means.len() {
        return Err(Error::invalid(format!(
            "kernel row has length {}, training set has {}",
            v.len(),
            row_means.len()
        )));
    }
    let v_mean = v.sum() / v.len() as f64;
    Ok(DVector::from_fn(v.len(), |j, _| {
        v[j] - row_means[j] - v_mean + grand_mean
    }))
}

/// The algorithmic output of the component extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct KplsFit {
    /// N x m scores, unit columns, mutually orthogonal.
    pub t: DMatrix<f64>,
    /// N x m target-side weights.
    pub u: DMatrix<f64>,
    /// N x m projection with `T = K_c R` on training data.
    pub r: DMatrix<f64>,
    /// Effective component count (may be below the request).
    pub m: usize,
    pub warnings: Vec<String>,
}

const CONVERGENCE_TOL: f64 = 1e-12;
const MAX_ITER: usize = 500;
const CONDITION_LIMIT: f64 = 1e12;

fn dominant_column(y: &DMatrix<f64>) -> DVector<f64> {
    let mut best = 0;
    let mut best_norm = f64::NEG_INFINITY;
    for j in 0..y.ncols() {
        let norm = y.column(j).norm_squared();
        if norm > best_norm {
            best = j;
            best_norm = norm;
        }
    }
    y.column(best).into_owned()
}

/// Flip (t, u) so the largest-magnitude entry of t is positive; ties pick
/// the first index. Makes extraction deterministic and oracle comparisons
/// well-defined.
fn fix_sign(t: &mut DVector<f64>, u: &mut DVector<f64>) {
    let mut idx = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, v) in t.iter().enumerate() {
        if v.abs() > best {
            best = v.abs();
            idx = i;
        }
    }
    if t[idx] < 0.0 {
        t.neg_mut();
        u.neg_mut();
    }
}

/// Extract up to `m` components from a centered Gram matrix and
/// column-centered targets.
pub fn kpls_fit(k_c: &DMatrix<f64>, y: &DMatrix<f64>, m: usize) -> Result<KplsFit> {
    let n = k_c.nrows();
    if k_c.ncols() != n {
        return Err(Error::invalid(format!(
            "Gram matrix must be square, got {}x{}",
            n,
            k_c.ncols()
        )));
    }
    if y.nrows() != n {
        return Err(Error::invalid(format!(
            "{} target rows for {} Gram rows",
            y.nrows(),
            n
        )));
    }
    if m == 0 || m > n.saturating_sub(1) {
        return Err(Error::invalid(format!(
            "m must satisfy 1 <= m <= N-1 = {}, got {m}",
            n.saturating_sub(1)
        )));
    }

    let mut warnings = Vec::new();
    let y_scale = y.norm().max(1.0);
    let mut k_work = k_c.clone();
    let mut y_work = y.clone();
    let mut t_cols: Vec<DVector<f64>> = Vec::with_capacity(m);
    let mut u_cols: Vec<DVector<f64>> = Vec::with_capacity(m);

    for comp in 0..m {
        if y_work.norm() <= 1e-12 * y_scale {
            warnings.push(format!(
                "targets exhausted after {comp} of {m} components; effective m = {comp}"
            ));
            break;
        }
        let mut u = dominant_column(&y_work);
        let mut t = DVector::zeros(n);
        let mut t_prev: Option<DVector<f64>> = None;
        let mut exhausted = false;
        for _ in 0..MAX_ITER {
            let kt = &k_work * &u;
            let norm = kt.norm();
            if norm <= f64::MIN_POSITIVE {
                exhausted = true;
                break;
            }
            t = kt / norm;
            let c = y_work.transpose() * &t;
            let yc = &y_work * c;
            let yc_norm = yc.norm();
            if yc_norm > f64::MIN_POSITIVE {
                u = yc / yc_norm;
            }
            if let Some(prev) = &t_prev {
                if (&t - prev).norm() < CONVERGENCE_TOL {
                    break;
                }
            }
            t_prev = Some(t.clone());
        }
        if exhausted {
            warnings.push(format!(
                "kernel deflated to zero after {comp} of {m} components; effective m = {comp}"
            ));
            break;
        }
        fix_sign(&mut t, &mut u);

        // deflate K <- (I - tt')K(I - tt') and Y <- Y - t(t'Y)
        let kt = k_work.transpose() * &t;
        k_work -= &t * kt.transpose();
        let tk = t.transpose() * &k_work;
        k_work -= &t * tk;
        let ty = t.transpose() * &y_work;
        y_work -= &t * ty;

        t_cols.push(t);
        u_cols.push(u);
    }

    // R = U (T' K_c U)^-1, truncating trailing components while the inner
    // matrix is numerically singular (condition above 1e12)
    let mut mm = t_cols.len();
    let (t_mat, u_mat, r_mat) = loop {
        if mm == 0 {
            if warnings.is_empty() {
                warnings.push("no components could be extracted; effective m = 0".into());
            }
            break (
                DMatrix::zeros(n, 0),
                DMatrix::zeros(n, 0),
                DMatrix::zeros(n, 0),
            );
        }
        let t_mat = DMatrix::from_columns(&t_cols[..mm]);
        let u_mat = DMatrix::from_columns(&u_cols[..mm]);
        let inner = t_mat.transpose() * k_c * &u_mat;
        let sv = inner.clone().svd(false, false).singular_values;
        let s_max = sv.iter().copied().fold(0.0_f64, f64::max);
        let s_min = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let cond = if s_min > 0.0 {
            s_max / s_min
        } else {
            f64::INFINITY
        };
        if cond > CONDITION_LIMIT {
            warnings.push(format!(
                "dropping component {mm}: T'KU condition {cond:.3e} exceeds {CONDITION_LIMIT:.0e}"
            ));
            mm -= 1;
            continue;
        }
        match inner.full_piv_lu().try_inverse() {
            Some(inv) => break (t_mat.clone(), u_mat.clone(), u_mat * inv),
            None => {
                warnings.push(format!("dropping component {mm}: T'KU not invertible"));
                mm -= 1;
            }
        }
    };

    Ok(KplsFit {
        t: t_mat,
        u: u_mat,
        r: r_mat,
        m: mm,
        warnings,
    })
}

/// A point in one of the two latent spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentPoint {
    pub values: DVector<f64>,
    pub task: Task,
}

/// A fitted latent model for one task.
#[derive(Debug, Clone, PartialEq)]
pub struct KplsModel {
    task: Task,
    kind: KernelKind,
    omega: Option<f64>,
    requested_m: usize,
    fit: KplsFit,
    /// Column-centered one-hot training targets.
    y: DMatrix<f64>,
    y_means: DVector<f64>,
    vocabulary: Vec<String>,
    row_means: DVector<f64>,
    grand_mean: f64,
}

impl KplsModel {
    /// Fit one task model from an uncentered training Gram matrix.
    pub fn fit(
        gram: &GramMatrix,
        labels: &[String],
        vocabulary: &[String],
        m: usize,
        task: Task,
    ) -> Result<Self> {
        let centered = center_gram(gram.matrix());
        Self::fit_with_stats(gram, &centered, labels, vocabulary, m, task)
    }

    fn fit_with_stats(
        gram: &GramMatrix,
        centered: &CenteredGram,
        labels: &[String],
        vocabulary: &[String],
        m: usize,
        task: Task,
    ) -> Result<Self> {
        if labels.len() != gram.len() {
            return Err(Error::invalid(format!(
                "{} labels for {} training units",
                labels.len(),
                gram.len()
            )));
        }
        let targets = one_hot(labels, vocabulary)?;
        let mut fit = kpls_fit(&centered.k_c, &targets.y, m)?;
        if targets.is_degenerate() {
            fit.warnings
                .push("single-class targets: centered Y is zero".into());
        }
        Ok(KplsModel {
            task,
            kind: gram.spec().kind,
            omega: gram.omega(),
            requested_m: m,
            fit,
            y: targets.y,
            y_means: targets.means,
            vocabulary: targets.vocabulary,
            row_means: centered.row_means.clone(),
            grand_mean: centered.grand_mean,
        })
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn omega(&self) -> Option<f64> {
        self.omega
    }

    /// Effective latent dimensionality.
    pub fn m(&self) -> usize {
        self.fit.m
    }

    pub fn requested_m(&self) -> usize {
        self.requested_m
    }

    pub fn scores(&self) -> &DMatrix<f64> {
        &self.fit.t
    }

    pub fn projection(&self) -> &DMatrix<f64> {
        &self.fit.r
    }

    pub fn targets(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn target_means(&self) -> &DVector<f64> {
        &self.y_means
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn warnings(&self) -> &[String] {
        &self.fit.warnings
    }

    pub fn row_means(&self) -> &DVector<f64> {
        &self.row_means
    }

    pub fn grand_mean(&self) -> f64 {
        self.grand_mean
    }

    /// Latent score of the training unit `k` (row k of T).
    pub fn training_latent(&self, k: usize) -> LatentPoint {
        LatentPoint {
            values: self.fit.t.row(k).transpose(),
            task: self.task,
        }
    }

    /// Embed a kernel row: `t = center(v) R`. The row must have been
    /// computed under this model's kernel and resolved omega.
    pub fn embed(&self, row: &KernelRow) -> Result<LatentPoint> {
        if row.kind != self.kind {
            return Err(Error::invalid(format!(
                "kernel row was computed with {}, model uses {}",
                row.kind, self.kind
            )));
        }
        if row.omega != self.omega {
            return Err(Error::invalid(format!(
                "kernel row omega {:?} differs from the model's {:?}",
                row.omega, self.omega
            )));
        }
        let centered = center_test_row(&row.values, &self.row_means, self.grand_mean)?;
        let values = (centered.transpose() * &self.fit.r).transpose();
        Ok(LatentPoint {
            values,
            task: self.task,
        })
    }

    fn sidecar_path(path: &Path) -> PathBuf {
        let mut os = path.as_os_str().to_owned();
        os.push(".json");
        PathBuf::from(os)
    }

    /// Persist as a binary container plus a JSON sidecar holding the label
    /// vocabulary, the requested m and any warnings.
    pub fn save(&self, path: &Path) -> Result<()> {
        let n = self.fit.t.nrows();
        let mut flags = 0;
        if self.omega.is_some() {
            flags |= FLAG_OMEGA;
        }
        if self.task == Task::Speaker {
            flags |= FLAG_SPEAKER;
        }
        let mut w = Writer::new(MODEL_MAGIC);
        w.u32(MODEL_VERSION)
            .u32(n as u32)
            .u32(self.fit.m as u32)
            .u32(self.y.ncols() as u32)
            .u32(self.kind.tag())
            .u32(flags)
            .f64(self.omega.unwrap_or(0.0))
            .matrix(&self.fit.t)
            .matrix(&self.fit.u)
            .matrix(&self.fit.r)
            .matrix(&self.y)
            .slice(self.y_means.as_slice())
            .slice(self.row_means.as_slice())
            .f64(self.grand_mean);
        w.write(path)?;

        let sidecar = ModelSidecar {
            task: self.task,
            vocabulary: self.vocabulary.clone(),
            requested_m: self.requested_m,
            warnings: self.fit.warnings.clone(),
        };
        let json = serde_json::to_string_pretty(&sidecar)
            .map_err(|e| Error::invalid(format!("sidecar serialization: {e}")))?;
        std::fs::write(Self::sidecar_path(path), json)
            .map_err(|e| Error::io(Self::sidecar_path(path), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let sidecar_path = Self::sidecar_path(path);
        let sidecar_text =
            std::fs::read_to_string(&sidecar_path).map_err(|e| Error::io(&sidecar_path, e))?;
        let sidecar: ModelSidecar =
            serde_json::from_str(&sidecar_text).map_err(|e| Error::Container {
                path: sidecar_path.clone(),
                msg: format!("bad sidecar: {e}"),
            })?;

        let bytes = read_file(path)?;
        let mut r = Reader::new(&bytes, path, MODEL_MAGIC)?;
        let version = r.u32()?;
        if version != MODEL_VERSION {
            return Err(r.bad(format!("unsupported model version {version}")));
        }
        let n = r.u32()? as usize;
        let m = r.u32()? as usize;
        let q = r.u32()? as usize;
        let tag = r.u32()?;
        let flags = r.u32()?;
        let omega_raw = r.f64()?;
        let t = r.matrix(n, m)?;
        let u = r.matrix(n, m)?;
        let rr = r.matrix(n, m)?;
        let y = r.matrix(n, q)?;
        let y_means = DVector::from_vec(r.f64_vec(q)?);
        let row_means = DVector::from_vec(r.f64_vec(n)?);
        let grand_mean = r.f64()?;
        r.finish()?;

        let kind =
            KernelKind::from_tag(tag).ok_or_else(|| r.bad(format!("unknown kernel tag {tag}")))?;
        let task = if flags & FLAG_SPEAKER != 0 {
            Task::Speaker
        } else {
            Task::Speech
        };
        if task != sidecar.task {
            return Err(r.bad(format!(
                "container task {task} disagrees with sidecar {}",
                sidecar.task
            )));
        }
        if sidecar.vocabulary.len() != q {
            return Err(r.bad(format!(
                "{} vocabulary entries for q = {q}",
                sidecar.vocabulary.len()
            )));
        }
        Ok(KplsModel {
            task,
            kind,
            omega: (flags & FLAG_OMEGA != 0).then_some(omega_raw),
            requested_m: sidecar.requested_m,
            fit: KplsFit {
                t,
                u,
                r: rr,
                m,
                warnings: sidecar.warnings,
            },
            y,
            y_means,
            vocabulary: sidecar.vocabulary,
            row_means,
            grand_mean,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ModelSidecar {
    task: Task,
    vocabulary: Vec<String>,
    requested_m: usize,
    warnings: Vec<String>,
}

/// Fit the speech and speaker models off one Gram matrix. The two models
/// share the centering statistics bit-identically; they are fitted
/// concurrently.
pub fn dual_fit(
    gram: &GramMatrix,
    speech_labels: &[String],
    speech_vocabulary: &[String],
    speaker_labels: &[String],
    speaker_vocabulary: &[String],
    m: usize,
) -> Result<(KplsModel, KplsModel)> {
    let centered = center_gram(gram.matrix());
    let (model_c, model_p) = rayon::join(
        || {
            KplsModel::fit_with_stats(
                gram,
                &centered,
                speech_labels,
                speech_vocabulary,
                m,
                Task::Speech,
            )
        },
        || {
            KplsModel::fit_with_stats(
                gram,
                &centered,
                speaker_labels,
                speaker_vocabulary,
                m,
                Task::Speaker,
            )
        },
    );
    Ok((model_c?, model_p?))
}
