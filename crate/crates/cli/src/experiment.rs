//! The evaluation engine behind `mkpls eval`: folds, Gram matrices, model
//! fits and predictions for every (protocol, kernel, m, classifier) cell.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use mkpls::classify::{knn_predict, rfc_predict};
use mkpls::datasets::{load_manifest, synth_generate, VisualUnit};
use mkpls::kernels::{gram_matrix, kernel_row, KernelSpec};
use mkpls::kpls::{KplsModel, LatentPoint, Task};
use mkpls::manifold::{diff_parameterization, fit_parameterization, BasisConfig, Parameterization};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Classifier, DatasetSource, ExperimentConfig};
use crate::{report, CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct DatasetSummary {
    pub units: usize,
    pub classes: usize,
    pub speakers: usize,
    pub feature_dim: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct FoldLog {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub omega: Option<f64>,
    pub effective_m: usize,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
    pub warnings: Vec<String>,
}

/// One report cell: a (protocol, kernel, m, classifier) combination.
#[derive(Debug, Serialize)]
pub struct CellLog {
    pub protocol: String,
    pub classifier: String,
    pub kernel: String,
    pub m: usize,
    /// Pooled accuracy: correct clips over total clips across folds.
    pub mean_accuracy: f64,
    pub folds: Vec<FoldLog>,
}

#[derive(Debug, Serialize)]
pub struct EvalLog {
    pub dataset: DatasetSummary,
    pub warnings: Vec<String>,
    pub cells: Vec<CellLog>,
}

#[derive(Debug)]
pub struct EvalOutput {
    pub report_csv: String,
    pub log: EvalLog,
}

/// Load the configured dataset (synthetic or manifest-backed).
pub fn load_units(config: &ExperimentConfig) -> CliResult<Vec<VisualUnit>> {
    match &config.dataset {
        DatasetSource::Manifest(path) => Ok(load_manifest(path, config.lbp.as_ref())?),
        DatasetSource::Synth(synth) => {
            let mut synth = synth.clone();
            if let Some(seed) = config.seed {
                synth.seed = seed;
            }
            Ok(synth_generate(&synth)?)
        }
    }
}

/// Trim every (speaker, class) group to the smallest common repetition
/// count and re-index repetitions to their within-group rank. A no-op on
/// rectangular datasets; needed because repetition-based splits demand a
/// full grid while real corpora repeat phrases "up to" some count.
pub fn normalize_repetitions(units: Vec<VisualUnit>) -> (Vec<VisualUnit>, Vec<String>) {
    let mut groups: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    for (idx, u) in units.iter().enumerate() {
        groups
            .entry((u.labels.speaker.clone(), u.labels.speech_class.clone()))
            .or_default()
            .push(idx);
    }
    for members in groups.values_mut() {
        members.sort_by_key(|&i| (units[i].labels.repetition, i));
    }
    let r_min = groups.values().map(Vec::len).min().unwrap_or(0);

    let mut keep: HashMap<usize, usize> = HashMap::new(); // unit index -> rank
    for members in groups.values() {
        for (rank, &idx) in members.iter().take(r_min).enumerate() {
            keep.insert(idx, rank);
        }
    }

    let mut warnings = Vec::new();
    let dropped = units.len() - keep.len();
    if dropped > 0 {
        warnings.push(format!(
            "trimmed {dropped} units to the minimum common repetition count {r_min}"
        ));
    }
    let mut reindexed = 0;
    let kept: Vec<VisualUnit> = units
        .into_iter()
        .enumerate()
        .filter_map(|(idx, mut u)| {
            let rank = *keep.get(&idx)?;
            if u.labels.repetition != rank {
                reindexed += 1;
                u.labels.repetition = rank;
            }
            Some(u)
        })
        .collect();
    if reindexed > 0 {
        warnings.push(format!(
            "re-indexed {reindexed} repetition labels to ranks 0..{r_min}"
        ));
    }
    (kept, warnings)
}

/// Fit (or load from `params_dir`) one parameterization per unit.
pub fn obtain_params(
    units: &[VisualUnit],
    basis: &BasisConfig,
    diff: bool,
    params_dir: Option<&Path>,
) -> CliResult<Vec<Parameterization>> {
    let params: Vec<Parameterization> = match params_dir {
        Some(dir) => units
            .par_iter()
            .map(|u| {
                let name = if diff { format!("{}.diffparam", u.id) } else { format!("{}.param", u.id) };
                let path = dir.join(&name);
                if !path.exists() {
                    return Err(if diff {
                        CliError::Config(format!(
                            "GrassmDiff needs difference-augmented parameterizations, but {} is missing \
                             (generate them with `mkpls param --diff`)",
                            path.display()
                        ))
                    } else {
                        CliError::Data(mkpls::Error::InvalidInput(format!(
                            "parameterization {} not found (generate it with `mkpls param`)",
                            path.display()
                        )))
                    });
                }
                let p = Parameterization::read_binary(&path)?;
                if p.is_diff() != diff {
                    return Err(CliError::Config(format!(
                        "{} is {} but the kernel needs {}",
                        path.display(),
                        if p.is_diff() { "difference-augmented" } else { "plain" },
                        if diff { "difference-augmented" } else { "plain" },
                    )));
                }
                Ok(p)
            })
            .collect::<CliResult<_>>()?,
        None => units
            .par_iter()
            .map(|u| {
                if diff {
                    diff_parameterization(&u.features, basis)
                } else {
                    fit_parameterization(&u.features, basis)
                }
            })
            .collect::<mkpls::Result<_>>()?,
    };
    let expected = if diff {
        2 * units[0].features.dim()
    } else {
        units[0].features.dim()
    };
    if let Some(bad) = params.iter().position(|p| p.dim() != expected) {
        return Err(CliError::Data(mkpls::Error::InvalidInput(format!(
            "parameterization for unit {:?} has {} rows, dataset features imply {}",
            units[bad].id,
            params[bad].dim(),
            expected
        ))));
    }
    Ok(params)
}

fn label_of(unit: &VisualUnit, task: Task) -> &str {
    match task {
        Task::Speech => &unit.labels.speech_class,
        Task::Speaker => &unit.labels.speaker,
    }
}

struct MOutcome {
    effective_m: usize,
    warnings: Vec<String>,
    /// (correct, total) per classifier, in config order.
    counts: Vec<(usize, usize)>,
}

struct FoldOutcome {
    train_size: usize,
    test_size: usize,
    omega: Option<f64>,
    per_m: Vec<MOutcome>,
}

#[allow(clippy::too_many_arguments)]
fn run_fold(
    units: &[VisualUnit],
    params: &[Parameterization],
    train_idx: &[usize],
    test_idx: &[usize],
    spec: &KernelSpec,
    task: Task,
    m_list: &[usize],
    classifiers: &[Classifier],
    knn_k: usize,
) -> CliResult<FoldOutcome> {
    let train_params: Vec<Parameterization> =
        train_idx.iter().map(|&i| params[i].clone()).collect();
    let gram = gram_matrix(&train_params, spec)?;
    let labels: Vec<String> = train_idx
        .iter()
        .map(|&i| label_of(&units[i], task).to_string())
        .collect();
    let mut vocabulary = labels.clone();
    vocabulary.sort();
    vocabulary.dedup();

    let rows: Vec<_> = test_idx
        .par_iter()
        .map(|&i| kernel_row(&params[i], &train_params, spec, gram.omega()))
        .collect::<mkpls::Result<_>>()?;
    let truth: Vec<&str> = test_idx
        .iter()
        .map(|&i| label_of(&units[i], task))
        .collect();

    let mut per_m = Vec::with_capacity(m_list.len());
    for &requested_m in m_list {
        let mut warnings = Vec::new();
        let cap = train_idx.len().saturating_sub(1);
        let m_fit = requested_m.min(cap);
        if m_fit < requested_m {
            warnings.push(format!("m = {requested_m} clamped to N-1 = {cap}"));
        }
        let model = KplsModel::fit(&gram, &labels, &vocabulary, m_fit, task)?;
        warnings.extend(model.warnings().iter().cloned());

        let latents: Vec<LatentPoint> = rows
            .par_iter()
            .map(|row| model.embed(row))
            .collect::<mkpls::Result<_>>()?;
        let train_latents: Vec<LatentPoint> = (0..train_idx.len())
            .map(|k| model.training_latent(k))
            .collect();

        let mut counts = Vec::with_capacity(classifiers.len());
        for classifier in classifiers {
            let k = knn_k.min(train_idx.len());
            let predictions: Vec<String> = latents
                .par_iter()
                .map(|point| {
                    Ok(match classifier {
                        Classifier::Rfc => rfc_predict(&model, point)?.label,
                        Classifier::Knn => {
                            knn_predict(&train_latents, &labels, &vocabulary, point, k)?.label
                        }
                    })
                })
                .collect::<mkpls::Result<_>>()?;
            let correct = predictions
                .iter()
                .zip(&truth)
                .filter(|(p, t)| p.as_str() == **t)
                .count();
            counts.push((correct, truth.len()));
        }
        per_m.push(MOutcome {
            effective_m: model.m(),
            warnings,
            counts,
        });
    }
    Ok(FoldOutcome {
        train_size: train_idx.len(),
        test_size: test_idx.len(),
        omega: gram.omega(),
        per_m,
    })
}

/// Run the full experiment grid and render the report.
pub fn run_eval(config: &ExperimentConfig) -> CliResult<EvalOutput> {
    config.validate()?;
    let raw_units = load_units(config)?;
    if raw_units.is_empty() {
        return Err(CliError::Data(mkpls::Error::InvalidInput(
            "dataset is empty".into(),
        )));
    }
    let needs_grid = config.protocols.iter().any(|p| p.repetition_based());
    let (units, mut warnings) = if needs_grid {
        normalize_repetitions(raw_units)
    } else {
        (raw_units, Vec::new())
    };
    if units.is_empty() {
        return Err(CliError::Data(mkpls::Error::InvalidInput(
            "dataset is empty after repetition trimming".into(),
        )));
    }

    let basis = config
        .basis
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let need_plain = config.kernels.iter().any(|k| !k.kind.needs_diff());
    let need_diff = config.kernels.iter().any(|k| k.kind.needs_diff());
    let params_dir = config.params_dir.as_deref();
    let plain = if need_plain {
        Some(obtain_params(&units, &basis, false, params_dir)?)
    } else {
        None
    };
    let diff = if need_diff {
        Some(obtain_params(&units, &basis, true, params_dir)?)
    } else {
        None
    };

    let index: HashMap<&str, usize> = units
        .iter()
        .enumerate()
        .map(|(i, u)| (u.id.as_str(), i))
        .collect();
    let mut cells = Vec::new();
    for protocol in &config.protocols {
        let folds = protocol.folds(&units)?;
        let task = protocol.task();
        let splits: Vec<(Vec<usize>, Vec<usize>)> = folds
            .iter()
            .map(|f| {
                (
                    f.train.iter().map(|id| index[id.as_str()]).collect(),
                    f.test.iter().map(|id| index[id.as_str()]).collect(),
                )
            })
            .collect();
        for spec in &config.kernels {
            let params = if spec.kind.needs_diff() {
                diff.as_ref()
            } else {
                plain.as_ref()
            }
            .unwrap();
            let outcomes: Vec<FoldOutcome> = splits
                .par_iter()
                .map(|(train, test)| {
                    run_fold(
                        &units,
                        params,
                        train,
                        test,
                        spec,
                        task,
                        &config.m,
                        &config.classifiers,
                        config.knn_k,
                    )
                })
                .collect::<CliResult<_>>()?;

            for (mi, &m) in config.m.iter().enumerate() {
                for (ci, classifier) in config.classifiers.iter().enumerate() {
                    let mut fold_logs = Vec::with_capacity(outcomes.len());
                    let mut correct = 0;
                    let mut total = 0;
                    for (fi, outcome) in outcomes.iter().enumerate() {
                        let m_out = &outcome.per_m[mi];
                        let (c, t) = m_out.counts[ci];
                        correct += c;
                        total += t;
                        fold_logs.push(FoldLog {
                            fold: fi,
                            train_size: outcome.train_size,
                            test_size: outcome.test_size,
                            omega: outcome.omega,
                            effective_m: m_out.effective_m,
                            correct: c,
                            total: t,
                            accuracy: c as f64 / t as f64,
                            warnings: m_out.warnings.clone(),
                        });
                    }
                    cells.push(CellLog {
                        protocol: protocol.name().to_string(),
                        classifier: classifier.name().to_string(),
                        kernel: spec.kind.to_string(),
                        m,
                        mean_accuracy: correct as f64 / total as f64,
                        folds: fold_logs,
                    });
                }
            }
        }
    }

    let summary = DatasetSummary {
        units: units.len(),
        classes: mkpls::datasets::speech_vocabulary(&units).len(),
        speakers: mkpls::datasets::speaker_vocabulary(&units).len(),
        feature_dim: units[0].features.dim(),
        seed: match (&config.dataset, config.seed) {
            (_, Some(seed)) => Some(seed),
            (DatasetSource::Synth(s), None) => Some(s.seed),
            _ => None,
        },
    };
    warnings.extend(cells.iter().flat_map(|c| {
        c.folds
            .iter()
            .flat_map(|f| f.warnings.iter().cloned())
            .collect::<Vec<_>>()
    }));
    warnings.sort();
    warnings.dedup();

    let report_csv = report::render_table(
        &config.protocols,
        &config.classifiers,
        &config.kernels,
        &config.m,
        &cells,
    );
    Ok(EvalOutput {
        report_csv,
        log: EvalLog {
            dataset: summary,
            warnings,
            cells,
        },
    })
}
