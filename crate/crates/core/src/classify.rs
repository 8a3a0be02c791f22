//! Label inference in the latent space: regression-for-classification and
//! K-nearest-neighbor.

use crate::error::{Error, Result};
use crate::kpls::{KplsModel, LatentPoint};

/// A predicted label with its per-class score vector; the label is always
/// the argmax, ties resolved toward the lowest class index.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: String,
    pub scores: Vec<f64>,
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in scores.iter().enumerate() {
        if *v > scores[best] {
            best = i;
        }
    }
    best
}

/// Regression-for-classification: `scores = t T' Y` plus the stored target
/// column means (so a zero score vector falls back to the majority class),
/// argmax over the model's classes.
pub fn rfc_predict(model: &KplsModel, t: &LatentPoint) -> Result<Prediction> {
    if t.task != model.task() {
        return Err(Error::invalid(format!(
            "latent point belongs to the {} task, model is {}",
            t.task,
            model.task()
        )));
    }
    if t.values.len() != model.m() {
        return Err(Error::invalid(format!(
            "latent point has {} components, model has {}",
            t.values.len(),
            model.m()
        )));
    }
    // t T' Y = Y' (T t), evaluated right to left
    let tt = model.scores() * &t.values;
    let raw = model.targets().transpose() * tt;
    let scores: Vec<f64> = raw
        .iter()
        .zip(model.target_means().iter())
        .map(|(s, mu)| s + mu)
        .collect();
    let best = argmax(&scores);
    Ok(Prediction {
        label: model.vocabulary()[best].clone(),
        scores,
    })
}

/// Majority vote among the k Euclidean-nearest training latents. Distance
/// ties prefer the lower training index, vote ties the lowest class index;
/// scores are the vote counts per class.
pub fn knn_predict(
    train_latents: &[LatentPoint],
    train_labels: &[String],
    vocabulary: &[String],
    t: &LatentPoint,
    k: usize,
) -> Result<Prediction> {
    if train_latents.is_empty() {
        return Err(Error::invalid("KNN needs a nonempty training set"));
    }
    if train_latents.len() != train_labels.len() {
        return Err(Error::invalid(format!(
            "{} latents for {} labels",
            train_latents.len(),
            train_labels.len()
        )));
    }
    if k == 0 || k > train_latents.len() {
        return Err(Error::invalid(format!(
            "k must satisfy 1 <= k <= {}, got {k}",
            train_latents.len()
        )));
    }
    let mut order: Vec<(f64, usize)> = train_latents
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if p.values.len() != t.values.len() || p.task != t.task {
                return Err(Error::invalid(format!(
                    "training latent {i} is incompatible with the query point"
                )));
            }
            Ok(((&p.values - &t.values).norm(), i))
        })
        .collect::<Result<_>>()?;
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut scores = vec![0.0; vocabulary.len()];
    for &(_, idx) in order.iter().take(k) {
        let label = &train_labels[idx];
        let class = vocabulary
            .iter()
            .position(|v| v == label)
            .ok_or_else(|| Error::invalid(format!("label {label:?} not in vocabulary")))?;
        scores[class] += 1.0;
    }
    let best = argmax(&scores);
    Ok(Prediction {
        label: vocabulary[best].clone(),
        scores,
    })
}
