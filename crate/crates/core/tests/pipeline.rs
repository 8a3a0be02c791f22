//! Cross-module behavior of the full manifold -> kernel -> KPLS -> RfC
//! chain on synthetic data.

use mkpls::classify::rfc_predict;
use mkpls::datasets::{
    accuracy, speech_vocabulary, ssd_folds, synth_generate, SynthConfig, VisualUnit,
};
use mkpls::kernels::{gram_matrix, kernel_row, KernelKind, KernelSpec};
use mkpls::kpls::{KplsModel, Task};
use mkpls::manifold::{fit_parameterization, BasisConfig, Parameterization};

fn fit_all(units: &[VisualUnit], basis: &BasisConfig) -> Vec<Parameterization> {
    units
        .iter()
        .map(|u| fit_parameterization(&u.features, basis).unwrap())
        .collect()
}

/// RfC accuracy when predicting the training units themselves.
fn training_rfc_accuracy(units: &[VisualUnit], m: usize) -> f64 {
    let basis = BasisConfig::new(8).unwrap();
    let params = fit_all(units, &basis);
    let spec = KernelSpec::new(KernelKind::Euclid);
    let gram = gram_matrix(&params, &spec).unwrap();
    let labels: Vec<String> = units
        .iter()
        .map(|u| u.labels.speech_class.clone())
        .collect();
    let model = KplsModel::fit(&gram, &labels, &speech_vocabulary(units), m, Task::Speech).unwrap();

    let predictions: Vec<String> = params
        .iter()
        .map(|p| {
            let row = kernel_row(p, &params, &spec, gram.omega()).unwrap();
            rfc_predict(&model, &model.embed(&row).unwrap())
                .unwrap()
                .label
        })
        .collect();
    accuracy(&predictions, &labels).unwrap()
}

/// Pooled SSD speech accuracy over all folds with the Euclid kernel.
fn ssd_accuracy(units: &[VisualUnit], m: usize) -> f64 {
    let basis = BasisConfig::new(8).unwrap();
    let params = fit_all(units, &basis);
    let spec = KernelSpec::new(KernelKind::Euclid);
    let index: std::collections::HashMap<&str, usize> = units
        .iter()
        .enumerate()
        .map(|(i, u)| (u.id.as_str(), i))
        .collect();

    let mut correct = 0;
    let mut total = 0;
    for fold in ssd_folds(units).unwrap() {
        let train_idx: Vec<usize> = fold.train.iter().map(|id| index[id.as_str()]).collect();
        let train_params: Vec<Parameterization> =
            train_idx.iter().map(|&i| params[i].clone()).collect();
        let train_units: Vec<VisualUnit> = train_idx.iter().map(|&i| units[i].clone()).collect();
        let labels: Vec<String> = train_units
            .iter()
            .map(|u| u.labels.speech_class.clone())
            .collect();
        let gram = gram_matrix(&train_params, &spec).unwrap();
        let model = KplsModel::fit(
            &gram,
            &labels,
            &speech_vocabulary(&train_units),
            m,
            Task::Speech,
        )
        .unwrap();
        for id in &fold.test {
            let unit = &units[index[id.as_str()]];
            let row = kernel_row(
                &params[index[id.as_str()]],
                &train_params,
                &spec,
                gram.omega(),
            )
            .unwrap();
            let pred = rfc_predict(&model, &model.embed(&row).unwrap()).unwrap();
            if pred.label == unit.labels.speech_class {
                correct += 1;
            }
            total += 1;
        }
    }
    correct as f64 / total as f64
}

#[test]
fn training_accuracy_is_monotone_in_m() {
    let units = synth_generate(&SynthConfig {
        classes: 4,
        speakers: 3,
        repetitions: 3,
        frames_min: 8,
        frames_max: 12,
        dim: 6,
        class_separation: 1.0,
        speaker_deformation: 0.3,
        noise: 0.8,
        seed: 1234,
    })
    .unwrap();
    let accuracies: Vec<f64> = (1..=5).map(|m| training_rfc_accuracy(&units, m)).collect();
    for w in accuracies.windows(2) {
        assert!(w[1] >= w[0], "training accuracy dropped: {accuracies:?}");
    }
}

#[test]
fn cleaner_class_structure_never_hurts_ssd_accuracy() {
    let config = |separation: f64| SynthConfig {
        classes: 3,
        speakers: 4,
        repetitions: 3,
        frames_min: 8,
        frames_max: 12,
        dim: 6,
        class_separation: separation,
        speaker_deformation: 0.5,
        noise: 0.0,
        seed: 77,
    };
    let low = ssd_accuracy(&synth_generate(&config(0.05)).unwrap(), 5);
    let high = ssd_accuracy(&synth_generate(&config(1.5)).unwrap(), 5);
    assert!(
        high >= low,
        "separation 1.5 scored {high}, below {low} at 0.05"
    );
    assert!(
        high > 0.95,
        "well-separated data should be nearly perfect, got {high}"
    );
}
