//! Labeled visual units: manifest loading, synthetic desk-scale data and
//! the three evaluation splits (SSD, SI, SpId).
//!
//! A dataset is a manifest CSV with header `id,path,speech_class,speaker,
//! repetition`; each row points to either a feature CSV (frames x D, no
//! header) or a directory of binary PGM frames named `frame_0001.pgm`
//! ascending. Paths are resolved relative to the manifest. Fields must not
//! contain commas.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{extract_sequence_features, read_pgm, FeatureSequence, GrayImage, LbpConfig};

/// The two class labels and the repetition index of one unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    pub speech_class: String,
    pub speaker: String,
    pub repetition: usize,
}

/// One labeled image sequence (viseme, word or phrase utterance).
#[derive(Debug, Clone, PartialEq)]
pub struct VisualUnit {
    pub id: String,
    pub features: FeatureSequence,
    pub labels: LabelSet,
}

/// One train/test split over unit ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

const MANIFEST_HEADER: &str = "id,path,speech_class,speaker,repetition";

fn manifest_err(path: &Path, row: usize, msg: impl Into<String>) -> Error {
    Error::Manifest {
        path: path.to_path_buf(),
        row,
        msg: msg.into(),
    }
}

/// Load a dataset from a manifest CSV. Rows referencing PGM frame
/// directories need an [`LbpConfig`] to extract features; rows referencing
/// feature CSVs load them directly. Feature dimensions must be uniform
/// across the dataset.
pub fn load_manifest(manifest: &Path, lbp: Option<&LbpConfig>) -> Result<Vec<VisualUnit>> {
    let text = fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == MANIFEST_HEADER => {}
        Some((_, header)) => {
            return Err(manifest_err(
                manifest,
                1,
                format!("bad header {header:?}, expected {MANIFEST_HEADER:?}"),
            ))
        }
        None => return Err(manifest_err(manifest, 1, "empty manifest")),
    }

    struct Row {
        row: usize,
        id: String,
        path: PathBuf,
        labels: LabelSet,
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let row = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(manifest_err(
                manifest,
                row,
                format!("expected 5 fields, got {}", fields.len()),
            ));
        }
        let repetition: usize = fields[4]
            .parse()
            .map_err(|_| manifest_err(manifest, row, format!("bad repetition {:?}", fields[4])))?;
        if fields[0].is_empty() {
            return Err(manifest_err(manifest, row, "empty id"));
        }
        if let Some(previous) = rows.iter().find(|r: &&Row| r.id == fields[0]) {
            return Err(manifest_err(
                manifest,
                row,
                format!(
                    "duplicate id {:?} (first seen at row {})",
                    fields[0], previous.row
                ),
            ));
        }
        rows.push(Row {
            row,
            id: fields[0].to_string(),
            path: base.join(fields[1]),
            labels: LabelSet {
                speech_class: fields[2].to_string(),
                speaker: fields[3].to_string(),
                repetition,
            },
        });
    }

    let units: Vec<VisualUnit> = rows
        .par_iter()
        .map(|r| {
            let features = if r.path.is_dir() {
                let config = lbp.ok_or_else(|| {
                    manifest_err(
                        manifest,
                        r.row,
                        format!(
                            "{:?} is a frame directory but no LBP config was given",
                            r.path
                        ),
                    )
                })?;
                load_frame_dir(&r.path, config)
            } else {
                FeatureSequence::read_csv(&r.path)
            }
            .map_err(|e| manifest_err(manifest, r.row, e.to_string()))?;
            Ok(VisualUnit {
                id: r.id.clone(),
                features,
                labels: r.labels.clone(),
            })
        })
        .collect::<Result<_>>()?;

    if let Some(first) = units.first() {
        let d = first.features.dim();
        if let Some(bad) = units.iter().position(|u| u.features.dim() != d) {
            return Err(manifest_err(
                manifest,
                rows[bad].row,
                format!(
                    "unit {:?} has feature dimension {}, expected {}",
                    units[bad].id,
                    units[bad].features.dim(),
                    d
                ),
            ));
        }
    }
    Ok(units)
}

/// Read `frame_*.pgm` files in lexicographic (hence numeric, given the
/// zero padding) order and extract their features.
fn load_frame_dir(dir: &Path, config: &LbpConfig) -> Result<FeatureSequence> {
    let mut names: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.starts_with("frame_") && n.ends_with(".pgm"))
                .unwrap_or(false)
        })
        .collect();
    names.sort();
    let frames: Vec<GrayImage> = names.iter().map(|p| read_pgm(p)).collect::<Result<_>>()?;
    extract_sequence_features(&frames, config)
}

/// Export a dataset in the manifest layout: `manifest.csv` plus
/// `features/<id>.csv` under `dir`. Returns the manifest path.
pub fn write_dataset(units: &[VisualUnit], dir: &Path) -> Result<PathBuf> {
    let features_dir = dir.join("features");
    fs::create_dir_all(&features_dir).map_err(|e| Error::io(&features_dir, e))?;
    let mut manifest = String::from(MANIFEST_HEADER);
    manifest.push('\n');
    for unit in units {
        let rel = format!("features/{}.csv", unit.id);
        unit.features.write_csv(&dir.join(&rel))?;
        manifest.push_str(&format!(
            "{},{},{},{},{}\n",
            unit.id, rel, unit.labels.speech_class, unit.labels.speaker, unit.labels.repetition
        ));
    }
    let manifest_path = dir.join("manifest.csv");
    fs::write(&manifest_path, manifest).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest_path)
}

/// Synthetic dataset shape: a full (class x speaker x repetition) grid of
/// smooth curves. Each class has a random order-3 trigonometric prototype
/// curve in R^D, each speaker a fixed affine deformation, each repetition
/// a fresh frame count and i.i.d. noise. Fully determined by the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub classes: usize,
    pub speakers: usize,
    pub repetitions: usize,
    pub frames_min: usize,
    pub frames_max: usize,
    pub dim: usize,
    #[serde(default = "default_separation")]
    pub class_separation: f64,
    #[serde(default)]
    pub speaker_deformation: f64,
    #[serde(default)]
    pub noise: f64,
    pub seed: u64,
}

fn default_separation() -> f64 {
    1.0
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.classes == 0 || self.speakers == 0 || self.repetitions == 0 {
            return Err(Error::invalid(
                "classes, speakers and repetitions must be at least 1",
            ));
        }
        if self.frames_min < 2 || self.frames_min > self.frames_max {
            return Err(Error::invalid(format!(
                "frame range [{}, {}] must satisfy 2 <= min <= max",
                self.frames_min, self.frames_max
            )));
        }
        if self.dim == 0 {
            return Err(Error::invalid("dim must be at least 1"));
        }
        for (name, v) in [
            ("class_separation", self.class_separation),
            ("speaker_deformation", self.speaker_deformation),
            ("noise", self.noise),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

const HARMONICS: usize = 3;

struct Prototype {
    /// cos coefficients, harmonics 0..=3 per dimension.
    cos: Vec<[f64; HARMONICS + 1]>,
    /// sin coefficients, harmonics 1..=3 per dimension.
    sin: Vec<[f64; HARMONICS]>,
}

impl Prototype {
    fn sample(rng: &mut ChaCha8Rng, dim: usize) -> Self {
        let mut cos = Vec::with_capacity(dim);
        let mut sin = Vec::with_capacity(dim);
        for _ in 0..dim {
            let mut c = [0.0; HARMONICS + 1];
            for v in c.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            let mut s = [0.0; HARMONICS];
            for v in s.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            cos.push(c);
            sin.push(s);
        }
        Prototype { cos, sin }
    }

    fn eval(&self, z: f64, scale: f64) -> DVector<f64> {
        DVector::from_fn(self.cos.len(), |d, _| {
            let mut acc = 0.0;
            for (h, c) in self.cos[d].iter().enumerate() {
                acc += c * (2.0 * std::f64::consts::PI * h as f64 * z).cos();
            }
            for (h, s) in self.sin[d].iter().enumerate() {
                acc += s * (2.0 * std::f64::consts::PI * (h + 1) as f64 * z).sin();
            }
            scale * acc
        })
    }
}

struct Deformation {
    w: DMatrix<f64>,
    b: DVector<f64>,
    scale: f64,
}

impl Deformation {
    fn sample(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Self {
        let sqrt_d = (dim as f64).sqrt();
        let w = DMatrix::from_fn(dim, dim, |_, _| {
            rng.sample::<f64, _>(StandardNormal) / sqrt_d
        });
        let b = DVector::from_fn(dim, |_, _| rng.sample(StandardNormal));
        Deformation { w, b, scale }
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        x + (&self.w * x + &self.b) * self.scale
    }
}

/// Generate the full label grid. Units are emitted in (class, speaker,
/// repetition) order with ids `c<class>_p<speaker>_r<repetition>`.
pub fn synth_generate(config: &SynthConfig) -> Result<Vec<VisualUnit>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let prototypes: Vec<Prototype> = (0..config.classes)
        .map(|_| Prototype::sample(&mut rng, config.dim))
        .collect();
    let deformations: Vec<Deformation> = (0..config.speakers)
        .map(|_| Deformation::sample(&mut rng, config.dim, config.speaker_deformation))
        .collect();

    let mut units = Vec::with_capacity(config.classes * config.speakers * config.repetitions);
    for (class, proto) in prototypes.iter().enumerate() {
        for (speaker, deform) in deformations.iter().enumerate() {
            for rep in 0..config.repetitions {
                let frames = rng.gen_range(config.frames_min..=config.frames_max);
                let rows: Vec<Vec<f64>> = (0..frames)
                    .map(|i| {
                        let z = i as f64 / (frames - 1) as f64;
                        let clean = deform.apply(&proto.eval(z, config.class_separation));
                        (0..config.dim)
                            .map(|d| clean[d] + config.noise * rng.sample::<f64, _>(StandardNormal))
                            .collect()
                    })
                    .collect();
                units.push(VisualUnit {
                    id: format!("c{class:02}_p{speaker:02}_r{rep:02}"),
                    features: FeatureSequence::from_rows(rows)?,
                    labels: LabelSet {
                        speech_class: format!("c{class:02}"),
                        speaker: format!("p{speaker:02}"),
                        repetition: rep,
                    },
                });
            }
        }
    }
    Ok(units)
}

/// Sorted distinct speech classes.
pub fn speech_vocabulary(units: &[VisualUnit]) -> Vec<String> {
    let mut v: Vec<String> = units
        .iter()
        .map(|u| u.labels.speech_class.clone())
        .collect();
    v.sort();
    v.dedup();
    v
}

/// Sorted distinct speaker ids.
pub fn speaker_vocabulary(units: &[VisualUnit]) -> Vec<String> {
    let mut v: Vec<String> = units.iter().map(|u| u.labels.speaker.clone()).collect();
    v.sort();
    v.dedup();
    v
}

/// The sorted distinct repetition indices every (speaker, class) pair must
/// carry for the repetition-based splits.
fn repetition_grid(units: &[VisualUnit]) -> Result<Vec<usize>> {
    let mut global: Vec<usize> = units.iter().map(|u| u.labels.repetition).collect();
    global.sort_unstable();
    global.dedup();

    let mut groups: BTreeMap<(&str, &str), Vec<usize>> = BTreeMap::new();
    for u in units {
        groups
            .entry((u.labels.speaker.as_str(), u.labels.speech_class.as_str()))
            .or_default()
            .push(u.labels.repetition);
    }
    let mut offenders = Vec::new();
    for ((speaker, class), mut reps) in groups {
        reps.sort_unstable();
        if reps != global {
            offenders.push(format!("({speaker}, {class}) has repetitions {reps:?}"));
        }
    }
    if !offenders.is_empty() {
        return Err(Error::invalid(format!(
            "ragged repetitions (expected {global:?} for every (speaker, class) pair): {}",
            offenders.join("; ")
        )));
    }
    if global.len() < 2 {
        return Err(Error::invalid(format!(
            "repetition-based splits need at least 2 repetitions, got {}",
            global.len()
        )));
    }
    Ok(global)
}

/// Speaker-semi-dependent split: R folds, fold r tests exactly repetition
/// r of every (speaker, class) pair and trains on the rest.
pub fn ssd_folds(units: &[VisualUnit]) -> Result<Vec<Fold>> {
    if units.is_empty() {
        return Err(Error::invalid("empty dataset"));
    }
    let grid = repetition_grid(units)?;
    Ok(grid
        .iter()
        .map(|&rep| {
            let (test, train) = units
                .iter()
                .map(|u| u.id.clone())
                .zip(units.iter().map(|u| u.labels.repetition == rep))
                .partition::<Vec<_>, _>(|(_, is_test)| *is_test);
            Fold {
                train: train.into_iter().map(|(id, _)| id).collect(),
                test: test.into_iter().map(|(id, _)| id).collect(),
            }
        })
        .collect())
}

/// Speaker-independent split: one fold per speaker, testing all of that
/// speaker's units.
pub fn si_folds(units: &[VisualUnit]) -> Result<Vec<Fold>> {
    if units.is_empty() {
        return Err(Error::invalid("empty dataset"));
    }
    let speakers = speaker_vocabulary(units);
    if speakers.len() < 2 {
        return Err(Error::invalid(
            "speaker-independent evaluation needs at least 2 speakers",
        ));
    }
    Ok(speakers
        .iter()
        .map(|speaker| {
            let mut train = Vec::new();
            let mut test = Vec::new();
            for u in units {
                if &u.labels.speaker == speaker {
                    test.push(u.id.clone());
                } else {
                    train.push(u.id.clone());
                }
            }
            Fold { train, test }
        })
        .collect())
}

/// Speaker-identification split: the same partition as [`ssd_folds`];
/// evaluation targets the speaker label instead of the speech class.
pub fn spid_folds(units: &[VisualUnit]) -> Result<Vec<Fold>> {
    ssd_folds(units)
}

/// Fraction of correctly recognized clips.
pub fn accuracy(predictions: &[String], truth: &[String]) -> Result<f64> {
    if predictions.is_empty() || predictions.len() != truth.len() {
        return Err(Error::invalid(format!(
            "need equal nonempty prediction/truth lists, got {} and {}",
            predictions.len(),
            truth.len()
        )));
    }
    let correct = predictions
        .iter()
        .zip(truth)
        .filter(|(p, t)| p == t)
        .count();
    Ok(correct as f64 / predictions.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn small_config() -> SynthConfig {
        SynthConfig {
            classes: 3,
            speakers: 5,
            repetitions: 3,
            frames_min: 6,
            frames_max: 9,
            dim: 4,
            class_separation: 1.0,
            speaker_deformation: 0.1,
            noise: 0.05,
            seed: 42,
        }
    }

    #[test]
    fn synth_covers_the_label_grid() {
        let units = synth_generate(&small_config()).unwrap();
        assert_eq!(units.len(), 45);
        let keys: HashSet<(String, String, usize)> = units
            .iter()
            .map(|u| {
                (
                    u.labels.speech_class.clone(),
                    u.labels.speaker.clone(),
                    u.labels.repetition,
                )
            })
            .collect();
        assert_eq!(keys.len(), 45);
        assert_eq!(speech_vocabulary(&units).len(), 3);
        assert_eq!(speaker_vocabulary(&units).len(), 5);
    }

    #[test]
    fn synth_is_seed_deterministic() {
        let a = synth_generate(&small_config()).unwrap();
        let b = synth_generate(&small_config()).unwrap();
        assert_eq!(a, b);
        let different = synth_generate(&SynthConfig {
            seed: 43,
            ..small_config()
        })
        .unwrap();
        assert_ne!(a, different);
    }

    #[test]
    fn synth_without_variation_repeats_units() {
        let config = SynthConfig {
            frames_min: 7,
            frames_max: 7,
            speaker_deformation: 0.0,
            noise: 0.0,
            ..small_config()
        };
        let units = synth_generate(&config).unwrap();
        for class in ["c00", "c01", "c02"] {
            let of_class: Vec<_> = units
                .iter()
                .filter(|u| u.labels.speech_class == class)
                .collect();
            assert_eq!(of_class.len(), 15);
            for u in &of_class[1..] {
                assert_eq!(u.features, of_class[0].features, "unit {} differs", u.id);
            }
        }
    }

    #[test]
    fn dataset_round_trips_through_disk() {
        let units = synth_generate(&small_config()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_dataset(&units, dir.path()).unwrap();
        let back = load_manifest(&manifest, None).unwrap();
        assert_eq!(units, back);
    }

    #[test]
    fn manifest_errors_carry_row_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.csv");

        std::fs::write(&path, "id,path,speech_class,speaker,repetition\n").unwrap();
        assert!(load_manifest(&path, None).unwrap().is_empty());

        std::fs::write(&path, "wrong,header\n").unwrap();
        assert!(load_manifest(&path, None)
            .unwrap_err()
            .to_string()
            .contains("row 1"));

        let seq = FeatureSequence::from_rows(vec![vec![1.0, 2.0]; 5]).unwrap();
        seq.write_csv(&dir.path().join("u.csv")).unwrap();
        std::fs::write(
            &path,
            "id,path,speech_class,speaker,repetition\na,u.csv,c0,p0,0\n",
        )
        .unwrap();
        let units = load_manifest(&path, None).unwrap();
        assert_eq!(units.len(), 1);
        assert_eq!(units[0].features.len(), 5);

        std::fs::write(
            &path,
            "id,path,speech_class,speaker,repetition\na,u.csv,c0,p0,0\na,u.csv,c0,p0,1\n",
        )
        .unwrap();
        let err = load_manifest(&path, None).unwrap_err().to_string();
        assert!(
            err.contains("row 3") && err.contains("duplicate id"),
            "error was: {err}"
        );

        std::fs::write(
            &path,
            "id,path,speech_class,speaker,repetition\na,missing.csv,c0,p0,0\n",
        )
        .unwrap();
        assert!(load_manifest(&path, None).is_err());

        // ragged feature dimensions across units
        let other = FeatureSequence::from_rows(vec![vec![1.0, 2.0, 3.0]; 4]).unwrap();
        other.write_csv(&dir.path().join("v.csv")).unwrap();
        std::fs::write(
            &path,
            "id,path,speech_class,speaker,repetition\na,u.csv,c0,p0,0\nb,v.csv,c0,p0,1\n",
        )
        .unwrap();
        let err = load_manifest(&path, None).unwrap_err().to_string();
        assert!(
            err.contains("row 3") && err.contains("dimension"),
            "error was: {err}"
        );
    }

    fn fold_invariants(units: &[VisualUnit], folds: &[Fold]) {
        let all: HashSet<&String> = units.iter().map(|u| &u.id).collect();
        let mut tested: Vec<&String> = Vec::new();
        for fold in folds {
            let train: HashSet<&String> = fold.train.iter().collect();
            let test: HashSet<&String> = fold.test.iter().collect();
            assert!(train.is_disjoint(&test), "train and test overlap");
            assert_eq!(
                train.len() + test.len(),
                all.len(),
                "fold does not cover the dataset"
            );
            tested.extend(fold.test.iter());
        }
        let tested_set: HashSet<&String> = tested.iter().copied().collect();
        assert_eq!(tested.len(), tested_set.len(), "a unit was tested twice");
        assert_eq!(tested_set, all, "some unit never tested");
    }

    #[test]
    fn ssd_folds_partition_by_repetition() {
        let units = synth_generate(&small_config()).unwrap();
        let folds = ssd_folds(&units).unwrap();
        assert_eq!(folds.len(), 3);
        fold_invariants(&units, &folds);
        let by_id: BTreeMap<&str, &VisualUnit> = units.iter().map(|u| (u.id.as_str(), u)).collect();
        for fold in &folds {
            assert_eq!(fold.test.len(), 15); // K * L
                                             // every speaker and class still present in training
            let speakers: HashSet<&str> = fold
                .train
                .iter()
                .map(|id| by_id[id.as_str()].labels.speaker.as_str())
                .collect();
            let classes: HashSet<&str> = fold
                .train
                .iter()
                .map(|id| by_id[id.as_str()].labels.speech_class.as_str())
                .collect();
            assert_eq!(speakers.len(), 5);
            assert_eq!(classes.len(), 3);
            // the fold tests exactly one repetition
            let reps: HashSet<usize> = fold
                .test
                .iter()
                .map(|id| by_id[id.as_str()].labels.repetition)
                .collect();
            assert_eq!(reps.len(), 1);
        }
    }

    #[test]
    fn ssd_rejects_ragged_repetitions() {
        let mut units = synth_generate(&small_config()).unwrap();
        units.remove(0);
        let err = ssd_folds(&units).unwrap_err().to_string();
        assert!(err.contains("ragged repetitions"), "error was: {err}");
    }

    #[test]
    fn si_folds_hold_one_speaker_out() {
        let units = synth_generate(&small_config()).unwrap();
        let folds = si_folds(&units).unwrap();
        assert_eq!(folds.len(), 5);
        fold_invariants(&units, &folds);
        let by_id: BTreeMap<&str, &VisualUnit> = units.iter().map(|u| (u.id.as_str(), u)).collect();
        for fold in &folds {
            let test_speakers: HashSet<&str> = fold
                .test
                .iter()
                .map(|id| by_id[id.as_str()].labels.speaker.as_str())
                .collect();
            assert_eq!(test_speakers.len(), 1);
            let train_speakers: HashSet<&str> = fold
                .train
                .iter()
                .map(|id| by_id[id.as_str()].labels.speaker.as_str())
                .collect();
            assert!(!train_speakers.contains(test_speakers.iter().next().unwrap()));
            // every class still present in training
            let classes: HashSet<&str> = fold
                .train
                .iter()
                .map(|id| by_id[id.as_str()].labels.speech_class.as_str())
                .collect();
            assert_eq!(classes.len(), 3);
        }
    }

    #[test]
    fn si_rejects_single_speaker() {
        let units = synth_generate(&SynthConfig {
            speakers: 1,
            ..small_config()
        })
        .unwrap();
        assert!(si_folds(&units).is_err());
    }

    #[test]
    fn spid_matches_ssd_partition() {
        let units = synth_generate(&small_config()).unwrap();
        assert_eq!(spid_folds(&units).unwrap(), ssd_folds(&units).unwrap());
    }

    #[test]
    fn accuracy_examples() {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(accuracy(&s(&["a", "b"]), &s(&["a", "b"])).unwrap(), 1.0);
        assert_eq!(accuracy(&s(&["a", "b"]), &s(&["b", "a"])).unwrap(), 0.0);
        assert_eq!(
            accuracy(&s(&["a", "b", "c", "d"]), &s(&["a", "b", "c", "x"])).unwrap(),
            0.75
        );
        assert!(accuracy(&[], &[]).is_err());
    }
}
