//! Experiment configuration: a JSON file plus flag overrides.

use std::path::PathBuf;
use std::str::FromStr;

use mkpls::datasets::{si_folds, spid_folds, ssd_folds, Fold, SynthConfig, VisualUnit};
use mkpls::features::LbpConfig;
use mkpls::kernels::KernelSpec;
use mkpls::kpls::Task;
use mkpls::manifold::BasisOptions;
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

/// Where the units come from: a manifest on disk or a synthetic grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetSource {
    Manifest(PathBuf),
    Synth(SynthConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Ssd,
    Si,
    Spid,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Ssd => "SSD",
            Protocol::Si => "SI",
            Protocol::Spid => "SpId",
        }
    }

    /// SSD and SI recognize speech; SpId identifies the speaker.
    pub fn task(self) -> Task {
        match self {
            Protocol::Ssd | Protocol::Si => Task::Speech,
            Protocol::Spid => Task::Speaker,
        }
    }

    /// Whether the split is repetition-based (needs a rectangular
    /// repetition grid).
    pub fn repetition_based(self) -> bool {
        matches!(self, Protocol::Ssd | Protocol::Spid)
    }

    pub fn folds(self, units: &[VisualUnit]) -> mkpls::Result<Vec<Fold>> {
        match self {
            Protocol::Ssd => ssd_folds(units),
            Protocol::Si => si_folds(units),
            Protocol::Spid => spid_folds(units),
        }
    }
}

impl FromStr for Protocol {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ssd" => Ok(Protocol::Ssd),
            "si" => Ok(Protocol::Si),
            "spid" => Ok(Protocol::Spid),
            _ => Err(CliError::Config(format!(
                "unknown protocol {s:?} (expected ssd, si or spid)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classifier {
    Rfc,
    Knn,
}

impl Classifier {
    pub fn name(self) -> &'static str {
        match self {
            Classifier::Rfc => "rfc",
            Classifier::Knn => "knn",
        }
    }
}

impl FromStr for Classifier {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rfc" => Ok(Classifier::Rfc),
            "knn" => Ok(Classifier::Knn),
            _ => Err(CliError::Config(format!(
                "unknown classifier {s:?} (expected rfc or knn)"
            ))),
        }
    }
}

fn default_classifiers() -> Vec<Classifier> {
    vec![Classifier::Rfc, Classifier::Knn]
}

fn default_knn_k() -> usize {
    1
}

/// The full experiment grid for `mkpls eval`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    /// Needed when the manifest references PGM frame directories.
    #[serde(default)]
    pub lbp: Option<LbpConfig>,
    #[serde(default)]
    pub basis: BasisOptions,
    pub kernels: Vec<KernelSpec>,
    /// Latent dimensionalities to sweep.
    pub m: Vec<usize>,
    pub protocols: Vec<Protocol>,
    #[serde(default = "default_classifiers")]
    pub classifiers: Vec<Classifier>,
    #[serde(default = "default_knn_k")]
    pub knn_k: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Overrides the synthetic dataset seed when present.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Load precomputed parameterizations instead of fitting.
    #[serde(default)]
    pub params_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("bad experiment config: {e}")))
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.kernels.is_empty() {
            return Err(CliError::Config("at least one kernel is required".into()));
        }
        for spec in &self.kernels {
            spec.validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        if self.m.is_empty() || self.m.contains(&0) {
            return Err(CliError::Config(
                "m values must be a nonempty list of positive integers".into(),
            ));
        }
        if self.protocols.is_empty() {
            return Err(CliError::Config("at least one protocol is required".into()));
        }
        if self.knn_k == 0 {
            return Err(CliError::Config("knn_k must be at least 1".into()));
        }
        if let Some(basis_err) = self.basis.build().err() {
            return Err(CliError::Config(basis_err.to_string()));
        }
        if let Some(lbp) = &self.lbp {
            lbp.validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        if let DatasetSource::Synth(synth) = &self.dataset {
            synth
                .validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(())
    }
}
