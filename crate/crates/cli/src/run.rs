//! On-disk layout of one training run.

use std::path::{Path, PathBuf};

use ganbench::metrics::{
    ClassifierBackend, EvalConfig, MetricSnapshot, NetworkClassifier, PairScore,
    ProjectionClassifier,
};
use ganbench::models::{ArchitectureConfig, ModelFamily};
use ganbench::train::Hyperparameters;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const RUN_FILE: &str = "run.json";
pub const TRAINING_LOG: &str = "training_log.csv";
pub const PER_IMAGE_METRICS: &str = "per_image_metrics.csv";
pub const CHECKPOINT_DIR: &str = "checkpoints";
pub const EVALUATION_FILE: &str = "evaluation.json";

/// Where the run's data came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRef {
    /// Manifest path relative to the run directory.
    pub manifest: String,
    pub dataset_id: String,
    pub data_hash: Option<String>,
    pub resolution: [usize; 2],
    pub n_train: usize,
    pub n_test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierRef {
    pub descriptor: String,
    /// Weights archive as written in the config; absent for the built-in
    /// projection stand-in.
    pub path: Option<String>,
}

/// Contents of `run.json`. Paths are relative to the run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub run_id: String,
    pub family: ModelFamily,
    pub seed: u64,
    pub master_seed: u64,
    pub config_hash: String,
    pub dataset: DatasetRef,
    pub hyper: Hyperparameters,
    pub architecture: ArchitectureConfig,
    pub eval: EvalConfig,
    pub classifier: ClassifierRef,
    pub epochs_completed: usize,
    pub generator_updates: usize,
    pub critic_updates: usize,
    pub final_snapshot: MetricSnapshot,
    pub training_log: String,
    pub per_image_metrics: String,
    pub final_checkpoint: Option<String>,
    pub wall_time_s: Option<f64>,
}

impl RunFile {
    pub fn read(run_dir: &Path) -> Result<Self, CliError> {
        let path = run_dir.join(RUN_FILE);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Report(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Report(format!("{}: {e}", path.display())))
    }
}

/// Classifier used for the Inception Score: the configured network, or the
/// projection stand-in.
pub fn load_classifier(path: Option<&Path>) -> Result<Box<dyn ClassifierBackend>, CliError> {
    match path {
        Some(p) => {
            Ok(Box::new(NetworkClassifier::load(p).map_err(|e| {
                CliError::Config(format!("metrics.classifier: {e}"))
            })?))
        }
        None => Ok(Box::new(ProjectionClassifier::default())),
    }
}

pub fn write_per_image_metrics(pairs: &[PairScore], path: &Path) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["generated", "reference_id", "ssim", "psnr", "psnr_exact"])?;
    for p in pairs {
        w.write_record([
            p.generated.to_string(),
            p.reference_id.clone(),
            p.ssim.to_string(),
            p.psnr.to_string(),
            p.psnr_exact.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_per_image_metrics(path: &Path) -> Result<Vec<PairScore>, CliError> {
    let bad = |e: &dyn std::fmt::Display| CliError::Report(format!("{}: {e}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(&e))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(&e))?;
        if rec.len() != 5 {
            return Err(bad(&format!("expected 5 columns, found {}", rec.len())));
        }
        out.push(PairScore {
            generated: rec[0].parse().map_err(|e| bad(&e))?,
            reference_id: rec[1].to_string(),
            ssim: rec[2].parse().map_err(|e| bad(&e))?,
            psnr: rec[3].parse().map_err(|e| bad(&e))?,
            psnr_exact: rec[4].parse().map_err(|e| bad(&e))?,
        });
    }
    Ok(out)
}

/// `path` relative to `base` when it lies below it, else unchanged.
pub fn relative_to(path: &Path, base: &Path) -> PathBuf {
    path.strip_prefix(base)
        .map(Path::to_path_buf)
        .unwrap_or_else(|_| path.to_path_buf())
}

/// A path as a `/`-separated string, so artifacts match across platforms.
pub fn portable(path: &Path) -> String {
    path.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}
