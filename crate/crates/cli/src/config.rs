//! The TOML benchmark configuration. One file fully determines a benchmark.

use std::path::{Path, PathBuf};

use ganbench::data::{Modality, Normalization};
use ganbench::metrics::{EvalConfig, Pairing, DEFAULT_SPLITS};
use ganbench::models::{ArchitectureConfig, ModelFamily};
use ganbench::stats::DEFAULT_ALPHAS;
use ganbench::train::{GeneratorObjective, Hyperparameters, Optimizer};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Environment variable overriding `output_dir`.
pub const OUTPUT_ENV: &str = "GANBENCH_OUTPUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    /// Root of every artifact; relative paths resolve against the config file.
    pub output_dir: PathBuf,
    /// Master seed; family `i` trains with `seed + i`.
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub dataset: DatasetSection,
    #[serde(default)]
    pub architecture: ArchitectureConfig,
    #[serde(default)]
    pub hyper: HyperSection,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub metrics: MetricsSection,
    #[serde(default)]
    pub stats: StatsSection,
}

fn default_seed() -> u64 {
    7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    /// DICOM studies under `<root>/<modality>/*.dcm`.
    pub source: Option<SourceSpec>,
    /// Seeded phantom images instead of DICOM input.
    pub synthetic: Option<SyntheticSpec>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_ratio")]
    pub split_ratio: f64,
    #[serde(default = "default_split_seed")]
    pub split_seed: u64,
    #[serde(default)]
    pub normalization: Normalization,
}

fn default_resolution() -> usize {
    64
}

fn default_ratio() -> f64 {
    0.7
}

fn default_split_seed() -> u64 {
    42
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub root: PathBuf,
    pub modality: Modality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n: usize,
    #[serde(default = "default_synthetic_seed")]
    pub seed: u64,
}

fn default_synthetic_seed() -> u64 {
    1
}

/// Optional replacements for the published per-family hyperparameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperOverrides {
    pub latent_dim: Option<usize>,
    pub batch_size: Option<usize>,
    pub epochs: Option<usize>,
    pub lr_generator: Option<f64>,
    pub lr_discriminator: Option<f64>,
    pub optimizer: Option<Optimizer>,
    pub adam_beta1: Option<f64>,
    pub adam_beta2: Option<f64>,
    pub adam_eps: Option<f64>,
    pub clip_c: Option<f64>,
    pub n_critic: Option<usize>,
    pub generator_objective: Option<GeneratorObjective>,
}

impl HyperOverrides {
    fn apply(&self, h: &mut Hyperparameters) {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f.clone() { h.$f = v; })* };
        }
        set!(
            latent_dim,
            batch_size,
            epochs,
            lr_generator,
            lr_discriminator,
            optimizer,
            adam_beta1,
            adam_beta2,
            adam_eps,
            clip_c,
            n_critic,
            generator_objective
        );
    }
}

/// `[hyper.all]` applies to every family, then `[hyper.<family>]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperSection {
    pub all: HyperOverrides,
    pub vanilla: HyperOverrides,
    pub dcgan: HyperOverrides,
    pub wgan: HyperOverrides,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub families: Vec<ModelFamily>,
    /// Periodic checkpoint interval in epochs; 0 keeps only the final one.
    pub checkpoint_every: usize,
    /// Train the selected families on parallel threads.
    pub concurrent: bool,
    /// Record elapsed seconds in `run.json` (makes it non-reproducible).
    pub record_wall_time: bool,
}

impl Default for TrainingSection {
    fn default() -> Self {
        Self {
            families: ModelFamily::ALL.to_vec(),
            checkpoint_every: 0,
            concurrent: true,
            record_wall_time: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSection {
    pub pairing: Pairing,
    /// Weights archive of a classification network for the Inception Score.
    /// Without it a fixed random-projection stand-in is used.
    pub classifier: Option<PathBuf>,
    pub n_splits: usize,
    pub eval_every: usize,
}

impl Default for MetricsSection {
    fn default() -> Self {
        Self {
            pairing: Pairing::Index,
            classifier: None,
            n_splits: DEFAULT_SPLITS,
            eval_every: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSection {
    pub alphas: Vec<f64>,
}

impl Default for StatsSection {
    fn default() -> Self {
        Self {
            alphas: DEFAULT_ALPHAS.to_vec(),
        }
    }
}

fn sha256_json<T: Serialize>(value: &T) -> String {
    let text = serde_json::to_string(value).expect("config serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn invalid(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}

impl BenchmarkConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Semantic checks that parsing cannot express. Relative paths are
    /// resolved against `base`.
    pub fn validate(&self, base: &Path) -> Result<(), CliError> {
        let d = &self.dataset;
        match (&d.source, &d.synthetic) {
            (Some(_), Some(_)) => {
                return Err(invalid(
                    "dataset",
                    "set exactly one of `source` and `synthetic`",
                ))
            }
            (None, None) => {
                return Err(invalid(
                    "dataset",
                    "one of `source` or `synthetic` is required",
                ))
            }
            (Some(src), None) => {
                let root = base.join(&src.root);
                if !root.is_dir() {
                    return Err(invalid(
                        "dataset.source.root",
                        format!("directory {} does not exist", root.display()),
                    ));
                }
            }
            (None, Some(s)) if s.n < 2 => {
                return Err(invalid("dataset.synthetic.n", "need at least 2 images"))
            }
            _ => {}
        }
        if d.resolution < 8 || !d.resolution.is_power_of_two() {
            return Err(invalid(
                "dataset.resolution",
                "must be a power of two of at least 8",
            ));
        }
        if !(d.split_ratio > 0.0 && d.split_ratio < 1.0) {
            return Err(invalid(
                "dataset.split_ratio",
                "must lie strictly between 0 and 1",
            ));
        }
        if let Normalization::Window { lo, hi } = d.normalization {
            if lo >= hi {
                return Err(invalid("dataset.normalization", "window needs lo < hi"));
            }
        }
        if self.training.families.is_empty() {
            return Err(invalid("training.families", "select at least one family"));
        }
        if self.metrics.n_splits == 0 {
            return Err(invalid("metrics.n_splits", "must be positive"));
        }
        if self.metrics.eval_every == 0 {
            return Err(invalid("metrics.eval_every", "must be positive"));
        }
        if let Some(p) = &self.metrics.classifier {
            if !base.join(p).is_file() {
                return Err(invalid(
                    "metrics.classifier",
                    format!("file {} does not exist", base.join(p).display()),
                ));
            }
        }
        if self.stats.alphas.is_empty() || self.stats.alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0))
        {
            return Err(invalid("stats.alphas", "need one or more levels in (0, 1)"));
        }
        for family in ModelFamily::ALL {
            self.hyperparameters(family, None)
                .validate()
                .map_err(|e| invalid(&format!("hyper.{family}"), e))?;
        }
        Ok(())
    }

    pub fn hyperparameters(&self, family: ModelFamily, epochs: Option<usize>) -> Hyperparameters {
        let mut h = Hyperparameters::defaults(family);
        self.hyper.all.apply(&mut h);
        let specific = match family {
            ModelFamily::Vanilla => &self.hyper.vanilla,
            ModelFamily::Dcgan => &self.hyper.dcgan,
            ModelFamily::Wgan => &self.hyper.wgan,
        };
        specific.apply(&mut h);
        h.eval_every = self.metrics.eval_every;
        if let Some(e) = epochs {
            h.epochs = e;
        }
        h
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            pairing: self.metrics.pairing,
            n_splits: self.metrics.n_splits,
            ..EvalConfig::default()
        }
    }

    /// Hash of everything that shapes results (the output location excluded).
    pub fn config_hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        sha256_json(&c)
    }

    /// Hash of the dataset section; stamped into the prepared manifest.
    pub fn data_hash(&self) -> String {
        sha256_json(&self.dataset)
    }
}

/// A validated configuration plus where its relative paths point.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: BenchmarkConfig,
    pub base_dir: PathBuf,
    pub output_dir: PathBuf,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config = BenchmarkConfig::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        config.validate(&base_dir)?;
        let output_dir = match std::env::var_os(OUTPUT_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => base_dir.join(&config.output_dir),
        };
        Ok(Self {
            config,
            base_dir,
            output_dir,
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    pub fn data_dir(&self) -> PathBuf {
        self.output_dir.join("data")
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.data_dir().join("manifest.json")
    }

    pub fn run_dir(&self, family: ModelFamily) -> PathBuf {
        self.output_dir.join("runs").join(family.as_str())
    }

    pub fn report_dir(&self) -> PathBuf {
        self.output_dir.join("report")
    }
}
