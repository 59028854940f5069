//! Adversarial training loops for the three families, with periodic
//! evaluation, checkpoint/resume and bit-level determinism under a seed.

mod adam;
mod checkpoint;
mod log;

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DatasetManifest, ImageSample};
use crate::losses::{self, AdversarialBatchScores, LossError, ScoreMode};
use crate::metrics::{
    self, ClassifierBackend, EvalConfig, Evaluation, ImageView, MetricError, MetricSnapshot,
};
use crate::models::{
    self, ArchitectureConfig, GanArchitecture, ImageShape, ModelError, ModelFamily,
};
use crate::nn::{ArchiveError, Gradients, NetError, ParameterStore, Tape};
use crate::tensor::Tensor;

pub use adam::{adam_update, AdamParams, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, RngState, CHECKPOINT_VERSION};
pub use log::{read_training_log, write_training_log, TRAINING_LOG_HEADER};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("train split has {available} samples, fewer than one batch of {batch_size}")]
    EmptyTrainSplit { available: usize, batch_size: usize },
    #[error("test split is empty")]
    EmptyTestSplit,
    #[error("non-finite {which} loss at epoch {epoch}, step {step}{}", diagnostic.as_ref().map(|p| format!(" (diagnostic checkpoint {})", p.display())).unwrap_or_default())]
    NonFiniteLoss {
        which: &'static str,
        epoch: usize,
        step: usize,
        diagnostic: Option<PathBuf>,
    },
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparameters(String),
    #[error("gradient for {name} has shape {actual:?}, parameter has {expected:?}")]
    ShapeMismatch {
        name: String,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },
    #[error("checkpoint version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error("training log: {0}")]
    Log(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<ArchiveError> for TrainError {
    fn from(e: ArchiveError) -> Self {
        match e {
            ArchiveError::VersionMismatch { found, expected } => {
                TrainError::VersionMismatch { found, expected }
            }
            ArchiveError::Corrupt(m) => TrainError::CorruptCheckpoint(m),
            ArchiveError::Io(e) => TrainError::Io(e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Adam,
}

/// Which form of the generator's BCE objective to minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorObjective {
    #[default]
    NonSaturating,
    Saturating,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparameters {
    pub family: ModelFamily,
    pub latent_dim: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub lr_generator: f64,
    pub lr_discriminator: f64,
    pub optimizer: Optimizer,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Critic weight bound (WGAN only).
    pub clip_c: f64,
    /// Critic updates per generator update (WGAN only).
    pub n_critic: usize,
    pub eval_every: usize,
    #[serde(default)]
    pub generator_objective: GeneratorObjective,
}

impl Hyperparameters {
    /// The published per-family settings.
    pub fn defaults(family: ModelFamily) -> Self {
        let (epochs, lr_g, lr_d) = match family {
            ModelFamily::Vanilla => (2000, 0.00004, 0.0001),
            ModelFamily::Dcgan | ModelFamily::Wgan => (1000, 0.00005, 0.0002),
        };
        Self {
            family,
            latent_dim: 100,
            batch_size: 128,
            epochs,
            lr_generator: lr_g,
            lr_discriminator: lr_d,
            optimizer: Optimizer::Adam,
            adam_beta1: 0.5,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            clip_c: 0.01,
            n_critic: 5,
            eval_every: 50,
            generator_objective: GeneratorObjective::NonSaturating,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidHyperparameters(m.to_string()));
        if self.latent_dim == 0 || self.batch_size == 0 || self.epochs == 0 || self.eval_every == 0
        {
            return bad("latent_dim, batch_size, epochs and eval_every must be positive");
        }
        if !(self.lr_generator > 0.0 && self.lr_discriminator > 0.0) {
            return bad("learning rates must be positive");
        }
        if !((0.0..1.0).contains(&self.adam_beta1)
            && (0.0..1.0).contains(&self.adam_beta2)
            && self.adam_eps > 0.0)
        {
            return bad("Adam betas must lie in [0, 1) and eps must be positive");
        }
        if self.family.is_wasserstein() && !(self.clip_c > 0.0 && self.n_critic >= 1) {
            return bad("WGAN needs clip_c > 0 and n_critic >= 1");
        }
        Ok(())
    }

    fn adam(&self, lr: f64) -> AdamParams {
        AdamParams {
            lr,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
        }
    }
}

/// Losses of one epoch; `metric_snapshot` is present on evaluation epochs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean generator loss over the epoch's generator updates.
    pub g_loss: f64,
    /// Mean discriminator (critic) loss over the epoch's updates.
    pub d_loss: f64,
    pub clamp_events: usize,
    pub metric_snapshot: Option<MetricSnapshot>,
}

/// Hooks into the training loop, e.g. for asserting invariants.
pub trait TrainObserver {
    /// After every discriminator/critic update (and clipping, for WGAN).
    fn after_critic_update(
        &mut self,
        _epoch: usize,
        _update: usize,
        _critic: &ParameterStore,
        _hyper: &Hyperparameters,
    ) {
    }

    fn after_generator_update(
        &mut self,
        _epoch: usize,
        _update: usize,
        _generator: &ParameterStore,
    ) {
    }

    fn after_epoch(&mut self, _record: &EpochRecord) {}
}

/// Everything besides data, hyperparameters and seed that shapes a run.
pub struct TrainOptions<'a> {
    pub architecture: ArchitectureConfig,
    pub eval: EvalConfig,
    pub classifier: &'a dyn ClassifierBackend,
    /// Directory for periodic, final and diagnostic checkpoints.
    pub checkpoint_dir: Option<PathBuf>,
    /// Write `epoch_NNNNN.ckpt` every this many epochs (0 disables).
    pub checkpoint_every: usize,
    pub observer: Option<&'a mut dyn TrainObserver>,
}

impl<'a> TrainOptions<'a> {
    pub fn new(classifier: &'a dyn ClassifierBackend) -> Self {
        Self {
            architecture: ArchitectureConfig::default(),
            eval: EvalConfig::default(),
            classifier,
            checkpoint_dir: None,
            checkpoint_every: 0,
            observer: None,
        }
    }
}

/// A finished training run.
#[derive(Debug, Clone)]
pub struct TrainRun {
    pub run_id: String,
    pub hyper: Hyperparameters,
    pub seed: u64,
    pub epoch_records: Vec<EpochRecord>,
    /// Final checkpoint, when a checkpoint directory was configured.
    pub final_params: Option<PathBuf>,
    pub dataset_ref: String,
    pub architecture: GanArchitecture,
    pub generator: ParameterStore,
    pub discriminator: ParameterStore,
    /// Evaluation at the last epoch, with per-image scores.
    pub final_evaluation: Evaluation,
    /// Generator updates performed over the whole run.
    pub generator_updates: usize,
    /// Discriminator / critic updates performed over the whole run.
    pub critic_updates: usize,
}

pub fn run_id(family: ModelFamily, seed: u64) -> String {
    format!("{family}-seed{seed}")
}

/// Independent sub-seeds of one master seed (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const GENERATOR_INIT_STREAM: u64 = 1;
const DISCRIMINATOR_INIT_STREAM: u64 = 2;
const EVAL_LATENT_STREAM: u64 = 3;
const TRAIN_STREAM: u64 = 4;

/// Training state of one run; advance it epoch by epoch or run to the end.
pub struct Trainer<'a> {
    hyper: Hyperparameters,
    seed: u64,
    arch: GanArchitecture,
    dataset_ref: String,
    train: Vec<Vec<f64>>,
    test: Vec<ImageSample>,
    generator: ParameterStore,
    discriminator: ParameterStore,
    g_adam: AdamState,
    d_adam: AdamState,
    rng: ChaCha8Rng,
    epoch: usize,
    records: Vec<EpochRecord>,
    generator_updates: usize,
    critic_updates: usize,
    last_evaluation: Option<Evaluation>,
    options: TrainOptions<'a>,
}

impl<'a> Trainer<'a> {
    pub fn new(
        hyper: Hyperparameters,
        dataset: &DatasetManifest,
        seed: u64,
        options: TrainOptions<'a>,
    ) -> Result<Self, TrainError> {
        hyper.validate()?;
        let (h, w) = dataset.resolution;
        if h != w {
            return Err(ModelError::UnsupportedShape(vec![1, h, w]).into());
        }
        let arch = GanArchitecture::build(
            hyper.family,
            hyper.latent_dim,
            ImageShape::grayscale(h),
            &options.architecture,
        )?;
        let generator =
            ParameterStore::init(&arch.generator, derive_seed(seed, GENERATOR_INIT_STREAM));
        let discriminator = ParameterStore::init(
            &arch.discriminator,
            derive_seed(seed, DISCRIMINATOR_INIT_STREAM),
        );
        let rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, TRAIN_STREAM));
        Self::assemble(
            hyper,
            seed,
            arch,
            dataset,
            generator,
            discriminator,
            AdamState::new(),
            AdamState::new(),
            rng,
            0,
            Vec::new(),
            options,
        )
    }

    /// Continues a run from a checkpoint taken at the end of some epoch.
    pub fn resume(
        checkpoint: Checkpoint,
        dataset: &DatasetManifest,
        mut options: TrainOptions<'a>,
    ) -> Result<Self, TrainError> {
        options.architecture = checkpoint.architecture.config.clone();
        checkpoint
            .generator
            .check_against(&checkpoint.architecture.generator)?;
        checkpoint
            .discriminator
            .check_against(&checkpoint.architecture.discriminator)?;
        let rng = checkpoint.rng.restore()?;
        let mut t = Self::assemble(
            checkpoint.hyper,
            checkpoint.seed,
            checkpoint.architecture,
            dataset,
            checkpoint.generator,
            checkpoint.discriminator,
            checkpoint.g_adam,
            checkpoint.d_adam,
            rng,
            checkpoint.epoch,
            checkpoint.records,
            options,
        )?;
        t.generator_updates = checkpoint.generator_updates;
        t.critic_updates = checkpoint.critic_updates;
        Ok(t)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        hyper: Hyperparameters,
        seed: u64,
        arch: GanArchitecture,
        dataset: &DatasetManifest,
        generator: ParameterStore,
        discriminator: ParameterStore,
        g_adam: AdamState,
        d_adam: AdamState,
        rng: ChaCha8Rng,
        epoch: usize,
        records: Vec<EpochRecord>,
        options: TrainOptions<'a>,
    ) -> Result<Self, TrainError> {
        let train: Vec<Vec<f64>> = dataset
            .train()
            .iter()
            .map(|s| s.pixels.iter().map(|p| p * 2.0 - 1.0).collect())
            .collect();
        if train.len() < hyper.batch_size {
            return Err(TrainError::EmptyTrainSplit {
                available: train.len(),
                batch_size: hyper.batch_size,
            });
        }
        let test: Vec<ImageSample> = dataset.test().into_iter().cloned().collect();
        if test.is_empty() {
            return Err(TrainError::EmptyTestSplit);
        }
        Ok(Self {
            hyper,
            seed,
            arch,
            dataset_ref: dataset.dataset_id.to_string(),
            train,
            test,
            generator,
            discriminator,
            g_adam,
            d_adam,
            rng,
            epoch,
            records,
            generator_updates: 0,
            critic_updates: 0,
            last_evaluation: None,
            options,
        })
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn records(&self) -> &[EpochRecord] {
        &self.records
    }

    pub fn generator(&self) -> &ParameterStore {
        &self.generator
    }

    pub fn discriminator(&self) -> &ParameterStore {
        &self.discriminator
    }

    pub fn architecture(&self) -> &GanArchitecture {
        &self.arch
    }

    pub fn run_id(&self) -> String {
        run_id(self.hyper.family, self.seed)
    }

    /// Complete batches per epoch (the last partial batch is dropped).
    pub fn batches_per_epoch(&self) -> usize {
        self.train.len() / self.hyper.batch_size
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            run_id: self.run_id(),
            hyper: self.hyper.clone(),
            seed: self.seed,
            dataset_ref: self.dataset_ref.clone(),
            architecture: self.arch.clone(),
            epoch: self.epoch,
            rng: RngState::capture(&self.rng),
            generator: self.generator.clone(),
            discriminator: self.discriminator.clone(),
            g_adam: self.g_adam.clone(),
            d_adam: self.d_adam.clone(),
            records: self.records.clone(),
            generator_updates: self.generator_updates,
            critic_updates: self.critic_updates,
        }
    }

    /// Scores the current generator (evaluation mode) against the test split.
    pub fn evaluate(&self) -> Result<Evaluation, TrainError> {
        evaluate_epoch(
            self.epoch,
            &self.arch,
            &self.generator,
            self.seed,
            &self.test,
            self.options.classifier,
            &self.options.eval,
        )
    }

    fn batch(&self, indices: &[usize]) -> Tensor {
        let refs: Vec<&[f64]> = indices.iter().map(|&i| self.train[i].as_slice()).collect();
        Tensor::stack(&self.arch.image.dims(), &refs)
            .expect("training images match the architecture")
    }

    fn non_finite(&self, which: &'static str, step: usize) -> TrainError {
        let diagnostic = self.options.checkpoint_dir.as_ref().and_then(|dir| {
            let path = dir.join(format!("nonfinite_epoch{:05}.ckpt", self.epoch + 1));
            save_checkpoint(&self.checkpoint(), &path)
                .ok()
                .map(|_| path)
        });
        TrainError::NonFiniteLoss {
            which,
            epoch: self.epoch + 1,
            step,
            diagnostic,
        }
    }

    /// One discriminator/critic update on `real` against fresh or given fakes.
    fn critic_step(
        &mut self,
        real: &Tensor,
        fake: &Tensor,
        step: usize,
    ) -> Result<(f64, usize), TrainError> {
        let d_spec = &self.arch.discriminator;
        let (real_out, real_tape) =
            d_spec.forward_train(&mut self.discriminator, real, &mut self.rng)?;
        let (fake_out, fake_tape) =
            d_spec.forward_train(&mut self.discriminator, fake, &mut self.rng)?;
        let wgan = self.hyper.family.is_wasserstein();
        let mode = if wgan {
            ScoreMode::Critic
        } else {
            ScoreMode::Probability
        };
        let scores =
            AdversarialBatchScores::new(real_out.data().to_vec(), fake_out.data().to_vec(), mode)?;
        let loss = if wgan {
            losses::wasserstein_critic_loss(&scores)?
        } else {
            losses::discriminator_bce_loss(&scores)?
        };
        if !loss.value.is_finite() {
            return Err(self.non_finite("discriminator", step));
        }
        let score_shape = real_out.shape().to_vec();
        let (mut grads, _) = d_spec.backward(
            &self.discriminator,
            &real_tape,
            &Tensor::from_vec(score_shape.clone(), loss.grad_real).expect("one score per sample"),
        )?;
        let (fake_grads, _) = d_spec.backward(
            &self.discriminator,
            &fake_tape,
            &Tensor::from_vec(score_shape, loss.grad_fake).expect("one score per sample"),
        )?;
        grads.accumulate(&fake_grads);
        adam_update(
            &mut self.discriminator,
            &grads,
            &mut self.d_adam,
            &self.hyper.adam(self.hyper.lr_discriminator),
        )?;
        if wgan {
            models::clip_parameters_in_place(&mut self.discriminator, self.hyper.clip_c)?;
        }
        self.critic_updates += 1;
        if let Some(obs) = self.options.observer.as_mut() {
            obs.after_critic_update(
                self.epoch + 1,
                self.critic_updates,
                &self.discriminator,
                &self.hyper,
            );
        }
        Ok((loss.value, loss.clamp_events))
    }

    /// One generator update through the (just updated) discriminator.
    fn generator_step(
        &mut self,
        fake: &Tensor,
        g_tape: &Tape,
        step: usize,
    ) -> Result<(f64, usize), TrainError> {
        let d_spec = &self.arch.discriminator;
        let (out, tape) = d_spec.forward_train(&mut self.discriminator, fake, &mut self.rng)?;
        let loss = if self.hyper.family.is_wasserstein() {
            losses::wasserstein_generator_loss(out.data())?
        } else {
            let saturating = self.hyper.generator_objective == GeneratorObjective::Saturating;
            losses::generator_bce_loss(out.data(), saturating)?
        };
        if !loss.value.is_finite() {
            return Err(self.non_finite("generator", step));
        }
        let grad_scores =
            Tensor::from_vec(out.shape().to_vec(), loss.grad_fake).expect("one score per sample");
        let (_, grad_images) = d_spec.backward(&self.discriminator, &tape, &grad_scores)?;
        let (grads, _): (Gradients, Tensor) =
            self.arch
                .generator
                .backward(&self.generator, g_tape, &grad_images)?;
        adam_update(
            &mut self.generator,
            &grads,
            &mut self.g_adam,
            &self.hyper.adam(self.hyper.lr_generator),
        )?;
        self.generator_updates += 1;
        if let Some(obs) = self.options.observer.as_mut() {
            obs.after_generator_update(self.epoch + 1, self.generator_updates, &self.generator);
        }
        Ok((loss.value, loss.clamp_events))
    }

    fn generate_train(&mut self, n: usize) -> Result<(Tensor, Tape), TrainError> {
        let z = models::sample_latent(n, self.hyper.latent_dim, &mut self.rng);
        Ok(self
            .arch
            .generator
            .forward_train(&mut self.generator, &z, &mut self.rng)?)
    }

    /// Trains one epoch, evaluating when the epoch is a multiple of
    /// `eval_every` or the last one.
    pub fn run_epoch(&mut self) -> Result<&EpochRecord, TrainError> {
        let b = self.hyper.batch_size;
        let mut order: Vec<usize> = (0..self.train.len()).collect();
        order.shuffle(&mut self.rng);
        let (mut d_sum, mut d_count, mut g_sum, mut g_count, mut clamps) =
            (0.0, 0usize, 0.0, 0usize, 0usize);
        for (step, chunk) in order.chunks_exact(b).enumerate() {
            let real = self.batch(chunk);
            if self.hyper.family.is_wasserstein() {
                for _ in 0..self.hyper.n_critic {
                    let (fake, _) = self.generate_train(b)?;
                    let (l, c) = self.critic_step(&real, &fake, step)?;
                    d_sum += l;
                    d_count += 1;
                    clamps += c;
                }
                let (fake, tape) = self.generate_train(b)?;
                let (l, c) = self.generator_step(&fake, &tape, step)?;
                g_sum += l;
                g_count += 1;
                clamps += c;
            } else {
                let (fake, tape) = self.generate_train(b)?;
                let (l, c) = self.critic_step(&real, &fake, step)?;
                d_sum += l;
                d_count += 1;
                clamps += c;
                let (l, c) = self.generator_step(&fake, &tape, step)?;
                g_sum += l;
                g_count += 1;
                clamps += c;
            }
        }
        self.epoch += 1;
        let snapshot = if self.epoch % self.hyper.eval_every == 0 || self.epoch == self.hyper.epochs
        {
            let eval = self.evaluate()?;
            let snap = eval.snapshot.clone();
            self.last_evaluation = Some(eval);
            Some(snap)
        } else {
            None
        };
        let record = EpochRecord {
            epoch: self.epoch,
            g_loss: g_sum / g_count as f64,
            d_loss: d_sum / d_count as f64,
            clamp_events: clamps,
            metric_snapshot: snapshot,
        };
        if let Some(obs) = self.options.observer.as_mut() {
            obs.after_epoch(&record);
        }
        self.records.push(record);
        if let Some(dir) = &self.options.checkpoint_dir {
            let every = self.options.checkpoint_every;
            if every > 0 && self.epoch % every == 0 && self.epoch < self.hyper.epochs {
                save_checkpoint(
                    &self.checkpoint(),
                    &dir.join(format!("epoch_{:05}.ckpt", self.epoch)),
                )?;
            }
        }
        Ok(self.records.last().expect("just pushed"))
    }

    /// Runs the remaining epochs and returns the finished run.
    pub fn run(mut self) -> Result<TrainRun, TrainError> {
        while self.epoch < self.hyper.epochs {
            self.run_epoch()?;
        }
        let final_evaluation = match self.last_evaluation.take() {
            Some(e) if e.snapshot.epoch == self.epoch => e,
            _ => self.evaluate()?,
        };
        let final_params = match &self.options.checkpoint_dir {
            Some(dir) => {
                let path = dir.join("final.ckpt");
                save_checkpoint(&self.checkpoint(), &path)?;
                Some(path)
            }
            None => None,
        };
        Ok(TrainRun {
            run_id: self.run_id(),
            hyper: self.hyper,
            seed: self.seed,
            epoch_records: self.records,
            final_params,
            dataset_ref: self.dataset_ref,
            architecture: self.arch,
            generator: self.generator,
            discriminator: self.discriminator,
            final_evaluation,
            generator_updates: self.generator_updates,
            critic_updates: self.critic_updates,
        })
    }
}

/// Scores generator output (already in `[0, 1]`) against the test split.
pub fn evaluate_generated(
    epoch: usize,
    images: &[Vec<f64>],
    shape: ImageShape,
    test: &[ImageSample],
    classifier: &dyn ClassifierBackend,
    eval: &EvalConfig,
) -> Result<Evaluation, TrainError> {
    if test.is_empty() {
        return Err(TrainError::EmptyTestSplit);
    }
    let views = images
        .iter()
        .map(|p| ImageView::new(shape.height, shape.width, p))
        .collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&ImageSample> = test.iter().collect();
    Ok(metrics::evaluate_images(
        epoch, &views, &refs, classifier, eval,
    )?)
}

/// Evaluates stored generator parameters against a test split, generating
/// one image per test image from latents derived from `seed`.
pub fn evaluate_epoch(
    epoch: usize,
    architecture: &GanArchitecture,
    generator: &ParameterStore,
    seed: u64,
    test: &[ImageSample],
    classifier: &dyn ClassifierBackend,
    eval: &EvalConfig,
) -> Result<Evaluation, TrainError> {
    if test.is_empty() {
        return Err(TrainError::EmptyTestSplit);
    }
    let images = generate_eval_images(architecture, generator, seed, test.len())?;
    evaluate_generated(epoch, &images, architecture.image, test, classifier, eval)
}

/// `n` evaluation-mode generator images in `[0, 1]` from the run's fixed
/// evaluation latents (the same for every epoch of a run).
pub fn generate_eval_images(
    architecture: &GanArchitecture,
    generator: &ParameterStore,
    seed: u64,
    n: usize,
) -> Result<Vec<Vec<f64>>, TrainError> {
    let mut eval_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, EVAL_LATENT_STREAM));
    let z = models::sample_latent(n, architecture.latent_dim, &mut eval_rng);
    let out = architecture.generator.forward(generator, &z)?;
    Ok((0..out.batch_size())
        .map(|i| {
            out.sample(i)
                .iter()
                .map(|x| ((x + 1.0) / 2.0).clamp(0.0, 1.0))
                .collect()
        })
        .collect())
}

/// Trains one family with default options and the default stand-in classifier.
pub fn train(
    family: ModelFamily,
    dataset: &DatasetManifest,
    hyper: &Hyperparameters,
    seed: u64,
) -> Result<TrainRun, TrainError> {
    if hyper.family != family {
        return Err(TrainError::InvalidHyperparameters(format!(
            "hyperparameters are for {}, not {family}",
            hyper.family
        )));
    }
    let classifier = metrics::ProjectionClassifier::default();
    Trainer::new(hyper.clone(), dataset, seed, TrainOptions::new(&classifier))?.run()
}
