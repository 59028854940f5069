//! `prepare-data`, `train`, `evaluate` and `stats`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ganbench::data::{
    export_dataset, ingest_dicom, make_synthetic_dataset, split, DatasetId, DatasetManifest,
    ImageSample, ManifestFile,
};
use ganbench::metrics::ClassifierBackend;
use ganbench::models::ModelFamily;
use ganbench::stats::{analyze, render_markdown, MetricGroup, SignificanceReport};
use ganbench::train::{evaluate_epoch, load_checkpoint, write_training_log, TrainOptions, Trainer};
use log::{info, warn};
use serde::Serialize;

use crate::config::LoadedConfig;
use crate::run::{
    load_classifier, portable, read_per_image_metrics, relative_to, write_per_image_metrics,
    ClassifierRef, DatasetRef, RunFile, CHECKPOINT_DIR, EVALUATION_FILE, PER_IMAGE_METRICS,
    RUN_FILE, TRAINING_LOG,
};
use crate::{write_json, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrepareOutcome {
    UpToDate,
    Written { train: usize, test: usize },
}

fn existing_manifest_matches(cfg: &LoadedConfig, hash: &str) -> bool {
    let Ok(m) = ManifestFile::read(&cfg.manifest_path()) else {
        return false;
    };
    m.config_hash.as_deref() == Some(hash)
        && m.samples
            .iter()
            .all(|s| cfg.data_dir().join(&s.file).is_file())
}

fn build_dataset(cfg: &LoadedConfig) -> Result<DatasetManifest, CliError> {
    let d = &cfg.config.dataset;
    let target = (d.resolution, d.resolution);
    let manifest = if let Some(s) = &d.synthetic {
        make_synthetic_dataset(s.n, target, s.seed).map_err(CliError::data)?
    } else {
        let src = d.source.as_ref().expect("validated: source or synthetic");
        let dir = cfg
            .resolve(&src.root)
            .join(DatasetId::from(src.modality).to_string());
        let ingest = ingest_dicom(&dir, src.modality).map_err(CliError::data)?;
        for w in &ingest.warnings {
            warn!("skipped {}: {}", w.path.display(), w.reason);
        }
        let samples = ingest
            .studies
            .iter()
            .map(|s| s.to_sample(d.normalization, target))
            .collect::<Result<Vec<ImageSample>, _>>()
            .map_err(CliError::data)?;
        DatasetManifest::new(DatasetId::from(src.modality), target, samples)
            .map_err(CliError::data)?
    };
    split(&manifest, d.split_ratio, d.split_seed).map_err(CliError::data)
}

/// Writes `data/manifest.json` and `data/images/*.png`, unless an existing
/// manifest already carries the current dataset hash.
pub fn prepare_data(cfg: &LoadedConfig) -> Result<PrepareOutcome, CliError> {
    let hash = cfg.config.data_hash();
    if existing_manifest_matches(cfg, &hash) {
        info!("dataset in {} is up to date", cfg.data_dir().display());
        return Ok(PrepareOutcome::UpToDate);
    }
    let manifest = build_dataset(cfg)?;
    let data_dir = cfg.data_dir();
    let images = data_dir.join("images");
    if images.exists() {
        fs::remove_dir_all(&images)
            .map_err(|e| CliError::Data(format!("{}: {e}", images.display())))?;
    }
    fs::create_dir_all(&data_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", data_dir.display())))?;
    let mut file = export_dataset(&manifest, &data_dir).map_err(CliError::data)?;
    file.config_hash = Some(hash);
    file.write(&cfg.manifest_path()).map_err(CliError::data)?;
    let (train, test) = (manifest.train().len(), manifest.test().len());
    info!(
        "prepared {} images ({train} train / {test} test)",
        manifest.samples.len()
    );
    Ok(PrepareOutcome::Written { train, test })
}

/// Loads the prepared dataset, refusing one prepared from a different
/// dataset section.
pub fn load_prepared(cfg: &LoadedConfig) -> Result<DatasetManifest, CliError> {
    let path = cfg.manifest_path();
    if !path.is_file() {
        return Err(CliError::Data(format!(
            "{} not found; run prepare-data first",
            path.display()
        )));
    }
    let file = ManifestFile::read(&path).map_err(CliError::data)?;
    let want = cfg.config.data_hash();
    if file.config_hash.as_deref() != Some(want.as_str()) {
        return Err(CliError::Config(format!(
            "dataset section changed since prepare-data (manifest hash {}, config hash {want}); rerun prepare-data",
            file.config_hash.as_deref().unwrap_or("none")
        )));
    }
    file.load(&cfg.data_dir()).map_err(CliError::data)
}

/// Settings of one `train` invocation.
#[derive(Debug, Clone, Default)]
pub struct TrainRequest {
    pub families: Vec<ModelFamily>,
    pub master_seed: Option<u64>,
    pub epochs: Option<usize>,
}

fn train_family(
    cfg: &LoadedConfig,
    dataset: &DatasetManifest,
    family: ModelFamily,
    master_seed: u64,
    epochs: Option<usize>,
    classifier: &dyn ClassifierBackend,
) -> Result<RunFile, CliError> {
    let fail = |message: String| CliError::Training {
        family: family.to_string(),
        message,
    };
    let c = &cfg.config;
    let seed = master_seed + family.index();
    let hyper = c.hyperparameters(family, epochs);
    let run_dir = cfg.run_dir(family);
    if run_dir.exists() {
        fs::remove_dir_all(&run_dir).map_err(|e| fail(format!("{}: {e}", run_dir.display())))?;
    }
    let ckpt_dir = run_dir.join(CHECKPOINT_DIR);
    fs::create_dir_all(&ckpt_dir).map_err(|e| fail(format!("{}: {e}", ckpt_dir.display())))?;

    let mut options = TrainOptions::new(classifier);
    options.architecture = c.architecture.clone();
    options.eval = c.eval_config();
    options.checkpoint_dir = Some(ckpt_dir);
    options.checkpoint_every = c.training.checkpoint_every;

    info!("training {family} (seed {seed}, {} epochs)", hyper.epochs);
    let started = Instant::now();
    let run = Trainer::new(hyper, dataset, seed, options)
        .and_then(Trainer::run)
        .map_err(|e| fail(e.to_string()))?;
    let elapsed = started.elapsed().as_secs_f64();

    write_training_log(&run.epoch_records, &run_dir.join(TRAINING_LOG))
        .map_err(|e| fail(e.to_string()))?;
    write_per_image_metrics(
        &run.final_evaluation.pairs,
        &run_dir.join(PER_IMAGE_METRICS),
    )
    .map_err(|e| fail(e.to_string()))?;

    let file = RunFile {
        run_id: run.run_id.clone(),
        family,
        seed,
        master_seed,
        config_hash: c.config_hash(),
        dataset: DatasetRef {
            manifest: "../../data/manifest.json".into(),
            dataset_id: dataset.dataset_id.to_string(),
            data_hash: Some(c.data_hash()),
            resolution: [dataset.resolution.0, dataset.resolution.1],
            n_train: dataset.train().len(),
            n_test: dataset.test().len(),
        },
        hyper: run.hyper.clone(),
        architecture: run.architecture.config.clone(),
        eval: c.eval_config(),
        classifier: ClassifierRef {
            descriptor: classifier.descriptor(),
            path: c.metrics.classifier.as_deref().map(portable),
        },
        epochs_completed: run.epoch_records.len(),
        generator_updates: run.generator_updates,
        critic_updates: run.critic_updates,
        final_snapshot: run.final_evaluation.snapshot.clone(),
        training_log: TRAINING_LOG.into(),
        per_image_metrics: PER_IMAGE_METRICS.into(),
        final_checkpoint: run
            .final_params
            .as_deref()
            .map(|p| portable(&relative_to(p, &run_dir))),
        wall_time_s: c.training.record_wall_time.then_some(elapsed),
    };
    write_json(&file, &run_dir.join(RUN_FILE)).map_err(|e| fail(e.to_string()))?;
    let s = &file.final_snapshot;
    info!(
        "{family} done in {elapsed:.1}s: SSIM {:.4}, PSNR {:.2} dB, IS {:.3}",
        s.ssim_mean, s.psnr_mean, s.is_mean
    );
    Ok(file)
}

/// Trains the requested families; family `i` uses seed `master + i`.
pub fn train(cfg: &LoadedConfig, request: &TrainRequest) -> Result<Vec<RunFile>, CliError> {
    let dataset = load_prepared(cfg)?;
    let classifier_path = cfg
        .config
        .metrics
        .classifier
        .as_ref()
        .map(|p| cfg.resolve(p));
    let classifier = load_classifier(classifier_path.as_deref())?;
    let master = request.master_seed.unwrap_or(cfg.config.seed);
    let families = &request.families;
    let concurrent = cfg.config.training.concurrent && families.len() > 1;

    let results: Vec<Result<RunFile, CliError>> = if concurrent {
        let clf: &dyn ClassifierBackend = classifier.as_ref();
        let ds = &dataset;
        std::thread::scope(|scope| {
            let handles: Vec<_> = families
                .iter()
                .map(|&f| {
                    scope.spawn(move || train_family(cfg, ds, f, master, request.epochs, clf))
                })
                .collect();
            handles
                .into_iter()
                .zip(families)
                .map(|(h, f)| {
                    h.join().unwrap_or_else(|_| {
                        Err(CliError::Training {
                            family: f.to_string(),
                            message: "training thread panicked".into(),
                        })
                    })
                })
                .collect()
        })
    } else {
        families
            .iter()
            .map(|&f| {
                train_family(
                    cfg,
                    &dataset,
                    f,
                    master,
                    request.epochs,
                    classifier.as_ref(),
                )
            })
            .collect()
    };
    results.into_iter().collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationFile {
    pub run_id: String,
    pub epoch: usize,
    pub classifier: String,
    pub snapshot: ganbench::metrics::MetricSnapshot,
    pub matches_run_json: bool,
    pub pairs: Vec<ganbench::metrics::PairScore>,
}

/// Re-scores a finished run from its final checkpoint and writes
/// `evaluation.json` into the run directory.
pub fn evaluate(run_dir: &Path, classifier: Option<&Path>) -> Result<EvaluationFile, CliError> {
    let run = RunFile::read(run_dir).map_err(|e| CliError::Data(e.to_string()))?;
    let ckpt_rel = run.final_checkpoint.as_ref().ok_or_else(|| {
        CliError::Data(format!(
            "{} records no final checkpoint",
            run_dir.join(RUN_FILE).display()
        ))
    })?;
    let ckpt = load_checkpoint(&run_dir.join(ckpt_rel)).map_err(CliError::data)?;
    let manifest_path = run_dir.join(&run.dataset.manifest);
    let manifest = ManifestFile::read(&manifest_path).map_err(CliError::data)?;
    if manifest.config_hash != run.dataset.data_hash {
        return Err(CliError::Data(format!(
            "{} was re-prepared after this run was trained",
            manifest_path.display()
        )));
    }
    let root = manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let dataset = manifest.load(&root).map_err(CliError::data)?;
    let test: Vec<ImageSample> = dataset.test().into_iter().cloned().collect();

    if classifier.is_none() && run.classifier.path.is_some() {
        return Err(CliError::Config(format!(
            "run was scored with classifier {}; pass it with --classifier",
            run.classifier.path.as_deref().unwrap_or_default()
        )));
    }
    let clf = load_classifier(classifier)?;
    if clf.descriptor() != run.classifier.descriptor {
        return Err(CliError::Config(format!(
            "classifier '{}' differs from the one recorded for the run ('{}')",
            clf.descriptor(),
            run.classifier.descriptor
        )));
    }
    let ev = evaluate_epoch(
        ckpt.epoch,
        &ckpt.architecture,
        &ckpt.generator,
        ckpt.seed,
        &test,
        clf.as_ref(),
        &run.eval,
    )
    .map_err(|e| CliError::Training {
        family: run.family.to_string(),
        message: e.to_string(),
    })?;
    let out = EvaluationFile {
        run_id: run.run_id.clone(),
        epoch: ckpt.epoch,
        classifier: clf.descriptor(),
        matches_run_json: ev.snapshot == run.final_snapshot,
        snapshot: ev.snapshot,
        pairs: ev.pairs,
    };
    write_json(&out, &run_dir.join(EVALUATION_FILE)).map_err(CliError::report)?;
    Ok(out)
}

/// Metrics with one observation per test image.
pub const PER_IMAGE_METRIC_NAMES: [&str; 2] = ["SSIM", "PSNR"];

/// A completed run directory and its parsed `run.json`.
#[derive(Debug, Clone)]
pub struct LoadedRun {
    pub dir: PathBuf,
    pub run: RunFile,
}

pub fn load_runs(dirs: &[PathBuf]) -> Result<Vec<LoadedRun>, CliError> {
    let mut runs = dirs
        .iter()
        .map(|d| {
            Ok(LoadedRun {
                dir: d.clone(),
                run: RunFile::read(d)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    runs.sort_by_key(|r| (r.run.family.index(), r.run.seed));
    Ok(runs)
}

/// ANOVA and Tukey HSD over per-image SSIM and PSNR, one group per run.
pub fn significance(
    runs: &[LoadedRun],
    alphas: &[f64],
) -> Result<Vec<SignificanceReport>, CliError> {
    if runs.len() < 2 {
        return Err(CliError::Report(
            "significance testing needs at least two runs".into(),
        ));
    }
    let mut labels: Vec<String> = runs
        .iter()
        .map(|r| r.run.family.display_name().to_string())
        .collect();
    labels.sort();
    labels.dedup();
    let unique = labels.len() == runs.len();
    let mut scores = Vec::with_capacity(runs.len());
    for r in runs {
        scores.push(read_per_image_metrics(
            &r.dir.join(&r.run.per_image_metrics),
        )?);
    }
    PER_IMAGE_METRIC_NAMES
        .iter()
        .map(|&metric| {
            let groups = runs
                .iter()
                .zip(&scores)
                .map(|(r, pairs)| {
                    let label = if unique {
                        r.run.family.display_name().to_string()
                    } else {
                        r.run.run_id.clone()
                    };
                    let values = pairs
                        .iter()
                        .map(|p| if metric == "SSIM" { p.ssim } else { p.psnr })
                        .collect();
                    MetricGroup::new(label, values).map_err(CliError::report)
                })
                .collect::<Result<Vec<_>, _>>()?;
            analyze(metric, &groups, alphas).map_err(CliError::report)
        })
        .collect()
}

/// Writes `stats_report.json` (one object per metric) and `stats_report.md`.
pub fn write_stats(reports: &[SignificanceReport], out_dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out_dir).map_err(CliError::report)?;
    let json: Vec<serde_json::Value> = reports.iter().map(SignificanceReport::to_json).collect();
    write_json(&json, &out_dir.join("stats_report.json")).map_err(CliError::report)?;
    fs::write(out_dir.join("stats_report.md"), render_markdown(reports)).map_err(CliError::report)
}

pub fn stats(
    run_dirs: &[PathBuf],
    alphas: &[f64],
    out_dir: &Path,
) -> Result<Vec<SignificanceReport>, CliError> {
    let runs = load_runs(run_dirs)?;
    let reports = significance(&runs, alphas)?;
    write_stats(&reports, out_dir)?;
    Ok(reports)
}
