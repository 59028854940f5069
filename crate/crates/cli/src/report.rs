//! `report`: curves, comparison table, statistics and `report.json`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ganbench::metrics::MetricSnapshot;
use ganbench::models::ModelFamily;
use ganbench::stats::SignificanceReport;
use ganbench::train::read_training_log;
use image::Rgb;
use log::warn;
use serde::{Deserialize, Serialize};

use crate::commands::{load_runs, significance, write_stats, LoadedRun};
use crate::config::LoadedConfig;
use crate::plot::{self, Chart, Marker, Series};
use crate::run::{portable, relative_to, RUN_FILE};
use crate::{write_json, CliError};

pub const COMPARISON_FILE: &str = "comparison.md";
pub const LITERATURE_FILE: &str = "literature.md";
pub const REPORT_FILE: &str = "report.json";

/// `(metric key, chart title, y-axis label, column in the training log's
/// metric block)`.
pub const CURVES: [(&str, &str, &str, usize); 3] = [
    ("ssim", "SSIM over epochs", "SSIM", 0),
    ("psnr", "PSNR over epochs", "PSNR (dB)", 2),
    ("is", "IS over epochs", "IS", 4),
];

pub fn family_style(f: ModelFamily) -> (Rgb<u8>, Marker) {
    match f {
        ModelFamily::Vanilla => (Rgb([214, 39, 40]), Marker::Square),
        ModelFamily::Dcgan => (Rgb([31, 119, 180]), Marker::Circle),
        ModelFamily::Wgan => (Rgb([44, 160, 44]), Marker::Triangle),
    }
}

/// A number in the comparison table and where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub mean: f64,
    pub std: f64,
    /// `<file>#<JSON pointer>` of the mean; the std sits next to it.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub family: ModelFamily,
    pub label: String,
    pub ssim: Cell,
    pub psnr: Cell,
    pub is: Cell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyEntry {
    pub family: ModelFamily,
    pub run_id: String,
    pub seed: u64,
    pub run_json: String,
    pub final_snapshot: MetricSnapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSeries {
    pub family: ModelFamily,
    pub source: String,
    /// `[epoch, value]` at every evaluation epoch.
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub metric: String,
    pub file: String,
    pub series: Vec<CurveSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub json: String,
    pub markdown: String,
    pub metrics: Vec<serde_json::Value>,
}

/// Contents of `report.json`. Paths are relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config_hash: String,
    pub seeds: BTreeMap<String, u64>,
    pub families: Vec<FamilyEntry>,
    pub comparison: String,
    pub comparison_rows: Vec<ComparisonRow>,
    pub curves: Vec<Curve>,
    pub stats: Option<StatsSummary>,
    pub literature: String,
}

fn cell(s: &MetricSnapshot, run_json: &str, key: &str) -> Cell {
    let (mean, std) = match key {
        "ssim" => (s.ssim_mean, s.ssim_std),
        "psnr" => (s.psnr_mean, s.psnr_std),
        _ => (s.is_mean, s.is_std),
    };
    Cell {
        mean,
        std,
        source: format!("{run_json}#/final_snapshot/{key}_mean"),
    }
}

pub fn comparison_rows(runs: &[LoadedRun], output_dir: &Path) -> Vec<ComparisonRow> {
    runs.iter()
        .map(|r| {
            let rj = portable(&relative_to(&r.dir.join(RUN_FILE), output_dir));
            let s = &r.run.final_snapshot;
            ComparisonRow {
                family: r.run.family,
                label: r.run.family.display_name().to_string(),
                ssim: cell(s, &rj, "ssim"),
                psnr: cell(s, &rj, "psnr"),
                is: cell(s, &rj, "is"),
            }
        })
        .collect()
}

/// Final metrics per family as `mean±std`.
pub fn render_comparison(rows: &[ComparisonRow], runs: &[LoadedRun]) -> String {
    let mut out = String::from("# Comparative analysis using GAN metrics\n\n| GANs | SSIM | PSNR | IS |\n|---|---|---|---|\n");
    for r in rows {
        let _ = writeln!(
            out,
            "| {} | {:.3}±{:.3} | {:.2}±{:.2} | {:.2}±{:.2} |",
            r.label, r.ssim.mean, r.ssim.std, r.psnr.mean, r.psnr.std, r.is.mean, r.is.std
        );
    }
    out.push('\n');
    for r in runs {
        let s = &r.run.final_snapshot;
        let _ = writeln!(
            out,
            "- {}: epoch {}, {} test images, {} pairing, seed {}",
            r.run.family.display_name(),
            s.epoch,
            s.n_images,
            s.pairing.as_str(),
            r.run.seed
        );
    }
    out.push_str(
        "\nSSIM and PSNR (dB): mean±std over test images. IS: mean±std over splits, classifier as recorded in each run.json.\n",
    );
    out
}

/// Published comparison values, reproduced as documentation only.
pub fn render_literature() -> String {
    const ROWS: [(&str, &str, &str); 13] = [
        ("GAN with Rician de-noising", "0.89", "32.10"),
        ("U-Net and conditional GAN", "0.901", "33.55"),
        ("Deep learning reconstruction (DLR)", "0.94", "38.22"),
        (
            "Pyramid convolutional RNN, knee single coil",
            "0.72",
            "32.35",
        ),
        (
            "Pyramid convolutional RNN, knee multi coil",
            "0.92",
            "38.75",
        ),
        ("Transformer-based integrated framework", "0.83", "35.55"),
        (
            "Multilevel generative super-resolution",
            "not specified",
            "34.02",
        ),
        (
            "Frequency pyramid transformer (fastMRI knee)",
            "0.90",
            "32.85",
        ),
        ("Image-domain super-resolution", "0.92", "34.06"),
        ("CycleGAN", "0.92 ± 0.02", "28.12 ± 1.52"),
        (
            "Vanilla GAN (knee, heart, brain)",
            "0.84 ± 0.009",
            "26 ± 0.1",
        ),
        ("DCGAN (knee, heart, brain)", "0.97 ± 0.002", "43 ± 0.5"),
        ("WGAN (knee, heart, brain)", "0.99 ± 0.002", "49 ± 0.3"),
    ];
    let mut out = String::from(
        "# Published MR reconstruction results\n\n\
         Literature values copied as reported. They are not computed by this tool and are not \
         comparable with the synthetic desk-scale numbers in comparison.md. Where the source's \
         prose and tables disagree on its own headline numbers, the table values are listed.\n\n\
         | Technique | SSIM | PSNR (dB) |\n|---|---|---|\n",
    );
    for (t, s, p) in ROWS {
        let _ = writeln!(out, "| {t} | {s} | {p} |");
    }
    out
}

fn curves(
    runs: &[LoadedRun],
    output_dir: &Path,
    report_dir: &Path,
) -> Result<Vec<Curve>, CliError> {
    let mut logs = Vec::with_capacity(runs.len());
    for r in runs {
        let path = r.dir.join(&r.run.training_log);
        let rows = read_training_log(&path)
            .map_err(|e| CliError::Report(format!("{}: {e}", path.display())))?;
        logs.push((portable(&relative_to(&path, output_dir)), rows));
    }
    let mut out = Vec::new();
    for (key, title, y_label, col) in CURVES {
        let series: Vec<CurveSeries> = runs
            .iter()
            .zip(&logs)
            .map(|(r, (source, rows))| CurveSeries {
                family: r.run.family,
                source: source.clone(),
                points: rows
                    .iter()
                    .filter_map(|(epoch, _, _, m)| m.map(|m| [*epoch as f64, m[col]]))
                    .collect(),
            })
            .collect();
        let drawn: Vec<Series> = series
            .iter()
            .map(|s| {
                let (color, marker) = family_style(s.family);
                Series {
                    label: s.family.display_name().to_string(),
                    color,
                    marker,
                    points: s.points.iter().map(|p| (p[0], p[1])).collect(),
                }
            })
            .collect();
        let file = format!("curves_{key}.png");
        plot::save(
            &Chart {
                title,
                x_label: "Epoch",
                y_label,
                series: &drawn,
            },
            &report_dir.join(&file),
        )
        .map_err(CliError::report)?;
        out.push(Curve {
            metric: key.to_string(),
            file: format!("report/{file}"),
            series,
        });
    }
    Ok(out)
}

/// Completed run directories of the configured families.
pub fn discover_runs(cfg: &LoadedConfig) -> Result<Vec<LoadedRun>, CliError> {
    let mut dirs = Vec::new();
    for &f in &cfg.config.training.families {
        let d = cfg.run_dir(f);
        if d.join(RUN_FILE).is_file() {
            dirs.push(d);
        } else {
            warn!("no completed {f} run in {}", d.display());
        }
    }
    if dirs.is_empty() {
        return Err(CliError::MissingRuns(
            cfg.output_dir.join("runs").display().to_string(),
        ));
    }
    load_runs(&dirs)
}

pub fn report(cfg: &LoadedConfig) -> Result<BenchmarkReport, CliError> {
    let runs = discover_runs(cfg)?;
    let hash = cfg.config.config_hash();
    for r in &runs {
        if r.run.config_hash != hash {
            return Err(CliError::Report(format!(
                "{} was trained with config {}, current config is {hash}; retrain or restore the config",
                r.dir.display(),
                r.run.config_hash
            )));
        }
    }
    let out_dir = &cfg.output_dir;
    let report_dir = cfg.report_dir();
    fs::create_dir_all(&report_dir).map_err(CliError::report)?;

    let curves = curves(&runs, out_dir, &report_dir)?;
    let rows = comparison_rows(&runs, out_dir);
    fs::write(
        report_dir.join(COMPARISON_FILE),
        render_comparison(&rows, &runs),
    )
    .map_err(CliError::report)?;
    fs::write(report_dir.join(LITERATURE_FILE), render_literature()).map_err(CliError::report)?;

    let stats = if runs.len() >= 2 {
        let reports = significance(&runs, &cfg.config.stats.alphas)?;
        write_stats(&reports, &report_dir)?;
        Some(StatsSummary {
            json: "report/stats_report.json".into(),
            markdown: "report/stats_report.md".into(),
            metrics: reports.iter().map(SignificanceReport::to_json).collect(),
        })
    } else {
        warn!(
            "only one completed run; skipping significance tests (they need at least two groups)"
        );
        for stale in ["stats_report.json", "stats_report.md"] {
            let _ = fs::remove_file(report_dir.join(stale));
        }
        None
    };

    let report = BenchmarkReport {
        config_hash: hash,
        seeds: runs
            .iter()
            .map(|r| (r.run.family.to_string(), r.run.seed))
            .collect(),
        families: runs
            .iter()
            .map(|r| FamilyEntry {
                family: r.run.family,
                run_id: r.run.run_id.clone(),
                seed: r.run.seed,
                run_json: portable(&relative_to(&r.dir.join(RUN_FILE), out_dir)),
                final_snapshot: r.run.final_snapshot.clone(),
            })
            .collect(),
        comparison: format!("report/{COMPARISON_FILE}"),
        comparison_rows: rows,
        curves,
        stats,
        literature: format!("report/{LITERATURE_FILE}"),
    };
    write_json(&report, &report_dir.join(REPORT_FILE)).map_err(CliError::report)?;
    Ok(report)
}
