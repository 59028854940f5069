use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ganbench::models::ModelFamily;
use ganbench::stats::DEFAULT_ALPHAS;
use ganbench_cli::commands::{self, PrepareOutcome, TrainRequest};
use ganbench_cli::{report, CliError, LoadedConfig};

#[derive(Parser)]
#[command(
    name = "ganbench",
    version,
    about = "Benchmark Vanilla GAN, DCGAN and WGAN on grayscale images"
)]
struct Cli {
    /// Only print errors.
    #[arg(long, short, global = true, conflicts_with = "verbose")]
    quiet: bool,
    /// Print debug output.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Vanilla,
    Dcgan,
    Wgan,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Convert the configured source into a PNG tree with a split manifest.
    PrepareData {
        #[arg(long)]
        config: PathBuf,
    },
    /// Train one family, or all of them.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        family: FamilyArg,
        /// Master seed; family i uses seed + i.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the epoch budget of every selected family.
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Re-score a finished run from its final checkpoint.
    Evaluate {
        #[arg(long)]
        run: PathBuf,
        /// Classifier weights, required if the run used one.
        #[arg(long)]
        classifier: Option<PathBuf>,
    },
    /// ANOVA and Tukey HSD over per-image metrics of several runs.
    Stats {
        #[arg(long, num_args = 2.., required = true)]
        runs: Vec<PathBuf>,
        /// Output directory [default: report/ next to the first run's parent].
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "alpha")]
        alphas: Vec<f64>,
    },
    /// Curves, comparison table, statistics and report.json.
    Report {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::PrepareData { config } => {
            let cfg = LoadedConfig::load(&config)?;
            match commands::prepare_data(&cfg)? {
                PrepareOutcome::UpToDate => {
                    println!("up to date: {}", cfg.manifest_path().display())
                }
                PrepareOutcome::Written { train, test } => {
                    println!(
                        "wrote {} ({train} train / {test} test)",
                        cfg.manifest_path().display()
                    )
                }
            }
        }
        Command::Train {
            config,
            family,
            seed,
            epochs,
        } => {
            let cfg = LoadedConfig::load(&config)?;
            let families = match family {
                FamilyArg::Vanilla => vec![ModelFamily::Vanilla],
                FamilyArg::Dcgan => vec![ModelFamily::Dcgan],
                FamilyArg::Wgan => vec![ModelFamily::Wgan],
                FamilyArg::All => cfg.config.training.families.clone(),
            };
            if epochs == Some(0) {
                return Err(CliError::Config("--epochs must be positive".into()));
            }
            let runs = commands::train(
                &cfg,
                &TrainRequest {
                    families,
                    master_seed: seed,
                    epochs,
                },
            )?;
            for r in runs {
                let s = &r.final_snapshot;
                println!(
                    "{}: seed {}, {} epochs, SSIM {:.4}±{:.4}, PSNR {:.2}±{:.2} dB, IS {:.3}±{:.3}",
                    r.run_id,
                    r.seed,
                    r.epochs_completed,
                    s.ssim_mean,
                    s.ssim_std,
                    s.psnr_mean,
                    s.psnr_std,
                    s.is_mean,
                    s.is_std
                );
            }
        }
        Command::Evaluate { run, classifier } => {
            let ev = commands::evaluate(&run, classifier.as_deref())?;
            let s = &ev.snapshot;
            println!(
                "{} epoch {}: SSIM {:.4}±{:.4}, PSNR {:.2}±{:.2} dB, IS {:.3}±{:.3}{}",
                ev.run_id,
                ev.epoch,
                s.ssim_mean,
                s.ssim_std,
                s.psnr_mean,
                s.psnr_std,
                s.is_mean,
                s.is_std,
                if ev.matches_run_json {
                    ""
                } else {
                    " (differs from run.json)"
                }
            );
        }
        Command::Stats { runs, out, alphas } => {
            let alphas = if alphas.is_empty() {
                DEFAULT_ALPHAS.to_vec()
            } else {
                alphas
            };
            if alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
                return Err(CliError::Config("--alpha values must lie in (0, 1)".into()));
            }
            let out = out.unwrap_or_else(|| {
                let parent = runs[0]
                    .parent()
                    .and_then(|p| p.parent())
                    .map(PathBuf::from)
                    .unwrap_or_default();
                parent.join("report")
            });
            let reports = commands::stats(&runs, &alphas, &out)?;
            for r in &reports {
                println!(
                    "{}: F({}, {}) = {:.3}, p = {:.4e}",
                    r.metric,
                    r.anova.df_between,
                    r.anova.df_within,
                    r.anova.f_value,
                    r.anova.p_value
                );
            }
            println!("wrote {}", out.join("stats_report.md").display());
        }
        Command::Report { config } => {
            let cfg = LoadedConfig::load(&config)?;
            let rep = report::report(&cfg)?;
            println!(
                "wrote {} ({} families{})",
                cfg.report_dir().join(report::REPORT_FILE).display(),
                rep.families.len(),
                if rep.stats.is_some() {
                    ", with statistics"
                } else {
                    ""
                }
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet {
        "error"
    } else if cli.verbose {
        "debug"
    } else {
        "info"
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
