use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use covreg::harness::io::{matrix_csv, read_dataset, write_atomic};
use covreg::harness::{self, ExperimentConfig, ManovaConfig};
use covreg::{Result, TargetKind};

#[derive(Parser)]
#[command(name = "covreg", version, about = "Covariance regularization toward structured targets")]
struct Cli {
    /// Overrides the seed in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the regularized estimate to a CSV dataset.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_target)]
        target: TargetKind,
        /// Write the regularized covariance matrix here.
        #[arg(long)]
        covariance_out: Option<PathBuf>,
    },
    /// Run a Monte-Carlo grid and write per-replicate results.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the MANOVA resampling experiment.
    Manova {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_target(s: &str) -> std::result::Result<TargetKind, String> {
    s.parse().map_err(|e: covreg::Error| e.to_string())
}

fn output_path(cli: Option<PathBuf>, cfg: Option<PathBuf>) -> Result<PathBuf> {
    cli.or(cfg)
        .ok_or_else(|| covreg::Error::Config("no output path: pass --out or set `output`".into()))
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    out.with_file_name(format!("{stem}.summary.csv"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Estimate {
            input,
            target,
            covariance_out,
        } => {
            let parsed = read_dataset(&input)?;
            let report = harness::estimate(&parsed, target)?;
            println!("{report}");
            if let Some(path) = covariance_out {
                let sigma = report.estimate.sigma_gamma.as_ref().expect("fit from data");
                write_atomic(&path, &matrix_csv(sigma, &parsed.columns)?)?;
            }
        }
        Command::Simulate { config, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let threads = cli.threads.or(cfg.threads);
            let out = output_path(out, cfg.output.clone())?;
            // fail fast on bad cells before any replicate runs
            cfg.cells()?;
            let results = harness::with_threads(threads, || harness::run_simulation(&cfg))?;
            write_atomic(&out, &harness::results_csv(&results)?)?;
            let summary = harness::summarize(&results, &cfg.metrics);
            let summary_out = summary_path(&out);
            write_atomic(&summary_out, &harness::summary_csv(&summary)?)?;
            eprintln!(
                "wrote {} rows to {} and summary to {}",
                results.len(),
                out.display(),
                summary_out.display()
            );
        }
        Command::Manova { config, out } => {
            let mut cfg = ManovaConfig::load(&config)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let threads = cli.threads.or(cfg.threads);
            let out = output_path(out, cfg.output.clone())?;
            cfg.validate()?;
            let rows = harness::with_threads(threads, || harness::run_manova(&cfg))?;
            write_atomic(&out, &harness::manova_csv(&rows)?)?;
            for r in &rows {
                println!(
                    "{:<16} n={:<3} {:<24} {:.3}",
                    r.scenario, r.row.total_n, r.row.method, r.row.proportion
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
