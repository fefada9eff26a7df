//! Load a simulation config from disk, run it and write the same CSV files
//! as `covreg simulate`.
//!
//! cargo run --release --example simulate_grid -- crates/core/configs/quick.toml /tmp/quick.csv

use std::path::PathBuf;

use covreg::harness::io::write_atomic;
use covreg::harness::{results_csv, run_simulation, summarize, summary_csv, ExperimentConfig};

fn main() -> covreg::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = PathBuf::from(args.next().unwrap_or_else(|| "crates/core/configs/quick.toml".into()));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "quick.csv".into()));

    let cfg = ExperimentConfig::load(&config)?;
    let results = run_simulation(&cfg)?;
    write_atomic(&out, &results_csv(&results)?)?;
    let summary = summarize(&results, &cfg.metrics);
    let summary_out = out.with_extension("summary.csv");
    write_atomic(&summary_out, &summary_csv(&summary)?)?;
    println!("{} rows -> {}", results.len(), out.display());
    println!("{} summary rows -> {}", summary.len(), summary_out.display());
    Ok(())
}
