//! Eigenvalue error of the proposed estimator against Schäfer–Strimmer
//! shrinkage and the sample covariance, for n = 50 and growing p.
//!
//! cargo run --release --example eigen_error

use covreg::harness::{run_simulation, ExperimentConfig};

const CONFIG: &str = r#"
seed = 42
replicates = 50
methods = ["proposed", "shrinkage", "mle"]
metrics = ["eigen_abs_error"]

[[grid]]
structure = "ar1"
t = [0.5]
n = [50]
p = [30, 50, 100]

[[grid]]
structure = "exchangeable"
t = [0.5]
n = [50]
p = [30, 50, 100]

[[grid]]
structure = "random_sparse_inverse"
n = [50]
p = [30, 50, 100]
"#;

fn main() -> covreg::Result<()> {
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    let results = run_simulation(&cfg)?;
    let summary = covreg::harness::summarize(&results, &cfg.metrics);
    println!("{:<22} {:>4} {:<22} {:>10} {:>10}", "structure", "p", "method", "mean", "median");
    for row in &summary {
        println!(
            "{:<22} {:>4} {:<22} {:>10.3} {:>10.3}",
            row.structure, row.p, row.method, row.mean, row.median
        );
    }
    Ok(())
}
