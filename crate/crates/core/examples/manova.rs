//! Regularized Wilks test on a small high-dimensional grouped sample, then
//! a shortened resampling power study on the soil-like analogue.
//!
//! cargo run --release --example manova

use covreg::manova::{
    resampling_experiment, wilks_test, Estimator, Inference, ResamplingConfig, SoilAnalogue,
};
use covreg::TargetKind;

fn main() -> covreg::Result<()> {
    let analogue = SoilAnalogue::default();
    let data = analogue.generate()?;
    println!(
        "analogue: {} groups x {} rows, p = {}",
        analogue.groups,
        analogue.rows_per_group,
        data.p()
    );

    for estimator in [Estimator::Proposed(TargetKind::Ar1), Estimator::ShrinkageBaseline] {
        let res = wilks_test(&data, &estimator, &Inference::permutation(1))?;
        println!(
            "{:<16} Lambda = {:.4e}  p = {:.4}  shrinkage parameter = {:.3}",
            estimator.name(),
            res.wilks_lambda,
            res.p_value,
            res.shrinkage
        );
    }

    let cfg = ResamplingConfig {
        replicates: 100,
        permutations: 199,
        ..ResamplingConfig::default()
    };
    println!("\nrejection rate at alpha = {} ({} replicates)", cfg.alpha, cfg.replicates);
    for row in resampling_experiment(&data, &cfg)? {
        println!("  n = {:<3} {:<16} {:.3}", row.total_n, row.method, row.proportion);
    }
    Ok(())
}
