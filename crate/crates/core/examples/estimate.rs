//! Fit the regularized estimator to one simulated AR(1) sample under each
//! target and compare against the sample covariance.
//!
//! cargo run --example estimate -- [n] [p]

use covreg::evaluation::eigen_abs_error;
use covreg::matrix::condition_number;
use covreg::regularizer::fit;
use covreg::sampler::{generate_covariance, sample_mvn_seeded, StructureSpec};
use covreg::baselines::mle_covariance;
use covreg::TargetKind;

fn main() -> covreg::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let n = args.next().unwrap_or(25);
    let p = args.next().unwrap_or(40);

    let sigma = generate_covariance(&StructureSpec::ar1(0.6), p)?;
    let data = sample_mvn_seeded(n, &sigma, 11)?;
    let mle = mle_covariance(&data)?;
    println!("AR(1) rho = 0.6, n = {n}, p = {p}");
    println!(
        "{:<14} {:>8} {:>8} {:>8} {:>12} {:>12}",
        "estimator", "t_hat", "kappa", "gamma", "eigen err", "cond"
    );
    println!(
        "{:<14} {:>8} {:>8} {:>8} {:>12.3} {:>12.3e}",
        "sample (MLE)",
        "",
        "",
        "",
        eigen_abs_error(&mle, &sigma)?,
        condition_number(&mle)
    );
    for kind in [TargetKind::Identity, TargetKind::Ar1, TargetKind::Exchangeable] {
        let est = fit(&data, kind)?;
        let cov = est.sigma_gamma.as_ref().unwrap();
        let t_hat = est.t_hat.map(|t| format!("{t:.3}")).unwrap_or_else(|| "NA".into());
        println!(
            "{:<14} {t_hat:>8} {:>8.3} {:>8.3} {:>12.3} {:>12.3e}",
            kind.to_string(),
            est.kappa,
            est.gamma,
            eigen_abs_error(cov, &sigma)?,
            condition_number(cov)
        );
    }
    Ok(())
}
