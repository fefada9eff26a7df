//! How the data-driven weight on the sample correlation moves with n and p.
//!
//! cargo run --release --example gamma_trends

use covreg::regularizer::fit;
use covreg::sampler::{generate_covariance, sample_mvn, stream_rng, StructureSpec};
use covreg::TargetKind;

const REPLICATES: u64 = 100;

fn mean_gamma(structure: &StructureSpec, kind: TargetKind, n: usize, p: usize) -> covreg::Result<f64> {
    let sigma = generate_covariance(structure, p)?;
    let mut total = 0.0;
    for rep in 0..REPLICATES {
        let d = sample_mvn(n, &sigma, &mut stream_rng(2024, rep))?;
        total += fit(&d, kind)?.gamma;
    }
    Ok(total / REPLICATES as f64)
}

fn main() -> covreg::Result<()> {
    let cases = [
        ("identity", StructureSpec::identity(), TargetKind::Identity),
        ("ar1(0.5)", StructureSpec::ar1(0.5), TargetKind::Ar1),
        ("exch(0.5)", StructureSpec::exchangeable(0.5), TargetKind::Exchangeable),
    ];
    println!("mean gamma over {REPLICATES} replicates");
    println!("{:<10} {:>8} {:>8} {:>8} | {:>8} {:>8} {:>8}", "", "n=10", "n=30", "n=300", "p=10", "p=30", "p=100");
    for (label, structure, kind) in cases {
        let mut row = format!("{label:<10}");
        for n in [10, 30, 300] {
            row += &format!(" {:>8.3}", mean_gamma(&structure, kind, n, 10)?);
        }
        row += " |";
        for p in [10, 30, 100] {
            row += &format!(" {:>8.3}", mean_gamma(&structure, kind, 30, p)?);
        }
        println!("{row}");
    }
    Ok(())
}
