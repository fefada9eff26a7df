//! Build each correlation target and compare its closed-form norm, inverse
//! and log-determinant against direct numerical computation.
//!
//! cargo run --example targets

use covreg::targets::{build_target, target_inverse, target_l1_norm, target_logdet, TargetSpec};
use nalgebra::DMatrix;

fn main() -> covreg::Result<()> {
    let p = 6;
    for spec in [TargetSpec::identity(), TargetSpec::ar1(0.7), TargetSpec::exchangeable(0.3)] {
        let t = build_target(&spec, p)?;
        let numeric_l1: f64 = t.as_matrix().iter().map(|v| v.abs()).sum();
        let inv = target_inverse(&spec, p)?;
        let residual = (t.as_matrix() * inv.as_matrix() - DMatrix::identity(p, p)).amax();
        let numeric_logdet = t.as_matrix().clone().lu().determinant().ln();
        println!("{spec} (p = {p})");
        println!("  l1 norm      closed {:>10.6}  numeric {numeric_l1:>10.6}", target_l1_norm(&spec, p)?);
        println!("  log det      closed {:>10.6}  numeric {numeric_logdet:>10.6}", target_logdet(&spec, p)?);
        println!("  |T T^-1 - I| {residual:.2e}");
    }

    // exchangeable targets need t > -1/(p-1)
    match build_target(&TargetSpec::exchangeable(-0.3), p) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
