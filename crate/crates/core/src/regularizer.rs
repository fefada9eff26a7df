//! Likelihood-derived shrinkage toward a structured target.
//!
//! At the stationary point of the Gaussian likelihood with `Σ = (1 + κ)T`, the
//! penalty satisfies `κT = R − T`. Taking entrywise l1 norms of both sides
//! gives `κ = ‖R − T‖₁ / ‖T‖₁`, which is rescaled to a shrinkage weight
//! `γ = 1 / (1 + κ)` and used in `R_γ = γR + (1 − γ)T`. Everything runs on the
//! correlation scale; the covariance estimate is recovered from the sample
//! variances.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::matrix::{
    from_correlation, sample_covariance, to_correlation, Dataset, Divisor, Scale, SymMatrix,
};
use crate::targets::{build_target, estimate_t, target_l1_norm, TargetKind, TargetSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedEstimate {
    pub kappa: f64,
    pub gamma: f64,
    pub t_hat: Option<f64>,
    pub target: TargetSpec,
    /// Sample correlation matrix the estimate was built from.
    pub r_hat: SymMatrix,
    pub r_gamma: SymMatrix,
    /// Back-transformed covariance; absent when fitted from a correlation matrix.
    pub sigma_gamma: Option<SymMatrix>,
    /// Sample variances used to rescale `r_gamma`.
    pub variances: Option<DVector<f64>>,
    /// Set when `γ = 1` and the sample correlation is rank deficient (`p > n`),
    /// so `r_gamma` is only positive semi-definite.
    pub rank_deficient: bool,
}

fn check_correlation(r: &SymMatrix) -> Result<()> {
    if r.scale() != Scale::Correlation {
        return Err(Error::Contract("expected a correlation-scale matrix".into()));
    }
    Ok(())
}

/// `κ = ‖R − T‖₁ / ‖T‖₁`.
pub fn estimate_kappa(r: &SymMatrix, spec: &TargetSpec) -> Result<f64> {
    check_correlation(r)?;
    let p = r.dim();
    let target = build_target(spec, p)?;
    let numerator: f64 = (r.as_matrix() - target.as_matrix()).iter().map(|v| v.abs()).sum();
    Ok(numerator / target_l1_norm(spec, p)?)
}

pub fn gamma_from_kappa(kappa: f64) -> Result<f64> {
    if kappa.is_nan() || kappa < 0.0 {
        return Err(Error::Contract(format!("kappa must be nonnegative, got {kappa}")));
    }
    Ok(1.0 / (1.0 + kappa))
}

/// Convex combination `γR + (1 − γ)T`.
pub fn regularize_correlation(r: &SymMatrix, spec: &TargetSpec, gamma: f64) -> Result<SymMatrix> {
    check_correlation(r)?;
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Contract(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    if gamma == 1.0 {
        return Ok(r.clone());
    }
    let target = build_target(spec, r.dim())?;
    if gamma == 0.0 {
        return Ok(target);
    }
    let m = r.as_matrix() * gamma + target.as_matrix() * (1.0 - gamma);
    Ok(SymMatrix::symmetrized(m, Scale::Correlation))
}

/// `S_d^{1/2} R_γ S_d^{1/2}`.
pub fn regularized_covariance(r_gamma: &SymMatrix, variances: &DVector<f64>) -> Result<SymMatrix> {
    from_correlation(r_gamma, variances)
}

/// Resolve the target for `kind`, estimating `t` from `r` where needed.
pub fn resolve_target(r: &SymMatrix, kind: TargetKind) -> Result<(TargetSpec, Option<f64>)> {
    match kind {
        TargetKind::Identity => Ok((TargetSpec::identity(), None)),
        _ => {
            let t = estimate_t(r, kind)?;
            Ok((TargetSpec::new(kind, t), Some(t)))
        }
    }
}

/// Fit directly from a correlation matrix.
pub fn fit_correlation(r: &SymMatrix, kind: TargetKind) -> Result<RegularizedEstimate> {
    fit_correlation_with(r, kind, None)
}

/// As [`fit_correlation`], optionally overriding the estimated `γ`.
pub fn fit_correlation_with(
    r: &SymMatrix,
    kind: TargetKind,
    gamma_override: Option<f64>,
) -> Result<RegularizedEstimate> {
    check_correlation(r)?;
    let (target, t_hat) = resolve_target(r, kind)?;
    let kappa = estimate_kappa(r, &target)?;
    let gamma = match gamma_override {
        Some(g) => g,
        None => gamma_from_kappa(kappa)?,
    };
    let r_gamma = regularize_correlation(r, &target, gamma)?;
    Ok(RegularizedEstimate {
        kappa,
        gamma,
        t_hat,
        target,
        r_hat: r.clone(),
        r_gamma,
        sigma_gamma: None,
        variances: None,
        rank_deficient: false,
    })
}

/// Full pipeline: center, `S = XᵗX/n`, correlation, `t̂`, `κ`, `γ`, `R_γ`, `Σ_γ`.
pub fn fit(d: &Dataset, kind: TargetKind) -> Result<RegularizedEstimate> {
    fit_with(d, kind, Divisor::N, None)
}

pub fn fit_with(
    d: &Dataset,
    kind: TargetKind,
    divisor: Divisor,
    gamma_override: Option<f64>,
) -> Result<RegularizedEstimate> {
    let centered = d.center_columns()?;
    let s = sample_covariance(&centered, divisor)?;
    let (r, variances) = to_correlation(&s)?;
    let mut est = fit_correlation_with(&r, kind, gamma_override)?;
    est.rank_deficient = est.gamma == 1.0 && d.p() >= d.n();
    est.sigma_gamma = Some(regularized_covariance(&est.r_gamma, &variances)?);
    est.variances = Some(variances);
    Ok(est)
}
