//! Competitor estimators: the sample covariance and an analytic shrinkage of
//! the sample correlation toward the identity.
//!
//! The shrinkage intensity is the usual unbiased-plug-in one,
//!
//! ```text
//! λ* = Σ_{i≠j} Var(r_ij) / Σ_{i≠j} r_ij²
//! Var(r_ij) = n / (n-1)³ · Σ_k (w_kij − w̄_ij)²
//! ```
//!
//! where `w_kij` is the product of the standardized residuals of variables
//! `i` and `j` in observation `k`. The intensity is clamped to `[0, 1]`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matrix::{from_correlation, sample_covariance, Dataset, Divisor, Scale, SymMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkageEstimate {
    pub lambda: f64,
    pub r_star: SymMatrix,
    /// Maximum-likelihood variances (divisor `n`) for the back-transform.
    pub variances: DVector<f64>,
}

impl ShrinkageEstimate {
    pub fn covariance(&self) -> Result<SymMatrix> {
        from_correlation(&self.r_star, &self.variances)
    }
}

/// Maximum-likelihood covariance `XᵗX / n` of the centered data.
pub fn mle_covariance(d: &Dataset) -> Result<SymMatrix> {
    sample_covariance(&d.center_columns()?, Divisor::N)
}

/// Analytic shrinkage of the sample correlation toward the identity.
pub fn shrink_identity(d: &Dataset) -> Result<ShrinkageEstimate> {
    let (n, p) = (d.n(), d.p());
    if n < 3 {
        return Err(Error::DegenerateSample(format!(
            "shrinkage intensity needs at least 3 rows, got {n}"
        )));
    }
    let nf = n as f64;
    let centered = d.center_columns()?;
    let x = centered.values();

    let mut variances = DVector::zeros(p);
    let mut z = DMatrix::zeros(n, p);
    for j in 0..p {
        let ss: f64 = x.column(j).iter().map(|v| v * v).sum();
        if ss.is_nan() || ss <= 0.0 {
            return Err(Error::ZeroVariance { column: j });
        }
        variances[j] = ss / nf;
        let sd = (ss / (nf - 1.0)).sqrt();
        z.set_column(j, &(x.column(j) / sd));
    }

    let mut r = DMatrix::identity(p, p);
    let mut sum_var = 0.0;
    let mut sum_sq = 0.0;
    for i in 0..p {
        for j in (i + 1)..p {
            let w: Vec<f64> = (0..n).map(|k| z[(k, i)] * z[(k, j)]).collect();
            let w_bar = w.iter().sum::<f64>() / nf;
            let r_ij = (nf / (nf - 1.0) * w_bar).clamp(-1.0, 1.0);
            let var = nf / (nf - 1.0).powi(3) * w.iter().map(|v| (v - w_bar).powi(2)).sum::<f64>();
            r[(i, j)] = r_ij;
            r[(j, i)] = r_ij;
            // each unordered pair appears twice in the i≠j sums; the factor cancels
            sum_var += var;
            sum_sq += r_ij * r_ij;
        }
    }

    let lambda = if sum_sq > 0.0 {
        (sum_var / sum_sq).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let shrunk = r * (1.0 - lambda) + DMatrix::identity(p, p) * lambda;
    Ok(ShrinkageEstimate {
        lambda,
        r_star: SymMatrix::symmetrized(shrunk, Scale::Correlation),
        variances,
    })
}
