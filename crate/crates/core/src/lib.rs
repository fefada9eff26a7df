//! Covariance regularization toward informative correlation targets.
//!
//! The sample correlation matrix is shrunk toward an identity, AR(1) or
//! exchangeable target, with the structure parameter and the shrinkage weight
//! both obtained in closed form from the Gaussian likelihood. Alongside the
//! estimator the crate ships the pieces needed to benchmark it: a competing
//! analytic shrinkage estimator, a reproducible multivariate-normal sampler,
//! spectral loss metrics, a regularized MANOVA and an experiment harness.

pub mod baselines;
pub mod error;
pub mod evaluation;
pub mod harness;
pub mod manova;
pub mod matrix;
pub mod regularizer;
pub mod sampler;
pub mod targets;

pub use error::{Error, Result};
pub use matrix::{Dataset, Divisor, Scale, SymMatrix};
pub use regularizer::{fit, fit_correlation, RegularizedEstimate};
pub use targets::{TargetKind, TargetSpec};
