//! Structured correlation targets: identity, AR(1) and exchangeable.
//!
//! The AR(1) target has entries `t^|i-j|`; the exchangeable target has unit
//! diagonal and constant off-diagonal `t`. Both have closed-form inverses,
//! determinants and entrywise l1 norms, implemented here directly.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Scale, SymMatrix};

/// Distance from the positive-definite boundary kept by estimated `t`.
pub const CLAMP_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Identity,
    Ar1,
    Exchangeable,
}

impl TargetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetKind::Identity => "identity",
            TargetKind::Ar1 => "ar1",
            TargetKind::Exchangeable => "exchangeable",
        }
    }

    /// Open interval of admissible `t` for dimension `p`.
    pub fn valid_interval(self, p: usize) -> (f64, f64) {
        match self {
            TargetKind::Identity => (0.0, 0.0),
            TargetKind::Ar1 => (-1.0, 1.0),
            TargetKind::Exchangeable if p >= 2 => (-1.0 / (p - 1) as f64, 1.0),
            TargetKind::Exchangeable => (f64::NEG_INFINITY, 1.0),
        }
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TargetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "identity" => Ok(TargetKind::Identity),
            "ar1" => Ok(TargetKind::Ar1),
            "exchangeable" => Ok(TargetKind::Exchangeable),
            other => Err(Error::Config(format!("unknown target kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSpec {
    kind: TargetKind,
    t: f64,
}

impl TargetSpec {
    pub fn identity() -> Self {
        Self {
            kind: TargetKind::Identity,
            t: 0.0,
        }
    }

    pub fn ar1(t: f64) -> Self {
        Self {
            kind: TargetKind::Ar1,
            t,
        }
    }

    pub fn exchangeable(t: f64) -> Self {
        Self {
            kind: TargetKind::Exchangeable,
            t,
        }
    }

    /// `t` is ignored for the identity kind.
    pub fn new(kind: TargetKind, t: f64) -> Self {
        match kind {
            TargetKind::Identity => Self::identity(),
            _ => Self { kind, t },
        }
    }

    pub fn kind(&self) -> TargetKind {
        self.kind
    }

    /// Structure parameter; `None` for the identity target.
    pub fn t(&self) -> Option<f64> {
        match self.kind {
            TargetKind::Identity => None,
            _ => Some(self.t),
        }
    }

    /// Structure parameter with identity mapped to `t = 0`.
    pub fn parameter(&self) -> f64 {
        self.t
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if p == 0 {
            return Err(Error::InvalidShape("target dimension 0".into()));
        }
        if self.kind == TargetKind::Identity {
            return Ok(());
        }
        let (lo, hi) = self.kind.valid_interval(p);
        if !self.t.is_finite() || self.t <= lo || self.t >= hi {
            return Err(Error::InvalidTarget(format!(
                "{} with t = {} is not positive definite for p = {p} (need {lo} < t < {hi})",
                self.kind, self.t
            )));
        }
        Ok(())
    }

    fn check_margin(&self, p: usize) -> Result<()> {
        self.validate(p)?;
        if self.kind == TargetKind::Identity {
            return Ok(());
        }
        let (lo, hi) = self.kind.valid_interval(p);
        let dist = (self.t - lo).min(hi - self.t);
        // clamped estimates sit exactly at the margin and must pass
        if dist < CLAMP_MARGIN * (1.0 - 1e-6) {
            return Err(Error::NearSingular { t: self.t });
        }
        Ok(())
    }
}

impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.t() {
            None => write!(f, "identity"),
            Some(t) => write!(f, "{}({t})", self.kind),
        }
    }
}

/// Mean with the first element as pivot, so that constant input is returned
/// exactly.
fn pivoted_mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = values.clone();
    let Some(pivot) = it.next() else {
        return f64::NAN;
    };
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + (v - pivot), c + 1));
    pivot + sum / count as f64
}

/// Likelihood estimate of the structure parameter from a correlation matrix.
///
/// AR(1) uses the mean of the first superdiagonal, exchangeable the mean of
/// all off-diagonal entries. The result is clamped into the valid interval
/// shrunk by [`CLAMP_MARGIN`].
pub fn estimate_t(r: &SymMatrix, kind: TargetKind) -> Result<f64> {
    if r.scale() != Scale::Correlation {
        return Err(Error::Contract("estimate_t expects a correlation matrix".into()));
    }
    let p = r.dim();
    if kind == TargetKind::Identity {
        return Err(Error::NoParameter);
    }
    if p < 2 {
        return Err(Error::UndefinedParameter { p });
    }
    let raw = match kind {
        TargetKind::Ar1 => pivoted_mean((1..p).map(|i| r.get(i - 1, i))),
        TargetKind::Exchangeable => pivoted_mean(
            (0..p).flat_map(|i| (0..p).filter(move |&j| j != i).map(move |j| r.get(i, j))),
        ),
        TargetKind::Identity => unreachable!(),
    };
    let (lo, hi) = kind.valid_interval(p);
    Ok(raw.clamp(lo + CLAMP_MARGIN, hi - CLAMP_MARGIN))
}

/// Correlation-scale target matrix.
pub fn build_target(spec: &TargetSpec, p: usize) -> Result<SymMatrix> {
    spec.validate(p)?;
    let t = spec.parameter();
    let m = match spec.kind() {
        TargetKind::Identity => DMatrix::identity(p, p),
        TargetKind::Ar1 => DMatrix::from_fn(p, p, |i, j| t.powi(i.abs_diff(j) as i32)),
        TargetKind::Exchangeable => DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { t }),
    };
    Ok(SymMatrix::symmetrized(m, Scale::Correlation))
}

/// Closed-form `Σ|T_ij|`. Negative `t` enters through `|t|`.
pub fn target_l1_norm(spec: &TargetSpec, p: usize) -> Result<f64> {
    spec.validate(p)?;
    let t = spec.parameter().abs();
    let pf = p as f64;
    Ok(match spec.kind() {
        TargetKind::Identity => pf,
        TargetKind::Ar1 => {
            let tail: f64 = (1..p).map(|k| k as f64 * t.powi((p - k) as i32)).sum();
            pf + 2.0 * tail
        }
        TargetKind::Exchangeable => pf + pf * (pf - 1.0) * t,
    })
}

/// Closed-form inverse of the target.
pub fn target_inverse(spec: &TargetSpec, p: usize) -> Result<SymMatrix> {
    spec.check_margin(p)?;
    let t = spec.parameter();
    let m = match spec.kind() {
        TargetKind::Identity => DMatrix::identity(p, p),
        TargetKind::Ar1 if p == 1 => DMatrix::identity(1, 1),
        TargetKind::Ar1 => {
            let scale = 1.0 / (1.0 - t * t);
            DMatrix::from_fn(p, p, |i, j| {
                let v = match i.abs_diff(j) {
                    0 if i == 0 || i == p - 1 => 1.0,
                    0 => 1.0 + t * t,
                    1 => -t,
                    _ => 0.0,
                };
                v * scale
            })
        }
        TargetKind::Exchangeable => {
            let a = 1.0 / (1.0 - t);
            let b = t / (1.0 + (p as f64 - 1.0) * t);
            DMatrix::from_fn(p, p, |i, j| a * (if i == j { 1.0 } else { 0.0 } - b))
        }
    };
    Ok(SymMatrix::symmetrized(m, Scale::Covariance))
}

/// Closed-form log-determinant of the target.
pub fn target_logdet(spec: &TargetSpec, p: usize) -> Result<f64> {
    spec.check_margin(p)?;
    let t = spec.parameter();
    let m1 = p as f64 - 1.0;
    Ok(match spec.kind() {
        TargetKind::Identity => 0.0,
        TargetKind::Ar1 => m1 * (1.0 - t * t).ln(),
        TargetKind::Exchangeable => m1 * (1.0 - t).ln() + (1.0 + m1 * t).ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::eigenvalues_sym;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn brute_l1(m: &SymMatrix) -> f64 {
        let mut s = 0.0;
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                s += m.get(i, j).abs();
            }
        }
        s
    }

    fn corr(p: usize, f: impl Fn(usize, usize) -> f64) -> SymMatrix {
        SymMatrix::correlation(DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { f(i, j) })).unwrap()
    }

    #[test]
    fn estimates_ar1_from_superdiagonal() {
        let sup = [0.4, 0.5, 0.6];
        let r = corr(4, |i, j| if i.abs_diff(j) == 1 { sup[i.min(j)] } else { 0.1 });
        assert_abs_diff_eq!(estimate_t(&r, TargetKind::Ar1).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn estimates_exchangeable_from_off_diagonal() {
        let vals = [[0.0, 0.2, 0.4], [0.2, 0.0, 0.6], [0.4, 0.6, 0.0]];
        let r = corr(3, |i, j| vals[i][j]);
        assert_abs_diff_eq!(estimate_t(&r, TargetKind::Exchangeable).unwrap(), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn estimate_recovers_exact_structure() {
        for &t in &[-0.6, 0.0, 0.3, 0.5, 0.9] {
            for p in [2, 5, 20] {
                let target = build_target(&TargetSpec::ar1(t), p).unwrap();
                assert_eq!(estimate_t(&target, TargetKind::Ar1).unwrap(), t);
            }
        }
    }

    #[test]
    fn estimate_t_errors() {
        let r = SymMatrix::identity(3);
        assert!(matches!(estimate_t(&r, TargetKind::Identity), Err(Error::NoParameter)));
        assert!(matches!(
            estimate_t(&SymMatrix::identity(1), TargetKind::Ar1),
            Err(Error::UndefinedParameter { p: 1 })
        ));
    }

    #[test]
    fn estimate_is_clamped() {
        let r = corr(3, |_, _| 1.0);
        let t = estimate_t(&r, TargetKind::Exchangeable).unwrap();
        assert_eq!(t, 1.0 - CLAMP_MARGIN);
        assert!(build_target(&TargetSpec::exchangeable(t), 3).is_ok());
        assert!(target_inverse(&TargetSpec::exchangeable(t), 3).is_ok());
    }

    #[test]
    fn builds_targets() {
        assert_eq!(build_target(&TargetSpec::identity(), 3).unwrap().as_matrix(), &DMatrix::identity(3, 3));
        let ar = build_target(&TargetSpec::ar1(0.5), 3).unwrap();
        let want = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.25, 0.5, 1.0, 0.5, 0.25, 0.5, 1.0]);
        assert_eq!(ar.as_matrix(), &want);
        let ex = build_target(&TargetSpec::exchangeable(0.5), 3).unwrap();
        assert!((0..3).all(|i| (0..3).all(|j| ex.get(i, j) == if i == j { 1.0 } else { 0.5 })));
    }

    #[test]
    fn invalid_targets_are_rejected() {
        assert!(matches!(build_target(&TargetSpec::ar1(1.0), 3), Err(Error::InvalidTarget(_))));
        assert!(matches!(build_target(&TargetSpec::exchangeable(-0.6), 3), Err(Error::InvalidTarget(_))));
        assert!(build_target(&TargetSpec::exchangeable(-0.6), 2).is_ok());
        assert!(matches!(
            target_inverse(&TargetSpec::ar1(1.0 - 1e-9), 3),
            Err(Error::NearSingular { .. })
        ));
        assert!(matches!(
            target_logdet(&TargetSpec::exchangeable(-0.5 + 1e-8), 3),
            Err(Error::NearSingular { .. })
        ));
    }

    #[test]
    fn l1_norm_examples() {
        assert_eq!(target_l1_norm(&TargetSpec::identity(), 5).unwrap(), 5.0);
        assert_abs_diff_eq!(target_l1_norm(&TargetSpec::ar1(0.5), 3).unwrap(), 5.5, epsilon = 1e-12);
        assert_abs_diff_eq!(target_l1_norm(&TargetSpec::exchangeable(0.5), 3).unwrap(), 6.0, epsilon = 1e-12);
    }

    #[test]
    fn inverse_examples() {
        for spec in [TargetSpec::identity(), TargetSpec::ar1(0.0), TargetSpec::exchangeable(0.0)] {
            assert_eq!(target_inverse(&spec, 4).unwrap().as_matrix(), &DMatrix::identity(4, 4));
        }
        let inv = target_inverse(&TargetSpec::ar1(0.5), 2).unwrap();
        let numeric = build_target(&TargetSpec::ar1(0.5), 2).unwrap().into_matrix().try_inverse().unwrap();
        assert!((inv.as_matrix() - &numeric).amax() < 1e-12);
        assert_abs_diff_eq!(inv.get(0, 0), 4.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(inv.get(0, 1), -2.0 / 3.0, epsilon = 1e-12);

        let inv = target_inverse(&TargetSpec::exchangeable(0.5), 3).unwrap();
        let numeric = build_target(&TargetSpec::exchangeable(0.5), 3).unwrap().into_matrix().try_inverse().unwrap();
        assert!((inv.as_matrix() - &numeric).amax() < 1e-12);
        assert_abs_diff_eq!(inv.get(1, 1), 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(inv.get(1, 2), -0.5, epsilon = 1e-12);
    }

    #[test]
    fn logdet_examples() {
        assert_eq!(target_logdet(&TargetSpec::identity(), 7).unwrap(), 0.0);
        let got = target_logdet(&TargetSpec::ar1(0.5), 3).unwrap();
        let numeric = build_target(&TargetSpec::ar1(0.5), 3).unwrap().into_matrix().determinant().ln();
        assert_abs_diff_eq!(got, numeric, epsilon = 1e-12);
        assert_abs_diff_eq!(got, -0.575364, epsilon = 1e-6);
        let got = target_logdet(&TargetSpec::exchangeable(0.5), 3).unwrap();
        let numeric = build_target(&TargetSpec::exchangeable(0.5), 3).unwrap().into_matrix().determinant().ln();
        assert_abs_diff_eq!(got, numeric, epsilon = 1e-12);
        assert_abs_diff_eq!(got, 0.5f64.ln(), epsilon = 1e-12);
    }

    fn spec_strategy() -> impl Strategy<Value = (TargetSpec, usize)> {
        (2usize..=50, 0usize..3, -0.95f64..0.95).prop_map(|(p, k, t)| {
            let spec = match k {
                0 => TargetSpec::identity(),
                1 => TargetSpec::ar1(t),
                _ => {
                    let lo = -1.0 / (p - 1) as f64;
                    TargetSpec::exchangeable(t.max(lo + 0.05))
                }
            };
            (spec, p)
        })
    }

    proptest! {
        #[test]
        fn closed_forms_match_numeric((spec, p) in spec_strategy()) {
            let target = build_target(&spec, p).unwrap();
            let l1 = target_l1_norm(&spec, p).unwrap();
            prop_assert!((l1 - brute_l1(&target)).abs() <= 1e-10 * l1.max(1.0));

            let inv = target_inverse(&spec, p).unwrap();
            let prod = target.as_matrix() * inv.as_matrix();
            prop_assert!((prod - DMatrix::identity(p, p)).amax() <= 1e-8);

            let logdet = target_logdet(&spec, p).unwrap();
            let from_eigen: f64 = eigenvalues_sym(&target).iter().map(|v| v.ln()).sum();
            prop_assert!((logdet - from_eigen).abs() <= 1e-8);
        }

        #[test]
        fn exchangeable_estimate_is_permutation_invariant(
            p in 3usize..10,
            seed in proptest::collection::vec(-0.3f64..0.9, 100),
            shift in 1usize..9,
        ) {
            let r = corr(p, |i, j| seed[i.min(j) * 10 + i.max(j)]);
            let perm: Vec<usize> = (0..p).map(|i| (i + shift) % p).collect();
            let permuted = corr(p, |i, j| r.get(perm[i], perm[j]));
            let a = estimate_t(&r, TargetKind::Exchangeable).unwrap();
            let b = estimate_t(&permuted, TargetKind::Exchangeable).unwrap();
            prop_assert!((a - b).abs() < 1e-14);
        }
    }
}
