//! Losses between an estimated and a true covariance matrix.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{eigenvalues_sym, SymMatrix};
use crate::sampler::StructureKind;

/// One replicate of one method in one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub structure: StructureKind,
    pub t_true: Option<f64>,
    pub n: usize,
    pub p: usize,
    pub method: String,
    pub replicate: u64,
    /// `γ̂` for the proposed method, `λ̂` for the shrinkage baseline.
    pub shrinkage: Option<f64>,
    pub t_hat: Option<f64>,
    pub eigen_abs_error: f64,
    pub frobenius_error: f64,
    pub condition_number: f64,
}

fn same_dim(est: &SymMatrix, truth: &SymMatrix) -> Result<()> {
    if est.dim() != truth.dim() {
        return Err(Error::DimensionMismatch {
            expected: truth.dim(),
            found: est.dim(),
        });
    }
    Ok(())
}

/// `Σ |λ_i(est) − λ_i(truth)|` over descending spectra.
pub fn eigen_abs_error(est: &SymMatrix, truth: &SymMatrix) -> Result<f64> {
    same_dim(est, truth)?;
    Ok(eigenvalues_sym(est)
        .iter()
        .zip(eigenvalues_sym(truth))
        .map(|(a, b)| (a - b).abs())
        .sum())
}

pub fn frobenius_error(est: &SymMatrix, truth: &SymMatrix) -> Result<f64> {
    same_dim(est, truth)?;
    Ok((est.as_matrix() - truth.as_matrix()).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn sym(p: usize, v: &[f64]) -> SymMatrix {
        SymMatrix::covariance(DMatrix::from_row_slice(p, p, v)).unwrap()
    }

    #[test]
    fn eigen_error_examples() {
        let a = sym(2, &[2.0, 1.0, 1.0, 2.0]);
        assert_eq!(eigen_abs_error(&a, &a).unwrap(), 0.0);
        let e = eigen_abs_error(&SymMatrix::identity(2), &a).unwrap();
        assert!((e - 2.0).abs() < 1e-12);
        let two = sym(3, &[2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 2.0]);
        assert!((eigen_abs_error(&two, &SymMatrix::identity(3)).unwrap() - 3.0).abs() < 1e-12);
        assert!(matches!(
            eigen_abs_error(&two, &SymMatrix::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn frobenius_examples() {
        let a = sym(2, &[1.0, 2.0, 2.0, 1.0]);
        assert_eq!(frobenius_error(&a, &a).unwrap(), 0.0);
        let b = sym(2, &[1.0, 5.0, 5.0, 1.0]);
        assert!((frobenius_error(&a, &b).unwrap() - 18f64.sqrt()).abs() < 1e-12);
        let zero = sym(2, &[0.0; 4]);
        assert!((frobenius_error(&SymMatrix::identity(2), &zero).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    fn sym_strategy(p: usize) -> impl Strategy<Value = SymMatrix> {
        proptest::collection::vec(-3.0f64..3.0, p * p).prop_map(move |v| {
            let m = DMatrix::from_vec(p, p, v);
            SymMatrix::covariance(&m + m.transpose()).unwrap()
        })
    }

    /// Orthogonal matrix from the QR factorization of a random square matrix.
    fn rotation(p: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(p, p, &v[..p * p]).qr().q()
    }

    proptest! {
        #[test]
        fn metric_properties(
            (a, b, c) in (1usize..7).prop_flat_map(|p| (sym_strategy(p), sym_strategy(p), sym_strategy(p))),
            rot in proptest::collection::vec(-1.0f64..1.0, 36),
        ) {
            let ab = eigen_abs_error(&a, &b).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - eigen_abs_error(&b, &a).unwrap()).abs() < 1e-12);
            let ac = eigen_abs_error(&a, &c).unwrap();
            let cb = eigen_abs_error(&c, &b).unwrap();
            prop_assert!(ab <= ac + cb + 1e-9);

            let p = a.dim();
            let q = rotation(p, &rot);
            prop_assume!((q.transpose() * &q - DMatrix::identity(p, p)).amax() < 1e-10);
            let conj = |m: &SymMatrix| SymMatrix::covariance(&q * m.as_matrix() * q.transpose()).unwrap();
            let rotated = eigen_abs_error(&conj(&a), &conj(&b)).unwrap();
            prop_assert!((rotated - ab).abs() < 1e-9);
        }
    }
}
