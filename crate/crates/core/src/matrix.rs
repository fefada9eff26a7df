//! Dense symmetric-matrix primitives.
//!
//! [`Dataset`] holds an `n x p` observation matrix (rows are observations) with
//! optional group labels. [`SymMatrix`] is a symmetric `p x p` matrix tagged
//! with its scale; correlation-scale matrices carry a unit diagonal.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Absolute tolerance used for symmetry and unit-diagonal checks.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: DMatrix<f64>,
    group_labels: Option<Vec<usize>>,
}

impl Dataset {
    /// Build a dataset, rejecting empty shapes and non-finite entries.
    pub fn new(values: DMatrix<f64>, group_labels: Option<Vec<usize>>) -> Result<Self> {
        let (n, p) = values.shape();
        if n == 0 || p == 0 {
            return Err(Error::InvalidShape(format!("{n} x {p}")));
        }
        if let Some(labels) = &group_labels {
            if labels.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: labels.len(),
                });
            }
        }
        for j in 0..p {
            for i in 0..n {
                let v = values[(i, j)];
                if !v.is_finite() {
                    return Err(Error::InvalidData {
                        row: i,
                        column: j,
                        reason: format!("non-finite value {v}"),
                    });
                }
            }
        }
        Ok(Self {
            values,
            group_labels,
        })
    }

    /// Row-major convenience constructor.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(Error::InvalidData {
                row: i,
                column: r.len().min(p),
                reason: format!("expected {p} fields, found {}", r.len()),
            });
        }
        Self::new(DMatrix::from_fn(n, p, |i, j| rows[i][j]), None)
    }

    pub fn with_labels(self, labels: Vec<usize>) -> Result<Self> {
        Self::new(self.values, Some(labels))
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn group_labels(&self) -> Option<&[usize]> {
        self.group_labels.as_deref()
    }

    pub(crate) fn replace_values(&self, values: DMatrix<f64>) -> Self {
        Self {
            values,
            group_labels: self.group_labels.clone(),
        }
    }

    /// Subtract each column mean.
    pub fn center_columns(&self) -> Result<Self> {
        let n = self.n();
        if n < 2 {
            return Err(Error::DegenerateSample(format!(
                "centering needs at least 2 rows, got {n}"
            )));
        }
        let mut values = self.values.clone();
        for mut col in values.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
        Ok(self.replace_values(values))
    }
}

/// Divisor used when forming `XᵗX / divisor`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Divisor {
    /// Maximum-likelihood divisor `n`.
    N,
    /// Unbiased divisor `n - 1`.
    NMinusOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Covariance,
    Correlation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    entries: DMatrix<f64>,
    scale: Scale,
}

impl SymMatrix {
    /// Validate and symmetrize `entries`.
    ///
    /// Entries may be asymmetric by at most [`SYMMETRY_TOL`] relative to the
    /// largest magnitude (floored at 1); the stored matrix is `(M + Mᵗ) / 2`.
    pub fn new(entries: DMatrix<f64>, scale: Scale) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c {
            return Err(Error::DimensionMismatch {
                expected: r,
                found: c,
            });
        }
        if r == 0 {
            return Err(Error::InvalidShape("0 x 0".into()));
        }
        if let Some((i, j, v)) = first_non_finite(&entries) {
            return Err(Error::InvalidData {
                row: i,
                column: j,
                reason: format!("non-finite value {v}"),
            });
        }
        let tol = SYMMETRY_TOL * entries.amax().max(1.0);
        for i in 0..r {
            for j in (i + 1)..r {
                let gap = (entries[(i, j)] - entries[(j, i)]).abs();
                if gap > tol {
                    return Err(Error::Asymmetric { row: i, col: j, gap });
                }
            }
        }
        let out = Self::symmetrized(entries, scale);
        if scale == Scale::Correlation {
            out.check_correlation()?;
        }
        Ok(out)
    }

    pub fn covariance(entries: DMatrix<f64>) -> Result<Self> {
        Self::new(entries, Scale::Covariance)
    }

    pub fn correlation(entries: DMatrix<f64>) -> Result<Self> {
        Self::new(entries, Scale::Correlation)
    }

    pub fn identity(p: usize) -> Self {
        Self {
            entries: DMatrix::identity(p, p),
            scale: Scale::Correlation,
        }
    }

    /// Internal constructor for matrices that are symmetric up to rounding.
    pub(crate) fn symmetrized(entries: DMatrix<f64>, scale: Scale) -> Self {
        let mut m = entries;
        let p = m.nrows();
        for i in 0..p {
            for j in (i + 1)..p {
                let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = avg;
                m[(j, i)] = avg;
            }
        }
        if scale == Scale::Correlation {
            for i in 0..p {
                m[(i, i)] = 1.0;
            }
        }
        Self { entries: m, scale }
    }

    fn check_correlation(&self) -> Result<()> {
        let p = self.dim();
        for i in 0..p {
            for j in 0..p {
                let v = self.entries[(i, j)];
                if i == j && (v - 1.0).abs() > SYMMETRY_TOL {
                    return Err(Error::NotCorrelation(format!("diagonal entry {i} is {v}")));
                }
                if v.abs() > 1.0 + SYMMETRY_TOL {
                    return Err(Error::NotCorrelation(format!("entry ({i},{j}) is {v}")));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn diagonal(&self) -> DVector<f64> {
        self.entries.diagonal()
    }

    /// Sum of absolute values of all entries.
    pub fn l1_norm(&self) -> f64 {
        self.entries.iter().map(|v| v.abs()).sum()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.entries.clone().cholesky().is_some()
    }
}

fn first_non_finite(m: &DMatrix<f64>) -> Option<(usize, usize, f64)> {
    let (r, c) = m.shape();
    (0..c)
        .flat_map(|j| (0..r).map(move |i| (i, j)))
        .map(|(i, j)| (i, j, m[(i, j)]))
        .find(|(_, _, v)| !v.is_finite())
}

/// `XᵗX / divisor` for a centered dataset.
pub fn sample_covariance(d: &Dataset, divisor: Divisor) -> Result<SymMatrix> {
    let n = d.n();
    let denom = match divisor {
        Divisor::N => n as f64,
        Divisor::NMinusOne => {
            if n < 2 {
                return Err(Error::DegenerateSample(format!(
                    "divisor n - 1 needs at least 2 rows, got {n}"
                )));
            }
            (n - 1) as f64
        }
    };
    let x = d.values();
    let scatter = x.tr_mul(x) / denom;
    Ok(SymMatrix::symmetrized(scatter, Scale::Covariance))
}

/// Rescale a covariance matrix to correlation, returning the original diagonal.
pub fn to_correlation(s: &SymMatrix) -> Result<(SymMatrix, DVector<f64>)> {
    let diag = s.diagonal();
    if let Some(column) = diag.iter().position(|&v| v <= 0.0) {
        return Err(Error::ZeroVariance { column });
    }
    let inv_sd = diag.map(|v| 1.0 / v.sqrt());
    let p = s.dim();
    let r = DMatrix::from_fn(p, p, |i, j| {
        (s.get(i, j) * inv_sd[i] * inv_sd[j]).clamp(-1.0, 1.0)
    });
    Ok((SymMatrix::symmetrized(r, Scale::Correlation), diag))
}

/// `D^{1/2} R D^{1/2}` with `D = diag(variances)`.
pub fn from_correlation(r: &SymMatrix, variances: &DVector<f64>) -> Result<SymMatrix> {
    let p = r.dim();
    if variances.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: variances.len(),
        });
    }
    if let Some(column) = variances.iter().position(|&v| v.is_nan() || v <= 0.0) {
        return Err(Error::ZeroVariance { column });
    }
    let sd = variances.map(f64::sqrt);
    let m = DMatrix::from_fn(p, p, |i, j| r.get(i, j) * sd[i] * sd[j]);
    Ok(SymMatrix::symmetrized(m, Scale::Covariance))
}

/// Eigenvalues sorted in descending order.
pub fn eigenvalues_sym(m: &SymMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = m.as_matrix().clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Eigenvalues of a raw square matrix, after checking symmetry.
pub fn eigenvalues_of(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let s = SymMatrix::new(m.clone(), Scale::Covariance)?;
    Ok(eigenvalues_sym(&s))
}

/// Eigen-decomposition with eigenvalues sorted descending and the eigenvector
/// columns permuted to match.
pub fn eigen_decomposition(m: &SymMatrix) -> (Vec<f64>, DMatrix<f64>) {
    let SymmetricEigen {
        eigenvalues,
        eigenvectors,
    } = m.as_matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));
    let values = order.iter().map(|&k| eigenvalues[k]).collect();
    let p = m.dim();
    let vectors = DMatrix::from_fn(p, p, |i, j| eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// `λ_max / λ_min`; infinite when the matrix is not positive definite.
pub fn condition_number(m: &SymMatrix) -> f64 {
    let ev = eigenvalues_sym(m);
    let (max, min) = (ev[0], ev[ev.len() - 1]);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Log-determinant of a positive-definite matrix via Cholesky.
pub fn log_det_pd(m: &DMatrix<f64>) -> Result<f64> {
    let chol = m.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    Ok(chol.l_dirty().diagonal().iter().map(|v| 2.0 * v.ln()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn column(v: &[f64]) -> Dataset {
        Dataset::new(DMatrix::from_column_slice(v.len(), 1, v), None).unwrap()
    }

    #[test]
    fn centers_columns() {
        let c = column(&[1.0, 3.0]).center_columns().unwrap();
        assert_eq!(c.values().as_slice(), &[-1.0, 1.0]);
        let c = column(&[-2.0, 2.0]).center_columns().unwrap();
        assert_eq!(c.values().as_slice(), &[-2.0, 2.0]);
        let c = column(&[1.0, 2.0, 6.0]).center_columns().unwrap();
        assert_eq!(c.values().as_slice(), &[-2.0, -1.0, 3.0]);
    }

    #[test]
    fn rejects_non_finite_and_single_row() {
        let err = Dataset::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, f64::NAN, 0.0]), None);
        assert!(matches!(err, Err(Error::InvalidData { row: 1, column: 0, .. })));
        let one = Dataset::new(DMatrix::from_row_slice(1, 2, &[1.0, 2.0]), None).unwrap();
        assert!(matches!(one.center_columns(), Err(Error::DegenerateSample(_))));
        assert!(matches!(
            sample_covariance(&one, Divisor::NMinusOne),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn covariance_examples() {
        let d = Dataset::from_rows(&[vec![1.0, 5.0], vec![1.0, 5.0]]).unwrap();
        let s = sample_covariance(&d.center_columns().unwrap(), Divisor::N).unwrap();
        assert!(s.as_matrix().iter().all(|&v| v == 0.0));

        let d = column(&[-1.0, 1.0]);
        assert_eq!(sample_covariance(&d, Divisor::N).unwrap().get(0, 0), 1.0);
        assert_eq!(sample_covariance(&d, Divisor::NMinusOne).unwrap().get(0, 0), 2.0);
    }

    #[test]
    fn correlation_examples() {
        let s = SymMatrix::covariance(DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 1.0])).unwrap();
        let (r, d) = to_correlation(&s).unwrap();
        assert_eq!(r.as_matrix(), &DMatrix::from_element(2, 2, 1.0));
        assert_eq!(d.as_slice(), &[4.0, 1.0]);

        let (r, _) = to_correlation(&SymMatrix::identity(3)).unwrap();
        assert_eq!(r.as_matrix(), &DMatrix::identity(3, 3));

        let s = SymMatrix::covariance(DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 9.0])).unwrap();
        let (r, d) = to_correlation(&s).unwrap();
        assert_eq!(r.as_matrix(), &DMatrix::identity(2, 2));
        assert_eq!(d.as_slice(), &[4.0, 9.0]);
    }

    #[test]
    fn zero_variance_names_column() {
        let s = SymMatrix::covariance(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert!(matches!(to_correlation(&s), Err(Error::ZeroVariance { column: 1 })));
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(matches!(SymMatrix::covariance(m.clone()), Err(Error::Asymmetric { .. })));
        assert!(eigenvalues_of(&m).is_err());
        // drift below tolerance is averaged away
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5 + 1e-14, 0.5, 1.0]);
        let s = SymMatrix::covariance(m).unwrap();
        assert_eq!(s.get(0, 1), s.get(1, 0));
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(eigenvalues_sym(&SymMatrix::identity(3)), vec![1.0, 1.0, 1.0]);
        let m = SymMatrix::covariance(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        let ev = eigenvalues_sym(&m);
        assert_abs_diff_eq!(ev[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[1], 1.0, epsilon = 1e-12);
        let exch = SymMatrix::correlation(DMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.5 })).unwrap();
        let ev = eigenvalues_sym(&exch);
        for (got, want) in ev.iter().zip([2.0, 0.5, 0.5]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    fn data_strategy() -> impl Strategy<Value = Dataset> {
        (2usize..12, 1usize..6).prop_flat_map(|(n, p)| {
            proptest::collection::vec(-50.0f64..50.0, n * p)
                .prop_map(move |v| Dataset::new(DMatrix::from_vec(n, p, v), None).unwrap())
        })
    }

    proptest! {
        #[test]
        fn divisor_ratio(d in data_strategy()) {
            let c = d.center_columns().unwrap();
            let n = c.n() as f64;
            let a = sample_covariance(&c, Divisor::N).unwrap();
            let b = sample_covariance(&c, Divisor::NMinusOne).unwrap();
            for (x, y) in a.as_matrix().iter().zip(b.as_matrix().iter()) {
                prop_assert!((x - y * (n - 1.0) / n).abs() <= 1e-12 * y.abs().max(1.0));
            }
            for col in c.values().column_iter() {
                prop_assert!(col.mean().abs() < 1e-12);
            }
        }

        #[test]
        fn correlation_round_trip_and_trace(d in data_strategy()) {
            let c = d.center_columns().unwrap();
            let s = sample_covariance(&c, Divisor::N).unwrap();
            prop_assume!(s.diagonal().iter().all(|&v| v > 1e-6));
            let (r, diag) = to_correlation(&s).unwrap();
            let back = from_correlation(&r, &diag).unwrap();
            for (x, y) in back.as_matrix().iter().zip(s.as_matrix().iter()) {
                prop_assert!((x - y).abs() <= 1e-12 * s.as_matrix().amax().max(1.0));
            }
            let trace: f64 = eigenvalues_sym(&r).iter().sum();
            prop_assert!((trace - r.dim() as f64).abs() < 1e-8);
        }

        #[test]
        fn eigen_reconstruction(d in data_strategy()) {
            let s = sample_covariance(&d.center_columns().unwrap(), Divisor::N).unwrap();
            let (values, q) = eigen_decomposition(&s);
            prop_assert!(values.windows(2).all(|w| w[0] >= w[1]));
            let lambda = DMatrix::from_diagonal(&DVector::from_vec(values));
            let recon = &q * lambda * q.transpose();
            let norm = s.as_matrix().norm();
            prop_assert!((recon - s.as_matrix()).norm() <= 1e-8 * norm.max(1e-300));
        }
    }
}
