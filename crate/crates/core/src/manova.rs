//! One-way MANOVA with a regularized within-group covariance.
//!
//! The statistic is a Wilks-type ratio `Λ = |W| / |W + B|`, where `W` is the
//! regularized covariance of the group-centered data (divisor `N`) and `B` is
//! the between-group scatter divided by `N`. With `W` unregularized this is the
//! classical `|E| / |E + H|`. Inference is by permutation of the group labels,
//! with Bartlett's chi-square approximation as an alternative.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::baselines::shrink_identity;
use crate::error::{Error, Result};
use crate::matrix::{log_det_pd, Dataset, Divisor, SymMatrix};
use crate::regularizer::fit_with;
use crate::sampler::{derive_seed, sample_mvn, stream_rng};
use crate::targets::{build_target, TargetKind, TargetSpec};

pub const MIN_PERMUTATIONS: usize = 99;
pub const DEFAULT_PERMUTATIONS: usize = 999;

/// Within-group covariance estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    /// Likelihood-derived shrinkage toward the given target family.
    Proposed(TargetKind),
    /// Same as `Proposed` but with `γ` fixed instead of estimated.
    FixedGamma(TargetKind, f64),
    /// Analytic shrinkage toward the identity correlation.
    ShrinkageBaseline,
}

impl Estimator {
    pub fn name(&self) -> String {
        match self {
            Estimator::Proposed(kind) => format!("proposed-{kind}"),
            Estimator::FixedGamma(kind, g) => format!("fixed-{kind}-{g}"),
            Estimator::ShrinkageBaseline => "shrinkage".to_string(),
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inference {
    Permutation { permutations: usize, seed: u64 },
    /// Bartlett's chi-square approximation; flagged approximate when `p >= N`.
    Bartlett,
}

impl Inference {
    pub fn permutation(seed: u64) -> Self {
        Inference::Permutation {
            permutations: DEFAULT_PERMUTATIONS,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManovaResult {
    pub wilks_lambda: f64,
    pub p_value: f64,
    pub method: String,
    /// `γ̂` (proposed) or `λ̂` (baseline).
    pub shrinkage: f64,
    pub t_hat: Option<f64>,
    /// Set for the chi-square approximation when `p >= N`.
    pub approximate: bool,
}

/// Indices of rows belonging to each distinct label, in label order.
fn group_rows(labels: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (row, &label) in labels.iter().enumerate() {
        groups.entry(label).or_default().push(row);
    }
    groups
}

fn checked_groups(d: &Dataset) -> Result<BTreeMap<usize, Vec<usize>>> {
    let labels = d.group_labels().ok_or(Error::MissingLabels)?;
    let groups = group_rows(labels);
    for (&label, rows) in &groups {
        if rows.len() < 2 {
            return Err(Error::SmallGroup {
                label,
                size: rows.len(),
                min: 2,
            });
        }
    }
    Ok(groups)
}

fn center_by(x: &DMatrix<f64>, groups: &BTreeMap<usize, Vec<usize>>) -> DMatrix<f64> {
    let mut out = x.clone();
    for rows in groups.values() {
        for j in 0..x.ncols() {
            let mean = rows.iter().map(|&i| x[(i, j)]).sum::<f64>() / rows.len() as f64;
            for &i in rows {
                out[(i, j)] -= mean;
            }
        }
    }
    out
}

/// Subtract each group's mean vector.
pub fn group_center(d: &Dataset) -> Result<Dataset> {
    let groups = checked_groups(d)?;
    Ok(d.replace_values(center_by(d.values(), &groups)))
}

/// `Σ_g n_g (m_g − m)(m_g − m)ᵗ / N`.
fn between_scatter(x: &DMatrix<f64>, groups: &BTreeMap<usize, Vec<usize>>) -> DMatrix<f64> {
    let (n, p) = x.shape();
    let grand: DVector<f64> = DVector::from_fn(p, |j, _| x.column(j).mean());
    let mut b = DMatrix::zeros(p, p);
    for rows in groups.values() {
        let mean = DVector::from_fn(p, |j, _| {
            rows.iter().map(|&i| x[(i, j)]).sum::<f64>() / rows.len() as f64
        });
        let diff = mean - &grand;
        b += &diff * diff.transpose() * rows.len() as f64;
    }
    b / n as f64
}

struct WithinEstimate {
    covariance: SymMatrix,
    shrinkage: f64,
    t_hat: Option<f64>,
}

fn within_covariance(centered: &Dataset, estimator: &Estimator) -> Result<WithinEstimate> {
    match *estimator {
        Estimator::Proposed(kind) => {
            let est = fit_with(centered, kind, Divisor::N, None)?;
            Ok(WithinEstimate {
                covariance: est.sigma_gamma.expect("fit from data sets sigma_gamma"),
                shrinkage: est.gamma,
                t_hat: est.t_hat,
            })
        }
        Estimator::FixedGamma(kind, gamma) => {
            let est = fit_with(centered, kind, Divisor::N, Some(gamma))?;
            Ok(WithinEstimate {
                covariance: est.sigma_gamma.expect("fit from data sets sigma_gamma"),
                shrinkage: est.gamma,
                t_hat: est.t_hat,
            })
        }
        Estimator::ShrinkageBaseline => {
            let est = shrink_identity(centered)?;
            Ok(WithinEstimate {
                covariance: est.covariance()?,
                shrinkage: est.lambda,
                t_hat: None,
            })
        }
    }
}

fn wilks_statistic(
    d: &Dataset,
    groups: &BTreeMap<usize, Vec<usize>>,
    estimator: &Estimator,
) -> Result<(f64, WithinEstimate)> {
    let centered = d.replace_values(center_by(d.values(), groups));
    let within = within_covariance(&centered, estimator)?;
    let b = between_scatter(d.values(), groups);
    let w = within.covariance.as_matrix();
    let log_lambda = log_det_pd(w)? - log_det_pd(&(w + b))?;
    Ok((log_lambda.exp().min(1.0), within))
}

/// Wilks statistic of `d` under `estimator`, without inference.
pub fn wilks_lambda(d: &Dataset, estimator: &Estimator) -> Result<f64> {
    let groups = checked_groups(d)?;
    Ok(wilks_statistic(d, &groups, estimator)?.0)
}

pub fn wilks_test(d: &Dataset, estimator: &Estimator, inference: &Inference) -> Result<ManovaResult> {
    let groups = checked_groups(d)?;
    if groups.len() < 2 {
        return Err(Error::DegenerateSample("MANOVA needs at least 2 groups".into()));
    }
    let (lambda, within) = wilks_statistic(d, &groups, estimator)?;
    let (n, p, g) = (d.n(), d.p(), groups.len());

    let (p_value, approximate) = match *inference {
        Inference::Permutation { permutations, seed } => {
            if permutations < MIN_PERMUTATIONS {
                return Err(Error::Config(format!(
                    "need at least {MIN_PERMUTATIONS} permutations, got {permutations}"
                )));
            }
            let labels = d.group_labels().expect("checked above");
            let mut rng = stream_rng(seed, 0);
            let mut shuffled = labels.to_vec();
            let mut extreme = 0usize;
            for _ in 0..permutations {
                shuffled.shuffle(&mut rng);
                let perm_groups = group_rows(&shuffled);
                let (perm_lambda, _) = wilks_statistic(d, &perm_groups, estimator)?;
                if perm_lambda <= lambda * (1.0 + 1e-12) {
                    extreme += 1;
                }
            }
            ((1 + extreme) as f64 / (permutations + 1) as f64, false)
        }
        Inference::Bartlett => {
            let scale = n as f64 - 1.0 - (p + g) as f64 / 2.0;
            let stat = (-scale * lambda.ln()).max(0.0);
            let df = (p * (g - 1)) as f64;
            let chi = ChiSquared::new(df).map_err(|e| Error::Contract(e.to_string()))?;
            (chi.sf(stat), p >= n)
        }
    };

    Ok(ManovaResult {
        wilks_lambda: lambda,
        p_value,
        method: estimator.name(),
        shrinkage: within.shrinkage,
        t_hat: within.t_hat,
        approximate,
    })
}

/// Parameters of the synthetic analogue of the soil-compaction profiles:
/// `groups` groups of `rows_per_group` rows, `p` depths with AR(1)
/// correlation `t`, and group mean profiles `separation · c_g · exp(−j / decay)`
/// with contrasts `c_g` evenly spaced in `[−1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SoilAnalogue {
    pub p: usize,
    pub t: f64,
    pub groups: usize,
    pub rows_per_group: usize,
    pub separation: f64,
    pub decay: f64,
    pub seed: u64,
}

impl Default for SoilAnalogue {
    fn default() -> Self {
        Self {
            p: 18,
            t: 0.9162,
            groups: 3,
            rows_per_group: 7,
            separation: 1.5,
            decay: 3.0,
            seed: 2015,
        }
    }
}

impl SoilAnalogue {
    pub fn group_means(&self) -> Vec<DVector<f64>> {
        (0..self.groups)
            .map(|g| {
                let contrast = if self.groups > 1 {
                    2.0 * g as f64 / (self.groups - 1) as f64 - 1.0
                } else {
                    0.0
                };
                DVector::from_fn(self.p, |j, _| {
                    self.separation * contrast * (-(j as f64) / self.decay).exp()
                })
            })
            .collect()
    }

    /// Draw a labelled dataset from stream `stream` of the analogue's seed.
    pub fn generate_stream(&self, stream: u64) -> Result<Dataset> {
        if self.groups < 2 || self.rows_per_group < 2 {
            return Err(Error::Config("soil analogue needs >= 2 groups of >= 2 rows".into()));
        }
        let sigma = build_target(&TargetSpec::ar1(self.t), self.p)?;
        let mut rng = stream_rng(self.seed, stream);
        let mut values = DMatrix::zeros(self.groups * self.rows_per_group, self.p);
        let mut labels = Vec::with_capacity(values.nrows());
        for (g, mean) in self.group_means().iter().enumerate() {
            let block = sample_mvn(self.rows_per_group, &sigma, &mut rng)?;
            for i in 0..self.rows_per_group {
                let row = g * self.rows_per_group + i;
                for j in 0..self.p {
                    values[(row, j)] = block.values()[(i, j)] + mean[j];
                }
                labels.push(g);
            }
        }
        Dataset::new(values, Some(labels))
    }

    pub fn generate(&self) -> Result<Dataset> {
        self.generate_stream(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleScheme {
    /// Draw each group's rows from that group (with replacement).
    WithinGroups,
    /// Draw every group's rows from the pooled data, so labels carry no signal.
    Pooled,
}

#[derive(Debug, Clone)]
pub struct ResamplingConfig {
    pub sizes: Vec<usize>,
    pub replicates: usize,
    pub permutations: usize,
    pub alpha: f64,
    pub seed: u64,
    pub scheme: ResampleScheme,
    pub estimators: Vec<Estimator>,
}

impl Default for ResamplingConfig {
    fn default() -> Self {
        Self {
            sizes: vec![7, 6, 5, 4],
            replicates: 1000,
            permutations: DEFAULT_PERMUTATIONS,
            alpha: 0.05,
            seed: 1,
            scheme: ResampleScheme::WithinGroups,
            estimators: vec![Estimator::Proposed(TargetKind::Ar1), Estimator::ShrinkageBaseline],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectionRow {
    pub size_per_group: usize,
    pub total_n: usize,
    pub method: String,
    pub replicates: usize,
    pub rejections: usize,
    pub proportion: f64,
}

impl ResamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be >= 1".into()));
        }
        if self.permutations < MIN_PERMUTATIONS {
            return Err(Error::Config(format!(
                "need at least {MIN_PERMUTATIONS} permutations, got {}",
                self.permutations
            )));
        }
        if let Some(&s) = self.sizes.iter().find(|&&s| s < 2) {
            return Err(Error::Config(format!("resample size {s} per group is below 2")));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("no estimators given".into()));
        }
        Ok(())
    }
}

fn resample<R: Rng>(
    source: &Dataset,
    groups: &BTreeMap<usize, Vec<usize>>,
    size: usize,
    scheme: ResampleScheme,
    rng: &mut R,
) -> Result<Dataset> {
    let all: Vec<usize> = (0..source.n()).collect();
    let p = source.p();
    let mut values = DMatrix::zeros(groups.len() * size, p);
    let mut labels = Vec::with_capacity(values.nrows());
    let mut row = 0;
    for (&label, rows) in groups {
        let pool = match scheme {
            ResampleScheme::WithinGroups => rows,
            ResampleScheme::Pooled => &all,
        };
        for _ in 0..size {
            let src = pool[rng.random_range(0..pool.len())];
            values.set_row(row, &source.values().row(src));
            labels.push(label);
            row += 1;
        }
    }
    Dataset::new(values, Some(labels))
}

/// Proportion of permutation p-values below `alpha` over bootstrap resamples
/// of `source`, for each per-group size and estimator.
pub fn resampling_experiment(source: &Dataset, config: &ResamplingConfig) -> Result<Vec<RejectionRow>> {
    config.validate()?;
    let groups = checked_groups(source)?;
    let mut table = Vec::new();
    for &size in &config.sizes {
        let size_seed = derive_seed(config.seed, size as u64);
        let rejected: Vec<Vec<bool>> = (0..config.replicates)
            .into_par_iter()
            .map(|rep| {
                let mut rng = stream_rng(size_seed, rep as u64);
                let sample = resample(source, &groups, size, config.scheme, &mut rng)?;
                let inference = Inference::Permutation {
                    permutations: config.permutations,
                    seed: derive_seed(size_seed, rep as u64),
                };
                config
                    .estimators
                    .iter()
                    .map(|e| Ok(wilks_test(&sample, e, &inference)?.p_value < config.alpha))
                    .collect::<Result<Vec<bool>>>()
            })
            .collect::<Result<_>>()?;
        for (k, estimator) in config.estimators.iter().enumerate() {
            let rejections = rejected.iter().filter(|r| r[k]).count();
            table.push(RejectionRow {
                size_per_group: size,
                total_n: size * groups.len(),
                method: estimator.name(),
                replicates: config.replicates,
                rejections,
                proportion: rejections as f64 / config.replicates as f64,
            });
        }
    }
    Ok(table)
}

/// Rejection rate under a true null: every replicate draws a fresh analogue
/// dataset with zero separation.
pub fn null_rejection_rate(
    analogue: &SoilAnalogue,
    replicates: usize,
    permutations: usize,
    alpha: f64,
    estimators: &[Estimator],
) -> Result<Vec<f64>> {
    let null = SoilAnalogue {
        separation: 0.0,
        ..*analogue
    };
    let rejected: Vec<Vec<bool>> = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let d = null.generate_stream(rep as u64)?;
            let inference = Inference::Permutation {
                permutations,
                seed: derive_seed(null.seed, rep as u64),
            };
            estimators
                .iter()
                .map(|e| Ok(wilks_test(&d, e, &inference)?.p_value < alpha))
                .collect::<Result<Vec<bool>>>()
        })
        .collect::<Result<_>>()?;
    Ok((0..estimators.len())
        .map(|k| rejected.iter().filter(|r| r[k]).count() as f64 / replicates as f64)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SymMatrix;

    fn labelled(rows: &[Vec<f64>], labels: Vec<usize>) -> Dataset {
        Dataset::from_rows(rows).unwrap().with_labels(labels).unwrap()
    }

    /// Classical `|E| / |E + H|` from explicit sums of outer products.
    pub(crate) fn classical_wilks(d: &Dataset) -> f64 {
        let x = d.values();
        let labels = d.group_labels().unwrap();
        let (n, p) = x.shape();
        let groups = group_rows(labels);
        let grand: Vec<f64> = (0..p).map(|j| (0..n).map(|i| x[(i, j)]).sum::<f64>() / n as f64).collect();
        let mut e = DMatrix::<f64>::zeros(p, p);
        let mut h = DMatrix::<f64>::zeros(p, p);
        for rows in groups.values() {
            let m: Vec<f64> = (0..p)
                .map(|j| rows.iter().map(|&i| x[(i, j)]).sum::<f64>() / rows.len() as f64)
                .collect();
            for a in 0..p {
                for b in 0..p {
                    h[(a, b)] += rows.len() as f64 * (m[a] - grand[a]) * (m[b] - grand[b]);
                    for &i in rows {
                        e[(a, b)] += (x[(i, a)] - m[a]) * (x[(i, b)] - m[b]);
                    }
                }
            }
        }
        e.determinant() / (e + h).determinant()
    }

    #[test]
    fn group_center_examples() {
        let rows = vec![vec![1.0, 4.0], vec![3.0, 8.0], vec![2.0, 0.0]];
        let single = labelled(&rows, vec![0, 0, 0]);
        let a = group_center(&single).unwrap();
        let b = single.center_columns().unwrap();
        assert_eq!(a.values(), b.values());

        let rows = vec![vec![-1.0], vec![1.0], vec![9.0], vec![11.0]];
        let two = labelled(&rows, vec![0, 0, 1, 1]);
        let c = group_center(&two).unwrap();
        assert_eq!(c.values().as_slice(), &[-1.0, 1.0, -1.0, 1.0]);
        assert_eq!(group_center(&c).unwrap(), c);
    }

    #[test]
    fn group_center_errors() {
        let d = Dataset::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        assert!(matches!(group_center(&d), Err(Error::MissingLabels)));
        let d = labelled(&[vec![1.0], vec![2.0], vec![3.0]], vec![0, 0, 1]);
        assert!(matches!(group_center(&d), Err(Error::SmallGroup { label: 1, size: 1, .. })));
    }

    #[test]
    fn forced_unit_gamma_matches_classical_wilks() {
        let analogue = SoilAnalogue {
            p: 4,
            rows_per_group: 6,
            separation: 0.5,
            ..SoilAnalogue::default()
        };
        for stream in 0..5 {
            let d = analogue.generate_stream(stream).unwrap();
            let ours = wilks_lambda(&d, &Estimator::FixedGamma(TargetKind::Ar1, 1.0)).unwrap();
            let want = classical_wilks(&d);
            assert!((ours - want).abs() < 1e-10, "{ours} vs {want}");
        }
    }

    #[test]
    fn strong_separation_is_detected() {
        let sigma = SymMatrix::identity(2);
        let mut rng = stream_rng(8, 0);
        let a = sample_mvn(40, &sigma, &mut rng).unwrap();
        let b = sample_mvn(40, &sigma, &mut rng).unwrap();
        let mut rows: Vec<Vec<f64>> = a.values().row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.extend(b.values().row_iter().map(|r| r.iter().map(|v| v + 5.0).collect::<Vec<_>>()));
        let labels = (0..80).map(|i| i / 40).collect();
        let d = labelled(&rows, labels);
        for e in [Estimator::Proposed(TargetKind::Exchangeable), Estimator::ShrinkageBaseline] {
            let res = wilks_test(&d, &e, &Inference::Permutation { permutations: 199, seed: 1 }).unwrap();
            assert!(res.p_value < 0.01);
            assert!(res.wilks_lambda > 0.0 && res.wilks_lambda <= 1.0);
            let bart = wilks_test(&d, &e, &Inference::Bartlett).unwrap();
            assert!(bart.p_value < 0.01 && !bart.approximate);
        }
    }

    #[test]
    fn lambda_is_scale_invariant() {
        let d = SoilAnalogue::default().generate().unwrap();
        let mut scaled = d.values().clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= 0.1 + j as f64;
        }
        let s = Dataset::new(scaled, d.group_labels().map(<[usize]>::to_vec)).unwrap();
        for e in [Estimator::Proposed(TargetKind::Ar1), Estimator::ShrinkageBaseline] {
            let a = wilks_lambda(&d, &e).unwrap();
            let b = wilks_lambda(&s, &e).unwrap();
            assert!((a - b).abs() < 1e-10, "{e}: {a} vs {b}");
        }
    }

    #[test]
    fn configuration_errors() {
        let d = SoilAnalogue::default().generate().unwrap();
        let inf = Inference::Permutation { permutations: 50, seed: 0 };
        assert!(matches!(wilks_test(&d, &Estimator::ShrinkageBaseline, &inf), Err(Error::Config(_))));
        let bart = wilks_test(&d, &Estimator::ShrinkageBaseline, &Inference::Bartlett).unwrap();
        assert!(!bart.approximate);
        let cfg = ResamplingConfig {
            sizes: vec![1],
            ..ResamplingConfig::default()
        };
        assert!(resampling_experiment(&d, &cfg).is_err());
    }

    #[test]
    fn resampling_is_reproducible() {
        let d = SoilAnalogue::default().generate().unwrap();
        let cfg = ResamplingConfig {
            sizes: vec![4],
            replicates: 8,
            permutations: 99,
            ..ResamplingConfig::default()
        };
        let a = resampling_experiment(&d, &cfg).unwrap();
        assert_eq!(a, resampling_experiment(&d, &cfg).unwrap());
        assert_eq!(a.len(), 2);
        assert_eq!(a[0].total_n, 12);
    }
}
