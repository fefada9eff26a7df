//! Reproducible multivariate-normal data under the benchmark covariance
//! structures.
//!
//! Randomness comes from ChaCha20 (`rand_chacha` 0.9). A replicate stream is
//! addressed by `(seed, stream)`: the seed fills the 256-bit key via
//! `seed_from_u64`, the stream index selects the ChaCha stream. Normal
//! variates use the ziggurat `StandardNormal` from `rand_distr` 0.5. Both
//! algorithms are platform independent, so outputs are bit-reproducible.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{to_correlation, Dataset, Scale, SymMatrix};
use crate::targets::{build_target, TargetKind, TargetSpec};

pub const DEFAULT_SPARSITY: f64 = 0.30;

/// Diagonal margin added on top of the row l1 sum of the random precision.
const DOMINANCE_MARGIN: f64 = 0.1;

/// Deterministic RNG for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mix two words into one seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    Identity,
    Ar1,
    Exchangeable,
    RandomSparseInverse,
}

impl StructureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StructureKind::Identity => "identity",
            StructureKind::Ar1 => "ar1",
            StructureKind::Exchangeable => "exchangeable",
            StructureKind::RandomSparseInverse => "random_sparse_inverse",
        }
    }

    /// The correctly specified target family, identity for the random kind.
    pub fn natural_target(self) -> TargetKind {
        match self {
            StructureKind::Ar1 => TargetKind::Ar1,
            StructureKind::Exchangeable => TargetKind::Exchangeable,
            StructureKind::Identity | StructureKind::RandomSparseInverse => TargetKind::Identity,
        }
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StructureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(StructureKind::Identity),
            "ar1" => Ok(StructureKind::Ar1),
            "exchangeable" => Ok(StructureKind::Exchangeable),
            "random_sparse_inverse" | "random" => Ok(StructureKind::RandomSparseInverse),
            other => Err(Error::Config(format!("unknown structure kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureSpec {
    pub kind: StructureKind,
    pub t: Option<f64>,
    pub sparsity: f64,
    pub seed: u64,
}

impl StructureSpec {
    pub fn identity() -> Self {
        Self {
            kind: StructureKind::Identity,
            t: None,
            sparsity: DEFAULT_SPARSITY,
            seed: 0,
        }
    }

    pub fn ar1(t: f64) -> Self {
        Self {
            kind: StructureKind::Ar1,
            t: Some(t),
            ..Self::identity()
        }
    }

    pub fn exchangeable(t: f64) -> Self {
        Self {
            kind: StructureKind::Exchangeable,
            t: Some(t),
            ..Self::identity()
        }
    }

    pub fn random_sparse_inverse(sparsity: f64, seed: u64) -> Self {
        Self {
            kind: StructureKind::RandomSparseInverse,
            t: None,
            sparsity,
            seed,
        }
    }

    fn target_spec(&self) -> Result<TargetSpec> {
        let t = || {
            self.t
                .ok_or_else(|| Error::Config(format!("structure {} requires t", self.kind)))
        };
        Ok(match self.kind {
            StructureKind::Ar1 => TargetSpec::ar1(t()?),
            StructureKind::Exchangeable => TargetSpec::exchangeable(t()?),
            _ => TargetSpec::identity(),
        })
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        match self.kind {
            StructureKind::RandomSparseInverse => {
                if !(self.sparsity > 0.0 && self.sparsity <= 1.0) {
                    return Err(Error::Config(format!(
                        "sparsity must lie in (0, 1], got {}",
                        self.sparsity
                    )));
                }
                if p < 2 {
                    return Err(Error::Config("random structure needs p >= 2".into()));
                }
                Ok(())
            }
            _ => self.target_spec()?.validate(p),
        }
    }
}

/// Random sparse precision matrix: symmetric pattern over a `sparsity`
/// fraction of off-diagonal positions, uniform(−1, 1) values, diagonal set to
/// the absolute row sum plus a margin.
pub fn sparse_precision(spec: &StructureSpec, p: usize) -> Result<DMatrix<f64>> {
    spec.validate(p)?;
    let pairs: Vec<(usize, usize)> = (0..p)
        .flat_map(|i| ((i + 1)..p).map(move |j| (i, j)))
        .collect();
    // floor, with slack for products like 0.29 * 100 landing just below an integer
    let count = ((spec.sparsity * pairs.len() as f64) + 1e-9).floor() as usize;
    let mut rng = stream_rng(spec.seed, 0);
    let chosen = index::sample(&mut rng, pairs.len(), count);
    let mut chosen: Vec<usize> = chosen.into_iter().collect();
    chosen.sort_unstable();
    let values = Uniform::new(-1.0f64, 1.0).expect("valid range");
    let mut omega = DMatrix::zeros(p, p);
    for k in chosen {
        let (i, j) = pairs[k];
        let mut v = 0.0;
        while v == 0.0 {
            v = rng.sample(values);
        }
        omega[(i, j)] = v;
        omega[(j, i)] = v;
    }
    for i in 0..p {
        let row: f64 = omega.row(i).iter().map(|v| v.abs()).sum();
        omega[(i, i)] = row + DOMINANCE_MARGIN;
    }
    Ok(omega)
}

/// True correlation matrix for the structure.
pub fn generate_covariance(spec: &StructureSpec, p: usize) -> Result<SymMatrix> {
    spec.validate(p)?;
    match spec.kind {
        StructureKind::RandomSparseInverse => {
            let omega = sparse_precision(spec, p)?;
            let sigma = omega
                .cholesky()
                .ok_or(Error::NotPositiveDefinite)?
                .inverse();
            let (r, _) = to_correlation(&SymMatrix::symmetrized(sigma, Scale::Covariance))?;
            Ok(r)
        }
        _ => build_target(&spec.target_spec()?, p),
    }
}

/// Lower Cholesky factor of `sigma`.
pub fn cholesky_factor(sigma: &SymMatrix) -> Result<DMatrix<f64>> {
    Ok(sigma
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite)?
        .unpack())
}

/// `n x p` standard-normal matrix, filled row by row.
pub fn standard_normal<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> DMatrix<f64> {
    let mut z = DMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            z[(i, j)] = rng.sample(StandardNormal);
        }
    }
    z
}

/// `n` zero-mean rows from `N(0, sigma)`: `X = Z Lᵗ` with `sigma = L Lᵗ`.
pub fn sample_mvn<R: Rng + ?Sized>(n: usize, sigma: &SymMatrix, rng: &mut R) -> Result<Dataset> {
    let l = cholesky_factor(sigma)?;
    let z = standard_normal(n, sigma.dim(), rng);
    Dataset::new(z * l.transpose(), None)
}

pub fn sample_mvn_seeded(n: usize, sigma: &SymMatrix, seed: u64) -> Result<Dataset> {
    sample_mvn(n, sigma, &mut stream_rng(seed, 0))
}
