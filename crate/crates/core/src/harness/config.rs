//! Declarative TOML experiment configurations.
//!
//! Simulation grid:
//!
//! ```toml
//! seed = 20240101
//! replicates = 200
//! methods = ["proposed", "shrinkage", "mle"]
//! metrics = ["shrinkage", "eigen_abs_error"]   # summary columns
//!
//! [[grid]]
//! structure = "ar1"            # identity | ar1 | exchangeable | random_sparse_inverse
//! t = [0.5]
//! n = [50]
//! p = [30, 50, 100]
//! targets = ["ar1", "identity"] # proposed-method targets; default: matching family
//!
//! [[grid]]
//! structure = "random_sparse_inverse"
//! sparsity = 0.3
//! structure_seed = 7
//! n = [50]
//! p = [30]
//! ```
//!
//! MANOVA resampling:
//!
//! ```toml
//! seed = 1
//! replicates = 1000
//! permutations = 999
//! alpha = 0.05
//! sizes = [7, 6, 5, 4]
//! methods = ["proposed", "shrinkage"]
//! target = "ar1"
//! zero_separation_control = true
//!
//! [source]                 # synthetic analogue; every key optional
//! p = 18
//! t = 0.9162
//! separation = 1.5
//! ```
//!
//! A `source_csv = "path.csv"` key (with a `group` column) replaces the
//! synthetic source.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::manova::{SoilAnalogue, DEFAULT_PERMUTATIONS, MIN_PERMUTATIONS};
use crate::sampler::{StructureKind, StructureSpec, DEFAULT_SPARSITY};
use crate::targets::TargetKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Proposed,
    Shrinkage,
    Mle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Shrinkage,
    EigenAbsError,
    FrobeniusError,
    ConditionNumber,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Shrinkage => "shrinkage",
            Metric::EigenAbsError => "eigen_abs_error",
            Metric::FrobeniusError => "frobenius_error",
            Metric::ConditionNumber => "condition_number",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridEntry {
    pub structure: StructureKind,
    #[serde(default)]
    pub t: Vec<f64>,
    pub n: Vec<usize>,
    pub p: Vec<usize>,
    #[serde(default)]
    pub targets: Vec<TargetKind>,
    #[serde(default = "default_sparsity")]
    pub sparsity: f64,
    #[serde(default)]
    pub structure_seed: u64,
}

fn default_sparsity() -> f64 {
    DEFAULT_SPARSITY
}

fn default_methods() -> Vec<Method> {
    vec![Method::Proposed, Method::Shrinkage, Method::Mle]
}

fn default_metrics() -> Vec<Metric> {
    vec![
        Metric::Shrinkage,
        Metric::EigenAbsError,
        Metric::FrobeniusError,
        Metric::ConditionNumber,
    ]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub replicates: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub grid: Vec<GridEntry>,
}

/// One expanded `(structure, t, n, p)` grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub structure: StructureSpec,
    pub n: usize,
    pub p: usize,
    pub targets: Vec<TargetKind>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Expand and validate every grid cell.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("methods list is empty".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::Config("grid is empty".into()));
        }
        let min_n = if self.methods.contains(&Method::Shrinkage) { 3 } else { 2 };
        let mut cells = Vec::new();
        for entry in &self.grid {
            let needs_t = matches!(entry.structure, StructureKind::Ar1 | StructureKind::Exchangeable);
            let ts: Vec<Option<f64>> = if needs_t {
                if entry.t.is_empty() {
                    return Err(Error::Config(format!("structure {} needs t values", entry.structure)));
                }
                entry.t.iter().copied().map(Some).collect()
            } else {
                vec![None]
            };
            let targets = if entry.targets.is_empty() {
                vec![entry.structure.natural_target()]
            } else {
                entry.targets.clone()
            };
            for &t in &ts {
                for &n in &entry.n {
                    for &p in &entry.p {
                        let structure = StructureSpec {
                            kind: entry.structure,
                            t,
                            sparsity: entry.sparsity,
                            seed: entry.structure_seed,
                        };
                        let fail = |e: Error| {
                            Error::Config(format!(
                                "grid cell {} (structure {}, t {:?}, n {n}, p {p}): {e}",
                                cells.len(),
                                entry.structure,
                                t
                            ))
                        };
                        structure.validate(p).map_err(fail)?;
                        if n < min_n {
                            return Err(fail(Error::Config(format!("n must be >= {min_n}"))));
                        }
                        if p < 2 && targets.iter().any(|&k| k != TargetKind::Identity) {
                            return Err(fail(Error::Config("structured targets need p >= 2".into())));
                        }
                        cells.push(Cell {
                            index: cells.len(),
                            structure,
                            n,
                            p,
                            targets: targets.clone(),
                        });
                    }
                }
            }
        }
        Ok(cells)
    }
}

fn default_replicates() -> usize {
    1000
}

fn default_permutations() -> usize {
    DEFAULT_PERMUTATIONS
}

fn default_alpha() -> f64 {
    0.05
}

fn default_sizes() -> Vec<usize> {
    vec![7, 6, 5, 4]
}

fn default_manova_methods() -> Vec<Method> {
    vec![Method::Proposed, Method::Shrinkage]
}

fn default_target() -> TargetKind {
    TargetKind::Ar1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManovaConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_permutations")]
    pub permutations: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_manova_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_target")]
    pub target: TargetKind,
    #[serde(default)]
    pub zero_separation_control: bool,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub source: SoilAnalogue,
    #[serde(default)]
    pub source_csv: Option<PathBuf>,
}

impl ManovaConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

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
        if self.methods.contains(&Method::Mle) {
            return Err(Error::Config("mle is not a MANOVA method; use proposed or shrinkage".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GRID: &str = r#"
seed = 3
replicates = 2
[[grid]]
structure = "ar1"
t = [0.3, 0.5]
n = [20]
p = [5, 10]
[[grid]]
structure = "random_sparse_inverse"
n = [20]
p = [6]
"#;

    #[test]
    fn expands_grid_in_order() {
        let cfg = ExperimentConfig::from_toml(GRID).unwrap();
        let cells = cfg.cells().unwrap();
        assert_eq!(cells.len(), 5);
        assert_eq!(cells[1].structure.t, Some(0.3));
        assert_eq!(cells[1].p, 10);
        assert_eq!(cells[4].targets, vec![TargetKind::Identity]);
        assert_eq!(cells[4].structure.sparsity, 0.3);
        assert_eq!(cfg.methods, default_methods());
    }

    #[test]
    fn invalid_cells_fail_fast() {
        let bad = GRID.replace("t = [0.3, 0.5]", "t = [0.3, 1.5]");
        let err = ExperimentConfig::from_toml(&bad).unwrap().cells().unwrap_err();
        assert!(err.to_string().contains("grid cell 2"), "{err}");
        let bad = GRID.replace("replicates = 2", "replicates = 0");
        assert!(ExperimentConfig::from_toml(&bad).unwrap().cells().is_err());
        assert!(ExperimentConfig::from_toml("replicates = 1\nbogus = 2\ngrid = []").is_err());
    }

    #[test]
    fn manova_defaults() {
        let cfg = ManovaConfig::from_toml("seed = 4\n[source]\nseparation = 0.0\n").unwrap();
        assert_eq!(cfg.sizes, vec![7, 6, 5, 4]);
        assert_eq!(cfg.source.p, 18);
        assert_eq!(cfg.source.separation, 0.0);
        cfg.validate().unwrap();
        let bad = ManovaConfig::from_toml("permutations = 10").unwrap();
        assert!(bad.validate().is_err());
    }
}
