//! Single-dataset estimation report.

use std::fmt;

use crate::error::Result;
use crate::harness::io::CsvDataset;
use crate::manova::group_center;
use crate::matrix::condition_number;
use crate::regularizer::{fit, RegularizedEstimate};
use crate::targets::TargetKind;

#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub n: usize,
    pub p: usize,
    pub groups: usize,
    pub estimate: RegularizedEstimate,
    pub condition_number: f64,
}

/// Fit the regularized estimate; data with a `group` column is group-centered
/// first.
pub fn estimate(input: &CsvDataset, kind: TargetKind) -> Result<EstimateReport> {
    let d = &input.dataset;
    let centered = match d.group_labels() {
        Some(_) => group_center(d)?,
        None => d.clone(),
    };
    let est = fit(&centered, kind)?;
    Ok(EstimateReport {
        n: d.n(),
        p: d.p(),
        groups: input.group_names.len(),
        condition_number: condition_number(&est.r_gamma),
        estimate: est,
    })
}

impl fmt::Display for EstimateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = &self.estimate;
        writeln!(f, "n: {}", self.n)?;
        writeln!(f, "p: {}", self.p)?;
        if self.groups > 0 {
            writeln!(f, "groups: {}", self.groups)?;
        }
        writeln!(f, "target: {}", e.target.kind())?;
        match e.t_hat {
            Some(t) => writeln!(f, "t_hat: {t}")?,
            None => writeln!(f, "t_hat: NA")?,
        }
        writeln!(f, "kappa: {}", e.kappa)?;
        writeln!(f, "gamma: {}", e.gamma)?;
        write!(f, "condition_number: {}", self.condition_number)?;
        if e.rank_deficient {
            write!(f, "\nwarning: gamma = 1 with p >= n; estimate is singular")?;
        }
        Ok(())
    }
}
