//! Monte-Carlo grid runner.
//!
//! Each `(cell, replicate)` pair draws its data from
//! `stream_rng(derive_seed(seed, cell), replicate)`, so results do not depend
//! on scheduling. Every method sees the same replicate dataset.

use rayon::prelude::*;

use crate::baselines::{mle_covariance, shrink_identity};
use crate::error::Result;
use crate::evaluation::{eigen_abs_error, frobenius_error, SimResult};
use crate::harness::config::{Cell, ExperimentConfig, Method, Metric};
use crate::harness::io::{csv_write_error, opt};
use crate::matrix::{condition_number, SymMatrix};
use crate::regularizer::fit;
use crate::sampler::{derive_seed, generate_covariance, sample_mvn, stream_rng};

pub const RESULTS_HEADER: &str = "# covreg-results v1";
pub const SUMMARY_HEADER: &str = "# covreg-summary v1";

pub const RESULT_COLUMNS: [&str; 11] = [
    "structure",
    "t_true",
    "n",
    "p",
    "method",
    "replicate",
    "shrinkage",
    "t_hat",
    "eigen_abs_error",
    "frobenius_error",
    "condition_number",
];

fn record(
    cell: &Cell,
    replicate: u64,
    method: String,
    estimate: &SymMatrix,
    truth: &SymMatrix,
    shrinkage: Option<f64>,
    t_hat: Option<f64>,
) -> Result<SimResult> {
    Ok(SimResult {
        structure: cell.structure.kind,
        t_true: cell.structure.t,
        n: cell.n,
        p: cell.p,
        method,
        replicate,
        shrinkage,
        t_hat,
        eigen_abs_error: eigen_abs_error(estimate, truth)?,
        frobenius_error: frobenius_error(estimate, truth)?,
        condition_number: condition_number(estimate),
    })
}

fn run_replicate(
    cfg: &ExperimentConfig,
    cell: &Cell,
    truth: &SymMatrix,
    replicate: u64,
) -> Result<Vec<SimResult>> {
    let mut rng = stream_rng(derive_seed(cfg.seed, cell.index as u64), replicate);
    let data = sample_mvn(cell.n, truth, &mut rng)?;
    let mut out = Vec::new();
    for method in &cfg.methods {
        match method {
            Method::Proposed => {
                for &kind in &cell.targets {
                    let est = fit(&data, kind)?;
                    let sigma = est.sigma_gamma.as_ref().expect("fit from data");
                    out.push(record(
                        cell,
                        replicate,
                        format!("proposed-{kind}"),
                        sigma,
                        truth,
                        Some(est.gamma),
                        est.t_hat,
                    )?);
                }
            }
            Method::Shrinkage => {
                let est = shrink_identity(&data)?;
                out.push(record(
                    cell,
                    replicate,
                    "shrinkage".into(),
                    &est.covariance()?,
                    truth,
                    Some(est.lambda),
                    None,
                )?);
            }
            Method::Mle => {
                let s = mle_covariance(&data)?;
                out.push(record(cell, replicate, "mle".into(), &s, truth, None, None)?);
            }
        }
    }
    Ok(out)
}

/// Run the whole grid. Rows are ordered by cell, replicate, then method.
pub fn run_simulation(cfg: &ExperimentConfig) -> Result<Vec<SimResult>> {
    let cells = cfg.cells()?;
    let truths: Vec<SymMatrix> = cells
        .iter()
        .map(|c| generate_covariance(&c.structure, c.p))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, u64)> = cells
        .iter()
        .flat_map(|c| (0..cfg.replicates as u64).map(move |r| (c.index, r)))
        .collect();
    let chunks: Vec<Vec<SimResult>> = jobs
        .par_iter()
        .map(|&(c, r)| run_replicate(cfg, &cells[c], &truths[c], r))
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

pub fn results_csv(results: &[SimResult]) -> Result<Vec<u8>> {
    let mut buf = format!("{RESULTS_HEADER}\n").into_bytes();
    let mut w = csv::Writer::from_writer(&mut buf);
    w.write_record(RESULT_COLUMNS).map_err(csv_write_error)?;
    for r in results {
        w.write_record([
            r.structure.to_string(),
            opt(r.t_true),
            r.n.to_string(),
            r.p.to_string(),
            r.method.clone(),
            r.replicate.to_string(),
            opt(r.shrinkage),
            opt(r.t_hat),
            r.eigen_abs_error.to_string(),
            r.frobenius_error.to_string(),
            r.condition_number.to_string(),
        ])
        .map_err(csv_write_error)?;
    }
    w.flush()?;
    drop(w);
    Ok(buf)
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub structure: String,
    pub t_true: Option<f64>,
    pub n: usize,
    pub p: usize,
    pub method: String,
    pub metric: Metric,
    pub count: usize,
    pub mean: f64,
    pub q05: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q95: f64,
}

fn metric_value(r: &SimResult, m: Metric) -> Option<f64> {
    match m {
        Metric::Shrinkage => r.shrinkage,
        Metric::EigenAbsError => Some(r.eigen_abs_error),
        Metric::FrobeniusError => Some(r.frobenius_error),
        Metric::ConditionNumber => Some(r.condition_number),
    }
}

/// Mean and quantiles per `(cell, method, metric)`, in first-seen order.
pub fn summarize(results: &[SimResult], metrics: &[Metric]) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, Option<u64>, usize, usize, String)> = Vec::new();
    for r in results {
        let key = (r.structure.to_string(), r.t_true.map(f64::to_bits), r.n, r.p, r.method.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut rows = Vec::new();
    for (structure, t_bits, n, p, method) in keys {
        let group: Vec<&SimResult> = results
            .iter()
            .filter(|r| {
                r.structure.as_str() == structure
                    && r.t_true.map(f64::to_bits) == t_bits
                    && r.n == n
                    && r.p == p
                    && r.method == method
            })
            .collect();
        for &metric in metrics {
            let mut vals: Vec<f64> = group.iter().filter_map(|r| metric_value(r, metric)).collect();
            if vals.is_empty() {
                continue;
            }
            vals.sort_by(f64::total_cmp);
            rows.push(SummaryRow {
                structure: structure.clone(),
                t_true: t_bits.map(f64::from_bits),
                n,
                p,
                method: method.clone(),
                metric,
                count: vals.len(),
                mean: vals.iter().sum::<f64>() / vals.len() as f64,
                q05: quantile(&vals, 0.05),
                q25: quantile(&vals, 0.25),
                median: quantile(&vals, 0.5),
                q75: quantile(&vals, 0.75),
                q95: quantile(&vals, 0.95),
            });
        }
    }
    rows
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<Vec<u8>> {
    let mut buf = format!("{SUMMARY_HEADER}\n").into_bytes();
    let mut w = csv::Writer::from_writer(&mut buf);
    w.write_record([
        "structure", "t_true", "n", "p", "method", "metric", "count", "mean", "q05", "q25", "median",
        "q75", "q95",
    ])
    .map_err(csv_write_error)?;
    for r in rows {
        w.write_record([
            r.structure.clone(),
            opt(r.t_true),
            r.n.to_string(),
            r.p.to_string(),
            r.method.clone(),
            r.metric.as_str().to_string(),
            r.count.to_string(),
            r.mean.to_string(),
            r.q05.to_string(),
            r.q25.to_string(),
            r.median.to_string(),
            r.q75.to_string(),
            r.q95.to_string(),
        ])
        .map_err(csv_write_error)?;
    }
    w.flush()?;
    drop(w);
    Ok(buf)
}
