//! MANOVA resampling runner.

use crate::error::{Error, Result};
use crate::harness::config::{ManovaConfig, Method};
use crate::harness::io::{csv_write_error, read_dataset};
use crate::manova::{
    resampling_experiment, Estimator, RejectionRow, ResampleScheme, ResamplingConfig, SoilAnalogue,
};
use crate::matrix::Dataset;

pub const MANOVA_HEADER: &str = "# covreg-manova v1";

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRow {
    pub scenario: &'static str,
    pub row: RejectionRow,
}

fn estimators(cfg: &ManovaConfig) -> Vec<Estimator> {
    cfg.methods
        .iter()
        .map(|m| match m {
            Method::Proposed => Estimator::Proposed(cfg.target),
            Method::Shrinkage => Estimator::ShrinkageBaseline,
            Method::Mle => unreachable!("rejected by ManovaConfig::validate"),
        })
        .collect()
}

fn source(cfg: &ManovaConfig) -> Result<Dataset> {
    match &cfg.source_csv {
        Some(path) => {
            let parsed = read_dataset(path)?;
            if parsed.dataset.group_labels().is_none() {
                return Err(Error::Config(format!("{} has no group column", path.display())));
            }
            Ok(parsed.dataset)
        }
        None => cfg.source.generate(),
    }
}

/// Resample the source (`analogue` rows) and, when requested, a
/// zero-separation control (`zero_separation` rows): the analogue regenerated
/// with no mean offsets, resampled from the pooled rows so labels carry no
/// signal.
pub fn run_manova(cfg: &ManovaConfig) -> Result<Vec<ScenarioRow>> {
    cfg.validate()?;
    let base = ResamplingConfig {
        sizes: cfg.sizes.clone(),
        replicates: cfg.replicates,
        permutations: cfg.permutations,
        alpha: cfg.alpha,
        seed: cfg.seed,
        scheme: ResampleScheme::WithinGroups,
        estimators: estimators(cfg),
    };
    let mut out: Vec<ScenarioRow> = resampling_experiment(&source(cfg)?, &base)?
        .into_iter()
        .map(|row| ScenarioRow {
            scenario: "analogue",
            row,
        })
        .collect();
    if cfg.zero_separation_control {
        let null = SoilAnalogue {
            separation: 0.0,
            ..cfg.source
        };
        let control = ResamplingConfig {
            scheme: ResampleScheme::Pooled,
            ..base
        };
        out.extend(
            resampling_experiment(&null.generate()?, &control)?
                .into_iter()
                .map(|row| ScenarioRow {
                    scenario: "zero_separation",
                    row,
                }),
        );
    }
    Ok(out)
}

pub fn manova_csv(rows: &[ScenarioRow]) -> Result<Vec<u8>> {
    let mut buf = format!("{MANOVA_HEADER}\n").into_bytes();
    let mut w = csv::Writer::from_writer(&mut buf);
    w.write_record([
        "scenario",
        "size_per_group",
        "total_n",
        "method",
        "replicates",
        "rejections",
        "proportion",
    ])
    .map_err(csv_write_error)?;
    for ScenarioRow { scenario, row } in rows {
        w.write_record([
            scenario.to_string(),
            row.size_per_group.to_string(),
            row.total_n.to_string(),
            row.method.clone(),
            row.replicates.to_string(),
            row.rejections.to_string(),
            format!("{:.3}", row.proportion),
        ])
        .map_err(csv_write_error)?;
    }
    w.flush()?;
    drop(w);
    Ok(buf)
}
