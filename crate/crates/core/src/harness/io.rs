//! CSV ingestion and atomic output.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{Dataset, SymMatrix};

/// Name of the optional group-label column.
pub const GROUP_COLUMN: &str = "group";

#[derive(Debug, Clone)]
pub struct CsvDataset {
    pub columns: Vec<String>,
    pub dataset: Dataset,
    /// Original label strings, indexed by the numeric id used in the dataset.
    pub group_names: Vec<String>,
}

pub fn read_dataset(path: &Path) -> Result<CsvDataset> {
    let text = fs::read_to_string(path)?;
    parse_dataset(&text)
}

/// Parse a comma-separated table with a header row. A column named `group`
/// becomes the group labels; every other column must be numeric.
///
/// Errors carry 1-based file line numbers (the header is line 1).
pub fn parse_dataset(text: &str) -> Result<CsvDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv {
            line: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let width = header.len();
    let group_col = header.iter().position(|h| h == GROUP_COLUMN);
    let columns: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(j, _)| Some(j) != group_col)
        .map(|(_, h)| h.clone())
        .collect();
    if columns.is_empty() {
        return Err(Error::Csv {
            line: 1,
            message: "no numeric columns".into(),
        });
    }

    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(rows + 2, |p| p.line() as usize);
        if record.len() != width {
            return Err(Error::Csv {
                line,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        for (j, field) in record.iter().enumerate() {
            if Some(j) == group_col {
                raw_labels.push(field.trim().to_string());
                continue;
            }
            let v: f64 = field.trim().parse().map_err(|_| Error::Csv {
                line,
                message: format!("column {} ({:?}): cannot parse {field:?} as a number", j + 1, header[j]),
            })?;
            if !v.is_finite() {
                return Err(Error::Csv {
                    line,
                    message: format!("column {} ({:?}): non-finite value", j + 1, header[j]),
                });
            }
            values.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Csv {
            line: 2,
            message: "no data rows".into(),
        });
    }

    let (labels, group_names) = if group_col.is_some() {
        let mut ids: BTreeMap<String, usize> = BTreeMap::new();
        for l in &raw_labels {
            let next = ids.len();
            ids.entry(l.clone()).or_insert(next);
        }
        let mut names = vec![String::new(); ids.len()];
        for (name, &id) in &ids {
            names[id] = name.clone();
        }
        (Some(raw_labels.iter().map(|l| ids[l]).collect()), names)
    } else {
        (None, Vec::new())
    };
    let matrix = DMatrix::from_row_slice(rows, columns.len(), &values);
    Ok(CsvDataset {
        columns,
        dataset: Dataset::new(matrix, labels)?,
        group_names,
    })
}

/// Write `bytes` to a temp file next to `path`, then rename over it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Matrix as CSV with `names` as the header row.
pub fn matrix_csv(m: &SymMatrix, names: &[String]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(names).map_err(csv_write_error)?;
    for i in 0..m.dim() {
        w.write_record((0..m.dim()).map(|j| m.get(i, j).to_string()))
            .map_err(csv_write_error)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub(crate) fn csv_write_error(e: csv::Error) -> Error {
    Error::Csv {
        line: 0,
        message: e.to_string(),
    }
}

/// Format an optional float; `None` is an empty field.
pub(crate) fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_numeric_table_with_groups() {
        let csv = "a,group,b\n1,low,2\n3,high,4.5\n5,low,-1e-3\n";
        let parsed = parse_dataset(csv).unwrap();
        assert_eq!(parsed.columns, vec!["a", "b"]);
        assert_eq!(parsed.dataset.values(), &DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.5, 5.0, -1e-3]));
        assert_eq!(parsed.dataset.group_labels(), Some(&[0usize, 1, 0][..]));
        assert_eq!(parsed.group_names, vec!["low", "high"]);
    }

    #[test]
    fn ragged_row_names_line() {
        let csv = "a,b,c\n1,2,3\n4,5\n6,7,8\n";
        let err = parse_dataset(csv).unwrap_err();
        assert!(matches!(err, Error::Csv { line: 3, .. }), "{err}");
        assert!(err.to_string().contains("line 3"));
    }

    #[test]
    fn non_numeric_cell_names_coordinates() {
        let err = parse_dataset("a,b\n1,2\n3,x\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("column 2"), "{msg}");
    }

    #[test]
    fn empty_tables_are_rejected() {
        assert!(parse_dataset("group\nx\n").is_err());
        assert!(parse_dataset("a,b\n").is_err());
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
