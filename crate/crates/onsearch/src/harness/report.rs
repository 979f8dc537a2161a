//! Result rows and serialization.
//!
//! Every suite produces a flat list of rows so downstream tooling never has
//! to know which experiment ran. Rows are sorted by `(experiment, trial)`
//! with insertion order preserved inside a trial, and all values must be
//! finite before anything is written out.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One measured value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// Suite tag, e.g. `double-bound`.
    pub experiment: String,
    /// Trial index; aggregate rows use the first index past the trials.
    pub trial: u64,
    /// Compact `key=value;...` description of the trial's parameters.
    pub params: String,
    pub metric: String,
    pub value: f64,
    /// Seed that produced this row (the trial seed, or the config seed for
    /// aggregates and deterministic suites).
    pub seed: u64,
}

impl ReportRow {
    pub fn new(
        experiment: impl Into<String>,
        trial: u64,
        params: impl Into<String>,
        metric: impl Into<String>,
        value: f64,
        seed: u64,
    ) -> Self {
        Self {
            experiment: experiment.into(),
            trial,
            params: params.into(),
            metric: metric.into(),
            value,
            seed,
        }
    }
}

/// Output encodings. Both spell floats in shortest round-trip form, so a
/// rerun with the same seed is byte-identical.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    /// One header line, then one record per row.
    Csv,
    /// One JSON object per line.
    JsonLines,
}

impl ReportFormat {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "csv" => Some(ReportFormat::Csv),
            "json" => Some(ReportFormat::JsonLines),
            _ => None,
        }
    }
}

/// Rejects rows whose value is NaN or infinite.
pub fn validate_rows(rows: &[ReportRow]) -> Result<()> {
    for row in rows {
        if !row.value.is_finite() {
            return Err(Error::NonFiniteMetric {
                metric: format!("{}/{} (trial {})", row.experiment, row.metric, row.trial),
            });
        }
    }
    Ok(())
}

/// Stable sort by `(experiment, trial)`.
pub fn sort_rows(rows: &mut [ReportRow]) {
    rows.sort_by(|a, b| {
        a.experiment
            .cmp(&b.experiment)
            .then(a.trial.cmp(&b.trial))
    });
}

/// Writes validated rows in the requested format.
pub fn emit_report<W: Write>(rows: &[ReportRow], format: ReportFormat, mut out: W) -> Result<()> {
    validate_rows(rows)?;
    match format {
        ReportFormat::Csv => {
            let mut writer = csv::Writer::from_writer(&mut out);
            for row in rows {
                writer.serialize(row)?;
            }
            writer.flush()?;
        }
        ReportFormat::JsonLines => {
            for row in rows {
                serde_json::to_writer(&mut out, row)?;
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_rows() -> Vec<ReportRow> {
        vec![
            ReportRow::new("b-suite", 1, "x=1", "cr", 1.5, 7),
            ReportRow::new("a-suite", 2, "x=2", "cr", 2.0, 8),
            ReportRow::new("a-suite", 0, "x=0", "first", 0.25, 9),
            ReportRow::new("a-suite", 0, "x=0", "second", 0.75, 9),
        ]
    }

    #[test]
    fn sort_is_stable_within_a_trial() {
        let mut rows = sample_rows();
        sort_rows(&mut rows);
        let keys: Vec<_> = rows
            .iter()
            .map(|r| (r.experiment.as_str(), r.trial, r.metric.as_str()))
            .collect();
        assert_eq!(
            keys,
            vec![
                ("a-suite", 0, "first"),
                ("a-suite", 0, "second"),
                ("a-suite", 2, "cr"),
                ("b-suite", 1, "cr"),
            ]
        );
    }

    #[test]
    fn csv_output_has_header_and_shortest_floats() {
        let rows = vec![ReportRow::new("demo", 0, "m=10", "cr", 0.1, 3)];
        let mut buffer = Vec::new();
        emit_report(&rows, ReportFormat::Csv, &mut buffer).unwrap();
        let text = String::from_utf8(buffer).unwrap();
        assert_eq!(
            text,
            "experiment,trial,params,metric,value,seed\ndemo,0,m=10,cr,0.1,3\n"
        );
    }

    #[test]
    fn json_lines_output_is_one_object_per_row() {
        let rows = vec![
            ReportRow::new("demo", 0, "m=10", "cr", 1.25, 3),
            ReportRow::new("demo", 1, "m=20", "cr", 1.5, 4),
        ];
        let mut buffer = Vec::new();
        emit_report(&rows, ReportFormat::JsonLines, &mut buffer).unwrap();
        let text = String::from_utf8(buffer).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let first: ReportRow = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(first, rows[0]);
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let rows = vec![ReportRow::new("demo", 0, "", "cr", f64::NAN, 3)];
        let mut buffer = Vec::new();
        let err = emit_report(&rows, ReportFormat::Csv, &mut buffer).unwrap_err();
        assert!(matches!(err, Error::NonFiniteMetric { .. }));
        assert!(buffer.is_empty());
    }

    #[test]
    fn format_names() {
        assert_eq!(ReportFormat::from_name("csv"), Some(ReportFormat::Csv));
        assert_eq!(
            ReportFormat::from_name("json"),
            Some(ReportFormat::JsonLines)
        );
        assert_eq!(ReportFormat::from_name("tsv"), None);
    }
}
