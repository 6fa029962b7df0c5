//! Comparison reports as CSV and JSON.

use anyhow::Result;
use epr_core::schedule::ComparisonReport;
use serde::Serialize;

pub const REPORT_COLUMNS: [&str; 20] = [
    "name",
    "status",
    "error",
    "family",
    "n_qubits",
    "side",
    "epr_pairs",
    "depth_mode",
    "original_cx",
    "original_depth",
    "remote_standard_cx",
    "remote_cx",
    "remote_expanded_cx",
    "remote_depth",
    "remote_contended_depth",
    "remote_block_depth",
    "standard_cx",
    "standard_depth",
    "cx_difference",
    "depth_difference",
];

pub const DIFFERENCE_COLUMNS: [&str; 4] = ["n_qubits", "cx_difference", "depth_difference", "family"];

/// A suite row: the report, or why the benchmark failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub name: String,
    #[serde(flatten)]
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    Ok(ComparisonReport),
    Failed { error: String },
}

impl BenchRow {
    fn record(&self) -> Vec<String> {
        match &self.outcome {
            Outcome::Ok(r) => {
                let mode = match r.depth_mode {
                    epr_core::DepthMode::AllGates => "all",
                    epr_core::DepthMode::TwoQubitOnly => "2q",
                };
                let mut rec = vec![self.name.clone(), "ok".into(), String::new(), r.family.clone()];
                rec.extend(
                    [r.n_qubits, r.side, r.epr_pairs].iter().map(|v| v.to_string()).chain([mode.to_string()]),
                );
                rec.extend(
                    [
                        r.original_cx,
                        r.original_depth,
                        r.remote_standard_cx,
                        r.remote_cx,
                        r.remote_expanded_cx,
                        r.remote_depth,
                        r.remote_contended_depth,
                        r.remote_block_depth,
                        r.standard_cx,
                        r.standard_depth,
                    ]
                    .iter()
                    .map(|v| v.to_string()),
                );
                rec.push(r.cx_difference.to_string());
                rec.push(r.depth_difference.to_string());
                rec
            }
            Outcome::Failed { error } => {
                let mut rec = vec![self.name.clone(), "failed".into(), error.clone()];
                rec.resize(REPORT_COLUMNS.len(), String::new());
                rec
            }
        }
    }
}

fn write_csv(header: &str, columns: &[&str], records: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(columns)?;
    for rec in records {
        w.write_record(&rec)?;
    }
    let body = String::from_utf8(w.into_inner()?)?;
    Ok(format!("# {header}\n{body}"))
}

/// Report CSV: a `#` config line, the header, then one row per benchmark.
pub fn report_csv(header: &str, rows: &[BenchRow]) -> Result<String> {
    write_csv(header, &REPORT_COLUMNS, rows.iter().map(BenchRow::record))
}

/// Difference CSV for plotting, successful rows only.
pub fn difference_csv(header: &str, rows: &[BenchRow]) -> Result<String> {
    write_csv(
        header,
        &DIFFERENCE_COLUMNS,
        rows.iter().filter_map(|r| match &r.outcome {
            Outcome::Ok(r) => Some(vec![
                r.n_qubits.to_string(),
                r.cx_difference.to_string(),
                r.depth_difference.to_string(),
                r.family.clone(),
            ]),
            Outcome::Failed { .. } => None,
        }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SuiteSummary {
    pub benchmarks: usize,
    pub failed: usize,
    pub positive_cx_difference: usize,
    pub positive_depth_difference: usize,
}

pub fn summarise(rows: &[BenchRow]) -> SuiteSummary {
    let ok: Vec<&ComparisonReport> = rows
        .iter()
        .filter_map(|r| match &r.outcome {
            Outcome::Ok(r) => Some(r),
            Outcome::Failed { .. } => None,
        })
        .collect();
    SuiteSummary {
        benchmarks: rows.len(),
        failed: rows.len() - ok.len(),
        positive_cx_difference: ok.iter().filter(|r| r.cx_difference > 0).count(),
        positive_depth_difference: ok.iter().filter(|r| r.depth_difference > 0).count(),
    }
}
