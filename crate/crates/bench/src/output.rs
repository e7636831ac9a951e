//! Trace CSVs and comparison summaries.
//!
//! CSV columns: `trial,method,k,index,residual_norm,error_norm,bregman_dist,step_kind,stepsize`.
//! Floats carry 17 significant digits (`{:.16e}`), indices are zero-based and missing values
//! are empty fields. Row `k = 0` is the starting point.

use std::io::Write;

use nbk_core::{RunRecord, TerminalStatus};
use serde::{Deserialize, Serialize};

use crate::runner::TrialResult;
use crate::BenchError;

pub const CSV_HEADER: [&str; 9] =
    ["trial", "method", "k", "index", "residual_norm", "error_norm", "bregman_dist", "step_kind", "stepsize"];

pub const SUMMARY_FORMAT: &str = "nbk-summary/1";

/// The summary JSON schema shipped with the crate.
pub const SUMMARY_SCHEMA: &str = include_str!("../schema/summary.schema.json");

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_float(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

pub struct TraceWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(out: W) -> Result<Self, BenchError> {
        let mut inner = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        inner.write_record(CSV_HEADER)?;
        Ok(TraceWriter { inner })
    }

    pub fn write_run(&mut self, trial: usize, method: &str, record: &RunRecord) -> Result<(), BenchError> {
        let trial = trial.to_string();
        for row in &record.rows {
            self.inner.write_record([
                trial.as_str(),
                method,
                &row.k.to_string(),
                &row.index.map(|i| i.to_string()).unwrap_or_default(),
                &float(row.residual_norm),
                &opt_float(row.error_norm),
                &opt_float(row.bregman_dist),
                row.step_kind.map_or("", |k| k.as_str()),
                &opt_float(row.stepsize),
            ])?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, BenchError> {
        self.inner.flush().map_err(|e| BenchError::io("<csv>", e))?;
        self.inner.into_inner().map_err(|e| BenchError::io("<csv>", e.into_error()))
    }
}

/// Renders one run as a complete CSV document.
pub fn run_csv(trial: usize, method: &str, record: &RunRecord) -> Result<Vec<u8>, BenchError> {
    let mut w = TraceWriter::new(Vec::new())?;
    w.write_run(trial, method, record)?;
    w.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub median: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub runs: usize,
    pub converged: usize,
    pub success_rate: f64,
    /// Iterations to tolerance; runs that hit the cap count as `max_iters`.
    pub iterations: IterationStats,
    pub final_residual: Quantiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub format: String,
    pub preset: String,
    pub trials: usize,
    pub base_seed: u64,
    pub tol: f64,
    pub relative_tol: bool,
    pub max_iters: usize,
    pub methods: Vec<MethodSummary>,
}

impl Summary {
    pub fn method(&self, label: &str) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == label)
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

pub fn quantiles(values: &[f64]) -> Quantiles {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Quantiles {
        min: v[0],
        q25: quantile(&v, 0.25),
        median: quantile(&v, 0.5),
        q75: quantile(&v, 0.75),
        max: v[v.len() - 1],
    }
}

/// Per-method statistics over `records`.
pub fn summarize_method(label: &str, records: &[&RunRecord]) -> MethodSummary {
    let runs = records.len();
    let converged = records.iter().filter(|r| r.status == TerminalStatus::Converged).count();
    let iters: Vec<f64> = records.iter().map(|r| r.iterations as f64).collect();
    let residuals: Vec<f64> = records.iter().map(|r| r.final_residual_norm).collect();
    MethodSummary {
        method: label.to_string(),
        runs,
        converged,
        success_rate: converged as f64 / runs as f64,
        iterations: IterationStats { median: median(&iters), mean: iters.iter().sum::<f64>() / runs as f64 },
        final_residual: quantiles(&residuals),
    }
}

pub struct SummaryHeader<'a> {
    pub preset: &'a str,
    pub base_seed: u64,
    pub tol: f64,
    pub relative_tol: bool,
    pub max_iters: usize,
}

/// Summary of a comparison; methods appear in the order of the first trial.
pub fn summarize(header: &SummaryHeader, labels: &[String], trials: &[TrialResult]) -> Summary {
    let methods = labels
        .iter()
        .enumerate()
        .map(|(m, label)| {
            let records: Vec<&RunRecord> = trials.iter().map(|t| &t.runs[m].1).collect();
            summarize_method(label, &records)
        })
        .collect();
    Summary {
        format: SUMMARY_FORMAT.into(),
        preset: header.preset.into(),
        trials: trials.len(),
        base_seed: header.base_seed,
        tol: header.tol,
        relative_tol: header.relative_tol,
        max_iters: header.max_iters,
        methods,
    }
}
