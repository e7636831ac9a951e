//! Benchmark harness for the nonlinear Bregman–Kaczmarz solvers: experiment presets,
//! seeded multi-trial comparisons, CSV traces and JSON summaries.

pub mod config;
pub mod output;
pub mod preset;
pub mod rate;
pub mod runner;

pub use preset::{Family, Preset, PRESET_NAMES};
pub use runner::{compare, run_method, run_trial, CompareOptions, RunSpec, TrialResult};

/// Errors surfaced by the harness.
#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] nbk_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("CSV output: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl BenchError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        BenchError::Io { path: path.as_ref().display().to_string(), source }
    }
}
