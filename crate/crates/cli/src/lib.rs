//! Parameter sweeps over the optonet models and figure datasets.
//!
//! A sweep is described by a JSON [`RunConfig`]: the model, a full parameter
//! block, optional sweep axes, the observables to record and which feedback
//! variants to run. [`run`] evaluates the grid (in parallel, order-preserving)
//! and [`write_csv`] emits one row per point × feedback × observable.

pub mod config;
pub mod output;
pub mod presets;
pub mod sweep;

pub use config::{FeedbackMode, ModelKind, Observable, Part, RunConfig, SweepAxis};
pub use output::{format_float, metadata_path, write_csv, write_metadata};
pub use presets::{preset, PRESETS};
pub use sweep::{run, worker_count, Row, SweepResult};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Schema or consistency violation at `path` (e.g. `sweep[0].values`).
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Model(#[from] optonet::Error),
}
