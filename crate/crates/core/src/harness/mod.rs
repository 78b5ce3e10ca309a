//! Monte-Carlo experiments, statistical checks and report writers.

mod checks;
mod config;
mod experiment;
mod report;
mod stats;

use thiserror::Error;

use crate::oracle::OracleError;
use crate::protocol::ProtocolError;
use crate::sphere::GeometryError;

pub use checks::*;
pub use config::{
    ExperimentConfig, Mode, ObservablePair, ObservableSpec, PartialConfig, StateSpec,
};
pub use experiment::{
    aggregate, build_instance, correlation_estimate, estimate_joint_correlation, run_trials,
    ExperimentReport, Instance, InstanceReport, PostselectionStats, TrialOutcome, TrialStatistics,
    REQUIRED_PASS_FRACTION, Z_LIMIT,
};
pub use report::*;
pub use stats::*;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("the full outcome distribution is only reproduced for maximally entangled states")]
    NotMaximallyEntangled,
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Runs `f` on a dedicated pool of `jobs` threads, or on the global pool
/// when `jobs` is `None`. Results do not depend on the thread count.
pub fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match jobs {
        None => f(),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .expect("thread pool")
            .install(f),
    }
}
