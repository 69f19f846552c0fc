//! Monte-Carlo experiment engine.
//!
//! A scenario couples one spreading matrix with the transmit chain and a
//! receiver variant; sweeps run the Cartesian product of sparsity and SNR
//! points, derive per-trial seeds from the master seed by counter splitting,
//! and aggregate integer error counts so results are bit-reproducible
//! regardless of worker scheduling.

mod config;
mod metrics;
mod rfa;
mod sweep;
mod trial;

pub use config::{BaselineMode, LoadModeConfig, MatrixSource, ScenarioConfig};
pub use metrics::{compute_metrics, MetricsRecord, CSV_HEADER};
pub use rfa::{cover_only_rfa, empirical_check_degree_histogram, RfaEstimate};
pub use sweep::{derive_seed, sweep, sweep_to_writer};
pub use trial::{run_trial, PointParams, TrialReport};

use crate::detect::DetectError;
use crate::phy::PhyError;
use crate::seqmat::SeqmatError;
use thiserror::Error;

/// Errors from scenario execution and persistence.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Seqmat(#[from] SeqmatError),
    #[error(transparent)]
    Phy(#[from] PhyError),
    #[error(transparent)]
    Detect(#[from] DetectError),
}
