//! Möbius correlation experiments along projective orbits, the periodic
//! approximation of parabolic orbits, and content-addressed result storage.

mod config;
mod correlation;
mod parabolic;
mod store;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{ExperimentConfig, Weights};
pub use correlation::{closed_form_sum, correlation_sum, observable, run, CheckpointAvg, ResultRecord};
pub use parabolic::{
    escape_bound, escape_count, escape_grid, parabolic_scenario, select_liouville_scale, EscapeGrid, ParabolicConfig,
    ParabolicRecord,
};
pub use store::{persist, report, ReportSummary, SummaryRow};

use crate::mobius::MobiusError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    ConfigParse(String),
    #[error("I/O failure on {0}: {1}")]
    Io(PathBuf, String),
    #[error("no continued-fraction scale with ln q_(k+1) / q_k >= {threshold}")]
    NoLiouvilleScale { threshold: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Mobius(#[from] MobiusError),
}

impl HarnessError {
    fn io(path: &Path, e: std::io::Error) -> Self {
        HarnessError::Io(path.to_path_buf(), e.to_string())
    }
}
