//! Dual long-range operators, their eigenvectors, and the real conjugacy
//! they induce for Schrödinger cocycles.

mod block;
mod eigen;
mod scan;
mod section;

pub use block::{
    build_w, decay_fit, default_window, rotation_residual, truncated_block, ConjugacyW, DecayFit, Laurent,
    TruncatedBlock,
};
pub use eigen::{count_below, eigenpair_near, eigenvalue_by_index, DualEigenvector};
pub use scan::{duality_at, run_duality, DualityConfig, DualityOutcome, DualitySummary};
pub use section::{dual_section, epsilon_resonances, resonance_scale, DualSection};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DualityError {
    #[error("inverse iteration did not converge near E = {energy}")]
    NoConvergence { energy: f64 },
    #[error("det B degenerates on the grid (floor {floor:e}); widen the window or change the phase")]
    DegenerateDeterminant { floor: f64 },
}
