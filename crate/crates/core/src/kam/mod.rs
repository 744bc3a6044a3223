//! KAM reducibility for analytic quasiperiodic linear systems
//! `X' = (A + F(θ + tω)) X` on `T²` with `ω = (1, α)`.
//!
//! One iteration removes the nonresonant part of `F` by Newton-style
//! homological elimination, handles a single low resonance with a
//! half-frequency rotation, collapses a resonant line after a large
//! continued-fraction jump by Floquet reduction and finally puts the
//! constant into a normal form. Every conjugation is checked against the
//! directly integrated flows.

mod floquet;
mod fourier;
mod homological;
mod normalize;
mod resonance;
mod rotation;
mod step;
mod su11;
mod system;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use floquet::{conjugate_by_phase_map, floquet_reduce, on_line, FloquetReduction};
pub use fourier::{
    is_canonical, mode_norm, pairing, truncate, weighted_frobenius, weighted_norm, Fourier2, Mode, ModeEntry,
};
pub use homological::{
    ad_matrix, conjugate_by_exp, eliminate, homological_solve, homological_solve_with, identity_residual,
    mode_operator, sl2_coords, sl2_from_coords, Elimination, EliminationOptions, HomologicalSolution,
};
pub use normalize::{elliptic_normalizer, normalize, normalize_with, NormalCase, NormalForm};
pub use resonance::{resonance_partition, ResonancePartition};
pub use rotation::{rotation_conjugate, rotation_matrix};
pub use step::{
    composite, elliptic_bridge_step, elliptic_liouville_step, kam_step, parabolic_bridge_step,
    parabolic_liouville_step, verify_conjugacy, BoundCheck, Branch, ConjugationStep, KamParams, KamReport, KamStep,
    Stage, StepKind, StepSummary, RESONANCE_SCAN_CAP,
};
pub use su11::{from_su11, su11_matrix, su11_transform, to_su11};
pub use system::{integrate, ode_flow, poincare_map, poincare_map_with, rk4_fixed, ConstantPart, LinearSystem};

/// Small constant in the exponents of the smallness and band conditions.
pub const C0: f64 = 1.0 / (2.0 * 48.0 * 48.0);

#[derive(Debug, Error)]
pub enum KamError {
    #[error("perturbation norm {norm:e} exceeds {bound:e}")]
    SmallnessViolated { norm: f64, bound: f64 },
    #[error("monodromy trace {trace} has no real logarithm")]
    MonodromyLogBranch { trace: f64 },
    #[error("constant is not nearly unipotent: eigenvalue {lambda:e}, ln threshold {ln_threshold}")]
    NotNUH { lambda: f64, ln_threshold: f64 },
    #[error("outside the proven regime: {0}")]
    RegimeViolated(String),
    #[error("integrator step underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("Poincaré map fit residual {residual:e} too large")]
    FitResidualTooLarge { residual: f64 },
    #[error("support violated: {0}")]
    SupportViolated(String),
    #[error("bound not met: {0}")]
    Postcondition(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("flow verification residual {residual:e} above {tol:e}")]
    VerificationFailed { residual: f64, tol: f64 },
}

/// What to do when a regime hypothesis or a bound fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimePolicy {
    /// Fail with [`KamError::RegimeViolated`] or [`KamError::Postcondition`].
    #[default]
    Enforce,
    /// Record the failure and continue.
    Report,
}
