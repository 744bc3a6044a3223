//! Continued fractions, torus norms, growth-rate estimates and the
//! selection of bridge subsequences among convergent denominators.

mod bridges;
mod cf;
mod power;

pub use bridges::{is_cd_bridge, select_bridges, BridgeChain, PairTag};
pub use cf::{beta_estimate, expand, torus_norm, AlphaSpec, ContinuedFraction, QUOTIENT_GUARD};
pub use power::{big_ln, cmp_pow};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArithmeticError {
    #[error("precision exhausted after {computed} partial quotients (requested {requested})")]
    PrecisionExhausted { computed: usize, requested: usize },
    #[error("input is rational: expansion terminates after {computed} partial quotients")]
    RationalInput { computed: usize },
    #[error("insufficient depth: {selected} of {requested} bridge selections before the expansion ran out")]
    InsufficientDepth { selected: usize, requested: usize },
    #[error("invalid frequency specification: {0}")]
    InvalidSpec(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
