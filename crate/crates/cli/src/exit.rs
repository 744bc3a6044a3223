//! Exit codes: 0 success, 1 other failures (I/O), 2 configuration errors,
//! 3 regime or precondition violations, 4 numerical failures.

use cocycle_core::arithmetic::ArithmeticError;
use cocycle_core::cocycle::CocycleError;
use cocycle_core::complexity::ComplexityError;
use cocycle_core::duality::DualityError;
use cocycle_core::harness::HarnessError;
use cocycle_core::kam::KamError;
use cocycle_core::mobius::MobiusError;

pub const CONFIG: u8 = 2;
pub const REGIME: u8 = 3;
pub const NUMERICAL: u8 = 4;

/// Marks an error as a configuration problem.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(ConfigError(msg.into()))
}

fn classify(e: &(dyn std::error::Error + 'static)) -> Option<u8> {
    if e.is::<ConfigError>() || e.is::<serde_json::Error>() {
        return Some(CONFIG);
    }
    if let Some(k) = e.downcast_ref::<KamError>() {
        return Some(match k {
            KamError::SmallnessViolated { .. }
            | KamError::RegimeViolated(_)
            | KamError::Postcondition(_)
            | KamError::SupportViolated(_)
            | KamError::InvalidParameter(_) => REGIME,
            _ => NUMERICAL,
        });
    }
    if let Some(h) = e.downcast_ref::<HarnessError>() {
        return match h {
            HarnessError::ConfigParse(_) => Some(CONFIG),
            HarnessError::NoLiouvilleScale { .. } | HarnessError::InvalidParameter(_) => Some(REGIME),
            HarnessError::Mobius(_) => Some(REGIME),
            HarnessError::Io(..) => None,
        };
    }
    if let Some(a) = e.downcast_ref::<ArithmeticError>() {
        return Some(match a {
            ArithmeticError::InvalidSpec(_) => CONFIG,
            ArithmeticError::PrecisionExhausted { .. } => NUMERICAL,
            _ => REGIME,
        });
    }
    if let Some(c) = e.downcast_ref::<CocycleError>() {
        return Some(match c {
            CocycleError::Parse(_) => CONFIG,
            _ => NUMERICAL,
        });
    }
    if e.is::<MobiusError>() || e.is::<ComplexityError>() {
        return Some(REGIME);
    }
    if e.is::<DualityError>() {
        return Some(NUMERICAL);
    }
    None
}

pub fn code(e: &anyhow::Error) -> u8 {
    e.chain().find_map(classify).unwrap_or(1)
}
