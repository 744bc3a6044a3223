//! The Möbius function, Dirichlet characters, and the periodic
//! decomposition inequality relating `μ·D` averages to character sums.

mod characters;
mod decomposition;
mod pretentious;
mod sieve;

pub use characters::{brute_force_conductor, characters, factorize, DirichletCharacter};
pub use decomposition::{decomposition_bound, CharacterRange, PeriodicSequence};
pub use pretentious::{pretentious_distance, pretentious_m, short_interval_mean_square};
pub use sieve::{
    mertens, mobius_by_factorization, primes_up_to, sieve, sieve_with_budget, MobiusSegments, MobiusTable,
    DEFAULT_SIEVE_BUDGET,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MobiusError {
    #[error("sieve bound {requested} exceeds the in-memory budget {budget}; use segmented sieving")]
    CapacityExceeded { requested: u64, budget: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
