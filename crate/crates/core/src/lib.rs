//! Numerics for quasiperiodic SL(2,R) cocycles over irrational rotations.
//!
//! The crate is organised bottom-up:
//! [`arithmetic`] (continued fractions and bridge selection),
//! [`mobius`] (sieves, Dirichlet characters, pretentious distance),
//! [`cocycle`] (transfer matrices, projective dynamics, Lyapunov exponents),
//! [`duality`] (dual operator sections and conjugacies to rotations),
//! [`kam`] (Fourier-space reducibility steps),
//! [`complexity`] (Bowen-metric covering numbers) and
//! [`harness`] (Möbius correlation experiments and result persistence).

pub mod arithmetic;
pub mod cocycle;
pub mod complexity;
pub mod duality;
pub mod harness;
pub mod kam;
pub mod linalg;
pub mod mobius;
pub mod trig;
