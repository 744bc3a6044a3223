use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{characters, MobiusError, MobiusTable};

/// A `Q`-periodic sequence bounded by one in modulus.
#[derive(Debug, Clone)]
pub struct PeriodicSequence {
    values: Vec<Complex64>,
}

impl PeriodicSequence {
    pub fn new(values: Vec<Complex64>) -> Result<Self, MobiusError> {
        if values.is_empty() {
            return Err(MobiusError::InvalidArgument("empty period".into()));
        }
        if let Some(v) = values.iter().find(|v| v.norm() > 1.0 + 1e-12) {
            return Err(MobiusError::InvalidArgument(format!("value {v} exceeds modulus one")));
        }
        Ok(PeriodicSequence { values })
    }

    pub fn period(&self) -> u64 {
        self.values.len() as u64
    }

    pub fn at(&self, n: u64) -> Complex64 {
        self.values[(n % self.period()) as usize]
    }
}

/// Which characters modulo `Q/d` enter the average on the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum CharacterRange {
    /// Characters of conductor exactly `Q/d`.
    #[default]
    Primitive,
    /// Every character of modulus `Q/d`.
    AllOfModulus,
}

/// Both sides of the inequality bounding a short `μ·D` average by character sums.
///
/// The inner averages run over integers `r` with `L/d <= r < L/d + MQ/d`.
pub fn decomposition_bound(
    l: u64,
    q: u64,
    m: u64,
    d_seq: &PeriodicSequence,
    mu: &MobiusTable,
    range: CharacterRange,
) -> Result<(f64, f64), MobiusError> {
    if l == 0 || q == 0 || m == 0 {
        return Err(MobiusError::InvalidArgument("L, Q, M must be positive".into()));
    }
    if d_seq.period() != q {
        return Err(MobiusError::InvalidArgument("sequence period differs from Q".into()));
    }
    if mu.bound() < l + m * q {
        return Err(MobiusError::InvalidArgument("Möbius table too short".into()));
    }
    let len = m * q;
    let lhs_sum: Complex64 = (l..l + len).map(|n| d_seq.at(n) * mu.get(n) as f64).sum();
    let lhs = (lhs_sum / len as f64).norm_sqr();

    let mut total = 0.0;
    let mut pairs = 0usize;
    for d in (1..=q).filter(|d| q % d == 0) {
        let modulus = q / d;
        let lo = l.div_ceil(d);
        let count = len / d;
        for chi in characters(modulus) {
            if range == CharacterRange::Primitive && !chi.is_primitive() {
                continue;
            }
            let s: Complex64 = (lo..lo + count).map(|r| chi.value(r) * mu.get(r) as f64).sum();
            total += (s / count as f64).norm_sqr();
            pairs += 1;
        }
    }
    let rhs = if pairs == 0 { 0.0 } else { q as f64 * total / pairs as f64 };
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobius::sieve;

    #[test]
    fn zero_sequence() {
        let mu = sieve(100).unwrap();
        let d = PeriodicSequence::new(vec![Complex64::new(0.0, 0.0); 3]).unwrap();
        let (lhs, rhs) = decomposition_bound(5, 3, 2, &d, &mu, CharacterRange::Primitive).unwrap();
        assert_eq!(lhs, 0.0);
        assert!(rhs >= 0.0);
    }

    #[test]
    fn hand_enumerated_case() {
        let mu = sieve(10).unwrap();
        let one = PeriodicSequence::new(vec![Complex64::new(1.0, 0.0); 2]).unwrap();
        // Pairs of every modulus: (1, principal mod 2) gives 1/4, (2, trivial) gives 1.
        let (lhs, rhs) = decomposition_bound(2, 2, 1, &one, &mu, CharacterRange::AllOfModulus).unwrap();
        assert_eq!(lhs, 1.0);
        assert_eq!(rhs, 1.25);
        // Only the trivial character of conductor 1 is primitive.
        let (lhs, rhs) = decomposition_bound(2, 2, 1, &one, &mu, CharacterRange::Primitive).unwrap();
        assert_eq!(lhs, 1.0);
        assert_eq!(rhs, 2.0);
    }

    #[test]
    fn rejects_oversized_values() {
        assert!(PeriodicSequence::new(vec![Complex64::new(1.1, 0.0)]).is_err());
    }
}
