use std::cmp::Ordering;

use num_bigint::BigUint;
use serde::Serialize;

use super::{cmp_pow, ArithmeticError, ContinuedFraction};

/// `(q_l, q_n)` forms a bridge with exponents `(a, b, c)` when every step
/// in between satisfies `q_{i+1} <= q_i^a` and `q_l^b <= q_n <= q_l^c`.
pub fn is_cd_bridge(cf: &ContinuedFraction, l: usize, n: usize, a: f64, b: f64, c: f64) -> bool {
    assert!(0.0 < a && a <= b && b <= c, "exponents must satisfy 0 < a <= b <= c");
    assert!(l < n && n <= cf.depth(), "need l < n <= depth");
    let steps_ok = (l..n).all(|i| cmp_pow(cf.q(i + 1), cf.q(i), a) != Ordering::Greater);
    steps_ok
        && cmp_pow(cf.q(n), cf.q(l), b) != Ordering::Less
        && cmp_pow(cf.q(n), cf.q(l), c) != Ordering::Greater
}

/// Why a consecutive pair of the chain is admissible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairTag {
    /// `(Q_k, Q_{k+1})` is a bridge with exponents `(A, A, A^3)`.
    pub bridge: bool,
    /// `bQ_k >= Q_k^A` (a large jump right after `Q_k`).
    pub jump: bool,
}

/// Selected denominators `Q_k = q_{n_k}` with successors `bQ_k = q_{n_k + 1}`.
#[derive(Debug, Clone, Serialize)]
pub struct BridgeChain {
    pub cal_a: f64,
    /// Indices `n_k` into the expansion.
    pub index: Vec<usize>,
    #[serde(skip)]
    pub q: Vec<BigUint>,
    #[serde(skip)]
    pub bq: Vec<BigUint>,
    /// `tags[k]` describes the pair `(Q_k, Q_{k+1})`.
    pub tags: Vec<PairTag>,
}

impl BridgeChain {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// Checks the growth and alternative properties of the selection.
    pub fn check(&self, cf: &ContinuedFraction) -> Result<(), String> {
        let a = self.cal_a;
        for k in 1..self.len() {
            if cmp_pow(&self.q[k], &self.bq[k - 1], a.powi(4)) == Ordering::Greater {
                return Err(format!("Q_{k} exceeds bQ_{}^(A^4)", k - 1));
            }
            if cmp_pow(&self.q[k], &self.q[k - 1], a) == Ordering::Less {
                return Err(format!("Q_{k} below Q_{}^A", k - 1));
            }
        }
        for k in 0..self.len().saturating_sub(1) {
            if cmp_pow(&self.bq[k], &self.q[k], a) != Ordering::Less {
                continue;
            }
            // Inside a chain of bridges the incoming bridge starts at the
            // previous selection rather than at its successor.
            let incoming = |from: usize| from < self.index[k] && is_cd_bridge(cf, from, self.index[k], a, a, a.powi(3));
            let ok = k >= 1
                && (incoming(self.index[k - 1] + 1) || incoming(self.index[k - 1]))
                && is_cd_bridge(cf, self.index[k], self.index[k + 1], a, a, a.powi(3));
            if !ok {
                return Err(format!("neither alternative holds at k = {k}"));
            }
        }
        Ok(())
    }
}

/// Selects `depth` denominators after `Q_0 = 1`, trying the jump branch
/// first and falling back to chains of bridges.
///
/// `Q_0` sits at the last index with `q = 1`, so `bQ_0 >= 2`. The chains of
/// bridges are built greedily: the next element is the first denominator
/// reaching the previous one to the power `A`.
pub fn select_bridges(cf: &ContinuedFraction, cal_a: f64, depth: usize) -> Result<BridgeChain, ArithmeticError> {
    if cal_a <= 2.0 {
        return Err(ArithmeticError::InvalidParameter("bridge exponent must exceed 2".into()));
    }
    let d = cf.depth();
    let one = BigUint::from(1u8);
    let n0 = cf.denominators().iter().rposition(|x| *x == one).unwrap_or(0);
    if n0 + 1 > d {
        return Err(ArithmeticError::InsufficientDepth { selected: 0, requested: depth });
    }
    let mut idx = vec![n0];
    let is_jump = |n: usize| cmp_pow(cf.q(n + 1), cf.q(n), cal_a) == Ordering::Greater;
    // First index after `from` reaching q_from^A.
    let next_in_chain = |from: usize, limit: usize| -> Option<usize> {
        ((from + 1)..=limit).find(|&m| cmp_pow(cf.q(m), cf.q(from), cal_a) != Ordering::Less)
    };

    'outer: while idx.len() < depth + 1 {
        let nk = *idx.last().unwrap();
        let qk = cf.q(nk);
        let start = nk + 1;
        let jump = (start..d).find(|&n| cf.q(n) > qk && is_jump(n));
        match jump {
            None => {
                // Only diophantine steps ahead: an unbounded chain from bQ_k.
                let mut cur = start;
                loop {
                    match next_in_chain(cur, d - 1) {
                        Some(m) => {
                            idx.push(m);
                            if idx.len() == depth + 1 {
                                break 'outer;
                            }
                            cur = m;
                        }
                        None => {
                            return Err(ArithmeticError::InsufficientDepth {
                                selected: idx.len() - 1,
                                requested: depth,
                            })
                        }
                    }
                }
            }
            Some(n) => {
                if cmp_pow(cf.q(n), cf.q(start), cal_a.powi(4)) != Ordering::Greater {
                    idx.push(n);
                    continue;
                }
                let mut chain = vec![start];
                loop {
                    let last = *chain.last().unwrap();
                    if cmp_pow(cf.q(n), cf.q(last), cal_a * cal_a) != Ordering::Greater {
                        break;
                    }
                    let m = next_in_chain(last, n - 1).expect("chain stays below the jump");
                    chain.push(m);
                }
                let l = chain.len() - 1;
                let take = if cmp_pow(cf.q(n), cf.q(chain[l]), cal_a) != Ordering::Less { l } else { l - 1 };
                for &m in &chain[1..=take] {
                    idx.push(m);
                }
                idx.push(n);
            }
        }
    }
    idx.truncate(depth + 1);
    let q: Vec<BigUint> = idx.iter().map(|&n| cf.q(n).clone()).collect();
    let bq: Vec<BigUint> = idx.iter().map(|&n| cf.q(n + 1).clone()).collect();
    let tags = (0..idx.len().saturating_sub(1))
        .map(|k| PairTag {
            bridge: is_cd_bridge(cf, idx[k], idx[k + 1], cal_a, cal_a, cal_a.powi(3)),
            jump: cmp_pow(&bq[k], &q[k], cal_a) != Ordering::Less,
        })
        .collect();
    Ok(BridgeChain { cal_a, index: idx, q, bq, tags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::{expand, AlphaSpec};
    use num_traits::ToPrimitive;

    #[test]
    fn golden_chain() {
        let cf = expand(&AlphaSpec::golden(), 200).unwrap();
        let ch = select_bridges(&cf, 3.0, 3).unwrap();
        let q: Vec<u64> = ch.q.iter().map(|x| x.to_u64().unwrap()).collect();
        assert_eq!(q, vec![1, 8, 610, 267_914_296]);
        assert!(ch.tags[0].jump);
        assert!(ch.tags[1].bridge && ch.tags[2].bridge);
        ch.check(&cf).unwrap();
    }

    #[test]
    fn depth_one_has_initial_and_first_selection() {
        let cf = expand(&AlphaSpec::golden(), 40).unwrap();
        let ch = select_bridges(&cf, 3.0, 1).unwrap();
        assert_eq!(ch.len(), 2);
        assert_eq!(ch.q[0], BigUint::from(1u8));
    }

    #[test]
    fn huge_quotient_enters_chain() {
        let mut a = vec![1u64; 400];
        a[20] = 1_000_000_000_000;
        let cf = expand(&AlphaSpec::quotients(a), 400).unwrap();
        let ch = select_bridges(&cf, 3.0, 2).unwrap();
        // The list starts at a_1, so q_21 > q_20^3 and q_20 must be selected.
        assert!(ch.index.contains(&20), "chain {:?}", ch.index);
        ch.check(&cf).unwrap();
    }

    #[test]
    fn bridge_single_step_and_rejection() {
        let cf = expand(&AlphaSpec::quotients([1, 1, 1, 1, 1, 1]), 6).unwrap();
        // q = 1,1,2,3,5,8,13: a single step forces q_5 = q_4^A = q_4^B.
        let e = 8f64.ln() / 5f64.ln();
        assert!(is_cd_bridge(&cf, 4, 5, e, e, 1.3));
        assert!(!is_cd_bridge(&cf, 4, 5, 1.28, 1.28, 1.28));
    }

    #[test]
    fn too_shallow_expansion() {
        let cf = expand(&AlphaSpec::golden(), 20).unwrap();
        assert!(matches!(
            select_bridges(&cf, 3.0, 4),
            Err(ArithmeticError::InsufficientDepth { .. })
        ));
    }
}
