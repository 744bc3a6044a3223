use super::MobiusError;

/// Largest bound sieved in one piece by [`sieve`].
pub const DEFAULT_SIEVE_BUDGET: u64 = 200_000_000;

/// `μ(n)` for `1 <= n <= n_max`; index 0 holds 0.
#[derive(Debug, Clone)]
pub struct MobiusTable {
    mu: Vec<i8>,
}

impl MobiusTable {
    pub fn bound(&self) -> u64 {
        (self.mu.len() - 1) as u64
    }

    pub fn get(&self, n: u64) -> i8 {
        self.mu[n as usize]
    }

    pub fn values(&self) -> &[i8] {
        &self.mu
    }
}

pub fn sieve(n_max: u64) -> Result<MobiusTable, MobiusError> {
    sieve_with_budget(n_max, DEFAULT_SIEVE_BUDGET)
}

pub fn sieve_with_budget(n_max: u64, budget: u64) -> Result<MobiusTable, MobiusError> {
    if n_max == 0 {
        return Err(MobiusError::InvalidArgument("sieve bound must be positive".into()));
    }
    if n_max > budget {
        return Err(MobiusError::CapacityExceeded { requested: n_max, budget });
    }
    let n = n_max as usize;
    let mut mu = vec![1i8; n + 1];
    let mut composite = vec![false; n + 1];
    mu[0] = 0;
    for p in 2..=n {
        if composite[p] {
            continue;
        }
        for m in (p..=n).step_by(p) {
            if m > p {
                composite[m] = true;
            }
            mu[m] = -mu[m];
        }
        if let Some(p2) = p.checked_mul(p).filter(|&x| x <= n) {
            for m in (p2..=n).step_by(p2) {
                mu[m] = 0;
            }
        }
    }
    Ok(MobiusTable { mu })
}

/// `Σ_{n <= N} μ(n)`.
pub fn mertens(table: &MobiusTable, n: u64) -> i64 {
    assert!(n <= table.bound(), "mertens bound beyond table");
    table.mu[1..=n as usize].iter().map(|&x| x as i64).sum()
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            out.push(p as u64);
            let mut m = p * p;
            while m <= n {
                composite[m] = true;
                m += p;
            }
        }
    }
    out
}

/// `μ(n)` by trial division.
pub fn mobius_by_factorization(mut n: u64) -> i8 {
    assert!(n >= 1);
    let mut sign = 1i8;
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Streams `μ` over `[1, n_max]` in fixed-length blocks.
///
/// Block boundaries depend only on `block_len`, so downstream reductions
/// that follow block order are reproducible.
pub struct MobiusSegments {
    n_max: u64,
    block_len: u64,
    next_start: u64,
    primes: Vec<u64>,
}

impl MobiusSegments {
    pub fn new(n_max: u64, block_len: u64) -> Self {
        assert!(block_len > 0);
        let root = (n_max as f64).sqrt() as u64 + 2;
        MobiusSegments { n_max, block_len, next_start: 1, primes: primes_up_to(root) }
    }

    /// Values of `μ` on `[lo, hi)`.
    pub fn block(&self, lo: u64, hi: u64) -> Vec<i8> {
        let len = (hi - lo) as usize;
        let mut mu = vec![1i8; len];
        let mut rem: Vec<u64> = (lo..hi).collect();
        for &p in &self.primes {
            if p * p >= hi && p >= hi {
                break;
            }
            let first = lo.div_ceil(p) * p;
            let mut m = first;
            while m < hi {
                let i = (m - lo) as usize;
                mu[i] = -mu[i];
                rem[i] /= p;
                m += p;
            }
            let p2 = p * p;
            let mut m = lo.div_ceil(p2) * p2;
            while m < hi {
                mu[(m - lo) as usize] = 0;
                m += p2;
            }
        }
        for i in 0..len {
            if rem[i] > 1 && mu[i] != 0 {
                mu[i] = -mu[i];
            }
        }
        if lo == 0 {
            mu[0] = 0;
        }
        mu
    }
}

impl Iterator for MobiusSegments {
    /// `(first n of the block, values)`.
    type Item = (u64, Vec<i8>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next_start > self.n_max {
            return None;
        }
        let lo = self.next_start;
        let hi = (lo + self.block_len).min(self.n_max + 1);
        self.next_start = hi;
        Some((lo, self.block(lo, hi)))
    }
}
