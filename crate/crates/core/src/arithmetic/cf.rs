use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::ArithmeticError;

/// Partial quotients above this size are flagged as Liouville jumps.
pub const QUOTIENT_GUARD: u64 = 1_000_000_000_000_000_000;

/// How a frequency in (0, 1) is specified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AlphaSpec {
    /// `(p + sqrt(d)) / q` with `d` not a perfect square.
    Surd { p: i64, d: u64, q: i64 },
    /// A decimal expansion, known to half a unit in its last digit.
    Decimal(String),
    /// An exact rational `num / den`; the expansion terminates.
    Rational { num: u64, den: u64 },
    /// Prescribed partial quotients `a_1, a_2, ...` (`a_0 = 0`).
    Quotients(Vec<BigUint>),
    /// A double, known to one unit in the last place.
    Float(f64),
}

impl AlphaSpec {
    pub fn golden() -> Self {
        AlphaSpec::Surd { p: -1, d: 5, q: 2 }
    }

    pub fn silver() -> Self {
        AlphaSpec::Surd { p: -1, d: 2, q: 1 }
    }

    pub fn quotients<I: IntoIterator<Item = u64>>(it: I) -> Self {
        AlphaSpec::Quotients(it.into_iter().map(BigUint::from).collect())
    }

    /// Best double approximation of the specified number.
    pub fn approx(&self) -> f64 {
        match self {
            AlphaSpec::Surd { p, d, q } => (*p as f64 + (*d as f64).sqrt()) / *q as f64,
            AlphaSpec::Decimal(s) => s.parse().unwrap_or(f64::NAN),
            AlphaSpec::Rational { num, den } => *num as f64 / *den as f64,
            AlphaSpec::Float(x) => *x,
            AlphaSpec::Quotients(a) => {
                let mut x = 0.0f64;
                for ak in a.iter().take(64).rev() {
                    x = 1.0 / (ak.to_f64().unwrap_or(f64::INFINITY) + x);
                }
                x
            }
        }
    }
}

impl fmt::Display for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSpec::Surd { p, d, q } => write!(f, "surd:{p},{d},{q}"),
            AlphaSpec::Decimal(s) => write!(f, "{s}"),
            AlphaSpec::Rational { num, den } => write!(f, "rat:{num}/{den}"),
            AlphaSpec::Float(x) => write!(f, "f64:{x:e}"),
            AlphaSpec::Quotients(a) => {
                let parts: Vec<String> = a.iter().map(|x| x.to_string()).collect();
                write!(f, "cf:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for AlphaSpec {
    type Err = ArithmeticError;

    /// Accepted forms: `golden`, `silver`, `surd:p,d,q`, `rat:n/d`,
    /// `cf:a1,a2,...` (or a bare comma-separated list), `f64:x`, and a
    /// plain decimal such as `0.4142135623730950488`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = |m: &str| ArithmeticError::InvalidSpec(format!("{m}: `{s}`"));
        match s {
            "golden" => return Ok(AlphaSpec::golden()),
            "silver" => return Ok(AlphaSpec::silver()),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("surd:") {
            let v: Vec<&str> = rest.split(',').collect();
            if v.len() != 3 {
                return Err(bad("surd needs p,d,q"));
            }
            let p = v[0].trim().parse().map_err(|_| bad("bad p"))?;
            let d = v[1].trim().parse().map_err(|_| bad("bad d"))?;
            let q = v[2].trim().parse().map_err(|_| bad("bad q"))?;
            return Ok(AlphaSpec::Surd { p, d, q });
        }
        if let Some(rest) = s.strip_prefix("rat:") {
            let (n, d) = rest.split_once('/').ok_or_else(|| bad("rat needs n/d"))?;
            return Ok(AlphaSpec::Rational {
                num: n.trim().parse().map_err(|_| bad("bad numerator"))?,
                den: d.trim().parse().map_err(|_| bad("bad denominator"))?,
            });
        }
        if let Some(rest) = s.strip_prefix("f64:") {
            return Ok(AlphaSpec::Float(rest.trim().parse().map_err(|_| bad("bad float"))?));
        }
        let list = s.strip_prefix("cf:").or(if s.contains(',') { Some(s) } else { None });
        if let Some(rest) = list {
            let a: Result<Vec<BigUint>, _> = rest
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse::<BigUint>())
                .collect();
            return Ok(AlphaSpec::Quotients(a.map_err(|_| bad("bad quotient"))?));
        }
        if s.starts_with("0.") && s[2..].chars().all(|c| c.is_ascii_digit()) && s.len() > 2 {
            return Ok(AlphaSpec::Decimal(s.to_string()));
        }
        Err(bad("unrecognised frequency"))
    }
}

/// Partial quotients and convergents of a frequency in (0, 1).
///
/// Index conventions: `a_0 = 0`, `p_0 = 0`, `q_0 = 1`, `p_1 = 1`, `q_1 = a_1`,
/// and `x_k = a_k x_{k-1} + x_{k-2}` for `k >= 2`.
#[derive(Debug, Clone)]
pub struct ContinuedFraction {
    spec: AlphaSpec,
    a: Vec<BigUint>,
    p: Vec<BigUint>,
    q: Vec<BigUint>,
    alpha: f64,
}

impl ContinuedFraction {
    fn from_quotient_iter(spec: AlphaSpec, quotients: Vec<BigUint>) -> Self {
        let mut a = Vec::with_capacity(quotients.len() + 1);
        let mut p = Vec::with_capacity(quotients.len() + 1);
        let mut q = Vec::with_capacity(quotients.len() + 1);
        a.push(BigUint::zero());
        p.push(BigUint::zero());
        q.push(BigUint::one());
        for (i, ak) in quotients.into_iter().enumerate() {
            let k = i + 1;
            let (pk, qk) = if k == 1 {
                (BigUint::one(), ak.clone())
            } else {
                (&ak * &p[k - 1] + &p[k - 2], &ak * &q[k - 1] + &q[k - 2])
            };
            a.push(ak);
            p.push(pk);
            q.push(qk);
        }
        let d = q.len() - 1;
        let alpha = match &spec {
            AlphaSpec::Quotients(_) => ratio_f64(&p[d], &q[d]),
            other => {
                let x = other.approx();
                if x.is_finite() {
                    x
                } else {
                    ratio_f64(&p[d], &q[d])
                }
            }
        };
        ContinuedFraction { spec, a, p, q, alpha }
    }

    pub fn spec(&self) -> &AlphaSpec {
        &self.spec
    }

    /// Number of computed partial quotients `a_1..a_depth`.
    pub fn depth(&self) -> usize {
        self.a.len() - 1
    }

    pub fn a(&self, k: usize) -> &BigUint {
        &self.a[k]
    }

    pub fn p(&self, k: usize) -> &BigUint {
        &self.p[k]
    }

    pub fn q(&self, k: usize) -> &BigUint {
        &self.q[k]
    }

    pub fn denominators(&self) -> &[BigUint] {
        &self.q
    }

    /// `q_k` as a double (`inf` when it does not fit).
    pub fn q_f64(&self, k: usize) -> f64 {
        self.q[k].to_f64().unwrap_or(f64::INFINITY)
    }

    /// `q_k` as an integer, when it fits.
    pub fn q_i64(&self, k: usize) -> Option<i64> {
        self.q[k].to_i64()
    }

    pub fn p_i64(&self, k: usize) -> Option<i64> {
        self.p[k].to_i64()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Indices whose partial quotient exceeds [`QUOTIENT_GUARD`].
    pub fn liouville_jumps(&self) -> Vec<usize> {
        let guard = BigUint::from(QUOTIENT_GUARD);
        (1..self.a.len()).filter(|&k| self.a[k] > guard).collect()
    }

    /// Largest index `k` with `q_k <= bound`.
    pub fn index_below(&self, bound: &BigUint) -> Option<usize> {
        self.q.iter().rposition(|qk| qk <= bound)
    }
}

fn ratio_f64(p: &BigUint, q: &BigUint) -> f64 {
    BigRational::new(BigInt::from(p.clone()), BigInt::from(q.clone()))
        .to_f64()
        .unwrap_or(f64::NAN)
}

/// `min_j |k alpha - j|`.
pub fn torus_norm(alpha: f64, k: i64) -> f64 {
    let x = k as f64 * alpha;
    (x - x.round()).abs()
}

/// `max_{1 <= k <= n} ln(q_{k+1}) / q_k`.
pub fn beta_estimate(cf: &ContinuedFraction, n: usize) -> Result<f64, ArithmeticError> {
    if n == 0 || n + 1 > cf.depth() {
        return Err(ArithmeticError::InvalidParameter(format!(
            "need 1 <= n < depth (n = {n}, depth = {})",
            cf.depth()
        )));
    }
    Ok((1..=n)
        .map(|k| super::big_ln(cf.q(k + 1)) / cf.q_f64(k))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Expands the specified frequency to `depth` partial quotients.
pub fn expand(spec: &AlphaSpec, depth: usize) -> Result<ContinuedFraction, ArithmeticError> {
    if depth == 0 {
        return Err(ArithmeticError::InvalidParameter("depth must be positive".into()));
    }
    let quotients = match spec {
        AlphaSpec::Quotients(a) => {
            if a.iter().any(|x| x.is_zero()) {
                return Err(ArithmeticError::InvalidSpec("partial quotients must be positive".into()));
            }
            if a.len() < depth {
                return Err(ArithmeticError::PrecisionExhausted { computed: a.len(), requested: depth });
            }
            a[..depth].to_vec()
        }
        AlphaSpec::Surd { p, d, q } => surd_quotients(*p, *d, *q, depth)?,
        AlphaSpec::Decimal(s) => {
            let (lo, hi) = decimal_interval(s)?;
            interval_quotients(lo, hi, depth)?
        }
        AlphaSpec::Rational { num, den } => {
            if *den == 0 || num >= den || *num == 0 {
                return Err(ArithmeticError::InvalidSpec("rational must lie in (0, 1)".into()));
            }
            let x = BigRational::new(BigInt::from(*num), BigInt::from(*den));
            interval_quotients(x.clone(), x, depth)?
        }
        AlphaSpec::Float(x) => {
            if !(*x > 0.0 && *x < 1.0) {
                return Err(ArithmeticError::InvalidSpec("frequency must lie in (0, 1)".into()));
            }
            let c = BigRational::from_float(*x).expect("finite");
            let ulp = BigRational::from_float(x.abs() * f64::EPSILON).expect("finite");
            interval_quotients(&c - &ulp, &c + &ulp, depth)?
        }
    };
    Ok(ContinuedFraction::from_quotient_iter(spec.clone(), quotients))
}

fn decimal_interval(s: &str) -> Result<(BigRational, BigRational), ArithmeticError> {
    let digits = s
        .strip_prefix("0.")
        .filter(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()))
        .ok_or_else(|| ArithmeticError::InvalidSpec(format!("decimal must look like 0.ddd: `{s}`")))?;
    let num: BigInt = digits.parse().expect("digits");
    let den = BigInt::from(10u8).pow(digits.len() as u32);
    let half = BigRational::new(BigInt::one(), &den * 2);
    let mid = BigRational::new(num, den);
    if mid.is_zero() {
        return Err(ArithmeticError::InvalidSpec("frequency must lie in (0, 1)".into()));
    }
    Ok((&mid - &half, &mid + &half))
}

/// Quotients valid for every number in `[lo, hi]` (exact when equal).
fn interval_quotients(
    mut lo: BigRational,
    mut hi: BigRational,
    depth: usize,
) -> Result<Vec<BigUint>, ArithmeticError> {
    let exact = lo == hi;
    let mut out = Vec::with_capacity(depth);
    while out.len() < depth {
        if exact && lo.is_zero() {
            return Err(ArithmeticError::RationalInput { computed: out.len() });
        }
        if !lo.is_positive() {
            return Err(ArithmeticError::PrecisionExhausted { computed: out.len(), requested: depth });
        }
        // 1/x ranges over [1/hi, 1/lo]; both ends must share a floor.
        let rhi = lo.recip();
        let rlo = hi.recip();
        let a_lo = rlo.floor();
        let a_hi = rhi.floor();
        if a_lo != a_hi || (!exact && rhi.is_integer()) {
            return Err(ArithmeticError::PrecisionExhausted { computed: out.len(), requested: depth });
        }
        let a = a_lo.to_integer();
        lo = rlo - BigRational::from_integer(a.clone());
        hi = rhi - BigRational::from_integer(a.clone());
        out.push(a.to_biguint().expect("positive quotient"));
    }
    Ok(out)
}

/// Exact quotients of `(p + sqrt d)/q` by the classical surd recursion.
fn surd_quotients(p: i64, d: u64, q: i64, depth: usize) -> Result<Vec<BigUint>, ArithmeticError> {
    let s = d.sqrt();
    if s * s == d {
        return Err(ArithmeticError::InvalidSpec("surd radicand is a perfect square".into()));
    }
    if q == 0 {
        return Err(ArithmeticError::InvalidSpec("surd denominator is zero".into()));
    }
    let x = (p as f64 + (d as f64).sqrt()) / q as f64;
    if !(x > 0.0 && x < 1.0) {
        return Err(ArithmeticError::InvalidSpec("surd must lie in (0, 1)".into()));
    }
    let mut pp = BigInt::from(p);
    let mut dd = BigInt::from(d);
    let mut qq = BigInt::from(q);
    if !(&dd - &pp * &pp).is_multiple_of(&qq) {
        let aq = qq.abs();
        pp *= &aq;
        dd *= &qq * &qq;
        qq *= &aq;
    }
    let sqrt_floor = |dd: &BigInt| -> BigInt { dd.sqrt() };
    let sd = sqrt_floor(&dd);
    let floor_of = |pp: &BigInt, qq: &BigInt| -> BigInt {
        if qq.sign() == Sign::Plus {
            (pp + &sd).div_floor(qq)
        } else {
            let qa = -qq.clone();
            -((pp + &sd).div_floor(&qa) + BigInt::one())
        }
    };
    let mut out = Vec::with_capacity(depth);
    // a_0 = 0, then iterate x <- 1/(x - a).
    let mut a = floor_of(&pp, &qq);
    for _ in 0..=depth {
        let np = &a * &qq - &pp;
        let nq = (&dd - &np * &np) / &qq;
        pp = np;
        qq = nq;
        a = floor_of(&pp, &qq);
        if out.len() == depth {
            break;
        }
        out.push(a.to_biguint().expect("positive quotient"));
    }
    Ok(out)
}
