use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::arithmetic::ContinuedFraction;
use crate::cocycle::{parabolic_orbit, proj_step, ProjPoint};
use crate::linalg::Mat2;
use crate::mobius::{decomposition_bound, CharacterRange, MobiusTable, PeriodicSequence};

/// Parameters of the periodic-approximation experiment for a constant
/// parabolic cocycle `[[1, c], [0, 1]]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParabolicConfig {
    pub c: f64,
    pub iota1: i64,
    pub iota2: i64,
    pub theta0: f64,
    pub phi0: f64,
    /// Angular threshold, in radians, defining the escape set.
    pub eta_tilde: f64,
    /// Number of periods `M` in each window.
    pub periods: u64,
    /// First index `L` of the window.
    pub start: u64,
    /// Minimal `ln q_{k+1} / q_k` for a usable scale.
    pub beta_threshold: f64,
    /// Largest period accepted (character sums cost grows with it).
    pub max_period: u64,
}

impl Default for ParabolicConfig {
    fn default() -> Self {
        ParabolicConfig {
            c: 1e-3,
            iota1: 1,
            iota2: 1,
            theta0: 0.1,
            phi0: 0.05,
            eta_tilde: 0.05,
            periods: 16,
            start: 1000,
            beta_threshold: 0.5,
            max_period: 400,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParabolicRecord {
    pub k: usize,
    pub p: u64,
    pub q: u64,
    pub c: f64,
    pub periods: u64,
    pub start: u64,
    /// `E_{n∈[L, L+Mq)} μ(n) f(Tⁿx₀)`.
    pub exact: [f64; 2],
    /// The same average with `f(Tⁿx₀)` replaced by the periodic `D_L(n)`.
    pub approximant: [f64; 2],
    pub difference: f64,
    /// `max |f(Tⁿx₀) − f(θ_n, 0)|` over the window.
    pub orbit_deviation: f64,
    /// `max |f(θ_n, 0) − D_L(n)|` over the window.
    pub period_deviation: f64,
    /// Largest escape count over the `q` starting phases of the window.
    pub escape_max: usize,
    pub escape_bound: f64,
    pub escape_ok: bool,
    pub decomposition_lhs: f64,
    pub decomposition_rhs: f64,
    pub decomposition_ok: bool,
    /// Agreement of the closed-form angle with iterated projective steps.
    pub closed_form_drift: f64,
}

/// Largest `k` with `q_k <= max_period` and `ln q_{k+1} / q_k >= threshold`.
pub fn select_liouville_scale(
    cf: &ContinuedFraction,
    threshold: f64,
    max_period: u64,
) -> Result<(usize, u64, u64), HarnessError> {
    let mut best = None;
    for k in 1..cf.depth().saturating_sub(1) {
        let q = match cf.q_i64(k) {
            Some(q) if q as u64 <= max_period => q as u64,
            _ => break,
        };
        let next = crate::arithmetic::big_ln(cf.q(k + 1));
        if next / q as f64 >= threshold {
            best = Some((k, cf.p_i64(k).unwrap_or(0) as u64, q));
        }
    }
    best.ok_or(HarnessError::NoLiouvilleScale { threshold })
}

/// `#{0 <= m < m_max : |angle of A^{qm} φ| > η̃}` for `A = [[1, c], [0, 1]]`.
pub fn escape_count(c: f64, q: u64, phi: f64, eta_tilde: f64, m_max: u64) -> usize {
    let step = c * q as f64;
    (0..m_max).filter(|&m| (2.0 * PI * parabolic_orbit(step, phi, m as i64)).abs() > eta_tilde).count()
}

/// `2 / (η̃ q |c|) + 1`.
pub fn escape_bound(eta_tilde: f64, q: u64, c: f64) -> f64 {
    2.0 / (eta_tilde * q as f64 * c.abs()) + 1.0
}

/// Result of checking the escape bound on a grid of parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EscapeGrid {
    pub cells: usize,
    pub checks: usize,
    pub violations: Vec<(f64, f64, u64, f64, usize)>,
    /// Largest `count / bound` seen.
    pub max_ratio: f64,
}

/// Checks the escape bound for every `(η̃, c, q)` cell and starting angle.
pub fn escape_grid(etas: &[f64], cs: &[f64], qs: &[u64], phis: &[f64], m_max: u64) -> EscapeGrid {
    let mut g = EscapeGrid { cells: 0, checks: 0, violations: Vec::new(), max_ratio: 0.0 };
    for &eta in etas {
        for &c in cs {
            for &q in qs {
                g.cells += 1;
                let bound = escape_bound(eta, q, c);
                for &phi in phis {
                    let n = escape_count(c, q, phi, eta, m_max);
                    g.checks += 1;
                    g.max_ratio = g.max_ratio.max(n as f64 / bound);
                    if n as f64 > bound {
                        g.violations.push((eta, c, q, phi, n));
                    }
                }
            }
        }
    }
    g
}

fn f_at(iota1: i64, iota2: i64, theta: f64, phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (iota1 as f64 * theta + 2.0 * iota2 as f64 * phi))
}

/// Compares the correlation along an exact parabolic orbit with the one along
/// its period-`q` approximant on `[L, L + Mq)`.
pub fn parabolic_scenario(
    cfg: &ParabolicConfig,
    cf: &ContinuedFraction,
    mu: &MobiusTable,
) -> Result<ParabolicRecord, HarnessError> {
    if cfg.c == 0.0 || cfg.periods == 0 || cfg.start == 0 {
        return Err(HarnessError::InvalidParameter("c, periods and start must be nonzero".into()));
    }
    let (k, p, q) = select_liouville_scale(cf, cfg.beta_threshold, cfg.max_period)?;
    let alpha = cf.alpha();
    let (l, len) = (cfg.start, cfg.periods * q);
    if mu.bound() < l + len {
        return Err(HarnessError::InvalidParameter(format!("Möbius table must reach {}", l + len)));
    }
    let theta = |n: u64| (cfg.theta0 + n as f64 * alpha).rem_euclid(1.0);
    let phi = |n: u64| parabolic_orbit(cfg.c, cfg.phi0, n as i64);
    let period: Vec<Complex64> = (0..q).map(|r| f_at(cfg.iota1, cfg.iota2, theta(l + r), 0.0)).collect();
    let d_l = |n: u64| period[((n - l) % q) as usize];

    let (mut exact, mut approx) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    let (mut orbit_dev, mut period_dev) = (0.0f64, 0.0f64);
    for n in l..l + len {
        let w = mu.get(n) as f64;
        let fx = f_at(cfg.iota1, cfg.iota2, theta(n), phi(n));
        let flat = f_at(cfg.iota1, cfg.iota2, theta(n), 0.0);
        exact += fx * w;
        approx += d_l(n) * w;
        orbit_dev = orbit_dev.max((fx - flat).norm());
        period_dev = period_dev.max((flat - d_l(n)).norm());
    }
    exact /= len as f64;
    approx /= len as f64;

    let bound = escape_bound(cfg.eta_tilde, q, cfg.c);
    let escape_max = (0..q).map(|r| escape_count(cfg.c, q, phi(l + r), cfg.eta_tilde, cfg.periods)).max().unwrap_or(0);

    // Reorder the period so that index 0 falls on a multiple of q.
    let aligned: Vec<Complex64> = (0..q).map(|i| d_l(l + ((i + q - l % q) % q))).collect();
    let seq = PeriodicSequence::new(aligned)?;
    let (lhs, rhs) = decomposition_bound(l, q, cfg.periods, &seq, mu, CharacterRange::Primitive)?;

    let a = Mat2::new(1.0, cfg.c, 0.0, 1.0);
    let mut x = ProjPoint::new(cfg.theta0, cfg.phi0);
    let mut drift = 0.0f64;
    for n in 1..=len.min(4096) {
        x = proj_step(&a, x, alpha);
        drift = drift.max(crate::cocycle::rp1_dist(x.phi, phi(n)));
    }

    Ok(ParabolicRecord {
        k,
        p,
        q,
        c: cfg.c,
        periods: cfg.periods,
        start: l,
        exact: [exact.re, exact.im],
        approximant: [approx.re, approx.im],
        difference: (exact - approx).norm(),
        orbit_deviation: orbit_dev,
        period_deviation: period_dev,
        escape_max,
        escape_bound: bound,
        escape_ok: escape_max as f64 <= bound,
        decomposition_lhs: lhs,
        decomposition_rhs: rhs,
        decomposition_ok: lhs <= rhs * (1.0 + 1e-12),
        closed_form_drift: drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::{expand, AlphaSpec};
    use crate::mobius::sieve;

    fn liouville() -> ContinuedFraction {
        expand(&AlphaSpec::quotients([3, 1_000_000_000, 2, 1, 1, 1]), 6).unwrap()
    }

    #[test]
    fn selects_scale_before_large_quotient() {
        let (k, _, q) = select_liouville_scale(&liouville(), 0.5, 400).unwrap();
        assert_eq!((k, q), (1, 3));
    }

    #[test]
    fn golden_has_no_scale_at_high_threshold() {
        let cf = expand(&AlphaSpec::golden(), 30).unwrap();
        assert!(matches!(select_liouville_scale(&cf, 5.0, 400), Err(HarnessError::NoLiouvilleScale { .. })));
    }

    #[test]
    fn flat_start_has_no_orbit_deviation() {
        let mu = sieve(10_000).unwrap();
        let cfg = ParabolicConfig { phi0: 0.0, ..ParabolicConfig::default() };
        let r = parabolic_scenario(&cfg, &liouville(), &mu).unwrap();
        assert!(r.orbit_deviation <= 1e-10);
        assert!(r.escape_ok && r.decomposition_ok);
        assert!(r.closed_form_drift < 1e-10);
    }

    #[test]
    fn period_deviation_is_small_for_liouville_scale() {
        let mu = sieve(10_000).unwrap();
        let r = parabolic_scenario(&ParabolicConfig::default(), &liouville(), &mu).unwrap();
        // ‖3α‖ ≈ 1e-9, so over 48 steps the periodic approximant is exact to ~1e-7.
        assert!(r.period_deviation < 1e-6, "{}", r.period_deviation);
        assert!(r.escape_ok);
    }

    #[test]
    fn escape_count_matches_direct_orbit() {
        let (c, q, phi, eta) = (1e-3, 21, 0.2, 0.05);
        let a = Mat2::new(1.0, c, 0.0, 1.0);
        let mut aq = Mat2::identity();
        for _ in 0..q {
            aq = a * aq;
        }
        let mut x = ProjPoint::new(0.0, phi);
        let mut direct = 0;
        for _ in 0..500 {
            if (2.0 * PI * x.phi).abs() > eta {
                direct += 1;
            }
            x = proj_step(&aq, x, 0.0);
        }
        assert_eq!(escape_count(c, q, phi, eta, 500), direct);
        assert!(direct as f64 <= escape_bound(eta, q, c));
    }
}
