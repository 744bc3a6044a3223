use std::f64::consts::PI;

use num_complex::Complex64;

use crate::arithmetic::torus_norm;
use crate::trig::TrigPoly;

/// Finite section of the dual long-range operator on `[-K, K]`:
/// `H[n, m] = v̂_{n-m} + 2 cos(2π(θ + nα)) δ_{nm}`.
#[derive(Debug, Clone)]
pub struct DualSection {
    pub theta: f64,
    pub alpha: f64,
    pub half_width: usize,
    pub potential: TrigPoly,
    bandwidth: usize,
    /// Row-major band storage, `band[i * (2b + 1) + (j - i + b)]`.
    band: Vec<Complex64>,
}

pub fn dual_section(v: &TrigPoly, alpha: f64, theta: f64, half_width: usize) -> DualSection {
    let b = v.degree() as usize;
    assert!(half_width >= b, "half-width must be at least the degree of the potential");
    let n = 2 * half_width + 1;
    let w = 2 * b + 1;
    let mut band = vec![Complex64::new(0.0, 0.0); n * w];
    for i in 0..n {
        let site = i as i64 - half_width as i64;
        for off in -(b as i64)..=(b as i64) {
            let j = i as i64 + off;
            if j < 0 || j >= n as i64 {
                continue;
            }
            let mut e = v.coeff(-off);
            if off == 0 {
                e += 2.0 * (2.0 * PI * (theta + site as f64 * alpha)).cos();
            }
            band[i * w + (off + b as i64) as usize] = e;
        }
    }
    DualSection { theta, alpha, half_width, potential: v.clone(), bandwidth: b, band }
}

impl DualSection {
    pub fn size(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Entry at matrix indices `(i, j)` in `0..size`.
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        let b = self.bandwidth as i64;
        let off = j as i64 - i as i64;
        if off.abs() > b {
            Complex64::new(0.0, 0.0)
        } else {
            self.band[i * (2 * self.bandwidth + 1) + (off + b) as usize]
        }
    }

    /// Entry at lattice sites `(n, m)` in `[-K, K]`.
    pub fn entry(&self, n: i64, m: i64) -> Complex64 {
        let k = self.half_width as i64;
        self.at((n + k) as usize, (m + k) as usize)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.size();
        let b = self.bandwidth;
        (0..n).all(|i| (i..(i + b + 1).min(n)).all(|j| (self.at(i, j) - self.at(j, i).conj()).norm() <= tol))
    }

    pub fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        let n = self.size();
        let b = self.bandwidth;
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(b);
                let hi = (i + b).min(n - 1);
                (lo..=hi).map(|j| self.at(i, j) * u[j]).sum()
            })
            .collect()
    }

    /// `max_i Σ_j |H_ij|`, an upper bound for the spectral radius.
    pub fn inf_norm(&self) -> f64 {
        let n = self.size();
        let b = self.bandwidth;
        (0..n)
            .map(|i| (i.saturating_sub(b)..=(i + b).min(n - 1)).map(|j| self.at(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.size();
        let b = self.bandwidth;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r: f64 =
                (i.saturating_sub(b)..=(i + b).min(n - 1)).filter(|&j| j != i).map(|j| self.at(i, j).norm()).sum();
            let d = self.at(i, i).re;
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        (lo, hi)
    }
}

/// Integers `k` with `|k| <= k_max`, `‖2θ - kα‖ <= e^{-ε₀|k|}` and
/// `‖2θ - kα‖` minimal among all `|j| <= |k|`, ordered by `|k|` then `k`.
pub fn epsilon_resonances(theta: f64, alpha: f64, eps0: f64, k_max: i64) -> Vec<i64> {
    assert!(eps0 > 0.0, "eps0 must be positive");
    let dist = |k: i64| torus_norm(2.0 * theta - k as f64 * alpha, 1);
    let mut out = Vec::new();
    let mut best = f64::INFINITY;
    for r in 0..=k_max {
        let cands: Vec<i64> = if r == 0 { vec![0] } else { vec![-r, r] };
        let here = cands.iter().map(|&k| dist(k)).fold(f64::INFINITY, f64::min);
        best = best.min(here);
        for k in cands {
            let d = dist(k);
            if d <= best && d <= (-eps0 * r as f64).exp() {
                out.push(k);
            }
        }
    }
    out
}

/// `‖2θ - kα‖^{-1}` for a resonance `k`.
pub fn resonance_scale(theta: f64, alpha: f64, k: i64) -> f64 {
    1.0 / torus_norm(2.0 * theta - k as f64 * alpha, 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_potential_is_diagonal() {
        let s = dual_section(&TrigPoly::constant(0.0), 0.3, 0.1, 5);
        assert_eq!(s.bandwidth(), 0);
        for n in -5..=5i64 {
            let d = 2.0 * (2.0 * PI * (0.1 + n as f64 * 0.3)).cos();
            assert!((s.entry(n, n).re - d).abs() < 1e-15);
        }
    }

    #[test]
    fn amo_dual_is_tridiagonal_with_lambda() {
        let s = dual_section(&TrigPoly::cosine(0.7), 0.618, 0.2, 10);
        assert_eq!(s.bandwidth(), 1);
        assert_eq!(s.entry(3, 4), Complex64::new(0.7, 0.0));
        assert_eq!(s.entry(4, 3), Complex64::new(0.7, 0.0));
        assert_eq!(s.entry(4, 6), Complex64::new(0.0, 0.0));
        assert!(s.is_hermitian(0.0));
    }

    #[test]
    fn complex_coefficients_stay_hermitian() {
        let v = TrigPoly::new(vec![
            Complex64::new(0.1, -0.2),
            Complex64::new(0.3, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.3, 0.0),
            Complex64::new(0.1, 0.2),
        ]);
        let s = dual_section(&v, 0.618, 0.2, 12);
        assert!(s.is_hermitian(1e-14));
    }

    #[test]
    fn resonances_basic() {
        let a = 0.618_033_988_749_894_8;
        assert!(epsilon_resonances(a / 2.0, a, 0.1, 20).contains(&1));
        assert_eq!(epsilon_resonances(0.0, a, 0.1, 20)[0], 0);
    }

    #[test]
    fn resonances_monotone_in_eps() {
        let a = 0.414_213_562_373_095;
        let small = epsilon_resonances(0.1234, a, 0.05, 200);
        let big = epsilon_resonances(0.1234, a, 0.5, 200);
        assert!(big.iter().all(|k| small.contains(k)));
    }
}
