use num_complex::Complex64;

use super::{DualSection, DualityError};
use crate::trig::TrigPoly;

type C = Complex64;

/// Number of eigenvalues of the section strictly below `x`, from the
/// inertia of an unpivoted banded `LDLᴴ` factorization of `H - x`.
pub fn count_below(s: &DualSection, x: f64) -> usize {
    let n = s.size();
    let b = s.bandwidth();
    let w = 2 * b + 1;
    let mut a = vec![C::new(0.0, 0.0); n * w];
    for i in 0..n {
        for j in i.saturating_sub(b)..=(i + b).min(n - 1) {
            a[i * w + j + b - i] = s.at(i, j);
        }
        a[i * w + b] -= x;
    }
    let tiny = f64::EPSILON * s.inf_norm().max(1.0);
    let mut neg = 0;
    for k in 0..n {
        let mut d = a[k * w + b].re;
        if d.abs() < tiny {
            d = -tiny;
        }
        if d < 0.0 {
            neg += 1;
        }
        let end = (k + b).min(n - 1);
        for i in (k + 1)..=end {
            let l = a[i * w + k + b - i] / d;
            if l == C::new(0.0, 0.0) {
                continue;
            }
            for j in (k + 1)..=end {
                let akj = a[k * w + j + b - k];
                a[i * w + j + b - i] -= l * akj;
            }
        }
    }
    neg
}

/// The `index`-th eigenvalue (ascending, from zero) by bisection.
pub fn eigenvalue_by_index(s: &DualSection, index: usize) -> f64 {
    let (mut lo, mut hi) = s.gershgorin();
    lo -= 1e-12;
    hi += 1e-12;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(s, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone)]
struct Row {
    start: usize,
    vals: Vec<C>,
}

impl Row {
    fn get(&self, c: usize) -> C {
        if c < self.start || c >= self.start + self.vals.len() {
            C::new(0.0, 0.0)
        } else {
            self.vals[c - self.start]
        }
    }

    fn set(&mut self, c: usize, v: C) {
        if c >= self.start + self.vals.len() {
            self.vals.resize(c - self.start + 1, C::new(0.0, 0.0));
        }
        self.vals[c - self.start] = v;
    }

    fn end(&self) -> usize {
        self.start + self.vals.len()
    }
}

/// Banded LU with partial pivoting of `H - shift`.
struct BandLu {
    rows: Vec<Row>,
    steps: Vec<(usize, Vec<C>)>,
}

impl BandLu {
    fn new(s: &DualSection, shift: f64) -> Self {
        let n = s.size();
        let b = s.bandwidth();
        let mut rows: Vec<Row> = (0..n)
            .map(|i| {
                let start = i.saturating_sub(b);
                let vals = (start..=(i + b).min(n - 1))
                    .map(|j| if i == j { s.at(i, j) - shift } else { s.at(i, j) })
                    .collect();
                Row { start, vals }
            })
            .collect();
        let tiny = f64::EPSILON * s.inf_norm().max(1.0);
        let mut steps = Vec::with_capacity(n);
        for k in 0..n {
            let last = (k + b).min(n - 1);
            let p = (k..=last).max_by(|&x, &y| rows[x].get(k).norm().total_cmp(&rows[y].get(k).norm())).unwrap();
            rows.swap(k, p);
            let mut piv = rows[k].get(k);
            if piv.norm() < tiny {
                piv = C::new(tiny, 0.0);
                rows[k].set(k, piv);
            }
            let pivot_row = rows[k].clone();
            let mut mult = Vec::with_capacity(last - k);
            for r in (k + 1)..=last {
                let f = rows[r].get(k) / piv;
                mult.push(f);
                if f != C::new(0.0, 0.0) {
                    for c in (k + 1)..pivot_row.end() {
                        let v = rows[r].get(c) - f * pivot_row.get(c);
                        rows[r].set(c, v);
                    }
                }
                rows[r].set(k, C::new(0.0, 0.0));
            }
            steps.push((p, mult));
        }
        BandLu { rows, steps }
    }

    fn solve(&self, rhs: &mut [C]) {
        for (k, (p, mult)) in self.steps.iter().enumerate() {
            rhs.swap(k, *p);
            let rk = rhs[k];
            for (i, f) in mult.iter().enumerate() {
                rhs[k + 1 + i] -= f * rk;
            }
        }
        let n = rhs.len();
        for k in (0..n).rev() {
            let row = &self.rows[k];
            let mut acc = rhs[k];
            for c in (k + 1)..row.end().min(n) {
                acc -= row.get(c) * rhs[c];
            }
            rhs[k] = acc / row.get(k);
        }
    }
}

/// Eigenvector of a dual section, indexed by sites `-K..=K`.
#[derive(Debug, Clone)]
pub struct DualEigenvector {
    pub energy: f64,
    pub u: Vec<C>,
    pub half_width: usize,
    pub theta: f64,
    pub alpha: f64,
    pub potential: TrigPoly,
    /// True when scaled so that `û_0 = 1`; otherwise unit `ℓ²` norm.
    pub normalized_at_origin: bool,
    /// `‖Ĥû - Eû‖ / ‖û‖`.
    pub residual: f64,
}

impl DualEigenvector {
    pub fn coeff(&self, k: i64) -> C {
        let kk = self.half_width as i64;
        if k.abs() > kk {
            C::new(0.0, 0.0)
        } else {
            self.u[(k + kk) as usize]
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn l2(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenpair whose eigenvalue is nearest `e0`.
pub fn eigenpair_near(s: &DualSection, e0: f64) -> Result<DualEigenvector, DualityError> {
    let n = s.size();
    let below = count_below(s, e0);
    let mut best: Option<f64> = None;
    for idx in [below.checked_sub(1), (below < n).then_some(below)].into_iter().flatten() {
        let lam = eigenvalue_by_index(s, idx);
        if best.is_none_or(|b| (lam - e0).abs() < (b - e0).abs()) {
            best = Some(lam);
        }
    }
    let lam = best.expect("section is non-empty");
    let scale = s.inf_norm().max(1.0);
    let lu = BandLu::new(s, lam);
    let mut x: Vec<C> = (0..n).map(|i| C::new(1.0 + 0.37 * (i as f64 * 0.91).sin(), 0.0)).collect();
    let tol = 1e-10;
    for iter in 0..30 {
        lu.solve(&mut x);
        let nx = l2(&x);
        if !nx.is_finite() || nx == 0.0 {
            break;
        }
        x.iter_mut().for_each(|z| *z /= nx);
        let hx = s.apply(&x);
        let rho: C = x.iter().zip(&hx).map(|(a, b)| a.conj() * b).sum();
        let res = l2(&hx.iter().zip(&x).map(|(h, u)| h - rho * u).collect::<Vec<_>>());
        if iter >= 1 && res <= tol * scale {
            return Ok(finish(s, x, rho.re, res));
        }
    }
    Err(DualityError::NoConvergence { energy: lam })
}

fn finish(s: &DualSection, mut x: Vec<C>, energy: f64, res: f64) -> DualEigenvector {
    let k = s.half_width;
    let peak = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let u0 = x[k];
    let at_origin = u0.norm() >= 1e-8 * peak;
    if at_origin {
        x.iter_mut().for_each(|z| *z /= u0);
    } else {
        let big = *x.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
        let phase = big / big.norm();
        x.iter_mut().for_each(|z| *z /= phase);
    }
    let residual = res;
    DualEigenvector {
        energy,
        u: x,
        half_width: k,
        theta: s.theta,
        alpha: s.alpha,
        potential: s.potential.clone(),
        normalized_at_origin: at_origin,
        residual,
    }
}
