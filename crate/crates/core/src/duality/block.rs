use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{DualEigenvector, DualityError};
use crate::cocycle::{CocycleFn, MatFn};
use crate::linalg::Mat2;
use crate::trig::TrigPoly;

type C = Complex64;

fn cis(t: f64) -> C {
    C::from_polar(1.0, t)
}

/// Finite Fourier series `Σ_{k=lo}^{lo+len-1} c_k e^{2πikx}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laurent {
    pub lo: i64,
    pub coeffs: Vec<C>,
}

impl Laurent {
    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, k: i64) -> C {
        if k < self.lo || k > self.hi() {
            C::new(0.0, 0.0)
        } else {
            self.coeffs[(k - self.lo) as usize]
        }
    }

    pub fn eval(&self, x: f64) -> C {
        let w = cis(2.0 * PI * x);
        let mut acc = C::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * w + c;
        }
        acc * cis(2.0 * PI * self.lo as f64 * x)
    }

    pub fn sup_norm(&self, grid: usize) -> f64 {
        (0..grid).map(|i| self.eval(i as f64 / grid as f64).norm()).fold(0.0, f64::max)
    }
}

/// `U^I(x) = (e^{2πiθ} u^I(x), u^I(x - α))` built from the eigenvector
/// restricted to `I = [lo, hi]`, together with the defect `h` in
/// `S(x) U^I(x) = e^{2πiθ} U^I(x + α) + e^{2πiθ} (h(x), 0)`.
#[derive(Debug, Clone)]
pub struct TruncatedBlock {
    pub theta: f64,
    pub alpha: f64,
    pub energy: f64,
    pub potential: TrigPoly,
    pub u: Laurent,
    pub h: Laurent,
    /// Sup of `|h|` on a 1024-point grid.
    pub h_sup: f64,
}

impl TruncatedBlock {
    pub fn eval(&self, x: f64) -> [C; 2] {
        [cis(2.0 * PI * self.theta) * self.u.eval(x), self.u.eval(x - self.alpha)]
    }

    /// Sup over the grid of the defect in the defining identity for `h`.
    pub fn identity_defect(&self, grid: usize) -> f64 {
        let e = cis(2.0 * PI * self.theta);
        (0..grid)
            .map(|i| {
                let x = i as f64 / grid as f64;
                let u = self.eval(x);
                let up = self.eval(x + self.alpha);
                let a = self.energy - self.potential.eval_re(x);
                let l0 = a * u[0] - u[1];
                let l1 = u[0];
                let r0 = e * up[0] + e * self.h.eval(x);
                let r1 = e * up[1];
                (l0 - r0).norm().max((l1 - r1).norm())
            })
            .fold(0.0, f64::max)
    }
}

/// Builds `U^I` and `h` for `I = [lo, hi]` from the coefficients of `ev`.
pub fn truncated_block(ev: &DualEigenvector, lo: i64, hi: i64) -> TruncatedBlock {
    let k = ev.half_width as i64;
    assert!(-k <= lo && lo <= hi && hi <= k, "window must lie inside the section");
    let u = Laurent { lo, coeffs: (lo..=hi).map(|j| ev.coeff(j)).collect() };
    let v = &ev.potential;
    let b = v.degree();
    let h_lo = lo - b;
    let coeffs = (h_lo..=hi + b)
        .map(|j| {
            let mut acc = C::new(0.0, 0.0);
            if (lo..=hi).contains(&j) {
                let diag = ev.energy - 2.0 * (2.0 * PI * (ev.theta + j as f64 * ev.alpha)).cos();
                acc += diag * u.coeff(j);
            }
            for l in -b..=b {
                acc -= u.coeff(j - l) * v.coeff(l);
            }
            acc
        })
        .collect();
    let h = Laurent { lo: h_lo, coeffs };
    let h_sup = h.sup_norm(1024);
    TruncatedBlock { theta: ev.theta, alpha: ev.alpha, energy: ev.energy, potential: v.clone(), u, h, h_sup }
}

/// The window `[-⌊m/2⌋, m - ⌊m/2⌋]` with `m = ⌊K / c0⌋`.
pub fn default_window(half_width: usize, c0: f64) -> (i64, i64) {
    let m = (half_width as f64 / c0).floor() as i64;
    (-(m / 2), m - m / 2)
}

/// Real conjugacy `W = (S, σT) / |det B / 2|^{1/2}` with `S = Re U`, `T = Im U`.
#[derive(Debug, Clone)]
pub struct ConjugacyW {
    pub block: TruncatedBlock,
    pub sigma: i8,
    pub theta: f64,
    /// `inf |det B|` over the construction grid.
    pub det_floor: f64,
    /// `sup |Re det B|` over the construction grid.
    pub re_det_max: f64,
}

fn split(u: [C; 2]) -> ([f64; 2], [f64; 2]) {
    ([u[0].re, u[1].re], [u[0].im, u[1].im])
}

impl ConjugacyW {
    /// `det B(x)` for `B = (U, Ū)`.
    pub fn det_b(&self, x: f64) -> C {
        det_b(self.block.eval(x))
    }

    pub fn eval(&self, x: f64) -> Mat2 {
        let (s, t) = split(self.block.eval(x));
        let d = (s[0] * t[1] - s[1] * t[0]).abs().sqrt();
        let sg = self.sigma as f64;
        Mat2::new(s[0] / d, sg * t[0] / d, s[1] / d, sg * t[1] / d)
    }

    /// The target rotation `R_{-σθ}`.
    pub fn target(&self) -> Mat2 {
        Mat2::rotation(-(self.sigma as f64) * self.theta)
    }

    pub fn as_matfn(&self) -> MatFn {
        let w = self.clone();
        MatFn::new(move |x| w.eval(x))
    }
}

fn det_b(u: [C; 2]) -> C {
    u[0] * u[1].conj() - u[1] * u[0].conj()
}

pub fn build_w(ev: &DualEigenvector, lo: i64, hi: i64, grid: usize) -> Result<ConjugacyW, DualityError> {
    let block = truncated_block(ev, lo, hi);
    let mut floor = f64::INFINITY;
    let mut re_max: f64 = 0.0;
    let mut pos = 0usize;
    for i in 0..grid {
        let u = block.eval(i as f64 / grid as f64);
        let db = det_b(u);
        re_max = re_max.max(db.re.abs());
        floor = floor.min(db.norm());
        let (s, t) = split(u);
        if s[0] * t[1] - s[1] * t[0] > 0.0 {
            pos += 1;
        }
    }
    if floor <= 1e-8 || (pos != 0 && pos != grid) {
        return Err(DualityError::DegenerateDeterminant { floor });
    }
    let sigma = if pos == grid { 1 } else { -1 };
    Ok(ConjugacyW { block, sigma, theta: ev.theta, det_floor: floor, re_det_max: re_max })
}

/// `sup_x ‖W(x+α)^{-1} A(x) W(x) - R_{-σθ}‖` over `grid` points.
pub fn rotation_residual(c: &CocycleFn, w: &ConjugacyW, grid: usize) -> f64 {
    let target = w.target();
    (0..grid)
        .map(|i| {
            let x = i as f64 / grid as f64;
            let m = w.eval(x + c.alpha).inverse() * c.eval(x) * w.eval(x);
            (m - target).norm()
        })
        .fold(0.0, f64::max)
}

/// Least-squares fit of `ln |û_k|` against `|k|`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Fits over sites with `|k| >= from` whose coefficients sit above roundoff.
pub fn decay_fit(ev: &DualEigenvector, from: usize) -> DecayFit {
    let peak = ev.u.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let k = ev.half_width as i64;
    let pts: Vec<(f64, f64)> = (-k..=k)
        .filter(|j| j.unsigned_abs() as usize >= from)
        .map(|j| (j.abs() as f64, ev.coeff(j).norm()))
        .filter(|&(_, a)| a > 1e-13 * peak)
        .map(|(x, a)| (x, a.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return DecayFit { slope: f64::NAN, intercept: f64::NAN, points: pts.len() };
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { f64::NAN };
    DecayFit { slope, intercept: my - slope * mx, points: pts.len() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::{dual_section, eigenpair_near};

    const GOLDEN: f64 = 0.618_033_988_749_894_8;

    fn point_mass(theta: f64, energy: f64) -> DualEigenvector {
        let mut u = vec![C::new(0.0, 0.0); 5];
        u[2] = C::new(1.0, 0.0);
        DualEigenvector {
            energy,
            u,
            half_width: 2,
            theta,
            alpha: GOLDEN,
            potential: TrigPoly::cosine(0.5),
            normalized_at_origin: true,
            residual: 0.0,
        }
    }

    #[test]
    fn singleton_window_closed_form() {
        let ev = point_mass(0.13, 0.4);
        let b = truncated_block(&ev, 0, 0);
        let h0 = 0.4 - 2.0 * (2.0 * PI * 0.13).cos();
        assert!((b.h.coeff(0) - C::new(h0, 0.0)).norm() < 1e-12);
        assert!((b.h.coeff(1) + C::new(0.5, 0.0)).norm() < 1e-12);
        assert!((b.h.coeff(-1) + C::new(0.5, 0.0)).norm() < 1e-12);
        assert!(b.identity_defect(256) < 1e-12);
    }

    #[test]
    fn singleton_window_gives_constant_w() {
        let ev = point_mass(0.13, 0.4);
        let w = build_w(&ev, 0, 0, 512).unwrap();
        let w0 = w.eval(0.0);
        for x in [0.2, 0.5, 0.77] {
            assert!(w.eval(x).dist(&w0) < 1e-14);
            assert!((w.eval(x).det() - 1.0).abs() < 1e-12);
        }
        // S = (cos 2πθ, 1), T = (sin 2πθ, 0) so det(S, T) < 0 for θ in (0, 1/2).
        assert_eq!(w.sigma, -1);
    }

    #[test]
    fn identity_holds_for_arbitrary_coefficients() {
        let mut ev = point_mass(0.31, -0.7);
        ev.u = [0.3, -1.2, 1.0, 0.5, 0.25].iter().map(|&x| C::new(x, 0.1 * x)).collect();
        for (lo, hi) in [(-2, 2), (-1, 1), (0, 2)] {
            assert!(truncated_block(&ev, lo, hi).identity_defect(512) < 1e-12);
        }
    }

    #[test]
    fn complement_formula_for_eigenvector() {
        let v = TrigPoly::cosine(0.5);
        let s = dual_section(&v, GOLDEN, 0.21, 40);
        let ev = eigenpair_near(&s, 0.3).unwrap();
        let (lo, hi) = (-5, 6);
        let b = truncated_block(&ev, lo, hi);
        for k in -20..=20i64 {
            let mut alt = C::new(0.0, 0.0);
            if !(lo..=hi).contains(&k) {
                let diag = ev.energy - 2.0 * (2.0 * PI * (ev.theta + k as f64 * ev.alpha)).cos();
                alt -= diag * ev.coeff(k);
            }
            for l in -1..=1 {
                if !(lo..=hi).contains(&(k - l)) {
                    alt += ev.coeff(k - l) * v.coeff(l);
                }
            }
            let scale = ev.u.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!((alt - b.h.coeff(k)).norm() < 1e-9 * scale, "k = {k}");
        }
    }

    #[test]
    fn sigma_flips_with_conjugated_vector() {
        let v = TrigPoly::cosine(0.5);
        let s = dual_section(&v, GOLDEN, 0.21, 40);
        let ev = eigenpair_near(&s, 0.3).unwrap();
        let mut flipped = ev.clone();
        // u(x) -> conj(u(x)) negates T while keeping S; coefficients become conj(û_{-k}).
        flipped.u = (0..ev.u.len()).rev().map(|i| ev.u[i].conj()).collect();
        flipped.theta = -ev.theta;
        let (lo, hi) = (-4, 4);
        let a = build_w(&ev, lo, hi, 256).unwrap();
        let b = build_w(&flipped, lo, hi, 256).unwrap();
        assert_eq!(a.sigma, -b.sigma);
    }

    #[test]
    fn identity_conjugacy_for_rotation() {
        let ev = point_mass(0.13, 0.4);
        let w = build_w(&ev, 0, 0, 64).unwrap();
        // Conjugating R_{-σθ} by a constant W leaves a constant cocycle.
        let target = w.target();
        let w0 = w.eval(0.0);
        let c = CocycleFn::constant(GOLDEN, w0 * target * w0.inverse());
        assert!(rotation_residual(&c, &w, 64) < 1e-13);
    }
}
