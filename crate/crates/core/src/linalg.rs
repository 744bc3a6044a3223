//! Fixed-size 2×2 real and complex matrices.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Real 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub const fn identity() -> Self {
        Mat2::new(1.0, 0.0, 0.0, 1.0)
    }

    pub const fn zero() -> Self {
        Mat2::new(0.0, 0.0, 0.0, 0.0)
    }

    /// `[[0, 1], [-1, 0]]`.
    pub const fn j() -> Self {
        Mat2::new(0.0, 1.0, -1.0, 0.0)
    }

    pub const fn diag(x: f64, y: f64) -> Self {
        Mat2::new(x, 0.0, 0.0, y)
    }

    /// Counter-clockwise rotation by the angle `2πg`.
    pub fn rotation(g: f64) -> Self {
        let (s, c) = (2.0 * PI * g).sin_cos();
        Mat2::new(c, -s, s, c)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.a, self.c, self.b, self.d)
    }

    pub fn scale(&self, s: f64) -> Self {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn inverse(&self) -> Self {
        let det = self.det();
        Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det)
    }

    /// Inverse assuming unit determinant.
    pub fn sl_inverse(&self) -> Self {
        Mat2::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn frobenius(&self) -> f64 {
        (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d).sqrt()
    }

    /// Largest singular value.
    pub fn norm(&self) -> f64 {
        let s = pow2_scale(self.max_abs());
        if s == 0.0 || !s.is_finite() {
            return s;
        }
        // Work at unit scale so the fourth powers below cannot overflow.
        let m = self.scale(1.0 / s);
        let f2 = m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d;
        let det = m.det();
        let disc = (f2 * f2 - 4.0 * det * det).max(0.0);
        s * ((f2 + disc.sqrt()) / 2.0).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    pub fn to_complex(&self) -> CMat2 {
        CMat2::new(self.a.into(), self.b.into(), self.c.into(), self.d.into())
    }

    pub fn expm(&self) -> Self {
        self.to_complex().expm().re()
    }

    /// Real logarithm of a unit-determinant matrix with trace above `-2`.
    ///
    /// Elliptic, parabolic and hyperbolic classes use the closed forms
    /// `log M = f(t)(M - (tr/2) I)`.
    pub fn sl_log(&self) -> Option<Self> {
        let half = self.trace() / 2.0;
        let n = Mat2::new(self.a - half, self.b, self.c, self.d - half);
        if half <= -1.0 {
            return None;
        }
        let f = if (half - 1.0).abs() < 1e-12 {
            // Near the identity: series of acosh(h)/sqrt(h^2 - 1) about h = 1.
            let e = half - 1.0;
            1.0 - e / 3.0 + 2.0 * e * e / 15.0
        } else if half < 1.0 {
            let theta = half.acos();
            theta / theta.sin()
        } else {
            let mu = half.acosh();
            mu / mu.sinh()
        };
        Some(n.scale(f))
    }

    /// Square root of a symmetric positive-definite matrix.
    pub fn sqrt_spd(&self) -> Self {
        let s = self.det().sqrt();
        let t = (self.trace() + 2.0 * s).sqrt();
        Mat2::new((self.a + s) / t, self.b / t, self.c / t, (self.d + s) / t)
    }

    pub fn dist(&self, other: &Mat2) -> f64 {
        (*self - *other).norm()
    }
}

/// The power of two nearest above `x`, so rescaling by it is exact.
fn pow2_scale(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    2f64.powi(x.log2().ceil() as i32)
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

/// Complex 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct CMat2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

fn cz() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl CMat2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        CMat2 { a, b, c, d }
    }

    pub fn zero() -> Self {
        CMat2::new(cz(), cz(), cz(), cz())
    }

    pub fn identity() -> Self {
        CMat2::new(1.0.into(), cz(), cz(), 1.0.into())
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        CMat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn re(&self) -> Mat2 {
        Mat2::new(self.a.re, self.b.re, self.c.re, self.d.re)
    }

    pub fn im(&self) -> Mat2 {
        Mat2::new(self.a.im, self.b.im, self.c.im, self.d.im)
    }

    pub fn conj(&self) -> Self {
        CMat2::new(self.a.conj(), self.b.conj(), self.c.conj(), self.d.conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        CMat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        CMat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    pub fn inverse(&self) -> Self {
        let det = self.det();
        CMat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det)
    }

    pub fn frobenius(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()).sqrt()
    }

    /// Largest singular value.
    pub fn norm(&self) -> f64 {
        let s = pow2_scale(self.max_abs());
        if s == 0.0 || !s.is_finite() {
            return s;
        }
        let m = self.scale_re(1.0 / s);
        let f2 = m.a.norm_sqr() + m.b.norm_sqr() + m.c.norm_sqr() + m.d.norm_sqr();
        let det = m.det().norm();
        let disc = (f2 * f2 - 4.0 * det * det).max(0.0);
        s * ((f2 + disc.sqrt()) / 2.0).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn commutator(&self, o: &CMat2) -> CMat2 {
        *self * *o - *o * *self
    }

    pub fn expm(&self) -> Self {
        let half = self.trace() / 2.0;
        let n = CMat2::new(self.a - half, self.b, self.c, self.d - half);
        // n^2 = s^2 I with s^2 = -det n.
        let s2 = -n.det();
        let s = s2.sqrt();
        let (ch, sh_over_s) = if s.norm() < 1e-4 {
            (
                Complex64::new(1.0, 0.0) + s2 / 2.0 + s2 * s2 / 24.0 + s2 * s2 * s2 / 720.0,
                Complex64::new(1.0, 0.0) + s2 / 6.0 + s2 * s2 / 120.0 + s2 * s2 * s2 / 5040.0,
            )
        } else {
            (s.cosh(), s.sinh() / s)
        };
        let e = half.exp();
        (CMat2::identity().scale(ch) + n.scale(sh_over_s)).scale(e)
    }
}

impl Add for CMat2 {
    type Output = CMat2;
    fn add(self, o: CMat2) -> CMat2 {
        CMat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl AddAssign for CMat2 {
    fn add_assign(&mut self, o: CMat2) {
        *self = *self + o;
    }
}

impl Sub for CMat2 {
    type Output = CMat2;
    fn sub(self, o: CMat2) -> CMat2 {
        CMat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Neg for CMat2 {
    type Output = CMat2;
    fn neg(self) -> CMat2 {
        self.scale_re(-1.0)
    }
}

impl Mul for CMat2 {
    type Output = CMat2;
    fn mul(self, o: CMat2) -> CMat2 {
        CMat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_of_diagonal_and_rotation() {
        assert!((Mat2::diag(3.0, -0.5).norm() - 3.0).abs() < 1e-15);
        assert!((Mat2::diag(1e120, 1e-120).norm() / 1e120 - 1.0).abs() < 1e-15);
        assert!((Mat2::rotation(0.3).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exp_of_rotation_generator() {
        let t = 0.7;
        let e = Mat2::j().scale(t).expm();
        let expect = Mat2::new(t.cos(), t.sin(), -t.sin(), t.cos());
        assert!(e.dist(&expect) < 1e-15);
    }

    #[test]
    fn exp_of_nilpotent() {
        let e = Mat2::new(0.0, 2.5, 0.0, 0.0).expm();
        assert!(e.dist(&Mat2::new(1.0, 2.5, 0.0, 1.0)) < 1e-15);
    }

    #[test]
    fn log_inverts_exp_in_all_classes() {
        for x in [
            Mat2::new(0.3, 1.1, -0.9, -0.3),
            Mat2::new(0.5, 0.2, 0.1, -0.5),
            Mat2::new(0.0, 0.7, 0.0, 0.0),
            Mat2::new(1e-7, 2e-7, -3e-7, -1e-7),
        ] {
            let m = x.expm();
            let l = m.sl_log().unwrap();
            assert!(l.dist(&x) < 1e-12, "{x:?} -> {l:?}");
        }
        assert!(Mat2::diag(-2.0, -0.5).sl_log().is_none());
    }

    #[test]
    fn spd_square_root() {
        let m = Mat2::new(5.0, 2.0, 2.0, 3.0);
        let r = m.sqrt_spd();
        assert!((r * r).dist(&m) < 1e-14);
        assert!((r.b - r.c).abs() < 1e-15);
    }
}
