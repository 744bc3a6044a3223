//! Trigonometric polynomials on the circle, scalar and 2×2-matrix valued.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{CMat2, Mat2};

/// `Σ_{|k| <= n} c_k e^{2πikx}`, stored as `coeffs[k + n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    pub coeffs: Vec<Complex64>,
}

impl TrigPoly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(coeffs.len() % 2 == 1, "coefficient list must be centred");
        TrigPoly { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        TrigPoly::new(vec![c.into()])
    }

    /// `2λ cos 2πx`.
    pub fn cosine(lambda: f64) -> Self {
        TrigPoly::new(vec![lambda.into(), 0.0.into(), lambda.into()])
    }

    pub fn degree(&self) -> i64 {
        (self.coeffs.len() / 2) as i64
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        let n = self.degree();
        if k.abs() > n {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + n) as usize]
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let n = self.degree();
        let w = Complex64::from_polar(1.0, 2.0 * PI * x);
        // Horner in w, then shift by w^{-n}.
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * w + c;
        }
        acc * Complex64::from_polar(1.0, -2.0 * PI * n as f64 * x)
    }

    pub fn eval_re(&self, x: f64) -> f64 {
        let n = self.degree();
        let mut s = self.coeffs[n as usize].re;
        for k in 1..=n {
            let e = Complex64::from_polar(1.0, 2.0 * PI * k as f64 * x);
            s += (self.coeffs[(n + k) as usize] * e + self.coeffs[(n - k) as usize] * e.conj()).re;
        }
        s
    }

    /// True when `c_{-k} = conj(c_k)` up to `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        let n = self.degree();
        (0..=n).all(|k| (self.coeff(-k) - self.coeff(k).conj()).norm() <= tol)
    }
}

/// Matrix-valued trigonometric polynomial.
///
/// With `half` set the frequencies are `k/2`, which describes maps on the
/// double cover that change sign under `x -> x + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatTrigPoly {
    pub coeffs: Vec<CMat2>,
    pub half: bool,
}

impl MatTrigPoly {
    pub fn new(coeffs: Vec<CMat2>, half: bool) -> Self {
        assert!(coeffs.len() % 2 == 1, "coefficient list must be centred");
        MatTrigPoly { coeffs, half }
    }

    pub fn constant(m: Mat2) -> Self {
        MatTrigPoly::new(vec![m.to_complex()], false)
    }

    pub fn degree(&self) -> i64 {
        (self.coeffs.len() / 2) as i64
    }

    pub fn eval_complex(&self, x: f64) -> CMat2 {
        let n = self.degree();
        let base = if self.half { PI } else { 2.0 * PI };
        let mut acc = CMat2::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = i as i64 - n;
            acc += c.scale(Complex64::from_polar(1.0, base * k as f64 * x));
        }
        acc
    }

    pub fn eval(&self, x: f64) -> Mat2 {
        self.eval_complex(x).re()
    }

    /// Interpolates `m` samples `f(j/m)` by frequencies `|k| <= (m-1)/2`.
    pub fn fit(samples: &[Mat2]) -> Self {
        let m = samples.len();
        assert!(m % 2 == 1, "use an odd number of samples");
        let n = (m / 2) as i64;
        let coeffs = (-n..=n)
            .map(|k| {
                let mut acc = CMat2::zero();
                for (j, s) in samples.iter().enumerate() {
                    let w = Complex64::from_polar(1.0, -2.0 * PI * (k * j as i64) as f64 / m as f64);
                    acc += s.to_complex().scale(w);
                }
                acc.scale_re(1.0 / m as f64)
            })
            .collect();
        MatTrigPoly::new(coeffs, false)
    }
}
