use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{CMat2, Mat2};

/// Lattice frequency `(k₁, k₂)`.
pub type Mode = (i64, i64);

/// `|k| = |k₁| + |k₂|`.
pub fn mode_norm(k: Mode) -> i64 {
    k.0.abs() + k.1.abs()
}

/// `⟨k, ω⟩` for `ω = (1, α)`.
pub fn pairing(k: Mode, alpha: f64) -> f64 {
    k.0 as f64 + k.1 as f64 * alpha
}

/// Representative of `{k, -k}`: first nonzero coordinate positive.
pub fn is_canonical(k: Mode) -> bool {
    k.0 > 0 || (k.0 == 0 && k.1 > 0)
}

/// One coefficient in serialized form: `F̂(k) = re + i·im`, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeEntry {
    pub k1: i64,
    pub k2: i64,
    pub re: [[f64; 2]; 2],
    #[serde(default)]
    pub im: [[f64; 2]; 2],
}

impl From<Fourier2> for Vec<ModeEntry> {
    fn from(f: Fourier2) -> Self {
        f.coeffs
            .iter()
            .map(|(&(k1, k2), c)| ModeEntry {
                k1,
                k2,
                re: [[c.a.re, c.b.re], [c.c.re, c.d.re]],
                im: [[c.a.im, c.b.im], [c.c.im, c.d.im]],
            })
            .collect()
    }
}

impl From<Vec<ModeEntry>> for Fourier2 {
    fn from(v: Vec<ModeEntry>) -> Self {
        let mut f = Fourier2::zero();
        for e in v {
            let z = |i: usize, j: usize| Complex64::new(e.re[i][j], e.im[i][j]);
            f.insert((e.k1, e.k2), CMat2::new(z(0, 0), z(0, 1), z(1, 0), z(1, 1)));
        }
        f
    }
}

/// Sparse matrix-valued Fourier series on `T²`,
/// `F(θ) = Σ_k F̂(k) e^{2πi⟨k,θ⟩}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<ModeEntry>", from = "Vec<ModeEntry>")]
pub struct Fourier2 {
    pub coeffs: BTreeMap<Mode, CMat2>,
}

impl Fourier2 {
    pub fn zero() -> Self {
        Fourier2::default()
    }

    pub fn constant(m: Mat2) -> Self {
        let mut f = Fourier2::zero();
        f.insert((0, 0), m.to_complex());
        f
    }

    /// The real function `2 Re(c e^{2πi⟨k,θ⟩})`, i.e. modes `k` and `-k`.
    pub fn real_mode(k: Mode, c: CMat2) -> Self {
        let mut f = Fourier2::zero();
        if k == (0, 0) {
            f.insert(k, CMat2::from_real(c.a.re, c.b.re, c.c.re, c.d.re));
        } else {
            f.insert(k, c);
            f.insert((-k.0, -k.1), c.conj());
        }
        f
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Support radius `max |k|` (zero for the empty series).
    pub fn radius(&self) -> i64 {
        self.coeffs.keys().map(|&k| mode_norm(k)).max().unwrap_or(0)
    }

    pub fn coeff(&self, k: Mode) -> CMat2 {
        self.coeffs.get(&k).copied().unwrap_or_else(CMat2::zero)
    }

    /// Adds `c` to the coefficient at `k`.
    pub fn insert(&mut self, k: Mode, c: CMat2) {
        let e = self.coeffs.entry(k).or_insert_with(CMat2::zero);
        *e += c;
    }

    pub fn modes(&self) -> impl Iterator<Item = (&Mode, &CMat2)> {
        self.coeffs.iter()
    }

    pub fn add(&self, o: &Fourier2) -> Fourier2 {
        let mut out = self.clone();
        for (&k, &c) in &o.coeffs {
            out.insert(k, c);
        }
        out
    }

    pub fn sub(&self, o: &Fourier2) -> Fourier2 {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Fourier2 {
        self.map(|_, c| c.scale_re(s))
    }

    /// Coefficient-wise transform.
    pub fn map(&self, f: impl Fn(Mode, CMat2) -> CMat2) -> Fourier2 {
        Fourier2 { coeffs: self.coeffs.iter().map(|(&k, &c)| (k, f(k, c))).collect() }
    }

    /// Convolution product `(FG)(θ) = F(θ)G(θ)`, keeping `|k| <= k_max`.
    pub fn mul(&self, o: &Fourier2, k_max: i64) -> Fourier2 {
        let mut out = Fourier2::zero();
        for (&k, &a) in &self.coeffs {
            for (&l, &b) in &o.coeffs {
                let m = (k.0 + l.0, k.1 + l.1);
                if mode_norm(m) <= k_max {
                    out.insert(m, a * b);
                }
            }
        }
        out
    }

    /// `[F, G]` as a product of series.
    pub fn commutator(&self, o: &Fourier2, k_max: i64) -> Fourier2 {
        self.mul(o, k_max).sub(&o.mul(self, k_max))
    }

    /// `[X, F]` for a constant matrix `X`.
    pub fn bracket_const_left(&self, x: &CMat2) -> Fourier2 {
        self.map(|_, c| x.commutator(&c))
    }

    /// Directional derivative `∂_ω F`, multiplying mode `k` by `2πi⟨k,ω⟩`.
    pub fn derivative(&self, alpha: f64) -> Fourier2 {
        self.map(|k, c| c.scale(Complex64::new(0.0, 2.0 * PI * pairing(k, alpha))))
    }

    /// Drops coefficients with operator norm at most `tol`.
    pub fn prune(&mut self, tol: f64) {
        self.coeffs.retain(|_, c| c.norm() > tol);
    }

    /// Enforces `F̂(-k) = conj F̂(k)` by averaging each pair.
    pub fn symmetrize(&mut self) {
        let keys: Vec<Mode> = self.coeffs.keys().copied().collect();
        for k in keys {
            if k == (0, 0) {
                let c = self.coeffs[&k];
                self.coeffs.insert(k, CMat2::from_real(c.a.re, c.b.re, c.c.re, c.d.re));
            } else if is_canonical(k) {
                let nk = (-k.0, -k.1);
                let avg = (self.coeff(k) + self.coeff(nk).conj()).scale_re(0.5);
                self.coeffs.insert(k, avg);
                self.coeffs.insert(nk, avg.conj());
            } else if !self.coeffs.contains_key(&(-k.0, -k.1)) {
                let c = self.coeffs[&k];
                self.coeffs.insert(k, c.scale_re(0.5));
                self.coeffs.insert((-k.0, -k.1), c.conj().scale_re(0.5));
            }
        }
    }

    /// Largest violation of `F̂(-k) = conj F̂(k)`.
    pub fn reality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (&k, &c) in &self.coeffs {
            worst = worst.max((c - self.coeff((-k.0, -k.1)).conj()).max_abs());
        }
        worst
    }

    /// Largest `|tr F̂(k)|`.
    pub fn trace_defect(&self) -> f64 {
        self.coeffs.values().map(|c| c.trace().norm()).fold(0.0, f64::max)
    }

    pub fn eval_complex(&self, theta: [f64; 2]) -> CMat2 {
        let mut acc = CMat2::zero();
        for (&k, &c) in &self.coeffs {
            let ph = 2.0 * PI * (k.0 as f64 * theta[0] + k.1 as f64 * theta[1]);
            acc += c.scale(Complex64::from_polar(1.0, ph));
        }
        acc
    }

    /// Real part of the value at `θ`.
    pub fn eval(&self, theta: [f64; 2]) -> Mat2 {
        self.eval_complex(theta).re()
    }
}

/// `|F|_h = Σ_k ‖F̂(k)‖ e^{2π|k|h}` with the operator norm per coefficient.
pub fn weighted_norm(f: &Fourier2, h: f64) -> f64 {
    assert!(h >= 0.0, "analyticity radius must be non-negative");
    f.coeffs.iter().map(|(&k, c)| c.norm() * (2.0 * PI * mode_norm(k) as f64 * h).exp()).fold(0.0, |a, b| a + b)
}

/// Same weights with the Frobenius norm per coefficient.
pub fn weighted_frobenius(f: &Fourier2, h: f64) -> f64 {
    f.coeffs.iter().map(|(&k, c)| c.frobenius() * (2.0 * PI * mode_norm(k) as f64 * h).exp()).fold(0.0, |a, b| a + b)
}

/// Splits into `(T_K F, R_K F)`: modes with `|k| < K` and `|k| >= K`.
pub fn truncate(f: &Fourier2, k: f64) -> (Fourier2, Fourier2) {
    let mut low = Fourier2::zero();
    let mut high = Fourier2::zero();
    for (&m, &c) in &f.coeffs {
        if (mode_norm(m) as f64) < k {
            low.coeffs.insert(m, c);
        } else {
            high.coeffs.insert(m, c);
        }
    }
    (low, high)
}
