use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::fourier::{pairing, weighted_norm, Fourier2};
use super::KamError;
use crate::cocycle::{CocycleFn, CocycleMap};
use crate::linalg::Mat2;
use crate::trig::MatTrigPoly;

/// Constant part of a linear system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ConstantPart {
    /// `2πϱ J`.
    Elliptic { rho: f64 },
    /// `[[0, c], [0, 0]]`.
    Parabolic { c: f64 },
    /// Any traceless matrix, used between reduction stages.
    General { m: Mat2 },
}

impl ConstantPart {
    pub fn matrix(&self) -> Mat2 {
        match *self {
            ConstantPart::Elliptic { rho } => Mat2::j().scale(2.0 * PI * rho),
            ConstantPart::Parabolic { c } => Mat2::new(0.0, c, 0.0, 0.0),
            ConstantPart::General { m } => m,
        }
    }

    pub fn rho(&self) -> Option<f64> {
        match *self {
            ConstantPart::Elliptic { rho } => Some(rho),
            _ => None,
        }
    }

    pub fn is_parabolic(&self) -> bool {
        matches!(self, ConstantPart::Parabolic { .. })
    }
}

/// `ẋ = (A + F(θ)) x`, `θ̇ = ω = (1, α)` on `T² × R²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSystem {
    pub constant: ConstantPart,
    pub f: Fourier2,
    /// Analyticity radius used for weighted norms.
    pub h: f64,
    pub alpha: f64,
}

impl LinearSystem {
    pub fn new(constant: ConstantPart, f: Fourier2, h: f64, alpha: f64) -> Self {
        LinearSystem { constant, f, h, alpha }
    }

    pub fn omega(&self) -> [f64; 2] {
        [1.0, self.alpha]
    }

    pub fn a(&self) -> Mat2 {
        self.constant.matrix()
    }

    /// `A + F(θ)`.
    pub fn generator(&self, theta: [f64; 2]) -> Mat2 {
        self.a() + self.f.eval(theta)
    }

    /// `|F|_h` at the system's own radius.
    pub fn perturbation_norm(&self) -> f64 {
        weighted_norm(&self.f, self.h)
    }

    /// Rough bound on how fast the generator varies along the flow.
    fn rate(&self) -> f64 {
        let osc: f64 =
            self.f.modes().map(|(&k, c)| c.norm() * (1.0 + 2.0 * PI * pairing(k, self.alpha).abs())).sum();
        self.a().norm() + osc + 1.0
    }
}

/// Classical fourth-order Runge-Kutta for `Φ' = G(s) Φ`, `Φ(0) = I`, with
/// `n` equal steps up to time `t`.
pub fn rk4_fixed(gen: impl Fn(f64) -> Mat2, t: f64, n: usize) -> Mat2 {
    let dt = t / n as f64;
    let mut phi = Mat2::identity();
    for i in 0..n {
        let s = i as f64 * dt;
        let k1 = gen(s) * phi;
        let k2 = gen(s + dt / 2.0) * (phi + k1.scale(dt / 2.0));
        let k3 = gen(s + dt / 2.0) * (phi + k2.scale(dt / 2.0));
        let k4 = gen(s + dt) * (phi + k3.scale(dt));
        phi = phi + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dt / 6.0);
    }
    phi
}

const MAX_STEPS: usize = 1 << 22;

/// Integrates `Φ' = G(s) Φ` to time `t`, doubling the step count until two
/// successive solutions agree to `tol` relative to `‖Φ‖`.
pub fn integrate(gen: impl Fn(f64) -> Mat2, t: f64, rate: f64, tol: f64) -> Result<Mat2, KamError> {
    if t == 0.0 {
        return Ok(Mat2::identity());
    }
    let mut n = ((t.abs() * rate * 2.0).ceil() as usize).max(4);
    let mut prev = rk4_fixed(&gen, t, n);
    loop {
        n *= 2;
        if n > MAX_STEPS {
            return Err(KamError::StepUnderflow { t });
        }
        let next = rk4_fixed(&gen, t, n);
        let err = next.dist(&prev) / 15.0;
        if err <= tol * next.norm().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
}

/// Fundamental solution `Φ^t(θ₀)` of the system along `θ₀ + sω`.
pub fn ode_flow(sys: &LinearSystem, theta0: [f64; 2], t: f64, tol: f64) -> Result<Mat2, KamError> {
    let om = sys.omega();
    integrate(|s| sys.generator([theta0[0] + s * om[0], theta0[1] + s * om[1]]), t, sys.rate(), tol)
}

/// Time-one map `x ↦ Φ¹(0, x)` as a cocycle over the rotation by `α`.
pub fn poincare_map(sys: &LinearSystem, grid: usize) -> Result<CocycleFn, KamError> {
    poincare_map_with(sys, grid, 1e-8)
}

/// [`poincare_map`] with an explicit tolerance on the interpolation residual
/// at cell midpoints.
pub fn poincare_map_with(sys: &LinearSystem, grid: usize, tol: f64) -> Result<CocycleFn, KamError> {
    let m = if grid % 2 == 0 { grid + 1 } else { grid };
    let step = tol * 1e-3;
    let sample = |x: f64| ode_flow(sys, [0.0, x], 1.0, step);
    let samples: Vec<Mat2> = (0..m).map(|j| sample(j as f64 / m as f64)).collect::<Result<_, _>>()?;
    let poly = MatTrigPoly::fit(&samples);
    let mut worst: f64 = 0.0;
    for j in 0..m.min(16) {
        let x = (j as f64 + 0.5) / m as f64;
        worst = worst.max(poly.eval(x).dist(&sample(x)?));
    }
    if worst > tol {
        return Err(KamError::FitResidualTooLarge { residual: worst });
    }
    Ok(CocycleFn::new(sys.alpha, CocycleMap::Table(poly)))
}
