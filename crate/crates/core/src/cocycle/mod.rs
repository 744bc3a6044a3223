//! Quasiperiodic SL(2,R) cocycles `(α, A)`: transfer matrices, the induced
//! projective skew product, Lyapunov exponents and hyperbolicity tests.

mod lyapunov;
mod parse;
mod proj;
mod uh;

use std::fmt;
use std::sync::Arc;

pub use lyapunov::{lyapunov, lyapunov_with, LyapunovEstimate, LyapunovOptions};
pub use parse::parse_cocycle;
pub use proj::{circle_dist, parabolic_orbit, proj_dist, proj_step, reduce_proj, rp1_dist, ProjPoint};
pub use uh::{uh_cone_test, ConeVerdict, ConeWitness};

use thiserror::Error;

use crate::linalg::Mat2;
use crate::trig::{MatTrigPoly, TrigPoly};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CocycleError {
    #[error("conjugacy is singular: |det B| = {det:e} at x = {x}")]
    SingularConjugacy { det: f64, x: f64 },
    #[error("cone test inconclusive after shrinking the aperture to {aperture:e} rad")]
    Inconclusive { aperture: f64 },
    #[error("determinant drifts from one by {drift:e} at x = {x}")]
    NotUnimodular { drift: f64, x: f64 },
    #[error("cannot parse cocycle specification: {0}")]
    Parse(String),
}

/// A pointwise matrix map on the line, possibly defined only on a double cover.
#[derive(Clone)]
pub struct MatFn(pub Arc<dyn Fn(f64) -> Mat2 + Send + Sync>);

impl MatFn {
    pub fn new<F: Fn(f64) -> Mat2 + Send + Sync + 'static>(f: F) -> Self {
        MatFn(Arc::new(f))
    }

    pub fn eval(&self, x: f64) -> Mat2 {
        (self.0)(x)
    }
}

impl fmt::Debug for MatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("MatFn(..)")
    }
}

/// A conjugacy `B`, either as coefficients or as a callable.
#[derive(Debug, Clone)]
pub enum Conjugacy {
    Trig(MatTrigPoly),
    Func(MatFn),
}

impl Conjugacy {
    pub fn eval(&self, x: f64) -> Mat2 {
        match self {
            Conjugacy::Trig(p) => p.eval(x),
            Conjugacy::Func(f) => f.eval(x),
        }
    }
}

impl From<MatTrigPoly> for Conjugacy {
    fn from(p: MatTrigPoly) -> Self {
        Conjugacy::Trig(p)
    }
}

impl From<MatFn> for Conjugacy {
    fn from(f: MatFn) -> Self {
        Conjugacy::Func(f)
    }
}

/// The matrix part of a cocycle.
#[derive(Debug, Clone)]
pub enum CocycleMap {
    Constant(Mat2),
    /// Constant rotation `R_ρ`.
    Rotation { rho: f64 },
    /// `[[E - v(x), -1], [1, 0]]`.
    Schrodinger { v: TrigPoly, energy: f64 },
    Table(MatTrigPoly),
    /// `B(x + α)^{-1} A(x) B(x)`.
    Conjugated { base: Box<CocycleMap>, b: Conjugacy },
}

/// A quasiperiodic cocycle over the rotation by `alpha`.
#[derive(Debug, Clone)]
pub struct CocycleFn {
    pub alpha: f64,
    pub map: CocycleMap,
}

impl CocycleMap {
    fn eval(&self, x: f64, alpha: f64) -> Mat2 {
        match self {
            CocycleMap::Constant(m) => *m,
            CocycleMap::Rotation { rho } => Mat2::rotation(*rho),
            CocycleMap::Schrodinger { v, energy } => Mat2::new(energy - v.eval_re(x), -1.0, 1.0, 0.0),
            CocycleMap::Table(p) => p.eval(x),
            CocycleMap::Conjugated { base, b } => {
                let inner = base.eval(x, alpha);
                b.eval(x + alpha).inverse() * inner * b.eval(x)
            }
        }
    }
}

impl CocycleFn {
    pub fn new(alpha: f64, map: CocycleMap) -> Self {
        CocycleFn { alpha, map }
    }

    pub fn constant(alpha: f64, m: Mat2) -> Self {
        CocycleFn::new(alpha, CocycleMap::Constant(m))
    }

    pub fn rotation(alpha: f64, rho: f64) -> Self {
        CocycleFn::new(alpha, CocycleMap::Rotation { rho })
    }

    /// Constant `[[1, c], [0, 1]]`.
    pub fn parabolic(alpha: f64, c: f64) -> Self {
        CocycleFn::constant(alpha, Mat2::new(1.0, c, 0.0, 1.0))
    }

    /// `A(x)` for `x` on the circle.
    pub fn eval(&self, x: f64) -> Mat2 {
        self.map.eval(x, self.alpha)
    }

    /// A constant matrix when the map does not depend on `x`.
    pub fn as_constant(&self) -> Option<Mat2> {
        match &self.map {
            CocycleMap::Constant(m) => Some(*m),
            CocycleMap::Rotation { rho } => Some(Mat2::rotation(*rho)),
            _ => None,
        }
    }

    pub fn is_rotation(&self) -> bool {
        matches!(self.map, CocycleMap::Rotation { .. })
    }

    /// Checks `|det A(x) - 1| <= 1e-9` on a 1024-point grid.
    pub fn validate(&self) -> Result<(), CocycleError> {
        for i in 0..1024 {
            let x = i as f64 / 1024.0;
            let drift = (self.eval(x).det() - 1.0).abs();
            if drift > 1e-9 {
                return Err(CocycleError::NotUnimodular { drift, x });
            }
        }
        Ok(())
    }
}

/// Schrödinger cocycle with potential `v` at energy `energy`.
pub fn schrodinger(alpha: f64, v: TrigPoly, energy: f64) -> CocycleFn {
    assert!(v.is_real(1e-12), "potential must be real");
    CocycleFn::new(alpha, CocycleMap::Schrodinger { v, energy })
}

/// The almost Mathieu family `v(x) = 2λ cos 2πx`.
pub fn almost_mathieu(alpha: f64, lambda: f64, energy: f64) -> CocycleFn {
    schrodinger(alpha, TrigPoly::cosine(lambda), energy)
}

/// Rescales to unit determinant, skipping products whose determinant is
/// dominated by cancellation error.
fn unimodularize(m: Mat2) -> Mat2 {
    let det = m.det();
    let scale = (m.a * m.d).abs() + (m.b * m.c).abs();
    if det > 0.0 && scale < 1e6 {
        m.scale(1.0 / det.sqrt())
    } else {
        m
    }
}

/// `A_n(x)`: the forward product `A(x+(n-1)α)···A(x)` for `n >= 0` and the
/// inverse product `A(x+nα)^{-1}···A(x-α)^{-1}` for `n < 0`.
pub fn transfer(c: &CocycleFn, x: f64, n: i64) -> Mat2 {
    let mut m = Mat2::identity();
    if n >= 0 {
        for i in 0..n {
            m = c.eval(x + i as f64 * c.alpha) * m;
            if i % 32 == 31 {
                m = unimodularize(m);
            }
        }
    } else {
        for i in 1..=(-n) {
            m = c.eval(x - i as f64 * c.alpha).inverse() * m;
            if i % 32 == 0 {
                m = unimodularize(m);
            }
        }
    }
    unimodularize(m)
}

/// `B(x+α)^{-1} A(x) B(x)`; with `halve` the conjugacy lives on the double
/// cover and is evaluated at unreduced arguments.
pub fn conjugate(c: &CocycleFn, b: impl Into<Conjugacy>, halve: bool) -> Result<CocycleFn, CocycleError> {
    let b = b.into();
    let span = if halve { 2.0 } else { 1.0 };
    for i in 0..1024 {
        let x = span * i as f64 / 1024.0;
        let det = b.eval(x).det();
        if det.abs() < 1e-6 {
            return Err(CocycleError::SingularConjugacy { det, x });
        }
    }
    Ok(CocycleFn::new(c.alpha, CocycleMap::Conjugated { base: Box::new(c.map.clone()), b }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::AlphaSpec;

    fn golden() -> f64 {
        AlphaSpec::golden().approx()
    }

    #[test]
    fn transfer_zero_is_identity() {
        let c = almost_mathieu(golden(), 2.0, 0.3);
        assert_eq!(transfer(&c, 0.2, 0), Mat2::identity());
    }

    #[test]
    fn rotation_powers() {
        let c = CocycleFn::rotation(golden(), 0.1234);
        assert!(transfer(&c, 0.0, 5).dist(&Mat2::rotation(5.0 * 0.1234)) < 1e-14);
        assert!(transfer(&c, 0.0, -3).dist(&Mat2::rotation(-3.0 * 0.1234)) < 1e-14);
    }

    #[test]
    fn negative_transfer_inverts_positive() {
        let c = almost_mathieu(golden(), 0.7, 0.4);
        let x = 0.31;
        let n = 17;
        let fwd = transfer(&c, x - n as f64 * c.alpha, n);
        let back = transfer(&c, x, -n);
        assert!((fwd * back).dist(&Mat2::identity()) < 1e-10);
    }

    #[test]
    fn schrodinger_free_zero_energy_is_j_transpose() {
        let c = schrodinger(golden(), TrigPoly::constant(0.0), 0.0);
        assert_eq!(c.eval(0.4), Mat2::new(0.0, -1.0, 1.0, 0.0));
        c.validate().unwrap();
    }

    #[test]
    fn conjugate_by_identity_and_rotations() {
        let c = almost_mathieu(golden(), 1.3, -0.2);
        let id = conjugate(&c, MatTrigPoly::constant(Mat2::identity()), false).unwrap();
        for x in [0.0, 0.3, 0.77] {
            assert!(id.eval(x).dist(&c.eval(x)) < 1e-15);
        }
        let r = CocycleFn::rotation(golden(), 0.2);
        let rc = conjugate(&r, MatTrigPoly::constant(Mat2::rotation(0.05)), false).unwrap();
        assert!(rc.eval(0.4).dist(&Mat2::rotation(0.2)) < 1e-14);
    }

    #[test]
    fn singular_conjugacy_rejected() {
        let c = CocycleFn::rotation(golden(), 0.2);
        let b = MatFn::new(|x| Mat2::diag((2.0 * std::f64::consts::PI * x).cos(), 1.0));
        assert!(matches!(conjugate(&c, b, false), Err(CocycleError::SingularConjugacy { .. })));
    }

    #[test]
    fn half_frequency_conjugacy_is_periodic() {
        // B(x) = R_{x/2} changes sign over one period; the conjugate is still 1-periodic.
        let c = almost_mathieu(golden(), 0.5, 0.1);
        let b = MatFn::new(|x| Mat2::rotation(x / 2.0));
        let cc = conjugate(&c, b, true).unwrap();
        let x = 0.9;
        let lhs = cc.eval(x);
        let rhs = cc.eval(x + 1.0);
        assert!(lhs.dist(&rhs) < 1e-13);
        cc.validate().unwrap();
    }
}
