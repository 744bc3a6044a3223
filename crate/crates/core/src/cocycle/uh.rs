use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::{CocycleError, CocycleFn};
use crate::linalg::Mat2;

/// Cone field certificate: at each sample `x_i` the cone of half-width
/// `aperture` (radians, in the projective line of angle `π`) about
/// `centers[i]` is mapped strictly inside the cone at `x_i + α`.
#[derive(Debug, Clone, Serialize)]
pub struct ConeWitness {
    pub aperture: f64,
    /// Cone axes as angles in `[0, π)`, one per sample point `i / samples`.
    pub centers: Vec<f64>,
    /// Smallest gap between an image cone and the boundary of its target.
    pub min_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub enum ConeVerdict {
    Hyperbolic(ConeWitness),
    /// Certified failure (constant cocycles with `|tr| <= 2`).
    NotHyperbolic(String),
}

fn arc_pos(x: f64, start: f64) -> f64 {
    (x - start).rem_euclid(PI)
}

fn map_angle(m: &Mat2, t: f64) -> f64 {
    let v = m.apply([t.cos(), t.sin()]);
    v[1].atan2(v[0]).rem_euclid(PI)
}

/// Pushes a direction forward `iters` times to approximate the unstable axis at `x`.
fn pushed_axis(c: &CocycleFn, x: f64, iters: usize) -> f64 {
    let start = x - iters as f64 * c.alpha;
    let mut v = [1.0, 0.3];
    for i in 0..iters {
        v = c.eval(start + i as f64 * c.alpha).apply(v);
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
        v = [v[0] / n, v[1] / n];
    }
    v[1].atan2(v[0]).rem_euclid(PI)
}

/// Margin by which the image of the arc `[lo, lo + w]` under `m` sits inside
/// the arc `[tlo, tlo + tw]` (negative when it does not).
fn containment_margin(m: &Mat2, lo: f64, w: f64, tlo: f64, tw: f64) -> f64 {
    let a = arc_pos(map_angle(m, lo), tlo);
    let b = arc_pos(map_angle(m, lo + w), tlo);
    if a > b {
        return -1.0;
    }
    a.min(tw - b)
}

fn check(c: &CocycleFn, xs: &[f64], axes: &[(f64, f64)], aperture: f64) -> f64 {
    xs.par_iter()
        .zip(axes.par_iter())
        .map(|(&x, &(here, there))| {
            let m = c.eval(x);
            let fwd = containment_margin(&m, here - aperture, 2.0 * aperture, there - aperture, 2.0 * aperture);
            // Complements under the inverse.
            let wc = PI - 2.0 * aperture;
            let bwd = containment_margin(&m.inverse(), there + aperture, wc, here + aperture, wc);
            fwd.min(bwd)
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Cone-field criterion for uniform hyperbolicity on `grid` cells.
///
/// Cone axes come from pushing a direction forward `iters` steps; both grid
/// nodes and cell midpoints are checked. The aperture starts at `π/4` and
/// shrinks geometrically.
pub fn uh_cone_test(c: &CocycleFn, grid: usize, iters: usize) -> Result<ConeVerdict, CocycleError> {
    assert!(grid >= 64, "grid must have at least 64 cells");
    if let Some(m) = c.as_constant() {
        if m.trace().abs() <= 2.0 {
            return Ok(ConeVerdict::NotHyperbolic(format!("constant matrix with trace {}", m.trace())));
        }
    }
    let xs: Vec<f64> = (0..2 * grid).map(|i| i as f64 / (2 * grid) as f64).collect();
    let axes: Vec<(f64, f64)> =
        xs.par_iter().map(|&x| (pushed_axis(c, x, iters), pushed_axis(c, x + c.alpha, iters))).collect();
    let mut aperture = PI / 4.0;
    while aperture > 1e-6 {
        let margin = check(c, &xs, &axes, aperture);
        if margin > 1e-12 {
            let centers = axes.iter().step_by(2).map(|a| a.0).collect();
            return Ok(ConeVerdict::Hyperbolic(ConeWitness { aperture, centers, min_margin: margin }));
        }
        aperture *= 0.7;
    }
    Err(CocycleError::Inconclusive { aperture })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::almost_mathieu;

    #[test]
    fn diagonal_is_hyperbolic_with_horizontal_axis() {
        let c = CocycleFn::constant(0.618, Mat2::diag(2.0, 0.5));
        match uh_cone_test(&c, 64, 50).unwrap() {
            ConeVerdict::Hyperbolic(w) => {
                assert!((w.aperture - PI / 4.0).abs() < 1e-15);
                assert!(w.centers.iter().all(|&t| t.min(PI - t) < 1e-12));
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn rotation_is_rejected() {
        let c = CocycleFn::rotation(0.618, 0.2);
        assert!(matches!(uh_cone_test(&c, 64, 50), Ok(ConeVerdict::NotHyperbolic(_))));
    }

    #[test]
    fn large_energy_schrodinger() {
        let c = almost_mathieu(0.618_033_988_749_894_8, 0.2, 10.0);
        assert!(matches!(uh_cone_test(&c, 128, 60).unwrap(), ConeVerdict::Hyperbolic(_)));
    }

    #[test]
    fn critical_amo_in_spectrum_is_not_certified() {
        let c = almost_mathieu(0.618_033_988_749_894_8, 1.0, 0.0);
        assert!(uh_cone_test(&c, 64, 60).is_err());
    }
}
