use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::linalg::Mat2;

/// A point of `T¹ × RP¹`: `theta` in `[0, 1)` and the direction angle
/// `2π·phi` with `phi` in `(-1/4, 1/4]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjPoint {
    pub theta: f64,
    pub phi: f64,
}

impl ProjPoint {
    pub fn new(theta: f64, phi: f64) -> Self {
        ProjPoint { theta: theta.rem_euclid(1.0), phi: reduce_proj(phi) }
    }

    /// Unit vector of the direction.
    pub fn direction(&self) -> [f64; 2] {
        let (s, c) = (2.0 * PI * self.phi).sin_cos();
        [c, s]
    }
}

/// Representative of `phi` modulo 1/2 in `(-1/4, 1/4]`.
pub fn reduce_proj(phi: f64) -> f64 {
    let y = phi.rem_euclid(0.5);
    if y > 0.25 {
        y - 0.5
    } else {
        y
    }
}

/// Distance on the circle `R/Z`.
pub fn circle_dist(x: f64, y: f64) -> f64 {
    let d = (x - y).abs().rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Distance on `RP¹ ≅ R/(Z/2)`.
pub fn rp1_dist(x: f64, y: f64) -> f64 {
    let d = (x - y).abs().rem_euclid(0.5);
    d.min(0.5 - d)
}

/// `max(circle distance, projective distance)`.
pub fn proj_dist(p: &ProjPoint, q: &ProjPoint) -> f64 {
    circle_dist(p.theta, q.theta).max(rp1_dist(p.phi, q.phi))
}

fn angle_of(v: [f64; 2]) -> f64 {
    reduce_proj(v[1].atan2(v[0]) / (2.0 * PI))
}

/// One step of the skew product `(θ, φ) ↦ (θ + α, A·φ)`.
pub fn proj_step(a: &Mat2, p: ProjPoint, alpha: f64) -> ProjPoint {
    ProjPoint { theta: (p.theta + alpha).rem_euclid(1.0), phi: angle_of(a.apply(p.direction())) }
}

/// Closed form for `n` steps of `[[1, c], [0, 1]]` acting on the angle `phi`.
pub fn parabolic_orbit(c: f64, phi: f64, n: i64) -> f64 {
    let phi = reduce_proj(phi);
    if n == 0 || phi == 0.0 {
        return phi;
    }
    let hat = 2.0 * PI * phi;
    let cot = if phi == 0.25 { 0.0 } else { 1.0 / hat.tan() };
    let t = cot + n as f64 * c;
    if t == 0.0 {
        return 0.25;
    }
    reduce_proj((1.0 / t).atan() / (2.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_shifts_angle() {
        let p = ProjPoint::new(0.1, 0.2);
        let q = proj_step(&Mat2::rotation(0.13), p, 0.3);
        assert!(rp1_dist(q.phi, 0.33) < 1e-14);
        assert!((q.theta - 0.4).abs() < 1e-15);
    }

    #[test]
    fn identity_keeps_angle() {
        let p = ProjPoint::new(0.5, -0.17);
        assert!((proj_step(&Mat2::identity(), p, 0.0).phi + 0.17).abs() < 1e-15);
    }

    #[test]
    fn parabolic_closed_form_examples() {
        assert_eq!(parabolic_orbit(1.0, 0.0, 7), 0.0);
        assert_eq!(parabolic_orbit(2.0, 0.11, 0), 0.11);
        let expect = (0.5f64).atan() / (2.0 * PI);
        assert!((parabolic_orbit(1.0, 0.125, 1) - expect).abs() < 1e-15);
        assert!((expect - 0.073_791_8).abs() < 1e-7);
    }

    #[test]
    fn reduction_range() {
        for x in [-3.3, -0.25, 0.25, 0.26, 0.74, 1.0] {
            let r = reduce_proj(x);
            assert!(r > -0.25 && r <= 0.25, "{x} -> {r}");
            assert!(rp1_dist(r, x) < 1e-15);
        }
    }
}
