use std::f64::consts::PI;

use super::fourier::{pairing, Fourier2, Mode};
use super::su11::{from_su11, to_su11};
use super::system::{ConstantPart, LinearSystem};
use super::KamError;
use crate::linalg::{CMat2, Mat2};

/// `Q(θ) = exp(π⟨k*, θ⟩ J)`, a half-frequency rotation.
pub fn rotation_matrix(k_star: Mode, theta: [f64; 2]) -> Mat2 {
    let phase = PI * (k_star.0 as f64 * theta[0] + k_star.1 as f64 * theta[1]);
    let (s, c) = phase.sin_cos();
    Mat2::new(c, s, -s, c)
}

/// Conjugates an elliptic system by [`rotation_matrix`].
///
/// The rotation number drops by `⟨k*, ω⟩/2`. In `su(1,1)` coordinates the
/// diagonal of each mode stays put, the upper entry moves from `k` to
/// `k − k*` and the lower entry from `k` to `k + k*`.
pub fn rotation_conjugate(sys: &LinearSystem, k_star: Mode) -> Result<LinearSystem, KamError> {
    let rho = sys
        .constant
        .rho()
        .ok_or_else(|| KamError::InvalidParameter("rotation conjugation needs an elliptic constant".into()))?;
    let zero = CMat2::zero();
    let mut out = Fourier2::zero();
    for (&k, c) in sys.f.modes() {
        let x = to_su11(c);
        out.insert(k, CMat2 { b: zero.b, c: zero.c, ..x });
        out.insert((k.0 - k_star.0, k.1 - k_star.1), CMat2 { b: x.b, ..zero });
        out.insert((k.0 + k_star.0, k.1 + k_star.1), CMat2 { c: x.c, ..zero });
    }
    let mut f = out.map(|_, c| from_su11(&c));
    f.prune(0.0);
    let rho_new = rho - pairing(k_star, sys.alpha) / 2.0;
    Ok(LinearSystem::new(ConstantPart::Elliptic { rho: rho_new }, f, sys.h, sys.alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    const GOLD: f64 = 0.618_033_988_749_894_8;

    fn system() -> LinearSystem {
        let c = |re, im| Complex64::new(re, im);
        let f = Fourier2::real_mode((1, -2), CMat2::new(c(0.02, 0.01), c(0.03, -0.02), c(-0.01, 0.04), c(-0.02, -0.01)))
            .add(&Fourier2::real_mode((0, 1), CMat2::new(c(0.0, 0.0), c(0.01, 0.0), c(0.02, 0.01), c(0.0, 0.0))))
            .add(&Fourier2::constant(Mat2::new(0.01, 0.02, 0.005, -0.01)));
        LinearSystem::new(ConstantPart::Elliptic { rho: 0.31 }, f, 0.1, GOLD)
    }

    #[test]
    fn zero_shift_is_identity() {
        let s = system();
        let r = rotation_conjugate(&s, (0, 0)).unwrap();
        assert_eq!(r.constant, s.constant);
        for (k, c) in s.f.modes() {
            assert!((r.f.coeff(*k) - *c).max_abs() < 1e-16);
        }
    }

    #[test]
    fn rotation_number_update() {
        let r = rotation_conjugate(&system(), (1, -1)).unwrap();
        assert_eq!(r.constant.rho(), Some(0.31 - (1.0 - GOLD) / 2.0));
    }

    #[test]
    fn grid_identity() {
        let s = system();
        let ks = (2, -3);
        let r = rotation_conjugate(&s, ks).unwrap();
        assert!(r.f.reality_defect() < 1e-16);
        let drift = Mat2::j().scale(PI * pairing(ks, GOLD));
        let mut worst: f64 = 0.0;
        for i in 0..64 {
            for j in 0..64 {
                let th = [i as f64 / 64.0, j as f64 / 64.0];
                let q = rotation_matrix(ks, th);
                let lhs = q.sl_inverse() * s.generator(th) * q - drift;
                worst = worst.max(lhs.dist(&r.generator(th)));
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }
}
