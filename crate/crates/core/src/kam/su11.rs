use num_complex::Complex64;

use super::fourier::Fourier2;
use crate::linalg::CMat2;

/// The unitary basis change `M = (1+i)^{-1} [[1, -i], [1, i]]` taking
/// `sl(2,R)` to `su(1,1)`.
pub fn su11_matrix() -> CMat2 {
    let s = Complex64::new(1.0, 1.0).inv();
    let i = Complex64::new(0.0, 1.0);
    CMat2::new(s, -i * s, s, i * s)
}

pub fn to_su11(x: &CMat2) -> CMat2 {
    let m = su11_matrix();
    m * *x * m.inverse()
}

pub fn from_su11(x: &CMat2) -> CMat2 {
    let m = su11_matrix();
    m.inverse() * *x * m
}

/// Coefficient-wise `X ↦ M X M⁻¹` (forward) or `X ↦ M⁻¹ X M`.
pub fn su11_transform(f: &Fourier2, forward: bool) -> Fourier2 {
    if forward {
        f.map(|_, c| to_su11(&c))
    } else {
        f.map(|_, c| from_su11(&c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rotation_generator_becomes_diagonal() {
        let d = to_su11(&Mat2::j().to_complex());
        assert!((d - CMat2::new(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0))).max_abs() < 1e-15);
    }

    #[test]
    fn identity_fixed_and_unitary() {
        assert!((to_su11(&CMat2::identity()) - CMat2::identity()).max_abs() < 1e-15);
        let m = su11_matrix();
        let mh = CMat2::new(m.a.conj(), m.c.conj(), m.b.conj(), m.d.conj());
        assert!((m * mh - CMat2::identity()).max_abs() < 1e-15);
    }

    #[test]
    fn explicit_image_of_real_traceless() {
        let (x, y, z) = (0.3, -1.1, 0.7);
        let a = Mat2::new(x, y + z, y - z, -x).to_complex();
        let want = CMat2::new(c(0.0, z), c(x, -y), c(x, y), c(0.0, -z));
        assert!((to_su11(&a) - want).max_abs() < 1e-15);
    }

    #[test]
    fn round_trip() {
        let mut f = Fourier2::real_mode((2, 1), CMat2::new(c(0.1, 0.2), c(0.3, -0.1), c(0.0, 0.5), c(-0.1, -0.2)));
        f.insert((0, 0), Mat2::new(1.0, 2.0, 3.0, -1.0).to_complex());
        let back = su11_transform(&su11_transform(&f, true), false);
        for (k, v) in f.modes() {
            assert!((back.coeff(*k) - *v).max_abs() < 1e-14);
        }
    }
}
