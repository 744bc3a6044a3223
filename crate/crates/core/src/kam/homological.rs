use std::f64::consts::{PI, SQRT_2};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::fourier::{is_canonical, pairing, weighted_frobenius, weighted_norm, Fourier2, Mode};
use super::su11::{from_su11, to_su11};
use super::system::{ConstantPart, LinearSystem};
use super::KamError;
use crate::linalg::{CMat2, Mat2};

type C = Complex64;

/// Coordinates of a traceless matrix in the Frobenius-orthonormal basis
/// `{diag(1,-1)/√2, E₊, E₋}`.
pub fn sl2_coords(x: &CMat2) -> Vector3<C> {
    Vector3::new((x.a - x.d) / SQRT_2, x.b, x.c)
}

pub fn sl2_from_coords(v: &Vector3<C>) -> CMat2 {
    CMat2::new(v[0] / SQRT_2, v[1], v[2], -v[0] / SQRT_2)
}

/// Matrix of `ad_A` in [`sl2_coords`].
pub fn ad_matrix(a: &CMat2) -> Matrix3<C> {
    let one = C::new(1.0, 0.0);
    let zero = C::new(0.0, 0.0);
    let basis = [
        CMat2::new(one / SQRT_2, zero, zero, -one / SQRT_2),
        CMat2::new(zero, one, zero, zero),
        CMat2::new(zero, zero, one, zero),
    ];
    let mut m = Matrix3::zeros();
    for (j, e) in basis.iter().enumerate() {
        let col = sl2_coords(&a.commutator(e));
        m.set_column(j, &col);
    }
    m
}

/// `L_k = 2πi⟨k,ω⟩ − ad_A` in [`sl2_coords`].
pub fn mode_operator(a: &Mat2, k: Mode, alpha: f64) -> Matrix3<C> {
    let s = C::new(0.0, 2.0 * PI * pairing(k, alpha));
    Matrix3::identity() * s - ad_matrix(&a.to_complex())
}

/// Result of one homological solve.
#[derive(Debug, Clone, Serialize)]
pub struct HomologicalSolution {
    pub y: Fourier2,
    pub fre: Fourier2,
    pub eta: f64,
    /// Modes with at least one routed component, with the number routed.
    pub resonant: Vec<(Mode, usize)>,
    /// Largest coefficient-wise residual of `∂_ω Y − [A, Y] + (F − Fre)`.
    pub identity_residual: f64,
}

struct ModeSolve {
    y: CMat2,
    fre: CMat2,
    routed: usize,
}

/// Elliptic `A = 2πϱJ` is diagonal in `su(1,1)` coordinates.
fn solve_elliptic(rho: f64, k: Mode, alpha: f64, f: &CMat2, eta: f64) -> ModeSolve {
    let w = pairing(k, alpha);
    let diag = [
        C::new(0.0, 2.0 * PI * w),
        C::new(0.0, 2.0 * PI * (w - 2.0 * rho)),
        C::new(0.0, 2.0 * PI * (w + 2.0 * rho)),
    ];
    let g = sl2_coords(&to_su11(f));
    let mut y = Vector3::zeros();
    let mut fre = Vector3::zeros();
    let mut routed = 0;
    for i in 0..3 {
        if g[i] == C::new(0.0, 0.0) {
            continue;
        }
        if diag[i].norm() >= eta {
            y[i] = -g[i] / diag[i];
        } else {
            fre[i] = g[i];
            routed += 1;
        }
    }
    ModeSolve { y: from_su11(&sl2_from_coords(&y)), fre: from_su11(&sl2_from_coords(&fre)), routed }
}

/// Component-wise thresholded pseudo-inverse through the SVD of `L_k`.
fn solve_general(a: &Mat2, k: Mode, alpha: f64, f: &CMat2, eta: f64) -> ModeSolve {
    let l = mode_operator(a, k, alpha);
    let svd = l.svd(true, true);
    let u = svd.u.expect("left singular vectors");
    let vt = svd.v_t.expect("right singular vectors");
    let g = sl2_coords(f);
    let mut y = Vector3::zeros();
    let mut fre = Vector3::zeros();
    let mut routed = 0;
    for i in 0..3 {
        let ui = u.column(i);
        let beta: C = ui.iter().zip(g.iter()).map(|(a, b)| a.conj() * b).sum();
        if beta.norm() == 0.0 {
            continue;
        }
        let s = svd.singular_values[i];
        if s >= eta {
            let vi = vt.row(i).transpose().map(|z| z.conj());
            y -= vi * (beta / s);
        } else {
            fre += ui * beta;
            routed += 1;
        }
    }
    ModeSolve { y: sl2_from_coords(&y), fre: sl2_from_coords(&fre), routed }
}

fn realify(m: CMat2) -> CMat2 {
    CMat2::from_real(m.a.re, m.b.re, m.c.re, m.d.re)
}

/// Solves `∂_ω Y − [A, Y] = −(F − Fre)` mode by mode; components of `L_k`
/// with singular value below `η` are left in `Fre`.
pub fn homological_solve(sys: &LinearSystem, eta: f64) -> Result<HomologicalSolution, KamError> {
    homological_solve_with(sys, eta, true)
}

/// [`homological_solve`] with the smallness precondition `|F|_h <= η⁴`
/// optionally disabled.
pub fn homological_solve_with(
    sys: &LinearSystem,
    eta: f64,
    check_smallness: bool,
) -> Result<HomologicalSolution, KamError> {
    if !(eta > 0.0) {
        return Err(KamError::InvalidParameter(format!("threshold must be positive, got {eta}")));
    }
    let norm = weighted_norm(&sys.f, sys.h);
    if check_smallness && norm > eta.powi(4) {
        return Err(KamError::SmallnessViolated { norm, bound: eta.powi(4) });
    }
    let a = sys.a();
    let real = sys.f.reality_defect() <= 1e-13 * weighted_norm(&sys.f, 0.0);
    let todo: Vec<(Mode, CMat2)> =
        sys.f.modes().filter(|(k, _)| !real || **k == (0, 0) || is_canonical(**k)).map(|(k, c)| (*k, *c)).collect();
    let solved: Vec<(Mode, ModeSolve)> = todo
        .par_iter()
        .map(|&(k, c)| {
            let s = match sys.constant {
                ConstantPart::Elliptic { rho } => solve_elliptic(rho, k, sys.alpha, &c, eta),
                _ => solve_general(&a, k, sys.alpha, &c, eta),
            };
            (k, s)
        })
        .collect();
    let mut y = Fourier2::zero();
    let mut fre = Fourier2::zero();
    let mut resonant = Vec::new();
    for (k, mut s) in solved {
        if real && k == (0, 0) {
            s.y = realify(s.y);
            s.fre = realify(s.fre);
        }
        if s.routed > 0 {
            resonant.push((k, s.routed));
            fre.coeffs.insert(k, s.fre);
        }
        y.coeffs.insert(k, s.y);
        if real && k != (0, 0) {
            let nk = (-k.0, -k.1);
            y.coeffs.insert(nk, s.y.conj());
            if s.routed > 0 {
                resonant.push((nk, s.routed));
                fre.coeffs.insert(nk, s.fre.conj());
            }
        }
    }
    y.prune(0.0);
    resonant.sort();
    let identity_residual = identity_residual(&a, &sys.f, &y, &fre, sys.alpha);
    Ok(HomologicalSolution { y, fre, eta, resonant, identity_residual })
}

/// Largest coefficient of `∂_ω Y − [A, Y] + F − Fre`.
pub fn identity_residual(a: &Mat2, f: &Fourier2, y: &Fourier2, fre: &Fourier2, alpha: f64) -> f64 {
    let lhs = y.derivative(alpha).sub(&y.bracket_const_left(&a.to_complex())).add(f).sub(fre);
    lhs.modes().map(|(_, c)| c.max_abs()).fold(0.0, f64::max)
}

/// Options for [`eliminate`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EliminationOptions {
    /// Fourier truncation applied to products.
    pub k_max: i64,
    pub max_iterations: usize,
    /// Relative size of the non-resonant remainder at which to stop.
    pub rel_tol: f64,
}

impl Default for EliminationOptions {
    fn default() -> Self {
        EliminationOptions { k_max: 24, max_iterations: 12, rel_tol: 1e-16 }
    }
}

/// Outcome of [`eliminate`]: successive generators `Y_i` with conjugations
/// `x = e^{-Y_1} e^{-Y_2} ⋯ z`, and the resulting system.
#[derive(Debug, Clone, Serialize)]
pub struct Elimination {
    pub generators: Vec<Fourier2>,
    pub system: LinearSystem,
    /// The first solve, as reported for the input system.
    pub first: HomologicalSolution,
    /// Resonant part of the final perturbation.
    pub fre: Fourier2,
    /// `|F − Fre|_h` of the final perturbation.
    pub nonresonant: f64,
}

/// `e^{Y} (A + F) e^{-Y} − e^{Y} ∂_ω e^{-Y} − A`, the perturbation after the
/// conjugation `x = e^{-Y} z`, with products truncated at `k_max`.
pub fn conjugate_by_exp(a: &Mat2, f: &Fourier2, y: &Fourier2, alpha: f64, k_max: i64) -> Fourier2 {
    let scale = weighted_norm(f, 0.0) + weighted_norm(y, 0.0) * (1.0 + a.norm());
    let tiny = 1e-19 * scale;
    let mut out = f.clone();
    let mut term = f.add(&Fourier2::constant(*a));
    let mut dterm = y.derivative(alpha);
    out = out.add(&dterm);
    for n in 1..40 {
        term = y.commutator(&term, k_max).scale(1.0 / n as f64);
        dterm = y.commutator(&dterm, k_max).scale(1.0 / (n + 1) as f64);
        term.prune(tiny * 1e-3);
        dterm.prune(tiny * 1e-3);
        out = out.add(&term).add(&dterm);
        if weighted_norm(&term, 0.0) + weighted_norm(&dterm, 0.0) < tiny {
            break;
        }
    }
    out.prune(tiny * 1e-3);
    out
}

/// Iterates solve-and-conjugate until the non-resonant remainder is
/// negligible. The constant part is held fixed throughout.
pub fn eliminate(sys: &LinearSystem, eta: f64, opts: EliminationOptions) -> Result<Elimination, KamError> {
    let first = homological_solve_with(sys, eta, false)?;
    let a = sys.a();
    let f0 = weighted_norm(&sys.f, sys.h);
    let mut cur = sys.clone();
    let mut sol = first.clone();
    let mut generators = Vec::new();
    for _ in 0..opts.max_iterations {
        if weighted_frobenius(&sol.y, 0.0) <= opts.rel_tol * f0.max(f64::MIN_POSITIVE) || sol.y.is_zero() {
            break;
        }
        let mut next = conjugate_by_exp(&a, &cur.f, &sol.y, sys.alpha, opts.k_max);
        if sys.f.reality_defect() == 0.0 {
            next.symmetrize();
        }
        generators.push(sol.y.clone());
        cur.f = next;
        sol = homological_solve_with(&cur, eta, false)?;
    }
    let nonresonant = weighted_norm(&cur.f.sub(&sol.fre), sys.h);
    Ok(Elimination { generators, system: cur, first, fre: sol.fre, nonresonant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix3;

    const GOLD: f64 = 0.618_033_988_749_894_8;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn sample_coeff() -> CMat2 {
        CMat2::new(c(0.3, 0.1), c(-0.2, 0.4), c(0.5, -0.1), c(-0.3, -0.1)).scale_re(1e-6)
    }

    #[test]
    fn coordinates_are_isometric() {
        let x = sample_coeff();
        let v = sl2_coords(&x);
        assert!((v.norm() - x.frobenius()).abs() < 1e-20);
        assert!((sl2_from_coords(&v) - x).max_abs() < 1e-22);
    }

    #[test]
    fn nonresonant_single_mode_matches_direct_solve() {
        let sys = LinearSystem::new(ConstantPart::Elliptic { rho: 0.21 }, Fourier2::real_mode((1, 0), sample_coeff()), 0.1, GOLD);
        let sol = homological_solve(&sys, 0.06).unwrap();
        assert!(sol.fre.is_zero());
        let l = mode_operator(&sys.a(), (1, 0), GOLD);
        let direct = l.lu().solve(&(-sl2_coords(&sample_coeff()))).unwrap();
        assert!((sl2_coords(&sol.y.coeff((1, 0))) - direct).norm() < 1e-18);
        assert!(sol.identity_residual < 1e-18);
    }

    #[test]
    fn rotation_part_at_origin_is_resonant() {
        let sys = LinearSystem::new(ConstantPart::Elliptic { rho: 0.21 }, Fourier2::constant(Mat2::j().scale(1e-7)), 0.1, GOLD);
        let sol = homological_solve(&sys, 0.05).unwrap();
        assert!((sol.fre.coeff((0, 0)) - Mat2::j().scale(1e-7).to_complex()).max_abs() < 1e-22);
        assert!(sol.y.coeff((0, 0)).max_abs() < 1e-22);
    }

    #[test]
    fn parabolic_neumann_series_agrees() {
        let a = Mat2::new(0.0, 0.3, 0.0, 0.0);
        let k = (2, -1);
        let s = C::new(0.0, 2.0 * PI * pairing(k, GOLD));
        let n = ad_matrix(&a.to_complex());
        // L = s − N with N nilpotent of order three.
        let inv = (Matrix3::identity() + n / s + n * n / (s * s)) / s;
        let g = sl2_coords(&sample_coeff());
        let sys = LinearSystem::new(ConstantPart::Parabolic { c: 0.3 }, Fourier2::real_mode(k, sample_coeff()), 0.1, GOLD);
        let sol = homological_solve(&sys, 0.06).unwrap();
        assert!((sl2_coords(&sol.y.coeff(k)) + inv * g).norm() < 1e-12 * g.norm());
        assert!(sol.fre.is_zero());
    }

    #[test]
    fn elliptic_path_agrees_with_svd_path() {
        let rho = 0.137;
        let a = Mat2::j().scale(2.0 * PI * rho);
        for k in [(1, 0), (0, 1), (-3, 2), (0, 0)] {
            let e = solve_elliptic(rho, k, GOLD, &sample_coeff(), 0.02);
            let g = solve_general(&a, k, GOLD, &sample_coeff(), 0.02);
            assert_eq!(e.routed, g.routed);
            assert!((e.y - g.y).max_abs() < 1e-15);
            assert!((e.fre - g.fre).max_abs() < 1e-20);
        }
    }

    #[test]
    fn smallness_gate() {
        let sys = LinearSystem::new(ConstantPart::Elliptic { rho: 0.2 }, Fourier2::constant(Mat2::j()), 0.0, GOLD);
        assert!(matches!(homological_solve(&sys, 0.1), Err(KamError::SmallnessViolated { .. })));
        assert!(homological_solve_with(&sys, 0.1, false).is_ok());
    }

    #[test]
    fn elimination_leaves_only_resonant_terms() {
        let sys = LinearSystem::new(ConstantPart::Elliptic { rho: 0.21 }, Fourier2::real_mode((1, 0), sample_coeff()), 0.1, GOLD);
        let el = eliminate(&sys, 0.05, EliminationOptions::default()).unwrap();
        assert!(!el.generators.is_empty());
        assert!(el.nonresonant < 1e-20, "{}", el.nonresonant);
        // Second-order term at the origin along J.
        assert!(el.fre.modes().all(|(k, _)| *k == (0, 0)));
    }
}
