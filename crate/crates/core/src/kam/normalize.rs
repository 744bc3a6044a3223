use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use super::system::ConstantPart;
use super::{KamError, RegimePolicy, C0};
use crate::linalg::Mat2;

/// Branch of the normalization taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormalCase {
    /// Elliptic with rotation bounded below: conjugate to `2πϱ̄ J`.
    Elliptic,
    /// Off-diagonal entry negligible: the constant becomes zero, which
    /// counts as elliptic with vanishing rotation.
    Vanishing,
    /// Parabolic with entry already inside the target band.
    ParabolicInBand,
    /// Parabolic entry shrunk by a diagonal rescaling.
    Rescaled,
}

impl NormalCase {
    pub fn tag(&self) -> &'static str {
        match self {
            NormalCase::Elliptic => "elliptic",
            NormalCase::Vanishing => "vanishing",
            NormalCase::ParabolicInBand => "parabolic-in-band",
            NormalCase::Rescaled => "rescaled",
        }
    }
}

/// `P⁻¹ Ã P = Ā + shift`; `shift` joins the perturbation.
#[derive(Debug, Clone, Serialize)]
pub struct NormalForm {
    pub p: Mat2,
    pub abar: ConstantPart,
    pub case: NormalCase,
    /// Set when a tiny rotation was folded into the parabolic track.
    pub folded: bool,
    pub shift: Mat2,
    /// Preconditions or postconditions that failed under
    /// [`RegimePolicy::Report`].
    pub violations: Vec<String>,
}

/// Normalizes `Ã` at scale `K` and width `h'` under [`RegimePolicy::Enforce`].
///
/// `ln_fnorm` is the natural log of the perturbation size, since the regime
/// puts it far below the smallest double.
pub fn normalize(atilde: Mat2, ln_fnorm: f64, cal_k: f64, h_prime: f64) -> Result<NormalForm, KamError> {
    normalize_with(atilde, ln_fnorm, cal_k, h_prime, RegimePolicy::Enforce)
}

/// Determinants below this multiple of `‖Ã‖²` are treated as zero.
const DET_SNAP: f64 = 64.0 * f64::EPSILON;

struct Gate {
    policy: RegimePolicy,
    violations: Vec<String>,
}

impl Gate {
    fn pre(&mut self, ok: bool, msg: impl FnOnce() -> String) -> Result<(), KamError> {
        if ok {
            return Ok(());
        }
        match self.policy {
            RegimePolicy::Enforce => Err(KamError::RegimeViolated(msg())),
            RegimePolicy::Report => {
                self.violations.push(msg());
                Ok(())
            }
        }
    }

    fn post(&mut self, ok: bool, msg: impl FnOnce() -> String) -> Result<(), KamError> {
        if ok {
            return Ok(());
        }
        match self.policy {
            RegimePolicy::Enforce => Err(KamError::Postcondition(msg())),
            RegimePolicy::Report => {
                self.violations.push(msg());
                Ok(())
            }
        }
    }
}

/// `P ∈ SL(2,R)` with `P⁻¹ a P = ϱ J` for elliptic traceless `a`, where
/// `ϱ = sign(a₁₂) √det a`.
pub fn elliptic_normalizer(a: &Mat2) -> (Mat2, f64) {
    let varrho = a.b.signum() * a.det().sqrt();
    let s = (-varrho / a.c).sqrt();
    let p = Mat2::new(s, -s * a.a / varrho, 0.0, -s * a.c / varrho);
    (p, varrho)
}

/// Rotation whose first column spans the `λ`-eigenline of traceless `a`
/// with `det a = −λ²`.
fn triangularizer(a: &Mat2, lambda: f64) -> Mat2 {
    let v1 = [a.b, lambda - a.a];
    let v2 = [lambda + a.a, a.c];
    let n1 = v1[0].hypot(v1[1]);
    let n2 = v2[0].hypot(v2[1]);
    let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
    if n == 0.0 {
        return Mat2::identity();
    }
    let (c, s) = (v[0] / n, v[1] / n);
    Mat2::new(c, -s, s, c)
}

/// [`normalize`] with an explicit regime policy.
pub fn normalize_with(
    atilde: Mat2,
    ln_fnorm: f64,
    cal_k: f64,
    h_prime: f64,
    policy: RegimePolicy,
) -> Result<NormalForm, KamError> {
    let mut gate = Gate { policy, violations: Vec::new() };
    let kh = cal_k * h_prime;
    let kh2 = kh * h_prime;
    let kh4 = kh2 * h_prime * h_prime;
    let norm_a = atilde.norm();
    if atilde.trace().abs() > 1e-12 * norm_a.max(1.0) {
        return Err(KamError::InvalidParameter(format!("constant has trace {}", atilde.trace())));
    }
    let half = atilde.trace() / 2.0;
    let a = Mat2::new(atilde.a - half, atilde.b, atilde.c, atilde.d - half);
    gate.pre(kh4 > 4.0, || format!("K h'^4 = {kh4} must exceed 4"))?;
    gate.pre(norm_a.ln() <= kh4 / 4.0, || format!("ln ‖Ã‖ = {} above K h'^4 / 4 = {}", norm_a.ln(), kh4 / 4.0))?;
    gate.pre(ln_fnorm <= -kh, || format!("ln ‖F‖ = {ln_fnorm} above -K h' = {}", -kh))?;

    let det = a.det();
    let snapped = det.abs() <= DET_SNAP * norm_a * norm_a;
    let mut base = a;
    let mut pre_shift = Mat2::zero();
    let mut folded = false;
    if !snapped && det > 0.0 {
        let varrho = a.b.signum() * det.sqrt();
        if varrho.abs().ln() >= -kh2 {
            let (p, varrho) = elliptic_normalizer(&a);
            let abar = ConstantPart::Elliptic { rho: varrho / (2.0 * PI) };
            let pn = p.norm();
            gate.post(pn <= 2.0 * (norm_a / varrho.abs()).sqrt() * (1.0 + 1e-12), || {
                format!("‖P‖ = {pn} above 2 (‖A‖/|ϱ|)^(1/2)")
            })?;
            gate.post(pn.ln() < LN_2 + kh2, || format!("‖P‖ = {pn} above 2 e^(K h'^2)"))?;
            let shift = p.sl_inverse() * a * p - abar.matrix();
            return Ok(NormalForm {
                p,
                abar,
                case: NormalCase::Elliptic,
                folded,
                shift,
                violations: gate.violations,
            });
        }
        // Tiny rotation: move the determinant into the perturbation.
        let v2 = varrho * varrho;
        let fold = if a.b.abs() >= a.c.abs() { Mat2::new(0.0, 0.0, v2 / a.b, 0.0) } else { Mat2::new(0.0, v2 / a.c, 0.0, 0.0) };
        base = a + fold;
        pre_shift = -fold;
        folded = true;
    }

    let lambda = if snapped || folded { 0.0 } else { (-det).sqrt() };
    if lambda > 0.0 {
        let ln_threshold = (ln_fnorm + norm_a.ln()) / 3.0;
        if lambda.ln() >= ln_threshold {
            return Err(KamError::NotNUH { lambda, ln_threshold });
        }
    }
    let r = triangularizer(&base, lambda);
    let tri = r.sl_inverse() * base * r;
    let c_bar = tri.b;
    let ln_c = c_bar.abs().ln();
    let low = -(C0 / 3.0) * kh2;
    let high = -0.75 * kh4;
    let (p, abar, case) = if c_bar == 0.0 || ln_c <= low {
        (r, ConstantPart::Elliptic { rho: 0.0 }, NormalCase::Vanishing)
    } else if ln_c <= high {
        (r, ConstantPart::Parabolic { c: c_bar }, NormalCase::ParabolicInBand)
    } else {
        let e = (kh4 / 2.0).exp();
        (r * Mat2::diag(e, 1.0 / e), ConstantPart::Parabolic { c: c_bar * (-kh4).exp() }, NormalCase::Rescaled)
    };
    // What leaves the constant: the eigenvalue diagonal, the dropped entry
    // in the vanishing case, the folded determinant and rounding residue.
    let pinv = p.sl_inverse();
    let shift = pinv * base * p - abar.matrix() + pinv * pre_shift * p;

    let pn = p.norm();
    match case {
        NormalCase::Rescaled => {
            gate.post(pn.ln() <= LN_2 + kh4 / 2.0 + 1e-12, || format!("‖P‖ = {pn} above 2 e^(K h'^4 / 2)"))?;
        }
        _ => gate.post(pn <= 2.0, || format!("‖P‖ = {pn} above 2"))?,
    }
    if let (NormalCase::ParabolicInBand | NormalCase::Rescaled, ConstantPart::Parabolic { c }) = (case, abar) {
        let lc = c.abs().ln();
        gate.post(lc >= low, || format!("ln |c̄| = {lc} below -(c0/3) K h'^2 = {low}"))?;
        gate.post(lc <= 4f64.ln() + high, || format!("ln |c̄| = {lc} above ln 4 - (3/4) K h'^4"))?;
    }
    Ok(NormalForm { p, abar, case, folded, shift, violations: gate.violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    // K h'^4 = 10 with h' = 0.005.
    const HP: f64 = 0.005;
    const K: f64 = 10.0 / (HP * HP * HP * HP);

    fn ln_f() -> f64 {
        -K * HP - 1.0
    }

    fn check_identity(a: &Mat2, nf: &NormalForm) {
        let lhs = nf.p.sl_inverse() * *a * nf.p;
        let rhs = nf.abar.matrix() + nf.shift;
        assert!(lhs.dist(&rhs) <= 1e-12 * (1.0 + lhs.norm()), "{lhs:?} vs {rhs:?}");
    }

    #[test]
    fn already_normal_rotation() {
        let a = Mat2::j().scale(0.7);
        let nf = normalize(a, ln_f(), K, HP).unwrap();
        assert_eq!(nf.case, NormalCase::Elliptic);
        assert!(nf.p.dist(&Mat2::identity()) < 1e-15);
        assert!((nf.abar.rho().unwrap() * 2.0 * PI - 0.7).abs() < 1e-15);
    }

    #[test]
    fn closed_form_similarity() {
        let a = Mat2::new(0.0, 2.0, -0.5, 0.0);
        let nf = normalize(a, ln_f(), K, HP).unwrap();
        let j = nf.p.sl_inverse() * a * nf.p;
        assert!(j.dist(&Mat2::j()) < 1e-12);
        assert!(nf.p.norm() <= 2.0 * 2f64.sqrt());
        check_identity(&a, &nf);
    }

    #[test]
    fn parabolic_in_band_unchanged() {
        let a = Mat2::new(0.0, 1e-6, 0.0, 0.0);
        let nf = normalize(a, ln_f(), K, HP).unwrap();
        assert_eq!(nf.case.tag(), "parabolic-in-band");
        assert_eq!(nf.abar, ConstantPart::Parabolic { c: 1e-6 });
        assert!(nf.p.dist(&Mat2::identity()) < 1e-15);
        check_identity(&a, &nf);
    }

    #[test]
    fn tiny_and_large_parabolic_entries() {
        let nf = normalize(Mat2::new(0.0, 1e-14, 0.0, 0.0), ln_f(), K, HP).unwrap();
        assert_eq!(nf.case, NormalCase::Vanishing);
        let a = Mat2::new(0.0, -0.5, 0.0, 0.0);
        let nf = normalize(a, ln_f(), K, HP).unwrap();
        assert_eq!(nf.case, NormalCase::Rescaled);
        check_identity(&a, &nf);
    }

    #[test]
    fn rotated_nilpotent() {
        let r = Mat2::rotation(0.13);
        let a = r * Mat2::new(0.0, 0.3, 0.0, 0.0) * r.sl_inverse();
        let nf = normalize(a, ln_f(), K, HP).unwrap();
        check_identity(&a, &nf);
        assert!(nf.abar.is_parabolic());
    }

    #[test]
    fn hyperbolic_is_rejected() {
        let a = Mat2::diag(0.2, -0.2);
        assert!(matches!(normalize(a, ln_f(), K, HP), Err(KamError::NotNUH { .. })));
    }

    #[test]
    fn regime_gate() {
        let a = Mat2::j();
        assert!(matches!(normalize(a, -1.0, 10.0, 0.1), Err(KamError::RegimeViolated(_))));
        let nf = normalize_with(a, -1.0, 10.0, 0.1, RegimePolicy::Report).unwrap();
        assert!(!nf.violations.is_empty());
    }

    #[test]
    fn tiny_rotation_folds() {
        // Outside f64 reach in the stated regime, so use a small scale.
        let (k, hp) = (1.0e3, 0.01);
        let a = Mat2::new(0.0, 1.0, -1e-10, 0.0);
        let nf = normalize_with(a, -1e4, k, hp, RegimePolicy::Report).unwrap();
        assert!(nf.folded);
        check_identity(&a, &nf);
    }
}
