use std::cmp::Ordering;
use std::f64::consts::{LN_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::floquet::{conjugate_by_phase_map, floquet_reduce, on_line, FloquetReduction};
use super::fourier::{mode_norm, pairing, truncate, weighted_norm, Fourier2, Mode};
use super::homological::{conjugate_by_exp, eliminate, EliminationOptions};
use super::normalize::{normalize_with, NormalCase, NormalForm};
use super::resonance::resonance_partition;
use super::rotation::{rotation_conjugate, rotation_matrix};
use super::system::{ode_flow, ConstantPart, LinearSystem};
use super::{KamError, RegimePolicy, C0};
use crate::arithmetic::{cmp_pow, BridgeChain, ContinuedFraction};
use crate::linalg::{CMat2, Mat2};

/// Largest lattice radius scanned for resonances.
pub const RESONANCE_SCAN_CAP: i64 = 200_000;

/// Which reduction was applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Identity,
    /// Elliptic constant, bridge scale, no low resonance.
    EllipticBridgeNonresonant,
    /// Elliptic constant, bridge scale, one low resonance removed by rotation.
    EllipticBridgeResonant,
    EllipticLiouvilleNonresonant,
    EllipticLiouvilleResonant,
    ParabolicBridge,
    ParabolicLiouville,
}

/// The map `B` of one conjugation `x = B(θ) z`.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind")]
pub enum StepKind {
    /// `B = e^{−Y}`.
    ExpY { y: Fourier2 },
    /// `B = Q(θ)`, a half-frequency rotation.
    Rotation { k_star: Mode },
    /// `B = b(pθ₁ − qθ₂)`.
    Floquet { reduction: Box<FloquetReduction> },
    ConstantP { p: Mat2 },
}

impl StepKind {
    pub fn eval(&self, theta: [f64; 2]) -> Mat2 {
        match self {
            StepKind::ExpY { y } => (-y.eval(theta)).expm(),
            StepKind::Rotation { k_star } => rotation_matrix(*k_star, theta),
            StepKind::Floquet { reduction } => reduction.eval(theta),
            StepKind::ConstantP { p } => *p,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StepKind::ExpY { .. } => "exp",
            StepKind::Rotation { .. } => "rotation",
            StepKind::Floquet { .. } => "floquet",
            StepKind::ConstantP { .. } => "constant",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugationStep {
    pub kind: StepKind,
    pub branch: Branch,
    /// `sup ‖B‖ + sup ‖∂₁B‖ + sup ‖∂₂B‖` on a grid of the real torus.
    pub norm_c1: f64,
    /// `sup ‖B‖ ‖B⁻¹‖`.
    pub condition: f64,
}

/// `(C¹ norm, sup norm)` of a matrix map on a 16 × 16 grid.
fn c1_norm(b: impl Fn([f64; 2]) -> Mat2 + Sync) -> (f64, f64) {
    let d = 1e-5;
    let rows: Vec<(f64, f64, f64)> = (0..16)
        .into_par_iter()
        .map(|i| {
            let mut acc = (0.0f64, 0.0f64, 0.0f64);
            for j in 0..16 {
                let th = [(i as f64 + 0.5) / 16.0, (j as f64 + 0.5) / 16.0];
                let d1 = (b([th[0] + d, th[1]]) - b([th[0] - d, th[1]])).scale(0.5 / d);
                let d2 = (b([th[0], th[1] + d]) - b([th[0], th[1] - d])).scale(0.5 / d);
                acc.0 = acc.0.max(b(th).norm());
                acc.1 = acc.1.max(d1.norm());
                acc.2 = acc.2.max(d2.norm());
            }
            acc
        })
        .collect();
    let s = rows.iter().fold((0.0f64, 0.0f64, 0.0f64), |a, r| (a.0.max(r.0), a.1.max(r.1), a.2.max(r.2)));
    (s.0 + s.1 + s.2, s.0)
}

impl ConjugationStep {
    pub fn new(kind: StepKind, branch: Branch) -> Self {
        let (norm_c1, sup) = c1_norm(|th| kind.eval(th));
        ConjugationStep { kind, branch, norm_c1, condition: sup * sup }
    }

    pub fn eval(&self, theta: [f64; 2]) -> Mat2 {
        self.kind.eval(theta)
    }
}

/// `B₁(θ) B₂(θ) ⋯`, the composition of successive conjugations.
pub fn composite(steps: &[ConjugationStep], theta: [f64; 2]) -> Mat2 {
    steps.iter().fold(Mat2::identity(), |acc, s| acc * s.eval(theta))
}

/// A numerically checked inequality, in logarithmic form.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub ln_value: f64,
    pub ln_bound: f64,
    pub ok: bool,
}

impl BoundCheck {
    fn upper(name: impl Into<String>, value: f64, ln_bound: f64) -> Self {
        let ln_value = value.ln();
        BoundCheck { name: name.into(), ln_value, ln_bound, ok: ln_value <= ln_bound }
    }

    fn lower(name: impl Into<String>, value: f64, ln_bound: f64) -> Self {
        let ln_value = value.ln();
        BoundCheck { name: name.into(), ln_value, ln_bound, ok: ln_value >= ln_bound }
    }
}

/// Parameters of one iteration.
#[derive(Debug, Clone, Serialize)]
pub struct KamParams {
    pub cal_a: f64,
    /// Position in the bridge chain.
    pub iota: usize,
    /// Resonance threshold; defaults to `ε^{1/4}`.
    pub eta: Option<f64>,
    pub elimination: EliminationOptions,
    pub policy: RegimePolicy,
    pub verify_tol: f64,
    pub verify_phases: usize,
    pub verify_times: Vec<f64>,
    pub seed: u64,
    pub allow_projective: bool,
    pub floquet_tol: f64,
    /// Phase samples used to conjugate a perturbation by a Floquet map.
    pub phase_samples: usize,
}

impl Default for KamParams {
    fn default() -> Self {
        KamParams {
            cal_a: 3.0,
            iota: 1,
            eta: None,
            elimination: EliminationOptions::default(),
            policy: RegimePolicy::Enforce,
            verify_tol: 1e-6,
            verify_phases: 16,
            verify_times: vec![0.25, 0.5, 1.0],
            seed: 7,
            allow_projective: true,
            floquet_tol: 1e-9,
            phase_samples: 64,
        }
    }
}

/// Result of one reduction branch.
#[derive(Debug, Clone, Serialize)]
pub struct Stage {
    pub branch: Branch,
    #[serde(skip)]
    pub steps: Vec<ConjugationStep>,
    #[serde(skip)]
    pub system: LinearSystem,
    pub normal: Option<NormalForm>,
    pub k_star: Option<Mode>,
    /// `|F|_{h'}` on entry.
    pub eps: f64,
    pub eta: f64,
    pub norm_c1: f64,
    pub checks: Vec<BoundCheck>,
    pub violations: Vec<String>,
}

struct Regime<'a> {
    policy: RegimePolicy,
    violations: &'a mut Vec<String>,
}

impl Regime<'_> {
    fn require(&mut self, ok: bool, msg: impl FnOnce() -> String) -> Result<(), KamError> {
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
}

/// Hypotheses shared by the four branches at scale `q_n` and width `h'`.
fn branch_regime(
    eps: f64,
    q_n: f64,
    h_prime: f64,
    cal_a: f64,
    reg: &mut Regime<'_>,
) -> Result<(), KamError> {
    reg.require(h_prime < 1.0 / 160.0, || format!("h' = {h_prime} not below 1/160"))?;
    let root = q_n.powf(1.0 / (2.0 * cal_a));
    reg.require(2.0 * C0 * root * h_prime * h_prime >= cal_a.powi(4), || {
        format!("2 c0 q^(1/2A) h'^2 = {} below A^4", 2.0 * C0 * root * h_prime * h_prime)
    })?;
    reg.require(24.0 * (2.0 * q_n).ln() < root, || format!("24 ln(2q) = {} not below q^(1/2A) = {root}", 24.0 * (2.0 * q_n).ln()))?;
    let ln_cap = LN_2 - C0 * q_n.powf(1.0 / cal_a) * h_prime * h_prime;
    reg.require(eps.ln() <= ln_cap, || format!("ln |F|_h' = {} above {ln_cap}", eps.ln()))?;
    Ok(())
}

/// J-coefficient `z` of `xH + yS + zJ`.
fn j_part(c: &CMat2) -> num_complex::Complex64 {
    (c.b - c.c) / 2.0
}

struct Prepared {
    eps: f64,
    eta: f64,
    system: LinearSystem,
    fre: Fourier2,
    steps: Vec<ConjugationStep>,
}

fn prepare(sys: &LinearSystem, h_prime: f64, params: &KamParams, branch: Branch) -> Result<Prepared, KamError> {
    let mut s = sys.clone();
    s.h = h_prime;
    let eps = weighted_norm(&s.f, h_prime);
    let eta = params.eta.unwrap_or(eps.powf(0.25));
    if eps == 0.0 {
        return Ok(Prepared { eps, eta, system: s, fre: Fourier2::zero(), steps: Vec::new() });
    }
    let el = eliminate(&s, eta, params.elimination)?;
    let steps = el.generators.into_iter().map(|y| ConjugationStep::new(StepKind::ExpY { y }, branch)).collect();
    Ok(Prepared { eps, eta, system: el.system, fre: el.fre, steps })
}

/// Bounds for the outcome of a normalizing branch, in log form:
/// `(ln ‖B‖_{C¹} bound, ln ‖F̃‖ bound)` per outcome kind.
#[derive(Clone, Copy)]
enum Family {
    EllipticBridge,
    Liouville,
    ParabolicBridge,
}

fn outcome_checks(family: Family, nf: &NormalForm, k: f64, w: f64, b_c1: f64, f_out: f64) -> Vec<BoundCheck> {
    let (w2, w4) = (w * w, w.powi(4));
    let ln4 = 4f64.ln();
    let ln9 = 9f64.ln();
    let (b, f) = match (family, nf.case) {
        (Family::EllipticBridge, NormalCase::Elliptic) => (2.0 * k * w2, ln4 - 0.5 * k * w),
        (Family::EllipticBridge, NormalCase::Vanishing) => ((8.0 * PI * k).ln(), LN_2 - C0 / 3.0 * k * w2),
        (Family::EllipticBridge, _) => (k * w4, ln9 - 0.75 * k * w2),
        (Family::Liouville, NormalCase::Elliptic) => (2.0 * k * w2, ln4 - 0.5 * k * w),
        (Family::Liouville, NormalCase::Vanishing) => (k * w4, LN_2 - C0 / 3.0 * k * w2),
        (Family::Liouville, _) => (k * w4, ln9 - 0.75 * k * w2),
        (Family::ParabolicBridge, NormalCase::Elliptic) => (ln4 + k * w2, ln4 - 0.5 * k * w),
        (Family::ParabolicBridge, NormalCase::Vanishing) => (ln4, LN_2 - C0 / 3.0 * k * w2),
        (Family::ParabolicBridge, _) => (ln4 + 0.5 * k * w4, ln9 - 0.75 * k * w2),
    };
    let mut out = vec![BoundCheck::upper("conjugacy C1 norm", b_c1, b), BoundCheck::upper("perturbation after step", f_out, f)];
    if let ConstantPart::Parabolic { c } = nf.abar {
        out.push(BoundCheck::lower("parabolic entry lower band", c.abs(), -C0 / 3.0 * k * w2));
        out.push(BoundCheck::upper("parabolic entry upper band", c.abs(), ln4 - 0.75 * k * w4));
    }
    out
}

/// Moves the mean into the constant, normalizes it and conjugates the rest.
fn normalize_tail(
    sys: &LinearSystem,
    k: f64,
    w: f64,
    params: &KamParams,
    branch: Branch,
    violations: &mut Vec<String>,
) -> Result<(NormalForm, ConjugationStep, LinearSystem), KamError> {
    let mean = sys.f.coeff((0, 0)).re();
    let atilde = sys.a() + mean;
    let mut rest = sys.f.clone();
    rest.coeffs.remove(&(0, 0));
    let ln_f = weighted_norm(&rest, w).ln();
    let nf = normalize_with(atilde, ln_f, k, w, params.policy)?;
    violations.extend(nf.violations.iter().cloned());
    let p = nf.p;
    let pinv = p.sl_inverse().to_complex();
    let pc = p.to_complex();
    let mut f = rest.map(|_, c| pinv * c * pc);
    if nf.shift.max_abs() > 0.0 {
        f.insert((0, 0), nf.shift.to_complex());
    }
    let system = LinearSystem::new(nf.abar, f, w / 6.0, sys.alpha);
    let step = ConjugationStep::new(StepKind::ConstantP { p }, branch);
    Ok((nf, step, system))
}

/// Splits the low modes of `sys.f` into the part on the line `l(p, −q)`,
/// which joins the constant in a Floquet reduction, and the rest, which is
/// conjugated by the resulting phase map.
fn floquet_tail(
    sys: &LinearSystem,
    q_next: f64,
    line: (i64, i64),
    params: &KamParams,
    branch: Branch,
) -> Result<(ConjugationStep, LinearSystem, f64), KamError> {
    let (low, high) = truncate(&sys.f, q_next / 6.0);
    let mut g = Fourier2::constant(sys.a());
    let mut rest = high;
    for (&k, &c) in low.modes() {
        let one = Fourier2 { coeffs: [(k, c)].into_iter().collect() };
        if on_line(&one, line.0, line.1) {
            g.insert(k, c);
        } else {
            rest.insert(k, c);
        }
    }
    let off_line = weighted_norm(&truncate(&rest, q_next / 6.0).0, 0.0);
    let red = floquet_reduce(&g, line.0, line.1, sys.alpha, params.floquet_tol, params.allow_projective)?;
    let f = conjugate_by_phase_map(&rest, &red, params.phase_samples);
    let d = red.d;
    let system = LinearSystem::new(ConstantPart::General { m: d }, f, sys.h, sys.alpha);
    let step = ConjugationStep::new(StepKind::Floquet { reduction: Box::new(red) }, branch);
    Ok((step, system, off_line))
}

fn stage_c1(steps: &[ConjugationStep]) -> f64 {
    if steps.is_empty() {
        return 1.0;
    }
    c1_norm(|th| composite(steps, th)).0
}

fn identity_stage(sys: &LinearSystem, branch: Branch, h_out: f64) -> Stage {
    let mut system = sys.clone();
    system.h = h_out;
    Stage {
        branch,
        steps: Vec::new(),
        system,
        normal: None,
        k_star: None,
        eps: 0.0,
        eta: 0.0,
        norm_c1: 1.0,
        checks: Vec::new(),
        violations: Vec::new(),
    }
}

/// Resonant lattice points `k` with `|2ϱ − ⟨k,ω⟩| < η`, `|k| < bound`.
fn low_resonances(alpha: f64, rho: f64, eta: f64, bound: f64, violations: &mut Vec<String>) -> (Vec<Mode>, bool) {
    let mut radius = bound.ceil() as i64;
    if radius > RESONANCE_SCAN_CAP {
        violations.push(format!("resonance scan truncated at radius {RESONANCE_SCAN_CAP} (wanted {radius})"));
        radius = RESONANCE_SCAN_CAP;
    }
    let part = resonance_partition(alpha, rho, eta, radius);
    let all = part.lambda2_c_below(bound);
    let mut k21: Vec<Mode> = part.lambda21_c.iter().copied().filter(|&k| (mode_norm(k) as f64) < bound).collect();
    if k21.is_empty() {
        k21 = part.lambda22_c.iter().filter(|&&k| (mode_norm(k) as f64) < bound).map(|&(a, b)| (-a, -b)).collect();
    }
    (k21, !all.is_empty())
}

fn resonant_branch(
    el: Prepared,
    k_star: Mode,
    branch: Branch,
    violations: &mut Vec<String>,
) -> Result<(Prepared, LinearSystem), KamError> {
    let mut el = el;
    let rot = rotation_conjugate(&el.system, k_star)?;
    el.steps.push(ConjugationStep::new(StepKind::Rotation { k_star }, branch));
    let _ = violations;
    Ok((el, rot))
}

/// Elliptic constant at a bridge `(q_n, q_{n+l})`.
pub fn elliptic_bridge_step(
    sys: &LinearSystem,
    q_n: f64,
    q_nl: f64,
    h_prime: f64,
    params: &KamParams,
) -> Result<Stage, KamError> {
    let rho = sys.constant.rho().ok_or_else(|| KamError::InvalidParameter("elliptic constant expected".into()))?;
    let mut violations = Vec::new();
    let el = prepare(sys, h_prime, params, Branch::EllipticBridgeNonresonant)?;
    if el.eps == 0.0 {
        return Ok(identity_stage(sys, Branch::Identity, h_prime / 6.0));
    }
    branch_regime(el.eps, q_n, h_prime, params.cal_a, &mut Regime { policy: params.policy, violations: &mut violations })?;
    let (eps, eta) = (el.eps, el.eta);
    let (k21, any) = low_resonances(sys.alpha, rho, eta, q_nl / 2.0, &mut violations);
    if !any {
        let mut f = el.system.f.clone();
        let z = j_part(&f.coeff((0, 0))).re;
        f.insert((0, 0), Mat2::j().scale(-z).to_complex());
        f.prune(0.0);
        let system = LinearSystem::new(ConstantPart::Elliptic { rho: rho + z / (2.0 * PI) }, f, h_prime / 6.0, sys.alpha);
        let norm_c1 = stage_c1(&el.steps);
        let f_out = weighted_norm(&system.f, h_prime / 6.0);
        let checks = vec![
            BoundCheck::upper("conjugacy C1 norm", norm_c1, LN_2),
            BoundCheck::upper("perturbation after step", f_out, eps.ln() - q_nl * h_prime),
        ];
        return Ok(Stage {
            branch: Branch::EllipticBridgeNonresonant,
            steps: el.steps,
            system,
            normal: None,
            k_star: None,
            eps,
            eta,
            norm_c1,
            checks,
            violations,
        });
    }
    let branch = Branch::EllipticBridgeResonant;
    let k_star = *k21.first().ok_or_else(|| KamError::SupportViolated("no resonance in the upper class".into()))?;
    let (mut el, rot) = resonant_branch(el, k_star, branch, &mut violations)?;
    let (nf, step, system) = normalize_tail(&rot, q_nl, h_prime, params, branch, &mut violations)?;
    el.steps.push(step);
    let norm_c1 = stage_c1(&el.steps);
    let f_out = weighted_norm(&system.f, h_prime / 6.0);
    let checks = outcome_checks(Family::EllipticBridge, &nf, q_nl, h_prime, norm_c1, f_out);
    Ok(Stage {
        branch,
        steps: el.steps,
        system,
        normal: Some(nf),
        k_star: Some(k_star),
        eps,
        eta,
        norm_c1,
        checks,
        violations,
    })
}

/// Elliptic constant after a large jump `q_{n+1} > q_n^A`; `line` is
/// `(p_n, q_n)`.
pub fn elliptic_liouville_step(
    sys: &LinearSystem,
    q_n: f64,
    q_n1: f64,
    line: (i64, i64),
    h_prime: f64,
    params: &KamParams,
) -> Result<Stage, KamError> {
    let rho = sys.constant.rho().ok_or_else(|| KamError::InvalidParameter("elliptic constant expected".into()))?;
    let mut violations = Vec::new();
    let el = prepare(sys, h_prime, params, Branch::EllipticLiouvilleNonresonant)?;
    let h_tilde = h_prime / 6.0;
    if el.eps == 0.0 {
        return Ok(identity_stage(sys, Branch::Identity, h_tilde));
    }
    branch_regime(el.eps, q_n, h_prime, params.cal_a, &mut Regime { policy: params.policy, violations: &mut violations })?;
    let (eps, eta) = (el.eps, el.eta);
    let (k21, any) = low_resonances(sys.alpha, rho, eta, q_n1 / 6.0, &mut violations);
    if !any {
        let branch = Branch::EllipticLiouvilleNonresonant;
        let mut el = el;
        // Resonant rotation modes commute with A and are removed exactly.
        let mut e = Fourier2::zero();
        for (&k, c) in el.fre.modes() {
            if k == (0, 0) || (mode_norm(k) as f64) >= q_n1 / 6.0 || pairing(k, sys.alpha).abs() >= eta {
                continue;
            }
            let z = j_part(c) / num_complex::Complex64::new(0.0, 2.0 * PI * pairing(k, sys.alpha));
            e.insert(k, Mat2::j().to_complex().scale(z));
        }
        let mut f = el.system.f.clone();
        if !e.is_zero() {
            let y = e.scale(-1.0);
            f = conjugate_by_exp(&el.system.a(), &f, &y, sys.alpha, params.elimination.k_max);
            f.symmetrize();
            el.steps.push(ConjugationStep::new(StepKind::ExpY { y }, branch));
        }
        let z = j_part(&f.coeff((0, 0))).re;
        f.insert((0, 0), Mat2::j().scale(-z).to_complex());
        f.prune(1e-30 * eps);
        let system = LinearSystem::new(ConstantPart::Elliptic { rho: rho + z / (2.0 * PI) }, f, h_tilde, sys.alpha);
        let norm_c1 = stage_c1(&el.steps);
        let f_out = weighted_norm(&system.f, h_prime / 2.0);
        let checks = vec![
            BoundCheck::upper("conjugacy C1 norm", norm_c1, q_n1 * h_prime.powi(4)),
            BoundCheck::upper("perturbation after step", f_out, eps.ln() - q_n1 * h_prime / 2.0),
        ];
        return Ok(Stage {
            branch,
            steps: el.steps,
            system,
            normal: None,
            k_star: None,
            eps,
            eta,
            norm_c1,
            checks,
            violations,
        });
    }
    let branch = Branch::EllipticLiouvilleResonant;
    let k_star = *k21.first().ok_or_else(|| KamError::SupportViolated("no resonance in the upper class".into()))?;
    let (mut el, rot) = resonant_branch(el, k_star, branch, &mut violations)?;
    let (fstep, reduced, off_line) = floquet_tail(&rot, q_n1, line, params, branch)?;
    el.steps.push(fstep);
    let (nf, step, system) = normalize_tail(&reduced, q_n1, h_tilde, params, branch, &mut violations)?;
    el.steps.push(step);
    let norm_c1 = stage_c1(&el.steps);
    let f_out = weighted_norm(&system.f, h_tilde);
    let mut checks = outcome_checks(Family::Liouville, &nf, q_n1, h_tilde, norm_c1, f_out);
    checks.push(BoundCheck::upper("low modes off the resonant line", off_line, (eps * 1e-6).ln()));
    Ok(Stage {
        branch,
        steps: el.steps,
        system,
        normal: Some(nf),
        k_star: Some(k_star),
        eps,
        eta,
        norm_c1,
        checks,
        violations,
    })
}

/// Parabolic constant at a bridge `(q_n, q_{n+l})`.
pub fn parabolic_bridge_step(
    sys: &LinearSystem,
    q_n: f64,
    q_nl: f64,
    h_prime: f64,
    params: &KamParams,
) -> Result<Stage, KamError> {
    let branch = Branch::ParabolicBridge;
    let mut violations = Vec::new();
    let mut el = prepare(sys, h_prime, params, branch)?;
    if el.eps > 0.0 {
        branch_regime(el.eps, q_n, h_prime, params.cal_a, &mut Regime { policy: params.policy, violations: &mut violations })?;
    }
    let (nf, step, system) = normalize_tail(&el.system, q_nl, h_prime, params, branch, &mut violations)?;
    el.steps.push(step);
    let norm_c1 = stage_c1(&el.steps);
    let f_out = weighted_norm(&system.f, h_prime / 6.0);
    let checks = outcome_checks(Family::ParabolicBridge, &nf, q_nl, h_prime, norm_c1, f_out);
    Ok(Stage {
        branch,
        steps: el.steps,
        system,
        normal: Some(nf),
        k_star: None,
        eps: el.eps,
        eta: el.eta,
        norm_c1,
        checks,
        violations,
    })
}

/// Parabolic constant after a large jump; `line` is `(p_n, q_n)`.
pub fn parabolic_liouville_step(
    sys: &LinearSystem,
    q_n: f64,
    q_n1: f64,
    line: (i64, i64),
    h_prime: f64,
    params: &KamParams,
) -> Result<Stage, KamError> {
    let branch = Branch::ParabolicLiouville;
    let mut violations = Vec::new();
    let h_tilde = h_prime / 6.0;
    let mut el = prepare(sys, h_prime, params, branch)?;
    if el.eps > 0.0 {
        branch_regime(el.eps, q_n, h_prime, params.cal_a, &mut Regime { policy: params.policy, violations: &mut violations })?;
    }
    if let ConstantPart::Parabolic { c } = sys.constant {
        let cap = -2.25 * q_n * h_prime.powi(4);
        Regime { policy: params.policy, violations: &mut violations }
            .require(c.abs().ln() <= cap, || format!("ln |c*| = {} above {cap}", c.abs().ln()))?;
    }
    let (fstep, reduced, off_line) = floquet_tail(&el.system, q_n1, line, params, branch)?;
    el.steps.push(fstep);
    let (nf, step, system) = normalize_tail(&reduced, q_n1, h_tilde, params, branch, &mut violations)?;
    el.steps.push(step);
    let norm_c1 = stage_c1(&el.steps);
    let f_out = weighted_norm(&system.f, h_tilde);
    let mut checks = outcome_checks(Family::Liouville, &nf, q_n1, h_tilde, norm_c1, f_out);
    checks.push(BoundCheck::upper("low modes off the resonant line", off_line, (el.eps * 1e-6).ln()));
    Ok(Stage {
        branch,
        steps: el.steps,
        system,
        normal: Some(nf),
        k_star: None,
        eps: el.eps,
        eta: el.eta,
        norm_c1,
        checks,
        violations,
    })
}

/// Worst flow-comparison residual `‖B(θ+tω)⁻¹ Φ_old^t(θ) B(θ) ∓ Φ_new^t(θ)‖`
/// over random phases; the sign ambiguity allows half-frequency maps.
pub fn verify_conjugacy(
    old: &LinearSystem,
    new: &LinearSystem,
    steps: &[ConjugationStep],
    phases: usize,
    times: &[f64],
    seed: u64,
) -> Result<f64, KamError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let thetas: Vec<[f64; 2]> = (0..phases).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
    let om = old.omega();
    let per: Vec<f64> = thetas
        .par_iter()
        .map(|&th| -> Result<f64, KamError> {
            let b0 = composite(steps, th);
            let mut worst: f64 = 0.0;
            for &t in times {
                let phi_old = ode_flow(old, th, t, 1e-13)?;
                let phi_new = ode_flow(new, th, t, 1e-13)?;
                let bt = composite(steps, [th[0] + t * om[0], th[1] + t * om[1]]);
                let lhs = bt.inverse() * phi_old * b0;
                let r = lhs.dist(&phi_new).min(lhs.dist(&(-phi_new)));
                worst = worst.max(r / phi_new.norm().max(1.0));
            }
            Ok(worst)
        })
        .collect::<Result<_, _>>()?;
    Ok(per.into_iter().fold(0.0, f64::max))
}

/// Everything recorded about one iteration.
#[derive(Debug, Clone, Serialize)]
pub struct KamReport {
    pub stages: Vec<Stage>,
    pub q_iota: f64,
    pub bq_iota: f64,
    pub q_next: f64,
    /// The scale that governs the output bounds.
    pub q_tilde: f64,
    pub h: f64,
    pub h_plus: f64,
    pub eps_in: f64,
    pub eps_out: f64,
    pub residual: f64,
    /// `ln ‖B‖_{C¹} / (Q̃ h₊²)`, the constant the output bound needs.
    pub measured_c: f64,
    pub checks: Vec<BoundCheck>,
    pub violations: Vec<String>,
    pub steps: Vec<StepSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepSummary {
    pub kind: &'static str,
    pub branch: Branch,
    pub norm_c1: f64,
    pub condition: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KamStep {
    #[serde(skip)]
    pub steps: Vec<ConjugationStep>,
    pub system: LinearSystem,
    pub report: KamReport,
}

fn final_checks(sys: &LinearSystem, q_tilde: f64, q_next: f64, h_plus: f64, b_c1: f64) -> Vec<BoundCheck> {
    let f = weighted_norm(&sys.f, h_plus);
    let h2 = h_plus * h_plus;
    match sys.constant {
        ConstantPart::Parabolic { c } => vec![
            BoundCheck::upper("output perturbation", f, 9f64.ln() - 2.25 * q_next * h2),
            BoundCheck::lower("output parabolic entry lower band", c.abs(), -q_next * h2 / 6.0),
            BoundCheck::upper("output parabolic entry upper band", c.abs(), -2.25 * q_next * h2 * h2),
        ],
        _ => {
            let strong = BoundCheck::upper("output perturbation (fast decay)", f, -q_tilde * h_plus);
            let weak = BoundCheck::upper("output perturbation (slow decay)", f, LN_2 - C0 * q_tilde * h2);
            let either = BoundCheck {
                name: "output perturbation".into(),
                ln_value: f.ln(),
                ln_bound: strong.ln_bound.max(weak.ln_bound),
                ok: strong.ok || weak.ok,
            };
            let _ = b_c1;
            vec![strong, weak, either]
        }
    }
}

/// One iteration at position `params.iota` of the bridge chain.
pub fn kam_step(
    sys: &LinearSystem,
    cf: &ContinuedFraction,
    chain: &BridgeChain,
    params: &KamParams,
) -> Result<KamStep, KamError> {
    let iota = params.iota;
    if chain.len() <= iota + 1 {
        return Err(KamError::InvalidParameter(format!("bridge chain has {} entries, need {}", chain.len(), iota + 2)));
    }
    let a = params.cal_a;
    let n = chain.index[iota];
    let q_iota = cf.q_f64(n);
    let bq = cf.q_f64(n + 1);
    let q_next = cf.q_f64(chain.index[iota + 1]);
    let h = sys.h;
    let h_prime = 0.75 * h;
    let h_tilde = h_prime / 6.0;
    let h_plus = h_tilde / 8.0;
    let eps_in = weighted_norm(&sys.f, h);

    let mut violations = Vec::new();
    if eps_in == 0.0 {
        let mut system = sys.clone();
        system.h = h_plus;
        let report = KamReport {
            stages: vec![identity_stage(sys, Branch::Identity, h_plus)],
            q_iota,
            bq_iota: bq,
            q_next,
            q_tilde: q_next,
            h,
            h_plus,
            eps_in,
            eps_out: 0.0,
            residual: 0.0,
            measured_c: 0.0,
            checks: Vec::new(),
            violations,
            steps: Vec::new(),
        };
        return Ok(KamStep { steps: Vec::new(), system, report });
    }
    {
        let mut reg = Regime { policy: params.policy, violations: &mut violations };
        let root = q_iota.powf(1.0 / (2.0 * a));
        reg.require(h < 1.0 / 120.0, || format!("h = {h} not below 1/120"))?;
        reg.require(C0 * root * h * h >= a.powi(4), || format!("c0 Q^(1/2A) h^2 = {} below A^4", C0 * root * h * h))?;
        reg.require(24.0 * (2.0 * q_iota).ln() < root, || format!("24 ln(2Q) not below Q^(1/2A) = {root}"))?;
        let ln_cap = LN_2 - C0 * q_iota.powf(1.0 / a) * h * h;
        reg.require(eps_in.ln() <= ln_cap, || format!("ln |F|_h = {} above {ln_cap}", eps_in.ln()))?;
        if let ConstantPart::Parabolic { c } = sys.constant {
            let lc = c.abs().ln();
            reg.require(lc >= -q_iota * h * h / 6.0, || format!("ln |c*| = {lc} below the lower band"))?;
            reg.require(lc <= -2.25 * q_iota * h.powi(4), || format!("ln |c*| = {lc} above the upper band"))?;
        }
    }

    let elliptic = match sys.constant {
        ConstantPart::Elliptic { .. } => true,
        ConstantPart::Parabolic { .. } => false,
        ConstantPart::General { .. } => {
            return Err(KamError::InvalidParameter("constant must be elliptic or parabolic".into()))
        }
    };
    let jump = cmp_pow(cf.q(n + 1), cf.q(n), a) == Ordering::Greater;
    let mut stages = Vec::new();
    let q_tilde;
    if chain.tags[iota].bridge {
        let s = if elliptic {
            elliptic_bridge_step(sys, q_iota, q_next, h_prime, params)?
        } else {
            parabolic_bridge_step(sys, q_iota, q_next, h_prime, params)?
        };
        stages.push(s);
        q_tilde = q_next;
    } else if jump {
        let line = (
            cf.p_i64(n).ok_or_else(|| KamError::InvalidParameter("p_n exceeds 64 bits".into()))?,
            cf.q_i64(n).ok_or_else(|| KamError::InvalidParameter("q_n exceeds 64 bits".into()))?,
        );
        let s1 = if elliptic {
            elliptic_liouville_step(sys, q_iota, bq, line, h_prime, params)?
        } else {
            parabolic_liouville_step(sys, q_iota, bq, line, h_prime, params)?
        };
        let mid = s1.system.clone();
        stages.push(s1);
        let h2 = 0.75 * h_tilde;
        let follow = match mid.constant {
            ConstantPart::Elliptic { .. } => {
                if cmp_pow(cf.q(chain.index[iota + 1]), cf.q(n + 1), a) == Ordering::Greater {
                    Some(elliptic_bridge_step(&mid, bq, q_next, h2, params)?)
                } else {
                    None
                }
            }
            _ => {
                if chain.index[iota + 1] == n + 1 {
                    None
                } else {
                    Some(parabolic_bridge_step(&mid, bq, q_next, h2, params)?)
                }
            }
        };
        q_tilde = if follow.is_some() { q_next } else { bq };
        stages.extend(follow);
    } else {
        return Err(KamError::InvalidParameter(format!("pair at position {iota} is neither a bridge nor a jump")));
    }

    let steps: Vec<ConjugationStep> = stages.iter().flat_map(|s| s.steps.iter().cloned()).collect();
    let mut system = stages.last().expect("at least one stage").system.clone();
    system.h = h_plus;
    let residual = verify_conjugacy(sys, &system, &steps, params.verify_phases, &params.verify_times, params.seed)?;
    if residual > params.verify_tol {
        return Err(KamError::VerificationFailed { residual, tol: params.verify_tol });
    }
    let b_c1 = stage_c1(&steps);
    let mut checks = final_checks(&system, q_tilde, q_next, h_plus, b_c1);
    for s in &stages {
        checks.extend(s.checks.iter().cloned());
        violations.extend(s.violations.iter().cloned());
    }
    if params.policy == RegimePolicy::Enforce {
        if let Some(c) = checks.iter().find(|c| !c.ok && c.name != "output perturbation (fast decay)" && c.name != "output perturbation (slow decay)") {
            return Err(KamError::Postcondition(format!("{}: ln value {} vs ln bound {}", c.name, c.ln_value, c.ln_bound)));
        }
    }
    let report = KamReport {
        stages,
        q_iota,
        bq_iota: bq,
        q_next,
        q_tilde,
        h,
        h_plus,
        eps_in,
        eps_out: weighted_norm(&system.f, h_plus),
        residual,
        measured_c: b_c1.ln() / (q_tilde * h_plus * h_plus),
        checks,
        violations,
        steps: steps
            .iter()
            .map(|s| StepSummary { kind: s.kind.name(), branch: s.branch, norm_c1: s.norm_c1, condition: s.condition })
            .collect(),
    };
    Ok(KamStep { steps, system, report })
}
