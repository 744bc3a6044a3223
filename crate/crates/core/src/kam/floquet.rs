use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::fourier::{weighted_norm, Fourier2, Mode};
use super::system::{integrate, rk4_fixed};
use super::KamError;
use crate::linalg::{CMat2, Mat2};

const CHECKPOINTS: usize = 256;

/// A constant-coefficient reduction of a system that depends on the single
/// phase `ψ = pθ₁ − qθ₂`.
#[derive(Debug, Clone, Serialize)]
pub struct FloquetReduction {
    pub p: i64,
    pub q: i64,
    /// `τ = p − qα`, the speed of `ψ` along the flow.
    pub tau: f64,
    /// Coefficients `ĝ_l` of `G(θ) = Σ ĝ_l e^{2πilψ}`.
    pub line: Vec<(i64, CMat2)>,
    /// Monodromy in the phase variable, `Φ_ψ(1)`.
    pub monodromy: Mat2,
    /// Logarithm of `±monodromy`.
    pub log_monodromy: Mat2,
    /// The reduced constant `D = τ · log_monodromy`.
    pub d: Mat2,
    /// Set when the logarithm was taken of `−monodromy`, so that the
    /// conjugacy changes sign under `ψ ↦ ψ + 1`.
    pub projective: bool,
    /// `Φ_ψ(j / CHECKPOINTS)`.
    #[serde(skip)]
    checkpoints: Vec<Mat2>,
    steps: usize,
    /// `sup ‖B‖` over the checkpoints.
    pub b_sup: f64,
    /// `exp(4|G|₀/|τ|)`, the exponential bound at zero width.
    pub b_bound: f64,
    /// `|τ| e^{2|G|₀/|τ|}`.
    pub d_bound: f64,
    /// Worst flow-comparison residual found during verification.
    pub residual: f64,
}

impl FloquetReduction {
    fn generator(&self, psi: f64) -> Mat2 {
        let mut acc = CMat2::zero();
        for &(l, c) in &self.line {
            acc += c.scale(Complex64::from_polar(1.0, 2.0 * PI * l as f64 * psi));
        }
        acc.re()
    }

    /// `Φ_ψ(r)` for `r ∈ [0, 1]`.
    fn phase_flow(&self, r: f64) -> Mat2 {
        let i = ((r * CHECKPOINTS as f64).floor() as usize).min(CHECKPOINTS - 1);
        let start = i as f64 / CHECKPOINTS as f64;
        let gap = r - start;
        if gap == 0.0 {
            return self.checkpoints[i];
        }
        let per = (self.steps / CHECKPOINTS).max(1);
        let n = ((gap * CHECKPOINTS as f64 * per as f64).ceil() as usize).max(1);
        let inv_tau = 1.0 / self.tau;
        rk4_fixed(|s| self.generator(start + s).scale(inv_tau), gap, n) * self.checkpoints[i]
    }

    /// The conjugacy as a function of the phase.
    pub fn eval_phase(&self, psi: f64) -> Mat2 {
        let j = psi.floor();
        let r = psi - j;
        let b = self.phase_flow(r) * (-self.log_monodromy.scale(r)).expm();
        if self.projective && (j as i64).rem_euclid(2) == 1 {
            -b
        } else {
            b
        }
    }

    /// The conjugacy at a point of the torus (unreduced coordinates).
    pub fn eval(&self, theta: [f64; 2]) -> Mat2 {
        self.eval_phase(self.p as f64 * theta[0] - self.q as f64 * theta[1])
    }

    /// Flow of `ẋ = G x` from phase `ψ₀` for time `t`.
    fn line_flow(&self, psi0: f64, t: f64, tol: f64) -> Result<Mat2, KamError> {
        let rate = self.line.iter().map(|(l, c)| c.norm() * (1.0 + 2.0 * PI * (*l as f64 * self.tau).abs())).sum();
        integrate(|s| self.generator(psi0 + self.tau * s), t, rate, tol)
    }
}

/// True when every mode of `g` is an integer multiple of `(p, −q)`.
pub fn on_line(g: &Fourier2, p: i64, q: i64) -> bool {
    g.modes().all(|(&(k1, k2), _)| k1 * (-q) - k2 * p == 0)
}

fn line_index(k: Mode, p: i64, q: i64) -> i64 {
    if p != 0 {
        k.0 / p
    } else {
        -k.1 / q
    }
}

/// Reduces `ẋ = G(θ₀ + tω) x`, with `G` supported on `{l(p, −q)}`, to the
/// constant system `ż = D z` by integrating over one period of the phase.
pub fn floquet_reduce(
    g: &Fourier2,
    p: i64,
    q: i64,
    alpha: f64,
    tol: f64,
    allow_projective: bool,
) -> Result<FloquetReduction, KamError> {
    if p == 0 && q == 0 {
        return Err(KamError::InvalidParameter("line direction must be nonzero".into()));
    }
    if !on_line(g, p, q) {
        return Err(KamError::SupportViolated(format!("modes off the line through ({p}, {})", -q)));
    }
    let tau = p as f64 - q as f64 * alpha;
    if tau == 0.0 {
        return Err(KamError::InvalidParameter("phase speed vanishes".into()));
    }
    let line: Vec<(i64, CMat2)> = g.modes().map(|(&k, &c)| (line_index(k, p, q), c)).collect();
    let mut red = FloquetReduction {
        p,
        q,
        tau,
        line,
        monodromy: Mat2::identity(),
        log_monodromy: Mat2::zero(),
        d: Mat2::zero(),
        projective: false,
        checkpoints: Vec::new(),
        steps: 0,
        b_sup: 0.0,
        b_bound: 0.0,
        d_bound: 0.0,
        residual: 0.0,
    };
    let inv_tau = 1.0 / tau;
    let rate: f64 = red.line.iter().map(|(l, c)| c.norm() * inv_tau.abs() + 2.0 * PI * l.abs() as f64).sum::<f64>() + 1.0;
    // Step count from the doubling test, then a pass storing checkpoints.
    let mut per = ((rate * 2.0 / CHECKPOINTS as f64).ceil() as usize).max(1);
    let gen = |s: f64| red.generator(s).scale(inv_tau);
    let mut prev = rk4_fixed(gen, 1.0, per * CHECKPOINTS);
    loop {
        per *= 2;
        if per * CHECKPOINTS > 1 << 24 {
            return Err(KamError::StepUnderflow { t: 1.0 / tau.abs() });
        }
        let next = rk4_fixed(gen, 1.0, per * CHECKPOINTS);
        if next.dist(&prev) / 15.0 <= 1e-3 * tol * next.norm().max(1.0) {
            break;
        }
        prev = next;
    }
    let mut checkpoints = Vec::with_capacity(CHECKPOINTS + 1);
    let mut phi = Mat2::identity();
    checkpoints.push(phi);
    let h = 1.0 / CHECKPOINTS as f64;
    for i in 0..CHECKPOINTS {
        let start = i as f64 * h;
        phi = rk4_fixed(|s| red.generator(start + s).scale(inv_tau), h, per) * phi;
        checkpoints.push(phi);
    }
    let m = phi;
    let (log_m, projective) = match m.sl_log() {
        Some(l) => (l, false),
        None => {
            if !allow_projective {
                return Err(KamError::MonodromyLogBranch { trace: m.trace() });
            }
            let l = (-m).sl_log().ok_or(KamError::MonodromyLogBranch { trace: m.trace() })?;
            log::warn!("monodromy trace {} below -2; using the projective representative", m.trace());
            (l, true)
        }
    };
    red.monodromy = m;
    red.log_monodromy = log_m;
    red.d = log_m.scale(tau);
    red.projective = projective;
    red.checkpoints = checkpoints;
    red.steps = per * CHECKPOINTS;

    let gnorm = weighted_norm(g, 0.0);
    red.b_bound = (4.0 * gnorm / tau.abs()).exp();
    red.d_bound = tau.abs() * (2.0 * gnorm / tau.abs()).exp();
    red.b_sup = (0..CHECKPOINTS).map(|i| red.eval_phase(i as f64 / CHECKPOINTS as f64).norm()).fold(0.0, f64::max);

    let mut worst: f64 = 0.0;
    for i in 0..8 {
        let psi0 = (i as f64 + 0.37) / 8.0 - 0.5;
        for t in [0.25, 0.5, 1.0] {
            let flow = red.line_flow(psi0, t, 1e-3 * tol)?;
            let lhs = red.eval_phase(psi0 + tau * t).inverse() * flow * red.eval_phase(psi0);
            worst = worst.max(lhs.dist(&red.d.scale(t).expm()));
        }
    }
    red.residual = worst;
    if worst > tol {
        return Err(KamError::VerificationFailed { residual: worst, tol });
    }
    Ok(red)
}

/// `B(ψ)⁻¹ F B(ψ)` as a Fourier series, from `samples` values of the phase.
pub fn conjugate_by_phase_map(f: &Fourier2, red: &FloquetReduction, samples: usize) -> Fourier2 {
    let n = samples.max(4);
    let bs: Vec<(Mat2, Mat2)> = (0..n)
        .map(|j| {
            let b = red.eval_phase(j as f64 / n as f64);
            (b.inverse(), b)
        })
        .collect();
    let half = (n / 2) as i64;
    let mut out = Fourier2::zero();
    for (&k, &c) in f.modes() {
        let vals: Vec<CMat2> = bs.iter().map(|(bi, b)| bi.to_complex() * c * b.to_complex()).collect();
        for l in -half..half {
            let mut acc = CMat2::zero();
            for (j, v) in vals.iter().enumerate() {
                acc += v.scale(Complex64::from_polar(1.0, -2.0 * PI * (l * j as i64) as f64 / n as f64));
            }
            let acc = acc.scale_re(1.0 / n as f64);
            if acc.max_abs() > 1e-18 * c.max_abs() {
                out.insert((k.0 + l * red.p, k.1 - l * red.q), acc);
            }
        }
    }
    out
}
