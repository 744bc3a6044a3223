//! Measure complexity of the projective skew product on `T¹ × RP¹`:
//! Bowen-averaged distances, covering numbers by `d̄_n`-balls and their
//! growth against `n^τ`.
//!
//! Covers use sample points as centers. A sample-centered cover at radius
//! `ε` is never smaller than an arbitrary-center cover at radius `ε`, and
//! never larger than one at radius `ε/2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cocycle::{proj_dist, proj_step, CocycleFn, ProjPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexityError {
    #[error("{have} samples, need at least {need} for radius {eps}")]
    TooFewSamples { have: usize, need: usize, eps: f64 },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Finitely supported probability measure on `T¹ × RP¹`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    points: Vec<ProjPoint>,
    weights: Vec<f64>,
    /// Wasserstein-1 bound on `‖T_*ρ − ρ‖`, when the measure came from an orbit.
    pub transport_residual: Option<f64>,
}

impl EmpiricalMeasure {
    pub fn new(points: Vec<ProjPoint>, weights: Vec<f64>) -> Result<Self, ComplexityError> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(ComplexityError::InvalidMeasure(format!(
                "{} points with {} weights",
                points.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(ComplexityError::InvalidMeasure("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(ComplexityError::InvalidMeasure(format!("weights sum to {total}")));
        }
        Ok(EmpiricalMeasure { points, weights, transport_residual: None })
    }

    /// Equal weights; exact up to rounding in `1/n`, so not re-checked.
    pub fn uniform(points: Vec<ProjPoint>) -> Result<Self, ComplexityError> {
        if points.is_empty() {
            return Err(ComplexityError::InvalidMeasure("no points".into()));
        }
        let weights = vec![1.0 / points.len() as f64; points.len()];
        Ok(EmpiricalMeasure { points, weights, transport_residual: None })
    }

    /// Uniform measure on `samples` consecutive orbit points after `burn_in` steps.
    pub fn birkhoff(c: &CocycleFn, start: ProjPoint, burn_in: usize, samples: usize) -> Result<Self, ComplexityError> {
        if samples == 0 {
            return Err(ComplexityError::InvalidParameter("need at least one sample".into()));
        }
        let mut x = start;
        for _ in 0..burn_in {
            x = step(c, x);
        }
        let mut pts = Vec::with_capacity(samples);
        for _ in 0..samples {
            pts.push(x);
            x = step(c, x);
        }
        // Pushing forward moves the first atom's mass to the point after the last.
        let residual = proj_dist(&pts[0], &x) / samples as f64;
        let mut m = EmpiricalMeasure::uniform(pts)?;
        m.transport_residual = Some(residual);
        log::debug!("orbit measure with {samples} samples, transport residual {residual:e}");
        Ok(m)
    }

    pub fn points(&self) -> &[ProjPoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `max(circle distance of θ, projective distance of φ)`.
pub fn dist(x: &ProjPoint, y: &ProjPoint) -> f64 {
    proj_dist(x, y)
}

fn step(c: &CocycleFn, x: ProjPoint) -> ProjPoint {
    proj_step(&c.eval(x.theta), x, c.alpha)
}

/// `x, Tx, …, T^{n−1}x`.
pub fn orbit(c: &CocycleFn, x: ProjPoint, n: usize) -> Vec<ProjPoint> {
    let mut out = Vec::with_capacity(n);
    let mut p = x;
    for _ in 0..n {
        out.push(p);
        p = step(c, p);
    }
    out
}

/// True for cocycles acting isometrically on `RP¹` with a constant rotation.
pub fn is_isometric(c: &CocycleFn) -> bool {
    if c.is_rotation() {
        return true;
    }
    match c.as_constant() {
        Some(m) => {
            let r = m.transpose() * m;
            (r.a - 1.0).abs() <= 1e-15 && (r.d - 1.0).abs() <= 1e-15 && r.b.abs() <= 1e-15 && m.det() > 0.0
        }
        None => false,
    }
}

/// `d̄_n(x, y) = (1/n) Σ_{i<n} d(Tⁱx, Tⁱy)`.
pub fn bowen_dist(c: &CocycleFn, x: ProjPoint, y: ProjPoint, n: usize) -> f64 {
    assert!(n >= 1, "Bowen distance needs n >= 1");
    let (mut p, mut q) = (x, y);
    let mut s = 0.0;
    for _ in 0..n {
        s += dist(&p, &q);
        p = step(c, p);
        q = step(c, q);
    }
    s / n as f64
}

/// Symmetric matrix of `d̄_n` between all sample points, row-major.
///
/// Rotation cocycles are isometries, so `d̄_n = d` and the matrix is taken
/// from `n = 1` exactly.
pub fn bowen_matrix(c: &CocycleFn, pts: &[ProjPoint], n: usize) -> Vec<f64> {
    assert!(n >= 1, "Bowen distance needs n >= 1");
    let m = pts.len();
    let n = if is_isometric(c) { 1 } else { n };
    let orbits: Vec<Vec<ProjPoint>> = pts.par_iter().map(|&p| orbit(c, p, n)).collect();
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            (0..m)
                .map(|j| {
                    if i == j {
                        return 0.0;
                    }
                    let (a, b) = if i < j { (&orbits[i], &orbits[j]) } else { (&orbits[j], &orbits[i]) };
                    a.iter().zip(b).map(|(p, q)| dist(p, q)).sum::<f64>() / n as f64
                })
                .collect()
        })
        .collect();
    rows.concat()
}

/// A cover of at least `1 − ε` of the mass by `d̄_n`-balls of radius `ε`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Cover {
    /// Indices of the chosen centers, in selection order.
    pub centers: Vec<usize>,
    pub covered: f64,
}

impl Cover {
    pub fn count(&self) -> usize {
        self.centers.len()
    }
}

/// Greedy max-coverage on a precomputed distance matrix. Ties go to the
/// lowest index.
pub fn greedy_cover(dist: &[f64], weights: &[f64], eps: f64) -> Cover {
    let m = weights.len();
    assert_eq!(dist.len(), m * m);
    let mut covered_flag = vec![false; m];
    let mut covered = 0.0;
    let mut centers = Vec::new();
    while covered <= 1.0 - eps {
        let gains: Vec<f64> = (0..m)
            .into_par_iter()
            .map(|i| {
                (0..m).filter(|&j| !covered_flag[j] && dist[i * m + j] < eps).map(|j| weights[j]).sum::<f64>()
            })
            .collect();
        let (best, gain) = gains
            .iter()
            .enumerate()
            .fold((usize::MAX, 0.0f64), |acc, (i, &g)| if g > acc.1 { (i, g) } else { acc });
        if best == usize::MAX || gain <= 0.0 {
            break;
        }
        for j in 0..m {
            if !covered_flag[j] && dist[best * m + j] < eps {
                covered_flag[j] = true;
                covered += weights[j];
            }
        }
        centers.push(best);
    }
    Cover { centers, covered }
}

/// Smallest sample-centered cover by exhaustive subset search; `None` above
/// 24 points.
pub fn exhaustive_cover(dist: &[f64], weights: &[f64], eps: f64) -> Option<Cover> {
    let m = weights.len();
    if m > 24 {
        return None;
    }
    let balls: Vec<u32> = (0..m)
        .map(|i| (0..m).filter(|&j| dist[i * m + j] < eps).fold(0u32, |acc, j| acc | (1 << j)))
        .collect();
    let mass = |set: u32| (0..m).filter(|&j| set & (1 << j) != 0).map(|j| weights[j]).sum::<f64>();
    let mut best: Option<(u32, u32, f64)> = None;
    for subset in 0u32..(1u32 << m) {
        let size = subset.count_ones();
        if best.is_some_and(|(s, _, _)| size >= s) {
            continue;
        }
        let union = (0..m).filter(|&i| subset & (1 << i) != 0).fold(0u32, |acc, i| acc | balls[i]);
        let w = mass(union);
        if w > 1.0 - eps {
            best = Some((size, subset, w));
        }
    }
    best.map(|(_, subset, covered)| Cover { centers: (0..m).filter(|&i| subset & (1 << i) != 0).collect(), covered })
}

/// Samples needed before a cover at radius `ε` is trusted: `⌈4/ε²⌉`.
pub fn sample_floor(eps: f64) -> usize {
    (4.0 / (eps * eps)).ceil() as usize
}

/// Greedy estimate of `S_n(d, ρ, ε)`.
pub fn covering_number(c: &CocycleFn, mu: &EmpiricalMeasure, n: usize, eps: f64) -> Result<usize, ComplexityError> {
    let need = sample_floor(eps);
    if mu.len() < need {
        return Err(ComplexityError::TooFewSamples { have: mu.len(), need, eps });
    }
    Ok(covering_number_unchecked(c, mu, n, eps).count())
}

/// [`covering_number`] without the sample floor, returning the whole cover.
pub fn covering_number_unchecked(c: &CocycleFn, mu: &EmpiricalMeasure, n: usize, eps: f64) -> Cover {
    let d = bowen_matrix(c, &mu.points, n);
    greedy_cover(&d, &mu.weights, eps)
}

/// `S_n` against `n^τ` over a list of times.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexityProfile {
    pub ns: Vec<usize>,
    pub eps: f64,
    pub sn: Vec<usize>,
    pub tau: f64,
    /// `S_n / n^τ`.
    pub ratios: Vec<f64>,
    /// Minimum ratio over the computed times.
    pub liminf_proxy: f64,
    /// Whether `d̄_n = d` was used exactly.
    pub isometric: bool,
    pub samples: usize,
}

pub fn subpoly_profile(
    c: &CocycleFn,
    mu: &EmpiricalMeasure,
    ns: &[usize],
    eps: f64,
    tau: f64,
) -> Result<ComplexityProfile, ComplexityError> {
    if ns.contains(&0) {
        return Err(ComplexityError::InvalidParameter("times must be at least 1".into()));
    }
    let need = sample_floor(eps);
    if mu.len() < need {
        return Err(ComplexityError::TooFewSamples { have: mu.len(), need, eps });
    }
    let sn: Vec<usize> = ns.iter().map(|&n| covering_number_unchecked(c, mu, n, eps).count()).collect();
    let ratios: Vec<f64> = ns.iter().zip(&sn).map(|(&n, &s)| s as f64 / (n as f64).powf(tau)).collect();
    let liminf_proxy = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ComplexityProfile {
        ns: ns.to_vec(),
        eps,
        sn,
        tau,
        ratios,
        liminf_proxy,
        isometric: is_isometric(c),
        samples: mu.len(),
    })
}

/// Orbit samples `x_i = (θ₀ + iα', φ₀ + iβ')` for deterministic test measures.
pub fn lattice_points(count: usize, theta_step: f64, phi_step: f64) -> Vec<ProjPoint> {
    (0..count).map(|i| ProjPoint::new(i as f64 * theta_step, i as f64 * phi_step)).collect()
}

/// `T` itself, for callers needing a single projective step.
pub fn skew_step(c: &CocycleFn, x: ProjPoint) -> ProjPoint {
    step(c, x)
}
