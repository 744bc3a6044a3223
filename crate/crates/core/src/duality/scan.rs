use rayon::prelude::*;
use serde::Serialize;

use super::{
    build_w, decay_fit, default_window, dual_section, eigenpair_near, rotation_residual, ConjugacyW, DecayFit,
    DualEigenvector, DualityError,
};
use crate::cocycle::schrodinger;
use crate::trig::TrigPoly;

#[derive(Debug, Clone)]
pub struct DualityConfig {
    pub potential: TrigPoly,
    pub alpha: f64,
    pub half_width: usize,
    pub e0: f64,
    /// Fixed phase; when absent `theta_grid` phases in `[0, 1/2]` are scanned.
    pub theta: Option<f64>,
    pub theta_grid: usize,
    /// Window shrink factor: the block uses `⌊K / c0⌋ + 1` coefficients.
    pub c0: f64,
    pub x_grid: usize,
}

impl DualityConfig {
    pub fn almost_mathieu(lambda: f64, alpha: f64, half_width: usize) -> Self {
        DualityConfig {
            potential: TrigPoly::cosine(lambda),
            alpha,
            half_width,
            e0: 0.0,
            theta: None,
            theta_grid: 201,
            c0: 4.0,
            x_grid: 1024,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DualityOutcome {
    pub eigen: DualEigenvector,
    pub w: ConjugacyW,
    pub residual: f64,
    pub decay: DecayFit,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualitySummary {
    #[serde(rename = "E")]
    pub energy: f64,
    pub theta: f64,
    pub sigma: i8,
    pub residual: f64,
    #[serde(rename = "detFloor")]
    pub det_floor: f64,
    #[serde(rename = "decaySlope")]
    pub decay_slope: f64,
    pub normalized_at_origin: bool,
    pub h_sup: f64,
}

impl DualityOutcome {
    pub fn summary(&self) -> DualitySummary {
        DualitySummary {
            energy: self.eigen.energy,
            theta: self.eigen.theta,
            sigma: self.w.sigma,
            residual: self.residual,
            det_floor: self.w.det_floor,
            decay_slope: self.decay.slope,
            normalized_at_origin: self.eigen.normalized_at_origin,
            h_sup: self.w.block.h_sup,
        }
    }
}

/// Full pipeline at one phase: section, eigenpair near `e0`, window, `W`, residual.
pub fn duality_at(cfg: &DualityConfig, theta: f64) -> Result<DualityOutcome, DualityError> {
    let s = dual_section(&cfg.potential, cfg.alpha, theta, cfg.half_width);
    let eigen = eigenpair_near(&s, cfg.e0)?;
    let (lo, hi) = default_window(cfg.half_width, cfg.c0);
    let w = build_w(&eigen, lo, hi, cfg.x_grid)?;
    let c = schrodinger(cfg.alpha, cfg.potential.clone(), eigen.energy);
    let residual = rotation_residual(&c, &w, cfg.x_grid);
    let decay = decay_fit(&eigen, ((hi - lo) / 4).max(1) as usize);
    Ok(DualityOutcome { eigen, w, residual, decay })
}

/// Runs at the configured phase or returns the scanned phase with least residual.
pub fn run_duality(cfg: &DualityConfig) -> Result<DualityOutcome, DualityError> {
    if let Some(t) = cfg.theta {
        return duality_at(cfg, t);
    }
    let n = cfg.theta_grid.max(2);
    let thetas: Vec<f64> = (0..n).map(|j| 0.5 * j as f64 / (n - 1) as f64).collect();
    let results: Vec<Result<DualityOutcome, DualityError>> = thetas.par_iter().map(|&t| duality_at(cfg, t)).collect();
    let mut best: Option<DualityOutcome> = None;
    let mut last_err = None;
    for r in results {
        match r {
            Ok(o) if o.residual.is_finite() => {
                if best.as_ref().is_none_or(|b| o.residual < b.residual) {
                    best = Some(o);
                }
            }
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(DualityError::NoConvergence { energy: cfg.e0 }))
}
