use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::CocycleFn;
use crate::linalg::Mat2;

#[derive(Debug, Clone, Copy)]
pub struct LyapunovOptions {
    pub renormalize_every: usize,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        LyapunovOptions { renormalize_every: 32 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovEstimate {
    /// Mean over phases, clipped below at zero.
    pub value: f64,
    pub raw_mean: f64,
    /// Sample standard deviation across phases.
    pub dispersion: f64,
    pub per_phase: Vec<f64>,
}

/// `(1/N) ln ||A_N(x)||` averaged over stratified random phases.
pub fn lyapunov(c: &CocycleFn, n: usize, phases: usize, seed: u64) -> LyapunovEstimate {
    lyapunov_with(c, n, phases, seed, LyapunovOptions::default())
}

pub fn lyapunov_with(c: &CocycleFn, n: usize, phases: usize, seed: u64, opts: LyapunovOptions) -> LyapunovEstimate {
    assert!(n >= 1 && phases >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..phases).map(|j| (j as f64 + rng.gen::<f64>()) / phases as f64).collect();
    let per_phase: Vec<f64> = xs.par_iter().map(|&x| growth_rate(c, x, n, opts.renormalize_every)).collect();
    let mean = per_phase.iter().sum::<f64>() / phases as f64;
    let dispersion = if phases > 1 {
        (per_phase.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (phases - 1) as f64).sqrt()
    } else {
        0.0
    };
    LyapunovEstimate { value: mean.max(0.0), raw_mean: mean, dispersion, per_phase }
}

fn growth_rate(c: &CocycleFn, x: f64, n: usize, every: usize) -> f64 {
    let mut m = Mat2::identity();
    let mut log_acc = 0.0;
    for i in 0..n {
        m = c.eval(x + i as f64 * c.alpha) * m;
        if (i + 1) % every == 0 {
            let s = m.norm();
            log_acc += s.ln();
            m = m.scale(1.0 / s);
        }
    }
    (log_acc + m.norm().ln()) / n as f64
}
