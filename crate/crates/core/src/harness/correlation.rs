use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ExperimentConfig, HarnessError, Weights};
use crate::cocycle::{parabolic_orbit, CocycleFn, CocycleMap, ProjPoint};
use crate::mobius::{MobiusSegments, MobiusTable, DEFAULT_SIEVE_BUDGET};

/// Terms per parallel partial sum.
const BLOCK: usize = 4096;
/// Terms generated per sequential orbit chunk.
const CHUNK: usize = 1 << 20;

/// Average at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckpointAvg {
    pub n: u64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

impl CheckpointAvg {
    fn new(n: u64, sum: Complex64) -> Self {
        let avg = sum / n as f64;
        CheckpointAvg { n, re: avg.re, im: avg.im, abs: avg.norm() }
    }
}

/// A persisted experiment outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub start: ProjPoint,
    pub checkpoints: Vec<CheckpointAvg>,
    pub abs_final: f64,
    /// Least-squares slope of `ln |avg|` against `ln N` over checkpoints `N >= 16`.
    pub decay_slope: Option<f64>,
    pub version: String,
    /// Hash of everything above; wall time is excluded.
    pub record_hash: String,
    pub wall_time_s: f64,
}

#[derive(Serialize)]
struct Hashed<'a> {
    config_hash: &'a str,
    config: &'a ExperimentConfig,
    start: &'a ProjPoint,
    checkpoints: &'a [CheckpointAvg],
    abs_final: f64,
    decay_slope: Option<f64>,
    version: &'a str,
}

impl ResultRecord {
    pub fn compute_hash(&self) -> String {
        let mut id = self.config.clone();
        id.workers = 1;
        id.output = None;
        let h = Hashed {
            config_hash: &self.config_hash,
            config: &id,
            start: &self.start,
            checkpoints: &self.checkpoints,
            abs_final: self.abs_final,
            decay_slope: self.decay_slope,
            version: &self.version,
        };
        hex::encode(Sha256::digest(serde_json::to_vec(&h).expect("record serializes")))
    }

    fn finish(config: &ExperimentConfig, start: ProjPoint, checkpoints: Vec<CheckpointAvg>, wall: f64) -> Self {
        let abs_final = checkpoints.last().map_or(0.0, |c| c.abs);
        let mut r = ResultRecord {
            config_hash: config.hash(),
            config: config.clone(),
            start,
            decay_slope: decay_slope(&checkpoints),
            checkpoints,
            abs_final,
            version: env!("CARGO_PKG_VERSION").to_string(),
            record_hash: String::new(),
            wall_time_s: wall,
        };
        r.record_hash = r.compute_hash();
        r
    }
}

fn decay_slope(cps: &[CheckpointAvg]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        cps.iter().filter(|c| c.n >= 16 && c.abs > 0.0).map(|c| ((c.n as f64).ln(), c.abs.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `e^{2πi(ι₁θ + 2ι₂φ)}` with the direction given as a vector.
pub fn observable(iota1: i64, iota2: i64, theta: f64, dir: [f64; 2]) -> Complex64 {
    let r = dir[0].hypot(dir[1]);
    let z = Complex64::new(dir[0] / r, dir[1] / r);
    Complex64::from_polar(1.0, 2.0 * PI * iota1 as f64 * (theta - theta.floor())) * z.powi(2 * iota2 as i32)
}

/// Sequential orbit generator with per-step renormalization.
struct Orbit<'a> {
    c: &'a CocycleFn,
    theta0: f64,
    n: u64,
    v: [f64; 2],
}

impl Orbit<'_> {
    /// Advances to the next time and returns `(θ_n, v_n)`.
    fn advance(&mut self) -> (f64, [f64; 2]) {
        let theta = (self.theta0 + self.n as f64 * self.c.alpha).rem_euclid(1.0);
        let w = self.c.eval(theta).apply(self.v);
        let r = w[0].hypot(w[1]);
        self.v = [w[0] / r, w[1] / r];
        self.n += 1;
        ((self.theta0 + self.n as f64 * self.c.alpha).rem_euclid(1.0), self.v)
    }
}

enum MobiusSource<'a> {
    Table(&'a MobiusTable),
    Segments(MobiusSegments),
}

impl MobiusSource<'_> {
    fn block(&self, lo: u64, hi: u64) -> Vec<i8> {
        match self {
            MobiusSource::Table(t) => t.values()[lo as usize..hi as usize].to_vec(),
            MobiusSource::Segments(s) => s.block(lo, hi),
        }
    }
}

/// Averages `(1/N) Σ_{n<=N} w(n) f(Tⁿx₀)` at each checkpoint.
pub fn correlation_sum(cfg: &ExperimentConfig, mu: &MobiusTable) -> Result<ResultRecord, HarnessError> {
    if cfg.weights == Weights::Mobius && mu.bound() < cfg.n {
        return Err(HarnessError::InvalidParameter(format!("Möbius table ends at {}, need {}", mu.bound(), cfg.n)));
    }
    correlate(cfg, MobiusSource::Table(mu))
}

/// [`correlation_sum`] with the sieve chosen from the size of `N`:
/// one table up to the in-memory budget, segments beyond.
pub fn run(cfg: &ExperimentConfig) -> Result<ResultRecord, HarnessError> {
    cfg.validate()?;
    if cfg.n <= DEFAULT_SIEVE_BUDGET {
        let table = crate::mobius::sieve(cfg.n)?;
        correlate(cfg, MobiusSource::Table(&table))
    } else {
        correlate(cfg, MobiusSource::Segments(MobiusSegments::new(cfg.n, CHUNK as u64)))
    }
}

fn correlate(cfg: &ExperimentConfig, mu: MobiusSource<'_>) -> Result<ResultRecord, HarnessError> {
    let clock = Instant::now();
    let c = cfg.cocycle()?;
    let start = cfg.start();
    let schedule = cfg.checkpoint_schedule();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| HarnessError::InvalidParameter(e.to_string()))?;

    // f ≡ 1 against μ: exact integer partial sums.
    if cfg.iota1 == 0 && cfg.iota2 == 0 {
        let mut out = Vec::with_capacity(schedule.len());
        let mut acc: i64 = 0;
        let mut done = 0u64;
        for &cp in &schedule {
            acc += match cfg.weights {
                Weights::One => (cp - done) as i64,
                Weights::Mobius => mu.block(done + 1, cp + 1).iter().map(|&m| m as i64).sum::<i64>(),
            };
            done = cp;
            out.push(CheckpointAvg::new(cp, Complex64::new(acc as f64, 0.0)));
        }
        return Ok(ResultRecord::finish(cfg, start, out, clock.elapsed().as_secs_f64()));
    }

    let mut orbit = Orbit { c: &c, theta0: start.theta, n: 0, v: start.direction() };
    let mut out = Vec::with_capacity(schedule.len());
    let mut next_cp = schedule.iter().peekable();
    let mut total = Complex64::new(0.0, 0.0);
    let mut lo = 1u64;
    let mut vals: Vec<Complex64> = Vec::with_capacity(CHUNK);
    while lo <= cfg.n {
        let hi = (lo + CHUNK as u64).min(cfg.n + 1);
        vals.clear();
        for _ in lo..hi {
            let (theta, v) = orbit.advance();
            vals.push(observable(cfg.iota1, cfg.iota2, theta, v));
        }
        if cfg.weights == Weights::Mobius {
            let m = mu.block(lo, hi);
            for (x, &w) in vals.iter_mut().zip(&m) {
                *x *= w as f64;
            }
        }
        let sums: Vec<Complex64> = pool.install(|| vals.par_chunks(BLOCK).map(|b| b.iter().sum()).collect());
        for (bi, s) in sums.iter().enumerate() {
            let b_lo = lo + (bi * BLOCK) as u64;
            let b_hi = (b_lo + BLOCK as u64).min(hi);
            while let Some(&&cp) = next_cp.peek() {
                if cp >= b_hi {
                    break;
                }
                let part: Complex64 = vals[(b_lo - lo) as usize..=(cp - lo) as usize].iter().sum();
                out.push(CheckpointAvg::new(cp, total + part));
                next_cp.next();
            }
            total += s;
        }
        lo = hi;
    }
    Ok(ResultRecord::finish(cfg, start, out, clock.elapsed().as_secs_f64()))
}

/// Checkpoint averages from the closed-form orbit of a constant rotation or
/// parabolic cocycle, summed sequentially.
pub fn closed_form_sum(cfg: &ExperimentConfig, mu: &MobiusTable) -> Result<Vec<CheckpointAvg>, HarnessError> {
    let c = cfg.cocycle()?;
    let start = cfg.start();
    let phase: Box<dyn Fn(u64) -> f64> = match (&c.map, c.as_constant()) {
        (CocycleMap::Rotation { rho }, _) => {
            let rho = *rho;
            Box::new(move |n| start.phi + n as f64 * rho)
        }
        (_, Some(m)) if m.a == 1.0 && m.c == 0.0 && m.d == 1.0 => {
            let cc = m.b;
            Box::new(move |n| parabolic_orbit(cc, start.phi, n as i64))
        }
        _ => return Err(HarnessError::InvalidParameter("closed form needs a rotation or parabolic constant".into())),
    };
    let schedule = cfg.checkpoint_schedule();
    let mut out = Vec::with_capacity(schedule.len());
    let mut acc = Complex64::new(0.0, 0.0);
    let mut cp = schedule.iter().peekable();
    for n in 1..=cfg.n {
        let theta = (start.theta + n as f64 * c.alpha).rem_euclid(1.0);
        let f = Complex64::from_polar(1.0, 2.0 * PI * (cfg.iota1 as f64 * theta + 2.0 * cfg.iota2 as f64 * phase(n)));
        let w = match cfg.weights {
            Weights::One => 1.0,
            Weights::Mobius => mu.get(n) as f64,
        };
        acc += f * w;
        if cp.peek() == Some(&&n) {
            out.push(CheckpointAvg::new(n, acc));
            cp.next();
        }
    }
    Ok(out)
}
