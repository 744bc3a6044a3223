use anyhow::Context;
use clap::Args;
use cocycle_core::cocycle::{lyapunov as estimate_lyapunov, parse_cocycle, uh_cone_test, ConeVerdict, CocycleFn, ProjPoint};
use cocycle_core::complexity::{orbit as proj_orbit, subpoly_profile, EmpiricalMeasure};
use cocycle_core::duality::{run_duality, DualityConfig};
use serde::Serialize;

use crate::arith::parse_alpha;
use crate::exit::config;
use crate::output::Sink;
use crate::AlphaArg;

/// Cocycle and frequency flags shared by the dynamical subcommands.
#[derive(Args, Debug, Clone)]
pub struct SystemArgs {
    /// `amo:lambda=L,E=E`, `schrodinger:v=v0;v1;..,E=E`, `rotation:rho=R`,
    /// `parabolic:c=C` or `constant:a,b,c,d`.
    #[arg(long)]
    system: String,
    #[command(flatten)]
    alpha: AlphaArg,
}

impl SystemArgs {
    fn alpha(&self) -> anyhow::Result<f64> {
        Ok(parse_alpha(&self.alpha.alpha)?.approx())
    }

    fn cocycle(&self) -> anyhow::Result<CocycleFn> {
        let c = parse_cocycle(self.alpha()?, &self.system)?;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args, Debug)]
pub struct OrbitArgs {
    #[command(flatten)]
    sys: SystemArgs,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Direction angle as a fraction of a full turn.
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    #[arg(long, default_value_t = 1000)]
    n: usize,
}

pub fn orbit(args: OrbitArgs, out: Sink) -> anyhow::Result<()> {
    let c = args.sys.cocycle()?;
    let pts = proj_orbit(&c, ProjPoint::new(args.theta, args.phi), args.n + 1);
    out.csv(&["n", "theta", "phi"], pts.iter().enumerate().map(|(i, p)| (i, p.theta, p.phi)))
}

#[derive(Args, Debug)]
pub struct LyapunovArgs {
    #[command(flatten)]
    sys: SystemArgs,
    /// Energy grid `lo:hi:count`; overrides any `E=` field of the system.
    #[arg(long, allow_hyphen_values = true)]
    energies: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 16)]
    phases: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn parse_grid(s: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || config(format!("energy grid must be lo:hi:count, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !(lo <= hi) {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

/// Replaces or appends the `E=` field of a system specification.
fn with_energy(spec: &str, e: f64) -> String {
    let (kind, body) = spec.split_once(':').unwrap_or((spec, ""));
    let mut fields: Vec<String> =
        body.split(',').filter(|f| !f.trim().is_empty() && !f.trim().starts_with("E=")).map(str::to_string).collect();
    fields.push(format!("E={e}"));
    format!("{kind}:{}", fields.join(","))
}

fn lyapunov_rows(args: &LyapunovArgs) -> anyhow::Result<Vec<(f64, f64, f64)>> {
    let alpha = args.sys.alpha()?;
    let specs: Vec<(f64, String)> = match &args.energies {
        Some(g) => parse_grid(g)?.into_iter().map(|e| (e, with_energy(&args.sys.system, e))).collect(),
        None => vec![(f64::NAN, args.sys.system.clone())],
    };
    let mut rows = Vec::with_capacity(specs.len());
    for (e, spec) in specs {
        let c = parse_cocycle(alpha, &spec)?;
        let est = estimate_lyapunov(&c, args.n, args.phases, args.seed);
        rows.push((e, est.value, est.dispersion));
    }
    Ok(rows)
}

pub fn lyapunov(args: LyapunovArgs, out: Sink) -> anyhow::Result<()> {
    let rows = lyapunov_rows(&args)?;
    out.csv(&["E", "L", "dispersion"], rows)
}

#[derive(Args, Debug)]
pub struct UhArgs {
    #[command(flatten)]
    sys: SystemArgs,
    /// Sample points on the circle.
    #[arg(long, default_value_t = 512)]
    grid: usize,
    /// Forward iterations used to locate the unstable axis.
    #[arg(long, default_value_t = 200)]
    iters: usize,
}

#[derive(Serialize)]
struct UhReport {
    hyperbolic: bool,
    aperture: Option<f64>,
    min_margin: Option<f64>,
    reason: Option<String>,
}

pub fn uhtest(args: UhArgs, out: Sink) -> anyhow::Result<()> {
    let c = args.sys.cocycle()?;
    let report = match uh_cone_test(&c, args.grid, args.iters)? {
        ConeVerdict::Hyperbolic(w) => {
            UhReport { hyperbolic: true, aperture: Some(w.aperture), min_margin: Some(w.min_margin), reason: None }
        }
        ConeVerdict::NotHyperbolic(r) => UhReport { hyperbolic: false, aperture: None, min_margin: None, reason: Some(r) },
    };
    out.json(&report)
}

#[derive(Args, Debug)]
pub struct DualityArgs {
    /// Coupling of the almost Mathieu potential `2λ cos 2πx`.
    #[arg(long)]
    lambda: f64,
    #[command(flatten)]
    alpha: AlphaArg,
    /// Fixed phase; otherwise phases in [0, 1/2] are scanned.
    #[arg(long, conflicts_with = "theta_scan")]
    theta: Option<f64>,
    /// Number of scanned phases.
    #[arg(long)]
    theta_scan: Option<usize>,
    /// Half-width of the truncated dual operator.
    #[arg(long = "K", default_value_t = 64)]
    half_width: usize,
    /// Target energy for the eigenpair.
    #[arg(long = "E0", default_value_t = 0.0)]
    e0: f64,
    /// Write the eigenvector coefficients `k, re, im` to this CSV file.
    #[arg(long)]
    coeffs: Option<std::path::PathBuf>,
}

pub fn duality(args: DualityArgs, out: Sink) -> anyhow::Result<()> {
    if args.lambda <= 0.0 || args.lambda >= 1.0 {
        return Err(config("--lambda must lie in (0, 1)"));
    }
    let alpha = parse_alpha(&args.alpha.alpha)?.approx();
    let mut cfg = DualityConfig::almost_mathieu(args.lambda, alpha, args.half_width);
    cfg.e0 = args.e0;
    cfg.theta = args.theta;
    if let Some(n) = args.theta_scan {
        cfg.theta_grid = n;
    }
    let outcome = run_duality(&cfg)?;
    if let Some(path) = &args.coeffs {
        let k = outcome.eigen.half_width as i64;
        let rows = (-k..=k).map(|j| {
            let v = outcome.eigen.coeff(j);
            (j, v.re, v.im)
        });
        Sink::new(Some(path)).csv(&["k", "re", "im"], rows).with_context(|| format!("writing {}", path.display()))?;
    }
    out.json(&outcome.summary())
}

#[derive(Args, Debug)]
pub struct ComplexityArgs {
    #[command(flatten)]
    sys: SystemArgs,
    /// Times n at which the covering number is computed.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32")]
    n_list: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    /// Orbit samples in the empirical measure.
    #[arg(long, default_value_t = 800)]
    samples: usize,
    #[arg(long, default_value_t = 100)]
    burn_in: usize,
    #[arg(long, default_value_t = 0.1)]
    theta: f64,
    #[arg(long, default_value_t = 0.05)]
    phi: f64,
}

pub fn complexity(args: ComplexityArgs, out: Sink) -> anyhow::Result<()> {
    if !(args.eps > 0.0 && args.eps < 1.0) {
        return Err(config("--eps must lie in (0, 1)"));
    }
    let c = args.sys.cocycle()?;
    let mu = EmpiricalMeasure::birkhoff(&c, ProjPoint::new(args.theta, args.phi), args.burn_in, args.samples)?;
    let p = subpoly_profile(&c, &mu, &args.n_list, args.eps, args.tau)?;
    log::info!("liminf proxy {:.4}, isometric {}", p.liminf_proxy, p.isometric);
    out.csv(&["n", "Sn", "Sn/n^tau"], p.ns.iter().zip(&p.sn).zip(&p.ratios).map(|((n, s), r)| (*n, *s, *r)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_grid_endpoints() {
        assert_eq!(parse_grid("-1:1:3").unwrap(), vec![-1.0, 0.0, 1.0]);
        assert!(parse_grid("1:0:3").is_err());
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn energy_field_replaced() {
        assert_eq!(with_energy("amo:lambda=2,E=0.3", 1.5), "amo:lambda=2,E=1.5");
        assert_eq!(with_energy("amo:lambda=2", -1.0), "amo:lambda=2,E=-1");
    }
}
