use std::path::PathBuf;

use clap::Args;
use cocycle_core::arithmetic::expand;
use cocycle_core::harness::{parabolic_scenario, persist, report as build_report, run, ExperimentConfig, ParabolicConfig};
use cocycle_core::mobius::sieve;
use serde::Serialize;

use crate::arith::parse_alpha;
use crate::exit::config;
use crate::output::Sink;

#[derive(Args, Debug)]
pub struct CorrelateArgs {
    /// Flat key = value experiment file; flags below override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    iota1: Option<i64>,
    #[arg(long)]
    iota2: Option<i64>,
    #[arg(long)]
    theta0: Option<f64>,
    #[arg(long)]
    phi0: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use constant weights instead of the Möbius function.
    #[arg(long)]
    unweighted: bool,
    #[arg(long)]
    workers: Option<usize>,
    /// Persist the record under this directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Run the periodic-approximation scenario for `[[1, c], [0, 1]]` instead.
    #[arg(long, value_name = "C")]
    parabolic: Option<f64>,
    /// Escape threshold in radians (parabolic scenario).
    #[arg(long, default_value_t = 0.05)]
    eta_tilde: f64,
    /// Window length in periods (parabolic scenario).
    #[arg(long, default_value_t = 16)]
    periods: u64,
    /// First index of the window (parabolic scenario).
    #[arg(long, default_value_t = 1000)]
    start: u64,
    #[arg(long, default_value_t = 0.5)]
    beta_threshold: f64,
    #[arg(long, default_value_t = 400)]
    max_period: u64,
    /// Partial quotients searched for a Liouville scale.
    #[arg(long, default_value_t = 30)]
    depth: usize,
}

fn experiment(args: &CorrelateArgs) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => {
            let (Some(system), Some(alpha), Some(n)) = (&args.system, &args.alpha, args.n) else {
                return Err(config("either --config or all of --system, --alpha and --n are required"));
            };
            ExperimentConfig::new(system, alpha, n)
        }
    };
    if let Some(s) = &args.system {
        cfg.system = s.clone();
    }
    if let Some(a) = &args.alpha {
        cfg.alpha = a.clone();
    }
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = args.$field { cfg.$field = v; } )* };
    }
    set!(n, iota1, iota2, seed);
    if args.theta0.is_some() {
        cfg.theta0 = args.theta0;
    }
    if args.phi0.is_some() {
        cfg.phi0 = args.phi0;
    }
    if args.unweighted {
        cfg.weights = cocycle_core::harness::Weights::One;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if args.output.is_some() {
        cfg.output = args.output.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct CheckpointRow {
    #[serde(rename = "N")]
    n: u64,
    re_avg: f64,
    im_avg: f64,
    abs_avg: f64,
}

pub fn correlate(args: CorrelateArgs, out: Sink) -> anyhow::Result<()> {
    if let Some(c) = args.parabolic {
        return parabolic(&args, c, out);
    }
    let cfg = experiment(&args)?;
    let record = run(&cfg)?;
    if let Some(dir) = &cfg.output {
        let path = persist(&record, dir)?;
        eprintln!("stored {}", path.display());
    }
    log::info!("record {} in {:.3}s", record.record_hash, record.wall_time_s);
    out.csv(
        &["N", "re_avg", "im_avg", "abs_avg"],
        record.checkpoints.iter().map(|c| CheckpointRow { n: c.n, re_avg: c.re, im_avg: c.im, abs_avg: c.abs }),
    )
}

fn parabolic(args: &CorrelateArgs, c: f64, out: Sink) -> anyhow::Result<()> {
    let alpha = args.alpha.as_deref().unwrap_or("golden");
    let cf = expand(&parse_alpha(alpha)?, args.depth)?;
    let d = ParabolicConfig::default();
    let cfg = ParabolicConfig {
        c,
        iota1: args.iota1.unwrap_or(d.iota1),
        iota2: args.iota2.unwrap_or(d.iota2),
        theta0: args.theta0.unwrap_or(d.theta0),
        phi0: args.phi0.unwrap_or(d.phi0),
        eta_tilde: args.eta_tilde,
        periods: args.periods,
        start: args.start,
        beta_threshold: args.beta_threshold,
        max_period: args.max_period,
    };
    let mu = sieve(cfg.start + cfg.periods * cfg.max_period + 1)?;
    out.json(&parabolic_scenario(&cfg, &cf, &mu)?)
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Directory holding stored records and their manifest.
    #[arg(long)]
    dir: PathBuf,
}

pub fn report(args: ReportArgs, out: Sink) -> anyhow::Result<()> {
    let summary = build_report(&args.dir)?;
    for h in &summary.skipped {
        eprintln!("skipped {h}");
    }
    out.csv(
        &["hash", "system", "alpha", "iota1", "iota2", "n", "abs_final", "decay_slope"],
        summary.rows.iter().map(|r| {
            (&r.hash, &r.system, &r.alpha, r.iota1, r.iota2, r.n, r.abs_final, r.decay_slope)
        }),
    )
}
