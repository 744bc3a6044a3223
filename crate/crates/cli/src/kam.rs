use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, ValueEnum};
use cocycle_core::arithmetic::{expand, select_bridges};
use cocycle_core::kam::{kam_step, ConstantPart, Fourier2, KamParams, LinearSystem, RegimePolicy};
use serde::Serialize;

use crate::arith::parse_alpha;
use crate::exit::config;
use crate::output::Sink;
use crate::AlphaArg;

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Policy {
    /// Abort on any regime or postcondition violation.
    Enforce,
    /// Record violations in the report and continue.
    Report,
}

#[derive(Args, Debug)]
pub struct KamArgs {
    /// Constant part: `elliptic:rho=R` or `parabolic:c=C`.
    #[arg(long)]
    system: String,
    /// JSON list of modes `{"k1", "k2", "re": [[..],[..]], "im": [[..],[..]]}`.
    #[arg(long)]
    modes: PathBuf,
    #[command(flatten)]
    alpha: AlphaArg,
    /// Analyticity radius of the input perturbation.
    #[arg(long)]
    h: f64,
    /// Growth exponent of the bridge chain.
    #[arg(long, default_value_t = 3.0)]
    cal_a: f64,
    /// Position in the bridge chain.
    #[arg(long, default_value_t = 1)]
    iota: usize,
    /// Partial quotients to expand before selecting the chain.
    #[arg(long, default_value_t = 60)]
    depth: usize,
    #[arg(long, default_value_t = 1e-6)]
    verify_tol: f64,
    #[arg(long, value_enum, default_value = "enforce")]
    policy: Policy,
    /// Resonance threshold; defaults to the fourth root of the perturbation size.
    #[arg(long)]
    eta: Option<f64>,
    /// Add the conjugate modes so the perturbation is real-valued.
    #[arg(long)]
    real: bool,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Serialize)]
struct KamOutput<'a> {
    report: &'a cocycle_core::kam::KamReport,
    system: &'a LinearSystem,
}

fn parse_constant(s: &str) -> anyhow::Result<ConstantPart> {
    let bad = || config(format!("--system must be elliptic:rho=R or parabolic:c=C, got {s:?}"));
    let (kind, body) = s.split_once(':').ok_or_else(bad)?;
    let (key, value) = body.split_once('=').ok_or_else(bad)?;
    let v: f64 = value.trim().parse().map_err(|_| bad())?;
    match (kind.trim(), key.trim()) {
        ("elliptic", "rho") => Ok(ConstantPart::Elliptic { rho: v }),
        ("parabolic", "c") => Ok(ConstantPart::Parabolic { c: v }),
        _ => Err(bad()),
    }
}

pub fn kam(args: KamArgs, out: Sink) -> anyhow::Result<()> {
    if !(args.h > 0.0) {
        return Err(config("--h must be positive"));
    }
    let constant = parse_constant(&args.system)?;
    let text = std::fs::read_to_string(&args.modes).with_context(|| format!("reading {}", args.modes.display()))?;
    let mut f: Fourier2 = serde_json::from_str(&text).with_context(|| format!("parsing {}", args.modes.display()))?;
    if args.real {
        f.symmetrize();
    }
    let spec = parse_alpha(&args.alpha.alpha)?;
    let cf = expand(&spec, args.depth)?;
    let chain = select_bridges(&cf, args.cal_a, args.iota + 2)?;
    let sys = LinearSystem::new(constant, f, args.h, cf.alpha());
    let params = KamParams {
        cal_a: args.cal_a,
        iota: args.iota,
        eta: args.eta,
        policy: match args.policy {
            Policy::Enforce => RegimePolicy::Enforce,
            Policy::Report => RegimePolicy::Report,
        },
        verify_tol: args.verify_tol,
        seed: args.seed,
        ..KamParams::default()
    };
    let step = kam_step(&sys, &cf, &chain, &params)?;
    for v in &step.report.violations {
        log::warn!("{v}");
    }
    out.json(&KamOutput { report: &step.report, system: &step.system })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_part_forms() {
        assert_eq!(parse_constant("elliptic:rho=0.25").unwrap(), ConstantPart::Elliptic { rho: 0.25 });
        assert_eq!(parse_constant("parabolic:c=1e-3").unwrap(), ConstantPart::Parabolic { c: 1e-3 });
        assert!(parse_constant("hyperbolic:lambda=2").is_err());
    }
}
