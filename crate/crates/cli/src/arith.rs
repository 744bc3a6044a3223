use anyhow::Context;
use clap::{Args, ValueEnum};
use cocycle_core::arithmetic::{beta_estimate, expand, select_bridges, AlphaSpec, BridgeChain, ContinuedFraction};
use cocycle_core::mobius::{characters, decomposition_bound, mertens, sieve, CharacterRange, PeriodicSequence};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exit::config;
use crate::output::Sink;
use crate::AlphaArg;

#[derive(Copy, Clone, Debug, ValueEnum, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct CfArgs {
    #[command(flatten)]
    alpha: AlphaArg,
    /// Number of partial quotients.
    #[arg(long, default_value_t = 20)]
    depth: usize,
    /// Select a bridge chain with this growth exponent (at least 2).
    #[arg(long)]
    bridges: Option<f64>,
    /// Number of selections after the first chain element.
    #[arg(long, default_value_t = 3)]
    chain: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Serialize)]
struct CfRow {
    k: usize,
    a: String,
    p: String,
    q: String,
}

#[derive(Serialize)]
struct CfReport {
    alpha: String,
    value: f64,
    depth: usize,
    convergents: Vec<CfRow>,
    beta: Option<f64>,
    chain: Option<BridgeChain>,
}

pub fn parse_alpha(s: &str) -> anyhow::Result<AlphaSpec> {
    s.parse::<AlphaSpec>().map_err(|e| config(format!("--alpha {s}: {e}")))
}

fn rows(cf: &ContinuedFraction) -> Vec<CfRow> {
    (0..=cf.depth())
        .map(|k| CfRow { k, a: cf.a(k).to_string(), p: cf.p(k).to_string(), q: cf.q(k).to_string() })
        .collect()
}

pub fn cf(args: CfArgs, out: Sink) -> anyhow::Result<()> {
    let spec = parse_alpha(&args.alpha.alpha)?;
    let cf = expand(&spec, args.depth)?;
    let chain = match args.bridges {
        Some(a) => Some(select_bridges(&cf, a, args.chain)?),
        None => None,
    };
    match args.format {
        Format::Csv => {
            out.csv(&["k", "a", "p", "q"], rows(&cf))?;
            if let Some(ch) = &chain {
                let tags = ch.index.iter().enumerate().map(|(i, n)| {
                    let t = ch.tags.get(i);
                    (*n, t.map(|t| t.bridge), t.map(|t| t.jump))
                });
                eprintln!("chain (index, bridge, jump):");
                for (n, b, j) in tags {
                    eprintln!("{n},{},{}", fmt_opt(b), fmt_opt(j));
                }
            }
        }
        Format::Json => {
            let beta = if cf.depth() >= 2 { beta_estimate(&cf, cf.depth() - 1).ok() } else { None };
            out.json(&CfReport {
                alpha: spec.to_string(),
                value: cf.alpha(),
                depth: cf.depth(),
                convergents: rows(&cf),
                beta,
                chain,
            })?;
        }
    }
    Ok(())
}

fn fmt_opt(b: Option<bool>) -> String {
    b.map(|b| b.to_string()).unwrap_or_default()
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum RangeArg {
    /// Characters of conductor exactly Q/d.
    Primitive,
    /// All characters of modulus Q/d.
    All,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false, id = "mobius_mode")]
struct MobiusMode {
    /// Print n, mu(n) for n <= N.
    #[arg(long, value_name = "N")]
    sieve: Option<u64>,
    /// Print the Mertens sum M(N).
    #[arg(long, value_name = "N")]
    mertens: Option<u64>,
    /// List the Dirichlet characters modulo q.
    #[arg(long, value_name = "Q")]
    characters: Option<u64>,
    /// Compare both sides of the periodic decomposition inequality on random sequences.
    #[arg(long, value_name = "L,Q,M", value_delimiter = ',')]
    decomposition: Option<Vec<u64>>,
}

#[derive(Args, Debug)]
pub struct MobiusArgs {
    #[command(flatten)]
    mode: MobiusMode,
    /// Random sequences per decomposition run.
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "primitive")]
    range: RangeArg,
}

#[derive(Serialize)]
struct CharacterRow {
    index: usize,
    modulus: u64,
    order: u64,
    conductor: u64,
    principal: bool,
    primitive: bool,
    real: bool,
    values: Vec<(f64, f64)>,
}

#[derive(Serialize)]
struct TrialRow {
    trial: usize,
    lhs: f64,
    rhs: f64,
    holds: bool,
}

pub fn mobius(args: MobiusArgs, out: Sink) -> anyhow::Result<()> {
    let m = args.mode;
    if let Some(n) = m.sieve {
        let mu = sieve(n)?;
        return out.csv(&["n", "mu"], (1..=n).map(|k| (k, mu.get(k))));
    }
    if let Some(n) = m.mertens {
        let mu = sieve(n)?;
        return out.csv(&["N", "M"], [(n, mertens(&mu, n))]);
    }
    if let Some(q) = m.characters {
        if q == 0 {
            return Err(config("--characters needs q >= 1"));
        }
        let rows: Vec<_> = characters(q)
            .into_iter()
            .enumerate()
            .map(|(index, c)| CharacterRow {
                index,
                modulus: c.modulus,
                order: c.order,
                conductor: c.conductor,
                principal: c.principal,
                primitive: c.is_primitive(),
                real: c.is_real(),
                values: c.values().iter().map(|v| (v.re, v.im)).collect(),
            })
            .collect();
        return out.json(&rows);
    }
    let v = m.decomposition.context("no mode selected")?;
    if v.len() != 3 {
        return Err(config("--decomposition takes L,Q,M"));
    }
    let (l, q, len) = (v[0], v[1], v[2]);
    if q == 0 {
        return Err(config("--decomposition needs Q >= 1"));
    }
    let mu = sieve(l + len * q + 1)?;
    let range = match args.range {
        RangeArg::Primitive => CharacterRange::Primitive,
        RangeArg::All => CharacterRange::AllOfModulus,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut rows = Vec::with_capacity(args.trials);
    for trial in 0..args.trials {
        let values = (0..q).map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))).collect();
        let seq = PeriodicSequence::new(values)?;
        let (lhs, rhs) = decomposition_bound(l, q, len, &seq, &mu, range)?;
        rows.push(TrialRow { trial, lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-12) });
    }
    out.csv(&["trial", "lhs", "rhs", "holds"], rows)
}
