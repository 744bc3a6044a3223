//! `cocycle-lab`: command-line access to the cocycle-core numerics.

mod arith;
mod dynamics;
mod experiments;
mod exit;
mod kam;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "cocycle-lab", version, about = "Numerics for quasiperiodic SL(2,R) cocycles")]
struct Cli {
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Continued-fraction expansion and bridge selection.
    Cf(arith::CfArgs),
    /// Möbius sieve, Mertens sums, Dirichlet characters, decomposition trials.
    Mobius(arith::MobiusArgs),
    /// Projective orbit of a cocycle as CSV (n, theta, phi).
    Orbit(dynamics::OrbitArgs),
    /// Lyapunov exponent estimates, optionally over an energy grid.
    Lyapunov(dynamics::LyapunovArgs),
    /// Invariant cone-field test for uniform hyperbolicity.
    Uhtest(dynamics::UhArgs),
    /// Dual-operator eigenvector and conjugacy to a rotation.
    Duality(dynamics::DualityArgs),
    /// One KAM reducibility step on a linear system over the 2-torus.
    Kam(kam::KamArgs),
    /// Bowen-metric covering numbers against n^tau.
    Complexity(dynamics::ComplexityArgs),
    /// Möbius-weighted correlation sums along an orbit.
    Correlate(experiments::CorrelateArgs),
    /// Regenerate CSV summaries from stored result records.
    Report(experiments::ReportArgs),
}

/// Frequency flag shared by several subcommands.
#[derive(Args, Debug, Clone)]
pub struct AlphaArg {
    /// `golden`, `silver`, `surd:p,d,q`, `rat:n/d`, `cf:a1,a2,...`, `f64:x` or a decimal.
    #[arg(long, default_value = "golden")]
    pub alpha: String,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let out = output::Sink::new(cli.out.as_deref());
    let result = match cli.command {
        Command::Cf(a) => arith::cf(a, out),
        Command::Mobius(a) => arith::mobius(a, out),
        Command::Orbit(a) => dynamics::orbit(a, out),
        Command::Lyapunov(a) => dynamics::lyapunov(a, out),
        Command::Uhtest(a) => dynamics::uhtest(a, out),
        Command::Duality(a) => dynamics::duality(a, out),
        Command::Kam(a) => kam::kam(a, out),
        Command::Complexity(a) => dynamics::complexity(a, out),
        Command::Correlate(a) => experiments::correlate(a, out),
        Command::Report(a) => experiments::report(a, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::code(&e))
        }
    }
}
