//! `lcoupler`: sweeps, benchmarks and Bell tomography from the command line.

mod commands;
mod manifest;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lcoupler_core::pulses::Method;
use lcoupler_core::tomography::BellVariant;

#[derive(Parser, Debug)]
#[command(name = "lcoupler", version, about = "Remote state transfer and benchmarking simulator")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
pub struct Common {
    /// Device config JSON; built-in defaults when absent.
    #[arg(long, global = true, env = "LCOUPLER_CONFIG")]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Transfer populations over a (g, T) grid.
    Sweep(SweepArgs),
    /// Network benchmarking of the transfer.
    Nb(BenchArgs),
    /// Two-qubit randomized benchmarking on the data qubits.
    Rb(RbArgs),
    /// Bell-state preparation and two-qubit tomography.
    Bell(BellArgs),
    /// Gate list with start times for a named circuit.
    Circuit(CircuitArgs),
    /// Sampled transfer controls.
    Schedule(ScheduleArgs),
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    /// Coupling grid `start:stop:count` in Hz.
    #[arg(long, value_parser = parse_grid, default_value = "1e6:4e6:16")]
    pub g: Grid,
    /// Sweep-time grid `start:stop:count` in seconds.
    #[arg(long = "T", value_parser = parse_grid, default_value = "50e-9:400e-9:16")]
    pub t: Grid,
    /// Include decay and dephasing.
    #[arg(long)]
    pub lossy: bool,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Comma-separated sequence lengths.
    #[arg(long, value_delimiter = ',')]
    pub lengths: Option<Vec<usize>>,
    #[arg(long, default_value_t = 30)]
    pub seeds: usize,
    #[arg(long, default_value_t = 1000)]
    pub shots: u64,
    /// Ideal gates and readout.
    #[arg(long)]
    pub noiseless: bool,
    /// Pulse method whose simulated channel models the transfer.
    #[arg(long, value_parser = parse_method, default_value = "satd")]
    pub transfer: Method,
}

#[derive(Args, Debug)]
pub struct RbArgs {
    #[command(flatten)]
    pub bench: BenchArgs,
    #[arg(long)]
    pub interleave: Option<Interleave>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Interleave {
    RemoteCnot,
}

#[derive(Args, Debug)]
pub struct BellArgs {
    #[arg(long, value_parser = parse_variant)]
    pub variant: BellVariant,
    #[arg(long)]
    pub noiseless: bool,
    /// Shots per measurement setting; exact expectation values when absent.
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long, value_parser = parse_method, default_value = "satd")]
    pub transfer: Method,
    /// Skip inverting the readout confusion before reconstruction.
    #[arg(long)]
    pub raw_readout: bool,
}

#[derive(Args, Debug)]
pub struct CircuitArgs {
    /// `remote-cnot`, `remote-cnot-reverse` or `bell-<variant>`.
    pub name: String,
}

#[derive(Args, Debug)]
pub struct ScheduleArgs {
    #[arg(long, value_parser = parse_method, default_value = "satd")]
    pub method: Method,
    /// Run the transfer from L2 to L1.
    #[arg(long)]
    pub reverse: bool,
}

fn parse_method(s: &str) -> Result<Method, String> {
    Method::parse(s).ok_or_else(|| format!("unknown method `{s}` (expected satd or stirap)"))
}

fn parse_variant(s: &str) -> Result<BellVariant, String> {
    BellVariant::parse(s).ok_or_else(|| {
        format!("unknown variant `{s}` (expected lqubit-sqrt, data-sqrt or data-full)")
    })
}

/// Evenly spaced inclusive grid.
#[derive(Clone, Debug)]
pub struct Grid(pub Vec<f64>);

/// `start:stop:count`.
fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(format!("grid `{s}` is not start:stop:count"));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    let (a, b) = (num(a)?, num(b)?);
    let n: usize = n.trim().parse().map_err(|e| format!("`{n}`: {e}"))?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(format!("grid `{s}` needs a positive count and finite bounds"));
    }
    if n == 1 {
        return Ok(Grid(vec![a]));
    }
    Ok(Grid((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(a) => commands::sweep(&cli.common, a),
        Command::Nb(a) => commands::nb(&cli.common, a),
        Command::Rb(a) => commands::rb(&cli.common, a),
        Command::Bell(a) => commands::bell(&cli.common, a),
        Command::Circuit(a) => commands::circuit(&cli.common, a),
        Command::Schedule(a) => commands::schedule(&cli.common, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_inclusive() {
        let g = parse_grid("1e6:4e6:4").unwrap();
        assert_eq!(g.0, vec![1e6, 2e6, 3e6, 4e6]);
        assert_eq!(parse_grid("5:9:1").unwrap().0, vec![5.0]);
    }

    #[test]
    fn grid_rejects_malformed() {
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("1:2:0").is_err());
        assert!(parse_grid("a:2:3").is_err());
    }

    #[test]
    fn cli_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
