//! `gelkde`: fit GEL-weighted density estimates on CSV data, run the Monte Carlo designs,
//! tabulate kernels and evaluate the relative-variance prediction.

mod data;
mod error;
mod fit;
mod kernels;
mod manifest;
mod predict;
mod replay;
mod simulate;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use gelkde::simulation::GridSpec;
use gelkde::CarrierFamily;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::manifest::{write_run, RunOutput};

#[derive(Debug, Parser)]
#[command(
    name = "gelkde",
    version,
    about = "Density and distribution estimation weighted by GEL implied probabilities"
)]
struct Cli {
    /// Worker threads; defaults to the available parallelism. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Fit the transformation model to y,x data and estimate the residual density and cdf.
    Fit(fit::FitArgs),
    /// Run a Monte Carlo scenario.
    Simulate(simulate::SimulateArgs),
    /// Tabulate the Gaussian-based kernels and their functionals.
    Kernels(kernels::KernelsArgs),
    /// Predicted relative integrated variance of the feasible density estimator.
    PredictIvar(predict::PredictArgs),
    /// Re-run a recorded manifest and compare artifact hashes.
    Replay(replay::ReplayArgs),
}

impl Command {
    fn out(&self) -> Option<&Path> {
        match self {
            Command::Fit(a) => Some(&a.out),
            Command::Simulate(a) => Some(&a.out),
            Command::Kernels(a) => Some(&a.out),
            Command::PredictIvar(a) => a.out.as_deref(),
            Command::Replay(a) => Some(&a.out),
        }
    }

    /// Resolve input paths so that the recorded command runs from any directory.
    fn absolutized(mut self) -> CliResult<Self> {
        let abs = |p: &mut PathBuf| -> CliResult<()> {
            *p = std::fs::canonicalize(&*p)
                .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            Ok(())
        };
        match &mut self {
            Command::Fit(a) => abs(&mut a.input)?,
            Command::Simulate(a) => {
                if let Some(c) = a.config.as_mut() {
                    abs(c)?
                }
            }
            Command::PredictIvar(a) => {
                if let Some(c) = a.config.as_mut() {
                    abs(c)?
                }
            }
            Command::Kernels(_) | Command::Replay(_) => {}
        }
        Ok(self)
    }
}

/// Run a non-replay command; `out` receives diagnostics on failure.
pub fn execute(command: &Command, out: Option<&Path>) -> CliResult<RunOutput> {
    match command {
        Command::Fit(a) => fit::run(a, out),
        Command::Simulate(a) => simulate::run(a),
        Command::Kernels(a) => kernels::run(a),
        Command::PredictIvar(a) => predict::run(a),
        Command::Replay(_) => Err(CliError::Input("a manifest cannot record a replay".into())),
    }
}

pub fn parse_family(s: &str) -> Result<CarrierFamily, String> {
    CarrierFamily::parse(s).map_err(|e| e.to_string())
}

/// `lo,hi,points`
pub fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || format!("grid must be 'lo,hi,points' with lo < hi and points >= 2, got '{s}'");
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let points: usize = parts[2].parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi && points >= 2) {
        return Err(bad());
    }
    Ok(GridSpec { lo, hi, points })
}

fn dispatch(command: Command) -> CliResult<()> {
    if let Command::Replay(a) = command {
        return replay::run(&a);
    }
    let out = command.out().map(Path::to_path_buf);
    let command = command.absolutized()?;
    let run = execute(&command, out.as_deref())?;
    if let Some(out) = out {
        write_run(&out, &command, &run)?;
        eprintln!(
            "wrote {} artifacts and the manifest to {}",
            run.artifacts.len(),
            out.display()
        );
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            std::process::exit(2);
        }
    };
    let code = match pool.install(|| dispatch(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(
            parse_grid("-5, 5, 101").unwrap(),
            GridSpec {
                lo: -5.0,
                hi: 5.0,
                points: 101
            }
        );
        for bad in ["1,0,10", "0,1,1", "0,1", "a,1,3", "0,inf,3"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn family_parsing() {
        assert_eq!(parse_family("CUE").unwrap(), CarrierFamily::Cue);
        assert_eq!(
            parse_family("cr:-0.5").unwrap(),
            CarrierFamily::CressieRead(-0.5)
        );
        assert!(parse_family("gmm").is_err());
    }

    #[test]
    fn recorded_commands_round_trip() {
        let cli = Cli::try_parse_from([
            "gelkde", "simulate", "--out", "o", "--seed", "3", "--dg", "5",
        ])
        .unwrap();
        let text = serde_json::to_string(&cli.command).unwrap();
        assert!(!text.contains("\"out\""));
        let back: Command = serde_json::from_str(&text).unwrap();
        match back {
            Command::Simulate(a) => assert_eq!((a.seed, a.dg, a.n), (Some(3), Some(5), None)),
            other => panic!("{other:?}"),
        }
    }
}
