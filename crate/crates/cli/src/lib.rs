//! Command-line front end for `phasekit`.
//!
//! Each subcommand resolves a [`config::RunConfig`], produces an
//! [`output::Table`] and writes it as CSV or JSON. Exit status 2 marks a
//! configuration error and 3 a solver failure.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod sweep;

use clap::{Parser, Subcommand};

use phasekit::gauge::GaugeFunction;
use phasekit::variational::{AdjointSign, Perturbation};

use config::{resolve, CommonArgs};
use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "phasekit", version, about = "Scattering phase shifts by phase-amplitude methods")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// One record per (method, energy).
    Phaseshift(CommonArgs),
    /// Every method side by side, with the closed form where one exists.
    Compare(CommonArgs),
    /// Milne amplitude, phase and (f, g) on the solver grid.
    Milne(CommonArgs),
    /// Partitioned phase function, amplitude and F residual.
    Vpa(CommonArgs),
    /// Error order of the adjoint-corrected estimate.
    Variational {
        #[command(flatten)]
        common: CommonArgs,
        /// sine-ramp, quadratic, saturating or zero; repeatable.
        #[arg(long = "shape", value_delimiter = ',')]
        shapes: Vec<String>,
        /// Perturbation sizes.
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        /// Use the sign-flipped adjoint (control).
        #[arg(long)]
        flipped: bool,
    },
    /// Residuals of the gauge family.
    GaugeCheck {
        #[command(flatten)]
        common: CommonArgs,
        /// zero, milne-inverse-square, scaled:<c> or damped-sine; repeatable.
        #[arg(long = "beta", value_delimiter = ',')]
        betas: Vec<String>,
    },
    /// Median wall time per method over repeated sweeps.
    Bench {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = commands::MIN_REPEATS)]
        repeats: usize,
    },
}

/// Runs a parsed command line; notes for stderr are returned alongside.
pub fn run(cli: &Cli) -> CliResult<Vec<String>> {
    let mut notes = Vec::new();
    let (table, rc) = match &cli.command {
        Command::Phaseshift(a) => {
            let rc = resolve(a)?;
            let (t, skipped) = commands::phaseshift(&rc)?;
            notes = skipped;
            (t, rc)
        }
        Command::Compare(a) => {
            let rc = resolve(a)?;
            let (t, skipped) = commands::compare(&rc)?;
            notes = skipped;
            (t, rc)
        }
        Command::Milne(a) => {
            let rc = resolve(a)?;
            (commands::milne(&rc)?, rc)
        }
        Command::Vpa(a) => {
            let rc = resolve(a)?;
            (commands::vpa(&rc)?, rc)
        }
        Command::Variational { common, shapes, eps, flipped } => {
            let rc = resolve(common)?;
            let shapes = if shapes.is_empty() {
                Perturbation::SHAPES.to_vec()
            } else {
                shapes
                    .iter()
                    .map(|s| s.parse().map_err(|e: phasekit::Error| CliError::Config(format!("shape: {e}"))))
                    .collect::<CliResult<_>>()?
            };
            let eps = if eps.is_empty() { commands::DEFAULT_EPS.to_vec() } else { eps.clone() };
            if eps.len() < 2 || eps.iter().any(|&x| !(x > 0.0)) {
                return Err(CliError::Config("eps: need at least two positive values".into()));
            }
            let sign = if *flipped { AdjointSign::Flipped } else { AdjointSign::Correct };
            (commands::variational(&rc, &shapes, &eps, sign)?, rc)
        }
        Command::GaugeCheck { common, betas } => {
            let rc = resolve(common)?;
            let gauges = if betas.is_empty() {
                commands::default_gauges()
            } else {
                betas
                    .iter()
                    .map(|s| s.parse().map_err(|e: phasekit::Error| CliError::Config(format!("beta: {e}"))))
                    .collect::<CliResult<Vec<GaugeFunction<f64>>>>()?
            };
            (commands::gauge_check(&rc, &gauges)?, rc)
        }
        Command::Bench { common, repeats } => {
            let rc = resolve(common)?;
            (commands::bench(&rc, *repeats)?, rc)
        }
    };
    table.write(&rc)?;
    Ok(notes)
}
