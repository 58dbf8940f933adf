//! `hrv`: command line front end for the detection and risk pipeline.
//!
//! Exit status is 0 on success, 1 on a usage error and 2 on a data error.

mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use args::UsageError;

#[derive(Parser)]
#[command(name = "hrv", version, about = "Detect hidden regular variation in bivariate heavy-tailed data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a sample from one of the reference models.
    Simulate(commands::SimulateArgs),
    /// Hill estimates of the tail index.
    Hill(commands::TailArgs),
    /// Hill estimates on the `k = ceil(n^theta)` scale.
    Althill(commands::AltHillArgs),
    /// QQ-plot slope estimates of the tail index.
    Qq(commands::TailArgs),
    /// Hillish statistics for `(xi, eta)` and `(xi, -eta)`.
    Hillish(commands::HillishArgs),
    /// Diamond-plot angles of the largest L1 norms.
    Diamond(commands::DiamondArgs),
    /// Fit a wedge from quantiles of the largest angles.
    WedgeFit(commands::WedgeFitArgs),
    /// Full detection pipeline producing a JSON report.
    HrvDetect(commands::DetectArgs),
    /// Estimate `P(X2 - c·X1 > x)` under hidden regular variation.
    Risk(commands::RiskArgs),
    /// Replicated comparison of risk estimates with the closed form.
    RatioStudy(commands::RatioStudyArgs),
    /// Out- and in-degrees from a directed edge list.
    Degrees(commands::DegreesArgs),
    /// Returns from one or two price series.
    Returns(commands::ReturnsArgs),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Hill(a) => commands::hill(a, commands::TailEstimator::Hill),
        Command::Althill(a) => commands::althill(a),
        Command::Qq(a) => commands::hill(a, commands::TailEstimator::Qq),
        Command::Hillish(a) => commands::hillish(a),
        Command::Diamond(a) => commands::diamond(a),
        Command::WedgeFit(a) => commands::wedge_fit(a),
        Command::HrvDetect(a) => commands::hrv_detect(a),
        Command::Risk(a) => commands::risk(a),
        Command::RatioStudy(a) => commands::ratio_study(a),
        Command::Degrees(a) => commands::degrees(a),
        Command::Returns(a) => commands::returns(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
