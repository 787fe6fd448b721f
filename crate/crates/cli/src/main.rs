//! `slope-lab`: tables, curves and the Cauchy coverage simulation as CSV.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};

use commands::{BernoulliEffArgs, CauchySimArgs, CheckArgs, CurvesArgs, Table1Args};
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "slope-lab", version, about, args_override_self = true)]
struct Cli {
    /// File of `key = value` lines supplying defaults for the subcommand's
    /// flags; flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Slopes and efficiencies of the Cauchy sample median.
    Table1(Table1Args),
    /// Lambda-efficiency of y, y(y-1) and y^2 for Bernoulli trials.
    BernoulliEff(BernoulliEffArgs),
    /// Standardized score curves, one per outcome.
    Curves(CurvesArgs),
    /// Coverage of Wald and likelihood-ratio intervals for the Cauchy location.
    CauchySim(CauchySimArgs),
    /// Numerical self-checks of the slope identities and invariances.
    Check(CheckArgs),
}

fn run(args: Vec<String>) -> CliResult<()> {
    let names: Vec<String> = Cli::command()
        .get_subcommands()
        .map(|c| c.get_name().to_string())
        .collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let args = config::merge_config(args, &names)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return Ok(());
        }
        Err(e) => {
            let msg = e.to_string();
            return Err(CliError::Usage(msg.trim_start_matches("error: ").trim_end().to_string()));
        }
    };
    match &cli.command {
        Command::Table1(a) => commands::table1(a),
        Command::BernoulliEff(a) => commands::bernoulli_eff(a),
        Command::Curves(a) => commands::curves(a),
        Command::CauchySim(a) => commands::cauchy_sim(a),
        Command::Check(a) => commands::check(a),
    }
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("slope-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
