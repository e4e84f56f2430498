mod cli;
mod commands;
mod config;
mod error;
mod output;
mod selftest;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command};
use commands::Context;
use error::{CliError, EXIT_SELFTEST};

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::input(format!("cannot start {n} threads: {e}")))?;
    }
    if cli.selftest {
        let name = cli.command.as_ref().map(Command::name);
        return if selftest::run(name) {
            Ok(())
        } else {
            Err(CliError { code: EXIT_SELFTEST, message: "selftest failed".into() })
        };
    }
    let ctx = Context { out: cli.out, seed: cli.seed, units: cli.units.into(), entropy: cli.entropy_unit };
    match &cli.command {
        Some(Command::Clock(a)) => commands::clock(a, &ctx),
        Some(Command::Thermal(a)) => commands::thermal(a, &ctx),
        Some(Command::Tunnel(a)) => commands::tunnel(a, &ctx),
        Some(Command::Cosmo(a)) => commands::cosmo(a, &ctx),
        Some(Command::Witness(a)) => commands::witness(a, &ctx),
        None => Err(CliError::input("no subcommand given; see --help")),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
