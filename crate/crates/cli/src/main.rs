mod cli;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::cli::Cli;
use crate::config::ExperimentConfig;
use crate::error::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    let command = cli.command;
    let name = command.name();
    let common = command.common();
    let mut config = ExperimentConfig::load(common.config.as_deref(), &common.sets)?;
    command.apply(&mut config);
    config.resolve(name)?;
    if config.workers > 0 {
        // Only fails if a global pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(config.workers).build_global();
    }
    commands::dispatch(name, &config)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
