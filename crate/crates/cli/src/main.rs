mod args;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;
use snxp::Exec;

use args::{Cli, Command};
use config::RunConfig;
use error::CliError;

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let base = match &cli.config {
        Some(path) => RunConfig::from_toml(&output::read(path)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
        None => RunConfig::default(),
    };
    let mut c = match cli.units {
        Some(u) => base.convert(u),
        None => base,
    };
    match &cli.command {
        Command::Spectrum(cmd) => cmd.apply(&mut c),
        Command::Delay(cmd) => cmd.apply(&mut c),
        Command::Synth(cmd) => cmd.apply(&mut c),
        Command::Fit(cmd) => cmd.apply(&mut c),
    }
    c.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(c)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = load(cli)?;
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    };
    match &cli.command {
        Command::Spectrum(cmd) => commands::spectrum(cmd, &config),
        Command::Delay(cmd) => commands::delay(cmd, &config, exec),
        Command::Synth(cmd) => commands::synth(cmd, &config, exec),
        Command::Fit(cmd) => commands::fit(cmd, &config, exec),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
