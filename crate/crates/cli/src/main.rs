mod args;
mod commands;
mod config;
mod error;
mod io;

use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use crate::args::Cli;
use crate::config::{load_config, RunConfig};
use crate::error::CliError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = RunConfig::default();
    let result = effective_config(&cli).and_then(|c| {
        cfg = c;
        commands::run(&mut cfg)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Usage { usage, .. } = &e {
                let synopsis = usage.clone().or_else(|| synopsis(&cfg));
                if let Some(s) = synopsis {
                    eprintln!("\n{s}");
                }
            }
            e.exit_code()
        }
    }
}

/// The config file, if any, with the command-line flags laid over it.
fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(cmd) = &cli.command {
        let flags = cmd.to_config();
        for (what, file, flag) in [("subcommand", &cfg.subcommand, &flags.subcommand), ("check", &cfg.check, &flags.check)] {
            if let (Some(a), Some(b)) = (file, flag) {
                if a != b {
                    return Err(CliError::usage(format!("config file selects {what} {a:?} but the command line selects {b:?}")));
                }
            }
        }
        cfg.overlay(&flags);
    }
    Ok(cfg)
}

/// Usage line of the subcommand the config selects.
fn synopsis(cfg: &RunConfig) -> Option<String> {
    let mut root = Cli::command();
    root.build();
    let sub = root.find_subcommand_mut(cfg.subcommand.as_deref()?)?;
    let rendered = match cfg.check.as_deref() {
        Some(check) => sub.find_subcommand_mut(check)?.render_usage(),
        None => sub.render_usage(),
    };
    Some(rendered.to_string())
}
