mod cli;
mod commands;
mod config;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use crate::cli::Cli;
use crate::output::{render, Meta};

fn run() -> Result<()> {
    let args = config::expand(std::env::args_os().collect())?;
    let cli = Cli::parse_from(&args);
    if let Some(t) = cli.global.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("configuring thread pool")?;
    }
    let seed = cli.global.seed;
    let art = commands::run(&cli.command, seed).with_context(|| format!("{} failed", cli.command.name()))?;
    let meta = Meta { tool: "jps", version: env!("CARGO_PKG_VERSION"), seed, command: config::recorded_command(&args) };
    match &cli.global.out {
        Some(path) => {
            let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(f);
            render(&meta, &art, cli.global.format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            render(&meta, &art, cli.global.format, &mut w)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
