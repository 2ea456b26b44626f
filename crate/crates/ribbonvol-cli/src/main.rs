mod args;
mod cache;
mod commands;
mod emit;

use std::fmt;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

use args::{Cli, Command, Format};

/// Invalid arguments detected after parsing; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new().num_threads(workers as usize).build_global()?;
    }
    let format = if cli.json { Format::Json } else { cli.format };
    let (report, ok) = match &cli.command {
        Command::Enumerate(a) => (commands::enumerate(a)?, true),
        Command::Cones(a) => (commands::cones(a)?, true),
        Command::Bvol(a) => (commands::bvol(a)?, true),
        Command::Cells(a) => (commands::cells(a)?, true),
        Command::Thresholds(a) => (commands::thresholds(a)?, true),
        Command::Integrate(a) => (commands::integrate(a)?, true),
        Command::Lattice(a) => (commands::lattice(a)?, true),
        Command::Table(a) => commands::table(a)?,
    };
    report.emit(format, cli.out.as_deref())?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: computed values disagree with the closed form");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.downcast_ref::<UsageError>().is_some();
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
