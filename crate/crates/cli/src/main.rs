mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    let _ = e.print();
                    output::error_line("usage", &e.to_string());
                    ExitCode::from(2)
                }
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.downcast_ref::<reim_core::Error>().map_or("runtime_error", |e| e.kind());
            output::error_line(kind, &format!("{e:#}"));
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(threads) = cli.common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(threads as usize).build_global()?;
    }
    let mut out = output::OutDir::create(&cli.common.out_dir)?;
    match &cli.command {
        Command::Approx(a) => commands::approx(&cli.common, a, &mut out),
        Command::Table1(a) => commands::table1(&cli.common, a, &mut out),
        Command::Heat(a) => commands::heat(&cli.common, a, &mut out),
        Command::Matfun(a) => commands::matfun(&cli.common, a, &mut out),
        Command::Sweep(a) => commands::sweep(&cli.common, a, &mut out),
    }
}
