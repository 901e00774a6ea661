use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

mod args;
mod commands;
mod output;

use args::{Cli, Command, CommonArgs, THREADS_ENV};
use commands::Outcome;

const EXIT_USAGE: u8 = 1;

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("{THREADS_ENV}={raw} is not a thread count"))?;
    jacobi_spectra::par::configure_threads(threads)
}

fn run(command: &Command) -> anyhow::Result<(Outcome, &CommonArgs)> {
    Ok(match command {
        Command::Spectrum(c) => (commands::spectrum(c)?, c),
        Command::Asymptotics(a) => (commands::asymptotics(a)?, &a.common),
        Command::Verify(v) => (commands::verify(v)?, &v.common),
        Command::Oracle(o) => (commands::oracle(o)?, &o.common),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => {
                    if !e.render().to_string().contains("Usage:") {
                        eprintln!("\n{}", Cli::command().render_usage());
                    }
                    ExitCode::from(EXIT_USAGE)
                }
            };
        }
    };
    if cli.defaults {
        println!("{}", serde_json::to_string_pretty(&args::defaults_json()).unwrap_or_default());
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("error: no command given; see `jspec --help`");
        return ExitCode::from(EXIT_USAGE);
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    let (outcome, common) = match run(&command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let written = output::render(&outcome.report, common.format)
        .and_then(|bytes| output::emit(&bytes, common.out.as_deref()));
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_USAGE);
    }
    for line in &outcome.notes {
        eprintln!("{line}");
    }
    if matches!(command, Command::Asymptotics(_)) && common.format == args::Format::Csv {
        let fits = serde_json::Value::Object(outcome.report.fits.clone());
        eprintln!("fits: {fits}");
    }
    ExitCode::from(outcome.code)
}
