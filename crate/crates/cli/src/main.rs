mod args;
mod commands;

use std::io::{ErrorKind, Write};
use std::process::ExitCode;
use std::time::Instant;

use adaptkit::Error;
use clap::error::ErrorKind as ClapKind;
use clap::Parser;
use serde_json::json;

use args::Cli;
use commands::Ctx;

const EXIT_ARGUMENT: u8 = 1;
const EXIT_FORMAT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) => EXIT_ARGUMENT,
        Error::Config(_) | Error::Parse { .. } => EXIT_FORMAT,
        Error::Numerical(_) => EXIT_NUMERICAL,
        Error::Io(io) => match io.kind() {
            ErrorKind::InvalidData | ErrorKind::UnexpectedEof => EXIT_FORMAT,
            _ => EXIT_ARGUMENT,
        },
    }
}

fn emit_manifest(cli: &Cli, record: &serde_json::Value) {
    let line = format!("{record}\n");
    let written = match &cli.manifest {
        Some(path) => std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .and_then(|mut f| f.write_all(line.as_bytes())),
        None => std::io::stderr().write_all(line.as_bytes()),
    };
    if let Err(e) = written {
        log::error!("could not write the run manifest: {e}");
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ClapKind::DisplayHelp | ClapKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_ARGUMENT),
            };
        }
    };

    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_ARGUMENT);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not configure {n} threads: {e}");
        }
    }

    let start = Instant::now();
    let mut ctx = Ctx::default();
    let result = commands::run(&cli.command, &mut ctx);
    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(e)
        }
    };

    if let Some(summary) = &ctx.summary {
        if result.is_ok() && !ctx.stdout_used {
            println!("{summary}");
        }
    }
    let manifest = json!({
        "subcommand": cli.command.name(),
        "params": &cli.command,
        "threads": cli.threads,
        "inputs": ctx.inputs,
        "outputs": ctx.outputs,
        "wall_time_s": commands::sig6(start.elapsed().as_secs_f64()),
        "warnings": ctx.warnings,
        "summary": ctx.summary,
        "exit_code": code,
        "error": result.as_ref().err().map(|e| e.to_string()),
    });
    emit_manifest(&cli, &manifest);
    ExitCode::from(code)
}
