mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};
use serde_json::json;

use args::Cli;

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

/// Errors caused by what the user asked for, as opposed to failures while
/// running it.
fn is_usage(e: &varjack::Error) -> bool {
    use varjack::Error::*;
    matches!(
        e,
        InvalidDistribution(_)
            | InvalidConfiguration(_)
            | InvalidMask { .. }
            | Domain(_)
            | ArityMismatch { .. }
            | SpaceTooLarge { .. }
            | Precondition(_)
            | Config(_)
            | Json(_)
    )
}

fn main() -> ExitCode {
    let argv = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => return usage(e),
    };
    let cmd = Cli::command();
    let matches = match cmd.clone().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    if let Some(t) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            return usage(e);
        }
    }
    let (subcommand, resolved) = config::resolved(&cmd, &matches);
    let manifest = json!({
        "subcommand": subcommand,
        "config": resolved,
        "seed": cli.global.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    });
    let report = match commands::run(&cli) {
        Ok(r) => r,
        Err(e) if is_usage(&e) => return usage(e),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = output::emit(
        &report,
        &manifest,
        cli.global.format,
        cli.global.out.as_deref(),
    ) {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(1);
    }
    if report.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        for f in &report.failures {
            eprintln!("invariant failure: {f}");
        }
        ExitCode::from(1)
    }
}
