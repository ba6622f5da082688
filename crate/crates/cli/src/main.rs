use std::process::ExitCode;

use cavity_gate_cli::commands::{self, warn, Cli, Command};
use cavity_gate_cli::error::{CliError, CliResult, EXIT_CONFIG};
use clap::Parser;

const THREADS_VAR: &str = "CAVITY_GATE_THREADS";

fn init_threads() -> CliResult<()> {
    let Ok(text) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config(THREADS_VAR, format!("expected a positive integer, got `{text}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(THREADS_VAR, e.to_string()))
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads()?;
    match cli.command {
        Command::Evaluate(args) => {
            let report = commands::evaluate(&args)?;
            warn(&report.warnings);
            print_json(&report);
        }
        Command::Figure(args) => {
            let written = commands::run_figure(&args)?;
            print_json(&serde_json::json!({ "outputs": written }));
        }
        Command::Casestudy(args) => print_json(&commands::casestudy(&args)?),
        Command::Sweep(args) => print_json(&commands::sweep(&args)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
