use std::process::ExitCode;

use freegrad_cli::{parse_config, run_experiment, CliError};

fn main() -> ExitCode {
    let code = match parse_config(std::env::args_os()).and_then(|cfg| run_experiment(&cfg)) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for c in outcome.violations() {
                eprintln!("bound violation: {c}");
            }
            println!(
                "{} runs, {} checks, {} failed, {:.2}s",
                outcome.cells.len(),
                outcome.checks.len(),
                outcome.violations().count(),
                outcome.wall_time.as_secs_f64()
            );
            outcome.exit_code()
        }
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            e.exit_code()
        }
        Err(e) => {
            eprintln!("freegrad: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
