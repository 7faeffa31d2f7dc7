use std::process::ExitCode;

use clap::Parser;
use polar_scf_sim::cli::{exit_code, report_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => ExitCode::from(report_code(&report)),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
