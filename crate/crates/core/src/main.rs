use std::process::ExitCode;

use clap::Parser;
use nwise::app::{self, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match app::run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("nwise: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let text = match app::render(&outcome.report, cli.format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("nwise: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("nwise: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(outcome.exit_code() as u8)
}
