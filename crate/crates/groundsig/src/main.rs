use std::process::ExitCode;

use clap::Parser;
use groundsig::cli::Cli;
use groundsig::commands::{run, Status};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(diags) => {
            for d in &diags {
                eprintln!("warning: {d}");
            }
            ExitCode::from(Status::of(&diags).code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
