//! Subcommand implementations. Each returns the diagnostics it collected;
//! a hard error comes back as `Err`.

pub mod analyze;
pub mod codec;
pub mod dataset;
pub mod evaluate;
pub mod project;
pub mod refine;

use anyhow::Result;

use crate::cli::Command;
use crate::io::Diagnostic;

/// Exit status contract: 0 clean, 1 hard error, 2 finished with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Clean,
    Diagnostics,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Clean => 0,
            Status::Diagnostics => 2,
        }
    }

    pub fn of(diags: &[Diagnostic]) -> Self {
        if diags.is_empty() {
            Status::Clean
        } else {
            Status::Diagnostics
        }
    }
}

pub fn run(command: &Command) -> Result<Vec<Diagnostic>> {
    match command {
        Command::Encode(a) => codec::encode(a),
        Command::Decode(a) => codec::decode(a),
        Command::BuildDataset(a) => dataset::build(a),
        Command::Eval(a) => evaluate::eval(a),
        Command::Analyze(a) => analyze::analyze(a),
        Command::RefinePrompts(a) => refine::refine_prompts(a),
        Command::Project(a) => project::project(a),
    }
}
