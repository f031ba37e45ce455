//! File formats, batch pipelines and the command line for the
//! `groundsig_core` toolkit.
//!
//! Every subcommand is deterministic in its inputs, configuration and seed;
//! per-record work runs in parallel but results are written in input order,
//! so `--workers` never changes the output.

pub mod cli;
pub mod commands;
pub mod formats;
pub mod io;
pub mod parallel;

pub use groundsig_core as core;
