//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error (including usage errors),
//! 3 numerical guard (ladder truncation, normalization drift, non-finite
//! output), 1 output I/O failure.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};

pub use commands::{run_command, CommandError};
pub use config::{Command, ConfigError, OutputFormat, RunConfig, CONFIG_ENV};
pub use output::{write_records, ResultRecord, Value};

/// Parses, runs and emits; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::parse_from(argv) {
        Ok(cfg) => cfg,
        Err(ConfigError::Usage(e)) => {
            let _ = e.print();
            return e.exit_code();
        }
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let records = match run_command(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = emit(&cfg, &records) {
        eprintln!("error: writing output: {e}");
        return 1;
    }
    0
}

pub fn emit(cfg: &RunConfig, records: &[ResultRecord]) -> io::Result<()> {
    match &cfg.output_path {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_records(&mut w, records, cfg.output_format)?;
            w.flush()
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_records(&mut lock, records, cfg.output_format)?;
            lock.flush()
        }
    }
}
