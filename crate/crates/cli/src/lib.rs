//! Batch front end: run verification suites from a JSON config and explain
//! the certificates they produce.

pub mod certificate;
pub mod config;
pub mod explain;
pub mod suites;

use bapkit::{BigRational, ScalarMode};
use thiserror::Error;

use certificate::CertificateDocument;
use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error at byte offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// 2 for usage, configuration and parse errors; 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse { .. } => 2,
            CliError::Io(_) => 1,
        }
    }
}

/// Byte offset of a 1-based `(line, column)` position as reported by `serde_json`.
pub fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (start + column.saturating_sub(1)).min(text.len())
}

/// Offset of a `serde_json` error; end-of-input errors point past the last byte.
pub fn error_offset(text: &str, e: &serde_json::Error) -> usize {
    if e.is_eof() {
        text.len()
    } else {
        byte_offset(text, e.line(), e.column())
    }
}

/// Runs every selected suite in canonical order.
pub fn run(config: RunConfig) -> Result<CertificateDocument, CliError> {
    config.validate()?;
    let mut results = Vec::new();
    for suite in config.selected()? {
        results.push(match config.mode {
            ScalarMode::Rational => suites::run_suite::<BigRational>(suite, &config)?,
            ScalarMode::Float => suites::run_suite::<f64>(suite, &config)?,
        });
    }
    Ok(CertificateDocument::new(config, results))
}
