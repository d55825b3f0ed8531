use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde_json::{json, Value};

use crate::{EXIT_NO_CONVERGENCE, EXIT_USAGE, EXIT_VALIDATION};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    /// `key: value` lines.
    Text,
    Json,
    Csv,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io { path: PathBuf, source: std::io::Error },
    Invalid(String),
    Lib(qincompat::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Lib(qincompat::Error::SolverDidNotConverge { .. }) => EXIT_NO_CONVERGENCE,
            CliError::Io { .. } | CliError::Invalid(_) | CliError::Lib(_) => EXIT_VALIDATION,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Invalid(msg) => write!(f, "{msg}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Lib(err) => write!(f, "{err}"),
        }
    }
}

impl From<qincompat::Error> for CliError {
    fn from(e: qincompat::Error) -> Self {
        CliError::Lib(e)
    }
}

pub fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Fixed-point for the text format.
pub fn num(x: f64) -> String {
    format!("{x:.10}")
}

pub fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

/// Everything a subcommand reports. JSON output is
/// `{command, inputs, params, results, residuals}`; text output is `text`.
pub struct Report {
    pub command: &'static str,
    pub inputs: Value,
    pub params: Value,
    pub results: Value,
    pub residuals: Value,
    pub text: Vec<(String, String)>,
    pub csv: Option<String>,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report {
            command,
            inputs: json!({}),
            params: json!({}),
            results: json!({}),
            residuals: json!({}),
            text: Vec::new(),
            csv: None,
        }
    }

    pub fn line(&mut self, key: &str, value: impl Into<String>) {
        self.text.push((key.to_string(), value.into()));
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Text => Ok(self.text.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()),
            Format::Json => {
                let doc = json!({
                    "command": self.command,
                    "inputs": self.inputs,
                    "params": self.params,
                    "results": self.results,
                    "residuals": self.residuals,
                });
                Ok(serde_json::to_string_pretty(&doc).expect("JSON values serialize") + "\n")
            }
            Format::Csv => {
                self.csv.clone().ok_or_else(|| CliError::Usage(format!("{} has no CSV output", self.command)))
            }
        }
    }
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(io_err(path)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
