//! Stable error codes and exit statuses of the command-line driver.

use gmwmx::Error;
use serde::Serialize;

pub const EXIT_PARSE: u8 = 3;
pub const EXIT_CONFIG: u8 = 4;
pub const EXIT_ESTIMATION: u8 = 5;
pub const EXIT_LIKELIHOOD_CAP: u8 = 6;
pub const EXIT_IO: u8 = 7;

#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    /// Dotted identifier such as `parse.non_monotone`.
    pub code: String,
    pub exit_code: u8,
    pub message: String,
    /// Offending field of a configuration file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl CliError {
    pub fn new(code: &str, exit_code: u8, message: impl Into<String>) -> Self {
        Self {
            code: code.to_string(),
            exit_code,
            message: message.into(),
            path: None,
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new("config.invalid", EXIT_CONFIG, message)
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Self::new("io", EXIT_IO, format!("{}: {err}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

fn estimation_code(e: &Error) -> &'static str {
    match e {
        Error::Dimension(_) => "estimation.dimension",
        Error::InvalidInput(_) => "estimation.invalid_input",
        Error::RankDeficient { .. } => "estimation.rank_deficient",
        Error::DegenerateOffset { .. } => "estimation.degenerate_offset",
        Error::Domain(_) => "estimation.domain",
        Error::NotPositiveDefinite { .. } => "estimation.not_positive_definite",
        Error::InsufficientLength { .. } => "estimation.insufficient_length",
        Error::EmptyScale { .. } => "estimation.empty_scale",
        Error::DegenerateWeight { .. } => "estimation.degenerate_weight",
        Error::UnderIdentified { .. } => "estimation.under_identified",
        Error::UnsupportedIterations(_) => "estimation.unsupported_iterations",
        Error::TooManyFailures { .. } => "simulation.too_many_failures",
        _ => "estimation",
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match &e {
            Error::Parse(p) => Self::new(&format!("parse.{}", p.kind()), EXIT_PARSE, message),
            Error::Config { path, .. } => Self {
                path: Some(path.clone()),
                ..Self::new("config.invalid", EXIT_CONFIG, message)
            },
            Error::SimulationCap { .. } => Self::new("config.simulation_cap", EXIT_CONFIG, message),
            Error::LikelihoodCap { .. } => Self::new("likelihood.cap", EXIT_LIKELIHOOD_CAP, message),
            other => Self::new(estimation_code(other), EXIT_ESTIMATION, message),
        }
    }
}

impl From<gmwmx::ParseError> for CliError {
    fn from(e: gmwmx::ParseError) -> Self {
        Error::Parse(e).into()
    }
}
