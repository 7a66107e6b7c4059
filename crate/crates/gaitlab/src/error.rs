//! Error type shared across the crate.
//!
//! Every error carries a stable machine-parsable category so the CLI can
//! emit a single-line `error[<category>]: <message>` on failure.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid value in a config file or builder argument.
    #[error("config: {0}")]
    Config(String),

    /// A domain invariant was violated (bad topology, empty sequence, ...).
    #[error("validation: {0}")]
    Validation(String),

    /// An operation was called with out-of-range parameters.
    #[error("parameter: {0}")]
    Parameter(String),

    /// Skeleton edge list is not a connected tree over the joints.
    #[error("topology: {0}")]
    Topology(String),

    /// Experiment protocol cannot be satisfied (fold sizes, empty splits).
    #[error("protocol: {0}")]
    Protocol(String),

    /// A tensor-shape or call-order contract of the model was broken.
    #[error("contract: {0}")]
    Contract(String),

    /// Non-finite value produced during forward/backward or optimization.
    #[error("numerical: {0}")]
    Numerical(String),

    /// A metric is undefined for the given inputs (e.g. single-class AUROC).
    #[error("metric: {0}")]
    Metric(String),

    /// Malformed input file (bad JSON, bad CSV row, ...).
    #[error("parse: {0}")]
    Parse(String),

    #[error("io: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable category tag for machine-parsable CLI errors.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Validation(_) => "validation",
            Error::Parameter(_) => "parameter",
            Error::Topology(_) => "topology",
            Error::Protocol(_) => "protocol",
            Error::Contract(_) => "contract",
            Error::Numerical(_) => "numerical",
            Error::Metric(_) => "metric",
            Error::Parse(_) => "parse",
            Error::Io { .. } => "io",
        }
    }

    /// Message body without the category prefix, for callers that print
    /// the category separately (`error[<category>]: <message>`).
    pub fn message(&self) -> String {
        match self {
            Error::Config(m)
            | Error::Validation(m)
            | Error::Parameter(m)
            | Error::Topology(m)
            | Error::Protocol(m)
            | Error::Contract(m)
            | Error::Numerical(m)
            | Error::Metric(m)
            | Error::Parse(m) => m.clone(),
            Error::Io { path, source } => format!("{path}: {source}"),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
