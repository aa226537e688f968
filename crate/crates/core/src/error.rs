use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input outside the domain an operation is defined on.
    #[error("{quantity} = {value} is outside the valid domain ({constraint})")]
    Domain {
        quantity: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("deorbit pulse of {delta_v} m/s cannot reach {target_altitude} m; at least {required_delta_v:.6} m/s is needed")]
    PulseTooSmall {
        delta_v: f64,
        target_altitude: f64,
        required_delta_v: f64,
    },

    /// Scenario text rejected; `field` is the dotted key path when known.
    #[error("{}", format_parse(.field, .line, .message))]
    Parse {
        field: Option<String>,
        line: Option<usize>,
        message: String,
    },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn format_parse(field: &Option<String>, line: &Option<usize>, message: &str) -> String {
    match (field, line) {
        (Some(f), Some(l)) => format!("line {l}: `{f}`: {message}"),
        (Some(f), None) => format!("`{f}`: {message}"),
        (None, Some(l)) => format!("line {l}: {message}"),
        (None, None) => message.to_string(),
    }
}

impl Error {
    pub(crate) fn domain(quantity: &'static str, value: f64, constraint: &'static str) -> Self {
        Error::Domain {
            quantity,
            value,
            constraint,
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: Some(field.into()),
            line: None,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
