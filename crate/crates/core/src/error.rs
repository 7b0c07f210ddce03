use thiserror::Error;

use crate::search_graph::Violation;

/// Errors returned by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation failed: {}", join_violations(.0))]
    Validation(Vec<Violation>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("temperature {value} at index {index} is below the grid minimum {min}")]
    BelowGrid { index: usize, value: f64, min: f64 },

    #[error("temperature {value} at index {index} is not part of the model's temperature set")]
    UnknownTemperature { index: usize, value: f64 },

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("covering system infeasible: instance {instance} level {level} has no crossing edge within budget")]
    Infeasible { instance: usize, level: usize },

    #[error("oracle query budget of {0} exhausted")]
    OracleBudget(u64),

    #[error("inconsistent oracle: {0}")]
    InconsistentOracle(String),

    #[error("no convergence after {0} iterations")]
    NoConvergence(u64),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for errors caused by bad input rather than a failing computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::Validation(_)
                | Error::InvalidArgument(_)
                | Error::BelowGrid { .. }
                | Error::UnknownTemperature { .. }
                | Error::SizeLimit(_)
        )
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(format!("line {} column {}: {}", e.line(), e.column(), e))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
