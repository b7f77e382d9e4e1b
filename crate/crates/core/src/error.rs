use thiserror::Error;

use crate::topology::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario ({} violation(s)): {}", .0.len(), join_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("missing link {from} -> {to}")]
    MissingLink { from: String, to: String },

    #[error("conflicting hyper-links at node {node} on flow {flow} path {path}")]
    ConflictingHyperLinks { node: String, flow: usize, path: usize },

    #[error("smoothing exponent r must be negative, got {0}")]
    InvalidExponent(f64),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("flow {0} carries zero load")]
    DegenerateFlow(usize),

    #[error("non-finite {what} at t = {t}")]
    NonFinite { what: &'static str, t: f64 },

    #[error("linear program is {0}")]
    Lp(&'static str),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}
