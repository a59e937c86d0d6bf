use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One failed validity condition, with the values that broke it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: String,
    pub observed: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated ({})", self.condition, self.observed)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", join_violations(.0))]
    Validation(Vec<Violation>),

    #[error("state ({phase},{count}) is not valid: {reason}")]
    InvalidState {
        phase: usize,
        count: usize,
        reason: String,
    },

    #[error("weight exponent {exponent} is not integrable at an included endpoint")]
    NonIntegrable { exponent: f64 },

    #[error("tolerance not met after {evaluations} evaluations (value {value}, error estimate {error})")]
    ToleranceNotMet {
        value: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("combined integrand does not cancel near 1: |h(1-{distance:e})| = {value:e} exceeds {bound:e}")]
    CancellationFailure {
        distance: f64,
        value: f64,
        bound: f64,
    },

    #[error("{what} evaluated to {value}, outside its admissible range")]
    NonPositiveResult { what: String, value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular system at pivot {pivot}")]
    SingularSystem { pivot: usize },

    #[error("truncation insufficient: tail mass {tail_mass:e} exceeds {threshold:e}; raise n_trunc")]
    TruncationInsufficient { tail_mass: f64, threshold: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("only {got} tagged samples, need at least {needed}")]
    InsufficientSamples { got: u64, needed: u64 },

    #[error("unknown {kind} '{name}' (known: {known})")]
    UnknownName {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
