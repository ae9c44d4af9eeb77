//! Exit codes and machine-readable diagnostics.

use serde::Serialize;

use nozzle_shock::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    Numerical,
    Config,
    OutOfRange,
    NonContraction,
    Solvability,
}

impl FailureKind {
    pub fn exit_code(self) -> i32 {
        match self {
            FailureKind::Numerical => 1,
            FailureKind::Config => 2,
            FailureKind::OutOfRange => 3,
            FailureKind::NonContraction => 4,
            FailureKind::Solvability => 5,
        }
    }

    pub fn of(e: &Error) -> Self {
        match e {
            Error::NonContraction { .. } | Error::BallExit { .. } => FailureKind::NonContraction,
            Error::Solvability { .. } | Error::SolvabilityRoot { .. } => FailureKind::Solvability,
            _ => FailureKind::Numerical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub kind: FailureKind,
    pub exit_code: i32,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_star: Option<f64>,
}

impl Failure {
    pub fn new(kind: FailureKind, message: impl Into<String>) -> Self {
        Self { kind, exit_code: kind.exit_code(), message: message.into(), root: None, xi_star: None }
    }

    pub fn at_root(e: &Error, root: usize, xi_star: f64) -> Self {
        Self { root: Some(root), xi_star: Some(xi_star), ..Self::new(FailureKind::of(e), e.to_string()) }
    }
}

/// Contents of `diagnostics.json`; the first failure decides the exit code.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub exit_code: i32,
    pub failures: Vec<Failure>,
}

impl Diagnostics {
    pub fn from_failures(failures: Vec<Failure>) -> Self {
        Self { exit_code: failures.first().map_or(0, |f| f.exit_code), failures }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("diagnostics serialize")
    }
}
