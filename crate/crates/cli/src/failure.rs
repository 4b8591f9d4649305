//! Exit-status classification: 1 for usage errors, 2 for numerical failures.

use std::fmt;

use giant_bic::Error;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

pub type Result<T> = std::result::Result<T, Failure>;

pub const USAGE: i32 = 1;
pub const NUMERICAL: i32 = 2;

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self { code: USAGE, message: msg.into() }
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Self { code: NUMERICAL, message: msg.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonConvergence(_)
            | Error::StepTooCoarse(_)
            | Error::HistoryExhausted { .. }
            | Error::ModeCountMismatch { .. }
            | Error::UnclassifiedCell { .. }
            | Error::DivergentAtResonance(_) => NUMERICAL,
            _ => USAGE,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::usage(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self::usage(format!("json: {e}"))
    }
}
