//! `forge` — command-line verification of nonholonomic metric families.
//!
//! The binary evaluates residual suites (reduced field equations,
//! Levi-Civita closure, anholonomy data, flow evolution and flow
//! constraints) for metrics and χ-families described by JSON scenario
//! files, and writes deterministic JSON/CSV reports.  The library side
//! holds everything the binary does so integration tests can drive it
//! in-process.
//!
//! Exit codes: `0` — every requested suite passed; `1` — at least one
//! suite exceeded its tolerance (the report is still written); `2` —
//! configuration or infrastructure failure (bad scenario, unknown catalog
//! id, unreadable file, …).

pub mod catalog;
pub mod emit;
pub mod horizon;
pub mod runner;
pub mod scenario;

/// Command-line level errors.  Both variants exit with code 2; suite
/// failures are not errors (the run completes and reports them).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The scenario or flags describe something the tool cannot do.
    #[error("configuration error: {0}")]
    Config(String),
    /// The environment failed us: unreadable file, unwritable output, …
    #[error("infrastructure error: {0}")]
    Infra(String),
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config(message.into())
    }

    pub fn infra(message: impl Into<String>) -> Self {
        CliError::Infra(message.into())
    }
}

/// Final verdict of a successful command invocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Everything requested passed.
    Pass,
    /// The run completed but at least one suite failed its gate.
    SuiteFailure,
}

impl Outcome {
    /// Process exit code for this outcome.
    pub fn code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::SuiteFailure => 1,
        }
    }
}

/// Exit code for [`CliError`] values.
pub const ERROR_EXIT_CODE: u8 = 2;
