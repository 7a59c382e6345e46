//! Campaign orchestration: configuration, seed derivation, parallel
//! execution across methods x seeds x behaviour spaces, metric reports and
//! run manifests.

pub mod config;
pub mod manifest;
pub mod report;
pub mod runner;
pub mod seeds;

use thiserror::Error;

/// Harness-level failures, split by CLI exit code: configuration errors
/// exit with 2, campaign failures with 3.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("campaign failure: {0}")]
    Campaign(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Campaign(_) => 3,
        }
    }
}
