//! Implementation behind the `rbc` binary.
//!
//! Exit code contract: 0 success, 1 usage errors (bad flags, bad flag
//! combinations, bad RBC_THREADS), 2 data errors (unreadable images, malformed
//! manifests, corrupt indexes, search failures).

use std::fmt;

pub mod bench;
pub mod cli;
pub mod commands;
pub mod manifest;
pub mod pipeline;
pub mod report;
pub mod synth;

/// Error class that should exit with code 1 instead of 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}
