//! Subcommand implementations. Each returns its payload plus the
//! subcommand options to echo alongside the run configuration.

pub mod analysis;
pub mod attack;
pub mod simulate;
pub mod sweep;

use std::path::Path;

use crate::error::{CliError, CliResult};
use crate::report::Payload;

pub struct Outcome {
    pub options: Vec<(String, String)>,
    pub payload: Payload,
}

pub(crate) fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}
