//! Library side of the `araoc` command-line harness.
//!
//! Each subcommand is a plain function over an argument struct so runs can be
//! driven from tests without spawning the binary.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use araoc_core::dataset::{self, LoadError};
use araoc_core::Task;
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

pub mod analyze;
pub mod args;
pub mod commands;
pub mod ledger;
pub mod props;
pub mod query;
pub mod records;
pub mod svg;

pub use args::{Cli, Command};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("network error: {0}")]
    Network(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status: 1 usage, 2 data, 3 network or auth.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) | CliError::Io { .. } => 2,
            CliError::Auth(_) | CliError::Network(_) => 3,
        }
    }

    pub(crate) fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<araoc_core::GenError> for CliError {
    fn from(e: araoc_core::GenError) -> Self {
        match e {
            araoc_core::GenError::InvalidConfig(m) => CliError::Usage(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

/// Reads generated task files, bare task arrays, or public ARC task files
/// and directories.
pub fn read_tasks(path: &Path) -> Result<Vec<Task>, CliError> {
    if path.is_dir() {
        return Ok(dataset::load_arc_tasks(path)?);
    }
    match dataset::load_tasks(path) {
        Ok(t) => Ok(t),
        Err(LoadError::MalformedFile { .. }) => dataset::load_arc_tasks(path).map_err(Into::into),
        Err(e) => Err(e.into()),
    }
}

/// Reads a JSON Lines file, skipping blank lines.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let file = File::open(path).map_err(CliError::io(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(CliError::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line)
            .map_err(|e| CliError::Data(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(value);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, &item).expect("records always serialize");
        w.write_all(b"\n").map_err(CliError::io(path))?;
    }
    w.flush().map_err(CliError::io(path))
}

pub fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(CliError::io(path))
}
