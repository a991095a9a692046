//! Append-only run ledger: a header line carrying the run fingerprint, then
//! one status line per task event. A run resumes only when the fingerprint
//! of the new invocation matches the header.

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Pending,
    Responded,
    /// Retries exhausted; the task is queried again on resume.
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LedgerLine {
    Header {
        fingerprint: String,
        created_at: u64,
        config: serde_json::Value,
    },
    Status {
        task_id: String,
        status: TaskStatus,
        at: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        error: Option<String>,
    },
}

pub fn ledger_path(responses: &Path) -> PathBuf {
    let mut name = responses.as_os_str().to_owned();
    name.push(".ledger.jsonl");
    PathBuf::from(name)
}

pub fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Hex SHA-256 of the canonical JSON of `config`.
pub fn fingerprint(config: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(config).expect("json values serialize");
    hex(&Sha256::digest(&bytes))
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Ledger {
    path: PathBuf,
    file: File,
}

impl Ledger {
    /// Opens or creates the ledger and returns the ids already responded.
    pub fn open(path: &Path, fingerprint: &str, config: &serde_json::Value) -> Result<(Ledger, HashSet<String>), CliError> {
        let mut responded = HashSet::new();
        if path.exists() {
            truncate_torn_tail(path)?;
            let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
            let lines: Vec<&str> = text.lines().collect();
            let first = lines
                .first()
                .ok_or_else(|| CliError::Data(format!("{}: empty ledger", path.display())))?;
            match serde_json::from_str::<LedgerLine>(first) {
                Ok(LedgerLine::Header { fingerprint: found, .. }) if found == fingerprint => {}
                Ok(LedgerLine::Header { fingerprint: found, .. }) => {
                    return Err(CliError::Data(format!(
                        "{}: run fingerprint {found} does not match this invocation ({fingerprint}); use a new output path",
                        path.display()
                    )))
                }
                _ => return Err(CliError::Data(format!("{}: first line is not a ledger header", path.display()))),
            }
            for (i, line) in lines.iter().enumerate().skip(1) {
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<LedgerLine>(line) {
                    Ok(LedgerLine::Status { task_id, status, .. }) => {
                        if status == TaskStatus::Responded {
                            responded.insert(task_id);
                        } else {
                            responded.remove(&task_id);
                        }
                    }
                    _ => return Err(CliError::Data(format!("{}:{}: bad ledger line", path.display(), i + 1))),
                }
            }
            let file = OpenOptions::new().append(true).open(path).map_err(CliError::io(path))?;
            return Ok((
                Ledger {
                    path: path.to_path_buf(),
                    file,
                },
                responded,
            ));
        }
        let file = File::create(path).map_err(CliError::io(path))?;
        let mut ledger = Ledger {
            path: path.to_path_buf(),
            file,
        };
        ledger.append(&LedgerLine::Header {
            fingerprint: fingerprint.to_string(),
            created_at: now(),
            config: config.clone(),
        })?;
        Ok((ledger, responded))
    }

    pub fn append(&mut self, line: &LedgerLine) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec(line).expect("ledger lines serialize");
        bytes.push(b'\n');
        self.file.write_all(&bytes).map_err(CliError::io(&self.path))?;
        self.file.flush().map_err(CliError::io(&self.path))
    }

    pub fn status(&mut self, task_id: &str, status: TaskStatus, error: Option<String>) -> Result<(), CliError> {
        self.append(&LedgerLine::Status {
            task_id: task_id.to_string(),
            status,
            at: now(),
            error,
        })
    }
}

/// Drops a partial final line left by a crash mid-write so appends start on
/// a fresh line.
pub fn truncate_torn_tail(path: &Path) -> Result<(), CliError> {
    let bytes = std::fs::read(path).map_err(CliError::io(path))?;
    if bytes.is_empty() || bytes.ends_with(b"\n") {
        return Ok(());
    }
    let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    let file = OpenOptions::new().write(true).open(path).map_err(CliError::io(path))?;
    file.set_len(keep as u64).map_err(CliError::io(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resume_requires_same_fingerprint() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl.ledger.jsonl");
        let cfg = serde_json::json!({"model": "m"});
        let fp = fingerprint(&cfg);
        let (mut l, done) = Ledger::open(&path, &fp, &cfg).unwrap();
        assert!(done.is_empty());
        l.status("a", TaskStatus::Responded, None).unwrap();
        l.status("b", TaskStatus::Failed, Some("boom".into())).unwrap();
        drop(l);
        let (_, done) = Ledger::open(&path, &fp, &cfg).unwrap();
        assert_eq!(done, HashSet::from(["a".to_string()]));
        let other = serde_json::json!({"model": "n"});
        let err = Ledger::open(&path, &fingerprint(&other), &other).err().unwrap();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn torn_last_line_is_tolerated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("l.jsonl");
        let cfg = serde_json::json!({});
        let fp = fingerprint(&cfg);
        let (mut l, _) = Ledger::open(&path, &fp, &cfg).unwrap();
        l.status("a", TaskStatus::Responded, None).unwrap();
        l.file.write_all(b"{\"kind\":\"sta").unwrap();
        drop(l);
        let (mut l, done) = Ledger::open(&path, &fp, &cfg).unwrap();
        assert!(done.contains("a"));
        l.status("b", TaskStatus::Responded, None).unwrap();
        drop(l);
        let (_, done) = Ledger::open(&path, &fp, &cfg).unwrap();
        assert_eq!(done.len(), 2);
    }

    #[test]
    fn ledger_sits_next_to_responses() {
        assert_eq!(ledger_path(Path::new("out/r.jsonl")), PathBuf::from("out/r.jsonl.ledger.jsonl"));
    }
}
