//! Task file formats: generated benchmark files and public ARC task files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gen::{Benchmark, Family, Pair, Task};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {detail}")]
    MalformedFile { path: PathBuf, detail: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn malformed(path: &Path, detail: impl ToString) -> LoadError {
    LoadError::MalformedFile {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    }
}

fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// The train/test payload of a public ARC task file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcTask {
    pub train: Vec<Pair>,
    pub test: Vec<Pair>,
}

impl ArcTask {
    pub fn into_task(self, id: String) -> Task {
        Task {
            id,
            family: Family::Arc,
            rule: None,
            train: self.train,
            test: self.test,
            meta: None,
        }
    }
}

impl From<&Task> for ArcTask {
    fn from(t: &Task) -> Self {
        ArcTask {
            train: t.train.clone(),
            test: t.test.clone(),
        }
    }
}

/// Serializes a task in the public ARC layout, `{"train": [...], "test": [...]}`.
pub fn save_arc_task(task: &Task) -> String {
    serde_json::to_string(&ArcTask::from(task)).expect("grids always serialize")
}

fn parse_arc_file(path: &Path) -> Result<Vec<Task>, LoadError> {
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| malformed(path, e))?;
    let check = |arc: ArcTask, id: String| -> Result<Task, LoadError> {
        if arc.train.is_empty() || arc.test.is_empty() {
            return Err(malformed(path, format!("task `{id}` needs at least one train and one test pair")));
        }
        Ok(arc.into_task(id))
    };
    // Re-parse from text with the typed layout so errors keep line/column.
    match value {
        serde_json::Value::Object(map) if map.contains_key("train") => {
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "task".into());
            let arc: ArcTask = serde_json::from_str(&text).map_err(|e| malformed(path, e))?;
            Ok(vec![check(arc, stem)?])
        }
        // Combined files map task ids to task payloads.
        serde_json::Value::Object(_) => {
            let all: BTreeMap<String, ArcTask> = serde_json::from_str(&text).map_err(|e| malformed(path, e))?;
            all.into_iter().map(|(id, arc)| check(arc, id)).collect()
        }
        _ => Err(malformed(path, "expected a JSON object")),
    }
}

/// Loads ARC tasks from a task file, a combined `{id: task}` file, or a
/// directory of `.json` task files (sorted by name).
pub fn load_arc_tasks(path: &Path) -> Result<Vec<Task>, LoadError> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|source| LoadError::Io {
                path: path.to_path_buf(),
                source,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        let mut tasks = Vec::new();
        for f in files {
            tasks.extend(parse_arc_file(&f)?);
        }
        Ok(tasks)
    } else {
        parse_arc_file(path)
    }
}

/// Reads a benchmark file (`{"master_seed", "generator_version", "variant",
/// "tasks"}`) or a bare JSON array of tasks.
pub fn load_tasks(path: &Path) -> Result<Vec<Task>, LoadError> {
    let text = read(path)?;
    if text.trim_start().starts_with('[') {
        serde_json::from_str::<Vec<Task>>(&text).map_err(|e| malformed(path, e))
    } else {
        serde_json::from_str::<Benchmark>(&text)
            .map(|b| b.tasks)
            .map_err(|e| malformed(path, e))
    }
}

pub fn write_benchmark(path: &Path, benchmark: &Benchmark) -> std::io::Result<()> {
    fs::write(path, benchmark_bytes(benchmark))
}

/// Canonical benchmark bytes: pretty JSON with a trailing newline.
pub fn benchmark_bytes(benchmark: &Benchmark) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(benchmark).expect("benchmarks always serialize");
    bytes.push(b'\n');
    bytes
}
