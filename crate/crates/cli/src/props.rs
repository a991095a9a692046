//! Matrix-property question sets: build them from task test inputs and
//! grade responses.

use std::collections::HashMap;
use std::fmt::Write as _;

use araoc_core::eval::score_matrix_properties;
use araoc_core::render::{build_matrix_property_prompt, MatrixQuestion};
use serde::Serialize;

use crate::args::{MatrixPropsGenArgs, MatrixPropsScoreArgs};
use crate::records::ResponseRecord;
use crate::{read_jsonl, read_tasks, write_file, write_jsonl, CliError};

pub fn cmd_matrix_props_gen(args: &MatrixPropsGenArgs) -> Result<String, CliError> {
    let tasks = read_tasks(&args.tasks)?;
    let mut questions = Vec::new();
    let mut skipped = 0;
    for t in tasks.iter().filter(|t| args.family.is_empty() || args.family.contains(&t.family)) {
        match build_matrix_property_prompt(&t.id, &t.test[0].input) {
            Ok(q) => questions.push(q),
            Err(_) => skipped += 1,
        }
    }
    write_jsonl(&args.out, &questions)?;
    Ok(format!(
        "wrote {} questions to {} ({skipped} all-black grids skipped)",
        questions.len(),
        args.out.display()
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropsSummary {
    pub n: usize,
    pub size_percent: f64,
    pub location_percent: f64,
    pub transpose_percent: f64,
    pub rank_percent: f64,
}

impl PropsSummary {
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:>6} {:>8} {:>9} {:>10}", "N", "Size", "Location", "Transpose");
        let _ = writeln!(
            out,
            "{:>6} {:>8.2} {:>9.2} {:>10.2}",
            self.n, self.size_percent, self.location_percent, self.transpose_percent
        );
        let _ = write!(out, "Rank (reported separately): {:.2}", self.rank_percent);
        out
    }
}

/// Grades every answered question; unanswered ones are left out.
pub fn score_props(questions: &[MatrixQuestion], responses: &[ResponseRecord]) -> Result<PropsSummary, CliError> {
    let by_id: HashMap<&str, &MatrixQuestion> = questions.iter().map(|q| (q.prompt.task_id.as_str(), q)).collect();
    let mut answers: HashMap<&str, &str> = HashMap::new();
    for r in responses {
        if !by_id.contains_key(r.task_id.as_str()) {
            return Err(CliError::Data(format!("unknown question id `{}` in responses", r.task_id)));
        }
        if let Some(text) = &r.raw_response {
            answers.insert(r.task_id.as_str(), text);
        }
    }
    if answers.is_empty() {
        return Err(CliError::Data("nothing to evaluate".into()));
    }
    let mut hits = [0usize; 4];
    for (id, text) in &answers {
        let s = score_matrix_properties(text, &by_id[id].oracle);
        for (h, ok) in hits.iter_mut().zip([s.size, s.location, s.transpose, s.rank]) {
            *h += ok as usize;
        }
    }
    let n = answers.len();
    let pct = |k: usize| (k as f64 * 10000.0 / n as f64).round() / 100.0;
    Ok(PropsSummary {
        n,
        size_percent: pct(hits[0]),
        location_percent: pct(hits[1]),
        transpose_percent: pct(hits[2]),
        rank_percent: pct(hits[3]),
    })
}

pub fn cmd_matrix_props_score(args: &MatrixPropsScoreArgs) -> Result<String, CliError> {
    let questions: Vec<MatrixQuestion> = read_jsonl(&args.questions)?;
    let responses: Vec<ResponseRecord> = read_jsonl(&args.responses)?;
    let summary = score_props(&questions, &responses)?;
    if let Some(path) = &args.summary {
        let mut bytes = serde_json::to_vec_pretty(&summary).expect("summary serializes");
        bytes.push(b'\n');
        write_file(path, bytes)?;
    }
    Ok(summary.table())
}
