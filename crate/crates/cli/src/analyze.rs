//! Left versus right mirror comparison.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use araoc_core::{mcnemar_exact, McNemar, PairedOutcome};
use serde::Serialize;

use crate::args::AnalyzeMirrorArgs;
use crate::records::ResultRecord;
use crate::{read_jsonl, CliError};

pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideStats {
    pub n: usize,
    pub acc_percent: f64,
    pub not_match_percent: f64,
}

impl SideStats {
    fn of(results: &[&ResultRecord]) -> Self {
        let n = results.len();
        let pct = |k: usize| (k as f64 * 10000.0 / n as f64).round() / 100.0;
        SideStats {
            n,
            acc_percent: pct(results.iter().filter(|r| r.exact).count()),
            not_match_percent: pct(results.iter().filter(|r| !r.shape_match).count()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MirrorReport {
    pub test: McNemar,
    pub left: SideStats,
    pub right: SideStats,
}

impl MirrorReport {
    /// The side that solved more pairs, when the difference is significant.
    pub fn significantly_better(&self) -> Option<&'static str> {
        if self.test.p_two_sided >= SIGNIFICANCE {
            return None;
        }
        match self.test.c.cmp(&self.test.b) {
            std::cmp::Ordering::Greater => Some("right"),
            std::cmp::Ordering::Less => Some("left"),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn render(&self) -> String {
        let t = &self.test;
        let mut out = String::new();
        let _ = writeln!(out, "pairs: {}", self.left.n);
        let _ = writeln!(out, "b (left only correct):  {}", t.b);
        let _ = writeln!(out, "c (right only correct): {}", t.c);
        let _ = writeln!(out, "discordant: {}", t.n);
        let _ = writeln!(out, "p two-sided: {:.4}", t.p_two_sided);
        let _ = writeln!(out, "p one-sided (right better): {:.4}", t.p_one_sided);
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<10} {:>8} {:>8}", "Direction", "Acc", "Not M%");
        let better = self.significantly_better();
        for (name, key, s) in [("Left", "left", &self.left), ("Right", "right", &self.right)] {
            let mark = if better == Some(key) { "**" } else { "" };
            let acc = format!("{:.2}{mark}", s.acc_percent);
            let _ = writeln!(out, "{name:<10} {acc:>8} {:>8.2}", s.not_match_percent);
        }
        if better.is_some() {
            let _ = writeln!(out, "** significantly better at p < {SIGNIFICANCE}");
        }
        out.trim_end().to_string()
    }
}

/// Strips the `-left` / `-right` suffix that joins the two halves of a duo.
pub fn pair_id(task_id: &str) -> &str {
    task_id
        .strip_suffix("-left")
        .or_else(|| task_id.strip_suffix("-right"))
        .unwrap_or(task_id)
}

pub fn analyze(left: &[ResultRecord], right: &[ResultRecord]) -> Result<MirrorReport, CliError> {
    let index = |side: &str, rs: &[ResultRecord]| -> Result<BTreeMap<String, usize>, CliError> {
        let mut m = BTreeMap::new();
        for (i, r) in rs.iter().enumerate() {
            if m.insert(pair_id(&r.task_id).to_string(), i).is_some() {
                return Err(CliError::Data(format!("{side} results list pair {} twice", pair_id(&r.task_id))));
            }
        }
        Ok(m)
    };
    let l = index("left", left)?;
    let r = index("right", right)?;
    if let Some(id) = l.keys().find(|k| !r.contains_key(*k)).or_else(|| r.keys().find(|k| !l.contains_key(*k))) {
        return Err(CliError::Data(format!("unpaired results: pair {id} is missing on one side")));
    }
    let pairs: Vec<PairedOutcome> = l
        .iter()
        .map(|(id, &i)| PairedOutcome {
            pair_id: id.clone(),
            left_correct: left[i].exact,
            right_correct: right[r[id]].exact,
        })
        .collect();
    let test = mcnemar_exact(&pairs).map_err(|e| CliError::Data(e.to_string()))?;
    Ok(MirrorReport {
        test,
        left: SideStats::of(&left.iter().collect::<Vec<_>>()),
        right: SideStats::of(&right.iter().collect::<Vec<_>>()),
    })
}

pub fn cmd_analyze_mirror(args: &AnalyzeMirrorArgs) -> Result<String, CliError> {
    // A combined results file may be given for both sides.
    let left: Vec<ResultRecord> = read_jsonl(&args.left)?;
    let left: Vec<ResultRecord> = left.into_iter().filter(|r| !r.task_id.ends_with("-right")).collect();
    let right: Vec<ResultRecord> = read_jsonl(&args.right)?;
    let right: Vec<ResultRecord> = right.into_iter().filter(|r| !r.task_id.ends_with("-left")).collect();
    Ok(analyze(&left, &right)?.render())
}
