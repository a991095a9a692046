//! Scoring, aggregate metrics and the paired sign test.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gen::{Family, Variant};
use crate::grid::Grid;
use crate::render::{parse_grid_response, MatrixOracle, ParseOutcome};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("nothing to evaluate")]
    EmptyInput,
}

/// Score of one prediction. Unparseable predictions count as shape
/// mismatches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskScore {
    pub task_id: String,
    pub exact: bool,
    pub shape_match: bool,
    pub parse_ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
}

pub fn score_task(task_id: &str, pred: &ParseOutcome, gt: &Grid) -> TaskScore {
    let (parse_ok, shape_match, exact) = match pred.grid() {
        Some(g) => (true, g.shape() == gt.shape(), g == gt),
        None => (false, false, false),
    };
    TaskScore {
        task_id: task_id.to_string(),
        exact,
        shape_match,
        parse_ok,
        family: None,
        variant: None,
    }
}

/// Counts and percentages over a set of scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub n: usize,
    pub exact: usize,
    pub shape_mismatch: usize,
    pub parse_failures: usize,
    pub acc_percent: f64,
    pub not_match_percent: f64,
}

fn percent(count: usize, n: usize) -> f64 {
    (count as f64 * 10_000.0 / n as f64).round() / 100.0
}

impl Breakdown {
    fn from_scores<'a>(scores: impl IntoIterator<Item = &'a TaskScore>) -> Breakdown {
        let (mut n, mut exact, mut shape_mismatch, mut parse_failures) = (0, 0, 0, 0);
        for s in scores {
            n += 1;
            exact += s.exact as usize;
            shape_mismatch += !s.shape_match as usize;
            parse_failures += !s.parse_ok as usize;
        }
        Breakdown {
            n,
            exact,
            shape_mismatch,
            parse_failures,
            acc_percent: percent(exact, n),
            not_match_percent: percent(shape_mismatch, n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    #[serde(flatten)]
    pub overall: Breakdown,
    pub per_family: BTreeMap<String, Breakdown>,
    pub per_variant: BTreeMap<String, Breakdown>,
}

impl EvalSummary {
    pub fn acc_percent(&self) -> f64 {
        self.overall.acc_percent
    }

    pub fn not_match_percent(&self) -> f64 {
        self.overall.not_match_percent
    }

    /// Plain-text table of Acc and Not M% per family, two decimals.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<16} {:>6} {:>8} {:>8}", "Family", "N", "Acc", "Not M%");
        let row = |out: &mut String, name: &str, b: &Breakdown| {
            let _ = writeln!(
                out,
                "{:<16} {:>6} {:>8.2} {:>8.2}",
                name, b.n, b.acc_percent, b.not_match_percent
            );
        };
        for (name, b) in &self.per_family {
            row(&mut out, name, b);
        }
        row(&mut out, "all", &self.overall);
        if self.overall.parse_failures > 0 {
            let _ = writeln!(out, "(parse failures counted as shape mismatches: {})", self.overall.parse_failures);
        }
        out
    }
}

pub fn aggregate(scores: &[TaskScore]) -> Result<EvalSummary, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let group = |key: &dyn Fn(&TaskScore) -> Option<String>| {
        let mut buckets: BTreeMap<String, Vec<&TaskScore>> = BTreeMap::new();
        for s in scores {
            if let Some(k) = key(s) {
                buckets.entry(k).or_default().push(s);
            }
        }
        buckets
            .into_iter()
            .map(|(k, v)| (k, Breakdown::from_scores(v)))
            .collect::<BTreeMap<_, _>>()
    };
    Ok(EvalSummary {
        overall: Breakdown::from_scores(scores),
        per_family: group(&|s| s.family.map(|f| f.to_string())),
        per_variant: group(&|s| s.variant.map(|v| v.to_string())),
    })
}

/// Per-question grades for a matrix-property response. `rank` is reported
/// separately from the size/location/transpose trio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixPropertyScore {
    pub size: bool,
    pub location: bool,
    pub transpose: bool,
    pub rank: bool,
}

fn section_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?im)^[\s*#]*([1-4])\s*\.\s*\**\s*(size|location|transpose|rank)\s*\**\s*:").unwrap())
}

fn tuple_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)").unwrap())
}

fn int_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\d+").unwrap())
}

/// Splits a response into its four answer sections by heading.
fn sections(text: &str) -> BTreeMap<String, &str> {
    let heads: Vec<(usize, usize, String)> = section_re()
        .captures_iter(text)
        .map(|c| {
            let m = c.get(0).unwrap();
            (m.start(), m.end(), c[2].to_ascii_lowercase())
        })
        .collect();
    let mut out = BTreeMap::new();
    for (i, (_, end, name)) in heads.iter().enumerate() {
        let stop = heads.get(i + 1).map_or(text.len(), |h| h.0);
        out.entry(name.clone()).or_insert(&text[*end..stop]);
    }
    out
}

fn tuples(text: &str) -> Vec<(usize, usize)> {
    tuple_re()
        .captures_iter(text)
        .filter_map(|c| Some((c[1].parse().ok()?, c[2].parse().ok()?)))
        .collect()
}

/// Grades a response to the matrix-property questions.
///
/// Locations pass when the four corners match the 1-based oracle, or all
/// four match it consistently 0-based.
pub fn score_matrix_properties(response: &str, oracle: &MatrixOracle) -> MatrixPropertyScore {
    let secs = sections(response);
    let get = |k: &str| secs.get(k).copied().unwrap_or("");

    let size = tuples(get("size")).first() == Some(&oracle.size);

    let found = tuples(get("location"));
    let location = found.len() >= 4 && {
        let answer = &found[..4];
        let one_based = answer == oracle.corners;
        let zero_based = answer
            .iter()
            .zip(&oracle.corners)
            .all(|(a, o)| a.0 + 1 == o.0 && a.1 + 1 == o.1);
        one_based || zero_based
    };

    let transpose = parse_grid_response(get("transpose")).grid() == Some(&oracle.transpose);

    let rank = int_re()
        .find(get("rank"))
        .and_then(|m| m.as_str().parse::<usize>().ok())
        == Some(oracle.rank);

    MatrixPropertyScore {
        size,
        location,
        transpose,
        rank,
    }
}

/// One left/right task duo: whether each side was solved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairedOutcome {
    pub pair_id: String,
    pub left_correct: bool,
    pub right_correct: bool,
}

/// Exact McNemar (sign) test over discordant pairs.
///
/// `b` counts pairs only the left side solved, `c` pairs only the right side
/// solved. Under the null each discordant pair is a fair coin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McNemar {
    pub b: u64,
    pub c: u64,
    pub n: u64,
    pub p_two_sided: f64,
    /// `P(X >= c)`: evidence that the right side does better.
    pub p_one_sided: f64,
}

impl McNemar {
    pub fn from_counts(b: u64, c: u64) -> McNemar {
        let (num2, den) = two_sided_exact(b, c);
        let (num1, _) = upper_tail_exact(b, c);
        McNemar {
            b,
            c,
            n: b + c,
            p_two_sided: ratio_to_f64(&num2, &den),
            p_one_sided: ratio_to_f64(&num1, &den),
        }
    }
}

fn binomial_row(n: u64) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for k in 0..n {
        c = c * (n - k) / (k + 1);
        row.push(c.clone());
    }
    row
}

/// Two-sided p-value as an exact fraction `num / 2^n`, capped at 1.
pub fn two_sided_exact(b: u64, c: u64) -> (BigUint, BigUint) {
    let n = b + c;
    let den = BigUint::one() << n;
    let row = binomial_row(n);
    let lo = b.min(c) as usize;
    let hi = b.max(c) as usize;
    let lower: BigUint = row[..=lo].iter().sum();
    let upper: BigUint = row[hi..].iter().sum();
    let tail = lower.min(upper);
    let num = (tail << 1u32).min(den.clone());
    (num, den)
}

/// One-sided `P(X >= c)` as an exact fraction `num / 2^n`.
pub fn upper_tail_exact(b: u64, c: u64) -> (BigUint, BigUint) {
    let n = b + c;
    let row = binomial_row(n);
    let num: BigUint = row[c as usize..].iter().sum();
    (num, BigUint::one() << n)
}

fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    // 64 extra bits of precision keep the quotient exact to f64 resolution.
    let scaled = (num << 64u32) / den;
    scaled.to_f64().unwrap_or(f64::INFINITY) / 2f64.powi(64)
}

pub fn mcnemar_exact(pairs: &[PairedOutcome]) -> Result<McNemar, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let b = pairs.iter().filter(|p| p.left_correct && !p.right_correct).count() as u64;
    let c = pairs.iter().filter(|p| !p.left_correct && p.right_correct).count() as u64;
    Ok(McNemar::from_counts(b, c))
}
