//! Prompt rendering and response parsing.
//!
//! Matrices render as `[[0, 3], [0, 0]]`. The parser is lenient about
//! surrounding prose, whitespace and separators, but every entry must be a
//! single color digit.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gen::Task;
use crate::grid::{self, Color, Grid, COLOR_NAMES, MAX_SIDE};

pub const SYSTEM_PROMPT: &str = "You are a helpful assistant.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptStyle {
    MatrixStandard,
    NaturalLanguage,
    NoLocation,
    MatrixProperty,
}

/// Styles that render a whole task (train pairs plus test input).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStyle {
    MatrixStandard,
    NaturalLanguage,
    NoLocation,
}

impl From<TaskStyle> for PromptStyle {
    fn from(s: TaskStyle) -> Self {
        match s {
            TaskStyle::MatrixStandard => PromptStyle::MatrixStandard,
            TaskStyle::NaturalLanguage => PromptStyle::NaturalLanguage,
            TaskStyle::NoLocation => PromptStyle::NoLocation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub task_id: String,
    pub style: PromptStyle,
    pub system: String,
    pub user: String,
}

pub fn render_matrix_text(g: &Grid) -> String {
    let mut out = String::with_capacity(g.rows() * (g.cols() * 3 + 4));
    out.push('[');
    for r in 0..g.rows() {
        if r > 0 {
            out.push_str(", ");
        }
        out.push('[');
        for (i, c) in g.row(r).iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push((b'0' + c.code()) as char);
        }
        out.push(']');
    }
    out.push(']');
    out
}

/// A non-black cell in Cartesian coordinates: `x` is the column, `y` counts
/// rows up from the bottom edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NlCoord {
    pub x: usize,
    pub y: usize,
    pub color: Color,
}

/// Non-black cells listed top to bottom, then left to right.
pub fn nl_coordinates(g: &Grid) -> Vec<NlCoord> {
    g.iter()
        .filter(|(_, c)| !c.is_black())
        .map(|((r, c), color)| NlCoord {
            x: c,
            y: g.rows() - 1 - r,
            color,
        })
        .collect()
}

/// Describes a grid in words with a bottom-left origin. An all-black grid
/// lists `none`.
pub fn render_nl(g: &Grid) -> String {
    let coords = nl_coordinates(g);
    let list = if coords.is_empty() {
        "none".to_string()
    } else {
        coords
            .iter()
            .map(|p| format!("{} at ({}, {})", p.color.name(), p.x, p.y))
            .collect::<Vec<_>>()
            .join(", ")
    };
    format!(
        "The matrix dimensions are {} columns by {} rows. Coordinates are based on a Cartesian coordinate system \
         with the origin (0,0) at the bottom-left corner. The coordinates of the non-zero elements, listed from top \
         to bottom and left to right, are: {list}",
        g.cols(),
        g.rows()
    )
}

fn legend() -> String {
    let mut s = String::from("The numbers represent different colors:\n");
    for (code, name) in COLOR_NAMES.iter().enumerate() {
        let _ = writeln!(s, "{code} = {name}");
    }
    s
}

const GAME_INTRO: &str = "You will be playing a game that need to find common patterns from input examples and apply \
the pattern for prediction on new examples.\nLets play a game where you are transforming an input grid of numbers \
into an output grid of numbers.\n\n";

const ANSWER_FORMAT: &str = "Please only output your answer without analysis in the following format:\n\nOutput grid:";

const NO_LOCATION_CLAUSE: &str = "When answering this question, please avoid using information about: 1) the sizes \
of the input grids and the output grids; 2) the locations of different numbers in the input grids and the output grids.";

/// Renders a task in one of the task prompt formats.
pub fn build_prompt(task: &Task, style: TaskStyle) -> RenderedPrompt {
    let grid_text = |g: &Grid| match style {
        TaskStyle::NaturalLanguage => render_nl(g),
        _ => render_matrix_text(g),
    };
    let mut user = String::from(GAME_INTRO);
    user.push_str(&legend());
    user.push_str("\nHere are examples of input grids and its corresponding output grids:\n");
    for pair in &task.train {
        let _ = write!(
            user,
            "Example input grid:\n{}\nExample output grid:\n{}\n\n",
            grid_text(&pair.input),
            grid_text(&pair.output)
        );
    }
    let test_input = task.test.first().map(|p| grid_text(&p.input)).unwrap_or_default();
    let _ = write!(user, "The input grid is:\n\n{test_input}\n\n");
    match style {
        TaskStyle::MatrixStandard => {
            let _ = write!(user, "What is the output grid? {ANSWER_FORMAT}");
        }
        TaskStyle::NoLocation => {
            let _ = write!(user, "What is the output grid? {NO_LOCATION_CLAUSE}\n\n{ANSWER_FORMAT}");
        }
        TaskStyle::NaturalLanguage => {
            let _ = write!(user, "What is the output grid?\n\n{ANSWER_FORMAT}");
        }
    }
    RenderedPrompt {
        task_id: task.id.clone(),
        style: style.into(),
        system: SYSTEM_PROMPT.to_string(),
        user,
    }
}

/// A prompt/completion record for supervised fine-tuning.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatExample {
    pub id: String,
    pub system: String,
    pub prompt: String,
    pub completion: String,
}

/// Flattens a task into its standard prompt and the expected answer.
pub fn to_prompt_completion(task: &Task) -> FlatExample {
    let prompt = build_prompt(task, TaskStyle::MatrixStandard);
    let answer = task.test.first().map(|p| render_matrix_text(&p.output)).unwrap_or_default();
    FlatExample {
        id: task.id.clone(),
        system: prompt.system,
        prompt: prompt.user,
        completion: format!("Output grid:\n{answer}"),
    }
}

/// Ground-truth answers to the matrix-property questions.
///
/// Corner locations are stored 1-based as `(row, col)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixOracle {
    pub size: (usize, usize),
    pub corners: [(usize, usize); 4],
    pub transpose: Grid,
    pub rank: usize,
}

impl MatrixOracle {
    pub fn size_text(&self) -> String {
        format!("({},{})", self.size.0, self.size.1)
    }

    pub fn corners_text(&self) -> String {
        let items: Vec<String> = self.corners.iter().map(|(r, c)| format!("({r}, {c})")).collect();
        format!("[{}]", items.join(", "))
    }

    /// The answer block a perfect respondent would give.
    pub fn answer_text(&self) -> String {
        format!(
            "1.Size: {}\n\n2.Location: {}\n\n3.Transpose: {}\n\n4.Rank: {}",
            self.size_text(),
            self.corners_text(),
            render_matrix_text(&self.transpose),
            self.rank
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("grid has no non-black cells")]
    EmptyGrid,
}

/// A matrix-property question set for one grid, with its oracle answers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixQuestion {
    pub prompt: RenderedPrompt,
    pub oracle: MatrixOracle,
}

pub fn build_matrix_property_prompt(id: &str, g: &Grid) -> Result<MatrixQuestion, RenderError> {
    let region = grid::bounding_box_nonblack(g).ok_or(RenderError::EmptyGrid)?;
    let corners = region.bbox.corners().map(|(r, c)| (r + 1, c + 1));
    let oracle = MatrixOracle {
        size: g.shape(),
        corners,
        transpose: grid::transpose(g),
        rank: grid::rank_exact(g),
    };
    let user = format!(
        "Given a matrix in the format of numpy array, please answer the following questions:\n\n\
         1. What is the size of this matrix?  Output in the format of (a,b).\n\n\
         2. What is the location of the non-zero subgrids. Please first find out all the corner elements of the \
         subgrids, then output their locations in the order of [top-left, top-right, bottom-left, bottom-right], in \
         the format of (which row, which col).\n\n\
         3. What is the transpose of this matrix? Output the transposed matrix in the format of a numpy array with \
         elements separated by commas and enclosed in square brackets for each row like \
         \"[[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]\".\n\n\
         4. What is the rank of this matrix? Output the rank of the matrix.\n\n\
         Please only output your answer without analysis in the following format:\n\n\
         1.Size: \n\n2.Location: \n\n3.Transpose:\n\n4.Rank:\n\n\
         Input Matrix: \n\n{}",
        render_matrix_text(g)
    );
    Ok(MatrixQuestion {
        prompt: RenderedPrompt {
            task_id: id.to_string(),
            style: PromptStyle::MatrixProperty,
            system: SYSTEM_PROMPT.to_string(),
            user,
        },
        oracle,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FailureReason {
    NoMatrixFound,
    RaggedRows,
    InvalidEntry,
    TooLarge,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::NoMatrixFound => "NoMatrixFound",
            FailureReason::RaggedRows => "RaggedRows",
            FailureReason::InvalidEntry => "InvalidEntry",
            FailureReason::TooLarge => "TooLarge",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseFailure {
    pub reason: FailureReason,
    /// Byte range of the offending matrix text, when one was found.
    pub span: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseOutcome {
    Grid(Grid),
    Failure(ParseFailure),
}

impl ParseOutcome {
    pub fn grid(&self) -> Option<&Grid> {
        match self {
            ParseOutcome::Grid(g) => Some(g),
            ParseOutcome::Failure(_) => None,
        }
    }

    pub fn failure_reason(&self) -> Option<FailureReason> {
        match self {
            ParseOutcome::Grid(_) => None,
            ParseOutcome::Failure(f) => Some(f.reason),
        }
    }
}

/// Raw numeric tokens of a bracketed matrix, before validation.
struct RawMatrix {
    rows: Vec<Vec<String>>,
    span: (usize, usize),
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, b: u8) -> bool {
        self.skip_ws();
        if self.s.get(self.pos) == Some(&b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn number(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        if self.s.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits {
            self.pos = start;
            return None;
        }
        Some(String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
    }

    /// `[n, n, ...]` with commas or whitespace between entries.
    fn row(&mut self) -> Option<Vec<String>> {
        if !self.eat(b'[') {
            return None;
        }
        let mut row = vec![self.number()?];
        loop {
            if self.eat(b']') {
                return Some(row);
            }
            self.eat(b',');
            row.push(self.number()?);
        }
    }
}

/// Tries to read `[[...], [...]]` starting at byte `start`.
fn matrix_at(text: &str, start: usize) -> Option<RawMatrix> {
    let mut cur = Cursor {
        s: text.as_bytes(),
        pos: start,
    };
    if !cur.eat(b'[') || cur.peek() != Some(b'[') {
        return None;
    }
    let mut rows = vec![cur.row()?];
    loop {
        if cur.eat(b']') {
            return Some(RawMatrix {
                rows,
                span: (start, cur.pos),
            });
        }
        cur.eat(b',');
        rows.push(cur.row()?);
    }
}

/// Consecutive lines that each hold one bracketed row, as models often
/// print grids without the outer brackets.
fn row_lines(text: &str) -> Option<RawMatrix> {
    let mut offset = 0;
    let mut rows = Vec::new();
    let mut span: Option<(usize, usize)> = None;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim().trim_end_matches(',');
        let lead = line.len() - line.trim_start().len();
        let parsed = trimmed.starts_with('[').then(|| {
            let mut cur = Cursor {
                s: trimmed.as_bytes(),
                pos: 0,
            };
            cur.row().filter(|_| cur.pos == trimmed.len())
        });
        match parsed.flatten() {
            Some(row) => {
                rows.push(row);
                let end = offset + lead + trimmed.len();
                span = Some((span.map_or(offset + lead, |s| s.0), end));
            }
            None if !rows.is_empty() => break,
            None => {}
        }
        offset += line.len();
    }
    span.map(|span| RawMatrix { rows, span })
}

fn validate_raw(raw: RawMatrix) -> ParseOutcome {
    let fail = |reason| {
        ParseOutcome::Failure(ParseFailure {
            reason,
            span: Some(raw.span),
        })
    };
    let single_digit = |t: &String| t.len() == 1 && t.as_bytes()[0].is_ascii_digit();
    if !raw.rows.iter().flatten().all(single_digit) {
        return fail(FailureReason::InvalidEntry);
    }
    let width = raw.rows[0].len();
    if raw.rows.iter().any(|r| r.len() != width) {
        return fail(FailureReason::RaggedRows);
    }
    if raw.rows.len() > MAX_SIDE || width > MAX_SIDE {
        return fail(FailureReason::TooLarge);
    }
    let codes: Vec<Vec<u8>> = raw
        .rows
        .iter()
        .map(|r| r.iter().map(|t| t.as_bytes()[0] - b'0').collect())
        .collect();
    match Grid::from_rows(&codes) {
        Ok(g) => ParseOutcome::Grid(g),
        Err(_) => fail(FailureReason::InvalidEntry),
    }
}

/// Extracts the first bracketed matrix from a model response.
pub fn parse_grid_response(text: &str) -> ParseOutcome {
    let mut from = 0;
    while let Some(off) = text[from..].find('[') {
        let start = from + off;
        if let Some(raw) = matrix_at(text, start) {
            return validate_raw(raw);
        }
        from = start + 1;
    }
    match row_lines(text) {
        Some(raw) => validate_raw(raw),
        None => ParseOutcome::Failure(ParseFailure {
            reason: FailureReason::NoMatrixFound,
            span: None,
        }),
    }
}
