//! Grid value type and the geometric primitives the operations are built on.
//!
//! Coordinates are `(row, col)` with row 0 at the top, matching the order in
//! which matrices are printed in prompts.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest side length of an ARC grid.
pub const MAX_SIDE: usize = 30;

/// Color names in legend order, indexed by code.
pub const COLOR_NAMES: [&str; 10] = [
    "black", "blue", "red", "green", "yellow", "gray", "magenta", "orange", "cyan", "brown",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("color code {0} is outside 0..=9")]
    InvalidColor(i64),
    #[error("grid must have at least one row and one column")]
    Empty,
    #[error("row {row} has {found} cells, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("grid of {rows}x{cols} exceeds the {MAX_SIDE}x{MAX_SIDE} bound")]
    TooLarge { rows: usize, cols: usize },
}

/// A single cell color, code 0 (black) through 9.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct Color(u8);

impl Color {
    pub const BLACK: Color = Color(0);

    pub fn new(code: u8) -> Result<Self, GridError> {
        if code <= 9 {
            Ok(Color(code))
        } else {
            Err(GridError::InvalidColor(code as i64))
        }
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn is_black(self) -> bool {
        self.0 == 0
    }

    pub fn name(self) -> &'static str {
        COLOR_NAMES[self.0 as usize]
    }

    /// All nine non-black colors.
    pub fn non_black() -> impl Iterator<Item = Color> {
        (1..=9).map(Color)
    }
}

impl TryFrom<i64> for Color {
    type Error = GridError;

    fn try_from(code: i64) -> Result<Self, Self::Error> {
        if (0..=9).contains(&code) {
            Ok(Color(code as u8))
        } else {
            Err(GridError::InvalidColor(code))
        }
    }
}

impl From<Color> for u8 {
    fn from(c: Color) -> u8 {
        c.0
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Flip axis. `Vertical` reverses row order, `Horizontal` reverses column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

/// Rectangular color grid, row-major, 1..=30 on each side.
///
/// Serializes as an array of arrays of integers, the ARC task file convention.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<u8>>")]
pub struct Grid {
    rows: usize,
    cols: usize,
    cells: Vec<Color>,
}

impl Grid {
    /// A grid filled with one color.
    pub fn filled(rows: usize, cols: usize, color: Color) -> Result<Self, GridError> {
        check_shape(rows, cols)?;
        Ok(Grid {
            rows,
            cols,
            cells: vec![color; rows * cols],
        })
    }

    pub fn black(rows: usize, cols: usize) -> Result<Self, GridError> {
        Self::filled(rows, cols, Color::BLACK)
    }

    /// Builds a grid from nested rows of raw codes.
    pub fn from_rows<R, T>(rows: &[R]) -> Result<Self, GridError>
    where
        R: AsRef<[T]>,
        T: Copy + Into<i64>,
    {
        let n_rows = rows.len();
        let n_cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        for (i, row) in rows.iter().enumerate() {
            if row.as_ref().len() != n_cols {
                return Err(GridError::RaggedRows {
                    row: i,
                    expected: n_cols,
                    found: row.as_ref().len(),
                });
            }
        }
        check_shape(n_rows, n_cols)?;
        let cells = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().map(|&v| Color::try_from(v.into())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Grid {
            rows: n_rows,
            cols: n_cols,
            cells,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Color {
        self.cells[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, color: Color) {
        self.cells[row * self.cols + col] = color;
    }

    pub fn contains(&self, row: isize, col: isize) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.rows && (col as usize) < self.cols
    }

    pub fn cells(&self) -> &[Color] {
        &self.cells
    }

    /// Row-major iterator over `((row, col), color)`.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), Color)> + '_ {
        let cols = self.cols;
        self.cells
            .iter()
            .enumerate()
            .map(move |(i, &c)| ((i / cols, i % cols), c))
    }

    pub fn row(&self, row: usize) -> &[Color] {
        &self.cells[row * self.cols..(row + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|c| c.code()).collect())
            .collect()
    }

    /// Coordinates of every non-black cell, row-major.
    pub fn nonblack_cells(&self) -> BTreeSet<(usize, usize)> {
        self.iter()
            .filter(|(_, c)| !c.is_black())
            .map(|(p, _)| p)
            .collect()
    }

    pub fn is_all_black(&self) -> bool {
        self.cells.iter().all(|c| c.is_black())
    }

    /// Stacks `self` above `below`. Column counts must match.
    pub fn vstack(&self, below: &Grid) -> Result<Grid, GridError> {
        assert_eq!(self.cols, below.cols, "vstack column mismatch");
        check_shape(self.rows + below.rows, self.cols)?;
        let mut cells = self.cells.clone();
        cells.extend_from_slice(&below.cells);
        Ok(Grid {
            rows: self.rows + below.rows,
            cols: self.cols,
            cells,
        })
    }

    /// Places `right` to the right of `self`. Row counts must match.
    pub fn hstack(&self, right: &Grid) -> Result<Grid, GridError> {
        assert_eq!(self.rows, right.rows, "hstack row mismatch");
        check_shape(self.rows, self.cols + right.cols)?;
        let mut cells = Vec::with_capacity(self.cells.len() + right.cells.len());
        for r in 0..self.rows {
            cells.extend_from_slice(self.row(r));
            cells.extend_from_slice(right.row(r));
        }
        Ok(Grid {
            rows: self.rows,
            cols: self.cols + right.cols,
            cells,
        })
    }
}

fn check_shape(rows: usize, cols: usize) -> Result<(), GridError> {
    if rows == 0 || cols == 0 {
        return Err(GridError::Empty);
    }
    if rows > MAX_SIDE || cols > MAX_SIDE {
        return Err(GridError::TooLarge { rows, cols });
    }
    Ok(())
}

impl TryFrom<Vec<Vec<i64>>> for Grid {
    type Error = GridError;

    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self, Self::Error> {
        Grid::from_rows(&rows)
    }
}

impl From<Grid> for Vec<Vec<u8>> {
    fn from(g: Grid) -> Self {
        g.to_rows()
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid{:?}", self.to_rows())
    }
}

/// Inclusive bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BBox {
    pub top: usize,
    pub left: usize,
    pub bottom: usize,
    pub right: usize,
}

impl BBox {
    pub fn height(&self) -> usize {
        self.bottom - self.top + 1
    }

    pub fn width(&self) -> usize {
        self.right - self.left + 1
    }

    /// Corners in the order top-left, top-right, bottom-left, bottom-right.
    pub fn corners(&self) -> [(usize, usize); 4] {
        [
            (self.top, self.left),
            (self.top, self.right),
            (self.bottom, self.left),
            (self.bottom, self.right),
        ]
    }
}

/// A set of cells within a host grid.
///
/// `color` is `Some` when every cell shares one color and `None` for a
/// multicolor region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub cells: BTreeSet<(usize, usize)>,
    pub color: Option<Color>,
    pub bbox: BBox,
}

impl Region {
    /// Builds a region from cells of `g`. Returns `None` for an empty set.
    pub fn from_cells(g: &Grid, cells: BTreeSet<(usize, usize)>) -> Option<Region> {
        let first = *cells.iter().next()?;
        let mut bbox = BBox {
            top: first.0,
            left: first.1,
            bottom: first.0,
            right: first.1,
        };
        let first_color = g.get(first.0, first.1);
        let mut uniform = true;
        for &(r, c) in &cells {
            bbox.top = bbox.top.min(r);
            bbox.bottom = bbox.bottom.max(r);
            bbox.left = bbox.left.min(c);
            bbox.right = bbox.right.max(c);
            uniform &= g.get(r, c) == first_color;
        }
        Some(Region {
            cells,
            color: uniform.then_some(first_color),
            bbox,
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn is_multicolor(&self) -> bool {
        self.color.is_none()
    }
}

/// Tight bounding box over all non-black cells, or `None` for an all-black grid.
pub fn bounding_box_nonblack(g: &Grid) -> Option<Region> {
    Region::from_cells(g, g.nonblack_cells())
}

fn neighbors(
    g: &Grid,
    (r, c): (usize, usize),
    connectivity: Connectivity,
) -> impl Iterator<Item = (usize, usize)> + '_ {
    const FOUR: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
    const EIGHT: [(isize, isize); 8] = [
        (-1, -1),
        (-1, 0),
        (-1, 1),
        (0, -1),
        (0, 1),
        (1, -1),
        (1, 0),
        (1, 1),
    ];
    let deltas: &'static [(isize, isize)] = match connectivity {
        Connectivity::Four => &FOUR,
        Connectivity::Eight => &EIGHT,
    };
    deltas.iter().filter_map(move |&(dr, dc)| {
        let (nr, nc) = (r as isize + dr, c as isize + dc);
        g.contains(nr, nc).then_some((nr as usize, nc as usize))
    })
}

/// Same-color connected components of non-black cells, ordered by each
/// component's first cell in row-major order.
pub fn connected_components(g: &Grid, connectivity: Connectivity) -> Vec<Region> {
    let mut seen = vec![false; g.rows * g.cols];
    let mut out = Vec::new();
    for ((r, c), color) in g.iter() {
        if color.is_black() || seen[r * g.cols + c] {
            continue;
        }
        let mut cells = BTreeSet::new();
        let mut queue = VecDeque::from([(r, c)]);
        seen[r * g.cols + c] = true;
        while let Some(p) = queue.pop_front() {
            cells.insert(p);
            for (nr, nc) in neighbors(g, p, connectivity) {
                let idx = nr * g.cols + nc;
                if !seen[idx] && g.get(nr, nc) == color {
                    seen[idx] = true;
                    queue.push_back((nr, nc));
                }
            }
        }
        out.extend(Region::from_cells(g, cells));
    }
    out
}

/// Black cells that cannot reach the grid border through 4-connected black cells.
pub fn enclosed_black_interior(g: &Grid) -> BTreeSet<(usize, usize)> {
    let mut reached = vec![false; g.rows * g.cols];
    let mut queue = VecDeque::new();
    for ((r, c), color) in g.iter() {
        let border = r == 0 || c == 0 || r + 1 == g.rows || c + 1 == g.cols;
        if border && color.is_black() {
            reached[r * g.cols + c] = true;
            queue.push_back((r, c));
        }
    }
    while let Some(p) = queue.pop_front() {
        for (nr, nc) in neighbors(g, p, Connectivity::Four) {
            let idx = nr * g.cols + nc;
            if !reached[idx] && g.get(nr, nc).is_black() {
                reached[idx] = true;
                queue.push_back((nr, nc));
            }
        }
    }
    g.iter()
        .filter(|&((r, c), color)| color.is_black() && !reached[r * g.cols + c])
        .map(|(p, _)| p)
        .collect()
}

pub fn flip(g: &Grid, axis: Axis) -> Grid {
    let mut out = g.clone();
    for ((r, c), color) in g.iter() {
        let (tr, tc) = match axis {
            Axis::Vertical => (g.rows - 1 - r, c),
            Axis::Horizontal => (r, g.cols - 1 - c),
        };
        out.set(tr, tc, color);
    }
    out
}

pub fn transpose(g: &Grid) -> Grid {
    let mut cells = Vec::with_capacity(g.cells.len());
    for c in 0..g.cols {
        for r in 0..g.rows {
            cells.push(g.get(r, c));
        }
    }
    Grid {
        rows: g.cols,
        cols: g.rows,
        cells,
    }
}

/// Exact rank of the matrix of color codes, by fraction-free (Bareiss)
/// elimination over arbitrary-precision integers.
pub fn rank_exact(g: &Grid) -> usize {
    let mut m: Vec<Vec<BigInt>> = (0..g.rows)
        .map(|r| g.row(r).iter().map(|c| BigInt::from(c.code())).collect())
        .collect();
    let (rows, cols) = g.shape();
    let mut prev_pivot = BigInt::from(1);
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot_row) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot_row);
        for r in rank + 1..rows {
            for c in col + 1..cols {
                let v = &m[rank][col] * &m[r][c] - &m[r][col] * &m[rank][c];
                // Exact by Sylvester's identity.
                m[r][c] = v / &prev_pivot;
            }
            m[r][col] = BigInt::zero();
        }
        prev_pivot = m[rank][col].clone();
        rank += 1;
    }
    rank
}
