//! The six atomic grid operations and their sequential composition.
//!
//! These functions are the ground-truth oracle: every generated task pair is
//! produced by, and audited against, [`apply`].

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{self, bounding_box_nonblack, enclosed_black_interior, Axis, Color, Grid, Region, MAX_SIDE};

/// One of the eight compass directions, as a unit `(row, col)` step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction8 {
    Up,
    Down,
    Left,
    Right,
    UpLeft,
    UpRight,
    DownLeft,
    DownRight,
}

impl Direction8 {
    pub const ALL: [Direction8; 8] = [
        Direction8::Up,
        Direction8::Down,
        Direction8::Left,
        Direction8::Right,
        Direction8::UpLeft,
        Direction8::UpRight,
        Direction8::DownLeft,
        Direction8::DownRight,
    ];

    pub fn delta(self) -> (isize, isize) {
        match self {
            Direction8::Up => (-1, 0),
            Direction8::Down => (1, 0),
            Direction8::Left => (0, -1),
            Direction8::Right => (0, 1),
            Direction8::UpLeft => (-1, -1),
            Direction8::UpRight => (-1, 1),
            Direction8::DownLeft => (1, -1),
            Direction8::DownRight => (1, 1),
        }
    }

    pub fn opposite(self) -> Direction8 {
        match self {
            Direction8::Up => Direction8::Down,
            Direction8::Down => Direction8::Up,
            Direction8::Left => Direction8::Right,
            Direction8::Right => Direction8::Left,
            Direction8::UpLeft => Direction8::DownRight,
            Direction8::UpRight => Direction8::DownLeft,
            Direction8::DownLeft => Direction8::UpRight,
            Direction8::DownRight => Direction8::UpLeft,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Direction8::Up => "Up",
            Direction8::Down => "Down",
            Direction8::Left => "Left",
            Direction8::Right => "Right",
            Direction8::UpLeft => "Up-left",
            Direction8::UpRight => "Up-right",
            Direction8::DownLeft => "Down-left",
            Direction8::DownRight => "Down-right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction4 {
    Up,
    Down,
    Left,
    Right,
}

impl Direction4 {
    pub const ALL: [Direction4; 4] = [
        Direction4::Up,
        Direction4::Down,
        Direction4::Left,
        Direction4::Right,
    ];
}

impl From<Direction4> for Direction8 {
    fn from(d: Direction4) -> Self {
        match d {
            Direction4::Up => Direction8::Up,
            Direction4::Down => Direction8::Down,
            Direction4::Left => Direction8::Left,
            Direction4::Right => Direction8::Right,
        }
    }
}

/// A transformation rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum OpSpec {
    Move { direction: Direction8, steps: u32 },
    ChangeColor { target: Color },
    Copy { direction: Direction8, steps: u32 },
    Mirror { direction: Direction4 },
    FillInternal { fill: Color },
    Scale,
    Compose { steps: Vec<OpSpec> },
}

impl OpSpec {
    /// Whether the operation acts on a subgrid rather than the whole grid.
    pub fn is_region_targeted(&self) -> bool {
        matches!(
            self,
            OpSpec::Move { .. } | OpSpec::ChangeColor { .. } | OpSpec::Copy { .. }
        )
    }
}

impl fmt::Display for OpSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpSpec::Move { direction, steps } => write!(f, "Move({} {steps})", direction.label()),
            OpSpec::ChangeColor { target } => write!(f, "ChangeColor({})", target.name()),
            OpSpec::Copy { direction, steps } => write!(f, "Copy({} {steps})", direction.label()),
            OpSpec::Mirror { direction } => write!(f, "Mirror({:?})", direction),
            OpSpec::FillInternal { fill } => write!(f, "FillInternal({})", fill.name()),
            OpSpec::Scale => write!(f, "Scale"),
            OpSpec::Compose { steps } => {
                write!(f, "Compose[")?;
                for (i, s) in steps.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, "]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpError {
    #[error("translated subgrid leaves the grid")]
    OutOfBounds,
    #[error("target region is empty")]
    EmptyRegion,
    #[error("target color equals the region's color")]
    SameColor,
    #[error("placed cells overlap existing non-black cells")]
    Overlap,
    #[error("output would exceed the {MAX_SIDE}x{MAX_SIDE} bound")]
    SizeOverflow,
    #[error("no enclosed black interior")]
    NoInterior,
    #[error("target or fill color must not be black")]
    BlackColor,
    #[error("step count must be at least 1")]
    ZeroSteps,
    #[error("composition has no steps")]
    EmptyComposition,
    #[error("nested compositions are not supported")]
    NestedComposition,
    #[error("step {index}: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<OpError>,
    },
}

impl OpError {
    /// Strips composition step annotations.
    pub fn root(&self) -> &OpError {
        match self {
            OpError::Step { source, .. } => source.root(),
            e => e,
        }
    }
}

fn translate(
    g: &Grid,
    cells: &BTreeSet<(usize, usize)>,
    direction: Direction8,
    steps: u32,
) -> Result<Vec<(usize, usize)>, OpError> {
    let (dr, dc) = direction.delta();
    let k = steps as isize;
    cells
        .iter()
        .map(|&(r, c)| {
            let (nr, nc) = (r as isize + dr * k, c as isize + dc * k);
            if g.contains(nr, nc) {
                Ok((nr as usize, nc as usize))
            } else {
                Err(OpError::OutOfBounds)
            }
        })
        .collect()
}

fn check_translation(
    g: &Grid,
    r: &Region,
    direction: Direction8,
    steps: u32,
    disjoint_from_source: bool,
) -> Vec<OpError> {
    let mut violations = Vec::new();
    if r.is_empty() {
        return vec![OpError::EmptyRegion];
    }
    if steps == 0 {
        violations.push(OpError::ZeroSteps);
    }
    let (dr, dc) = direction.delta();
    let k = steps as isize;
    let mut out_of_bounds = false;
    let mut overlap = false;
    for &(row, col) in &r.cells {
        let (nr, nc) = (row as isize + dr * k, col as isize + dc * k);
        if !g.contains(nr, nc) {
            out_of_bounds = true;
            continue;
        }
        let p = (nr as usize, nc as usize);
        let inside_source = r.cells.contains(&p);
        if (inside_source && disjoint_from_source) || (!inside_source && !g.get(p.0, p.1).is_black()) {
            overlap = true;
        }
    }
    if out_of_bounds {
        violations.push(OpError::OutOfBounds);
    }
    if overlap {
        violations.push(OpError::Overlap);
    }
    violations
}

fn first_or_ok(mut v: Vec<OpError>) -> Result<(), OpError> {
    if v.is_empty() {
        Ok(())
    } else {
        Err(v.swap_remove(0))
    }
}

/// Moves region `r` by `steps` unit steps in `direction`.
///
/// Diagonal steps are single Chebyshev steps: `UpRight 1` shifts by `(-1, +1)`.
/// The translated cells must stay inside the grid and may only land on black
/// cells or on the region itself.
pub fn apply_move(g: &Grid, r: &Region, direction: Direction8, steps: u32) -> Result<Grid, OpError> {
    first_or_ok(check_translation(g, r, direction, steps, false))?;
    let targets = translate(g, &r.cells, direction, steps)?;
    let mut out = g.clone();
    for &(row, col) in &r.cells {
        out.set(row, col, Color::BLACK);
    }
    for (&(row, col), &(tr, tc)) in r.cells.iter().zip(&targets) {
        out.set(tr, tc, g.get(row, col));
    }
    Ok(out)
}

pub fn apply_change_color(g: &Grid, r: &Region, target: Color) -> Result<Grid, OpError> {
    first_or_ok(check_change_color(r, target))?;
    let mut out = g.clone();
    for &(row, col) in &r.cells {
        out.set(row, col, target);
    }
    Ok(out)
}

fn check_change_color(r: &Region, target: Color) -> Vec<OpError> {
    let mut v = Vec::new();
    if r.is_empty() {
        v.push(OpError::EmptyRegion);
    }
    if target.is_black() {
        v.push(OpError::BlackColor);
    }
    if r.color == Some(target) {
        v.push(OpError::SameColor);
    }
    v
}

/// Paints a translated copy of `r`, leaving the original in place. The copy
/// must stay inside the grid and land only on black cells outside `r`.
pub fn apply_copy(g: &Grid, r: &Region, direction: Direction8, steps: u32) -> Result<Grid, OpError> {
    first_or_ok(check_translation(g, r, direction, steps, true))?;
    let targets = translate(g, &r.cells, direction, steps)?;
    let mut out = g.clone();
    for (&(row, col), &(tr, tc)) in r.cells.iter().zip(&targets) {
        out.set(tr, tc, g.get(row, col));
    }
    Ok(out)
}

fn check_mirror(g: &Grid, direction: Direction4) -> Vec<OpError> {
    let (rows, cols) = g.shape();
    let doubled = match direction {
        Direction4::Up | Direction4::Down => rows * 2,
        Direction4::Left | Direction4::Right => cols * 2,
    };
    if doubled > MAX_SIDE {
        vec![OpError::SizeOverflow]
    } else {
        Vec::new()
    }
}

/// Concatenates the grid with its reflection on the named side, doubling that
/// dimension.
pub fn apply_mirror(g: &Grid, direction: Direction4) -> Result<Grid, OpError> {
    first_or_ok(check_mirror(g, direction))?;
    let joined = match direction {
        Direction4::Up => grid::flip(g, Axis::Vertical).vstack(g),
        Direction4::Down => g.vstack(&grid::flip(g, Axis::Vertical)),
        Direction4::Left => grid::flip(g, Axis::Horizontal).hstack(g),
        Direction4::Right => g.hstack(&grid::flip(g, Axis::Horizontal)),
    };
    joined.map_err(|_| OpError::SizeOverflow)
}

fn check_fill(g: &Grid, fill: Color) -> Vec<OpError> {
    let mut v = Vec::new();
    if fill.is_black() {
        v.push(OpError::BlackColor);
    }
    if enclosed_black_interior(g).is_empty() {
        v.push(OpError::NoInterior);
    }
    v
}

pub fn apply_fill_internal(g: &Grid, fill: Color) -> Result<Grid, OpError> {
    if fill.is_black() {
        return Err(OpError::BlackColor);
    }
    let interior = enclosed_black_interior(g);
    if interior.is_empty() {
        return Err(OpError::NoInterior);
    }
    let mut out = g.clone();
    for (r, c) in interior {
        out.set(r, c, fill);
    }
    Ok(out)
}

fn check_scale(g: &Grid) -> Vec<OpError> {
    let (a, b) = g.shape();
    if a * a > MAX_SIDE || b * b > MAX_SIDE {
        vec![OpError::SizeOverflow]
    } else {
        Vec::new()
    }
}

/// Tiles an `a x b` grid into an `a² x b²` grid: block `(i, j)` is a copy of
/// the input when input cell `(i, j)` is colored and all black otherwise.
pub fn apply_scale(g: &Grid) -> Result<Grid, OpError> {
    first_or_ok(check_scale(g))?;
    let (a, b) = g.shape();
    let mut out = Grid::black(a * a, b * b).map_err(|_| OpError::SizeOverflow)?;
    for ((i, j), cell) in g.iter() {
        if cell.is_black() {
            continue;
        }
        for ((r, c), color) in g.iter() {
            out.set(i * a + r, j * b + c, color);
        }
    }
    Ok(out)
}

/// Result of one step, with the cells that step created or modified.
struct Applied {
    grid: Grid,
    touched: BTreeSet<(usize, usize)>,
}

fn shifted(cells: &BTreeSet<(usize, usize)>, g: &Grid, d: Direction8, steps: u32) -> BTreeSet<(usize, usize)> {
    translate(g, cells, d, steps)
        .map(|v| v.into_iter().collect())
        .unwrap_or_default()
}

fn apply_atomic(g: &Grid, spec: &OpSpec, target: Option<&Region>) -> Result<Applied, OpError> {
    let region = || -> Result<Region, OpError> {
        match target {
            Some(r) => Ok(r.clone()),
            None => bounding_box_nonblack(g).ok_or(OpError::EmptyRegion),
        }
    };
    match *spec {
        OpSpec::Move { direction, steps } => {
            let r = region()?;
            let grid = apply_move(g, &r, direction, steps)?;
            let touched = shifted(&r.cells, g, direction, steps);
            Ok(Applied { grid, touched })
        }
        OpSpec::ChangeColor { target } => {
            let r = region()?;
            let grid = apply_change_color(g, &r, target)?;
            Ok(Applied {
                grid,
                touched: r.cells,
            })
        }
        OpSpec::Copy { direction, steps } => {
            let r = region()?;
            let grid = apply_copy(g, &r, direction, steps)?;
            let touched = shifted(&r.cells, g, direction, steps);
            Ok(Applied { grid, touched })
        }
        OpSpec::Mirror { direction } => {
            let grid = apply_mirror(g, direction)?;
            let (rows, cols) = g.shape();
            let in_new_half = |&(r, c): &(usize, usize)| match direction {
                Direction4::Up => r < rows,
                Direction4::Down => r >= rows,
                Direction4::Left => c < cols,
                Direction4::Right => c >= cols,
            };
            let touched = grid.nonblack_cells().into_iter().filter(in_new_half).collect();
            Ok(Applied { grid, touched })
        }
        OpSpec::FillInternal { fill } => {
            let touched = enclosed_black_interior(g);
            let grid = apply_fill_internal(g, fill)?;
            Ok(Applied { grid, touched })
        }
        OpSpec::Scale => {
            let grid = apply_scale(g)?;
            let touched = grid.nonblack_cells();
            Ok(Applied { grid, touched })
        }
        OpSpec::Compose { .. } => Err(OpError::NestedComposition),
    }
}

/// Applies a sequence of operations left to right.
///
/// The first region-targeted step acts on all non-black cells of the input.
/// Every later region-targeted step acts on the cells the previous step
/// created or modified (for Copy, the new copy).
pub fn apply_composition(g: &Grid, steps: &[OpSpec]) -> Result<Grid, OpError> {
    if steps.is_empty() {
        return Err(OpError::EmptyComposition);
    }
    let mut current = g.clone();
    let mut last_touched: Option<BTreeSet<(usize, usize)>> = None;
    for (index, step) in steps.iter().enumerate() {
        let wrap = |e: OpError| OpError::Step {
            index,
            source: Box::new(e),
        };
        let target = match (&last_touched, step.is_region_targeted()) {
            (Some(cells), true) => Some(Region::from_cells(&current, cells.clone()).ok_or_else(|| wrap(OpError::EmptyRegion))?),
            _ => None,
        };
        let applied = apply_atomic(&current, step, target.as_ref()).map_err(wrap)?;
        current = applied.grid;
        last_touched = Some(applied.touched);
    }
    Ok(current)
}

/// Applies a rule to a grid. Region-targeted operations act on the grid's
/// non-black cells.
pub fn apply(g: &Grid, spec: &OpSpec) -> Result<Grid, OpError> {
    match spec {
        OpSpec::Compose { steps } => apply_composition(g, steps),
        atomic => apply_atomic(g, atomic, None).map(|a| a.grid),
    }
}

/// Dry-run precondition check. Returns every violated precondition, and is
/// `Ok` exactly when [`apply`] succeeds.
pub fn validate(g: &Grid, spec: &OpSpec) -> Result<(), Vec<OpError>> {
    let violations = match spec {
        OpSpec::Compose { .. } => match apply(g, spec) {
            Ok(_) => Vec::new(),
            Err(e) => vec![e],
        },
        atomic => check_atomic(g, atomic),
    };
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

fn check_atomic(g: &Grid, spec: &OpSpec) -> Vec<OpError> {
    let region = bounding_box_nonblack(g);
    let with_region = |f: &dyn Fn(&Region) -> Vec<OpError>| match &region {
        Some(r) => f(r),
        None => vec![OpError::EmptyRegion],
    };
    match *spec {
        OpSpec::Move { direction, steps } => {
            with_region(&|r| check_translation(g, r, direction, steps, false))
        }
        OpSpec::Copy { direction, steps } => {
            with_region(&|r| check_translation(g, r, direction, steps, true))
        }
        OpSpec::ChangeColor { target } => with_region(&|r| check_change_color(r, target)),
        OpSpec::Mirror { direction } => check_mirror(g, direction),
        OpSpec::FillInternal { fill } => check_fill(g, fill),
        OpSpec::Scale => check_scale(g),
        OpSpec::Compose { .. } => vec![OpError::NestedComposition],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(rows: &[&[u8]]) -> Grid {
        Grid::from_rows(rows).unwrap()
    }

    fn c(code: u8) -> Color {
        Color::new(code).unwrap()
    }

    fn whole(grid: &Grid) -> Region {
        bounding_box_nonblack(grid).unwrap()
    }

    #[test]
    fn move_examples() {
        let grid = g(&[&[0, 0], &[0, 6]]);
        assert_eq!(
            apply_move(&grid, &whole(&grid), Direction8::Up, 1).unwrap(),
            g(&[&[0, 6], &[0, 0]])
        );
        let grid = g(&[&[0, 0], &[7, 0]]);
        assert_eq!(
            apply_move(&grid, &whole(&grid), Direction8::UpRight, 1).unwrap(),
            g(&[&[0, 7], &[0, 0]])
        );
        let grid = g(&[&[0, 5]]);
        assert_eq!(
            apply_move(&grid, &whole(&grid), Direction8::Up, 1),
            Err(OpError::OutOfBounds)
        );
    }

    #[test]
    fn move_of_a_block_may_overlap_itself() {
        let grid = g(&[&[0, 0, 0], &[0, 4, 4], &[0, 4, 4]]);
        assert_eq!(
            apply(&grid, &OpSpec::Move { direction: Direction8::UpLeft, steps: 1 }).unwrap(),
            g(&[&[4, 4, 0], &[4, 4, 0], &[0, 0, 0]])
        );
    }

    #[test]
    fn move_onto_other_cells_is_rejected() {
        let grid = g(&[&[3, 0, 0], &[0, 0, 0]]);
        let r = Region::from_cells(&grid, BTreeSet::from([(0, 0)])).unwrap();
        let mut blocked = grid.clone();
        blocked.set(0, 2, c(5));
        assert_eq!(apply_move(&blocked, &r, Direction8::Right, 2), Err(OpError::Overlap));
    }

    #[test]
    fn empty_region_is_rejected() {
        let grid = Grid::black(3, 3).unwrap();
        assert_eq!(
            apply(&grid, &OpSpec::Move { direction: Direction8::Up, steps: 1 }),
            Err(OpError::EmptyRegion)
        );
        assert_eq!(
            apply(&grid, &OpSpec::ChangeColor { target: c(2) }),
            Err(OpError::EmptyRegion)
        );
    }

    #[test]
    fn change_color_examples() {
        let grid = g(&[&[8, 8], &[0, 0]]);
        assert_eq!(
            apply_change_color(&grid, &whole(&grid), c(2)).unwrap(),
            g(&[&[2, 2], &[0, 0]])
        );
        let grid = g(&[&[0, 4]]);
        assert_eq!(apply_change_color(&grid, &whole(&grid), c(4)), Err(OpError::SameColor));
        let grid = g(&[&[9]]);
        assert_eq!(apply_change_color(&grid, &whole(&grid), c(1)).unwrap(), g(&[&[1]]));
        assert_eq!(apply_change_color(&grid, &whole(&grid), c(0)), Err(OpError::BlackColor));
    }

    #[test]
    fn copy_examples() {
        let grid = g(&[&[0, 0], &[4, 0]]);
        assert_eq!(
            apply_copy(&grid, &whole(&grid), Direction8::Up, 1).unwrap(),
            g(&[&[4, 0], &[4, 0]])
        );
        let grid = g(&[&[0, 0, 0], &[0, 0, 0], &[3, 0, 0]]);
        assert_eq!(
            apply_copy(&grid, &whole(&grid), Direction8::UpRight, 2).unwrap(),
            g(&[&[0, 0, 3], &[0, 0, 0], &[3, 0, 0]])
        );
        let grid = g(&[&[4], &[4]]);
        let err = apply_copy(&grid, &whole(&grid), Direction8::Up, 1).unwrap_err();
        assert!(matches!(err, OpError::Overlap | OpError::OutOfBounds));
        let violations = validate(&grid, &OpSpec::Copy { direction: Direction8::Up, steps: 1 }).unwrap_err();
        assert!(violations.contains(&OpError::Overlap));
        assert!(violations.contains(&OpError::OutOfBounds));
    }

    #[test]
    fn mirror_examples() {
        assert_eq!(
            apply_mirror(&g(&[&[0, 0], &[3, 3]]), Direction4::Up).unwrap(),
            g(&[&[3, 3], &[0, 0], &[0, 0], &[3, 3]])
        );
        assert_eq!(apply_mirror(&g(&[&[5, 0]]), Direction4::Left).unwrap(), g(&[&[0, 5, 5, 0]]));
        assert_eq!(apply_mirror(&g(&[&[2, 2]]), Direction4::Right).unwrap(), g(&[&[2, 2, 2, 2]]));
        assert_eq!(
            apply_mirror(&g(&[&[5, 0]]), Direction4::Down).unwrap(),
            g(&[&[5, 0], &[5, 0]])
        );
        let tall = Grid::black(16, 2).unwrap();
        assert_eq!(apply_mirror(&tall, Direction4::Down), Err(OpError::SizeOverflow));
        assert!(apply_mirror(&tall, Direction4::Right).is_ok());
    }

    #[test]
    fn fill_internal_examples() {
        let ring = g(&[&[4, 4, 4], &[4, 0, 4], &[4, 4, 4]]);
        assert_eq!(
            apply_fill_internal(&ring, c(2)).unwrap(),
            g(&[&[4, 4, 4], &[4, 2, 4], &[4, 4, 4]])
        );
        assert_eq!(apply_fill_internal(&g(&[&[4, 4], &[4, 0]]), c(2)), Err(OpError::NoInterior));

        let ring4 = g(&[&[3, 3, 3, 3], &[3, 0, 0, 3], &[3, 0, 0, 3], &[3, 3, 3, 3]]);
        assert_eq!(
            apply_fill_internal(&ring4, c(6)).unwrap(),
            g(&[&[3, 3, 3, 3], &[3, 6, 6, 3], &[3, 6, 6, 3], &[3, 3, 3, 3]])
        );
    }

    #[test]
    fn scale_examples() {
        assert_eq!(
            apply_scale(&g(&[&[3, 0], &[0, 3]])).unwrap(),
            g(&[&[3, 0, 0, 0], &[0, 3, 0, 0], &[0, 0, 3, 0], &[0, 0, 0, 3]])
        );
        assert_eq!(
            apply_scale(&Grid::black(2, 2).unwrap()).unwrap(),
            Grid::black(4, 4).unwrap()
        );
        assert_eq!(
            apply_scale(&Grid::filled(2, 2, c(7)).unwrap()).unwrap(),
            Grid::filled(4, 4, c(7)).unwrap()
        );
        assert_eq!(apply_scale(&Grid::black(6, 2).unwrap()), Err(OpError::SizeOverflow));
        assert_eq!(apply_scale(&Grid::black(5, 5).unwrap()).unwrap().shape(), (25, 25));
    }

    #[test]
    fn composition_move_then_recolor() {
        // Blue block moved down one row, then turned red.
        let grid = g(&[&[1, 1, 0], &[1, 1, 0], &[0, 0, 0]]);
        let rule = OpSpec::Compose {
            steps: vec![
                OpSpec::Move { direction: Direction8::Down, steps: 1 },
                OpSpec::ChangeColor { target: c(2) },
            ],
        };
        assert_eq!(
            apply(&grid, &rule).unwrap(),
            g(&[&[0, 0, 0], &[2, 2, 0], &[2, 2, 0]])
        );
    }

    #[test]
    fn composition_copy_then_move_targets_the_copy() {
        let grid = g(&[&[0, 0, 0], &[0, 0, 0], &[5, 0, 0]]);
        let rule = OpSpec::Compose {
            steps: vec![
                OpSpec::Copy { direction: Direction8::Up, steps: 2 },
                OpSpec::Move { direction: Direction8::Right, steps: 1 },
            ],
        };
        assert_eq!(
            apply(&grid, &rule).unwrap(),
            g(&[&[0, 5, 0], &[0, 0, 0], &[5, 0, 0]])
        );
    }

    #[test]
    fn composition_of_one_step_matches_bare_op() {
        let grid = g(&[&[0, 0, 0], &[0, 0, 0], &[5, 0, 0]]);
        let op = OpSpec::Copy { direction: Direction8::UpRight, steps: 1 };
        assert_eq!(
            apply(&grid, &OpSpec::Compose { steps: vec![op.clone()] }),
            apply(&grid, &op)
        );
        assert_eq!(
            apply(&grid, &OpSpec::Compose { steps: vec![] }),
            Err(OpError::EmptyComposition)
        );
    }

    #[test]
    fn composition_errors_carry_step_index() {
        let grid = g(&[&[0, 0], &[5, 0]]);
        let rule = OpSpec::Compose {
            steps: vec![
                OpSpec::Copy { direction: Direction8::Up, steps: 1 },
                OpSpec::Move { direction: Direction8::Up, steps: 1 },
            ],
        };
        let err = apply(&grid, &rule).unwrap_err();
        assert!(matches!(err, OpError::Step { index: 1, .. }));
        assert_eq!(err.root(), &OpError::OutOfBounds);
        assert!(validate(&grid, &rule).is_err());
    }

    #[test]
    fn validate_examples() {
        assert_eq!(
            validate(&g(&[&[0, 5]]), &OpSpec::Move { direction: Direction8::Up, steps: 1 }),
            Err(vec![OpError::OutOfBounds])
        );
        assert_eq!(
            validate(&g(&[&[0, 0], &[4, 0]]), &OpSpec::Copy { direction: Direction8::Up, steps: 1 }),
            Ok(())
        );
        assert_eq!(
            validate(&g(&[&[4, 4], &[4, 0]]), &OpSpec::FillInternal { fill: c(2) }),
            Err(vec![OpError::NoInterior])
        );
    }

    #[test]
    fn opspec_json_shape() {
        let spec = OpSpec::Move { direction: Direction8::UpRight, steps: 2 };
        assert_eq!(
            serde_json::to_string(&spec).unwrap(),
            r#"{"op":"move","direction":"up_right","steps":2}"#
        );
        assert_eq!(serde_json::to_string(&OpSpec::Scale).unwrap(), r#"{"op":"scale"}"#);
        let compose: OpSpec = serde_json::from_str(
            r#"{"op":"compose","steps":[{"op":"copy","direction":"up","steps":1},{"op":"change_color","target":2}]}"#,
        )
        .unwrap();
        assert!(matches!(compose, OpSpec::Compose { ref steps } if steps.len() == 2));
        assert!(serde_json::from_str::<OpSpec>(r#"{"op":"move","direction":"up","steps":1,"extra":0}"#).is_err());
        assert!(serde_json::from_str::<OpSpec>(r#"{"op":"rotate"}"#).is_err());
        assert!(serde_json::from_str::<OpSpec>(r#"{"op":"change_color","target":12}"#).is_err());
    }
}
