//! Strategies, brute-force oracles and property checks shared by the
//! property suite and the acceptance run.
#![allow(dead_code)]

use std::collections::BTreeSet;

use araoc_core::grid::{self, enclosed_black_interior, flip};
use araoc_core::ops::{apply_change_color, apply_copy, apply_fill_internal, apply_mirror, apply_move, apply_scale};
use araoc_core::{apply, validate, Axis, Color, Direction4, Direction8, Grid, OpError, OpSpec, Region};
use proptest::prelude::*;
use proptest::sample::select;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

/// Runs `test` over `cases` values and reports the minimal failure.
pub fn check<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn to_grid(rows: Vec<Vec<u8>>) -> Grid {
    Grid::from_rows(&rows).unwrap()
}

/// Any grid up to `max_r` x `max_c` with uniformly random colors.
pub fn dense_grid(max_r: usize, max_c: usize) -> impl Strategy<Value = Grid> {
    (1..=max_r, 1..=max_c)
        .prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(0u8..10, c), r))
        .prop_map(to_grid)
}

/// Mostly black grids with scattered colored cells.
pub fn sparse_grid(max_r: usize, max_c: usize) -> impl Strategy<Value = Grid> {
    let cell = prop_oneof![3 => Just(0u8), 1 => 1u8..10];
    (1..=max_r, 1..=max_c)
        .prop_flat_map(move |(r, c)| prop::collection::vec(prop::collection::vec(cell.clone(), c), r))
        .prop_map(to_grid)
}

/// A black grid holding one solid single-color rectangle.
pub fn rect_grid(max_side: usize) -> impl Strategy<Value = Grid> {
    (1..=max_side, 1..=max_side)
        .prop_flat_map(|(r, c)| (Just(r), Just(c), 1..=r, 1..=c, 1u8..10))
        .prop_flat_map(|(r, c, h, w, color)| (Just((r, c, h, w, color)), 0..=r - h, 0..=c - w))
        .prop_map(|((r, c, h, w, color), top, left)| {
            let mut g = Grid::black(r, c).unwrap();
            for i in top..top + h {
                for j in left..left + w {
                    g.set(i, j, Color::new(color).unwrap());
                }
            }
            g
        })
}

/// A thickness-1 rectangular ring, sometimes with extra noise cells.
pub fn ring_grid(max_side: usize) -> impl Strategy<Value = Grid> {
    (3..=max_side, 3..=max_side)
        .prop_flat_map(|(r, c)| (Just(r), Just(c), 3..=r, 3..=c, 1u8..10))
        .prop_flat_map(|(r, c, h, w, color)| {
            (
                Just((r, c, h, w, color)),
                0..=r - h,
                0..=c - w,
                prop::collection::vec((0..r, 0..c, 1u8..10), 0..3),
            )
        })
        .prop_map(|((r, c, h, w, color), top, left, noise)| {
            let mut g = Grid::black(r, c).unwrap();
            let col = Color::new(color).unwrap();
            for i in top..top + h {
                for j in left..left + w {
                    if i == top || i == top + h - 1 || j == left || j == left + w - 1 {
                        g.set(i, j, col);
                    }
                }
            }
            for (i, j, k) in noise {
                g.set(i, j, Color::new(k).unwrap());
            }
            g
        })
}

pub fn dir8() -> impl Strategy<Value = Direction8> {
    select(Direction8::ALL.to_vec())
}

pub fn dir4() -> impl Strategy<Value = Direction4> {
    select(Direction4::ALL.to_vec())
}

pub fn color() -> impl Strategy<Value = Color> {
    (0u8..10).prop_map(|c| Color::new(c).unwrap())
}

pub fn non_black() -> impl Strategy<Value = Color> {
    (1u8..10).prop_map(|c| Color::new(c).unwrap())
}

/// Atomic rules with unrestricted parameters, including invalid ones.
pub fn atomic_spec() -> impl Strategy<Value = OpSpec> {
    prop_oneof![
        (dir8(), 0u32..10).prop_map(|(direction, steps)| OpSpec::Move { direction, steps }),
        color().prop_map(|target| OpSpec::ChangeColor { target }),
        (dir8(), 0u32..10).prop_map(|(direction, steps)| OpSpec::Copy { direction, steps }),
        dir4().prop_map(|direction| OpSpec::Mirror { direction }),
        color().prop_map(|fill| OpSpec::FillInternal { fill }),
        Just(OpSpec::Scale),
    ]
}

pub fn any_spec() -> impl Strategy<Value = OpSpec> {
    prop_oneof![
        4 => atomic_spec(),
        1 => prop::collection::vec(atomic_spec(), 0..3).prop_map(|steps| OpSpec::Compose { steps }),
    ]
}

pub fn region(g: &Grid) -> Region {
    grid::bounding_box_nonblack(g).unwrap()
}

fn color_multiset(g: &Grid) -> Vec<u8> {
    let mut v: Vec<u8> = g.cells().iter().filter(|c| !c.is_black()).map(|c| c.code()).collect();
    v.sort_unstable();
    v
}

// Brute-force oracles.

/// Largest k with a nonzero k x k minor, determinants by cofactor expansion.
pub fn rank_by_minors(g: &Grid) -> usize {
    let m: Vec<Vec<i64>> = (0..g.rows())
        .map(|r| (0..g.cols()).map(|c| g.get(r, c).code() as i64).collect())
        .collect();
    for k in (1..=g.rows().min(g.cols())).rev() {
        for rows in subsets(g.rows(), k) {
            for cols in subsets(g.cols(), k) {
                let sub: Vec<Vec<i64>> = rows.iter().map(|&r| cols.iter().map(|&c| m[r][c]).collect()).collect();
                if det(&sub) != 0 {
                    return k;
                }
            }
        }
    }
    0
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

fn det(m: &[Vec<i64>]) -> i64 {
    if m.len() == 1 {
        return m[0][0];
    }
    (0..m.len())
        .map(|j| {
            let minor: Vec<Vec<i64>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect())
                .collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            sign * m[0][j] * det(&minor)
        })
        .sum()
}

/// Black cells with no 4-connected black path to the border, by testing
/// each cell separately.
pub fn interior_by_search(g: &Grid) -> BTreeSet<(usize, usize)> {
    let (rows, cols) = g.shape();
    let mut out = BTreeSet::new();
    for (p, c) in g.iter() {
        if !c.is_black() {
            continue;
        }
        let mut seen = BTreeSet::from([p]);
        let mut stack = vec![p];
        let mut escapes = false;
        while let Some((r, c)) = stack.pop() {
            if r == 0 || c == 0 || r + 1 == rows || c + 1 == cols {
                escapes = true;
                break;
            }
            for (nr, nc) in [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)] {
                if g.get(nr, nc).is_black() && seen.insert((nr, nc)) {
                    stack.push((nr, nc));
                }
            }
        }
        if !escapes {
            out.insert(p);
        }
    }
    out
}

// Per-operation property checks.

pub fn check_move(cases: u32) -> Result<(), String> {
    check(cases, (rect_grid(16), dir8(), 1u32..=8), |(g, d, s)| {
        let Ok(out) = apply_move(&g, &region(&g), d, s) else {
            return Ok(());
        };
        prop_assert_eq!(out.shape(), g.shape());
        prop_assert_eq!(color_multiset(&out), color_multiset(&g));
        let back = apply_move(&out, &region(&out), d.opposite(), s).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(back, g);
        Ok(())
    })
}

pub fn check_change_color(cases: u32) -> Result<(), String> {
    check(cases, (rect_grid(16), color()), |(g, target)| {
        let r = region(&g);
        match apply_change_color(&g, &r, target) {
            Ok(out) => {
                prop_assert_eq!(out.nonblack_cells(), g.nonblack_cells());
                prop_assert!(out.nonblack_cells().iter().all(|&(i, j)| out.get(i, j) == target));
            }
            Err(e) => prop_assert!(target.is_black() || r.color == Some(target), "{e}"),
        }
        Ok(())
    })
}

pub fn check_copy(cases: u32) -> Result<(), String> {
    check(cases, (rect_grid(16), dir8(), 1u32..=8), |(g, d, s)| {
        let Ok(out) = apply_copy(&g, &region(&g), d, s) else {
            return Ok(());
        };
        prop_assert_eq!(out.shape(), g.shape());
        prop_assert_eq!(out.nonblack_cells().len(), 2 * g.nonblack_cells().len());
        prop_assert!(g.nonblack_cells().is_subset(&out.nonblack_cells()));
        Ok(())
    })
}

pub fn check_mirror(cases: u32) -> Result<(), String> {
    check(cases, (sparse_grid(15, 15), dir4()), |(g, d)| {
        let out = apply_mirror(&g, d).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let (r, c) = g.shape();
        let (axis, orig, other) = match d {
            Direction4::Up => (Axis::Vertical, (r, 0), (0, 0)),
            Direction4::Down => (Axis::Vertical, (0, 0), (r, 0)),
            Direction4::Left => (Axis::Horizontal, (0, c), (0, 0)),
            Direction4::Right => (Axis::Horizontal, (0, 0), (0, c)),
        };
        let expect_shape = if axis == Axis::Vertical { (2 * r, c) } else { (r, 2 * c) };
        prop_assert_eq!(out.shape(), expect_shape);
        let flipped = flip(&g, axis);
        for i in 0..r {
            for j in 0..c {
                prop_assert_eq!(out.get(orig.0 + i, orig.1 + j), g.get(i, j));
                prop_assert_eq!(out.get(other.0 + i, other.1 + j), flipped.get(i, j));
            }
        }
        prop_assert_eq!(flip(&out, axis), out);
        Ok(())
    })
}

pub fn check_mirror_overflow(cases: u32) -> Result<(), String> {
    check(cases, (dense_grid(30, 30), dir4()), |(g, d)| {
        let limit = match d {
            Direction4::Up | Direction4::Down => g.rows(),
            Direction4::Left | Direction4::Right => g.cols(),
        };
        match apply_mirror(&g, d) {
            Ok(_) => prop_assert!(2 * limit <= 30),
            Err(e) => prop_assert!(2 * limit > 30 && e == OpError::SizeOverflow),
        }
        Ok(())
    })
}

pub fn check_fill_internal(cases: u32) -> Result<(), String> {
    check(cases, (ring_grid(16), non_black()), |(g, fill)| {
        let interior = enclosed_black_interior(&g);
        prop_assert_eq!(&interior, &interior_by_search(&g));
        match apply_fill_internal(&g, fill) {
            Ok(out) => {
                let changed: BTreeSet<_> = g.iter().filter(|&(p, c)| out.get(p.0, p.1) != c).map(|(p, _)| p).collect();
                prop_assert_eq!(&changed, &interior);
                prop_assert!(interior.iter().all(|&(i, j)| out.get(i, j) == fill));
            }
            Err(e) => prop_assert!(interior.is_empty() && e == OpError::NoInterior, "{e}"),
        }
        Ok(())
    })
}

pub fn check_scale(cases: u32) -> Result<(), String> {
    check(cases, sparse_grid(5, 5), |g| {
        let (a, b) = g.shape();
        match apply_scale(&g) {
            Ok(out) => {
                prop_assert_eq!(out.shape(), (a * a, b * b));
                for bi in 0..a {
                    for bj in 0..b {
                        let on = !g.get(bi, bj).is_black();
                        for i in 0..a {
                            for j in 0..b {
                                let want = if on { g.get(i, j) } else { Color::BLACK };
                                prop_assert_eq!(out.get(bi * a + i, bj * b + j), want);
                            }
                        }
                    }
                }
            }
            Err(e) => prop_assert!(g.is_all_black(), "{e}"),
        }
        Ok(())
    })
}

/// validate and apply agree on success for arbitrary grids and rules.
pub fn check_validate_matches_apply(cases: u32) -> Result<(), String> {
    let grids = prop_oneof![rect_grid(12), ring_grid(12), sparse_grid(12, 12), dense_grid(6, 6)];
    check(cases, (grids, any_spec()), |(g, spec)| {
        prop_assert_eq!(validate(&g, &spec).is_ok(), apply(&g, &spec).is_ok(), "{}", spec);
        Ok(())
    })
}

// Generation audits.

fn solid_rect(g: &Grid) -> Option<(usize, usize)> {
    let r = grid::bounding_box_nonblack(g)?;
    let full = r.len() == r.bbox.height() * r.bbox.width();
    (full && r.color.is_some()).then(|| (r.bbox.height(), r.bbox.width()))
}

fn is_ring(g: &Grid) -> bool {
    let Some(r) = grid::bounding_box_nonblack(g) else {
        return false;
    };
    let b = r.bbox;
    let border = 2 * (b.height() + b.width()) - 4;
    b.height() >= 3
        && b.width() >= 3
        && r.color.is_some()
        && r.len() == border
        && r.cells
            .iter()
            .all(|&(i, j)| i == b.top || i == b.bottom || j == b.left || j == b.right)
}

fn steps_in(spec: &OpSpec, lo: u32, hi: u32) -> bool {
    match spec {
        OpSpec::Move { steps, .. } | OpSpec::Copy { steps, .. } => (lo..=hi).contains(steps),
        OpSpec::Compose { steps } => steps.iter().all(|s| steps_in(s, lo, hi)),
        _ => true,
    }
}

/// Checks the task's shape, oracle consistency and every sampled parameter
/// against the given inclusive grid-side and step ranges.
pub fn audit_task(t: &araoc_core::Task, grid: (usize, usize), steps: (u32, u32)) -> Result<(), String> {
    use araoc_core::Family;
    t.audit()?;
    let fail = |m: String| Err(format!("{}: {m}", t.id));
    if t.train.len() != 3 || t.test.len() != 1 {
        return fail(format!("{} train / {} test pairs", t.train.len(), t.test.len()));
    }
    let rule = t.rule.as_ref().ok_or("no rule")?;
    if !steps_in(rule, steps.0, steps.1) {
        return fail(format!("steps outside {steps:?} in {rule}"));
    }
    let mut inputs = BTreeSet::new();
    for p in t.train.iter().chain(&t.test) {
        let g = &p.input;
        let (a, b) = g.shape();
        if !(grid.0..=grid.1).contains(&a) || !(grid.0..=grid.1).contains(&b) {
            return fail(format!("input {a}x{b} outside {grid:?}"));
        }
        if p.output.rows() > 30 || p.output.cols() > 30 {
            return fail("output larger than 30".into());
        }
        inputs.insert(g.clone());
        match (t.family, rule) {
            (Family::Move | Family::Copy | Family::Composition, _) | (Family::ChangeColor, _) => {
                let Some((h, w)) = solid_rect(g) else {
                    return fail("subgrid is not a solid single-color rectangle".into());
                };
                if h > a.min(b) || w > a.min(b) {
                    return fail(format!("subgrid {h}x{w} exceeds min side of {a}x{b}"));
                }
                if let OpSpec::ChangeColor { target } = rule {
                    if target.is_black() || grid::bounding_box_nonblack(g).unwrap().color == Some(*target) {
                        return fail("change-color target is black or equals the source".into());
                    }
                }
            }
            (Family::FillInternal, OpSpec::FillInternal { fill }) => {
                if !is_ring(g) || fill.is_black() || grid::bounding_box_nonblack(g).unwrap().color == Some(*fill) {
                    return fail("fill input is not a ring of another color".into());
                }
            }
            (Family::Scale, OpSpec::Scale) => {
                let n = g.nonblack_cells().len();
                if n == 0 || n == a * b {
                    return fail("scale input is empty or full".into());
                }
                if p.output.shape() != (a * a, b * b) {
                    return fail("scale output shape".into());
                }
            }
            (Family::Mirror, OpSpec::Mirror { .. }) => {}
            (f, r) => return fail(format!("family {f} with rule {r}")),
        }
    }
    if inputs.len() != 4 {
        return fail("repeated input grids".into());
    }
    Ok(())
}
