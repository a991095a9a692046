//! Seeded, rejection-based task generation.
//!
//! Every task draws from its own ChaCha stream seeded from
//! `(master_seed, variant, family, index)`, so output never depends on
//! generation order or worker count.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::grid::{Color, Grid, MAX_SIDE};
use crate::ops::{self, Direction4, Direction8, OpSpec};

pub const GENERATOR_VERSION: &str = concat!("araoc-gen/", env!("CARGO_PKG_VERSION"));

/// Sampling attempts allowed per task before giving up.
pub const RETRY_BUDGET: usize = 1000;

pub const TRAIN_PAIRS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Move,
    ChangeColor,
    Copy,
    Mirror,
    FillInternal,
    Scale,
    Composition,
    Arc,
}

impl Family {
    /// The six single-operation families of the benchmark.
    pub const ATOMIC: [Family; 6] = [
        Family::Move,
        Family::ChangeColor,
        Family::Copy,
        Family::Mirror,
        Family::FillInternal,
        Family::Scale,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Move => "move",
            Family::ChangeColor => "change_color",
            Family::Copy => "copy",
            Family::Mirror => "mirror",
            Family::FillInternal => "fill_internal",
            Family::Scale => "scale",
            Family::Composition => "composition",
            Family::Arc => "arc",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        [
            Family::Move,
            Family::ChangeColor,
            Family::Copy,
            Family::Mirror,
            Family::FillInternal,
            Family::Scale,
            Family::Composition,
            Family::Arc,
        ]
        .into_iter()
        .find(|f| f.as_str() == norm)
        .ok_or_else(|| format!("unknown family `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Standard,
    Small,
    Controlled,
    MirrorLr,
    Composition,
    Finetune,
    Arc,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Standard => "standard",
            Variant::Small => "small",
            Variant::Controlled => "controlled",
            Variant::MirrorLr => "mirror_lr",
            Variant::Composition => "composition",
            Variant::Finetune => "finetune",
            Variant::Arc => "arc",
        }
    }

    fn id_prefix(self) -> &'static str {
        match self {
            Variant::Standard => "araoc",
            Variant::MirrorLr => "mirror-lr",
            v => v.as_str(),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pair {
    pub input: Grid,
    pub output: Grid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskMeta {
    pub seed: u64,
    pub generator_version: String,
    pub variant: Variant,
    /// Shared label for tasks built from the same base grids (controlled
    /// groups, mirror left/right duos).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combination: Option<String>,
}

/// A set of input/output pairs sharing one rule.
///
/// Loaded ARC tasks carry no rule and no generation metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub family: Family,
    #[serde(default)]
    pub rule: Option<OpSpec>,
    pub train: Vec<Pair>,
    pub test: Vec<Pair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<TaskMeta>,
}

impl Task {
    /// Grids used for content equality: every train and test grid, in order.
    pub fn content_key(&self) -> Vec<&Grid> {
        self.train
            .iter()
            .chain(&self.test)
            .flat_map(|p| [&p.input, &p.output])
            .collect()
    }

    pub fn variant(&self) -> Variant {
        self.meta.as_ref().map(|m| m.variant).unwrap_or(Variant::Arc)
    }

    /// Re-applies the rule to every pair and reports the first mismatch.
    /// Pair indices count train pairs first, then test pairs.
    pub fn audit(&self) -> Result<(), String> {
        let rule = self.rule.as_ref().ok_or("task has no rule")?;
        for (i, pair) in self.train.iter().chain(&self.test).enumerate() {
            match ops::apply(&pair.input, rule) {
                Ok(out) if out == pair.output => {}
                Ok(_) => return Err(format!("{}: pair {i} output differs from oracle", self.id)),
                Err(e) => return Err(format!("{}: pair {i} oracle error: {e}", self.id)),
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("no valid {family} task `{id}` after {RETRY_BUDGET} attempts")]
    ExhaustedRetries { family: Family, id: String },
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
}

/// Numeric sampling ranges, all inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ranges {
    pub grid: (usize, usize),
    pub steps: (u32, u32),
}

impl Ranges {
    pub fn standard(family: Family) -> Ranges {
        let grid = match family {
            Family::FillInternal => (3, 16),
            Family::Scale => (2, 5),
            _ => (1, 16),
        };
        Ranges { grid, steps: (1, 8) }
    }

    /// Half of the standard range on every axis.
    pub fn small(family: Family) -> Ranges {
        let std = Ranges::standard(family);
        Ranges {
            grid: (std.grid.0, std.grid.1 / 2),
            steps: (std.steps.0, std.steps.1 / 2),
        }
    }

    pub fn mirror_pairs() -> Ranges {
        Ranges {
            grid: (3, 7),
            steps: (1, 8),
        }
    }

    fn check(&self) -> Result<(), GenError> {
        let (lo, hi) = self.grid;
        if lo == 0 || lo > hi || hi > MAX_SIDE || self.steps.0 == 0 || self.steps.0 > self.steps.1 {
            return Err(GenError::InvalidConfig(format!("bad ranges {self:?}")));
        }
        Ok(())
    }
}

/// Per-task seed derived from the master seed and the task's coordinates.
pub fn derive_seed(master_seed: u64, variant: Variant, family: Family, index: usize, salt: u32) -> u64 {
    let mut h = Sha256::new();
    h.update(b"araoc-task-seed\0");
    h.update(master_seed.to_le_bytes());
    h.update(variant.as_str().as_bytes());
    h.update([0]);
    h.update(family.as_str().as_bytes());
    h.update([0]);
    h.update((index as u64).to_le_bytes());
    h.update(salt.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 digest has 32 bytes"))
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_non_black<R: Rng>(rng: &mut R) -> Color {
    Color::new(rng.random_range(1..=9)).expect("1..=9 are valid colors")
}

fn random_non_black_except<R: Rng>(rng: &mut R, except: Color) -> Color {
    let choices: Vec<Color> = Color::non_black().filter(|&c| c != except).collect();
    *choices.choose(rng).expect("eight colors remain")
}

/// Draws a rule for the family. Move and Copy use uniform direction and steps.
pub fn sample_rule<R: Rng>(family: Family, ranges: &Ranges, rng: &mut R) -> OpSpec {
    let steps = |rng: &mut R| rng.random_range(ranges.steps.0..=ranges.steps.1);
    match family {
        Family::Move => OpSpec::Move {
            direction: *Direction8::ALL.choose(rng).unwrap(),
            steps: steps(rng),
        },
        Family::Copy => OpSpec::Copy {
            direction: *Direction8::ALL.choose(rng).unwrap(),
            steps: steps(rng),
        },
        Family::ChangeColor => OpSpec::ChangeColor {
            target: random_non_black(rng),
        },
        Family::Mirror => OpSpec::Mirror {
            direction: *Direction4::ALL.choose(rng).unwrap(),
        },
        Family::FillInternal => OpSpec::FillInternal {
            fill: random_non_black(rng),
        },
        Family::Scale => OpSpec::Scale,
        Family::Composition => OpSpec::Compose {
            steps: vec![
                OpSpec::Copy {
                    direction: *Direction8::ALL.choose(rng).unwrap(),
                    steps: steps(rng),
                },
                OpSpec::Move {
                    direction: *Direction8::ALL.choose(rng).unwrap(),
                    steps: steps(rng),
                },
            ],
        },
        Family::Arc => unreachable!("ARC tasks are loaded, never generated"),
    }
}

/// Axis-aligned rectangle as `(top, left)`; height and width are shared.
type Rect = (isize, isize);

fn overlaps(a: Rect, b: Rect, h: usize, w: usize) -> bool {
    (a.0 - b.0).unsigned_abs() < h && (a.1 - b.1).unsigned_abs() < w
}

/// Whether a solid `h x w` rectangle at `(top, left)` of an `a x b` grid
/// admits the rule. Exact for translations and compositions of them; other
/// rules are left to the oracle.
fn placement_admits(rule: &OpSpec, a: usize, b: usize, h: usize, w: usize, top: usize, left: usize) -> bool {
    let fits = |r: Rect| r.0 >= 0 && r.1 >= 0 && r.0 as usize + h <= a && r.1 as usize + w <= b;
    let shift = |r: Rect, d: Direction8, s: u32| {
        let (dr, dc) = d.delta();
        (r.0 + dr * s as isize, r.1 + dc * s as isize)
    };
    let steps: &[OpSpec] = match rule {
        OpSpec::Compose { steps } => steps,
        single => std::slice::from_ref(single),
    };
    // Rectangles currently painted, and the one the next step acts on.
    let mut placed: Vec<Rect> = vec![(top as isize, left as isize)];
    let mut target = 0;
    for step in steps {
        match *step {
            OpSpec::Move { direction, steps } => {
                let moved = shift(placed[target], direction, steps);
                let blocked = placed
                    .iter()
                    .enumerate()
                    .any(|(i, &r)| i != target && overlaps(r, moved, h, w));
                if !fits(moved) || blocked {
                    return false;
                }
                placed[target] = moved;
            }
            OpSpec::Copy { direction, steps } => {
                let copy = shift(placed[target], direction, steps);
                if !fits(copy) || placed.iter().any(|&r| overlaps(r, copy, h, w)) {
                    return false;
                }
                placed.push(copy);
                target = placed.len() - 1;
            }
            _ => return true,
        }
    }
    true
}

fn rectangle_grid(a: usize, b: usize, h: usize, w: usize, top: usize, left: usize, color: Color) -> Grid {
    let mut g = Grid::black(a, b).expect("dimensions come from validated ranges");
    for r in top..top + h {
        for c in left..left + w {
            g.set(r, c, color);
        }
    }
    g
}

/// One attempt at an input grid admitting every rule in `rules`.
/// `color_rule` fixes the per-task color constraint.
fn sample_input<R: Rng>(family: Family, rules: &[OpSpec], ranges: &Ranges, rng: &mut R) -> Option<Grid> {
    let (lo, hi) = ranges.grid;
    let a = rng.random_range(lo..=hi);
    let b = rng.random_range(lo..=hi);
    match family {
        Family::Scale => {
            let color = random_non_black(rng);
            let mut g = Grid::black(a, b).ok()?;
            for r in 0..a {
                for c in 0..b {
                    if rng.random_bool(0.5) {
                        g.set(r, c, color);
                    }
                }
            }
            let colored = g.nonblack_cells().len();
            (colored > 0 && colored < a * b).then_some(g)
        }
        Family::FillInternal => {
            let fill = match rules.first() {
                Some(OpSpec::FillInternal { fill }) => *fill,
                _ => return None,
            };
            let h = rng.random_range(1..=a.min(b));
            let w = rng.random_range(1..=a.min(b));
            if h < 3 || w < 3 {
                return None;
            }
            let top = rng.random_range(0..=a - h);
            let left = rng.random_range(0..=b - w);
            let ring = random_non_black_except(rng, fill);
            let mut g = rectangle_grid(a, b, h, w, top, left, ring);
            for r in top + 1..top + h - 1 {
                for c in left + 1..left + w - 1 {
                    g.set(r, c, Color::BLACK);
                }
            }
            Some(g)
        }
        _ => {
            let h = rng.random_range(1..=a.min(b));
            let w = rng.random_range(1..=a.min(b));
            let color = match rules.first() {
                Some(OpSpec::ChangeColor { target }) => random_non_black_except(rng, *target),
                _ => random_non_black(rng),
            };
            let positions: Vec<(usize, usize)> = (0..=a - h)
                .flat_map(|t| (0..=b - w).map(move |l| (t, l)))
                .filter(|&(t, l)| rules.iter().all(|rule| placement_admits(rule, a, b, h, w, t, l)))
                .collect();
            let &(top, left) = positions.choose(rng)?;
            Some(rectangle_grid(a, b, h, w, top, left, color))
        }
    }
}

/// Attempts left for one task.
struct Budget(usize);

impl Budget {
    fn spend(&mut self) -> bool {
        if self.0 == 0 {
            return false;
        }
        self.0 -= 1;
        true
    }
}

/// Samples an input admitting all `rules` and distinct from `taken`.
fn sample_valid_input<R: Rng>(
    family: Family,
    rules: &[OpSpec],
    ranges: &Ranges,
    taken: &[&Grid],
    budget: &mut Budget,
    rng: &mut R,
) -> Option<Grid> {
    while budget.spend() {
        let Some(g) = sample_input(family, rules, ranges, rng) else {
            continue;
        };
        if taken.contains(&&g) {
            continue;
        }
        if rules.iter().all(|rule| ops::validate(&g, rule).is_ok()) {
            return Some(g);
        }
    }
    None
}

fn make_pair(input: Grid, rule: &OpSpec) -> Pair {
    let output = ops::apply(&input, rule).expect("input was validated against the rule");
    Pair { input, output }
}

/// Samples three train pairs and one test pair under `rule`. With
/// `fixed_test`, that grid is the test input and train inputs avoid it.
fn sample_pairs<R: Rng>(
    family: Family,
    rule: &OpSpec,
    ranges: &Ranges,
    fixed_test: Option<&Grid>,
    budget: &mut Budget,
    rng: &mut R,
) -> Option<(Vec<Pair>, Vec<Pair>)> {
    let rules = std::slice::from_ref(rule);
    let mut inputs: Vec<Grid> = Vec::with_capacity(TRAIN_PAIRS + 1);
    let total = if fixed_test.is_some() { TRAIN_PAIRS } else { TRAIN_PAIRS + 1 };
    while inputs.len() < total {
        let mut taken: Vec<&Grid> = inputs.iter().collect();
        taken.extend(fixed_test);
        let g = sample_valid_input(family, rules, ranges, &taken, budget, rng)?;
        inputs.push(g);
    }
    if let Some(t) = fixed_test {
        inputs.push(t.clone());
    }
    let mut pairs: Vec<Pair> = inputs.into_iter().map(|g| make_pair(g, rule)).collect();
    let test = pairs.split_off(TRAIN_PAIRS);
    Some((pairs, test))
}

/// Whether some placement of a single cell in a grid of maximal size admits
/// `rule`. Rejects rules no input could satisfy, such as compositions with
/// zero net offset.
fn rule_feasible(rule: &OpSpec, ranges: &Ranges) -> bool {
    let side = ranges.grid.1;
    (0..side).any(|t| (0..side).any(|l| placement_admits(rule, side, side, 1, 1, t, l)))
}

/// Attempts spent on one rule before a fresh rule is drawn.
const ATTEMPTS_PER_RULE: usize = RETRY_BUDGET / 4;

fn meta(seed: u64, variant: Variant) -> TaskMeta {
    TaskMeta {
        seed,
        generator_version: GENERATOR_VERSION.to_string(),
        variant,
        group: None,
        combination: None,
    }
}

/// Generates one task from its own seed.
pub fn gen_task(family: Family, variant: Variant, ranges: &Ranges, id: String, seed: u64) -> Result<Task, GenError> {
    ranges.check()?;
    let mut rng = rng_for(seed);
    let mut budget = Budget(RETRY_BUDGET);
    let exhausted = || GenError::ExhaustedRetries {
        family,
        id: id.clone(),
    };
    // Rules whose placements turn out too rare are redrawn, within the
    // overall per-task budget.
    let (rule, train, test) = loop {
        if budget.0 == 0 {
            return Err(exhausted());
        }
        let rule = sample_rule(family, ranges, &mut rng);
        if !rule_feasible(&rule, ranges) {
            budget.spend();
            continue;
        }
        let allowance = ATTEMPTS_PER_RULE.min(budget.0);
        let mut round = Budget(allowance);
        let sampled = sample_pairs(family, &rule, ranges, None, &mut round, &mut rng);
        budget.0 -= allowance - round.0;
        if let Some((train, test)) = sampled {
            break (rule, train, test);
        }
    };
    Ok(Task {
        id,
        family,
        rule: Some(rule),
        train,
        test,
        meta: Some(meta(seed, variant)),
    })
}

pub fn task_id(variant: Variant, family: Family, index: usize) -> String {
    format!("{}-{}-{index:04}", variant.id_prefix(), family.as_str().replace('_', "-"))
}

/// Runs `f` on a pool of `workers` threads, or the global pool when `None`.
fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, GenError> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(GenError::InvalidConfig("workers must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| GenError::InvalidConfig(e.to_string())),
    }
}

/// Generates `count` tasks of one family, content-deduplicated against each
/// other and against `exclude`.
fn gen_family(
    family: Family,
    variant: Variant,
    ranges: &Ranges,
    count: usize,
    master_seed: u64,
    exclude: &HashSet<Vec<Grid>>,
) -> Result<Vec<Task>, GenError> {
    let build = |index: usize, salt: u32| {
        let seed = derive_seed(master_seed, variant, family, index, salt);
        gen_task(family, variant, ranges, task_id(variant, family, index), seed)
    };
    let mut tasks = (0..count)
        .into_par_iter()
        .map(|i| build(i, 0))
        .collect::<Result<Vec<_>, _>>()?;
    let mut seen: HashSet<Vec<Grid>> = HashSet::new();
    for (i, task) in tasks.iter_mut().enumerate() {
        let mut salt = 0;
        loop {
            let key: Vec<Grid> = task.content_key().into_iter().cloned().collect();
            if !exclude.contains(&key) && seen.insert(key) {
                break;
            }
            salt += 1;
            if salt as usize > RETRY_BUDGET {
                return Err(GenError::ExhaustedRetries {
                    family,
                    id: task.id.clone(),
                });
            }
            *task = build(i, salt)?;
        }
    }
    Ok(tasks)
}

/// Configuration for a standard benchmark run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub master_seed: u64,
    pub families: Vec<(Family, usize)>,
    /// Thread count; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl GenConfig {
    /// 100 tasks for each of the six operation families.
    pub fn araoc(master_seed: u64) -> Self {
        GenConfig {
            master_seed,
            families: Family::ATOMIC.iter().map(|&f| (f, 100)).collect(),
            workers: None,
        }
    }

    fn check(&self) -> Result<(), GenError> {
        if self.families.is_empty() || self.families.iter().any(|&(_, n)| n == 0) {
            return Err(GenError::InvalidConfig("every family count must be at least 1".into()));
        }
        if self.families.iter().any(|&(f, _)| !Family::ATOMIC.contains(&f)) {
            return Err(GenError::InvalidConfig("only the six operation families can be generated here".into()));
        }
        Ok(())
    }
}

/// A generated task collection with its provenance header.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Benchmark {
    pub master_seed: u64,
    pub generator_version: String,
    pub variant: Variant,
    pub tasks: Vec<Task>,
}

impl Benchmark {
    fn new(master_seed: u64, variant: Variant, tasks: Vec<Task>) -> Self {
        Benchmark {
            master_seed,
            generator_version: GENERATOR_VERSION.to_string(),
            variant,
            tasks,
        }
    }
}

/// The standard benchmark: 100 tasks per operation family by default.
pub fn gen_benchmark(config: &GenConfig) -> Result<Benchmark, GenError> {
    config.check()?;
    let tasks = with_workers(config.workers, || {
        let mut tasks = Vec::new();
        for &(family, count) in &config.families {
            let ranges = Ranges::standard(family);
            tasks.extend(gen_family(family, Variant::Standard, &ranges, count, config.master_seed, &HashSet::new())?);
        }
        Ok(tasks)
    })??;
    Ok(Benchmark::new(config.master_seed, Variant::Standard, tasks))
}

/// The six direction/step combinations of the controlled study.
pub fn controlled_combinations(family: Family) -> Vec<OpSpec> {
    let mut out = Vec::new();
    for direction in [Direction8::Up, Direction8::UpRight] {
        for steps in 1..=3 {
            out.push(match family {
                Family::Copy => OpSpec::Copy { direction, steps },
                _ => OpSpec::Move { direction, steps },
            });
        }
    }
    out
}

pub const CONTROLLED_BASE_GRIDS: usize = 50;

/// 50 base test grids that admit every combination of {Up, Up-right} x
/// {1, 2, 3} steps, each expanded into six tasks sharing that test input.
pub fn gen_controlled(family: Family, master_seed: u64, workers: Option<usize>) -> Result<Vec<Task>, GenError> {
    if !matches!(family, Family::Move | Family::Copy) {
        return Err(GenError::InvalidConfig(format!("controlled variant needs move or copy, got {family}")));
    }
    let ranges = Ranges::standard(family);
    let combos = controlled_combinations(family);
    let groups = with_workers(workers, || {
        (0..CONTROLLED_BASE_GRIDS)
            .into_par_iter()
            .map(|g| controlled_group(family, &ranges, &combos, master_seed, g))
            .collect::<Result<Vec<_>, _>>()
    })??;
    Ok(groups.into_iter().flatten().collect())
}

fn controlled_group(
    family: Family,
    ranges: &Ranges,
    combos: &[OpSpec],
    master_seed: u64,
    group: usize,
) -> Result<Vec<Task>, GenError> {
    let group_label = format!("controlled-{}-{group:03}", family.as_str());
    let base_seed = derive_seed(master_seed, Variant::Controlled, family, group, u32::MAX);
    let mut rng = rng_for(base_seed);
    let base = sample_valid_input(family, combos, ranges, &[], &mut Budget(RETRY_BUDGET), &mut rng).ok_or_else(|| {
        GenError::ExhaustedRetries {
            family,
            id: group_label.clone(),
        }
    })?;
    combos
        .iter()
        .enumerate()
        .map(|(k, rule)| {
            let (direction, steps) = match *rule {
                OpSpec::Move { direction, steps } | OpSpec::Copy { direction, steps } => (direction, steps),
                _ => unreachable!(),
            };
            let id = format!("{group_label}-{}-{steps}", direction.label().to_ascii_lowercase());
            let seed = derive_seed(master_seed, Variant::Controlled, family, group * combos.len() + k, 0);
            let mut rng = rng_for(seed);
            let (train, test) = sample_pairs(family, rule, ranges, Some(&base), &mut Budget(RETRY_BUDGET), &mut rng)
                .ok_or_else(|| GenError::ExhaustedRetries { family, id: id.clone() })?;
            let mut m = meta(seed, Variant::Controlled);
            m.group = Some(group_label.clone());
            m.combination = Some(format!("{} {steps}", direction.label()));
            Ok(Task {
                id,
                family,
                rule: Some(rule.clone()),
                train,
                test,
                meta: Some(m),
            })
        })
        .collect()
}

/// 100 Move or Copy tasks drawn from half the standard ranges.
pub fn gen_small(family: Family, master_seed: u64, count: usize, workers: Option<usize>) -> Result<Vec<Task>, GenError> {
    if !matches!(family, Family::Move | Family::Copy) {
        return Err(GenError::InvalidConfig(format!("small variant needs move or copy, got {family}")));
    }
    let ranges = Ranges::small(family);
    with_workers(workers, || gen_family(family, Variant::Small, &ranges, count, master_seed, &HashSet::new()))?
}

pub const MIRROR_PAIRS: usize = 100;

/// 100 base input sets with sides in [3, 7], each mirrored left and right
/// into two tasks with identical inputs. Task ids end in `-left`/`-right`
/// and share `meta.group`.
pub fn gen_mirror_pairs(master_seed: u64, workers: Option<usize>) -> Result<Vec<Task>, GenError> {
    let ranges = Ranges::mirror_pairs();
    let duos = with_workers(workers, || {
        (0..MIRROR_PAIRS)
            .into_par_iter()
            .map(|p| mirror_duo(&ranges, master_seed, p))
            .collect::<Result<Vec<_>, _>>()
    })??;
    Ok(duos.into_iter().flatten().collect())
}

fn mirror_duo(ranges: &Ranges, master_seed: u64, index: usize) -> Result<[Task; 2], GenError> {
    let group = format!("mirror-lr-{index:03}");
    let seed = derive_seed(master_seed, Variant::MirrorLr, Family::Mirror, index, 0);
    let mut rng = rng_for(seed);
    let left = OpSpec::Mirror {
        direction: Direction4::Left,
    };
    let right = OpSpec::Mirror {
        direction: Direction4::Right,
    };
    let both = [left.clone(), right.clone()];
    let mut budget = Budget(RETRY_BUDGET);
    let mut inputs: Vec<Grid> = Vec::new();
    while inputs.len() < TRAIN_PAIRS + 1 {
        let taken: Vec<&Grid> = inputs.iter().collect();
        let g = sample_valid_input(Family::Mirror, &both, ranges, &taken, &mut budget, &mut rng).ok_or_else(|| {
            GenError::ExhaustedRetries {
                family: Family::Mirror,
                id: group.clone(),
            }
        })?;
        inputs.push(g);
    }
    let build = |rule: &OpSpec, side: &str| {
        let mut pairs: Vec<Pair> = inputs.iter().map(|g| make_pair(g.clone(), rule)).collect();
        let test = pairs.split_off(TRAIN_PAIRS);
        let mut m = meta(seed, Variant::MirrorLr);
        m.group = Some(group.clone());
        m.combination = Some(side.to_string());
        Task {
            id: format!("{group}-{side}"),
            family: Family::Mirror,
            rule: Some(rule.clone()),
            train: pairs,
            test,
            meta: Some(m),
        }
    };
    Ok([build(&left, "left"), build(&right, "right")])
}

/// Copy-then-Move composition tasks under the standard ranges.
pub fn gen_composition(master_seed: u64, count: usize, workers: Option<usize>) -> Result<Vec<Task>, GenError> {
    let ranges = Ranges::standard(Family::Move);
    with_workers(workers, || {
        gen_family(Family::Composition, Variant::Composition, &ranges, count, master_seed, &HashSet::new())
    })?
}

/// Fine-tuning tasks per family, content-disjoint from `exclude`.
pub fn gen_finetune_corpus(
    spec: &[(Family, usize)],
    exclude: &[Task],
    master_seed: u64,
    workers: Option<usize>,
) -> Result<Vec<Task>, GenError> {
    if spec.is_empty() || spec.iter().any(|&(_, n)| n == 0) {
        return Err(GenError::InvalidConfig("every family count must be at least 1".into()));
    }
    let excluded: HashSet<Vec<Grid>> = exclude
        .iter()
        .map(|t| t.content_key().into_iter().cloned().collect())
        .collect();
    with_workers(workers, || {
        let mut out = Vec::new();
        for &(family, count) in spec {
            if family == Family::Arc {
                return Err(GenError::InvalidConfig("cannot generate ARC tasks".into()));
            }
            let ranges = Ranges::standard(family);
            out.extend(gen_family(family, Variant::Finetune, &ranges, count, master_seed, &excluded)?);
        }
        Ok(out)
    })?
}
