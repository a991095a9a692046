//! Grid primitives, the six atomic operations, seeded task generation,
//! prompt rendering and scoring for the ARAOC abstract-reasoning benchmark.
//!
//! The operations in [`ops`] are the ground truth: every generated pair is
//! produced by them and every prediction is scored against them.

pub mod dataset;
pub mod eval;
pub mod gen;
pub mod grid;
pub mod ops;
pub mod render;

pub use eval::{aggregate, mcnemar_exact, score_task, EvalSummary, McNemar, PairedOutcome, TaskScore};
pub use gen::{Benchmark, Family, GenConfig, GenError, Pair, Task, Variant};
pub use grid::{Axis, BBox, Color, Connectivity, Grid, GridError, Region};
pub use ops::{apply, validate, Direction4, Direction8, OpError, OpSpec};
pub use render::{build_prompt, parse_grid_response, render_matrix_text, ParseOutcome, PromptStyle, RenderedPrompt, TaskStyle};
