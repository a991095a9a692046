use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use araoc_core::dataset;
use araoc_core::gen::{self, GENERATOR_VERSION};
use araoc_core::render::{render_matrix_text, to_prompt_completion};
use araoc_core::{
    aggregate, apply, parse_grid_response, score_task, Benchmark, EvalSummary, Family, GenConfig, Task,
};

use crate::args::{EvalArgs, GenArgs, SolveArgs, Suite, VariantArg};
use crate::records::{PredictionRecord, ResponseRecord, ResultRecord, SKIPPED_NO_RULE};
use crate::{read_jsonl, read_tasks, write_file, write_jsonl, CliError};

const MOVE_COPY: [Family; 2] = [Family::Move, Family::Copy];

pub fn cmd_gen(args: &GenArgs) -> Result<String, CliError> {
    let variant = match (args.suite, args.variant) {
        (Some(Suite::Araoc), _) | (None, None) => VariantArg::Standard,
        (None, Some(v)) => v,
    };
    let benchmark = generate(args, variant)?;
    dataset::write_benchmark(&args.out, &benchmark).map_err(CliError::io(&args.out))?;
    if let Some(flat) = &args.flat_out {
        write_jsonl(flat, benchmark.tasks.iter().map(to_prompt_completion))?;
    }

    let mut counts: BTreeMap<Family, usize> = BTreeMap::new();
    for t in &benchmark.tasks {
        *counts.entry(t.family).or_default() += 1;
    }
    let mut report = format!(
        "generated {} {} tasks with seed {} ({})\n",
        benchmark.tasks.len(),
        benchmark.variant,
        benchmark.master_seed,
        GENERATOR_VERSION
    );
    for (family, n) in counts {
        let _ = writeln!(report, "  {family:<14} {n}");
    }
    let _ = write!(report, "wrote {}", args.out.display());
    Ok(report)
}

fn generate(args: &GenArgs, variant: VariantArg) -> Result<Benchmark, CliError> {
    let seed = args.seed;
    let families = |default: &[Family]| -> Vec<Family> {
        if args.family.is_empty() {
            default.to_vec()
        } else {
            args.family.clone()
        }
    };
    let no_count = |what: &str| match args.count {
        Some(_) => Err(CliError::Usage(format!("--count does not apply to {what}"))),
        None => Ok(()),
    };
    let no_family = |what: &str| match args.family.is_empty() {
        true => Ok(()),
        false => Err(CliError::Usage(format!("--family does not apply to {what}"))),
    };
    let move_copy_only = |fs: &[Family], what: &str| match fs.iter().all(|f| MOVE_COPY.contains(f)) {
        true => Ok(()),
        false => Err(CliError::Usage(format!("{what} tasks exist only for move and copy"))),
    };
    if args.exclude.is_some() && variant != VariantArg::Finetune {
        return Err(CliError::Usage("--exclude applies only to the finetune variant".into()));
    }

    let tasks = match variant {
        VariantArg::Standard => {
            let config = GenConfig {
                master_seed: seed,
                families: families(&Family::ATOMIC).into_iter().map(|f| (f, args.count.unwrap_or(100))).collect(),
                workers: args.workers,
            };
            return Ok(gen::gen_benchmark(&config)?);
        }
        VariantArg::Small => {
            let fs = families(&MOVE_COPY);
            move_copy_only(&fs, "small")?;
            let mut tasks = Vec::new();
            for f in fs {
                tasks.extend(gen::gen_small(f, seed, args.count.unwrap_or(100), args.workers)?);
            }
            tasks
        }
        VariantArg::Controlled => {
            no_count("controlled tasks (always 300 per family)")?;
            let fs = families(&MOVE_COPY);
            move_copy_only(&fs, "controlled")?;
            let mut tasks = Vec::new();
            for f in fs {
                tasks.extend(gen::gen_controlled(f, seed, args.workers)?);
            }
            tasks
        }
        VariantArg::MirrorLr => {
            no_count("mirror-lr (always 100 pairs)")?;
            no_family("mirror-lr")?;
            gen::gen_mirror_pairs(seed, args.workers)?
        }
        VariantArg::Composition => {
            no_family("composition")?;
            gen::gen_composition(seed, args.count.unwrap_or(100), args.workers)?
        }
        VariantArg::Finetune => {
            let spec = if args.family.is_empty() {
                parse_finetune_spec(&args.finetune_spec)?
            } else {
                let n = args
                    .count
                    .ok_or_else(|| CliError::Usage("--family with the finetune variant needs --count".into()))?;
                args.family.iter().map(|&f| (f, n)).collect()
            };
            let exclude = match &args.exclude {
                Some(p) => read_tasks(p)?,
                None => Vec::new(),
            };
            gen::gen_finetune_corpus(&spec, &exclude, seed, args.workers)?
        }
    };
    Ok(Benchmark {
        master_seed: seed,
        generator_version: GENERATOR_VERSION.to_string(),
        variant: variant.into(),
        tasks,
    })
}

/// Parses `family=count` items separated by commas.
pub fn parse_finetune_spec(s: &str) -> Result<Vec<(Family, usize)>, CliError> {
    let bad = |item: &str| CliError::Usage(format!("bad finetune spec item `{item}`; expected family=count"));
    s.split(',')
        .map(str::trim)
        .filter(|item| !item.is_empty())
        .map(|item| {
            let (f, n) = item.split_once('=').ok_or_else(|| bad(item))?;
            let family: Family = f.parse().map_err(|_| bad(item))?;
            let count: usize = n.trim().parse().map_err(|_| bad(item))?;
            Ok((family, count))
        })
        .collect()
}

/// The oracle predictor: applies each task's stored rule to its test input.
pub fn solve(tasks: &[Task]) -> Vec<PredictionRecord> {
    tasks
        .iter()
        .map(|task| {
            let Some(rule) = &task.rule else {
                return PredictionRecord {
                    task_id: task.id.clone(),
                    raw_response: None,
                    parsed: None,
                    failure_reason: Some(SKIPPED_NO_RULE.into()),
                    exact: false,
                    shape_match: false,
                };
            };
            let test = &task.test[0];
            match apply(&test.input, rule) {
                Ok(grid) => PredictionRecord {
                    task_id: task.id.clone(),
                    raw_response: Some(format!("Output grid:\n{}", render_matrix_text(&grid))),
                    exact: grid == test.output,
                    shape_match: grid.shape() == test.output.shape(),
                    parsed: Some(grid),
                    failure_reason: None,
                },
                Err(e) => PredictionRecord {
                    task_id: task.id.clone(),
                    raw_response: None,
                    parsed: None,
                    failure_reason: Some(format!("OracleError: {e}")),
                    exact: false,
                    shape_match: false,
                },
            }
        })
        .collect()
}

pub fn cmd_solve(args: &SolveArgs) -> Result<String, CliError> {
    let tasks = read_tasks(&args.tasks)?;
    let preds = solve(&tasks);
    let skipped = preds
        .iter()
        .filter(|p| p.failure_reason.as_deref() == Some(SKIPPED_NO_RULE))
        .count();
    write_jsonl(&args.out, &preds)?;
    Ok(format!(
        "solved {} of {} tasks ({skipped} skipped without a rule)\nwrote {}",
        preds.len() - skipped,
        preds.len(),
        args.out.display()
    ))
}

/// Scores responses against the test outputs of `tasks`.
///
/// When a task has several response lines (a resumed run retries failed
/// requests) the last line carrying a response wins. Tasks with no line at
/// all are left out and returned as missing.
pub fn evaluate(tasks: &[Task], responses: &[ResponseRecord]) -> Result<(Vec<ResultRecord>, Vec<String>), CliError> {
    if responses.is_empty() {
        return Err(CliError::Data(araoc_core::eval::EvalError::EmptyInput.to_string()));
    }
    let known: HashMap<&str, &Task> = tasks.iter().map(|t| (t.id.as_str(), t)).collect();
    let mut latest: HashMap<&str, &ResponseRecord> = HashMap::new();
    for r in responses {
        if !known.contains_key(r.task_id.as_str()) {
            return Err(CliError::Data(format!("unknown task id `{}` in responses", r.task_id)));
        }
        let slot = latest.entry(r.task_id.as_str()).or_insert(r);
        if r.raw_response.is_some() || slot.raw_response.is_none() {
            *slot = r;
        }
    }
    let mut results = Vec::with_capacity(latest.len());
    let mut missing = Vec::new();
    for task in tasks {
        let Some(r) = latest.get(task.id.as_str()) else {
            missing.push(task.id.clone());
            continue;
        };
        let gt = &task.test[0].output;
        let (mut score, reason) = match &r.raw_response {
            Some(text) => {
                let parsed = parse_grid_response(text);
                let reason = parsed.failure_reason().map(|f| f.as_str().to_string());
                (score_task(&task.id, &parsed, gt), reason)
            }
            None => {
                let none = parse_grid_response("");
                let reason = r.error.clone().unwrap_or_else(|| "NoResponse".into());
                (score_task(&task.id, &none, gt), Some(reason))
            }
        };
        score.family = Some(task.family);
        score.variant = Some(task.variant());
        results.push(ResultRecord::from_score(&score, reason));
    }
    Ok((results, missing))
}

pub fn summarize(results: &[ResultRecord]) -> Result<EvalSummary, CliError> {
    let scores: Vec<_> = results
        .iter()
        .map(|r| araoc_core::TaskScore {
            task_id: r.task_id.clone(),
            exact: r.exact,
            shape_match: r.shape_match,
            parse_ok: r.parse_ok,
            family: r.family,
            variant: r.variant,
        })
        .collect();
    aggregate(&scores).map_err(|e| CliError::Data(e.to_string()))
}

pub fn cmd_eval(args: &EvalArgs) -> Result<String, CliError> {
    let tasks = read_tasks(&args.tasks)?;
    let responses: Vec<ResponseRecord> = read_jsonl(&args.responses)?;
    let (results, missing) = evaluate(&tasks, &responses)?;
    let summary = summarize(&results)?;
    if let Some(path) = &args.results {
        write_jsonl(path, &results)?;
    }
    if let Some(path) = &args.summary {
        let mut bytes = serde_json::to_vec_pretty(&summary).expect("summary serializes");
        bytes.push(b'\n');
        write_file(path, bytes)?;
    }
    let mut out = summary.table();
    if !missing.is_empty() {
        let _ = write!(out, "{} tasks have no response and were not scored", missing.len());
    }
    Ok(out.trim_end().to_string())
}
