//! SVG drawings of tasks: each train pair as input and output side by side,
//! then the test input.

use std::fmt::Write as _;
use std::path::Path;

use araoc_core::{Grid, Task};

use crate::args::RenderSvgArgs;
use crate::{read_tasks, write_file, CliError};

pub const PALETTE: [&str; 10] = [
    "#000000", "#0074D9", "#FF4136", "#2ECC40", "#FFDC00", "#AAAAAA", "#F012BE", "#FF851B", "#7FDBFF", "#870C25",
];

const CELL: usize = 16;
const GAP: usize = 24;
const LABEL: usize = 18;

fn draw_grid(out: &mut String, g: &Grid, x0: usize, y0: usize) {
    let _ = writeln!(out, "  <g transform=\"translate({x0},{y0})\">");
    for r in 0..g.rows() {
        for c in 0..g.cols() {
            let color = PALETTE[g.get(r, c).code() as usize];
            let _ = writeln!(
                out,
                "    <rect class=\"cell\" x=\"{}\" y=\"{}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{color}\"/>",
                c * CELL,
                r * CELL
            );
        }
    }
    let _ = writeln!(
        out,
        "    <rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#555555\"/>",
        g.cols() * CELL,
        g.rows() * CELL
    );
    out.push_str("  </g>\n");
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_task_svg(task: &Task) -> String {
    let mut rows: Vec<(&str, Vec<&Grid>)> = task
        .train
        .iter()
        .map(|p| ("train", vec![&p.input, &p.output]))
        .collect();
    for p in &task.test {
        rows.push(("test", vec![&p.input]));
    }
    let width = rows
        .iter()
        .map(|(_, gs)| gs.iter().map(|g| g.cols() * CELL + GAP).sum::<usize>() + GAP)
        .max()
        .unwrap_or(GAP);
    let mut body = String::new();
    let mut y = LABEL + GAP / 2;
    for (label, grids) in &rows {
        let _ = writeln!(body, "  <text x=\"{GAP}\" y=\"{}\" font-size=\"12\" fill=\"#333333\">{label}</text>", y);
        y += 6;
        let mut x = GAP;
        let mut tallest = 0;
        for g in grids {
            draw_grid(&mut body, g, x, y);
            x += g.cols() * CELL + GAP;
            tallest = tallest.max(g.rows() * CELL);
        }
        y += tallest + GAP + LABEL;
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{y}\" viewBox=\"0 0 {width} {y}\">\n  <title>{}</title>\n  <rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n{body}</svg>\n",
        escape(&task.id)
    )
}

/// File name for a task id, keeping only characters safe on every platform.
pub fn file_name(task_id: &str) -> String {
    let stem: String = task_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{stem}.svg")
}

pub fn cmd_render_svg(args: &RenderSvgArgs) -> Result<String, CliError> {
    let tasks = read_tasks(&args.tasks)?;
    write_all(&tasks, &args.out_dir)?;
    Ok(format!("wrote {} SVG files to {}", tasks.len(), args.out_dir.display()))
}

pub fn write_all(tasks: &[Task], dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    for t in tasks {
        write_file(&dir.join(file_name(&t.id)), render_task_svg(t))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use araoc_core::gen::Pair;
    use araoc_core::Family;

    fn task(grids: &[Grid]) -> Task {
        Task {
            id: "t/1".into(),
            family: Family::Arc,
            rule: None,
            train: vec![Pair {
                input: grids[0].clone(),
                output: grids[1].clone(),
            }],
            test: vec![Pair {
                input: grids[2].clone(),
                output: grids[2].clone(),
            }],
            meta: None,
        }
    }

    #[test]
    fn one_cell_per_grid_cell() {
        let a = Grid::from_rows(&[[0, 2, 0], [1, 0, 0]]).unwrap();
        let b = Grid::from_rows(&[[2]]).unwrap();
        let c = Grid::black(4, 5).unwrap();
        let svg = render_task_svg(&task(&[a, b, c]));
        assert_eq!(svg.matches("class=\"cell\"").count(), 6 + 1 + 20);
        assert!(svg.contains("fill=\"#FF4136\""));
        assert!(svg.contains("<title>t/1</title>"));
    }

    #[test]
    fn black_single_cell_is_dark() {
        let g = Grid::black(1, 1).unwrap();
        let svg = render_task_svg(&task(&[g.clone(), g.clone(), g]));
        assert!(svg.contains("class=\"cell\" x=\"0\" y=\"0\" width=\"16\" height=\"16\" fill=\"#000000\""));
    }

    #[test]
    fn names_are_sanitized() {
        assert_eq!(file_name("a/b c"), "a_b_c.svg");
        assert_eq!(file_name("araoc-move-0001"), "araoc-move-0001.svg");
    }
}
