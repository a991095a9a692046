use std::process::ExitCode;

use araoc_cli::args::MatrixPropsCommand;
use araoc_cli::{analyze, commands, props, query, svg, Cli, CliError, Command};
use clap::Parser;

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Gen(a) => commands::cmd_gen(&a),
        Command::Solve(a) => commands::cmd_solve(&a),
        Command::Query(a) => query::cmd_query(&a),
        Command::Eval(a) => commands::cmd_eval(&a),
        Command::AnalyzeMirror(a) => analyze::cmd_analyze_mirror(&a),
        Command::RenderSvg(a) => svg::cmd_render_svg(&a),
        Command::MatrixProps(MatrixPropsCommand::Gen(a)) => props::cmd_matrix_props_gen(&a),
        Command::MatrixProps(MatrixPropsCommand::Score(a)) => props::cmd_matrix_props_score(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(report) => {
            println!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
