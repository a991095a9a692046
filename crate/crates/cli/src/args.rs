use std::path::PathBuf;

use araoc_core::{Family, TaskStyle, Variant};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "araoc", version, about = "ARAOC benchmark generator, oracle and evaluation harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a benchmark or one of the experiment variants.
    Gen(GenArgs),
    /// Apply each task's stored rule to its test input.
    Solve(SolveArgs),
    /// Send rendered prompts to a chat-completions endpoint.
    Query(QueryArgs),
    /// Score responses against task ground truth.
    Eval(EvalArgs),
    /// Paired significance test for left/right mirror results.
    AnalyzeMirror(AnalyzeMirrorArgs),
    /// Draw tasks as SVG cell lattices.
    RenderSvg(RenderSvgArgs),
    /// Generate or score matrix-property question sets.
    #[command(subcommand)]
    MatrixProps(MatrixPropsCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Araoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Standard,
    Small,
    Controlled,
    MirrorLr,
    Composition,
    Finetune,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Standard => Variant::Standard,
            VariantArg::Small => Variant::Small,
            VariantArg::Controlled => Variant::Controlled,
            VariantArg::MirrorLr => Variant::MirrorLr,
            VariantArg::Composition => Variant::Composition,
            VariantArg::Finetune => Variant::Finetune,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StyleArg {
    Matrix,
    NaturalLanguage,
    NoLocation,
}

impl From<StyleArg> for TaskStyle {
    fn from(s: StyleArg) -> Self {
        match s {
            StyleArg::Matrix => TaskStyle::MatrixStandard,
            StyleArg::NaturalLanguage => TaskStyle::NaturalLanguage,
            StyleArg::NoLocation => TaskStyle::NoLocation,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, conflicts_with = "variant")]
    pub suite: Option<Suite>,
    #[arg(long)]
    pub variant: Option<VariantArg>,
    /// Restrict to these families (repeatable or comma separated).
    #[arg(long, value_delimiter = ',', value_parser = parse_family)]
    pub family: Vec<Family>,
    /// Tasks per family.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Generation threads; defaults to all cores.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Task file whose content the fine-tune corpus must avoid.
    #[arg(long)]
    pub exclude: Option<PathBuf>,
    /// Fine-tune family counts, e.g. `move=1500,copy=1500`.
    #[arg(long, default_value = "move=1500,copy=1500")]
    pub finetune_spec: String,
    /// Also write prompt/completion JSONL for fine-tuning.
    #[arg(long)]
    pub flat_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub tasks: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct QueryArgs {
    /// Task file to render and send.
    #[arg(long, required_unless_present = "prompts", conflicts_with = "prompts")]
    pub tasks: Option<PathBuf>,
    /// Pre-rendered matrix-property questions.
    #[arg(long)]
    pub prompts: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "matrix")]
    pub style: StyleArg,
    #[arg(long)]
    pub endpoint: String,
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub top_p: Option<f64>,
    #[arg(long, default_value_t = 3000)]
    pub max_tokens: u32,
    /// Sent as the request `seed` when given.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 120)]
    pub timeout_secs: u64,
    #[arg(long, default_value_t = 3)]
    pub retries: u32,
    #[arg(long, default_value_t = 1000)]
    pub backoff_ms: u64,
    /// Maximum requests in flight.
    #[arg(long, default_value_t = 4)]
    pub concurrency: usize,
    /// Environment variable holding the API key.
    #[arg(long, default_value = "ARAOC_API_KEY")]
    pub api_key_env: String,
    /// Responses JSONL; the run ledger is written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub tasks: PathBuf,
    #[arg(long)]
    pub responses: PathBuf,
    /// Per-task results JSONL.
    #[arg(long)]
    pub results: Option<PathBuf>,
    /// Summary JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeMirrorArgs {
    /// Results JSONL of the left-mirror tasks.
    #[arg(long)]
    pub left: PathBuf,
    /// Results JSONL of the right-mirror tasks.
    #[arg(long)]
    pub right: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RenderSvgArgs {
    #[arg(long)]
    pub tasks: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum MatrixPropsCommand {
    /// Build questions from the test inputs of a task file.
    Gen(MatrixPropsGenArgs),
    /// Grade responses to a question file.
    Score(MatrixPropsScoreArgs),
}

#[derive(Debug, Clone, Args)]
pub struct MatrixPropsGenArgs {
    #[arg(long)]
    pub tasks: PathBuf,
    #[arg(long, value_delimiter = ',', value_parser = parse_family)]
    pub family: Vec<Family>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct MatrixPropsScoreArgs {
    #[arg(long)]
    pub questions: PathBuf,
    #[arg(long)]
    pub responses: PathBuf,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse()
}
