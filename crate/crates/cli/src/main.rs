//! `knotforge` command line: census → walks → renders → items → scores.

mod cmd;
mod error;
mod run_manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use knotforge::bench::{Split, TaskId};

#[derive(Parser)]
#[command(name = "knotforge", version, about = "Knot-diagram corpus generator and evaluation toolkit")]
struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Walk, render and lint every prototype; write trajectories and the manifest.
    Generate(GenerateArgs),
    /// Run walks only and write trajectory archives.
    Walk(WalkArgs),
    /// Draw manifest records to PNG and SVG.
    Render(RenderArgs),
    /// Lint manifest records or a single PD code.
    Lint(LintArgs),
    /// Build the locked evaluation set.
    Tasks(TasksArgs),
    /// Write synthetic transcripts (oracle, uniform random, constant).
    Synth(SynthArgs),
    /// Grade transcripts; write a JSON report and per-item scores.
    Score(ScoreArgs),
    /// Grade transcripts and print the accuracy table.
    Report(ReportArgs),
    /// Write PD/DT exports for external cross-checking.
    Export(ExportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedScheme {
    /// blake2b(prototype ‖ chirality ‖ "walk") + 9973 · walk index.
    Paper,
}

#[derive(Args)]
pub struct WalkArgs {
    #[arg(long)]
    pub census: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Walks per (prototype, chirality).
    #[arg(long, default_value_t = 128)]
    pub walks: u64,
    #[arg(long, value_enum, default_value_t = SeedScheme::Paper)]
    pub seed_scheme: SeedScheme,
    #[arg(long, default_value_t = 80)]
    pub length_min: u32,
    #[arg(long, default_value_t = 160)]
    pub length_max: u32,
    /// Crossing cap; larger candidates are rejected outright.
    #[arg(long, default_value_t = 30)]
    pub cap: usize,
}

#[derive(Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Also write PNG and SVG files for every lint-passing record.
    #[arg(long)]
    pub images: bool,
    /// Skip layout and lint; records get no lint report.
    #[arg(long, conflicts_with = "images")]
    pub no_render: bool,
}

#[derive(Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Render only these ids (repeatable); default: every record.
    #[arg(long = "id")]
    pub ids: Vec<String>,
}

#[derive(Args)]
pub struct LintArgs {
    #[arg(long, required_unless_present = "pd", conflicts_with = "pd")]
    pub manifest: Option<PathBuf>,
    /// A single PD code, drawn with the default style.
    #[arg(long)]
    pub pd: Option<String>,
    /// JSON-lines output of per-record reports.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Val,
    Test,
    All,
}

impl SplitArg {
    fn expand(list: &[SplitArg]) -> Vec<Split> {
        let mut out: Vec<Split> = list
            .iter()
            .flat_map(|s| match s {
                SplitArg::Train => vec![Split::Train],
                SplitArg::Val => vec![Split::Val],
                SplitArg::Test => vec![Split::Test],
                SplitArg::All => Split::ALL.to_vec(),
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

fn task_count(s: &str) -> Result<(TaskId, usize), String> {
    let (t, n) = s.split_once('=').ok_or_else(|| format!("expected <task>=<count>, got {s:?}"))?;
    let task = t.trim().parse::<TaskId>().map_err(|e| e.to_string())?;
    let n = n.trim().parse::<usize>().map_err(|e| format!("count {n:?}: {e}"))?;
    Ok((task, n))
}

#[derive(Args)]
pub struct TasksArgs {
    #[arg(long)]
    pub census: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Item count per task, e.g. `--n A2_S=10` (repeatable). When given,
    /// only the listed tasks are built; otherwise all 14 at default counts.
    #[arg(long = "n", value_parser = task_count)]
    pub counts: Vec<(TaskId, usize)>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Splits items may draw prototypes from.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "test")]
    pub splits: Vec<SplitArg>,
    /// Where to write the lockfile (default: <out>/eval.lock.json).
    #[arg(long)]
    pub lock: Option<PathBuf>,
    /// Treat records without a lint report as renderable (PD-only corpora).
    #[arg(long)]
    pub allow_unlinted: bool,
    #[arg(long, default_value_t = 1.0 / 6.0)]
    pub not_connected_share: f64,
    #[arg(long, default_value_t = 0.5)]
    pub d0_positive_share: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Answerer {
    Oracle,
    Uniform,
    Constant(String),
}

fn answerer(s: &str) -> Result<Answerer, String> {
    match s {
        "oracle" => Ok(Answerer::Oracle),
        "uniform" => Ok(Answerer::Uniform),
        _ => match s.strip_prefix("constant:") {
            Some(a) if !a.is_empty() => Ok(Answerer::Constant(a.to_string())),
            _ => Err(format!("expected oracle, uniform or constant:<answer>, got {s:?}")),
        },
    }
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub eval: PathBuf,
    /// `oracle`, `uniform` or `constant:<answer>`.
    #[arg(long, value_parser = answerer)]
    pub answerer: Answerer,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub round: u64,
    /// Transcript JSON-lines file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct Graded {
    #[arg(long)]
    pub eval: PathBuf,
    /// Transcript JSON-lines files (repeatable).
    #[arg(long = "transcripts", required = true)]
    pub transcripts: Vec<PathBuf>,
    /// Census for the permissive C1 tier; without it the label's own
    /// decoding is the reference.
    #[arg(long)]
    pub census: Option<PathBuf>,
    /// Refuse an eval set that does not match this lockfile.
    #[arg(long)]
    pub lock: Option<PathBuf>,
}

#[derive(Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub graded: Graded,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub graded: Graded,
    /// Also write the table here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub census: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Walk states sampled per prototype.
    #[arg(long, default_value_t = 50)]
    pub per_prototype: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            log::warn!("--jobs ignored: {e}");
        }
    }
    let res = match cli.command {
        Command::Generate(a) => cmd::generate(&a),
        Command::Walk(a) => cmd::walk(&a),
        Command::Render(a) => cmd::render(&a),
        Command::Lint(a) => cmd::lint(&a),
        Command::Tasks(a) => cmd::tasks(&a),
        Command::Synth(a) => cmd::synth(&a),
        Command::Score(a) => cmd::score(&a),
        Command::Report(a) => cmd::report(&a),
        Command::Export(a) => cmd::export(&a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
