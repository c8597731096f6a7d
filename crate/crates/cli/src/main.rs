//! `rapidkit` command-line driver.

mod commands;
mod eval;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rapidkit_core::config::{ToolkitConfig, CONFIG_ENV};
use rapidkit_core::exec::Execution;
use rapidkit_core::prompts::Language;
use rapidkit_core::syntax::OffsetFunction;
use rapidkit_core::transforms::{Anchor, ArgumentKind, TaskKind};

use failure::{CliResult, Failure};

#[derive(Debug, Parser)]
#[command(name = "rapidkit", version, about = "Toolkit for RAPID movement routines")]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured prompt language.
    #[arg(long, global = true, value_parser = parse_language)]
    lang: Option<Language>,
    /// Runs on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    /// Increases log verbosity (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Builds, synthesizes and splits corpora.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Applies a deterministic transformation to routines.
    #[command(subcommand)]
    Transform(TransformCommand),
    /// Checks a transformed output against its input.
    Validate(ValidateArgs),
    /// Runs the generate-and-validate protocol and writes a run directory.
    Eval(EvalArgs),
    /// Recomputes the metrics report of a run log.
    Report(ReportArgs),
}

#[derive(Debug, Subcommand)]
enum CorpusCommand {
    /// Extracts routines from project backup trees.
    Extract(ExtractArgs),
    /// Generates a seeded synthetic corpus with requests and oracle outputs.
    Synth(SynthArgs),
    /// Splits a corpus into prompt examples and a test set.
    Split(SplitArgs),
}

#[derive(Debug, Args)]
struct ExtractArgs {
    /// Project directories or files; defaults to the configured corpus paths.
    paths: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Writes the corpus summary as JSON.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Size of the prompt-example set; defaults to the few-shot total.
    #[arg(long)]
    prompt_examples: Option<usize>,
    #[arg(long)]
    prompt_out: PathBuf,
    #[arg(long)]
    test_out: PathBuf,
}

/// Request parameters shared by `transform`, `validate` and `eval`.
#[derive(Debug, Args, Clone, Default)]
struct RequestArgs {
    /// Argument kind for modification (station, id, position, velocity, zone, tool, work_object).
    #[arg(long, value_parser = parse_argument_kind)]
    kind: Option<ArgumentKind>,
    /// New value; for ids `SRC,DST`.
    #[arg(long)]
    value: Option<String>,
    /// Offset anchor: after-start or before-end.
    #[arg(long, value_parser = parse_anchor)]
    anchor: Option<Anchor>,
    /// Offset function: Offs or RelTool.
    #[arg(long, value_parser = parse_function)]
    function: Option<OffsetFunction>,
    /// Offset `X,Y,Z` in millimetres.
    #[arg(long, allow_hyphen_values = true)]
    offset: Option<String>,
}

#[derive(Debug, Args)]
struct TransformIo {
    /// File with one or more routines; `-` reads stdin.
    input: PathBuf,
    /// Writes the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Validates each output and exits 1 on findings.
    #[arg(long)]
    check: bool,
}

#[derive(Debug, Subcommand)]
enum TransformCommand {
    /// Changes one argument family.
    Modify {
        #[command(flatten)]
        io: TransformIo,
        #[arg(long, value_parser = parse_argument_kind)]
        kind: ArgumentKind,
        #[arg(long)]
        value: String,
    },
    /// Inserts an offset instruction.
    Offset {
        #[command(flatten)]
        io: TransformIo,
        #[arg(long, value_parser = parse_anchor)]
        anchor: Anchor,
        #[arg(long, value_parser = parse_function)]
        function: OffsetFunction,
        /// `X,Y,Z` in millimetres.
        #[arg(long, allow_hyphen_values = true)]
        offset: String,
    },
    /// Reverses the movement direction.
    Reverse {
        #[command(flatten)]
        io: TransformIo,
    },
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long, value_parser = parse_task)]
    task: TaskKind,
    #[command(flatten)]
    request: RequestArgs,
    /// Original routine(s).
    #[arg(long)]
    input: PathBuf,
    /// Transformed routine(s).
    #[arg(long)]
    output: PathBuf,
    /// Prints the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Task to evaluate; taken from the log for replay.
    #[arg(long, value_parser = parse_task)]
    task: Option<TaskKind>,
    /// Test corpus; without it `--inputs` routines are synthesized.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Corpus providing few-shot examples.
    #[arg(long)]
    prompt_set: Option<PathBuf>,
    /// Uses at most this many inputs.
    #[arg(long)]
    inputs: Option<usize>,
    /// live, stub, stub:p=<prob> or replay.
    #[arg(long, default_value = "live")]
    backend: String,
    /// Run log to replay.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Validate-and-retry with up to N attempts per sample.
    #[arg(long)]
    retry: Option<usize>,
    /// Samples per input.
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory; defaults to `runs/<timestamp>-seed<seed>`.
    #[arg(long)]
    run_dir: Option<PathBuf>,
    /// Request applied to every input instead of the stored ones.
    #[command(flatten)]
    request: RequestArgs,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Run log to summarize.
    #[arg(long)]
    log: PathBuf,
    /// Second run log of the same task in another language.
    #[arg(long)]
    compare: Option<PathBuf>,
    /// Writes report.json, report.txt and histogram.csv here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_language(s: &str) -> Result<Language, String> {
    s.parse()
}

fn parse_task(s: &str) -> Result<TaskKind, String> {
    s.parse()
}

fn parse_argument_kind(s: &str) -> Result<ArgumentKind, String> {
    s.parse()
}

fn parse_anchor(s: &str) -> Result<Anchor, String> {
    match s.to_ascii_lowercase().replace('_', "-").as_str() {
        "after-start" | "start" => Ok(Anchor::AfterStart),
        "before-end" | "end" => Ok(Anchor::BeforeEnd),
        other => Err(format!("unknown anchor `{other}` (expected after-start or before-end)")),
    }
}

fn parse_function(s: &str) -> Result<OffsetFunction, String> {
    match s.to_ascii_lowercase().as_str() {
        "offs" => Ok(OffsetFunction::Offs),
        "reltool" => Ok(OffsetFunction::RelTool),
        other => Err(format!("unknown offset function `{other}` (expected Offs or RelTool)")),
    }
}

struct Globals {
    config: ToolkitConfig,
}

fn load_globals(cli: &Cli) -> CliResult<Globals> {
    let mut config = ToolkitConfig::resolve(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(lang) = cli.lang {
        config.language = lang;
    }
    if cli.sequential {
        config.execution = Execution::Sequential;
    }
    Ok(Globals { config })
}

fn run(cli: Cli) -> CliResult {
    let globals = load_globals(&cli)?;
    match cli.command {
        Command::Corpus(CorpusCommand::Extract(a)) => {
            commands::extract(&globals, &a.paths, &a.out, a.summary.as_deref())
        }
        Command::Corpus(CorpusCommand::Synth(a)) => commands::synth(&globals, a.n, &a.out),
        Command::Corpus(CorpusCommand::Split(a)) => {
            commands::split(&globals, &a.corpus, a.prompt_examples, &a.prompt_out, &a.test_out)
        }
        Command::Transform(t) => {
            let (io, request) = match t {
                TransformCommand::Modify { io, kind, value } => {
                    (io, RequestArgs { kind: Some(kind), value: Some(value), ..Default::default() })
                }
                TransformCommand::Offset { io, anchor, function, offset } => (
                    io,
                    RequestArgs {
                        anchor: Some(anchor),
                        function: Some(function),
                        offset: Some(offset),
                        ..Default::default()
                    },
                ),
                TransformCommand::Reverse { io } => (io, RequestArgs::default()),
            };
            let task = request.task_hint();
            let request = request.build(task)?;
            commands::transform(&globals, &request, &io.input, io.out.as_deref(), io.check)
        }
        Command::Validate(a) => {
            let request = a.request.build(a.task)?;
            commands::validate_files(&globals, &request, &a.input, &a.output, a.json)
        }
        Command::Eval(a) => eval::eval(globals, a),
        Command::Report(a) => eval::report(&globals, &a.log, a.compare.as_deref(), a.out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
