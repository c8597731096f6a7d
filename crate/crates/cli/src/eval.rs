//! `eval` and `report`: runs, run directories and metrics reports.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rapidkit_core::config::ToolkitConfig;
use rapidkit_core::corpus::{read_corpus, synthesize_corpus, CorpusEntry, NamingConvention};
use rapidkit_core::inference::{
    run_task, Backend, GenerationRecord, InferenceError, LiveBackend, RunContext, RunHeader, RunInput, RunLog,
    RunLogWriter, StubBackend, StubBehavior, TaskInput, LOG_VERSION,
};
use rapidkit_core::metrics::{compare_languages, mistake_breakdown, MetricsReport, OutcomeMatrix, RunMeta};
use rapidkit_core::prompts::{select_few_shot, FewShot, PromptTemplate};
use rapidkit_core::syntax::print_routine;
use rapidkit_core::transforms::{apply, TaskKind, TaskRequest};

use crate::commands::write_text;
use crate::failure::{CliResult, Failure, EXIT_OK};
use crate::{EvalArgs, Globals};

#[derive(Debug, Clone, Copy, PartialEq)]
enum BackendSpec {
    Live,
    Stub { p: f64 },
    Replay,
}

impl BackendSpec {
    fn parse(text: &str) -> CliResult<Self> {
        let bad =
            || Failure::config(format!("unknown backend `{text}` (expected live, stub, stub:p=<prob> or replay)"));
        match text {
            "live" => Ok(Self::Live),
            "replay" => Ok(Self::Replay),
            "stub" => Ok(Self::Stub { p: 1.0 }),
            other => {
                let rest = other.strip_prefix("stub:").ok_or_else(bad)?;
                let value = rest.strip_prefix("p=").unwrap_or(rest);
                let p: f64 = value.parse().map_err(|_| bad())?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(Failure::config(format!("stub probability {p} is outside [0, 1]")));
                }
                Ok(Self::Stub { p })
            }
        }
    }
}

/// Everything fixed before the first generation.
struct Plan {
    config: ToolkitConfig,
    task: TaskKind,
    max_attempts: Option<usize>,
    inputs: Vec<TaskInput>,
    few_shot: Vec<FewShot>,
    backend: Arc<dyn Backend>,
    backend_label: String,
}

fn replay_plan(args: &EvalArgs, mut config: ToolkitConfig) -> CliResult<Plan> {
    let path = args.log.as_deref().ok_or_else(|| Failure::config("replay needs --log <run.jsonl>"))?;
    let log = RunLog::read(path)?;
    if args.retry.is_some() || args.task.is_some() || args.corpus.is_some() || args.samples.is_some() {
        log::warn!("replay takes task, inputs, samples and retry from the log; the flags are ignored");
    }
    let header = &log.header;
    config.convention = header.convention.clone();
    config.policy = header.policy.clone();
    config.inference = header.inference.clone();
    config.language = header.language;
    config.seed = header.seed;
    config.validate()?;
    Ok(Plan {
        task: header.task,
        max_attempts: header.max_attempts,
        inputs: log.task_inputs()?,
        few_shot: Vec::new(),
        backend: Arc::new(log.replay_backend()),
        backend_label: header.backend.clone(),
        config,
    })
}

fn corpus_entries(
    args: &EvalArgs,
    config: &ToolkitConfig,
    convention: &NamingConvention,
) -> CliResult<Vec<CorpusEntry>> {
    let mut entries = match (&args.corpus, args.inputs) {
        (Some(path), _) => read_corpus(path, convention)?,
        (None, Some(n)) => synthesize_corpus(config.seed, n, convention, &config.policy, &config.synthesis)
            .map_err(|e| Failure::config(e.to_string()))?,
        (None, None) => return Err(Failure::config("eval needs --corpus or --inputs")),
    };
    if let Some(n) = args.inputs {
        entries.truncate(n);
    }
    if entries.is_empty() {
        return Err(Failure::config("no inputs to evaluate"));
    }
    Ok(entries)
}

fn fresh_plan(args: &EvalArgs, config: ToolkitConfig, spec: BackendSpec) -> CliResult<Plan> {
    let task = args.task.ok_or_else(|| Failure::config("eval needs --task"))?;
    let convention = config.naming_convention();
    let entries = corpus_entries(args, &config, &convention)?;
    let override_request = if args.request.is_empty() { None } else { Some(args.request.build(task)?) };

    let mut inputs = Vec::with_capacity(entries.len());
    let mut answers = HashMap::new();
    for entry in &entries {
        let request = match &override_request {
            Some(r) => r.clone(),
            None => entry
                .request(task)
                .cloned()
                .or((task == TaskKind::Reverse).then_some(TaskRequest::Reverse))
                .ok_or_else(|| {
                    Failure::config(format!("entry `{}` has no {task} request; pass the request flags", entry.id))
                })?,
        };
        let routine = entry.routine.canonical();
        if let BackendSpec::Stub { .. } = spec {
            answers.insert(
                entry.id.clone(),
                (reference_output(entry, &request, &config, &convention)?, print_routine(&routine)),
            );
        }
        inputs.push(TaskInput { id: entry.id.clone(), routines: vec![routine], request });
    }

    let few_shot = match &args.prompt_set {
        Some(path) => select_few_shot(&read_corpus(path, &convention)?, task, config.few_shot.for_task(task)),
        None => Vec::new(),
    };
    let backend: Arc<dyn Backend> = match spec {
        BackendSpec::Live => Arc::new(LiveBackend::new(&config.inference)),
        BackendSpec::Stub { p } => Arc::new(StubBackend::new(StubBehavior::Oracle { p, seed: config.seed, answers })),
        BackendSpec::Replay => unreachable!("replay runs use replay_plan"),
    };
    Ok(Plan { task, max_attempts: args.retry, inputs, few_shot, backend_label: backend.describe(), backend, config })
}

fn reference_output(
    entry: &CorpusEntry,
    request: &TaskRequest,
    config: &ToolkitConfig,
    convention: &NamingConvention,
) -> CliResult<String> {
    if entry.request(request.kind()) == Some(request) {
        if let Some(text) = entry.oracle_outputs.get(&request.kind()) {
            return Ok(text.clone());
        }
    }
    apply(&entry.routine, request, &config.policy, convention)
        .map(|r| print_routine(&r))
        .map_err(|e| Failure::config(format!("entry `{}`: {e}", entry.id)))
}

fn default_run_dir(seed: u64) -> PathBuf {
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ");
    PathBuf::from("runs").join(format!("{stamp}-seed{seed}"))
}

/// Metrics report of a finished run.
fn build_report(header: &RunHeader, records: &[GenerationRecord]) -> CliResult<(OutcomeMatrix, MetricsReport)> {
    let ids: Vec<String> = header.inputs.iter().map(|i| i.id.clone()).collect();
    let malformed = |e: rapidkit_core::metrics::MetricsError| Failure::parse(format!("run records: {e}"));
    let matrix =
        OutcomeMatrix::from_records(header.task, header.language, &ids, header.inference.samples_per_input, records)
            .map_err(malformed)?;
    let breakdown = mistake_breakdown(&matrix, records).map_err(malformed)?;
    let run = RunMeta {
        backend: header.backend.clone(),
        model: header.inference.model.clone(),
        seed: header.seed,
        max_attempts: header.max_attempts,
    };
    let report = MetricsReport::new(&matrix, &breakdown, run);
    Ok((matrix, report))
}

fn write_report(dir: &Path, report: &MetricsReport) -> CliResult<()> {
    write_text(&dir.join("report.json"), &report.to_json())?;
    write_text(&dir.join("report.txt"), &report.render_text())?;
    write_text(&dir.join("histogram.csv"), &report.histogram_csv())
}

pub fn eval(globals: Globals, args: EvalArgs) -> CliResult {
    let mut config = globals.config;
    if let Some(s) = args.samples {
        config.inference.samples_per_input = s;
    }
    if args.retry == Some(0) {
        return Err(Failure::config("--retry must be at least 1"));
    }
    config.validate()?;
    let spec = BackendSpec::parse(&args.backend)?;
    let plan = match spec {
        BackendSpec::Replay => replay_plan(&args, config)?,
        _ => fresh_plan(&args, config, spec)?,
    };
    let config = &plan.config;
    let convention = config.naming_convention();
    let resources = config.resources(config.language)?;
    let template =
        PromptTemplate::with_resources(resources, plan.task, plan.few_shot.clone(), &convention, &config.policy)
            .map_err(|e| Failure::config(e.to_string()))?;

    let run_dir = args.run_dir.clone().unwrap_or_else(|| default_run_dir(config.seed));
    std::fs::create_dir_all(&run_dir).map_err(|e| Failure::io(&run_dir, e))?;
    write_text(&run_dir.join("config.json"), &config.to_json())?;
    let header = RunHeader {
        version: LOG_VERSION,
        task: plan.task,
        language: config.language,
        backend: plan.backend_label.clone(),
        seed: config.seed,
        max_attempts: plan.max_attempts,
        inference: config.inference.clone(),
        convention: config.convention.clone(),
        policy: config.policy.clone(),
        inputs: plan.inputs.iter().map(RunInput::from).collect(),
    };
    let writer = RunLogWriter::create(&run_dir.join("run.jsonl"), &header)?;
    log::info!(
        "running {} inputs x {} samples on {}",
        plan.inputs.len(),
        config.inference.samples_per_input,
        plan.backend_label
    );
    let ctx = RunContext {
        template: &template,
        backend: Arc::clone(&plan.backend),
        config: &config.inference,
        convention: &convention,
        policy: &config.policy,
        execution: config.execution,
        max_attempts: plan.max_attempts,
        log: Some(&writer),
    };
    let records = run_task(&plan.inputs, &ctx)?;
    let (_, report) = build_report(&header, &records)?;
    write_report(&run_dir, &report)?;
    print!("{}", report.render_text());
    eprintln!("run directory: {}", run_dir.display());

    if records.iter().all(|r| r.error.is_some()) {
        let replay_mismatch = records.iter().any(|r| matches!(r.error, Some(InferenceError::Replay(_))));
        let first = records[0].error.as_ref().map(ToString::to_string).unwrap_or_default();
        return Err(if replay_mismatch {
            Failure::config(format!("the log does not cover this run: {first}"))
        } else {
            Failure::endpoint(format!("every generation failed: {first}"))
        });
    }
    Ok(EXIT_OK)
}

pub fn report(_globals: &Globals, log_path: &Path, compare: Option<&Path>, out: Option<&Path>) -> CliResult {
    let log = RunLog::read(log_path)?;
    let (matrix, report) = build_report(&log.header, &log.records)?;
    if let Some(dir) = out {
        write_report(dir, &report)?;
    }
    print!("{}", report.render_text());
    if let Some(other_path) = compare {
        let other = RunLog::read(other_path)?;
        let (other_matrix, _) = build_report(&other.header, &other.records)?;
        let comparison = compare_languages(&matrix, &other_matrix).ok_or_else(|| {
            Failure::config("runs are not comparable: they need the same task and inputs in different languages")
        })?;
        println!();
        print!("{}", comparison.render_text());
    }
    Ok(EXIT_OK)
}
