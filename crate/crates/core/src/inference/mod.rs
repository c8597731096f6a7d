//! Inference client and the generate-validate protocol: several independent
//! samples per input, each parsed and validated, with an optional
//! validate-and-retry acceptance mode.

mod backend;
mod log;

pub use backend::{
    ApiFlavor, Backend, ChatMessage, ChatRequest, LiveBackend, ReplayBackend, ReplayEntry, SampleKey, StubBackend,
    StubBehavior,
};
pub use log::{LogError, LogLine, RunHeader, RunInput, RunLog, RunLogWriter, LOG_VERSION};

use std::sync::mpsc;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::corpus::NamingConvention;
use crate::exec::Execution;
use crate::prompts::{PromptTemplate, RenderedPrompt};
use crate::syntax::{parse_module, ModuleItem, Routine};
use crate::transforms::{TaskRequest, TransformPolicy};
use crate::validator::{validate_batch, ValidationReport};

/// How the samples of one input are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// Every sample is a fresh conversation.
    #[default]
    Independent,
    /// Samples continue one conversation, each previous answer included.
    SharedConversation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InferenceConfig {
    pub endpoint: String,
    pub api: ApiFlavor,
    pub model: String,
    pub temperature: f64,
    pub top_p: f64,
    pub top_k: u32,
    pub max_tokens: u32,
    pub context_window: u32,
    pub samples_per_input: usize,
    pub timeout_secs: f64,
    pub max_parallel: usize,
    /// Environment variable holding the endpoint credential.
    pub api_key_env: String,
    pub sample_mode: SampleMode,
    /// Sampling seed forwarded to the endpoint, if any.
    pub seed: Option<u64>,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://localhost:11434/v1/chat/completions".into(),
            api: ApiFlavor::OpenAi,
            model: "llama3.3:70b".into(),
            temperature: 0.8,
            top_p: 0.9,
            top_k: 40,
            max_tokens: 8192,
            context_window: 2048,
            samples_per_input: 10,
            timeout_secs: 300.0,
            max_parallel: 4,
            api_key_env: "RAPIDKIT_API_KEY".into(),
            sample_mode: SampleMode::Independent,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid inference config: {0}")]
pub struct ConfigError(pub String);

impl InferenceConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: &str| Err(ConfigError(m.to_string()));
        if self.samples_per_input == 0 {
            return fail("samples_per_input must be at least 1");
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return fail("temperature must lie in [0, 2]");
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return fail("top_p must lie in (0, 1]");
        }
        if self.max_tokens == 0 || self.context_window == 0 {
            return fail("max_tokens and context_window must be positive");
        }
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return fail("timeout_secs must be positive");
        }
        if self.max_parallel == 0 {
            return fail("max_parallel must be at least 1");
        }
        if self.model.trim().is_empty() {
            return fail("model must not be empty");
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(rename_all = "snake_case")]
pub enum InferenceError {
    #[error("no response within {after_ms} ms")]
    Timeout { after_ms: u64 },
    #[error("endpoint error: {0}")]
    Endpoint(String),
    #[error("output of about {tokens} tokens exceeds max_tokens {limit}")]
    OverlongOutput { tokens: usize, limit: u32 },
    #[error("replay: {0}")]
    Replay(String),
}

/// Rough token count used for the overlong-output check.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

/// Outcome of one generation call, kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generation {
    pub result: Result<String, InferenceError>,
    pub latency: Duration,
}

/// Runs one completion with the configured timeout. A call that outlives
/// the timeout is abandoned and reported as [`InferenceError::Timeout`].
pub fn generate(
    backend: &Arc<dyn Backend>,
    request: &ChatRequest,
    config: &InferenceConfig,
    key: &SampleKey,
) -> Generation {
    let start = Instant::now();
    let (tx, rx) = mpsc::channel();
    let (b, r, c, k) = (Arc::clone(backend), request.clone(), config.clone(), key.clone());
    std::thread::spawn(move || {
        let _ = tx.send(b.complete(&r, &c, &k));
    });
    let result = match rx.recv_timeout(config.timeout()) {
        Ok(Ok(text)) => {
            let tokens = estimate_tokens(&text);
            if tokens > config.max_tokens as usize {
                Err(InferenceError::OverlongOutput { tokens, limit: config.max_tokens })
            } else {
                Ok(text)
            }
        }
        Ok(Err(e)) => Err(e),
        Err(mpsc::RecvTimeoutError::Timeout) => {
            Err(InferenceError::Timeout { after_ms: config.timeout().as_millis() as u64 })
        }
        Err(mpsc::RecvTimeoutError::Disconnected) => Err(InferenceError::Endpoint("backend worker panicked".into())),
    };
    Generation { result, latency: start.elapsed() }
}

/// One sample of a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub input_id: String,
    pub sample_index: usize,
    #[serde(default)]
    pub attempt: usize,
    /// Model output exactly as received.
    pub raw_text: Option<String>,
    pub error: Option<InferenceError>,
    /// Why the output could not be read as routines.
    pub parse_failure: Option<String>,
    pub report: Option<ValidationReport>,
    pub correct: bool,
    pub latency_ms: u64,
    pub timestamp: String,
}

impl GenerationRecord {
    pub fn key(&self) -> SampleKey {
        SampleKey::new(self.input_id.clone(), self.sample_index, self.attempt)
    }
}

/// Routines contained in a model answer. Markdown code fences are ignored;
/// text outside `PROC` blocks is dropped.
pub fn extract_routines(text: &str) -> Result<Vec<Routine>, String> {
    let cleaned: String = text.lines().filter(|l| !l.trim_start().starts_with("```")).collect::<Vec<_>>().join("\n");
    let module = parse_module(&cleaned);
    let mut routines = Vec::new();
    let mut problems = Vec::new();
    for item in module.items {
        if let ModuleItem::Routine(r) = item {
            routines.push(r);
        }
    }
    for w in module.warnings {
        problems.push(format!("line {}: {}", w.line, w.reason));
    }
    if routines.is_empty() {
        if problems.is_empty() {
            problems.push("no PROC block found".into());
        }
        return Err(problems.join("; "));
    }
    Ok(routines)
}

/// Parses and validates an answer against its inputs.
pub fn evaluate_output(
    text: &str,
    inputs: &[Routine],
    request: &TaskRequest,
    convention: &NamingConvention,
    policy: &TransformPolicy,
    input_ref: &str,
) -> Result<ValidationReport, String> {
    let outputs = extract_routines(text)?;
    Ok(validate_batch(inputs, &outputs, request, convention, policy).merged(input_ref))
}

/// One input of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskInput {
    pub id: String,
    pub routines: Vec<Routine>,
    pub request: TaskRequest,
}

/// Everything a run needs besides the inputs.
pub struct RunContext<'a> {
    pub template: &'a PromptTemplate,
    pub backend: Arc<dyn Backend>,
    pub config: &'a InferenceConfig,
    pub convention: &'a NamingConvention,
    pub policy: &'a TransformPolicy,
    pub execution: Execution,
    /// Validate-and-retry: attempts per sample slot; `None` or `Some(1)` is
    /// the plain protocol.
    pub max_attempts: Option<usize>,
    pub log: Option<&'a RunLogWriter>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("prompt for input `{id}`: {source}")]
    Prompt { id: String, source: crate::prompts::PromptError },
    #[error("run needs at least one input")]
    NoInputs,
    #[error("max_attempts must be at least 1")]
    NoAttempts,
    #[error(transparent)]
    Log(#[from] LogError),
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn make_record(key: SampleKey, generation: Generation, input: &TaskInput, ctx: &RunContext<'_>) -> GenerationRecord {
    let mut record = GenerationRecord {
        input_id: key.input_id,
        sample_index: key.sample_index,
        attempt: key.attempt,
        raw_text: None,
        error: None,
        parse_failure: None,
        report: None,
        correct: false,
        latency_ms: generation.latency.as_millis() as u64,
        timestamp: timestamp(),
    };
    match generation.result {
        Ok(text) => {
            match evaluate_output(&text, &input.routines, &input.request, ctx.convention, ctx.policy, &input.id) {
                Ok(report) => {
                    record.correct = report.is_correct;
                    record.report = Some(report);
                }
                Err(diagnostic) => record.parse_failure = Some(diagnostic),
            }
            record.raw_text = Some(text);
        }
        Err(e) => record.error = Some(e),
    }
    record
}

/// Result of [`generate_until_valid`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetryOutcome {
    /// First validator-clean output.
    pub accepted: Option<String>,
    pub attempts: usize,
    pub records: Vec<GenerationRecord>,
}

fn sample_slot(
    input: &TaskInput,
    sample_index: usize,
    request: &ChatRequest,
    ctx: &RunContext<'_>,
) -> Result<Vec<GenerationRecord>, LogError> {
    let attempts = ctx.max_attempts.unwrap_or(1).max(1);
    let mut records = Vec::new();
    for attempt in 0..attempts {
        let key = SampleKey::new(input.id.clone(), sample_index, attempt);
        let generation = generate(&ctx.backend, request, ctx.config, &key);
        let record = make_record(key, generation, input, ctx);
        if let Some(log) = ctx.log {
            log.append(&LogLine::Generation(Box::new(record.clone())))?;
        }
        let done = record.correct;
        records.push(record);
        if done {
            break;
        }
    }
    Ok(records)
}

/// Retries a prompt until the validator accepts the output or
/// `max_attempts` is used up.
pub fn generate_until_valid(
    input: &TaskInput,
    prompt: &RenderedPrompt,
    sample_index: usize,
    max_attempts: usize,
    ctx: &RunContext<'_>,
) -> Result<RetryOutcome, RunError> {
    if max_attempts == 0 {
        return Err(RunError::NoAttempts);
    }
    let request = ChatRequest::new(&prompt.system, &prompt.user);
    let inner =
        RunContext { max_attempts: Some(max_attempts), log: ctx.log, backend: Arc::clone(&ctx.backend), ..*ctx };
    let records = sample_slot(input, sample_index, &request, &inner)?;
    let accepted = records.last().filter(|r| r.correct).and_then(|r| r.raw_text.clone());
    Ok(RetryOutcome { accepted, attempts: records.len(), records })
}

/// Generates `samples_per_input` samples for every input, validating each.
/// Records come back sorted by input order, sample and attempt.
pub fn run_task(inputs: &[TaskInput], ctx: &RunContext<'_>) -> Result<Vec<GenerationRecord>, RunError> {
    ctx.config.validate()?;
    if inputs.is_empty() {
        return Err(RunError::NoInputs);
    }
    if ctx.max_attempts == Some(0) {
        return Err(RunError::NoAttempts);
    }
    let prompts = inputs
        .iter()
        .map(|i| {
            ctx.template.render(&i.request, &i.routines).map_err(|source| RunError::Prompt { id: i.id.clone(), source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let samples = ctx.config.samples_per_input;

    let batches: Vec<Result<Vec<GenerationRecord>, LogError>> = match ctx.config.sample_mode {
        SampleMode::Independent => {
            let jobs: Vec<(usize, usize)> = (0..inputs.len()).flat_map(|i| (0..samples).map(move |s| (i, s))).collect();
            ctx.execution.map_bounded(ctx.config.max_parallel, &jobs, |&(i, s)| {
                let request = ChatRequest::new(&prompts[i].system, &prompts[i].user);
                sample_slot(&inputs[i], s, &request, ctx)
            })
        }
        SampleMode::SharedConversation => {
            let jobs: Vec<usize> = (0..inputs.len()).collect();
            ctx.execution.map_bounded(ctx.config.max_parallel, &jobs, |&i| {
                let mut request = ChatRequest::new(&prompts[i].system, &prompts[i].user);
                let mut all = Vec::new();
                for s in 0..samples {
                    let records = sample_slot(&inputs[i], s, &request, ctx)?;
                    if let Some(text) = records.last().and_then(|r| r.raw_text.clone()) {
                        request.messages.push(ChatMessage::new("assistant", text));
                        request.messages.push(ChatMessage::new("user", prompts[i].user.clone()));
                    }
                    all.extend(records);
                }
                Ok(all)
            })
        }
    };
    let mut records = Vec::with_capacity(inputs.len() * samples);
    for batch in batches {
        records.extend(batch?);
    }
    Ok(records)
}

#[cfg(test)]
mod tests;
