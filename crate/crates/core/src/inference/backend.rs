use std::collections::HashMap;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{InferenceConfig, InferenceError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: &str, content: impl Into<String>) -> Self {
        Self { role: role.to_string(), content: content.into() }
    }
}

/// One chat completion call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub messages: Vec<ChatMessage>,
}

impl ChatRequest {
    pub fn new(system: &str, user: &str) -> Self {
        Self { messages: vec![ChatMessage::new("system", system), ChatMessage::new("user", user)] }
    }
}

/// Identifies one generation in a run.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SampleKey {
    pub input_id: String,
    pub sample_index: usize,
    /// Attempt within a validate-and-retry loop, 0 otherwise.
    #[serde(default)]
    pub attempt: usize,
}

impl SampleKey {
    pub fn new(input_id: impl Into<String>, sample_index: usize, attempt: usize) -> Self {
        Self { input_id: input_id.into(), sample_index, attempt }
    }
}

/// A text-generation backend. Implementations must be shareable across
/// worker threads.
pub trait Backend: Send + Sync {
    fn complete(
        &self,
        request: &ChatRequest,
        config: &InferenceConfig,
        key: &SampleKey,
    ) -> Result<String, InferenceError>;

    /// Short description stored in run logs.
    fn describe(&self) -> String;
}

/// Wire format of the live endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApiFlavor {
    /// `POST .../v1/chat/completions` with sampling parameters at top level.
    #[default]
    OpenAi,
    /// `POST .../api/chat` with sampling parameters under `options`.
    Ollama,
}

/// HTTP chat-completion client.
pub struct LiveBackend {
    agent: ureq::Agent,
    api_key: Option<String>,
}

impl LiveBackend {
    /// Reads the API key from the configured environment variable, if set.
    pub fn new(config: &InferenceConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .new_agent();
        let api_key = std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty());
        Self { agent, api_key }
    }

    fn body(request: &ChatRequest, config: &InferenceConfig) -> serde_json::Value {
        match config.api {
            ApiFlavor::OpenAi => serde_json::json!({
                "model": config.model,
                "messages": request.messages,
                "temperature": config.temperature,
                "top_p": config.top_p,
                "top_k": config.top_k,
                "max_tokens": config.max_tokens,
                "seed": config.seed,
                "stream": false,
            }),
            ApiFlavor::Ollama => serde_json::json!({
                "model": config.model,
                "messages": request.messages,
                "stream": false,
                "options": {
                    "temperature": config.temperature,
                    "top_p": config.top_p,
                    "top_k": config.top_k,
                    "num_predict": config.max_tokens,
                    "num_ctx": config.context_window,
                    "seed": config.seed,
                },
            }),
        }
    }

    fn extract(api: ApiFlavor, value: &serde_json::Value) -> Option<String> {
        let content = match api {
            ApiFlavor::OpenAi => value.pointer("/choices/0/message/content"),
            ApiFlavor::Ollama => value.pointer("/message/content"),
        };
        content.and_then(|c| c.as_str()).map(str::to_string)
    }
}

impl Backend for LiveBackend {
    fn complete(
        &self,
        request: &ChatRequest,
        config: &InferenceConfig,
        _key: &SampleKey,
    ) -> Result<String, InferenceError> {
        let mut call = self.agent.post(&config.endpoint).header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = call.send_json(Self::body(request, config)).map_err(|e| match e {
            ureq::Error::Timeout(_) => InferenceError::Timeout { after_ms: (config.timeout_secs * 1000.0) as u64 },
            other => InferenceError::Endpoint(other.to_string()),
        })?;
        let status = response.status();
        let text = response.body_mut().read_to_string().map_err(|e| InferenceError::Endpoint(e.to_string()))?;
        if !status.is_success() {
            let snippet: String = text.chars().take(200).collect();
            return Err(InferenceError::Endpoint(format!("HTTP {status}: {snippet}")));
        }
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| InferenceError::Endpoint(format!("invalid JSON response: {e}")))?;
        Self::extract(config.api, &value)
            .ok_or_else(|| InferenceError::Endpoint("response has no message content".into()))
    }

    fn describe(&self) -> String {
        "live".into()
    }
}

/// Scripted behaviours of the stub backend.
#[derive(Debug, Clone, PartialEq)]
pub enum StubBehavior {
    /// Always returns this text.
    Echo(String),
    /// Returns the reference output with probability `p` per sample and the
    /// known-wrong text otherwise. The draw depends only on
    /// `(seed, input id, sample index, attempt)`.
    Oracle { p: f64, seed: u64, answers: HashMap<String, (String, String)> },
    /// Per input: the text for attempt `i` of each sample (last one
    /// repeats).
    Scripted(HashMap<String, Vec<String>>),
}

/// Deterministic offline backend.
#[derive(Debug, Clone, PartialEq)]
pub struct StubBackend {
    pub behavior: StubBehavior,
    pub delay: Option<Duration>,
}

impl StubBackend {
    pub fn new(behavior: StubBehavior) -> Self {
        Self { behavior, delay: None }
    }

    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = Some(delay);
        self
    }

    /// Whether the sample for `key` is drawn correct.
    pub fn draw(p: f64, seed: u64, key: &SampleKey) -> bool {
        let digest = Sha256::new()
            .chain_update(seed.to_le_bytes())
            .chain_update(key.input_id.as_bytes())
            .chain_update([0])
            .chain_update((key.sample_index as u64).to_le_bytes())
            .chain_update((key.attempt as u64).to_le_bytes())
            .finalize();
        let mut bytes = [0u8; 32];
        bytes.copy_from_slice(&digest);
        ChaCha8Rng::from_seed(bytes).random_bool(p.clamp(0.0, 1.0))
    }
}

impl Backend for StubBackend {
    fn complete(
        &self,
        _request: &ChatRequest,
        _config: &InferenceConfig,
        key: &SampleKey,
    ) -> Result<String, InferenceError> {
        if let Some(d) = self.delay {
            std::thread::sleep(d);
        }
        match &self.behavior {
            StubBehavior::Echo(text) => Ok(text.clone()),
            StubBehavior::Oracle { p, seed, answers } => {
                let (right, wrong) = answers
                    .get(&key.input_id)
                    .ok_or_else(|| InferenceError::Endpoint(format!("stub has no answer for `{}`", key.input_id)))?;
                Ok(if Self::draw(*p, *seed, key) { right.clone() } else { wrong.clone() })
            }
            StubBehavior::Scripted(script) => {
                let texts = script
                    .get(&key.input_id)
                    .filter(|t| !t.is_empty())
                    .ok_or_else(|| InferenceError::Endpoint(format!("stub has no script for `{}`", key.input_id)))?;
                Ok(texts[key.attempt.min(texts.len() - 1)].clone())
            }
        }
    }

    fn describe(&self) -> String {
        match &self.behavior {
            StubBehavior::Echo(_) => "stub:echo".into(),
            StubBehavior::Oracle { p, seed, .. } => format!("stub:p={p},seed={seed}"),
            StubBehavior::Scripted(_) => "stub:scripted".into(),
        }
    }
}

/// Logged outcome of one generation call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReplayEntry {
    Text(String),
    Error(InferenceError),
}

/// Serves generations recorded in a run log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplayBackend {
    entries: HashMap<SampleKey, ReplayEntry>,
}

impl ReplayBackend {
    pub fn new(entries: impl IntoIterator<Item = (SampleKey, ReplayEntry)>) -> Self {
        Self { entries: entries.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Backend for ReplayBackend {
    fn complete(
        &self,
        _request: &ChatRequest,
        _config: &InferenceConfig,
        key: &SampleKey,
    ) -> Result<String, InferenceError> {
        match self.entries.get(key) {
            Some(ReplayEntry::Text(t)) => Ok(t.clone()),
            Some(ReplayEntry::Error(e)) => Err(e.clone()),
            None => Err(InferenceError::Replay(format!(
                "no logged generation for {} sample {} attempt {}",
                key.input_id, key.sample_index, key.attempt
            ))),
        }
    }

    fn describe(&self) -> String {
        "replay".into()
    }
}
