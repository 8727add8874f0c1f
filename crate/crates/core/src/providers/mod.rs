//! Chat and embedding backends behind one interface, with strict payload parsing.
//!
//! Every call goes through [`chat`], which strips a code fence if present, parses the
//! reply against the requested shape and retries on transport or shape failures.

mod live;
mod mock;
pub mod prompts;

use std::fmt;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::domain::{EntityKind, EntityValue, FieldSpec};

pub use live::{LiveChat, LiveEmbedder};
pub use mock::{fnv1a, mock_values, MockChat, MockEmbedder, ScriptedBackend};

pub const DEFAULT_MAX_RETRIES: u32 = 3;

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("provider failed after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("malformed output after {attempts} attempt(s): {detail}")]
    MalformedOutput { attempts: u32, detail: String },
    #[error("usage error: {0}")]
    Usage(String),
    #[error("missing credential: environment variable `{0}` is not set")]
    MissingCredential(String),
}

/// A single failed exchange with a backend.
#[derive(Debug, Clone, Error)]
#[error("{0}")]
pub struct TransportError(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedShape {
    ValuesPayload,
    TranscriptsPayload,
    BooleanVerdict,
    TagArray,
    FreeText,
}

/// One (transcript, gold, predicted) triple shown to a prompt mutator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureCase {
    pub transcript: String,
    pub gold: String,
    pub predicted: Option<String>,
}

/// Structured form of what a request asks for. Live backends only see the prompt
/// text; the mock answers from this.
#[derive(Debug, Clone, PartialEq)]
pub enum TaskContext {
    Values { spec: FieldSpec, count: usize },
    Transcripts { value: EntityValue, variation_ids: Vec<String>, count: usize, existing: Vec<String> },
    Verdict { kind: EntityKind, transcript: String, truth: String },
    Tags { kind: EntityKind, transcript: String },
    Mutate { instruction: String, failures: Vec<FailureCase>, variant: usize },
    Extract { spec: FieldSpec, instruction: String, transcript: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub system_text: String,
    pub user_text: String,
    pub expected_shape: ExpectedShape,
    pub temperature: f64,
    pub top_p: f64,
    pub max_retries: u32,
    pub task: Option<TaskContext>,
}

impl ChatRequest {
    pub fn new(system_text: impl Into<String>, user_text: impl Into<String>, expected_shape: ExpectedShape) -> Self {
        ChatRequest {
            system_text: system_text.into(),
            user_text: user_text.into(),
            expected_shape,
            temperature: 0.0,
            top_p: 1.0,
            max_retries: DEFAULT_MAX_RETRIES,
            task: None,
        }
    }

    pub fn with_task(mut self, task: TaskContext) -> Self {
        self.task = Some(task);
        self
    }
}

/// One generated transcript as returned by a provider, tags not yet sanitized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedTranscript {
    pub transcript: String,
    #[serde(default)]
    pub variation_types: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Values(Vec<String>),
    Transcripts(Vec<GeneratedTranscript>),
    Verdict(bool),
    Tags(Vec<String>),
    Text(String),
}

impl Payload {
    pub fn shape_name(&self) -> &'static str {
        match self {
            Payload::Values(_) => "values payload",
            Payload::Transcripts(_) => "transcripts payload",
            Payload::Verdict(_) => "boolean verdict",
            Payload::Tags(_) => "tag array",
            Payload::Text(_) => "free text",
        }
    }
}

pub trait ChatBackend: Send + Sync {
    /// Raw reply text for `request`. `attempt` counts from 0.
    fn complete(&self, request: &ChatRequest, attempt: u32) -> Result<String, TransportError>;

    /// Delay before the first retry; doubled on each further retry.
    fn backoff_base(&self) -> Duration {
        Duration::from_millis(250)
    }
}

impl<T: ChatBackend + ?Sized> ChatBackend for &T {
    fn complete(&self, request: &ChatRequest, attempt: u32) -> Result<String, TransportError> {
        (**self).complete(request, attempt)
    }

    fn backoff_base(&self) -> Duration {
        (**self).backoff_base()
    }
}

impl<T: ChatBackend + ?Sized> ChatBackend for Box<T> {
    fn complete(&self, request: &ChatRequest, attempt: u32) -> Result<String, TransportError> {
        (**self).complete(request, attempt)
    }

    fn backoff_base(&self) -> Duration {
        (**self).backoff_base()
    }
}

/// Sends `request`, retrying up to `request.max_retries` times.
pub fn chat(backend: &dyn ChatBackend, request: &ChatRequest) -> Result<Payload, ProviderError> {
    let mut last = None;
    for attempt in 0..=request.max_retries {
        if attempt > 0 {
            let delay = backend.backoff_base().saturating_mul(1 << (attempt - 1).min(16));
            if !delay.is_zero() {
                thread::sleep(delay);
            }
        }
        let attempts = attempt + 1;
        match backend.complete(request, attempt) {
            Ok(text) => match parse_payload(request.expected_shape, &text) {
                Ok(payload) => return Ok(payload),
                Err(detail) => {
                    log::debug!("attempt {attempts}: malformed output: {detail}");
                    last = Some(ProviderError::MalformedOutput { attempts, detail });
                }
            },
            Err(e) => {
                log::debug!("attempt {attempts}: transport failure: {e}");
                last = Some(ProviderError::Transport { attempts, message: e.0 });
            }
        }
    }
    Err(last.expect("at least one attempt is made"))
}

/// Removes one enclosing Markdown code fence, with or without a language tag.
pub fn strip_fences(text: &str) -> &str {
    let t = text.trim();
    if t.len() < 6 || !t.starts_with("```") || !t.ends_with("```") {
        return t;
    }
    let inner = &t[3..t.len() - 3];
    let tag_len = inner.find(|c: char| !c.is_ascii_alphanumeric()).unwrap_or(inner.len());
    let after_tag = &inner[tag_len..];
    if tag_len > 0 && after_tag.starts_with(char::is_whitespace) {
        after_tag.trim()
    } else {
        inner.trim()
    }
}

fn parse_json(text: &str) -> Result<Value, String> {
    serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))
}

fn string_list(value: &Value, what: &str) -> Result<Vec<String>, String> {
    let items = value.as_array().ok_or_else(|| format!("`{what}` is not an array"))?;
    items
        .iter()
        .map(|v| match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            other => Err(format!("`{what}` holds a non-string entry: {other}")),
        })
        .collect()
}

fn field<'a>(value: &'a Value, keys: &[&str]) -> Result<&'a Value, String> {
    let obj = value.as_object().ok_or("expected a JSON object")?;
    keys.iter().find_map(|k| obj.get(*k)).ok_or_else(|| format!("missing key `{}`", keys[0]))
}

/// Parses reply text against `shape`. The only leniency is fence stripping, plus
/// case and trailing punctuation for boolean verdicts.
pub fn parse_payload(shape: ExpectedShape, text: &str) -> Result<Payload, String> {
    let body = strip_fences(text);
    match shape {
        ExpectedShape::FreeText => Ok(Payload::Text(body.to_string())),
        ExpectedShape::BooleanVerdict => {
            let word = body.trim_end_matches(['.', '!', '?', ' ']).to_ascii_lowercase();
            match word.as_str() {
                "true" => Ok(Payload::Verdict(true)),
                "false" => Ok(Payload::Verdict(false)),
                _ => Err(format!("expected true or false, got {:?}", truncate(body, 60))),
            }
        }
        ExpectedShape::ValuesPayload => {
            let json = parse_json(body)?;
            string_list(field(&json, &["values"])?, "values").map(Payload::Values)
        }
        ExpectedShape::TranscriptsPayload => {
            let json = parse_json(body)?;
            let list = field(&json, &["transcripts"])?.clone();
            serde_json::from_value::<Vec<GeneratedTranscript>>(list)
                .map(Payload::Transcripts)
                .map_err(|e| format!("bad transcript entry: {e}"))
        }
        ExpectedShape::TagArray => {
            let json = parse_json(body)?;
            let list = if json.is_array() { &json } else { field(&json, &["variation_types", "tags"])? };
            string_list(list, "tags").map(Payload::Tags)
        }
    }
}

fn truncate(s: &str, max: usize) -> &str {
    match s.char_indices().nth(max) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

/// A dense embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
    pub model_id: String,
}

impl EmbeddingVector {
    pub fn dimension(&self) -> usize {
        self.values.len()
    }
}

pub trait EmbedBackend: Send + Sync {
    fn model_id(&self) -> &str;
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError>;
}

/// One vector per text, order preserved.
pub fn embed(backend: &dyn EmbedBackend, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
    if texts.is_empty() {
        return Err(ProviderError::Usage("embed needs at least one text".into()));
    }
    let raw = backend.embed_batch(texts)?;
    if raw.len() != texts.len() {
        return Err(ProviderError::MalformedOutput {
            attempts: 1,
            detail: format!("{} vectors for {} texts", raw.len(), texts.len()),
        });
    }
    let dim = raw[0].len();
    if dim == 0 || raw.iter().any(|v| v.len() != dim || v.iter().any(|x| !x.is_finite())) {
        return Err(ProviderError::MalformedOutput {
            attempts: 1,
            detail: "embedding vectors are empty, ragged or non-finite".into(),
        });
    }
    Ok(raw.into_iter().map(|values| EmbeddingVector { values, model_id: backend.model_id().to_string() }).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Mock,
    Openai,
    Azure,
    Gemini,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Mock => "mock",
            BackendKind::Openai => "openai",
            BackendKind::Azure => "azure",
            BackendKind::Gemini => "gemini",
        })
    }
}

/// Connection settings for one backend. Holds the name of the variable carrying
/// the credential, never the credential itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderProfile {
    pub name: String,
    pub backend: BackendKind,
    #[serde(default)]
    pub endpoint: String,
    #[serde(default)]
    pub model: String,
    #[serde(default)]
    pub embedding_model: String,
    #[serde(default)]
    pub credential_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    /// Minimum spacing between requests; 0 disables throttling.
    #[serde(default)]
    pub min_interval_ms: u64,
    #[serde(default)]
    pub api_version: Option<String>,
}

fn default_timeout() -> u64 {
    60
}

impl ProviderProfile {
    pub fn mock(name: impl Into<String>) -> Self {
        ProviderProfile {
            name: name.into(),
            backend: BackendKind::Mock,
            endpoint: String::new(),
            model: "mock".into(),
            embedding_model: "mock-embed".into(),
            credential_env: String::new(),
            timeout_secs: default_timeout(),
            min_interval_ms: 0,
            api_version: None,
        }
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.backend == BackendKind::Mock {
            return Ok(());
        }
        if self.endpoint.trim().is_empty() {
            return Err(ProviderError::Usage(format!("profile `{}` has no endpoint", self.name)));
        }
        if self.model.trim().is_empty() {
            return Err(ProviderError::Usage(format!("profile `{}` has no model", self.name)));
        }
        if self.credential_env.trim().is_empty() {
            return Err(ProviderError::Usage(format!("profile `{}` names no credential variable", self.name)));
        }
        Ok(())
    }

    /// Chat backend for this profile. Mock profiles never touch the network.
    pub fn chat_backend(&self, seed: u64) -> Result<Box<dyn ChatBackend>, ProviderError> {
        self.validate()?;
        match self.backend {
            BackendKind::Mock => Ok(Box::new(MockChat::new(seed))),
            _ => Ok(Box::new(LiveChat::new(self.clone())?)),
        }
    }

    pub fn embed_backend(&self) -> Result<Box<dyn EmbedBackend>, ProviderError> {
        self.validate()?;
        match self.backend {
            BackendKind::Mock => Ok(Box::new(MockEmbedder::default())),
            _ => Ok(Box::new(LiveEmbedder::new(self.clone())?)),
        }
    }
}
