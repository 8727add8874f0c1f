//! HTTP backends: OpenAI-compatible, Azure OpenAI and Gemini.
//!
//! Request bodies and reply extraction are plain functions so they can be checked
//! without a network.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use reqwest::blocking::{Client, RequestBuilder};
use serde_json::{json, Value};

use super::{BackendKind, ChatBackend, ChatRequest, EmbedBackend, ProviderError, ProviderProfile, TransportError};

const AZURE_API_VERSION: &str = "2024-02-01";

struct Http {
    profile: ProviderProfile,
    client: Client,
    last_request: Mutex<Option<Instant>>,
}

impl Http {
    fn new(profile: ProviderProfile) -> Result<Self, ProviderError> {
        let client = Client::builder()
            .timeout(Duration::from_secs(profile.timeout_secs))
            .build()
            .map_err(|e| ProviderError::Usage(format!("cannot build HTTP client: {e}")))?;
        Ok(Http { profile, client, last_request: Mutex::new(None) })
    }

    fn credential(&self) -> Result<String, TransportError> {
        std::env::var(&self.profile.credential_env)
            .map_err(|_| TransportError(format!("credential variable `{}` is not set", self.profile.credential_env)))
    }

    fn throttle(&self) {
        if self.profile.min_interval_ms == 0 {
            return;
        }
        let interval = Duration::from_millis(self.profile.min_interval_ms);
        let mut last = self.last_request.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(prev) = *last {
            let elapsed = prev.elapsed();
            if elapsed < interval {
                std::thread::sleep(interval - elapsed);
            }
        }
        *last = Some(Instant::now());
    }

    fn authorize(&self, builder: RequestBuilder, key: &str) -> RequestBuilder {
        match self.profile.backend {
            BackendKind::Azure => builder.header("api-key", key),
            BackendKind::Gemini => builder.header("x-goog-api-key", key),
            _ => builder.bearer_auth(key),
        }
    }

    fn post(&self, url: &str, body: &Value) -> Result<Value, TransportError> {
        let key = self.credential()?;
        self.throttle();
        let response = self
            .authorize(self.client.post(url), &key)
            .json(body)
            .send()
            .map_err(|e| TransportError(format!("request failed: {e}")))?;
        let status = response.status();
        let text = response.text().map_err(|e| TransportError(format!("cannot read response: {e}")))?;
        if !status.is_success() {
            return Err(TransportError(format!("HTTP {status}: {}", text.chars().take(200).collect::<String>())));
        }
        serde_json::from_str(&text).map_err(|e| TransportError(format!("response is not JSON: {e}")))
    }
}

fn trim_slash(s: &str) -> &str {
    s.trim_end_matches('/')
}

pub(crate) fn chat_url(profile: &ProviderProfile) -> String {
    let base = trim_slash(&profile.endpoint);
    match profile.backend {
        BackendKind::Azure => format!(
            "{base}/openai/deployments/{}/chat/completions?api-version={}",
            profile.model,
            profile.api_version.as_deref().unwrap_or(AZURE_API_VERSION)
        ),
        BackendKind::Gemini => format!("{base}/v1beta/models/{}:generateContent", profile.model),
        _ => format!("{base}/chat/completions"),
    }
}

pub(crate) fn embed_url(profile: &ProviderProfile) -> String {
    let base = trim_slash(&profile.endpoint);
    match profile.backend {
        BackendKind::Azure => format!(
            "{base}/openai/deployments/{}/embeddings?api-version={}",
            profile.embedding_model,
            profile.api_version.as_deref().unwrap_or(AZURE_API_VERSION)
        ),
        BackendKind::Gemini => format!("{base}/v1beta/models/{}:batchEmbedContents", profile.embedding_model),
        _ => format!("{base}/embeddings"),
    }
}

/// Gemini takes the system text as a separate instruction; the OpenAI dialects
/// take it as the first message.
pub(crate) fn chat_body(profile: &ProviderProfile, request: &ChatRequest) -> Value {
    match profile.backend {
        BackendKind::Gemini => json!({
            "systemInstruction": {"parts": [{"text": request.system_text}]},
            "contents": [{"role": "user", "parts": [{"text": request.user_text}]}],
            "generationConfig": {"temperature": request.temperature, "topP": request.top_p},
        }),
        backend => {
            let mut body = json!({
                "messages": [
                    {"role": "system", "content": request.system_text},
                    {"role": "user", "content": request.user_text},
                ],
                "temperature": request.temperature,
                "top_p": request.top_p,
            });
            if backend != BackendKind::Azure {
                body["model"] = json!(profile.model);
            }
            body
        }
    }
}

pub(crate) fn chat_reply(backend: BackendKind, body: &Value) -> Option<String> {
    match backend {
        BackendKind::Gemini => {
            let parts = body.pointer("/candidates/0/content/parts")?.as_array()?;
            let text: String = parts.iter().filter_map(|p| p.get("text")?.as_str()).collect();
            Some(text)
        }
        _ => body.pointer("/choices/0/message/content")?.as_str().map(str::to_string),
    }
}

pub(crate) fn embed_body(profile: &ProviderProfile, texts: &[String]) -> Value {
    match profile.backend {
        BackendKind::Gemini => {
            let model = format!("models/{}", profile.embedding_model);
            let requests: Vec<Value> =
                texts.iter().map(|t| json!({"model": model, "content": {"parts": [{"text": t}]}})).collect();
            json!({ "requests": requests })
        }
        BackendKind::Azure => json!({ "input": texts }),
        _ => json!({ "model": profile.embedding_model, "input": texts }),
    }
}

fn floats(v: &Value) -> Option<Vec<f64>> {
    v.as_array()?.iter().map(Value::as_f64).collect()
}

pub(crate) fn embed_reply(backend: BackendKind, body: &Value) -> Option<Vec<Vec<f64>>> {
    match backend {
        BackendKind::Gemini => body.get("embeddings")?.as_array()?.iter().map(|e| floats(e.get("values")?)).collect(),
        _ => {
            let mut rows: Vec<(u64, Vec<f64>)> = body
                .get("data")?
                .as_array()?
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    Some((d.get("index").and_then(Value::as_u64).unwrap_or(i as u64), floats(d.get("embedding")?)?))
                })
                .collect::<Option<_>>()?;
            rows.sort_by_key(|(i, _)| *i);
            Some(rows.into_iter().map(|(_, v)| v).collect())
        }
    }
}

pub struct LiveChat {
    http: Http,
}

impl LiveChat {
    pub fn new(profile: ProviderProfile) -> Result<Self, ProviderError> {
        Ok(LiveChat { http: Http::new(profile)? })
    }
}

impl ChatBackend for LiveChat {
    fn complete(&self, request: &ChatRequest, _attempt: u32) -> Result<String, TransportError> {
        let profile = &self.http.profile;
        let reply = self.http.post(&chat_url(profile), &chat_body(profile, request))?;
        chat_reply(profile.backend, &reply).ok_or_else(|| TransportError("reply carries no message text".into()))
    }

    fn backoff_base(&self) -> Duration {
        Duration::from_millis(500)
    }
}

pub struct LiveEmbedder {
    http: Http,
}

impl LiveEmbedder {
    pub fn new(profile: ProviderProfile) -> Result<Self, ProviderError> {
        Ok(LiveEmbedder { http: Http::new(profile)? })
    }
}

impl EmbedBackend for LiveEmbedder {
    fn model_id(&self) -> &str {
        &self.http.profile.embedding_model
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        let profile = &self.http.profile;
        let reply = self
            .http
            .post(&embed_url(profile), &embed_body(profile, texts))
            .map_err(|e| ProviderError::Transport { attempts: 1, message: e.0 })?;
        embed_reply(profile.backend, &reply).ok_or_else(|| ProviderError::MalformedOutput {
            attempts: 1,
            detail: "embedding reply has an unexpected layout".into(),
        })
    }
}
