//! Offline backends. Every reply is a pure function of the request and the seed.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{ChatBackend, ChatRequest, EmbedBackend, ProviderError, TaskContext, TransportError};
use crate::domain::{format_date, values_equivalent, EntityKind, EntityValue};
use crate::renderer::{self, RenderRequest};
use crate::spoken_parser::{self, lexicon};
use crate::taxonomy::classify_rule;

/// Tries per transcript before the mock gives up on finding an unseen text.
const RENDER_ATTEMPTS: u64 = 64;

/// Stable 64-bit FNV-1a over `parts`, each followed by a 0xff separator.
pub fn fnv1a(parts: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for b in part.bytes().chain(std::iter::once(0xff)) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

fn renders_everywhere(value: &EntityValue) -> bool {
    let Ok(ids) = renderer::registry().ids_for(&value.kind) else {
        return false;
    };
    ids.iter()
        .filter(|id| id.as_str() != crate::domain::NOT_LISTED)
        .all(|id| renderer::render(&RenderRequest::new(value.clone(), [id.as_str()], 0)).is_ok())
}

/// Up to `n` distinct seeded values of `kind`, each speakable under every
/// variation that applies to the kind.
pub fn mock_values(kind: &EntityKind, n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<String> = Vec::new();
    let names: Vec<&str> = lexicon::FIRST_NAMES.to_vec();
    let budget = n * 200 + 200;
    for _ in 0..budget {
        if out.len() >= n {
            break;
        }
        let candidate = match kind {
            EntityKind::ZipCode => format!("{:05}", rng.gen_range(0..100_000u32)),
            EntityKind::DateOfBirth => {
                let date =
                    NaiveDate::from_ymd_opt(rng.gen_range(1940..=2010), rng.gen_range(1..=9), rng.gen_range(1..=9));
                match date {
                    Some(d) => format_date(d),
                    None => continue,
                }
            }
            EntityKind::PersonName => names[rng.gen_range(0..names.len())].to_string(),
            EntityKind::Extension(_) => return out,
        };
        if out.contains(&candidate) {
            continue;
        }
        let Ok(value) = EntityValue::canonical(kind.clone(), &candidate) else {
            continue;
        };
        if renders_everywhere(&value) {
            out.push(candidate);
        }
    }
    out
}

/// Rule-based chat stand-in.
#[derive(Debug, Clone, Default)]
pub struct MockChat {
    seed: u64,
}

impl MockChat {
    pub fn new(seed: u64) -> Self {
        MockChat { seed }
    }

    fn transcripts(&self, value: &EntityValue, ids: &[String], count: usize, existing: &[String]) -> String {
        let seen: BTreeSet<&str> = existing.iter().map(String::as_str).collect();
        let mut made: Vec<(String, Vec<String>)> = Vec::new();
        let key = fnv1a(&[&self.seed.to_string(), &value.canonical, &ids.join(","), &existing.len().to_string()]);
        let mut attempt = 0u64;
        while made.len() < count && attempt < RENDER_ATTEMPTS * count.max(1) as u64 {
            let seed = key.wrapping_add(attempt) % 1_000_003;
            attempt += 1;
            let Ok(t) = renderer::render(&RenderRequest::new(value.clone(), ids.iter().map(String::as_str), seed))
            else {
                continue;
            };
            if seen.contains(t.text.as_str()) || made.iter().any(|(m, _)| *m == t.text) {
                continue;
            }
            made.push((t.text, t.variation_tags.into_iter().collect()));
        }
        let items: Vec<_> =
            made.into_iter().map(|(text, tags)| json!({ "transcript": text, "variation_types": tags })).collect();
        json!({ "transcripts": items }).to_string()
    }

    fn mutate(&self, instruction: &str, failures: &[super::FailureCase], variant: usize) -> String {
        const HINTS: &[&str] = &[
            "Read spoken digits one by one and keep leading zeros.",
            "When the caller corrects themselves, keep only the corrected value.",
            "Ignore filler words such as um, uh and you know.",
            "A word like double or triple repeats the next digit.",
            "Write dates as MM-DD-YYYY even when spoken as continuous digits.",
            "Return the first name only, never a title or surname.",
        ];
        let mut words: Vec<&str> = Vec::new();
        for f in failures {
            words.push(&f.transcript);
        }
        let key = fnv1a(&[&self.seed.to_string(), instruction, &words.join("|"), &variant.to_string()]);
        let hint = HINTS[(key % HINTS.len() as u64) as usize];
        if instruction.contains(hint) {
            instruction.to_string()
        } else {
            format!("{instruction}\n{hint}")
        }
    }
}

impl ChatBackend for MockChat {
    fn complete(&self, request: &ChatRequest, _attempt: u32) -> Result<String, TransportError> {
        let task =
            request.task.as_ref().ok_or_else(|| TransportError("mock backend needs a structured task".into()))?;
        let reply = match task {
            TaskContext::Values { spec, count } => {
                let key = fnv1a(&[&self.seed.to_string(), &spec.field_name]);
                json!({ "values": mock_values(&spec.kind, *count, key) }).to_string()
            }
            TaskContext::Transcripts { value, variation_ids, count, existing } => {
                self.transcripts(value, variation_ids, *count, existing)
            }
            TaskContext::Verdict { kind, transcript, truth } => {
                let found = spoken_parser::extract_kind(kind, transcript)
                    .is_some_and(|v| values_equivalent(kind, &v.canonical, truth).unwrap_or(false));
                found.to_string()
            }
            TaskContext::Tags { kind, transcript } => {
                serde_json::to_string(&classify_rule(transcript, kind)).unwrap_or_else(|_| "[]".into())
            }
            TaskContext::Mutate { instruction, failures, variant } => self.mutate(instruction, failures, *variant),
            TaskContext::Extract { spec, transcript, .. } => {
                spoken_parser::extract(spec, transcript).map(|v| v.canonical).unwrap_or_default()
            }
        };
        Ok(reply)
    }

    fn backoff_base(&self) -> Duration {
        Duration::ZERO
    }
}

/// Hashed bag-of-tokens embedder.
#[derive(Debug, Clone)]
pub struct MockEmbedder {
    dimension: usize,
}

impl Default for MockEmbedder {
    fn default() -> Self {
        MockEmbedder { dimension: 256 }
    }
}

impl MockEmbedder {
    pub fn new(dimension: usize) -> Self {
        MockEmbedder { dimension: dimension.max(1) }
    }

    pub fn vector(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dimension];
        let lower = text.to_lowercase();
        for token in lower.split(|c: char| !(c.is_alphanumeric() || c == '\'')).filter(|t| !t.is_empty()) {
            let h = fnv1a(&[token]);
            let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
            v[(h % self.dimension as u64) as usize] += sign;
        }
        v
    }
}

impl EmbedBackend for MockEmbedder {
    fn model_id(&self) -> &str {
        "mock-embed"
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        Ok(texts.iter().map(|t| self.vector(t)).collect())
    }
}

/// Replays fixed replies in order; used to test retry and parsing paths.
#[derive(Debug)]
pub struct ScriptedBackend {
    replies: Mutex<Vec<Result<String, String>>>,
    calls: AtomicUsize,
}

impl ScriptedBackend {
    pub fn new<S: Into<String>>(replies: Vec<S>) -> Self {
        ScriptedBackend {
            replies: Mutex::new(replies.into_iter().map(|r| Ok(r.into())).collect()),
            calls: AtomicUsize::new(0),
        }
    }

    /// Fails with a transport error on the first `n` calls.
    pub fn failing(n: usize) -> Self {
        ScriptedBackend { replies: Mutex::new(vec![Err("connection refused".into()); n]), calls: AtomicUsize::new(0) }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, _request: &ChatRequest, _attempt: u32) -> Result<String, TransportError> {
        let i = self.calls.fetch_add(1, Ordering::SeqCst);
        let replies = self.replies.lock().expect("script lock");
        match replies.get(i) {
            Some(Ok(text)) => Ok(text.clone()),
            Some(Err(e)) => Err(TransportError(e.clone())),
            None => Err(TransportError("script exhausted".into())),
        }
    }

    fn backoff_base(&self) -> Duration {
        Duration::ZERO
    }
}
