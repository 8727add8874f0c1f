//! Mini-batch prompt ascent for extraction instructions.
//!
//! Each iteration scores the live candidates on a seeded mini-batch, shows the
//! leader's failures to a mutator, admits the mutants and trims the pool. The base
//! instruction is never evicted. Survivors are scored on the validation set after
//! every iteration; the best validation scorer seen so far is kept even if a later
//! batch evicts it, so the running best never drops.

use std::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{FieldSpec, LabeledSample};
use crate::evaluator::{judge, Metrics, Outcome};
use crate::providers::{self, prompts, ChatBackend, FailureCase, Payload, ProviderError};
use crate::spoken_parser;

/// Failure cases shown to the mutator per iteration.
pub const MAX_FAILURES: usize = 10;
/// Byte budget for the failure cases of one mutation request.
pub const FAILURE_BYTES: usize = 4096;

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("invalid optimizer config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

/// Pulls a value out of a transcript under a given instruction.
pub trait Extractor: Sync {
    fn extract(&self, instruction: &str, transcript: &str) -> Result<Option<String>, ProviderError>;
}

impl<F> Extractor for F
where
    F: Fn(&str, &str) -> Result<Option<String>, ProviderError> + Sync,
{
    fn extract(&self, instruction: &str, transcript: &str) -> Result<Option<String>, ProviderError> {
        self(instruction, transcript)
    }
}

/// Rule-based extractor; ignores the instruction.
#[derive(Debug, Clone)]
pub struct OracleExtractor {
    pub spec: FieldSpec,
}

impl Extractor for OracleExtractor {
    fn extract(&self, _instruction: &str, transcript: &str) -> Result<Option<String>, ProviderError> {
        Ok(spoken_parser::extract(&self.spec, transcript).map(|v| v.canonical))
    }
}

/// Sends the instruction as the system message of a chat request.
pub struct ProviderExtractor<'a> {
    pub spec: FieldSpec,
    pub backend: &'a dyn ChatBackend,
}

impl Extractor for ProviderExtractor<'_> {
    fn extract(&self, instruction: &str, transcript: &str) -> Result<Option<String>, ProviderError> {
        let request = prompts::extraction_request(&self.spec, instruction, transcript);
        match providers::chat(self.backend, &request)? {
            Payload::Text(t) => {
                let t = t.trim().trim_matches('"').trim().to_string();
                Ok((!t.is_empty()).then_some(t))
            }
            other => Err(ProviderError::MalformedOutput {
                attempts: 1,
                detail: format!("expected free text, got {}", other.shape_name()),
            }),
        }
    }
}

/// Proposes a revised instruction from failure cases.
pub trait Mutator {
    fn mutate(&self, instruction: &str, failures: &[FailureCase], variant: usize) -> Result<String, ProviderError>;
}

impl<F> Mutator for F
where
    F: Fn(&str, &[FailureCase], usize) -> Result<String, ProviderError>,
{
    fn mutate(&self, instruction: &str, failures: &[FailureCase], variant: usize) -> Result<String, ProviderError> {
        self(instruction, failures, variant)
    }
}

pub struct ProviderMutator<'a> {
    pub backend: &'a dyn ChatBackend,
}

impl Mutator for ProviderMutator<'_> {
    fn mutate(&self, instruction: &str, failures: &[FailureCase], variant: usize) -> Result<String, ProviderError> {
        match providers::chat(self.backend, &prompts::mutation_request(instruction, failures, variant))? {
            Payload::Text(t) => Ok(t.trim().to_string()),
            other => Err(ProviderError::MalformedOutput {
                attempts: 1,
                detail: format!("expected free text, got {}", other.shape_name()),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub batch_size: usize,
    pub iterations: usize,
    pub pool_size: usize,
    pub mutation_count: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { batch_size: 16, iterations: 5, pool_size: 4, mutation_count: 2, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptCandidate {
    pub id: usize,
    pub instruction: String,
    pub lineage: Option<usize>,
    pub depth: usize,
    pub train_score: Option<f64>,
    pub valid_score: Option<f64>,
    /// Fingerprint of the validation set `valid_score` was computed on.
    pub fingerprint: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceEvent {
    Batch,
    Valid,
    Mutant,
    MutationFailed,
    Evicted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub event: TraceEvent,
    pub candidate: Option<usize>,
    pub parent: Option<usize>,
    pub score: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub best: PromptCandidate,
    pub base_valid_score: f64,
    /// Best validation score after each iteration, starting with the base alone.
    pub running_best: Vec<f64>,
    pub candidates: Vec<PromptCandidate>,
    pub trace: Vec<TraceRecord>,
}

/// One JSON object per trace record.
pub fn write_trace<W: std::io::Write>(trace: &[TraceRecord], mut out: W) -> std::io::Result<()> {
    for record in trace {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Extraction metrics plus the failure cases, in sample order.
pub fn evaluate_prompt(
    instruction: &str,
    samples: &[LabeledSample],
    extractor: &dyn Extractor,
) -> Result<(Metrics, Vec<FailureCase>), ProviderError> {
    let predictions: Vec<Option<String>> =
        samples.par_iter().map(|s| extractor.extract(instruction, s.text())).collect::<Result<_, _>>()?;
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    let mut failures = Vec::new();
    for (s, p) in samples.iter().zip(predictions) {
        let outcome = judge(p.as_deref(), s.value());
        match outcome {
            Outcome::Tp => tp += 1,
            Outcome::Fp => fp += 1,
            Outcome::Fn => fn_ += 1,
        }
        if outcome != Outcome::Tp {
            failures.push(FailureCase {
                transcript: s.text().to_string(),
                gold: s.value().canonical.clone(),
                predicted: p,
            });
        }
    }
    Ok((Metrics::from_counts(tp, fp, fn_), failures))
}

/// Fingerprint of a sample set: FNV-1a over texts and gold values.
pub fn dataset_fingerprint(samples: &[LabeledSample]) -> String {
    let mut parts: Vec<&str> = Vec::with_capacity(samples.len() * 2);
    for s in samples {
        parts.push(s.text());
        parts.push(&s.value().canonical);
    }
    format!("{:016x}", crate::providers::fnv1a(&parts))
}

fn trim_failures(failures: Vec<FailureCase>) -> Vec<FailureCase> {
    let mut out = Vec::new();
    let mut bytes = 0;
    for f in failures.into_iter().take(MAX_FAILURES) {
        let size = f.transcript.len() + f.gold.len() + f.predicted.as_ref().map_or(0, String::len);
        if bytes + size > FAILURE_BYTES && !out.is_empty() {
            break;
        }
        bytes += size;
        out.push(f);
    }
    out
}

/// Higher score first; ties go to the shallower, then shorter, then older candidate.
fn rank(a: (&PromptCandidate, f64), b: (&PromptCandidate, f64)) -> Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.0.depth.cmp(&b.0.depth))
        .then_with(|| a.0.instruction.len().cmp(&b.0.instruction.len()))
        .then_with(|| a.0.id.cmp(&b.0.id))
}

pub fn optimize(
    base_instruction: &str,
    trainset: &[LabeledSample],
    validset: &[LabeledSample],
    extractor: &dyn Extractor,
    mutator: &dyn Mutator,
    config: &OptimizerConfig,
) -> Result<OptimizeResult, OptimizerError> {
    let bad = |m: &str| Err(OptimizerError::InvalidConfig(m.to_string()));
    if base_instruction.trim().is_empty() {
        return bad("base instruction is empty");
    }
    if config.batch_size == 0 || config.iterations == 0 || config.pool_size == 0 {
        return bad("batch_size, iterations and pool_size must be positive");
    }
    if config.batch_size > trainset.len() {
        return bad("batch_size exceeds the training set");
    }
    if validset.is_empty() {
        return bad("validation set is empty");
    }
    let fingerprint = dataset_fingerprint(validset);
    let valid_score = |instruction: &str| -> Result<f64, ProviderError> {
        Ok(evaluate_prompt(instruction, validset, extractor)?.0.accuracy)
    };

    let mut candidates = vec![PromptCandidate {
        id: 0,
        instruction: base_instruction.to_string(),
        lineage: None,
        depth: 0,
        train_score: None,
        valid_score: None,
        fingerprint: None,
    }];
    let mut trace = Vec::new();
    let base_valid = valid_score(base_instruction)?;
    candidates[0].valid_score = Some(base_valid);
    candidates[0].fingerprint = Some(fingerprint.clone());
    trace.push(TraceRecord {
        iteration: 0,
        event: TraceEvent::Valid,
        candidate: Some(0),
        parent: None,
        score: Some(base_valid),
        note: None,
    });
    let mut running_best = vec![base_valid];
    let mut champion = 0usize;

    if config.mutation_count > 0 {
        let mut pool: Vec<usize> = vec![0];
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for iteration in 1..=config.iterations {
            let picks = rand::seq::index::sample(&mut rng, trainset.len(), config.batch_size);
            let batch: Vec<LabeledSample> = picks.iter().map(|i| trainset[i].clone()).collect();

            let mut batch_scores: Vec<(usize, f64, Vec<FailureCase>)> = Vec::new();
            for &id in &pool {
                let (m, failures) = evaluate_prompt(&candidates[id].instruction, &batch, extractor)?;
                candidates[id].train_score = Some(m.accuracy);
                trace.push(TraceRecord {
                    iteration,
                    event: TraceEvent::Batch,
                    candidate: Some(id),
                    parent: candidates[id].lineage,
                    score: Some(m.accuracy),
                    note: None,
                });
                batch_scores.push((id, m.accuracy, failures));
            }
            batch_scores.sort_by(|a, b| rank((&candidates[a.0], a.1), (&candidates[b.0], b.1)));
            let (leader, _, leader_failures) = batch_scores[0].clone();
            let failures = trim_failures(leader_failures);

            if !failures.is_empty() {
                for variant in 0..config.mutation_count {
                    let text = match mutator.mutate(&candidates[leader].instruction, &failures, variant) {
                        Ok(t) => t.trim().to_string(),
                        Err(e) => {
                            trace.push(TraceRecord {
                                iteration,
                                event: TraceEvent::MutationFailed,
                                candidate: None,
                                parent: Some(leader),
                                score: None,
                                note: Some(e.to_string()),
                            });
                            continue;
                        }
                    };
                    if text.is_empty() || candidates.iter().any(|c| c.instruction == text) {
                        continue;
                    }
                    let id = candidates.len();
                    candidates.push(PromptCandidate {
                        id,
                        instruction: text,
                        lineage: Some(leader),
                        depth: candidates[leader].depth + 1,
                        train_score: None,
                        valid_score: None,
                        fingerprint: None,
                    });
                    let (m, _) = evaluate_prompt(&candidates[id].instruction, &batch, extractor)?;
                    candidates[id].train_score = Some(m.accuracy);
                    trace.push(TraceRecord {
                        iteration,
                        event: TraceEvent::Mutant,
                        candidate: Some(id),
                        parent: Some(leader),
                        score: Some(m.accuracy),
                        note: None,
                    });
                    batch_scores.push((id, m.accuracy, Vec::new()));
                }
            }

            // trim to pool_size by batch score; the base always stays
            batch_scores.sort_by(|a, b| rank((&candidates[a.0], a.1), (&candidates[b.0], b.1)));
            let mut kept: Vec<usize> = vec![0];
            for (id, _, _) in &batch_scores {
                if *id != 0 && kept.len() < config.pool_size {
                    kept.push(*id);
                }
            }
            for (id, _, _) in &batch_scores {
                if !kept.contains(id) {
                    trace.push(TraceRecord {
                        iteration,
                        event: TraceEvent::Evicted,
                        candidate: Some(*id),
                        parent: candidates[*id].lineage,
                        score: None,
                        note: None,
                    });
                }
            }
            kept.sort_unstable();
            pool = kept;

            for &id in &pool {
                if candidates[id].valid_score.is_none() {
                    let s = valid_score(&candidates[id].instruction)?;
                    candidates[id].valid_score = Some(s);
                    candidates[id].fingerprint = Some(fingerprint.clone());
                    trace.push(TraceRecord {
                        iteration,
                        event: TraceEvent::Valid,
                        candidate: Some(id),
                        parent: candidates[id].lineage,
                        score: Some(s),
                        note: None,
                    });
                }
                let score = |c: usize| candidates[c].valid_score.unwrap_or(0.0);
                if rank((&candidates[id], score(id)), (&candidates[champion], score(champion))) == Ordering::Less {
                    champion = id;
                }
            }
            running_best.push(candidates[champion].valid_score.unwrap_or(0.0));
        }
    }

    Ok(OptimizeResult {
        best: candidates[champion].clone(),
        base_valid_score: base_valid,
        running_best,
        candidates,
        trace,
    })
}
