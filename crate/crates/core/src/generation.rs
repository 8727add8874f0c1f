//! Value generation, transcript generation and coverage balancing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{canonicalize, EntityValue, FieldSpec, LabeledSample, Provenance, Split, Transcript};
use crate::providers::{self, prompts, ChatBackend, Payload, ProviderError};
use crate::taxonomy::{TaxonomyError, VariationRegistry};
use crate::validation::{ValidationError, Validator};

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("provider returned no usable values")]
    EmptyResult,
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderMode {
    Mock,
    Live,
}

impl fmt::Display for ProviderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProviderMode::Mock => "mock",
            ProviderMode::Live => "live",
        })
    }
}

impl FromStr for ProviderMode {
    type Err = GenerationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mock" => Ok(ProviderMode::Mock),
            "live" => Ok(ProviderMode::Live),
            other => Err(GenerationError::InvalidConfig(format!("unknown provider mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub spec: FieldSpec,
    pub num_values: usize,
    pub target_per_pair: usize,
    pub max_rounds: usize,
    pub provider_mode: ProviderMode,
    pub seed: u64,
    /// Variation ids to cover; empty means every id for the kind.
    #[serde(default)]
    pub variations: Vec<String>,
    /// Concurrent provider calls per round; forced to 1 in mock mode.
    #[serde(default = "one")]
    pub parallelism: usize,
}

fn one() -> usize {
    1
}

impl GenerationConfig {
    pub fn new(spec: FieldSpec, num_values: usize, target_per_pair: usize, max_rounds: usize) -> Self {
        GenerationConfig {
            spec,
            num_values,
            target_per_pair,
            max_rounds,
            provider_mode: ProviderMode::Mock,
            seed: 0,
            variations: Vec::new(),
            parallelism: 1,
        }
    }

    pub fn validate(&self) -> Result<(), GenerationError> {
        let bad = |m: &str| Err(GenerationError::InvalidConfig(m.to_string()));
        if self.num_values == 0 {
            return bad("num_values must be at least 1");
        }
        if self.target_per_pair == 0 {
            return bad("target_per_pair must be at least 1");
        }
        if self.max_rounds == 0 {
            return bad("max_rounds must be at least 1");
        }
        self.spec.validate().map_err(|e| GenerationError::InvalidConfig(e.to_string()))
    }

    fn parallelism(&self) -> usize {
        match self.provider_mode {
            ProviderMode::Mock => 1,
            ProviderMode::Live => self.parallelism.max(1),
        }
    }
}

/// Validated transcript counts per (value canonical, variation id).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageLedger {
    counts: BTreeMap<(String, String), usize>,
}

impl CoverageLedger {
    pub fn new<V: AsRef<str>, I: AsRef<str>>(values: &[V], ids: &[I]) -> Self {
        let counts = values
            .iter()
            .flat_map(|v| ids.iter().map(move |i| ((v.as_ref().to_string(), i.as_ref().to_string()), 0)))
            .collect();
        CoverageLedger { counts }
    }

    pub fn count(&self, value: &str, id: &str) -> Option<usize> {
        self.counts.get(&(value.to_string(), id.to_string())).copied()
    }

    pub fn set(&mut self, value: &str, id: &str, count: usize) {
        if let Some(c) = self.counts.get_mut(&(value.to_string(), id.to_string())) {
            *c = count;
        }
    }

    /// Credits every tag of a sample that lies inside the ledger's domain.
    pub fn credit<'t>(&mut self, value: &str, tags: impl IntoIterator<Item = &'t String>) {
        for tag in tags {
            if let Some(c) = self.counts.get_mut(&(value.to_string(), tag.clone())) {
                *c += 1;
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, usize)> {
        self.counts.iter().map(|((v, i), c)| (v.as_str(), i.as_str(), *c))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// (min, max) over all pairs; (0, 0) for an empty ledger.
    pub fn spread(&self) -> (usize, usize) {
        let min = self.counts.values().copied().min().unwrap_or(0);
        let max = self.counts.values().copied().max().unwrap_or(0);
        (min, max)
    }

    /// Ledger rebuilt from emitted samples, one credit per (sample, tag).
    pub fn recount<V: AsRef<str>, I: AsRef<str>>(values: &[V], ids: &[I], samples: &[LabeledSample]) -> Self {
        let mut ledger = CoverageLedger::new(values, ids);
        for s in samples {
            ledger.credit(&s.value().canonical, s.tags());
        }
        ledger
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanItem {
    pub value: String,
    pub variation: String,
    pub deficit: usize,
}

/// Pairs below `target`, most starved first.
pub fn balance_plan(ledger: &CoverageLedger, target: usize) -> Vec<PlanItem> {
    let mut plan: Vec<PlanItem> = ledger
        .iter()
        .filter(|(_, _, c)| *c < target)
        .map(|(v, i, c)| PlanItem { value: v.to_string(), variation: i.to_string(), deficit: target - c })
        .collect();
    plan.sort_by(|a, b| {
        b.deficit.cmp(&a.deficit).then_with(|| a.value.cmp(&b.value)).then_with(|| a.variation.cmp(&b.variation))
    });
    plan
}

/// Up to `n` distinct canonical values from the provider. Malformed entries are dropped.
pub fn generate_values(
    spec: &FieldSpec,
    n: usize,
    backend: &dyn ChatBackend,
) -> Result<Vec<EntityValue>, GenerationError> {
    if n == 0 {
        return Err(GenerationError::InvalidConfig("n must be at least 1".into()));
    }
    let raw = match providers::chat(backend, &prompts::values_request(spec, n))? {
        Payload::Values(v) => v,
        other => {
            return Err(ProviderError::MalformedOutput {
                attempts: 1,
                detail: format!("expected values, got {}", other.shape_name()),
            }
            .into())
        }
    };
    let mut out: Vec<EntityValue> = Vec::new();
    for item in raw {
        match canonicalize(&spec.kind, &item) {
            Ok(c) if out.iter().any(|v| v.canonical == c) => {}
            Ok(c) => out.push(EntityValue { kind: spec.kind.clone(), canonical: c, raw: item }),
            Err(e) => log::warn!("dropping generated value {item:?}: {e}"),
        }
        if out.len() == n {
            break;
        }
    }
    if out.is_empty() {
        return Err(GenerationError::EmptyResult);
    }
    Ok(out)
}

/// New transcripts for `value`. Unknown tags become `not_listed`; texts already in
/// `existing` or repeated within the reply are dropped.
/// Transcript text with its sanitized variation tags.
pub type Generated = (String, BTreeSet<String>);

pub fn generate_transcripts(
    spec: &FieldSpec,
    registry: &VariationRegistry,
    value: &EntityValue,
    variation_ids: &[String],
    existing: &[String],
    count: usize,
    backend: &dyn ChatBackend,
) -> Result<Vec<Generated>, GenerationError> {
    let mut entries = Vec::with_capacity(variation_ids.len());
    for id in variation_ids {
        match registry.get(id) {
            Some(v) if v.category.applies_to(&value.kind) => entries.push(v),
            _ => return Err(TaxonomyError::UnknownVariation(id.clone()).into()),
        }
    }
    let request = prompts::transcripts_request(spec, value, &entries, existing, count);
    let items = match providers::chat(backend, &request)? {
        Payload::Transcripts(items) => items,
        other => {
            return Err(ProviderError::MalformedOutput {
                attempts: 1,
                detail: format!("expected transcripts, got {}", other.shape_name()),
            }
            .into())
        }
    };
    let mut out: Vec<(String, BTreeSet<String>)> = Vec::new();
    for item in items {
        let text = item.transcript.trim().to_string();
        if text.is_empty() || existing.contains(&text) || out.iter().any(|(t, _)| *t == text) {
            continue;
        }
        let tags = registry.sanitize_tags(&value.kind, &item.variation_types);
        out.push((text, tags));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCount {
    pub value: String,
    pub variation: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub rounds_used: usize,
    pub num_values: usize,
    pub num_variations: usize,
    pub samples: usize,
    /// Candidates the validator rejected.
    pub invalid_samples: usize,
    /// invalid / (valid + invalid) over all validated candidates.
    pub invalid_rate: f64,
    /// Valid candidates dropped because a pair already held target + 1.
    pub discarded: usize,
    pub failed_calls: usize,
    pub counts: Vec<PairCount>,
    pub shortfalls: Vec<PlanItem>,
}

impl PipelineReport {
    pub fn is_balanced(&self) -> bool {
        self.shortfalls.is_empty()
    }
}

/// Runs value generation, then rounds of transcript generation, validation and
/// rebalancing until every pair holds `target_per_pair` validated samples or the
/// round cap is hit.
pub fn run_pipeline(
    config: &GenerationConfig,
    registry: &VariationRegistry,
    backend: &dyn ChatBackend,
    validator: &Validator<'_>,
) -> Result<(Vec<LabeledSample>, PipelineReport), GenerationError> {
    config.validate()?;
    let spec = &config.spec;
    let ids: Vec<String> = if config.variations.is_empty() {
        registry.ids_for(&spec.kind)?
    } else {
        for id in &config.variations {
            if !registry.get(id).is_some_and(|v| v.category.applies_to(&spec.kind)) {
                return Err(TaxonomyError::UnknownVariation(id.clone()).into());
            }
        }
        let unique: BTreeSet<&String> = config.variations.iter().collect();
        unique.into_iter().cloned().collect()
    };
    let values = generate_values(spec, config.num_values, backend)?;
    let keys: Vec<&str> = values.iter().map(|v| v.canonical.as_str()).collect();
    let by_key: BTreeMap<&str, &EntityValue> = values.iter().map(|v| (v.canonical.as_str(), v)).collect();
    let mut ledger = CoverageLedger::new(&keys, &ids);
    let target = config.target_per_pair;
    let cap = target + 1;
    let provenance = match config.provider_mode {
        ProviderMode::Mock => Provenance::RuleRendered,
        ProviderMode::Live => Provenance::LlmGenerated,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism())
        .build()
        .map_err(|e| GenerationError::InvalidConfig(e.to_string()))?;

    let mut samples: Vec<LabeledSample> = Vec::new();
    let mut texts: BTreeMap<&str, Vec<String>> = keys.iter().map(|k| (*k, Vec::new())).collect();
    let (mut valid, mut invalid, mut discarded, mut failed_calls, mut rounds_used) =
        (0usize, 0usize, 0usize, 0usize, 0usize);

    for round in 1..=config.max_rounds {
        let plan = balance_plan(&ledger, target);
        if plan.is_empty() {
            break;
        }
        rounds_used = round;
        let replies: Vec<Result<Vec<Generated>, GenerationError>> = pool.install(|| {
            plan.par_iter()
                .map(|item| {
                    let value = by_key[item.value.as_str()];
                    generate_transcripts(
                        spec,
                        registry,
                        value,
                        std::slice::from_ref(&item.variation),
                        &texts[item.value.as_str()],
                        item.deficit,
                        backend,
                    )
                })
                .collect()
        });
        let mut succeeded = 0;
        for (item, reply) in plan.iter().zip(replies) {
            let batch = match reply {
                Ok(b) => {
                    succeeded += 1;
                    b
                }
                Err(e) => {
                    log::warn!("round {round}: {} / {}: {e}", item.value, item.variation);
                    failed_calls += 1;
                    continue;
                }
            };
            let value = by_key[item.value.as_str()];
            for (text, tags) in batch {
                if texts[item.value.as_str()].contains(&text) {
                    continue;
                }
                let outcome = match validator.validate(&text, value, spec) {
                    Ok(o) => o,
                    Err(ValidationError::JudgeMalformed { detail, .. }) => {
                        log::warn!("judge gave no verdict for {text:?}: {detail}");
                        invalid += 1;
                        continue;
                    }
                    Err(e) => {
                        log::warn!("validation failed for {text:?}: {e}");
                        failed_calls += 1;
                        continue;
                    }
                };
                if !outcome.valid {
                    invalid += 1;
                    continue;
                }
                valid += 1;
                let full = tags.iter().any(|t| ledger.count(&item.value, t).is_some_and(|c| c >= cap));
                if full {
                    discarded += 1;
                    continue;
                }
                ledger.credit(&item.value, &tags);
                texts.get_mut(item.value.as_str()).expect("known value").push(text.clone());
                let transcript = Transcript::new(text, tags, value.clone(), provenance)
                    .expect("generated transcripts are non-empty and tagged");
                samples.push(LabeledSample { transcript, validated: true, split: Split::Unassigned });
            }
        }
        if round == 1 && succeeded == 0 && failed_calls > 0 {
            return Err(ProviderError::Transport {
                attempts: 1,
                message: "every transcript request failed in the first round".into(),
            }
            .into());
        }
    }

    let scored = valid + invalid;
    let report = PipelineReport {
        rounds_used,
        num_values: values.len(),
        num_variations: ids.len(),
        samples: samples.len(),
        invalid_samples: invalid,
        invalid_rate: if scored == 0 { 0.0 } else { invalid as f64 / scored as f64 },
        discarded,
        failed_calls,
        counts: ledger
            .iter()
            .map(|(v, i, c)| PairCount { value: v.to_string(), variation: i.to_string(), count: c })
            .collect(),
        shortfalls: balance_plan(&ledger, target),
    };
    Ok((samples, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::EntityKind;
    use crate::providers::{MockChat, ScriptedBackend};

    fn ledger(entries: &[(&str, &str, usize)]) -> CoverageLedger {
        let mut l = CoverageLedger::default();
        for (v, i, c) in entries {
            l.counts.insert((v.to_string(), i.to_string()), *c);
        }
        l
    }

    #[test]
    fn plan_examples() {
        assert!(balance_plan(&ledger(&[("v1", "a", 2), ("v1", "b", 2)]), 2).is_empty());
        assert_eq!(
            balance_plan(&ledger(&[("v1", "a", 0), ("v1", "b", 2)]), 2),
            vec![PlanItem { value: "v1".into(), variation: "a".into(), deficit: 2 }]
        );
        let plan = balance_plan(&ledger(&[("v1", "a", 1), ("v2", "a", 0)]), 1);
        assert_eq!(plan.len(), 1);
        assert_eq!(plan[0].value, "v2");
        let plan = balance_plan(&ledger(&[("b", "x", 1), ("a", "y", 1), ("a", "x", 0)]), 2);
        let order: Vec<_> = plan.iter().map(|p| (p.value.as_str(), p.variation.as_str())).collect();
        assert_eq!(order, vec![("a", "x"), ("a", "y"), ("b", "x")]);
    }

    #[test]
    fn mock_values_are_valid() {
        let zips = generate_values(&FieldSpec::zip_code(), 3, &MockChat::new(7)).unwrap();
        assert_eq!(zips.len(), 3);
        assert!(zips.iter().all(|z| z.canonical.len() == 5));
        let dates = generate_values(&FieldSpec::date_of_birth(), 5, &MockChat::new(7)).unwrap();
        let today = chrono::Local::now().date_naive();
        assert!(dates.iter().all(|d| d.date().is_some_and(|x| x <= today)));
    }

    #[test]
    fn malformed_values_are_dropped() {
        let backend = ScriptedBackend::new(vec![r#"{"values":["1234"]}"#]);
        assert!(matches!(generate_values(&FieldSpec::zip_code(), 1, &backend), Err(GenerationError::EmptyResult)));
    }

    #[test]
    fn foreign_tags_become_not_listed() {
        let reg = VariationRegistry::builtin();
        let value = EntityValue::canonical(EntityKind::ZipCode, "12345").unwrap();
        let backend = ScriptedBackend::new(vec![
            r#"{"transcripts":[{"transcript":"one two three four five","variation_types":["sarcastic"]},{"transcript":"old","variation_types":[]}]}"#,
        ]);
        let out = generate_transcripts(
            &FieldSpec::zip_code(),
            &reg,
            &value,
            &["digit_by_digit".into()],
            &["old".into()],
            2,
            &backend,
        )
        .unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].1, BTreeSet::from(["not_listed".to_string()]));
    }

    #[test]
    fn markdown_payload_is_malformed() {
        let reg = VariationRegistry::builtin();
        let value = EntityValue::canonical(EntityKind::ZipCode, "12345").unwrap();
        let backend = ScriptedBackend::new(vec!["**Transcripts:**\n1. one two three four five"; 4]);
        let err =
            generate_transcripts(&FieldSpec::zip_code(), &reg, &value, &["digit_by_digit".into()], &[], 1, &backend);
        assert!(matches!(err, Err(GenerationError::Provider(ProviderError::MalformedOutput { .. }))));
    }

    #[test]
    fn small_mock_run() {
        let reg = VariationRegistry::builtin();
        let mut config = GenerationConfig::new(FieldSpec::zip_code(), 2, 2, 4);
        config.variations = vec!["digit_by_digit".into(), "filler_words".into(), "pause".into()];
        let (samples, report) = run_pipeline(&config, &reg, &MockChat::new(3), &Validator::oracle()).unwrap();
        assert_eq!(samples.len(), 12);
        assert!(report.is_balanced());
        assert!(samples.iter().all(|s| s.validated));
    }

    #[test]
    fn silent_provider_leaves_full_deficit() {
        let reg = VariationRegistry::builtin();
        let mut config = GenerationConfig::new(FieldSpec::zip_code(), 1, 2, 1);
        config.variations = vec!["digit_by_digit".into()];
        let backend = ScriptedBackend::new(vec![r#"{"values":["12345"]}"#, r#"{"transcripts":[]}"#]);
        let (samples, report) = run_pipeline(&config, &reg, &backend, &Validator::oracle()).unwrap();
        assert!(samples.is_empty());
        assert_eq!(report.shortfalls[0].deficit, 2);
    }
}
