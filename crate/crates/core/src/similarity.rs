//! Synthetic-to-real similarity by embedding cosine, bucketed by how the
//! variation tags of the two transcripts overlap.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{FieldSpec, LabeledSample, NOT_LISTED};
use crate::generation;
use crate::providers::{self, ChatBackend, EmbedBackend};
use crate::renderer::{self, RenderRequest, MAX_VARIATIONS};
use crate::taxonomy::{self, ClassifyMode, VariationRegistry};

pub use crate::providers::EmbeddingVector;

/// Tag sets tried per (sample, target) before giving up on that target.
const ATTEMPTS: usize = 24;

#[derive(Debug, Error, PartialEq)]
pub enum SimilarityError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("zero vector")]
    ZeroVector,
    #[error("real tag set is empty")]
    EmptyRealTags,
    #[error("{0}")]
    Usage(String),
}

pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, SimilarityError> {
    cosine_values(&a.values, &b.values)
}

pub fn cosine_values(a: &[f64], b: &[f64]) -> Result<f64, SimilarityError> {
    if a.len() != b.len() {
        return Err(SimilarityError::DimensionMismatch(a.len(), b.len()));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(SimilarityError::ZeroVector);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapCategory {
    Match,
    Superset,
    Subset,
    NullOverlap,
    /// Shares some tags, but neither set contains the other.
    Partial,
}

impl OverlapCategory {
    pub const ALL: [OverlapCategory; 5] = [
        OverlapCategory::Match,
        OverlapCategory::Superset,
        OverlapCategory::Subset,
        OverlapCategory::NullOverlap,
        OverlapCategory::Partial,
    ];
}

impl fmt::Display for OverlapCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OverlapCategory::Match => "match",
            OverlapCategory::Superset => "superset",
            OverlapCategory::Subset => "subset",
            OverlapCategory::NullOverlap => "null_overlap",
            OverlapCategory::Partial => "partial",
        })
    }
}

pub fn overlap_category(real: &BTreeSet<String>, synth: &BTreeSet<String>) -> Result<OverlapCategory, SimilarityError> {
    if real.is_empty() {
        return Err(SimilarityError::EmptyRealTags);
    }
    Ok(if real == synth {
        OverlapCategory::Match
    } else if real.is_disjoint(synth) {
        OverlapCategory::NullOverlap
    } else if synth.is_superset(real) {
        OverlapCategory::Superset
    } else if synth.is_subset(real) {
        OverlapCategory::Subset
    } else {
        OverlapCategory::Partial
    })
}

#[derive(Clone, Copy)]
pub enum Synthesis<'a> {
    Render,
    Provider { backend: &'a dyn ChatBackend },
}

#[derive(Clone)]
pub struct SimilarityConfig<'a> {
    pub seed: u64,
    /// Categories to build a synthetic counterpart for, per real sample.
    pub targets: Vec<OverlapCategory>,
    pub classify: ClassifyMode<'a>,
    pub synthesis: Synthesis<'a>,
}

impl Default for SimilarityConfig<'_> {
    fn default() -> Self {
        SimilarityConfig {
            seed: 0,
            targets: OverlapCategory::ALL.to_vec(),
            classify: ClassifyMode::Rule,
            synthesis: Synthesis::Render,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub sample: usize,
    pub kind: String,
    pub real_tags: BTreeSet<String>,
    pub synth_tags: BTreeSet<String>,
    pub category: OverlapCategory,
    pub synthetic: String,
    pub cosine: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub n: usize,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub buckets: BTreeMap<String, BTreeMap<OverlapCategory, Bucket>>,
    pub pairs: Vec<PairScore>,
    /// Samples or targets dropped after a provider failure.
    pub skipped: usize,
    pub errors: Vec<String>,
}

/// Mean, std and range of the cosines per kind and category.
pub fn aggregate(pairs: &[PairScore]) -> BTreeMap<String, BTreeMap<OverlapCategory, Bucket>> {
    let mut groups: BTreeMap<(String, OverlapCategory), Vec<f64>> = BTreeMap::new();
    for p in pairs {
        groups.entry((p.kind.clone(), p.category)).or_default().push(p.cosine);
    }
    let mut out: BTreeMap<String, BTreeMap<OverlapCategory, Bucket>> = BTreeMap::new();
    for ((kind, category), xs) in groups {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let bucket = Bucket {
            mean,
            std: var.sqrt(),
            n: xs.len(),
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        };
        out.entry(kind).or_default().insert(category, bucket);
    }
    out
}

impl SimilarityReport {
    /// One row per kind, one `mean±std (n)` column per category.
    pub fn table(&self) -> String {
        let width = self.buckets.keys().map(String::len).max().unwrap_or(0).max("Entity".len());
        let mut out = format!("{:<width$}", "Entity");
        for c in OverlapCategory::ALL {
            out.push_str(&format!("  {:>18}", c.to_string()));
        }
        out.push('\n');
        for (kind, row) in &self.buckets {
            out.push_str(&format!("{kind:<width$}"));
            for c in OverlapCategory::ALL {
                let cell =
                    row.get(&c).map_or_else(|| "-".to_string(), |b| format!("{:.2}±{:.2} ({})", b.mean, b.std, b.n));
                out.push_str(&format!("  {cell:>18}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Candidate synthetic tag sets aiming at `target`, in seeded order.
fn tag_sets(
    target: OverlapCategory,
    real: &BTreeSet<String>,
    pool: &[String],
    rng: &mut ChaCha8Rng,
) -> Vec<BTreeSet<String>> {
    let inside: Vec<&String> = real.iter().filter(|t| t.as_str() != NOT_LISTED).collect();
    let mut outside: Vec<&String> = pool.iter().filter(|t| !real.contains(*t)).collect();
    outside.shuffle(rng);
    let set = |xs: &[&String]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    let mut out = Vec::new();
    match target {
        OverlapCategory::Match => {
            if inside.len() == real.len() {
                out.push(real.clone());
            }
        }
        OverlapCategory::Superset => {
            if inside.len() == real.len() && inside.len() < MAX_VARIATIONS {
                for x in &outside {
                    let mut s = real.clone();
                    s.insert(x.to_string());
                    out.push(s);
                }
            }
        }
        OverlapCategory::Subset => {
            if inside.len() >= 2 {
                for drop in 0..inside.len() {
                    let keep: Vec<&String> =
                        inside.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, t)| *t).collect();
                    out.push(set(&keep));
                }
                for t in &inside {
                    out.push(set(&[*t]));
                }
            }
        }
        OverlapCategory::NullOverlap => {
            for x in &outside {
                out.push(set(&[*x]));
            }
        }
        OverlapCategory::Partial => {
            if inside.len() >= 2 || (inside.len() == 1 && real.len() > 1) {
                for t in &inside {
                    for x in &outside {
                        out.push(set(&[*t, *x]));
                    }
                }
                out.shuffle(rng);
            }
        }
    }
    out.truncate(ATTEMPTS);
    out
}

/// Classifies each real transcript, builds synthetic counterparts for the same
/// value aimed at each target category, embeds both and scores the cosine. The
/// category is computed from the tags the synthetic actually carries.
pub fn pair_and_score(
    real: &[LabeledSample],
    registry: &VariationRegistry,
    embedder: &dyn EmbedBackend,
    config: &SimilarityConfig<'_>,
) -> Result<SimilarityReport, SimilarityError> {
    let mut report = SimilarityReport::default();
    for (index, sample) in real.iter().enumerate() {
        let kind = &sample.value().kind;
        let pool: Vec<String> = match registry.ids_for(kind) {
            Ok(ids) => ids.into_iter().filter(|id| id != NOT_LISTED).collect(),
            Err(e) => {
                report.skipped += 1;
                report.errors.push(format!("sample {index}: {e}"));
                continue;
            }
        };
        let real_tags = match taxonomy::classify(sample.text(), kind, config.classify) {
            Ok(tags) => tags,
            Err(e) => {
                report.skipped += 1;
                report.errors.push(format!("sample {index}: {e}"));
                continue;
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        for &target in &config.targets {
            let mut synthetic: Option<(String, BTreeSet<String>)> = None;
            for (attempt, tags) in tag_sets(target, &real_tags, &pool, &mut rng).into_iter().enumerate() {
                match config.synthesis {
                    Synthesis::Render => {
                        let ids: Vec<&str> = tags.iter().map(String::as_str).collect();
                        let seed = config.seed.wrapping_add((index * ATTEMPTS + attempt) as u64);
                        if let Ok(t) = renderer::render(&RenderRequest::new(sample.value().clone(), ids, seed)) {
                            synthetic = Some((t.text, tags));
                            break;
                        }
                    }
                    Synthesis::Provider { backend } => {
                        let Some(spec) = FieldSpec::builtin(kind) else { break };
                        let ids: Vec<String> = tags.iter().cloned().collect();
                        match generation::generate_transcripts(&spec, registry, sample.value(), &ids, &[], 1, backend) {
                            Ok(mut out) if !out.is_empty() => {
                                synthetic = Some(out.swap_remove(0));
                                break;
                            }
                            Ok(_) => {}
                            Err(e) => {
                                report.skipped += 1;
                                report.errors.push(format!("sample {index} {target}: {e}"));
                                break;
                            }
                        }
                    }
                }
            }
            let Some((text, synth_tags)) = synthetic else { continue };
            let category = overlap_category(&real_tags, &synth_tags)?;
            let vectors = match providers::embed(embedder, &[sample.text().to_string(), text.clone()]) {
                Ok(v) => v,
                Err(e) => {
                    report.skipped += 1;
                    report.errors.push(format!("sample {index} {target}: {e}"));
                    continue;
                }
            };
            let score = match cosine(&vectors[0], &vectors[1]) {
                Ok(s) => s,
                Err(e) => {
                    report.skipped += 1;
                    report.errors.push(format!("sample {index} {target}: {e}"));
                    continue;
                }
            };
            report.pairs.push(PairScore {
                sample: index,
                kind: kind.as_str().to_string(),
                real_tags: real_tags.clone(),
                synth_tags,
                category,
                synthetic: text,
                cosine: score,
            });
        }
    }
    report.buckets = aggregate(&report.pairs);
    Ok(report)
}
