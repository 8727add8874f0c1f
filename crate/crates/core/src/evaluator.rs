//! Dataset splits, dataset statistics and extraction scoring.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{values_equivalent, EntityValue, LabeledSample, Split};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("invalid split ratios {0:?}: each must be positive and they must sum to 1")]
    InvalidRatios((f64, f64, f64)),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios { train: 0.7, valid: 0.15, test: 0.15 }
    }
}

impl SplitRatios {
    pub fn new(train: f64, valid: f64, test: f64) -> Result<Self, EvalError> {
        let r = SplitRatios { train, valid, test };
        r.check()?;
        Ok(r)
    }

    fn check(&self) -> Result<(), EvalError> {
        let parts = [self.train, self.valid, self.test];
        let ok = parts.iter().all(|p| p.is_finite() && *p > 0.0) && (parts.iter().sum::<f64>() - 1.0).abs() < 1e-9;
        if ok {
            Ok(())
        } else {
            Err(EvalError::InvalidRatios((self.train, self.valid, self.test)))
        }
    }
}

/// (train, valid, test) sizes: valid and test are floored, train takes the remainder.
pub fn split_sizes(n: usize, ratios: SplitRatios) -> Result<(usize, usize, usize), EvalError> {
    ratios.check()?;
    let part = |r: f64| ((r * n as f64) + 1e-9).floor() as usize;
    let valid = part(ratios.valid);
    let test = part(ratios.test);
    Ok((n - valid - test, valid, test))
}

/// Assigns every sample to train, valid or test. The shuffle is seeded, and one
/// sample of each value is placed in train first so no value is missing from it.
/// Samples come back in input order with `split` set.
pub fn split(samples: &[LabeledSample], ratios: SplitRatios, seed: u64) -> Result<Vec<LabeledSample>, EvalError> {
    let (train, valid, _) = split_sizes(samples.len(), ratios)?;
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let (firsts, rest): (Vec<usize>, Vec<usize>) =
        order.into_iter().partition(|&i| seen.insert(samples[i].value().canonical.as_str()));
    let mut out = samples.to_vec();
    for (rank, i) in firsts.into_iter().chain(rest).enumerate() {
        out[i].split = if rank < train {
            Split::Train
        } else if rank < train + valid {
            Split::Valid
        } else {
            Split::Test
        };
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        Metrics { tp, fp, fn_, precision, recall, f1, accuracy: ratio(tp, tp + fp + fn_) }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Tp,
    Fp,
    Fn,
}

/// One prediction against its gold value.
pub fn judge(predicted: Option<&str>, gold: &EntityValue) -> Outcome {
    match predicted.map(str::trim).filter(|p| !p.is_empty()) {
        None => Outcome::Fn,
        Some(p) if values_equivalent(&gold.kind, p, &gold.canonical).unwrap_or(false) => Outcome::Tp,
        Some(_) => Outcome::Fp,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub predicted: Option<String>,
    pub gold: EntityValue,
}

pub fn score(predictions: &[Prediction]) -> Metrics {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for p in predictions {
        match judge(p.predicted.as_deref(), &p.gold) {
            Outcome::Tp => tp += 1,
            Outcome::Fp => fp += 1,
            Outcome::Fn => fn_ += 1,
        }
    }
    Metrics::from_counts(tp, fp, fn_)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
    pub unassigned: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub num_samples: usize,
    pub split_counts: SplitCounts,
    pub num_tags_used: usize,
    pub tag_occurrences: usize,
    pub num_unique_values: usize,
    /// Transcript length in characters.
    pub avg_len_chars: f64,
    /// Population standard deviation of the length in characters.
    pub std_len_chars: f64,
}

pub fn dataset_stats(samples: &[LabeledSample]) -> DatasetStats {
    let mut counts = SplitCounts::default();
    let mut tags: BTreeSet<&str> = BTreeSet::new();
    let mut values: BTreeSet<&str> = BTreeSet::new();
    let mut occurrences = 0;
    let lengths: Vec<f64> = samples.iter().map(|s| s.text().chars().count() as f64).collect();
    for s in samples {
        match s.split {
            Split::Train => counts.train += 1,
            Split::Valid => counts.valid += 1,
            Split::Test => counts.test += 1,
            Split::Unassigned => counts.unassigned += 1,
        }
        occurrences += s.tags().len();
        tags.extend(s.tags().iter().map(String::as_str));
        values.insert(s.value().canonical.as_str());
    }
    let n = samples.len();
    let mean = if n == 0 { 0.0 } else { lengths.iter().sum::<f64>() / n as f64 };
    let var = if n == 0 { 0.0 } else { lengths.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n as f64 };
    DatasetStats {
        num_samples: n,
        split_counts: counts,
        num_tags_used: tags.len(),
        tag_occurrences: occurrences,
        num_unique_values: values.len(),
        avg_len_chars: mean,
        std_len_chars: var.sqrt(),
    }
}

/// Aligned accuracy / F1 table, one row per label, values in percent.
pub fn metrics_table(rows: &BTreeMap<String, Metrics>) -> String {
    let width = rows.keys().map(|k| k.chars().count()).max().unwrap_or(0).max("Entity".len());
    let mut out = format!("{:<width$}  {:>7}  {:>7}  {:>7}  {:>7}  {:>6}\n", "Entity", "Acc", "F1", "P", "R", "N");
    for (label, m) in rows {
        out.push_str(&format!(
            "{:<width$}  {:>7.2}  {:>7.2}  {:>7.2}  {:>7.2}  {:>6}\n",
            label,
            m.accuracy * 100.0,
            m.f1 * 100.0,
            m.precision * 100.0,
            m.recall * 100.0,
            m.total()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{EntityKind, Provenance, Transcript};

    fn sample(text: &str, value: &str, tags: &[&str]) -> LabeledSample {
        LabeledSample {
            transcript: Transcript::new(
                text,
                tags.iter().map(|t| t.to_string()).collect(),
                EntityValue::canonical(EntityKind::ZipCode, value).unwrap(),
                Provenance::RuleRendered,
            )
            .unwrap(),
            validated: true,
            split: Split::Unassigned,
        }
    }

    #[test]
    fn split_size_examples() {
        let r = SplitRatios::default();
        assert_eq!(split_sizes(1000, r).unwrap(), (700, 150, 150));
        assert_eq!(split_sizes(1055, r).unwrap(), (739, 158, 158));
        assert_eq!(split_sizes(10, r).unwrap(), (8, 1, 1));
        assert!(SplitRatios::new(0.7, 0.2, 0.2).is_err());
        assert!(SplitRatios::new(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn f1_spot_checks() {
        let m = Metrics::from_counts(1, 1, 0);
        assert_eq!(m.precision, 0.5);
        assert_eq!(m.recall, 1.0);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-12);
        let empty = Metrics::from_counts(0, 0, 4);
        assert_eq!((empty.precision, empty.recall, empty.f1, empty.accuracy), (0.0, 0.0, 0.0, 0.0));
        let perfect = Metrics::from_counts(4, 0, 0);
        assert_eq!((perfect.precision, perfect.recall, perfect.f1, perfect.accuracy), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn scoring_uses_equivalence() {
        let gold = EntityValue::canonical(EntityKind::ZipCode, "12345").unwrap();
        let preds = vec![
            Prediction { predicted: Some("12345-6789".into()), gold: gold.clone() },
            Prediction { predicted: Some("54321".into()), gold: gold.clone() },
            Prediction { predicted: Some("  ".into()), gold },
        ];
        let m = score(&preds);
        assert_eq!((m.tp, m.fp, m.fn_), (1, 1, 1));
        assert!((m.accuracy - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn stats_example() {
        assert_eq!(dataset_stats(&[]), DatasetStats::default());
        let a = sample(&"x".repeat(40), "12345", &["a"]);
        let b = sample(&"y".repeat(44), "12345", &["a", "b"]);
        let s = dataset_stats(&[a, b]);
        assert_eq!(s.avg_len_chars, 42.0);
        assert_eq!(s.std_len_chars, 2.0);
        assert_eq!(s.tag_occurrences, 3);
        assert_eq!(s.num_tags_used, 2);
        assert_eq!(s.num_unique_values, 1);
    }

    #[test]
    fn every_value_reaches_train() {
        let samples: Vec<_> = (0..20).map(|i| sample(&format!("t{i}"), &format!("{:05}", i % 4), &["a"])).collect();
        let out = split(&samples, SplitRatios::default(), 5).unwrap();
        for v in 0..4 {
            let key = format!("{v:05}");
            assert!(out.iter().any(|s| s.split == Split::Train && s.value().canonical == key));
        }
        assert_eq!(out, split(&samples, SplitRatios::default(), 5).unwrap());
    }
}
