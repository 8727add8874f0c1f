//! Decides whether a transcript still carries its ground-truth value.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{values_equivalent, EntityValue, FieldSpec};
use crate::providers::{self, prompts, ChatBackend, Payload, ProviderError};
use crate::spoken_parser;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationMode {
    Oracle,
    Provider,
    Both,
}

impl fmt::Display for ValidationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValidationMode::Oracle => "oracle",
            ValidationMode::Provider => "provider",
            ValidationMode::Both => "both",
        })
    }
}

impl FromStr for ValidationMode {
    type Err = ValidationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "oracle" => Ok(ValidationMode::Oracle),
            "provider" => Ok(ValidationMode::Provider),
            "both" => Ok(ValidationMode::Both),
            other => Err(ValidationError::Usage(format!("unknown validation mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationOutcome {
    pub valid: bool,
    pub extracted: Option<EntityValue>,
    pub mode: ValidationMode,
    /// Oracle and judge disagreed; only set in `both` mode.
    pub disagreement: bool,
}

#[derive(Debug, Error)]
pub enum ValidationError {
    #[error(transparent)]
    Provider(ProviderError),
    #[error("judge gave no true/false verdict after {attempts} attempt(s): {detail}")]
    JudgeMalformed { attempts: u32, detail: String },
    #[error("{0}")]
    Usage(String),
}

impl From<ProviderError> for ValidationError {
    fn from(e: ProviderError) -> Self {
        match e {
            ProviderError::MalformedOutput { attempts, detail } => ValidationError::JudgeMalformed { attempts, detail },
            other => ValidationError::Provider(other),
        }
    }
}

/// Validator C. Provider and both modes need a judge backend.
#[derive(Clone, Copy)]
pub struct Validator<'a> {
    mode: ValidationMode,
    judge: Option<&'a dyn ChatBackend>,
}

impl fmt::Debug for Validator<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Validator").field("mode", &self.mode).field("judge", &self.judge.is_some()).finish()
    }
}

impl<'a> Validator<'a> {
    pub fn oracle() -> Self {
        Validator { mode: ValidationMode::Oracle, judge: None }
    }

    pub fn new(mode: ValidationMode, judge: Option<&'a dyn ChatBackend>) -> Result<Self, ValidationError> {
        if mode != ValidationMode::Oracle && judge.is_none() {
            return Err(ValidationError::Usage(format!("{mode} validation needs a judge backend")));
        }
        Ok(Validator { mode, judge })
    }

    pub fn mode(&self) -> ValidationMode {
        self.mode
    }

    pub fn validate(
        &self,
        transcript: &str,
        truth: &EntityValue,
        spec: &FieldSpec,
    ) -> Result<ValidationOutcome, ValidationError> {
        if truth.kind != spec.kind {
            return Err(ValidationError::Usage(format!(
                "truth is a {} but the field expects {}",
                truth.kind, spec.kind
            )));
        }
        let extracted = spoken_parser::extract(spec, transcript);
        let oracle = extracted
            .as_ref()
            .is_some_and(|v| values_equivalent(&spec.kind, &v.canonical, &truth.canonical).unwrap_or(false));
        let judged = match self.mode {
            ValidationMode::Oracle => None,
            _ => Some(self.judge(transcript, truth, spec)?),
        };
        let (valid, disagreement) = match (self.mode, judged) {
            (ValidationMode::Oracle, _) => (oracle, false),
            (ValidationMode::Provider, Some(j)) => (j, false),
            (ValidationMode::Both, Some(j)) => (oracle && j, oracle != j),
            (_, None) => unreachable!("judge consulted outside oracle mode"),
        };
        Ok(ValidationOutcome { valid, extracted, mode: self.mode, disagreement })
    }

    fn judge(&self, transcript: &str, truth: &EntityValue, spec: &FieldSpec) -> Result<bool, ValidationError> {
        let backend = self.judge.ok_or_else(|| ValidationError::Usage("no judge backend".into()))?;
        let request = prompts::verdict_request(spec, transcript, &truth.canonical);
        match providers::chat(backend, &request)? {
            Payload::Verdict(v) => Ok(v),
            other => Err(ValidationError::JudgeMalformed {
                attempts: 1,
                detail: format!("expected a verdict, got {}", other.shape_name()),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::EntityKind;
    use crate::providers::ScriptedBackend;

    fn zip(v: &str) -> EntityValue {
        EntityValue::canonical(EntityKind::ZipCode, v).unwrap()
    }

    #[test]
    fn oracle_examples() {
        let spec = FieldSpec::zip_code();
        let v = Validator::oracle();
        assert!(v.validate("My zip is one two three four five", &zip("12345"), &spec).unwrap().valid);
        assert!(!v.validate("I don't know", &zip("12345"), &spec).unwrap().valid);
        let corrected = v.validate("seven oh ... no, nine oh two one oh", &zip("90210"), &spec).unwrap();
        assert!(corrected.valid);
        assert_eq!(corrected.extracted.unwrap().canonical, "90210");
    }

    #[test]
    fn both_mode_flags_disagreement() {
        let spec = FieldSpec::zip_code();
        let judge = ScriptedBackend::new(vec!["false"]);
        let v = Validator::new(ValidationMode::Both, Some(&judge)).unwrap();
        let out = v.validate("one two three four five", &zip("12345"), &spec).unwrap();
        assert!(!out.valid);
        assert!(out.disagreement);
    }

    #[test]
    fn malformed_judge() {
        let spec = FieldSpec::zip_code();
        let judge = ScriptedBackend::new(vec!["perhaps"; 4]);
        let v = Validator::new(ValidationMode::Provider, Some(&judge)).unwrap();
        assert!(matches!(
            v.validate("one two three four five", &zip("12345"), &spec),
            Err(ValidationError::JudgeMalformed { attempts: 4, .. })
        ));
        assert!(Validator::new(ValidationMode::Provider, None).is_err());
    }
}
