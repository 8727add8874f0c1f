//! Registry of linguistic variation types and transcript classification.

mod rules;
mod tables;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::domain::{EntityKind, NOT_LISTED};
use crate::providers::{self, ChatBackend, Payload, ProviderError};

pub use rules::{classify_rule, has_signature};

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("unknown entity kind `{0}`: no variation types registered")]
    UnknownKind(String),
    #[error("variation `{0}` is not registered for this kind")]
    UnknownVariation(String),
    #[error("duplicate variation id `{0}`")]
    DuplicateId(String),
    #[error("invalid variation `{id}`: {reason}")]
    InvalidEntry { id: String, reason: String },
    #[error("cannot parse taxonomy file: {0}")]
    Parse(String),
    #[error("cannot read taxonomy file: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    General,
    Specific(EntityKind),
}

impl Category {
    pub fn applies_to(&self, kind: &EntityKind) -> bool {
        match self {
            Category::General => true,
            Category::Specific(k) => k == kind,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Category::General => f.write_str("general"),
            Category::Specific(EntityKind::ZipCode) => f.write_str("zip_specific"),
            Category::Specific(EntityKind::DateOfBirth) => f.write_str("dob_specific"),
            Category::Specific(EntityKind::PersonName) => f.write_str("name_specific"),
            Category::Specific(EntityKind::Extension(tag)) => write!(f, "{tag}_specific"),
        }
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "general" => Ok(Category::General),
            "zip_specific" => Ok(Category::Specific(EntityKind::ZipCode)),
            "dob_specific" => Ok(Category::Specific(EntityKind::DateOfBirth)),
            "name_specific" => Ok(Category::Specific(EntityKind::PersonName)),
            other => match other.strip_suffix("_specific") {
                Some(tag) if !tag.is_empty() => Ok(Category::Specific(tag.parse().map_err(|e| format!("{e}"))?)),
                _ => Err(format!("unknown category `{other}`")),
            },
        }
    }
}

impl Serialize for Category {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Category {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariationType {
    pub id: String,
    pub category: Category,
    pub instruction: String,
    pub example: String,
}

impl VariationType {
    /// The spoken part of the example, without any `→ value` annotation.
    pub fn utterance(&self) -> &str {
        self.example.split(" → ").next().unwrap_or(&self.example).trim()
    }

    fn validate(&self) -> Result<(), TaxonomyError> {
        let invalid = |reason: &str| TaxonomyError::InvalidEntry { id: self.id.clone(), reason: reason.to_string() };
        if self.id.is_empty() || !self.id.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_') {
            return Err(invalid("id must be non-empty snake_case"));
        }
        if self.instruction.trim().is_empty() {
            return Err(invalid("instruction is empty"));
        }
        if self.example.trim().is_empty() {
            return Err(invalid("example is empty"));
        }
        if self.id == NOT_LISTED && self.category != Category::General {
            return Err(invalid("the sentinel must be general"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariationRegistry {
    entries: BTreeMap<String, VariationType>,
    order: Vec<String>,
}

#[derive(Deserialize)]
struct TaxonomyFile {
    #[serde(alias = "variations")]
    variation: Vec<VariationType>,
}

impl Default for VariationRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl VariationRegistry {
    /// The built-in tables plus the `not_listed` sentinel.
    pub fn builtin() -> Self {
        let entries = tables::builtin_rows()
            .map(|(category, (id, instruction, example))| VariationType {
                id: id.to_string(),
                category,
                instruction: instruction.to_string(),
                example: example.to_string(),
            })
            .collect();
        Self::from_entries(entries).expect("built-in tables are valid")
    }

    /// Builds a registry from explicit entries; the sentinel is added when absent.
    pub fn from_entries(entries: Vec<VariationType>) -> Result<Self, TaxonomyError> {
        let mut registry = VariationRegistry { entries: BTreeMap::new(), order: Vec::new() };
        for entry in entries {
            registry.insert(entry)?;
        }
        if !registry.entries.contains_key(NOT_LISTED) {
            let (id, instruction, example) = tables::NOT_LISTED_ROW;
            registry.insert(VariationType {
                id: id.to_string(),
                category: Category::General,
                instruction: instruction.to_string(),
                example: example.to_string(),
            })?;
        }
        Ok(registry)
    }

    fn insert(&mut self, entry: VariationType) -> Result<(), TaxonomyError> {
        entry.validate()?;
        if self.entries.contains_key(&entry.id) {
            return Err(TaxonomyError::DuplicateId(entry.id));
        }
        self.order.push(entry.id.clone());
        self.entries.insert(entry.id.clone(), entry);
        Ok(())
    }

    /// Adds every entry of `other` except its sentinel.
    pub fn extend(&mut self, other: VariationRegistry) -> Result<(), TaxonomyError> {
        for id in other.order {
            if id != NOT_LISTED {
                let entry = other.entries[&id].clone();
                self.insert(entry)?;
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, TaxonomyError> {
        let file: TaxonomyFile = toml::from_str(text).map_err(|e| TaxonomyError::Parse(e.to_string()))?;
        Self::from_entries(file.variation)
    }

    pub fn from_json_str(text: &str) -> Result<Self, TaxonomyError> {
        let entries = match serde_json::from_str::<TaxonomyFile>(text) {
            Ok(file) => file.variation,
            Err(_) => {
                serde_json::from_str::<Vec<VariationType>>(text).map_err(|e| TaxonomyError::Parse(e.to_string()))?
            }
        };
        Self::from_entries(entries)
    }

    /// Loads a taxonomy file: `.json` is read as JSON, anything else as TOML with a
    /// JSON fallback.
    pub fn load(path: &Path) -> Result<Self, TaxonomyError> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            return Self::from_json_str(&text);
        }
        Self::from_toml_str(&text).or_else(|toml_err| Self::from_json_str(&text).map_err(|_| toml_err))
    }

    pub fn get(&self, id: &str) -> Option<&VariationType> {
        self.entries.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    /// Number of entries, excluding the sentinel.
    pub fn len(&self) -> usize {
        self.entries.len() - usize::from(self.entries.contains_key(NOT_LISTED))
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries in table order, excluding the sentinel.
    pub fn iter(&self) -> impl Iterator<Item = &VariationType> {
        self.order.iter().filter(|id| id.as_str() != NOT_LISTED).map(move |id| &self.entries[id])
    }

    /// General entries followed by those specific to `kind`, in table order.
    pub fn registry_for(&self, kind: &EntityKind) -> Result<Vec<&VariationType>, TaxonomyError> {
        let specific: Vec<&VariationType> =
            self.iter().filter(|v| v.category == Category::Specific(kind.clone())).collect();
        if specific.is_empty() && !kind.is_builtin() {
            return Err(TaxonomyError::UnknownKind(kind.to_string()));
        }
        let mut out: Vec<&VariationType> = self.iter().filter(|v| v.category == Category::General).collect();
        out.extend(specific);
        Ok(out)
    }

    pub fn ids_for(&self, kind: &EntityKind) -> Result<Vec<String>, TaxonomyError> {
        Ok(self.registry_for(kind)?.into_iter().map(|v| v.id.clone()).collect())
    }

    /// Maps tags outside the registry for `kind` to the sentinel.
    pub fn sanitize_tags<I, S>(&self, kind: &EntityKind, tags: I) -> BTreeSet<String>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out: BTreeSet<String> = tags
            .into_iter()
            .map(|t| {
                let t = t.as_ref().trim();
                match self.get(t) {
                    Some(v) if v.category.applies_to(kind) => t.to_string(),
                    _ => NOT_LISTED.to_string(),
                }
            })
            .collect();
        if out.is_empty() {
            out.insert(NOT_LISTED.to_string());
        }
        out
    }
}

#[derive(Clone, Copy)]
pub enum ClassifyMode<'a> {
    Rule,
    Provider { backend: &'a dyn ChatBackend, registry: &'a VariationRegistry, max_retries: u32 },
}

/// Variation ids present in `transcript`; never empty.
pub fn classify(
    transcript: &str,
    kind: &EntityKind,
    mode: ClassifyMode<'_>,
) -> Result<BTreeSet<String>, TaxonomyError> {
    match mode {
        ClassifyMode::Rule => Ok(classify_rule(transcript, kind)),
        ClassifyMode::Provider { backend, registry, max_retries } => {
            let entries = registry.registry_for(kind)?;
            let mut request = providers::prompts::classification_request(transcript, kind, &entries);
            request.max_retries = max_retries;
            match providers::chat(backend, &request)? {
                Payload::Tags(tags) => Ok(registry.sanitize_tags(kind, tags)),
                other => Err(ProviderError::MalformedOutput {
                    attempts: 1,
                    detail: format!("expected a tag array, got {}", other.shape_name()),
                }
                .into()),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_sizes() {
        let r = VariationRegistry::builtin();
        assert_eq!(r.len(), 59);
        assert_eq!(r.registry_for(&EntityKind::ZipCode).unwrap().len(), 35);
        assert_eq!(r.registry_for(&EntityKind::DateOfBirth).unwrap().len(), 29);
        assert_eq!(r.registry_for(&EntityKind::PersonName).unwrap().len(), 29);
        assert!(r.contains(NOT_LISTED));
        assert_eq!(r.get(NOT_LISTED).unwrap().category, Category::General);
    }

    #[test]
    fn registry_for_order_and_uniqueness() {
        let r = VariationRegistry::builtin();
        let ids = r.ids_for(&EntityKind::ZipCode).unwrap();
        assert_eq!(ids[0], "filler_words");
        assert_eq!(ids[17], "digit_by_digit");
        let unique: BTreeSet<&String> = ids.iter().collect();
        assert_eq!(unique.len(), ids.len());
        assert!(matches!(
            r.registry_for(&EntityKind::Extension("currency".into())),
            Err(TaxonomyError::UnknownKind(_))
        ));
    }

    #[test]
    fn utterance_strips_value() {
        let r = VariationRegistry::builtin();
        assert_eq!(r.get("date_as_4_digits").unwrap().utterance(), "1267");
        assert_eq!(r.get("nickname").unwrap().utterance(), "Johnny");
        assert_eq!(r.get("digit_by_digit").unwrap().utterance(), "one two three four five");
    }

    #[test]
    fn loads_extension_taxonomy() {
        let toml = r#"
            [[variation]]
            id = "with_cents"
            category = "currency_specific"
            instruction = "Mention cents."
            example = "five dollars and ten cents"
        "#;
        let ext = VariationRegistry::from_toml_str(toml).unwrap();
        let mut r = VariationRegistry::builtin();
        r.extend(ext).unwrap();
        let kind = EntityKind::Extension("currency".into());
        assert_eq!(r.registry_for(&kind).unwrap().len(), 18);
        let json = r#"[{"id":"a","category":"general","instruction":"x","example":"y"}]"#;
        assert_eq!(VariationRegistry::from_json_str(json).unwrap().len(), 1);
        let dup = r#"[{"id":"a","category":"general","instruction":"x","example":"y"},
                      {"id":"a","category":"general","instruction":"x","example":"y"}]"#;
        assert!(matches!(VariationRegistry::from_json_str(dup), Err(TaxonomyError::DuplicateId(_))));
    }

    #[test]
    fn sanitize_maps_unknown_tags() {
        let r = VariationRegistry::builtin();
        let kind = EntityKind::ZipCode;
        let tags = r.sanitize_tags(&kind, ["sarcastic"]);
        assert_eq!(tags, BTreeSet::from([NOT_LISTED.to_string()]));
        let tags = r.sanitize_tags(&kind, ["digit_by_digit", "nickname"]);
        assert_eq!(tags, BTreeSet::from(["digit_by_digit".to_string(), NOT_LISTED.to_string()]));
    }
}
