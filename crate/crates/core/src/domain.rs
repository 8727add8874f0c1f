//! Core data model: entity kinds, field specs, canonical values and labeled samples.
//!
//! Canonical formats:
//! - ZIP code: exactly five ASCII digits (a `-NNNN` add-on is dropped).
//! - Date of birth: `MM-DD-YYYY`, zero padded, US month-first order.
//! - Person name: the first-name token, title-cased, with titles and lead-ins removed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("cannot coerce {raw:?} to the canonical {kind} format")]
    Format { kind: EntityKind, raw: String },
    #[error("unknown entity kind `{0}` (no canonical format registered)")]
    UnknownKind(String),
    #[error("invalid field spec: {0}")]
    InvalidSpec(String),
    #[error("invalid transcript: {0}")]
    InvalidTranscript(String),
}

impl DomainError {
    fn format(kind: &EntityKind, raw: &str) -> Self {
        DomainError::Format { kind: kind.clone(), raw: raw.to_string() }
    }
}

/// The type of structured value a field carries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityKind {
    ZipCode,
    DateOfBirth,
    PersonName,
    /// A kind outside the built-in three. Needs [`KindRules`] registered in a
    /// [`Canonicalizer`] before values of this kind can be canonicalized.
    Extension(String),
}

impl EntityKind {
    pub const BUILTIN: [EntityKind; 3] = [EntityKind::ZipCode, EntityKind::DateOfBirth, EntityKind::PersonName];

    pub fn as_str(&self) -> &str {
        match self {
            EntityKind::ZipCode => "zip_code",
            EntityKind::DateOfBirth => "date_of_birth",
            EntityKind::PersonName => "person_name",
            EntityKind::Extension(tag) => tag,
        }
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self, EntityKind::Extension(_))
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityKind {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tag = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Ok(match tag.as_str() {
            "zip_code" | "zip" | "zipcode" => EntityKind::ZipCode,
            "date_of_birth" | "dob" => EntityKind::DateOfBirth,
            "person_name" | "name" | "first_name" => EntityKind::PersonName,
            "" => return Err(DomainError::UnknownKind(s.to_string())),
            _ => EntityKind::Extension(tag),
        })
    }
}

impl Serialize for EntityKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for EntityKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Description of one structured field an agent asks for on a call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub field_name: String,
    pub kind: EntityKind,
    pub output_type: String,
    pub question: String,
    pub description: String,
}

impl FieldSpec {
    pub fn new(
        field_name: impl Into<String>,
        kind: EntityKind,
        output_type: impl Into<String>,
        question: impl Into<String>,
        description: impl Into<String>,
    ) -> Result<Self, DomainError> {
        let spec = FieldSpec {
            field_name: field_name.into(),
            kind,
            output_type: output_type.into(),
            question: question.into(),
            description: description.into(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.field_name.trim().is_empty() {
            return Err(DomainError::InvalidSpec("field_name is empty".into()));
        }
        if self.description.trim().is_empty() {
            return Err(DomainError::InvalidSpec("description is empty".into()));
        }
        if self.question.trim().is_empty() {
            return Err(DomainError::InvalidSpec("question is empty".into()));
        }
        Ok(())
    }

    pub fn zip_code() -> Self {
        FieldSpec {
            field_name: "ZIP code".into(),
            kind: EntityKind::ZipCode,
            output_type: "integer".into(),
            question: "What is your zip code?".into(),
            description: "Zip code is a 5 digit number, with optional 4 digit add on code".into(),
        }
    }

    pub fn date_of_birth() -> Self {
        FieldSpec {
            field_name: "Date of birth".into(),
            kind: EntityKind::DateOfBirth,
            output_type: "date".into(),
            question: "Could you please confirm your date of birth?".into(),
            description: "Date of birth in MM-DD-YYYY format; a past calendar date".into(),
        }
    }

    pub fn person_name() -> Self {
        FieldSpec {
            field_name: "Name".into(),
            kind: EntityKind::PersonName,
            output_type: "string".into(),
            question: "Could you tell me your name please?".into(),
            description: "The caller's first name".into(),
        }
    }

    /// Default spec for a built-in kind; `None` for extensions.
    pub fn builtin(kind: &EntityKind) -> Option<Self> {
        match kind {
            EntityKind::ZipCode => Some(Self::zip_code()),
            EntityKind::DateOfBirth => Some(Self::date_of_birth()),
            EntityKind::PersonName => Some(Self::person_name()),
            EntityKind::Extension(_) => None,
        }
    }
}

/// An entity value: the canonical rendering plus the raw form it came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntityValue {
    pub kind: EntityKind,
    pub canonical: String,
    pub raw: String,
}

impl EntityValue {
    pub fn parse(kind: EntityKind, raw: &str) -> Result<Self, DomainError> {
        let canonical = canonicalize(&kind, raw)?;
        Ok(EntityValue { kind, canonical, raw: raw.to_string() })
    }

    /// A value whose raw form is already canonical.
    pub fn canonical(kind: EntityKind, canonical: &str) -> Result<Self, DomainError> {
        Self::parse(kind, canonical)
    }

    /// Date view of a DOB value.
    pub fn date(&self) -> Option<NaiveDate> {
        match self.kind {
            EntityKind::DateOfBirth => NaiveDate::parse_from_str(&self.canonical, "%m-%d-%Y").ok(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    LlmGenerated,
    RuleRendered,
    Real,
}

impl Provenance {
    pub fn is_synthetic(self) -> bool {
        !matches!(self, Provenance::Real)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Valid,
    Test,
    Unassigned,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
            Split::Unassigned => "unassigned",
        })
    }
}

/// Sentinel tag for transcripts whose variation matches no registered type.
pub const NOT_LISTED: &str = "not_listed";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub text: String,
    pub variation_tags: BTreeSet<String>,
    pub value: EntityValue,
    pub provenance: Provenance,
}

impl Transcript {
    pub fn new(
        text: impl Into<String>,
        variation_tags: BTreeSet<String>,
        value: EntityValue,
        provenance: Provenance,
    ) -> Result<Self, DomainError> {
        let transcript = Transcript { text: text.into(), variation_tags, value, provenance };
        transcript.validate()?;
        Ok(transcript)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.text.trim().is_empty() {
            return Err(DomainError::InvalidTranscript("text is empty".into()));
        }
        if self.provenance.is_synthetic() && self.variation_tags.is_empty() {
            return Err(DomainError::InvalidTranscript("synthetic transcript carries no variation tags".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSample {
    pub transcript: Transcript,
    pub validated: bool,
    pub split: Split,
}

impl LabeledSample {
    pub fn text(&self) -> &str {
        &self.transcript.text
    }

    pub fn value(&self) -> &EntityValue {
        &self.transcript.value
    }

    pub fn tags(&self) -> &BTreeSet<String> {
        &self.transcript.variation_tags
    }

    /// One JSONL line, without the trailing newline.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("sample serialization is infallible")
    }

    pub fn from_json_line(line: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(line)
    }
}

// Wire layout of a sample; field order here is the byte order on disk.
#[derive(Serialize)]
struct SampleRecordRef<'a> {
    text: &'a str,
    value: &'a EntityValue,
    variation_tags: &'a BTreeSet<String>,
    validated: bool,
    split: Split,
    provenance: Provenance,
}

#[derive(Deserialize)]
struct SampleRecord {
    text: String,
    value: EntityValue,
    #[serde(default)]
    variation_tags: BTreeSet<String>,
    #[serde(default)]
    validated: bool,
    #[serde(default = "unassigned")]
    split: Split,
    #[serde(default = "real")]
    provenance: Provenance,
}

fn unassigned() -> Split {
    Split::Unassigned
}

fn real() -> Provenance {
    Provenance::Real
}

impl Serialize for LabeledSample {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SampleRecordRef {
            text: &self.transcript.text,
            value: &self.transcript.value,
            variation_tags: &self.transcript.variation_tags,
            validated: self.validated,
            split: self.split,
            provenance: self.transcript.provenance,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LabeledSample {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let record = SampleRecord::deserialize(deserializer)?;
        let transcript = Transcript {
            text: record.text,
            variation_tags: record.variation_tags,
            value: record.value,
            provenance: record.provenance,
        };
        transcript.validate().map_err(serde::de::Error::custom)?;
        Ok(LabeledSample { transcript, validated: record.validated, split: record.split })
    }
}

/// Reads JSONL samples, skipping blank lines. Errors carry the 1-based line number.
pub fn read_samples_jsonl(input: &str) -> Result<Vec<LabeledSample>, (usize, serde_json::Error)> {
    input
        .lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| LabeledSample::from_json_line(line).map_err(|e| (i + 1, e)))
        .collect()
}

pub fn write_samples_jsonl(samples: &[LabeledSample]) -> String {
    let mut out = String::new();
    for sample in samples {
        out.push_str(&sample.to_json_line());
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Canonicalization
// ---------------------------------------------------------------------------

/// Canonical rendering of `raw` for `kind`.
pub fn canonicalize(kind: &EntityKind, raw: &str) -> Result<String, DomainError> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(DomainError::format(kind, raw));
    }
    match kind {
        EntityKind::ZipCode => canonical_zip(trimmed).ok_or_else(|| DomainError::format(kind, raw)),
        EntityKind::DateOfBirth => {
            canonical_date(trimmed).map(format_date).ok_or_else(|| DomainError::format(kind, raw))
        }
        EntityKind::PersonName => canonical_name(trimmed).ok_or_else(|| DomainError::format(kind, raw)),
        EntityKind::Extension(tag) => Err(DomainError::UnknownKind(tag.clone())),
    }
}

/// Whether `a` and `b` denote the same value of `kind`. Symmetric; comparison is
/// on canonical forms after case folding.
pub fn values_equivalent(kind: &EntityKind, a: &str, b: &str) -> Result<bool, DomainError> {
    let a = canonicalize(kind, a)?;
    let b = canonicalize(kind, b)?;
    Ok(fold(&a) == fold(&b))
}

/// Like [`values_equivalent`], but treats an unparseable side as "not equal".
pub fn loosely_equivalent(kind: &EntityKind, a: &str, b: &str) -> bool {
    values_equivalent(kind, a, b).unwrap_or(false)
}

fn fold(s: &str) -> String {
    s.trim().to_lowercase()
}

fn canonical_zip(raw: &str) -> Option<String> {
    let bytes = raw.as_bytes();
    let all_digits = |s: &[u8]| s.iter().all(u8::is_ascii_digit);
    match bytes.len() {
        5 if all_digits(bytes) => Some(raw.to_string()),
        10 if all_digits(&bytes[..5]) && bytes[5] == b'-' && all_digits(&bytes[6..]) => Some(raw[..5].to_string()),
        _ => None,
    }
}

pub(crate) fn format_date(date: NaiveDate) -> String {
    format!("{:02}-{:02}-{:04}", date.month(), date.day(), date.year())
}

/// Two-digit years at or above this value belong to the 1900s; below it, the 2000s.
pub fn century_pivot() -> u32 {
    let now = chrono::Local::now().year().rem_euclid(100) as u32;
    now + 1
}

pub fn expand_two_digit_year(yy: u32) -> i32 {
    debug_assert!(yy < 100);
    if yy >= century_pivot() {
        1900 + yy as i32
    } else {
        2000 + yy as i32
    }
}

fn ymd(year: i32, month: u32, day: u32) -> Option<NaiveDate> {
    NaiveDate::from_ymd_opt(year, month, day)
}

fn num(s: &str) -> u32 {
    s.parse().expect("caller guarantees ASCII digits")
}

/// Decodes a continuous digit date: 8 = MMDDYYYY, 6 = MMDDYY, 5 = M-DD-YY
/// (falling back to MM-D-YY), 4 = M-D-YY. Two-digit years use [`century_pivot`].
pub fn decode_compact_date(digits: &str) -> Option<NaiveDate> {
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let d = digits;
    match d.len() {
        8 => ymd(num(&d[4..]) as i32, num(&d[..2]), num(&d[2..4])),
        6 => ymd(expand_two_digit_year(num(&d[4..])), num(&d[..2]), num(&d[2..4])),
        5 => {
            let year = expand_two_digit_year(num(&d[3..]));
            ymd(year, num(&d[..1]), num(&d[1..3])).or_else(|| ymd(year, num(&d[..2]), num(&d[2..3])))
        }
        4 => ymd(expand_two_digit_year(num(&d[2..])), num(&d[..1]), num(&d[1..2])),
        _ => None,
    }
}

fn canonical_date(raw: &str) -> Option<NaiveDate> {
    if raw.bytes().all(|b| b.is_ascii_digit()) {
        return decode_compact_date(raw);
    }
    let parts: Vec<&str> = raw.split(['-', '/', '.']).map(str::trim).collect();
    if parts.len() != 3 || parts.iter().any(|p| p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit())) {
        return None;
    }
    if parts[0].len() == 4 {
        // ISO year-month-day
        if parts[1].len() > 2 || parts[2].len() > 2 {
            return None;
        }
        return ymd(num(parts[0]) as i32, num(parts[1]), num(parts[2]));
    }
    if parts[0].len() > 2 || parts[1].len() > 2 {
        return None;
    }
    let year = match parts[2].len() {
        4 => num(parts[2]) as i32,
        2 => expand_two_digit_year(num(parts[2])),
        _ => return None,
    };
    ymd(year, num(parts[0]), num(parts[1]))
}

const NAME_LEAD_INS: &[&str] = &[
    "my name is",
    "my first name is",
    "the name is",
    "name is",
    "name's",
    "this is",
    "it's",
    "it is",
    "i'm",
    "i am",
    "call me",
];

pub(crate) const NAME_TITLES: &[&str] =
    &["mr", "mrs", "ms", "miss", "mx", "dr", "prof", "professor", "sir", "madam", "rev"];

fn canonical_name(raw: &str) -> Option<String> {
    let mut text = raw.trim().to_string();
    let lower = text.to_lowercase();
    if let Some(lead) =
        NAME_LEAD_INS.iter().find(|lead| lower.starts_with(*lead) && lower[lead.len()..].starts_with(' '))
    {
        text = text[lead.len()..].trim().to_string();
    }
    // "Smith, John" lists the surname first.
    if let Some((_, after)) = text.split_once(',') {
        if !after.trim().is_empty() {
            text = after.trim().to_string();
        }
    }
    let token = text
        .split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphabetic()))
        .find(|t| !t.is_empty() && !NAME_TITLES.contains(&t.to_lowercase().as_str()))?;
    if !token.chars().all(|c| c.is_alphabetic() || c == '\'' || c == '-') {
        return None;
    }
    Some(title_case(token))
}

/// `o'connor` → `O'Connor`, `mary-jane` → `Mary-Jane`, `JOHN` → `John`.
pub fn title_case(word: &str) -> String {
    let mut out = String::with_capacity(word.len());
    let mut upper_next = true;
    let mut segment_len = 0usize;
    for c in word.chars() {
        // multi-char expansions (ß → SS) keep only their head upper; mappings that
        // introduce combining marks (İ → i̇) leave the letter unchanged
        let mapped: Vec<char> = if upper_next {
            let mut up = c.to_uppercase();
            up.next().into_iter().chain(up.flat_map(char::to_lowercase)).collect()
        } else {
            c.to_lowercase().collect()
        };
        if mapped.iter().all(|m| m.is_alphabetic() || !c.is_alphabetic()) {
            out.extend(mapped);
        } else {
            out.push(c);
        }
        match c {
            '-' => {
                upper_next = true;
                segment_len = 0;
            }
            '\'' => {
                upper_next = segment_len == 1;
                segment_len = 0;
            }
            _ => {
                upper_next = false;
                segment_len += 1;
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Extension kinds
// ---------------------------------------------------------------------------

/// Canonical format and equivalence rule for an extension kind.
pub trait KindRules: Send + Sync {
    fn canonicalize(&self, raw: &str) -> Option<String>;

    fn equivalent(&self, a: &str, b: &str) -> bool {
        a == b
    }
}

/// Canonicalization over built-in kinds plus registered extension kinds.
#[derive(Clone, Default)]
pub struct Canonicalizer {
    extensions: BTreeMap<String, Arc<dyn KindRules>>,
}

impl Canonicalizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, tag: impl Into<String>, rules: Arc<dyn KindRules>) -> &mut Self {
        self.extensions.insert(tag.into(), rules);
        self
    }

    pub fn is_registered(&self, kind: &EntityKind) -> bool {
        match kind {
            EntityKind::Extension(tag) => self.extensions.contains_key(tag),
            _ => true,
        }
    }

    pub fn canonicalize(&self, kind: &EntityKind, raw: &str) -> Result<String, DomainError> {
        match kind {
            EntityKind::Extension(tag) => {
                let rules = self.extensions.get(tag).ok_or_else(|| DomainError::UnknownKind(tag.clone()))?;
                rules.canonicalize(raw.trim()).ok_or_else(|| DomainError::format(kind, raw))
            }
            builtin => canonicalize(builtin, raw),
        }
    }

    pub fn equivalent(&self, kind: &EntityKind, a: &str, b: &str) -> Result<bool, DomainError> {
        match kind {
            EntityKind::Extension(tag) => {
                let a = self.canonicalize(kind, a)?;
                let b = self.canonicalize(kind, b)?;
                Ok(self.extensions[tag].equivalent(&a, &b))
            }
            builtin => values_equivalent(builtin, a, b),
        }
    }
}

impl fmt::Debug for Canonicalizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Canonicalizer").field("extensions", &self.extensions.keys().collect::<Vec<_>>()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_examples() {
        assert_eq!(canonicalize(&EntityKind::ZipCode, "12345").unwrap(), "12345");
        assert_eq!(canonicalize(&EntityKind::DateOfBirth, "12021947").unwrap(), "12-02-1947");
        assert_eq!(canonicalize(&EntityKind::PersonName, "Mr. John Smith").unwrap(), "John");
    }

    #[test]
    fn zip_plus_four_keeps_base() {
        assert_eq!(canonicalize(&EntityKind::ZipCode, "90210-1234").unwrap(), "90210");
        assert!(canonicalize(&EntityKind::ZipCode, "1234").is_err());
        assert!(canonicalize(&EntityKind::ZipCode, "123456").is_err());
        assert!(canonicalize(&EntityKind::ZipCode, "902101234").is_err());
    }

    #[test]
    fn format_error_reports_kind_and_raw() {
        let err = canonicalize(&EntityKind::ZipCode, "12a45").unwrap_err();
        assert_eq!(err, DomainError::Format { kind: EntityKind::ZipCode, raw: "12a45".into() });
        assert!(err.to_string().contains("zip_code"));
    }

    #[test]
    fn dob_written_forms() {
        let dob = EntityKind::DateOfBirth;
        assert_eq!(canonicalize(&dob, "1/5/1989").unwrap(), "01-05-1989");
        assert_eq!(canonicalize(&dob, "1989-01-05").unwrap(), "01-05-1989");
        assert_eq!(canonicalize(&dob, "12/02/85").unwrap(), "12-02-1985");
        assert!(canonicalize(&dob, "13-01-1990").is_err());
        assert!(canonicalize(&dob, "02-30-1990").is_err());
        assert!(canonicalize(&dob, "1234567").is_err());
    }

    #[test]
    fn dob_continuous_forms_follow_table() {
        let dob = EntityKind::DateOfBirth;
        for (raw, want) in [
            ("1267", "01-02-1967"),
            ("32584", "03-25-1984"),
            ("51782", "05-17-1982"),
            ("120285", "12-02-1985"),
            ("12021947", "12-02-1947"),
            ("1589", "01-05-1989"),
        ] {
            assert_eq!(canonicalize(&dob, raw).unwrap(), want, "{raw}");
        }
    }

    #[test]
    fn dob_equivalence_examples() {
        let dob = EntityKind::DateOfBirth;
        assert!(values_equivalent(&dob, "01-15-2024", "01152024").unwrap());
        assert!(values_equivalent(&dob, "01-15-2024", "11524").unwrap());
        assert!(!values_equivalent(&dob, "01-15-2024", "01-16-2024").unwrap());
    }

    #[test]
    fn five_digit_prefers_single_digit_month() {
        // 1-05-85 and 10-5-85 are both valid; the single-digit month reading wins.
        assert_eq!(decode_compact_date("10585").map(format_date).unwrap(), "01-05-1985");
        // 1-35-85 is invalid, so the two-digit month reading applies.
        assert_eq!(decode_compact_date("13585"), None);
        assert_eq!(decode_compact_date("12585").map(format_date).unwrap(), "01-25-1985");
        assert_eq!(decode_compact_date("11385").map(format_date).unwrap(), "01-13-1985");
        assert_eq!(decode_compact_date("10985").map(format_date).unwrap(), "01-09-1985");
        assert_eq!(decode_compact_date("12085").map(format_date).unwrap(), "01-20-1985");
        assert_eq!(decode_compact_date("11085").map(format_date).unwrap(), "01-10-1985");
        assert_eq!(decode_compact_date("10085"), None);
    }

    #[test]
    fn names() {
        let name = EntityKind::PersonName;
        for (raw, want) in [
            ("john", "John"),
            ("Smith, John", "John"),
            ("O'Connor, John", "John"),
            ("My name is John Smith", "John"),
            ("Dr. mary-jane Watson", "Mary-Jane"),
            ("o'neil", "O'Neil"),
        ] {
            assert_eq!(canonicalize(&name, raw).unwrap(), want, "{raw}");
        }
        assert!(canonicalize(&name, "12345").is_err());
        assert!(values_equivalent(&name, "JOHN", "john").unwrap());
    }

    #[test]
    fn extension_kinds_need_rules() {
        struct Upper;
        impl KindRules for Upper {
            fn canonicalize(&self, raw: &str) -> Option<String> {
                Some(raw.to_uppercase())
            }
        }
        let kind: EntityKind = "currency".parse().unwrap();
        assert!(matches!(canonicalize(&kind, "usd"), Err(DomainError::UnknownKind(_))));
        let mut canon = Canonicalizer::new();
        assert!(!canon.is_registered(&kind));
        canon.register("currency", Arc::new(Upper));
        assert_eq!(canon.canonicalize(&kind, "usd").unwrap(), "USD");
        assert!(canon.equivalent(&kind, "usd", "USD").unwrap());
    }

    #[test]
    fn sample_jsonl_field_order_is_fixed() {
        let value = EntityValue::parse(EntityKind::ZipCode, "12345").unwrap();
        let sample = LabeledSample {
            transcript: Transcript::new(
                "one two three four five",
                BTreeSet::from(["digit_by_digit".to_string()]),
                value,
                Provenance::RuleRendered,
            )
            .unwrap(),
            validated: true,
            split: Split::Train,
        };
        let line = sample.to_json_line();
        assert_eq!(
            line,
            r#"{"text":"one two three four five","value":{"kind":"zip_code","canonical":"12345","raw":"12345"},"variation_tags":["digit_by_digit"],"validated":true,"split":"train","provenance":"rule_rendered"}"#
        );
        assert_eq!(LabeledSample::from_json_line(&line).unwrap(), sample);
    }

    #[test]
    fn synthetic_transcripts_need_tags() {
        let value = EntityValue::parse(EntityKind::ZipCode, "12345").unwrap();
        assert!(Transcript::new("x", BTreeSet::new(), value.clone(), Provenance::LlmGenerated).is_err());
        assert!(Transcript::new("x", BTreeSet::new(), value.clone(), Provenance::Real).is_ok());
        assert!(Transcript::new("  ", BTreeSet::new(), value, Provenance::Real).is_err());
    }

    #[test]
    fn field_spec_invariants() {
        assert!(FieldSpec::new("", EntityKind::ZipCode, "integer", "q", "d").is_err());
        assert!(FieldSpec::new("zip", EntityKind::ZipCode, "integer", "q", " ").is_err());
        assert!(FieldSpec::new("zip", EntityKind::ZipCode, "integer", "", "d").is_err());
        for kind in EntityKind::BUILTIN {
            FieldSpec::builtin(&kind).unwrap().validate().unwrap();
        }
    }

    fn any_kind() -> impl Strategy<Value = EntityKind> {
        prop_oneof![Just(EntityKind::ZipCode), Just(EntityKind::DateOfBirth), Just(EntityKind::PersonName)]
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(kind in any_kind(), raw in "[ -~]{0,16}") {
            if let Ok(once) = canonicalize(&kind, &raw) {
                prop_assert_eq!(canonicalize(&kind, &once).unwrap(), once);
            }
        }

        #[test]
        fn name_canonicalize_is_idempotent_on_unicode(raw in "\\PC{0,12}") {
            let kind = EntityKind::PersonName;
            if let Ok(once) = canonicalize(&kind, &raw) {
                prop_assert_eq!(canonicalize(&kind, &once).unwrap(), once);
            }
        }

        #[test]
        fn canonicalize_idempotent_on_digit_strings(raw in "[0-9]{4,8}") {
            let kind = EntityKind::DateOfBirth;
            if let Ok(once) = canonicalize(&kind, &raw) {
                prop_assert_eq!(canonicalize(&kind, &once).unwrap(), once);
            }
        }

        #[test]
        fn equivalence_reflexive_and_symmetric(kind in any_kind(), a in "[0-9a-zA-Z ,.-]{1,12}", b in "[0-9a-zA-Z ,.-]{1,12}") {
            if canonicalize(&kind, &a).is_ok() {
                prop_assert!(values_equivalent(&kind, &a, &a).unwrap());
            }
            prop_assert_eq!(values_equivalent(&kind, &a, &b).ok(), values_equivalent(&kind, &b, &a).ok());
        }
    }
}
