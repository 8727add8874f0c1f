//! Reference extractor for spoken-style answers.
//!
//! Text is tokenized, self-corrections and repeated runs are resolved, and the
//! remaining tokens are decoded per entity kind. Extraction never fails loudly:
//! `None` means nothing recoverable was found.

pub mod dates;
pub mod lexicon;
pub mod names;
pub mod numbers;
pub mod tokens;

pub use numbers::{number_runs, NumberRun};
pub use tokens::{resolve_corrections, tokenize, Token, TokenClass, TokenStream};

use crate::domain::{format_date, EntityKind, EntityValue, FieldSpec};

/// Digits spoken in `text`, after correction and repetition resolution. Empty when
/// no digits are present.
pub fn parse_number_words(text: &str) -> String {
    let stream = resolve_corrections(&tokenize(text));
    number_runs(&stream.tokens).iter().map(NumberRun::digits).collect()
}

/// Recovers the value `spec` asks for from `text`.
pub fn extract(spec: &FieldSpec, text: &str) -> Option<EntityValue> {
    extract_kind(&spec.kind, text)
}

pub fn extract_kind(kind: &EntityKind, text: &str) -> Option<EntityValue> {
    let stream = resolve_corrections(&tokenize(text));
    let tokens = &stream.tokens;
    match kind {
        EntityKind::ZipCode => {
            let run = number_runs(tokens).into_iter().find(|r| r.digits().len() == 5)?;
            let mut digits = run.digits();
            let cued = tokens.iter().any(|t| lexicon::REVERSAL_CUES.contains(&t.lower().as_str()));
            if cued || is_descending_run(&digits) {
                digits = digits.chars().rev().collect();
            }
            Some(EntityValue { kind: kind.clone(), canonical: digits.clone(), raw: digits })
        }
        EntityKind::DateOfBirth => {
            let date = dates::extract_date(tokens)?;
            let canonical = format_date(date);
            Some(EntityValue { kind: kind.clone(), raw: canonical.clone(), canonical })
        }
        EntityKind::PersonName => {
            let found = names::extract_name(tokens)?;
            Some(EntityValue { kind: kind.clone(), canonical: found.first, raw: found.spoken })
        }
        EntityKind::Extension(_) => None,
    }
}

/// "54321", "98765": a countdown is read as a reversed ascending run.
pub fn is_descending_run(digits: &str) -> bool {
    let b = digits.as_bytes();
    b.len() >= 2 && b.windows(2).all(|w| w[0] == w[1] + 1)
}
