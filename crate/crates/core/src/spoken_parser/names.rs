//! First-name recovery.

use super::lexicon;
use super::tokens::{is_spelled, Token, TokenClass};
use crate::domain::title_case;

/// A recovered name: the canonical first name and the name as spoken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameMatch {
    pub first: String,
    pub spoken: String,
}

fn bare(surface: &str) -> String {
    surface.trim_end_matches('.').to_lowercase()
}

pub fn is_title(token: &Token) -> bool {
    lexicon::TITLE_WORDS.contains(&bare(&token.surface).as_str())
}

pub fn is_suffix(token: &Token) -> bool {
    let b = bare(&token.surface);
    lexicon::NAME_SUFFIXES.iter().any(|s| s.eq_ignore_ascii_case(&b))
}

pub fn is_initial(token: &Token) -> bool {
    let mut chars = token.surface.chars();
    matches!((chars.next(), chars.next(), chars.next()), (Some(c), Some('.'), None) if c.is_alphabetic())
}

pub(crate) fn is_candidate(token: &Token) -> bool {
    token.class == TokenClass::NameToken
        && !is_title(token)
        && !is_suffix(token)
        && !is_initial(token)
        && token.surface.chars().any(char::is_alphabetic)
        && token.surface.chars().all(|c| c.is_alphabetic() || c == '\'' || c == '-')
}

fn finish(word: &str) -> String {
    match lexicon::formal_name(word) {
        Some(formal) => formal.to_string(),
        None => title_case(word),
    }
}

fn spoken_from(tokens: &[Token], i: usize) -> String {
    tokens[i..].iter().take_while(|t| is_candidate(t)).map(|t| t.surface.as_str()).collect::<Vec<_>>().join(" ")
}

pub fn extract_name(tokens: &[Token]) -> Option<NameMatch> {
    // "John, that's J-O-H-N Smith": a spelling run is authoritative.
    if let Some(t) = tokens.iter().find(|t| t.class == TokenClass::NameToken && is_spelled(&t.surface)) {
        let word: String = t.surface.split('-').collect();
        return Some(NameMatch { first: finish(&word), spoken: t.surface.clone() });
    }
    let first_idx = tokens.iter().position(is_candidate);
    if let Some(i) = first_idx {
        // "Smith, John": surname first.
        if let (Some(comma), Some(next)) = (tokens.get(i + 1), tokens.get(i + 2)) {
            if comma.is_comma() && is_candidate(next) {
                return Some(NameMatch {
                    first: finish(&next.surface),
                    spoken: format!("{}, {}", tokens[i].surface, spoken_from(tokens, i + 2)),
                });
            }
        }
        return Some(NameMatch { first: finish(&tokens[i].surface), spoken: spoken_from(tokens, i) });
    }
    // Nothing capitalized: take a plain word opening the answer or following a lead-in.
    tokens.iter().enumerate().find_map(|(i, t)| {
        let opens = i == 0 || LEAD_INS.contains(&tokens[i - 1].lower().as_str());
        let plain = t.class == TokenClass::Other
            && t.surface.chars().all(|c| c.is_alphabetic() || c == '\'' || c == '-')
            && t.surface.chars().any(char::is_alphabetic)
            && !lexicon::NAME_STOPWORDS.contains(&t.lower().as_str())
            && !lexicon::TITLE_WORDS.contains(&bare(&t.surface).as_str());
        (opens && plain).then(|| NameMatch { first: finish(&t.surface), spoken: t.surface.clone() })
    })
}

const LEAD_INS: &[&str] = &["is", "am", "i'm", "it's", "me", "this", "name's"];

#[cfg(test)]
mod tests {
    use super::super::tokens::{resolve_corrections, tokenize};
    use super::*;

    fn name(text: &str) -> Option<String> {
        let ts = resolve_corrections(&tokenize(text));
        extract_name(&ts.tokens).map(|m| m.first)
    }

    #[test]
    fn table_examples() {
        for text in [
            "John Smith",
            "My name is John Smith",
            "Smith, John",
            "Mr. John Smith",
            "John Michael Smith",
            "John Smith Jr.",
            "James—no, I mean John Smith",
            "John, that’s J-O-H-N Smith",
            "O'Connor, John",
            "John Smith-Jones",
            "Johnny",
            "It is John.",
        ] {
            assert_eq!(name(text).as_deref(), Some("John"), "{text}");
        }
    }

    #[test]
    fn fallbacks() {
        assert_eq!(name("my name is john smith").as_deref(), Some("John"));
        assert_eq!(name("JohnSmith").as_deref(), Some("John"));
        assert_eq!(name("yes, Dr. Katie Lee").as_deref(), Some("Katherine"));
        assert_eq!(name("J. M. Smith").as_deref(), Some("Smith"));
        assert_eq!(name("I don't know"), None);
        assert_eq!(name("12345"), None);
    }

    #[test]
    fn spoken_form_keeps_surname() {
        let ts = tokenize("Smith, John");
        assert_eq!(extract_name(&ts.tokens).unwrap().spoken, "Smith, John");
        let ts = tokenize("my name is John Michael Smith");
        assert_eq!(extract_name(&ts.tokens).unwrap().spoken, "John Michael Smith");
    }
}
