//! Deterministic signatures for rule-mode classification.

use std::collections::BTreeSet;
use std::sync::{LazyLock, OnceLock};

use regex::Regex;

use crate::domain::{EntityKind, NOT_LISTED};
use crate::spoken_parser::lexicon;
use crate::spoken_parser::names::{is_candidate, is_suffix, is_title};
use crate::spoken_parser::numbers::{number_runs, Group};
use crate::spoken_parser::tokens::{
    resolve_corrections, segment_key, split_camel_case, split_run_on_numbers, tokenize, Token, TokenClass,
};

use super::tables;

macro_rules! regex {
    ($pat:expr) => {{
        static RE: OnceLock<Regex> = OnceLock::new();
        RE.get_or_init(|| Regex::new($pat).expect("valid pattern"))
    }};
}

/// The residual tag: assigned only when nothing else matched and the answer is a
/// bare verbalization of the value.
const RESIDUAL: &str = "direct_and_simple";

struct Features {
    text: String,
    lower: String,
    tokens: Vec<Token>,
    resolved: Vec<Token>,
}

impl Features {
    fn new(text: &str) -> Self {
        let text = text.replace(['\u{2019}', '\u{2018}'], "'").replace('\u{2026}', "...");
        let tokens = tokenize(&text).tokens;
        let resolved = resolve_corrections(&tokenize(&text)).tokens;
        Features { lower: text.to_lowercase(), text, tokens, resolved }
    }
}

fn spoken_digit(t: &Token) -> bool {
    t.class == TokenClass::DigitWord && !t.surface.bytes().all(|b| b.is_ascii_digit())
}

fn written_digits(t: &Token) -> bool {
    t.class == TokenClass::DigitWord && t.surface.bytes().all(|b| b.is_ascii_digit())
}

/// Spoken digits plus number words such as "twelve" or "hundred".
fn number_word(t: &Token) -> bool {
    spoken_digit(t) || t.class == TokenClass::NumberWord
}

fn is_ellipsis(t: &Token) -> bool {
    t.class == TokenClass::Punct && t.surface == "..."
}

fn digit_value(t: &Token) -> Option<u32> {
    spoken_digit(t).then(|| lexicon::digit_value(&t.lower())).flatten()
}

/// Longest streak of spoken digits written with plain spaces between them.
fn plain_digit_streak(tokens: &[Token]) -> usize {
    let mut best = 0;
    let mut cur = 0;
    for t in tokens {
        if spoken_digit(t) && !(t.joined && cur > 0) {
            cur += 1;
        } else if spoken_digit(t) {
            cur = 1;
        } else {
            cur = 0;
        }
        best = best.max(cur);
    }
    best
}

/// Tokens without fillers and non-stop punctuation.
fn loose(tokens: &[Token]) -> Vec<Token> {
    tokens
        .iter()
        .filter(|t| !(t.class == TokenClass::Filler || (t.class == TokenClass::Punct && !t.is_stop())))
        .cloned()
        .collect()
}

/// Name-bearing tokens: punctuation, fillers and initials removed.
fn name_core(tokens: &[Token]) -> Vec<Token> {
    loose(tokens)
        .into_iter()
        .filter(|t| !(t.class == TokenClass::Punct || t.surface.trim_end_matches('.').chars().count() == 1))
        .collect()
}

/// Spoken-digit runs that tolerate commas, ellipses and fillers between digits.
fn loose_digit_runs(tokens: &[Token]) -> Vec<usize> {
    let mut runs = Vec::new();
    let mut cur = 0;
    for t in tokens {
        if spoken_digit(t) {
            cur += 1;
        } else if t.class == TokenClass::Filler || (t.class == TokenClass::Punct && !t.is_stop()) {
            continue;
        } else if cur > 0 {
            runs.push(cur);
            cur = 0;
        }
    }
    if cur > 0 {
        runs.push(cur);
    }
    runs
}

fn two_digit(g: &Group) -> bool {
    matches!(g, Group::Teen(_) | Group::Compound(_) | Group::Tens(_))
}

fn group_lists(tokens: &[Token]) -> Vec<Vec<Group>> {
    number_runs(tokens).into_iter().map(|r| r.groups).collect()
}

fn has_correction(f: &Features) -> bool {
    f.tokens.iter().any(|t| t.class == TokenClass::CorrectionMarker)
}

fn adjacent_repeat(f: &Features) -> bool {
    let segments: Vec<Option<Vec<String>>> = f.tokens.split(Token::is_comma).map(segment_key).collect();
    let words: Vec<Vec<String>> = f
        .tokens
        .split(Token::is_comma)
        .map(|seg| seg.iter().filter(|t| t.class != TokenClass::Punct).map(Token::lower).collect())
        .collect();
    segments.windows(2).any(|w| w[0].is_some() && w[0] == w[1])
        || words.windows(2).any(|w| w[1].len() >= 2 && w[0].ends_with(&w[1]))
}

fn month_present(tokens: &[Token]) -> bool {
    tokens.iter().any(|t| t.class == TokenClass::Month)
}

fn zero_led_day(tokens: &[Token]) -> bool {
    tokens.iter().enumerate().any(|(i, t)| {
        t.class == TokenClass::Month
            && tokens[i + 1..]
                .iter()
                .find(|n| !matches!(n.class, TokenClass::Punct | TokenClass::Filler))
                .is_some_and(|n| digit_value(n) == Some(0))
    })
}

const OPENERS: &str = r"^\s*((yes|yeah|yep|yup|confirmed|correct|okay|ok|sure),?\s+)?";

fn opener(rest: &str) -> String {
    format!("{OPENERS}{rest}")
}

fn matches_signature(id: &str, f: &Features) -> Option<bool> {
    static FORMAL: OnceLock<Regex> = OnceLock::new();
    static CASUAL: OnceLock<Regex> = OnceLock::new();
    static ZIP_FORMAL: OnceLock<Regex> = OnceLock::new();
    static NAME_PREFIX: OnceLock<Regex> = OnceLock::new();
    let lower = f.lower.as_str();
    let tokens = f.tokens.as_slice();
    let hit = match id {
        // general
        "filler_words" => regex!(r"\b(um+|uh+|uhm|er|erm|hmm+|you know)\b").is_match(lower),
        "hesitation" => lower.matches("...").count() >= 2,
        "correction" | "with_correction" | "name_with_correction" => has_correction(f),
        "repetition" | "with_repetition" => adjacent_repeat(f),
        "pause" => regex!(r"\bpause\b").is_match(lower),
        "formal" => FORMAL
            .get_or_init(|| {
                Regex::new(&opener(
                    r"the (number|digits|code|zip code|zip|postal code|date|date of birth|birth date|birthday|name|full name) (is|are)\b",
                ))
                .expect("valid pattern")
            })
            .is_match(lower),
        "casual" => CASUAL
            .get_or_init(|| Regex::new(&opener(r"it's\b")).expect("valid pattern"))
            .is_match(lower),
        "polite" | "zip_polite" => regex!(r"\b(please|thank you|thanks)\b").is_match(lower),
        "confident" | "zip_confident" => regex!(r"\b(definitely|certainly|absolutely|for sure)\b").is_match(lower),
        "uncertain" | "zip_uncertain" => {
            regex!(r"\b(i think|maybe|i believe|probably|not sure|i guess)\b").is_match(lower)
        }
        "rushed" => f.text.split_whitespace().any(|w| {
            let w = w.trim_matches(|c: char| !c.is_alphanumeric());
            split_run_on_numbers(&w.to_lowercase()).is_some_and(|p| p.len() >= 3) || split_camel_case(w).is_some()
        }),
        "careful" => regex!(r"\b(carefully|slowly)\b").is_match(lower),
        "confirmation" => regex!(r"(is that right|is that correct|\bright\?|\bcorrect\?)").is_match(lower),
        "clarification" => regex!(r"(does that make sense|to clarify|just to be clear)").is_match(lower),
        "brief_confirmation" => regex!(r"^\s*(yes|yep|yup|yeah)\b").is_match(lower),
        "concise_confirmation" => regex!(r"^\s*(confirmed|correct|that's right|affirmative)\b").is_match(lower),

        // zip
        "digit_by_digit" => plain_digit_streak(tokens) >= 5 || plain_digit_streak(&loose(&f.resolved)) >= 5,
        "grouped_two" => group_lists(&f.resolved)
            .iter()
            .any(|g| g.windows(2).any(|w| two_digit(&w[0]) && two_digit(&w[1]))),
        "grouped_three" => group_lists(&f.resolved).iter().any(|g| {
            g.windows(3)
                .any(|w| matches!(w[0], Group::Digit(_)) && two_digit(&w[1]) && two_digit(&w[2]))
        }),
        "hundred" => tokens.iter().any(|t| t.lower() == "hundred"),
        "mixed_grouping" => group_lists(&f.resolved).iter().any(|g| {
            g.windows(3)
                .any(|w| two_digit(&w[0]) && matches!(w[1], Group::Digit(_)) && matches!(w[2], Group::Digit(_)))
        }),
        "spoken_number_split" => tokens.windows(2).any(|w| {
            lexicon::tens_value(&w[0].lower()).is_some()
                && !w[1].joined
                && digit_value(&w[1]).is_some_and(|d| d > 0)
        }),
        "reversed" => {
            tokens.iter().any(|t| lexicon::REVERSAL_CUES.contains(&t.lower().as_str()))
                || tokens.windows(5).any(|w| {
                    let d: Vec<Option<u32>> = w.iter().map(digit_value).collect();
                    d.iter().all(Option::is_some) && d.windows(2).all(|p| p[0].unwrap() == p[1].unwrap() + 1)
                })
        }
        "with_pause" => {
            let ts: Vec<&Token> = tokens.iter().filter(|t| !t.is_comma() && t.lower() != "and").collect();
            ts.iter()
                .enumerate()
                .any(|(i, t)| is_ellipsis(t) && i >= 2 && number_word(ts[i - 1]) && number_word(ts[i - 2]))
        }
        "with_hesitation" => {
            tokens
                .windows(2)
                .filter(|w| spoken_digit(&w[0]) && is_ellipsis(&w[1]))
                .count()
                >= 4
        }
        "with_filler" => tokens.iter().enumerate().any(|(i, t)| {
            t.class == TokenClass::Filler
                && t.lower() != "pause"
                && tokens[..i].iter().any(number_word)
                && tokens[i + 1..].iter().any(number_word)
        }),
        "zip_formal" => ZIP_FORMAL
            .get_or_init(|| Regex::new(&opener(r"the (digits|zip code|zip|postal code) (are|is)\b")).expect("valid pattern"))
            .is_match(lower),
        "zip_casual" => regex!(r"^\s*(yeah|yep|yup),?\s+it's\b").is_match(lower),
        "spelled_out" => tokens
            .windows(2)
            .any(|w| spoken_digit(&w[0]) && spoken_digit(&w[1]) && w[1].joined),

        // date of birth
        "date_as_4_digits" => {
            !month_present(&f.resolved) && f.resolved.iter().any(|t| written_digits(t) && t.surface.len() == 4)
        }
        "date_as_5_digits" => f.resolved.iter().any(|t| written_digits(t) && t.surface.len() == 5),
        "date_as_6_digits" => f.resolved.iter().any(|t| written_digits(t) && t.surface.len() == 6),
        "date_as_8_digits" => f.resolved.iter().any(|t| written_digits(t) && t.surface.len() == 8),
        "spoken_date_4_digits" => loose_digit_runs(&f.resolved).contains(&4),
        "spoken_date_5_digits" => loose_digit_runs(&f.resolved).contains(&5),
        "spoken_date_6_digits" => loose_digit_runs(&f.resolved).contains(&6),
        "spoken_date_8_digits" => loose_digit_runs(&f.resolved).contains(&8),
        "spoken_month_day_year" => {
            month_present(&f.resolved) && !f.resolved.iter().any(written_digits) && !zero_led_day(&f.resolved)
        }
        "mixed_spoken_and_digits" => {
            month_present(&f.resolved) && (f.resolved.iter().any(written_digits) || zero_led_day(&f.resolved))
        }
        "filler_or_correction" => {
            has_correction(f) || tokens.iter().any(|t| t.class == TokenClass::Filler && t.lower() != "pause")
        }
        "casual_or_polite_digits" => {
            let cue = regex!(r"\b(please|thanks|thank you|yeah|yep|sure|okay|ok)\b").is_match(lower);
            let numeric_segments = f
                .lower
                .replace("...", ",")
                .split(',')
                .filter(|seg| {
                    let ts = tokenize(seg).tokens;
                    !ts.is_empty()
                        && ts.iter().all(|t| {
                            matches!(t.class, TokenClass::DigitWord | TokenClass::NumberWord | TokenClass::Punct)
                        })
                        && ts.iter().any(|t| t.class != TokenClass::Punct)
                })
                .count();
            cue && numeric_segments >= 2
        }

        // person name
        "name_with_last" => name_core(tokens).windows(2).any(|w| is_candidate(&w[0]) && is_candidate(&w[1])),
        "name_with_prefix" => NAME_PREFIX
            .get_or_init(|| {
                Regex::new(&opener(
                    r"(my name is|my name's|my first name is|my full name is|this is|it's|it is|i'm|i am|the name is|name's|call me)\b",
                ))
                .expect("valid pattern")
            })
            .is_match(lower),
        "name_reverse_order" => tokens
            .windows(3)
            .any(|w| is_candidate(&w[0]) && w[1].is_comma() && is_candidate(&w[2])),
        "name_with_title" => tokens.windows(2).any(|w| is_title(&w[0]) && is_candidate(&w[1])),
        "name_with_middle" => name_core(tokens).windows(3).any(|w| {
            w.iter()
                .all(|t| is_candidate(t) && t.surface.chars().count() >= 2)
        }),
        "name_with_suffix" => tokens.iter().any(is_suffix),
        "name_with_initials" => regex!(r"\b[A-Z]\.(\s|$|,|\.)").is_match(&f.text),
        "name_partial_spelling" => regex!(r"\b[A-Za-z](-[A-Za-z])+\b").is_match(&f.text),
        "name_with_apostrophe" => regex!(r"\b[A-Z]'[A-Z][a-z]+").is_match(&f.text),
        "name_hyphenated" => regex!(r"\b[A-Z][a-z]+-[A-Z][a-z]+").is_match(&f.text),
        "nickname" => tokens
            .iter()
            .any(|t| t.class == TokenClass::NameToken && lexicon::formal_name(&t.surface).is_some()),
        _ => return None,
    };
    Some(hit)
}

/// Whether rule mode can detect `id`.
pub fn has_signature(id: &str) -> bool {
    matches_signature(id, &Features::new("x")).is_some()
}

/// Neutral openers that still leave a plain answer.
static LEAD_IN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*(sure,|okay,|so|that's|that would be)\s+").expect("lead-in pattern"));

fn bare_value(f: &Features) -> bool {
    !f.tokens.is_empty()
        && f.tokens.iter().all(|t| {
            matches!(
                t.class,
                TokenClass::DigitWord
                    | TokenClass::NumberWord
                    | TokenClass::Ordinal
                    | TokenClass::Month
                    | TokenClass::NameToken
            ) || t.is_comma()
        })
}

fn candidate_ids(kind: &EntityKind) -> impl Iterator<Item = &'static str> {
    let specific: &[tables::Row] = match kind {
        EntityKind::ZipCode => tables::ZIP,
        EntityKind::DateOfBirth => tables::DOB,
        EntityKind::PersonName => tables::NAME,
        EntityKind::Extension(_) => &[],
    };
    tables::GENERAL.iter().chain(specific.iter()).map(|(id, _, _)| *id)
}

/// Rule-mode classification. The result is never empty: unmatched text is
/// `not_listed`.
pub fn classify_rule(transcript: &str, kind: &EntityKind) -> BTreeSet<String> {
    let f = Features::new(transcript);
    let mut out: BTreeSet<String> = candidate_ids(kind)
        .filter(|id| *id != RESIDUAL && matches_signature(id, &f) == Some(true))
        .map(str::to_string)
        .collect();
    if out.is_empty() {
        let bare = Features::new(LEAD_IN.replace(transcript, "").as_ref());
        let tag = if bare_value(&bare) { RESIDUAL } else { NOT_LISTED };
        out.insert(tag.to_string());
    }
    out
}
