//! Digit strings to number words.

use crate::spoken_parser::lexicon::{cardinal_under_100, digit_value, tens_value, DIGIT_WORDS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    Single,
    Pairs,
    Triples,
    /// A leading pair, then single digits.
    Mixed,
}

pub(crate) fn digit_word(d: u32) -> &'static str {
    DIGIT_WORDS[d as usize]
}

/// Words for a two-character digit string; a leading zero is spoken ("zero five").
pub(crate) fn two_digit_words(pair: &str) -> String {
    let b = pair.as_bytes();
    let (hi, lo) = (u32::from(b[0] - b'0'), u32::from(b[1] - b'0'));
    if hi == 0 {
        format!("zero {}", digit_word(lo))
    } else {
        cardinal_under_100(hi * 10 + lo)
    }
}

fn chunk_words(chunk: &str) -> String {
    match chunk.len() {
        1 => digit_word(u32::from(chunk.as_bytes()[0] - b'0')).to_string(),
        2 => two_digit_words(chunk),
        _ => format!("{} {}", chunk_words(&chunk[..1]), two_digit_words(&chunk[1..3])),
    }
}

fn last_word(text: &str) -> &str {
    text.split_whitespace().last().unwrap_or("")
}

/// The text ends in a bare tens word ("twenty", not "twenty-one").
pub(crate) fn ends_in_bare_tens(text: &str) -> bool {
    let w = last_word(text).trim_end_matches(|c: char| !c.is_ascii_alphabetic());
    tens_value(w).is_some()
}

/// The text starts with a digit word from one to nine.
pub(crate) fn starts_with_unit(text: &str) -> bool {
    let first = text.split_whitespace().next().unwrap_or("");
    let w = first.split('-').next().unwrap_or("").trim_matches(|c: char| !c.is_ascii_alphabetic());
    digit_value(w).is_some_and(|d| d > 0) && w != "oh" && w != "o"
}

/// Separator between two spoken chunks. A bare tens word followed by a unit digit
/// gets a comma, otherwise "twenty three" would read as 23.
pub(crate) fn separator(prev: &str, next: &str) -> &'static str {
    if ends_in_bare_tens(prev) && starts_with_unit(next) {
        ", "
    } else {
        " "
    }
}

pub(crate) fn join_chunks<S: AsRef<str>>(chunks: &[S]) -> String {
    let mut out = String::new();
    for (i, c) in chunks.iter().enumerate() {
        if i > 0 {
            out.push_str(separator(chunks[i - 1].as_ref(), c.as_ref()));
        }
        out.push_str(c.as_ref());
    }
    out
}

/// Spoken form of an ASCII digit string. Zeros are always "zero".
pub fn number_to_spoken(digits: &str, grouping: Grouping) -> String {
    assert!(digits.bytes().all(|b| b.is_ascii_digit()), "digits only");
    let sizes: Vec<usize> = match grouping {
        Grouping::Single => vec![1; digits.len()],
        Grouping::Pairs => chunk_sizes(digits.len(), 2),
        Grouping::Triples => chunk_sizes(digits.len(), 3),
        Grouping::Mixed if digits.len() >= 2 => {
            std::iter::once(2).chain(std::iter::repeat_n(1, digits.len() - 2)).collect()
        }
        Grouping::Mixed => vec![1; digits.len()],
    };
    let mut chunks = Vec::with_capacity(sizes.len());
    let mut at = 0;
    for size in sizes {
        chunks.push(chunk_words(&digits[at..at + size]));
        at += size;
    }
    join_chunks(&chunks)
}

fn chunk_sizes(len: usize, size: usize) -> Vec<usize> {
    let mut out = vec![size; len / size];
    if !len.is_multiple_of(size) {
        out.push(len % size);
    }
    out
}
