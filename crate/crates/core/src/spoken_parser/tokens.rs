//! Tokenization of spoken-style text and correction/repetition resolution.

use serde::Serialize;

use super::lexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenClass {
    /// A spoken digit ("seven", "oh") or a run of written digits ("90210").
    DigitWord,
    /// Teens, tens, "hundred", "thousand", "double", "triple".
    NumberWord,
    Ordinal,
    Month,
    Filler,
    CorrectionMarker,
    NameToken,
    Punct,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub surface: String,
    pub class: TokenClass,
    /// Punctuation written flush against the preceding word ("three...", "James—").
    pub attached: bool,
    /// Non-initial part of a hyphenated compound ("four" in "thirty-four").
    pub joined: bool,
}

impl Token {
    fn new(surface: impl Into<String>, class: TokenClass) -> Self {
        Token { surface: surface.into(), class, attached: false, joined: false }
    }

    pub fn lower(&self) -> String {
        self.surface.to_lowercase()
    }

    pub fn is_value(&self) -> bool {
        matches!(
            self.class,
            TokenClass::DigitWord
                | TokenClass::NumberWord
                | TokenClass::Ordinal
                | TokenClass::Month
                | TokenClass::NameToken
        )
    }

    pub fn is_comma(&self) -> bool {
        self.class == TokenClass::Punct && matches!(self.surface.as_str(), "," | ";")
    }

    /// Sentence-ending punctuation.
    pub fn is_stop(&self) -> bool {
        self.class == TokenClass::Punct && matches!(self.surface.as_str(), "." | "?" | "!" | ":")
    }

    pub fn is_pause(&self) -> bool {
        self.class == TokenClass::Punct && matches!(self.surface.as_str(), "..." | "—" | "--" | "-")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TokenStream {
    pub tokens: Vec<Token>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Token> {
        self.tokens.iter()
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.surface.as_str()).collect()
    }
}

fn normalize(text: &str) -> String {
    text.replace(['\u{2019}', '\u{2018}', '`'], "'")
        .replace('\u{2026}', "...")
        .replace('\u{2013}', "—")
        .replace(['\u{201c}', '\u{201d}'], "\"")
}

const SPLIT_PUNCT: &[char] = &[',', ';', ':', '?', '!', '"', '(', ')', '[', ']', '/'];

/// Splits `text` into classified tokens. Total: every character ends up in a token
/// or is whitespace/ignored quoting.
pub fn tokenize(text: &str) -> TokenStream {
    let text = normalize(text);
    let mut raw: Vec<Token> = Vec::new();
    for chunk in text.split_whitespace() {
        split_chunk(chunk, &mut raw);
    }
    let merged = merge_phrases(raw);
    TokenStream { tokens: merged }
}

fn push_punct(out: &mut Vec<Token>, surface: &str, attached: bool) {
    let mut t = Token::new(surface, TokenClass::Punct);
    t.attached = attached;
    out.push(t);
}

fn split_chunk(chunk: &str, out: &mut Vec<Token>) {
    let mut rest = chunk;
    let mut first = true;
    while !rest.is_empty() {
        // leading punctuation
        if let Some(p) = leading_punct(rest) {
            push_punct(out, canonical_punct(p), !first);
            rest = &rest[p.len()..];
            first = false;
            continue;
        }
        // next word ends at punctuation that is not part of the word
        let end = word_end(rest);
        let word = &rest[..end];
        push_word(word, out);
        rest = &rest[end..];
        first = false;
        // punctuation glued to the word
        while let Some(p) = leading_punct(rest) {
            push_punct(out, canonical_punct(p), true);
            rest = &rest[p.len()..];
        }
    }
}

fn canonical_punct(p: &str) -> &str {
    match p {
        "--" => "—",
        _ if p.chars().all(|c| c == '.') && p.len() >= 2 => "...",
        _ => p,
    }
}

fn leading_punct(s: &str) -> Option<&str> {
    if s.starts_with("...") || s.starts_with("..") {
        let n = s.chars().take_while(|c| *c == '.').count();
        return Some(&s[..n]);
    }
    if s.starts_with("--") {
        return Some(&s[..2]);
    }
    let c = s.chars().next()?;
    if SPLIT_PUNCT.contains(&c) || c == '—' || c == '.' {
        return Some(&s[..c.len_utf8()]);
    }
    if c == '-' || c == '\'' || c == '"' {
        return Some(&s[..1]);
    }
    None
}

fn word_end(s: &str) -> usize {
    let mut end = 0;
    let chars: Vec<(usize, char)> = s.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (idx, c) = chars[i];
        let next = chars.get(i + 1).map(|(_, c)| *c);
        let is_inner = |n: Option<char>| n.is_some_and(|n| n.is_alphanumeric());
        if c.is_alphanumeric() || ((c == '\'' || c == '-') && is_inner(next) && end > 0) {
            end = idx + c.len_utf8();
        } else if c == '.' && end > 0 {
            // Keep "Mr." and initials like "J." whole.
            let word = &s[..end];
            let abbreviation = lexicon::TITLE_WORDS.contains(&word.to_lowercase().as_str())
                || lexicon::NAME_SUFFIXES.iter().any(|w| w.eq_ignore_ascii_case(word))
                || (word.chars().count() == 1 && word.chars().all(|c| c.is_alphabetic()));
            if abbreviation && next != Some('.') {
                end = idx + 1;
            }
            break;
        } else {
            break;
        }
        i += 1;
    }
    if end == 0 {
        // lone unknown symbol
        s.chars().next().map_or(0, |c| c.len_utf8())
    } else {
        end
    }
}

fn push_word(word: &str, out: &mut Vec<Token>) {
    let lower = word.to_lowercase();
    // Hyphenated words: number compounds split; spelled letters and names stay whole.
    if word.contains('-') {
        let parts: Vec<&str> = lower.split('-').collect();
        if parts.iter().all(|p| lexicon::is_number_word(p) || lexicon::ordinal_value(p).is_some()) {
            for (i, part) in parts.iter().enumerate() {
                let mut t = classify_word(part, part);
                t.joined = i > 0;
                out.push(t);
            }
            return;
        }
        if parts.iter().all(|p| p.bytes().all(|b| b.is_ascii_digit()) && !p.is_empty()) {
            for (i, part) in word.split('-').enumerate() {
                if i > 0 {
                    push_punct(out, "-", true);
                }
                out.push(Token::new(part, TokenClass::DigitWord));
            }
            return;
        }
        let compound = Token::new(word, TokenClass::NameToken);
        if word.chars().next().is_some_and(char::is_uppercase) || is_spelled(word) {
            out.push(compound);
        } else {
            out.push(classify_word(word, &lower));
        }
        return;
    }
    if let Some(pieces) = split_run_on_numbers(&lower) {
        for piece in pieces {
            out.push(classify_word(piece, piece));
        }
        return;
    }
    if let Some((a, b)) = split_camel_case(word) {
        out.push(Token::new(a, TokenClass::NameToken));
        out.push(Token::new(b, TokenClass::NameToken));
        return;
    }
    out.push(classify_word(word, &lower));
}

/// "J-O-H-N"
pub fn is_spelled(word: &str) -> bool {
    let parts: Vec<&str> = word.split('-').collect();
    parts.len() >= 2 && parts.iter().all(|p| p.chars().count() == 1 && p.chars().all(char::is_alphabetic))
}

fn classify_word(surface: &str, lower: &str) -> Token {
    let all_digits = lower.bytes().all(|b| b.is_ascii_digit()) && !lower.is_empty();
    let class = if all_digits || (lexicon::digit_value(lower).is_some() && lower != "o") {
        TokenClass::DigitWord
    } else if lexicon::is_number_word(lower) {
        TokenClass::NumberWord
    } else if lexicon::ordinal_value(lower).is_some() {
        TokenClass::Ordinal
    } else if lexicon::month_number(lower).is_some() && lower != "may" || lower == "may" && surface == "May" {
        TokenClass::Month
    } else if lexicon::FILLERS.contains(&lower) {
        TokenClass::Filler
    } else if lexicon::CORRECTION_PHRASES.iter().any(|p| p.len() == 1 && p[0] == lower) {
        TokenClass::CorrectionMarker
    } else if surface.chars().next().is_some_and(char::is_uppercase)
        && surface.chars().any(char::is_alphabetic)
        && !lexicon::NAME_STOPWORDS.contains(&lower.trim_end_matches('.'))
    {
        TokenClass::NameToken
    } else {
        TokenClass::Other
    };
    Token::new(surface, class)
}

/// Splits an unspaced run of number words ("onetwothreefourfive").
pub(crate) fn split_run_on_numbers(lower: &str) -> Option<Vec<&str>> {
    if lower.len() < 6 || !lower.bytes().all(|b| b.is_ascii_lowercase()) || lexicon::is_number_word(lower) {
        return None;
    }
    fn go<'a>(s: &'a str, acc: &mut Vec<&'a str>) -> bool {
        if s.is_empty() {
            return true;
        }
        let mut candidates: Vec<&str> = lexicon::DIGIT_WORDS
            .iter()
            .chain(lexicon::TEEN_WORDS.iter())
            .chain(lexicon::TENS_WORDS.iter().skip(2))
            .chain(["oh", "hundred", "thousand", "double", "triple"].iter())
            .copied()
            .filter(|w| s.starts_with(w))
            .collect();
        candidates.sort_by_key(|w| std::cmp::Reverse(w.len()));
        for w in candidates {
            acc.push(&s[..w.len()]);
            if go(&s[w.len()..], acc) {
                return true;
            }
            acc.pop();
        }
        false
    }
    let mut acc = Vec::new();
    (go(lower, &mut acc) && acc.len() >= 2).then_some(acc)
}

const CAMEL_PREFIXES: &[&str] = &["Mc", "Mac", "De", "Di", "Da", "La", "Le", "Van", "Von", "Du"];

/// "JohnSmith" → ("John", "Smith"); keeps "McDonald" whole.
pub fn split_camel_case(word: &str) -> Option<(&str, &str)> {
    let mut chars = word.char_indices();
    let (_, first) = chars.next()?;
    if !first.is_uppercase() || !word.chars().all(char::is_alphabetic) {
        return None;
    }
    let split = chars.find(|(_, c)| c.is_uppercase()).map(|(i, _)| i)?;
    let (a, b) = word.split_at(split);
    let valid = a.chars().count() >= 2
        && b.chars().count() >= 2
        && a.chars().skip(1).all(char::is_lowercase)
        && b.chars().skip(1).all(char::is_lowercase)
        && !CAMEL_PREFIXES.contains(&a);
    valid.then_some((a, b))
}

fn merge_phrases(tokens: Vec<Token>) -> Vec<Token> {
    let mut out: Vec<Token> = Vec::with_capacity(tokens.len());
    let mut i = 0;
    'outer: while i < tokens.len() {
        for (phrases, class) in
            [(lexicon::FILLER_PHRASES, TokenClass::Filler), (lexicon::CORRECTION_PHRASES, TokenClass::CorrectionMarker)]
        {
            for phrase in phrases.iter().filter(|p| p.len() > 1) {
                let end = i + phrase.len();
                if end <= tokens.len()
                    && tokens[i..end]
                        .iter()
                        .zip(phrase.iter())
                        .all(|(t, w)| t.lower() == *w && t.class != TokenClass::Punct)
                {
                    let surface = tokens[i..end].iter().map(|t| t.surface.as_str()).collect::<Vec<_>>().join(" ");
                    out.push(Token::new(surface, class));
                    i = end;
                    continue 'outer;
                }
            }
        }
        out.push(tokens[i].clone());
        i += 1;
    }
    out
}

/// Applies self-corrections and collapses repeated runs.
///
/// A correction marker discards the value run right before it. If the word just
/// before the marker carries flush hesitation punctuation ("three...", "James—"),
/// only that word is dropped; otherwise the run is dropped back to the previous
/// boundary (start of text, a comma, sentence punctuation, or a non-value word).
/// Consecutive comma-separated segments with identical value tokens (two or more)
/// collapse to one.
pub fn resolve_corrections(stream: &TokenStream) -> TokenStream {
    let corrected = apply_corrections(&stream.tokens);
    TokenStream { tokens: collapse_repetitions(corrected) }
}

fn apply_corrections(tokens: &[Token]) -> Vec<Token> {
    let mut out: Vec<Token> = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i].class != TokenClass::CorrectionMarker {
            out.push(tokens[i].clone());
            i += 1;
            continue;
        }
        // swallow the marker and anything marker-like up to the replacement run
        while i < tokens.len() && matches!(tokens[i].class, TokenClass::CorrectionMarker | TokenClass::Punct) {
            i += 1;
        }
        retract(&mut out);
    }
    out
}

fn retract(out: &mut Vec<Token>) {
    let mut hesitant = false;
    while out.last().is_some_and(|t| t.class == TokenClass::Punct) {
        let p = out.pop().expect("checked");
        if p.attached && p.is_pause() {
            hesitant = true;
        }
    }
    if !out.last().is_some_and(Token::is_value) {
        return;
    }
    if hesitant {
        out.pop();
        return;
    }
    while let Some(last) = out.last() {
        if last.is_value() || last.class == TokenClass::Filler || (last.is_pause() && !last.is_comma()) {
            out.pop();
        } else {
            break;
        }
    }
}

/// Value words closing a comma segment; leading non-value words ("it's", "my zip
/// is") are skipped. `None` when a non-value word follows the value words.
pub(crate) fn segment_key(segment: &[Token]) -> Option<Vec<String>> {
    let mut key = Vec::new();
    for t in segment {
        match t.class {
            TokenClass::Punct if !t.is_stop() => {}
            TokenClass::Filler => {}
            _ if t.is_value() => key.push(t.lower()),
            _ if key.is_empty() => {}
            _ if matches!(t.lower().as_str(), "the" | "and") => {}
            _ => return None,
        }
    }
    (!key.is_empty()).then_some(key)
}

fn collapse_repetitions(tokens: Vec<Token>) -> Vec<Token> {
    // segments are delimited by commas; each keeps its leading comma
    let mut segments: Vec<Vec<Token>> = vec![Vec::new()];
    for t in tokens {
        if t.is_comma() {
            segments.push(vec![t]);
        } else {
            segments.last_mut().expect("non-empty").push(t);
        }
    }
    let mut out: Vec<Token> = Vec::new();
    let mut last_key: Option<Vec<String>> = None;
    for segment in segments {
        let key = segment_key(&segment);
        // a single repeated word ("twenty, twenty") is more likely content than a restart
        if key.as_ref().is_some_and(|k| k.len() >= 2) && key == last_key {
            continue;
        }
        last_key = key;
        out.extend(segment);
    }
    out
}
