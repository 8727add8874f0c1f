//! Date-of-birth recovery: written, spoken month-day-year, then continuous digits.

use chrono::NaiveDate;

use super::lexicon;
use super::numbers::{number_runs, Group, NumberRun};
use super::tokens::{Token, TokenClass};
use crate::domain::{canonicalize, decode_compact_date, expand_two_digit_year, EntityKind};

pub fn extract_date(tokens: &[Token]) -> Option<NaiveDate> {
    if let Some(date) = written_date(tokens) {
        return Some(date);
    }
    // A named month commits to the spoken reading.
    if tokens.iter().any(|t| month_of(t).is_some()) {
        return spoken_month_day_year(tokens);
    }
    continuous_date(tokens)
}

fn is_written_digits(token: &Token) -> bool {
    !token.surface.is_empty() && token.surface.bytes().all(|b| b.is_ascii_digit())
}

/// "01-15-2024", "1/5/85", "1990-01-02".
fn written_date(tokens: &[Token]) -> Option<NaiveDate> {
    tokens.windows(5).find_map(|w| {
        let seps_ok = [&w[1], &w[3]]
            .iter()
            .all(|t| t.class == TokenClass::Punct && matches!(t.surface.as_str(), "-" | "/" | "."))
            && w[1].surface == w[3].surface;
        if !(seps_ok && is_written_digits(&w[0]) && is_written_digits(&w[2]) && is_written_digits(&w[4])) {
            return None;
        }
        let raw = format!("{}-{}-{}", w[0].surface, w[2].surface, w[4].surface);
        let canonical = canonicalize(&EntityKind::DateOfBirth, &raw).ok()?;
        NaiveDate::parse_from_str(&canonical, "%m-%d-%Y").ok()
    })
}

fn month_of(token: &Token) -> Option<u32> {
    (token.class == TokenClass::Month).then(|| lexicon::month_number(&token.lower())).flatten()
}

fn skippable(token: &Token) -> bool {
    token.class == TokenClass::Filler
        || (token.class == TokenClass::Punct && !token.is_stop())
        || matches!(token.lower().as_str(), "the" | "of")
}

fn next_significant(tokens: &[Token], mut i: usize) -> usize {
    while i < tokens.len() && skippable(&tokens[i]) {
        i += 1;
    }
    i
}

/// Ordinal day at `i`, possibly a hyphenated compound ("twenty-first").
/// Returns the day and the index after it.
fn ordinal_day(tokens: &[Token], i: usize) -> Option<(u32, usize)> {
    let token = tokens.get(i)?;
    if token.class == TokenClass::Ordinal {
        return Some((lexicon::ordinal_value(&token.lower())?, i + 1));
    }
    let tens = lexicon::tens_value(&token.lower())?;
    let next = tokens.get(i + 1)?;
    if next.class == TokenClass::Ordinal && next.joined {
        let unit = lexicon::ordinal_value(&next.lower())?;
        return (unit < 10).then_some((tens + unit, i + 2));
    }
    None
}

fn year_from_groups(groups: &[Group]) -> Option<i32> {
    let digits: String = groups.iter().map(Group::digits).collect();
    match digits.len() {
        4 => digits.parse().ok(),
        2 => Some(expand_two_digit_year(digits.parse().ok()?)),
        _ => None,
    }
}

fn run_at(tokens: &[Token], i: usize) -> Option<NumberRun> {
    let runs = number_runs(&tokens[i..]);
    runs.into_iter().next().filter(|r| r.start == 0)
}

/// Splits a number run that follows a month into (day, year groups).
fn cardinal_day(groups: &[Group]) -> Option<(u32, &[Group])> {
    match groups {
        // "zero two"
        [Group::Digit(0), Group::Digit(d), rest @ ..] if *d > 0 => Some((*d, rest)),
        [Group::Written(w), rest @ ..] if w.len() <= 2 => Some((w.parse().ok()?, rest)),
        [first, rest @ ..] => {
            let day = first.value()?;
            (1..=31).contains(&day).then_some((day, rest))
        }
        [] => None,
    }
}

fn spoken_month_day_year(tokens: &[Token]) -> Option<NaiveDate> {
    for (m_idx, token) in tokens.iter().enumerate() {
        let Some(month) = month_of(token) else { continue };
        // Day first: "the second of January, nineteen ninety".
        let mut k = m_idx;
        while k > 0 && skippable(&tokens[k - 1]) {
            k -= 1;
        }
        if k > 0 && tokens[k - 1].class == TokenClass::Ordinal {
            let start = if k >= 2 && tokens[k - 1].joined && lexicon::tens_value(&tokens[k - 2].lower()).is_some() {
                k - 2
            } else {
                k - 1
            };
            if let Some((day, _)) = ordinal_day(tokens, start) {
                let j = next_significant(tokens, m_idx + 1);
                let date = run_at(tokens, j)
                    .and_then(|run| year_from_groups(&run.groups))
                    .and_then(|year| NaiveDate::from_ymd_opt(year, month, day));
                if date.is_some() {
                    return date;
                }
            }
        }
        // Month first: "January second, nineteen ninety".
        let i = next_significant(tokens, m_idx + 1);
        let date = if let Some((day, after)) = ordinal_day(tokens, i) {
            let j = next_significant(tokens, after);
            run_at(tokens, j)
                .and_then(|run| year_from_groups(&run.groups))
                .and_then(|year| NaiveDate::from_ymd_opt(year, month, day))
        } else if let Some(run) = run_at(tokens, i) {
            cardinal_day(&run.groups).and_then(|(day, rest)| {
                let year = if rest.is_empty() {
                    // "January 2nd 1990" style: year is the next run
                    run_at(tokens, next_significant(tokens, run.start + i + (run.end - run.start)))
                        .and_then(|r| year_from_groups(&r.groups))?
                } else {
                    year_from_groups(rest)?
                };
                NaiveDate::from_ymd_opt(year, month, day)
            })
        } else {
            None
        };
        if date.is_some() {
            return date;
        }
    }
    None
}

fn continuous_date(tokens: &[Token]) -> Option<NaiveDate> {
    number_runs(tokens).iter().find_map(|run| {
        let digits = run.digits();
        matches!(digits.len(), 4 | 5 | 6 | 8).then(|| decode_compact_date(&digits)).flatten()
    })
}
