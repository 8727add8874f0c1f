//! Value bodies per entity kind, and the modifiers that disturb them.

use chrono::Datelike;

use super::words::{digit_word, ends_in_bare_tens, separator, two_digit_words};
use super::{speakable_first_name, Picker, Plan, RenderError};
use crate::domain::{decode_compact_date, title_case, EntityKind, EntityValue};
use crate::spoken_parser::is_descending_run;
use crate::spoken_parser::lexicon::{
    self, cardinal_under_100, ordinal_word, APOSTROPHE_SURNAMES, FIRST_NAMES, MIDDLE_NAMES, SURNAMES, TEEN_WORDS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Class {
    Digit(u32),
    Pair(u32),
    Month(u32),
    Written,
    Name,
    Other,
}

#[derive(Debug, Clone)]
pub(crate) struct Unit {
    text: String,
    class: Class,
}

fn unit(text: impl Into<String>, class: Class) -> Unit {
    Unit { text: text.into(), class }
}

/// A sequence of spoken units with the separator before each unit after the first.
#[derive(Debug, Clone)]
pub(crate) struct Body {
    units: Vec<Unit>,
    seps: Vec<String>,
    prefix: String,
    suffix: String,
}

impl Body {
    fn new(units: Vec<Unit>) -> Self {
        let seps = units.windows(2).map(|w| separator(&w[0].text, &w[1].text).to_string()).collect();
        Body { units, seps, prefix: String::new(), suffix: String::new() }
    }

    fn with_sep(mut self, i: usize, sep: &str) -> Self {
        self.seps[i] = sep.to_string();
        self
    }

    fn join(&self, from: usize, to: usize) -> String {
        let mut out = String::new();
        for i in from..to {
            if i > from {
                out.push_str(&self.seps[i - 1]);
            }
            out.push_str(&self.units[i].text);
        }
        out
    }

    fn text(&self) -> String {
        self.join(0, self.units.len())
    }

    fn wrap(&self, inner: String) -> String {
        format!("{}{}{}", self.prefix, inner, self.suffix)
    }
}

fn unrepresentable(id: &str, value: &EntityValue) -> RenderError {
    RenderError::Unrepresentable { id: id.to_string(), value: value.canonical.clone() }
}

fn digits_of(s: &str) -> Vec<u32> {
    s.bytes().map(|b| u32::from(b - b'0')).collect()
}

fn singles(digits: &[u32]) -> Vec<Unit> {
    digits.iter().map(|&d| unit(digit_word(d), Class::Digit(d))).collect()
}

fn pair(hi: u32, lo: u32) -> Unit {
    unit(cardinal_under_100(hi * 10 + lo), Class::Pair(hi * 10 + lo))
}

pub(crate) fn build(value: &EntityValue, plan: &Plan<'_>, p: &mut Picker) -> Result<Body, RenderError> {
    // unmodified plain answers alternate between spoken and written forms
    let body = match value.kind {
        EntityKind::ZipCode | EntityKind::DateOfBirth if plan.implicit_body && plan.modifier.is_none() => {
            if p.coin() {
                "direct_and_simple"
            } else {
                plan.body
            }
        }
        _ => plan.body,
    };
    match value.kind {
        EntityKind::ZipCode => zip_body(value, body, p),
        EntityKind::DateOfBirth => dob_body(value, body, p),
        EntityKind::PersonName => name_body(value, plan, p),
        EntityKind::Extension(_) => Err(unrepresentable(plan.body, value)),
    }
}

fn zip_body(value: &EntityValue, id: &str, p: &mut Picker) -> Result<Body, RenderError> {
    let un = || unrepresentable(id, value);
    let d = digits_of(&value.canonical);
    if d.len() != 5 {
        return Err(un());
    }
    // a countdown reads as a reversed run, so only `reversed` may speak one
    if id != "reversed" && is_descending_run(&value.canonical) {
        return Err(un());
    }
    let units = match id {
        "digit_by_digit" => singles(&d),
        "grouped_two" => {
            if d[0] == 0 || d[2] == 0 {
                return Err(un());
            }
            vec![pair(d[0], d[1]), pair(d[2], d[3]), unit(digit_word(d[4]), Class::Digit(d[4]))]
        }
        "grouped_three" => {
            if d[1] == 0 || d[3] == 0 {
                return Err(un());
            }
            vec![unit(digit_word(d[0]), Class::Digit(d[0])), pair(d[1], d[2]), pair(d[3], d[4])]
        }
        "hundred" => {
            let at = (0..=2).find(|&i| d[i] != 0).ok_or_else(un)?;
            let head = digit_word(d[at]);
            let tail = d[at + 1] * 10 + d[at + 2];
            let chunk = match (d[at + 1], tail) {
                (_, 0) => format!("{head} hundred"),
                (0, _) => format!("{head} hundred and {}", digit_word(tail)),
                _ => format!("{head} hundred {}", cardinal_under_100(tail)),
            };
            let mut units = singles(&d[..at]);
            units.push(unit(chunk, Class::Other));
            units.extend(singles(&d[at + 3..]));
            units
        }
        "mixed_grouping" => {
            let at = (0..=1).find(|&i| d[i] != 0).ok_or_else(un)?;
            let mut units = singles(&d[..at]);
            units.push(pair(d[at], d[at + 1]));
            units.extend(singles(&d[at + 2..]));
            units
        }
        "spoken_number_split" => {
            let at = (0..4).find(|&i| d[i] >= 2 && d[i + 1] >= 1).ok_or_else(un)?;
            let mut units = singles(&d[..at]);
            units
                .push(unit(format!("{} {}", lexicon::TENS_WORDS[d[at] as usize], digit_word(d[at + 1])), Class::Other));
            units.extend(singles(&d[at + 2..]));
            units
        }
        "reversed" => {
            let rev: String = value.canonical.chars().rev().collect();
            let mut body = Body::new(singles(&digits_of(&rev)));
            if !is_descending_run(&rev) {
                match p.index(3) {
                    0 => body.suffix = ", backwards".into(),
                    1 => body.prefix = "backwards, ".into(),
                    _ => body.prefix = "in reverse, ".into(),
                }
            }
            return Ok(body);
        }
        "spelled_out" => vec![unit(d.iter().map(|&x| digit_word(x)).collect::<Vec<_>>().join("-"), Class::Other)],
        "rushed" => vec![unit(d.iter().map(|&x| digit_word(x)).collect::<String>(), Class::Other)],
        "direct_and_simple" => {
            if p.template(2) == 0 {
                singles(&d)
            } else {
                vec![unit(value.canonical.clone(), Class::Written)]
            }
        }
        _ => return Err(un()),
    };
    Ok(Body::new(units))
}

/// Compact digit string of `len` digits that decodes back to the same date.
fn compact_date(value: &EntityValue, len: usize) -> Option<String> {
    let date = value.date()?;
    let (m, d, y) = (date.month(), date.day(), date.year());
    let yy = y.rem_euclid(100);
    let candidates = match len {
        8 => vec![format!("{m:02}{d:02}{y:04}")],
        6 => vec![format!("{m:02}{d:02}{yy:02}")],
        5 => vec![format!("{m}{d:02}{yy:02}"), format!("{m:02}{d}{yy:02}")],
        4 => vec![format!("{m}{d}{yy:02}")],
        _ => vec![],
    };
    candidates.into_iter().find(|c| c.len() == len && decode_compact_date(c) == Some(date))
}

/// Year in words: "nineteen ninety", "nineteen zero five", "two thousand twelve".
fn year_words(y: i32) -> Option<String> {
    let (century, rest) = (y / 100, (y % 100) as u32);
    match century {
        20 => Some(match rest {
            0 => "two thousand".into(),
            _ => format!("two thousand {}", cardinal_under_100(rest)),
        }),
        10..=19 => {
            let head = cardinal_under_100(century as u32);
            Some(match rest {
                0 => format!("{head} hundred"),
                1..=9 => format!("{head} zero {}", digit_word(rest)),
                _ => format!("{head} {}", cardinal_under_100(rest)),
            })
        }
        _ => None,
    }
}

fn month_unit(m: u32) -> Unit {
    unit(title_case(lexicon::month_name(m)), Class::Month(m))
}

fn dob_body(value: &EntityValue, id: &str, p: &mut Picker) -> Result<Body, RenderError> {
    let un = || unrepresentable(id, value);
    let date = value.date().ok_or_else(un)?;
    let (m, d, y) = (date.month(), date.day(), date.year());
    let compact = |len: usize| compact_date(value, len).ok_or_else(un);
    let spoken = |s: &str| singles(&digits_of(s));
    let month_day_year = |p: &mut Picker| -> Result<Body, RenderError> {
        let day = if p.coin() { format!("the {}", ordinal_word(d)) } else { ordinal_word(d) };
        let year = year_words(y).ok_or_else(un)?;
        Ok(Body::new(vec![month_unit(m), unit(day, Class::Other), unit(year, Class::Other)]).with_sep(1, ", "))
    };
    let body = match id {
        "date_as_4_digits" => Body::new(vec![unit(compact(4)?, Class::Written)]),
        "date_as_5_digits" => Body::new(vec![unit(compact(5)?, Class::Written)]),
        "date_as_6_digits" => Body::new(vec![unit(compact(6)?, Class::Written)]),
        "date_as_8_digits" => Body::new(vec![unit(compact(8)?, Class::Written)]),
        "spoken_date_4_digits" => Body::new(spoken(&compact(4)?)),
        "spoken_date_5_digits" => Body::new(spoken(&compact(5)?)),
        "spoken_date_6_digits" => Body::new(spoken(&compact(6)?)),
        "spoken_date_8_digits" => Body::new(spoken(&compact(8)?)),
        "spoken_month_day_year" => month_day_year(p)?,
        "mixed_spoken_and_digits" => {
            let year = year_words(y).ok_or_else(un)?;
            let mut forms = vec![1, 2];
            if d <= 9 {
                forms.insert(0, 0);
            }
            let units = match forms[p.index(forms.len())] {
                0 => {
                    vec![month_unit(m), unit(format!("zero {}", digit_word(d)), Class::Other), unit(year, Class::Other)]
                }
                1 => vec![month_unit(m), unit(ordinal_word(d), Class::Other), unit(y.to_string(), Class::Written)],
                _ => vec![month_unit(m), unit(d.to_string(), Class::Written), unit(y.to_string(), Class::Written)],
            };
            Body::new(units).with_sep(1, ", ")
        }
        "casual_or_polite_digits" => {
            let digits = [4, 5, 6].into_iter().find_map(|n| compact_date(value, n)).ok_or_else(un)?;
            let (head, yy) = digits.split_at(digits.len() - 2);
            let yy_words = two_digit_words(yy).replace('-', " ");
            let mut units = spoken(head);
            units.push(unit(yy_words, Class::Other));
            let last = units.len() - 2;
            let mut body = Body::new(units).with_sep(last, ", ");
            let cue = p.pick(&["please", "thanks", "yeah", "sure", "okay"]);
            body.prefix = format!("{cue}, ");
            body
        }
        "rushed" => Body::new(vec![unit(
            digits_of(&compact(8)?).iter().map(|&x| digit_word(x)).collect::<String>(),
            Class::Other,
        )]),
        "direct_and_simple" => match p.template(3) {
            0 => Body::new(spoken(&compact(8)?)),
            1 => Body::new(vec![unit(value.canonical.clone(), Class::Written)]),
            _ => month_day_year(p)?,
        },
        _ => return Err(un()),
    };
    Ok(body)
}

const TITLES: &[&str] = &["Mr.", "Ms.", "Dr.", "Mrs."];
const SUFFIXES: &[&str] = &["Jr", "Sr", "III"];
const INITIALS: &[&str] = &["A.", "B.", "C.", "D.", "E.", "J.", "K.", "L.", "M.", "R.", "S.", "T.", "W."];

fn name_body(value: &EntityValue, plan: &Plan<'_>, p: &mut Picker) -> Result<Body, RenderError> {
    let first = value.canonical.as_str();
    let has = |id: &str| plan.decorations.contains(id);
    if !speakable_first_name(first) {
        return Err(unrepresentable(plan.body, value));
    }
    let spoken_first = if has("nickname") {
        let options: Vec<String> = lexicon::nicknames_of(first)
            .into_iter()
            .map(title_case)
            .filter(|n| lexicon::formal_name(n).is_some_and(|f| f.eq_ignore_ascii_case(first)))
            .filter(|n| speakable_first_name(n))
            .collect();
        if options.is_empty() {
            return Err(unrepresentable("nickname", value));
        }
        options[p.index(options.len())].clone()
    } else {
        first.to_string()
    };
    let last = if has("name_with_apostrophe") {
        p.pick(APOSTROPHE_SURNAMES).to_string()
    } else if has("name_hyphenated") {
        let a = p.pick(SURNAMES);
        let others: Vec<&str> = SURNAMES.iter().copied().filter(|s| *s != a).collect();
        format!("{a}-{}", p.pick(&others))
    } else {
        let pool: Vec<&str> = SURNAMES.iter().copied().filter(|s| *s != first).collect();
        p.pick(&pool).to_string()
    };
    let units = match plan.body {
        "name_reverse_order" => {
            return Ok(Body::new(vec![unit(last, Class::Name), unit(spoken_first, Class::Name)]).with_sep(0, ", "))
        }
        "name_partial_spelling" => {
            let spelled = spoken_first
                .chars()
                .filter(|c| c.is_alphabetic())
                .map(|c| c.to_uppercase().to_string())
                .collect::<Vec<_>>()
                .join("-");
            return Ok(Body::new(vec![
                unit(spoken_first, Class::Name),
                unit("that's", Class::Other),
                unit(spelled, Class::Other),
                unit(last, Class::Name),
            ])
            .with_sep(0, ", "));
        }
        "rushed" => vec![unit(format!("{spoken_first}{last}"), Class::Other)],
        _ => {
            let head = if has("name_with_title") {
                format!("{} {spoken_first}", p.pick(TITLES))
            } else {
                spoken_first.clone()
            };
            let mut units = vec![unit(head, Class::Name)];
            if has("name_with_middle") {
                let pool: Vec<&str> =
                    MIDDLE_NAMES.iter().copied().filter(|m| *m != first && *m != spoken_first && *m != last).collect();
                units.push(unit(p.pick(&pool), Class::Name));
            } else if has("name_with_initials") {
                units.push(unit(p.pick(INITIALS), Class::Other));
            }
            let tail = if has("name_with_suffix") { format!("{last} {}", p.pick(SUFFIXES)) } else { last };
            units.push(unit(tail, Class::Name));
            units
        }
    };
    Ok(Body::new(units))
}

fn wrong_unit(u: &Unit, value: &EntityValue, p: &mut Picker) -> Option<String> {
    match u.class {
        Class::Digit(d) => Some(digit_word((d + 1 + p.index(9) as u32) % 10).to_string()),
        Class::Pair(n) => {
            let teens: Vec<&str> =
                TEEN_WORDS.iter().enumerate().filter(|(i, _)| 10 + *i as u32 != n).map(|(_, w)| *w).collect();
            Some(p.pick(&teens).to_string())
        }
        Class::Month(m) => {
            let other = (m + p.index(11) as u32) % 12 + 1;
            Some(title_case(lexicon::month_name(other)))
        }
        Class::Written => {
            let mut bytes = u.text.clone().into_bytes();
            let at = p.index(bytes.len());
            let d = u32::from(bytes[at] - b'0');
            bytes[at] = b'0' + ((d + 1 + p.index(9) as u32) % 10) as u8;
            String::from_utf8(bytes).ok()
        }
        Class::Name => Some(wrong_name(value, p)),
        Class::Other => None,
    }
}

fn wrong_name(value: &EntityValue, p: &mut Picker) -> String {
    let pool: Vec<&str> = FIRST_NAMES.iter().copied().filter(|n| !n.eq_ignore_ascii_case(&value.canonical)).collect();
    p.pick(&pool).to_string()
}

const CORRECTION_CUES: &[&str] = &["no wait", "sorry", "actually"];

fn correction(value: &EntityValue, id: &str, body: &Body, p: &mut Picker) -> Result<String, RenderError> {
    let cue = p.pick(CORRECTION_CUES);
    if value.kind == EntityKind::PersonName {
        let wrong = wrong_name(value, p);
        return Ok(body.wrap(format!("{wrong}... {cue}, {}", body.text())));
    }
    let n = body.units.len();
    let mid = n / 2;
    let order = (mid..n).chain((0..mid).rev());
    let mut chosen = None;
    for k in order {
        if let Some(wrong) = wrong_unit(&body.units[k], value, p) {
            chosen = Some((k, wrong));
            break;
        }
    }
    let (k, wrong) = chosen.ok_or_else(|| unrepresentable(id, value))?;
    let mut out = body.join(0, k);
    if k > 0 {
        // the comma survives the retraction and keeps "twenty" apart from what follows
        if ends_in_bare_tens(&body.units[k - 1].text) {
            out.push_str(", ");
        } else {
            out.push_str(&body.seps[k - 1]);
        }
    }
    out.push_str(&format!("{wrong}... {cue}, {}", body.join(k, n)));
    Ok(body.wrap(out))
}

/// Applies the plan's modifier. Text whose comma segments repeat by accident is
/// refused, since the parser reads an adjacent repeat as a restart.
pub(crate) fn apply_modifier(
    value: &EntityValue,
    plan: &Plan<'_>,
    body: Body,
    p: &mut Picker,
) -> Result<String, RenderError> {
    let out = modify(value, plan, body, p)?;
    let intended = usize::from(matches!(plan.modifier, Some("repetition" | "with_repetition")));
    let segments: Vec<&str> = out.split(", ").collect();
    let repeats = segments.windows(2).filter(|w| w[0] == w[1] && w[0].split_whitespace().count() >= 2).count();
    if repeats > intended {
        return Err(unrepresentable(plan.modifier.unwrap_or(plan.body), value));
    }
    Ok(out)
}

fn modify(value: &EntityValue, plan: &Plan<'_>, mut body: Body, p: &mut Picker) -> Result<String, RenderError> {
    let Some(id) = plan.modifier else {
        return Ok(body.wrap(body.text()));
    };
    let n = body.units.len();
    let un = || unrepresentable(id, value);
    let too_short = |min: usize| {
        if n < min {
            Err(RenderError::UnsupportedCombination { a: plan.body.to_string(), b: id.to_string() })
        } else {
            Ok(())
        }
    };
    match id {
        "hesitation" | "with_hesitation" => {
            too_short(2)?;
            if id == "with_hesitation" && !body.units.iter().all(|u| matches!(u.class, Class::Digit(_))) {
                return Err(un());
            }
            let upto = if id == "hesitation" && n < 3 { n } else { n - 1 };
            for i in 0..upto {
                body.units[i].text.push_str("...");
                if i < n - 1 {
                    body.seps[i] = " ".into();
                }
            }
            Ok(body.wrap(body.text()))
        }
        "pause" => {
            too_short(2)?;
            body.seps[n / 2 - 1] = ", pause, ".into();
            Ok(body.wrap(body.text()))
        }
        "with_pause" => {
            too_short(3)?;
            for i in (1..n - 1).step_by(2) {
                body.units[i].text.push_str("...");
                body.seps[i] = " ".into();
            }
            Ok(body.wrap(body.text()))
        }
        "repetition" | "with_repetition" => {
            too_short(2)?;
            if body.seps[0] != " " {
                return Err(un());
            }
            let chunk = body.join(0, 2);
            let rest = body.join(2, n);
            let mut out = format!("{chunk}, {chunk}");
            if !rest.is_empty() {
                out.push_str(", ");
                out.push_str(&rest);
            }
            Ok(body.wrap(out))
        }
        "correction" | "with_correction" => correction(value, id, &body, p),
        "name_with_correction" => {
            let wrong = wrong_name(value, p);
            Ok(body.wrap(format!("{wrong}—no, I mean {}", body.text())))
        }
        "filler_or_correction" => {
            if p.coin() {
                let filler = p.pick(&["uh", "um"]);
                Ok(body.wrap(format!("{filler}, {}", body.text())))
            } else {
                correction(value, id, &body, p)
            }
        }
        "with_filler" => {
            too_short(2)?;
            let k = n / 2;
            Ok(body.wrap(format!("um, {}, you know, {}", body.join(0, k), body.join(k, n))))
        }
        _ => Err(un()),
    }
}
