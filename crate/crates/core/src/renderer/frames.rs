//! Lead-ins and trailing questions around a spoken value.

use super::{Picker, Plan, RenderError};
use crate::domain::EntityKind;

const LEAD_INS: [&str; 6] = ["", "sure, ", "okay, ", "so ", "that's ", "that would be "];
const FRAMED_LEAD_INS: [&str; 3] = ["", "sure, ", "okay, "];

fn confirm_words(id: &str) -> Option<&'static [&'static str]> {
    match id {
        "brief_confirmation" => Some(&["yes", "yep", "yeah"]),
        "concise_confirmation" => Some(&["confirmed", "correct"]),
        "zip_casual" => Some(&["yeah", "yep", "yup"]),
        _ => None,
    }
}

fn core_phrases(kind: &EntityKind, id: &str) -> Option<&'static [&'static str]> {
    match id {
        "casual" | "zip_casual" => Some(&["it's"]),
        "formal" => Some(match kind {
            EntityKind::ZipCode => &["the zip code is", "the number is", "the digits are", "the postal code is"],
            EntityKind::DateOfBirth => &["the date of birth is", "the date is", "the birth date is"],
            _ => &["the name is", "the full name is"],
        }),
        "zip_formal" => Some(&["the digits are", "the zip code is", "the postal code is"]),
        "name_with_prefix" => Some(&["my name is", "this is", "my name's", "it's", "the name is"]),
        _ => None,
    }
}

/// Picks one phrase allowed by every requesting frame; `None` if no frame asks.
fn agreed<'a>(
    plan: &Plan<'a>,
    options: impl Fn(&str) -> Option<&'static [&'static str]>,
    p: &mut Picker,
) -> Result<Option<&'static str>, RenderError> {
    let mut pool: Option<(&str, Vec<&'static str>)> = None;
    for id in &plan.frames {
        let Some(allowed) = options(id) else { continue };
        pool = Some(match pool {
            None => (id, allowed.to_vec()),
            Some((first, kept)) => {
                let kept: Vec<_> = kept.into_iter().filter(|w| allowed.contains(w)).collect();
                if kept.is_empty() {
                    return Err(RenderError::UnsupportedCombination { a: first.to_string(), b: id.to_string() });
                }
                (first, kept)
            }
        });
    }
    Ok(pool.map(|(_, kept)| p.pick(&kept)))
}

pub(crate) fn wrap(kind: &EntityKind, plan: &Plan<'_>, text: &str, p: &mut Picker) -> Result<String, RenderError> {
    let has = |id: &str| plan.frames.contains(id);
    let confirm = agreed(plan, confirm_words, p)?;
    let core = agreed(plan, |id| core_phrases(kind, id), p)?;

    let mut head = String::new();
    if let Some(w) = confirm {
        head.push_str(&format!("{w}, "));
    }
    if let Some(c) = core {
        head.push_str(&format!("{c} "));
    }
    let anchored = !head.is_empty();
    if has("filler_words") {
        head.push_str(&format!("{}, ", p.pick(&["um", "uh"])));
    }
    if has("polite") || has("zip_polite") {
        head.push_str("please, ");
    }
    if has("confident") || has("zip_confident") {
        head.push_str(&format!("{} ", p.pick(&["definitely", "absolutely"])));
    }
    if has("careful") {
        head.push_str(&format!("{}, ", p.pick(&["carefully", "slowly"])));
    }

    let mut tail: Vec<&str> = Vec::new();
    let uncertain = has("uncertain") || has("zip_uncertain");
    if uncertain && !anchored {
        head.push_str(&format!("{} ", p.pick(&["I think", "maybe"])));
    } else if uncertain {
        tail.push("I think");
    }
    if has("clarification") {
        tail.push(p.pick(&["does that make sense?", "just to be clear"]));
    }
    if has("confirmation") {
        tail.push(p.pick(&["is that right?", "is that correct?"]));
    }

    if plan.frames.is_empty() {
        head.push_str(LEAD_INS[p.template(LEAD_INS.len())]);
    } else if confirm.is_none() {
        head.insert_str(0, FRAMED_LEAD_INS[p.template(FRAMED_LEAD_INS.len())]);
    }
    let mut out = format!("{head}{text}");
    for part in tail {
        out.push_str(if out.ends_with('?') { " " } else { ", " });
        out.push_str(part);
    }
    Ok(out)
}
