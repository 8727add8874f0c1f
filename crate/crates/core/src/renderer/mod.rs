//! Rule-based verbalizer: canonical value plus variation ids to a spoken transcript.
//!
//! Every variation id plays one role. A *body* decides how the value itself is
//! spoken, a *decoration* adds name parts, a *modifier* disturbs the run of words
//! (hesitation, correction, repetition), and a *frame* wraps the answer in a lead-in
//! or a trailing question. At most one body and one modifier apply per render.

mod bodies;
mod frames;
mod words;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::domain::{EntityKind, EntityValue, Provenance, Transcript};
use crate::spoken_parser::lexicon;
use crate::taxonomy::VariationRegistry;

pub use words::{number_to_spoken, Grouping};

/// Upper bound on variation ids combined in one transcript.
pub const MAX_VARIATIONS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("no variation ids requested")]
    Empty,
    #[error("{count} variation ids requested, at most {MAX_VARIATIONS} are supported")]
    TooMany { count: usize },
    #[error("variation `{id}` does not apply to {kind}")]
    UnknownVariation { id: String, kind: EntityKind },
    #[error("variations `{a}` and `{b}` cannot be combined")]
    UnsupportedCombination { a: String, b: String },
    #[error("variation `{id}` cannot express value `{value}`")]
    Unrepresentable { id: String, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderRequest {
    pub value: EntityValue,
    pub variation_ids: Vec<String>,
    pub seed: u64,
}

impl RenderRequest {
    pub fn new<I, S>(value: EntityValue, ids: I, seed: u64) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        RenderRequest { value, variation_ids: ids.into_iter().map(Into::into).collect(), seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Role {
    Body,
    Decoration,
    Modifier,
    Frame,
}

pub(crate) fn role(id: &str) -> Role {
    match id {
        "hesitation"
        | "with_hesitation"
        | "pause"
        | "with_pause"
        | "repetition"
        | "with_repetition"
        | "correction"
        | "with_correction"
        | "name_with_correction"
        | "filler_or_correction"
        | "with_filler" => Role::Modifier,
        "filler_words"
        | "formal"
        | "casual"
        | "polite"
        | "confident"
        | "uncertain"
        | "careful"
        | "confirmation"
        | "clarification"
        | "brief_confirmation"
        | "concise_confirmation"
        | "zip_formal"
        | "zip_casual"
        | "zip_polite"
        | "zip_confident"
        | "zip_uncertain"
        | "name_with_prefix" => Role::Frame,
        "name_with_title"
        | "name_with_middle"
        | "name_with_suffix"
        | "name_with_initials"
        | "name_with_apostrophe"
        | "name_hyphenated"
        | "nickname" => Role::Decoration,
        _ => Role::Body,
    }
}

/// Pairs that never combine, in either order.
const CONFLICTS: &[(&str, &str)] = &[
    // a reversed run cannot carry an in-run correction or repeat
    ("reversed", "correction"),
    ("reversed", "with_correction"),
    ("reversed", "repetition"),
    ("reversed", "with_repetition"),
    // one opening phrase per answer
    ("formal", "casual"),
    ("formal", "zip_casual"),
    ("zip_formal", "casual"),
    ("zip_formal", "zip_casual"),
    ("brief_confirmation", "concise_confirmation"),
    ("concise_confirmation", "zip_casual"),
    ("confident", "uncertain"),
    ("confident", "zip_uncertain"),
    ("zip_confident", "uncertain"),
    ("zip_confident", "zip_uncertain"),
    ("name_with_prefix", "zip_formal"),
    // name shapes
    ("name_with_middle", "name_with_initials"),
    ("name_with_apostrophe", "name_hyphenated"),
    ("name_reverse_order", "name_with_title"),
    ("name_reverse_order", "name_with_middle"),
    ("name_reverse_order", "name_with_initials"),
    ("name_reverse_order", "name_with_suffix"),
    ("name_reverse_order", "hesitation"),
    ("name_reverse_order", "pause"),
    ("name_reverse_order", "with_pause"),
    ("name_partial_spelling", "name_with_title"),
    ("name_partial_spelling", "name_with_middle"),
    ("name_partial_spelling", "name_with_initials"),
    ("name_partial_spelling", "name_with_suffix"),
    ("rushed", "name_with_title"),
    ("rushed", "name_with_middle"),
    ("rushed", "name_with_initials"),
    ("rushed", "name_with_suffix"),
    ("rushed", "name_with_apostrophe"),
    ("rushed", "name_hyphenated"),
    // per-digit disfluencies need single-digit words
    ("with_hesitation", "grouped_two"),
    ("with_hesitation", "grouped_three"),
    ("with_hesitation", "hundred"),
    ("with_hesitation", "mixed_grouping"),
    ("with_hesitation", "spoken_number_split"),
    ("with_hesitation", "spelled_out"),
    ("with_hesitation", "rushed"),
    ("spelled_out", "with_pause"),
    ("spelled_out", "with_filler"),
    ("spelled_out", "rushed"),
];

pub fn conflicts(a: &str, b: &str) -> bool {
    if a == b {
        return false;
    }
    if a == "direct_and_simple" || b == "direct_and_simple" {
        return true;
    }
    let (ra, rb) = (role(a), role(b));
    if (ra == Role::Body && rb == Role::Body) || (ra == Role::Modifier && rb == Role::Modifier) {
        return true;
    }
    CONFLICTS.iter().any(|&(x, y)| (x == a && y == b) || (x == b && y == a))
}

pub(crate) fn registry() -> &'static VariationRegistry {
    static REGISTRY: OnceLock<VariationRegistry> = OnceLock::new();
    REGISTRY.get_or_init(VariationRegistry::builtin)
}

/// Seeded choices. The lead-in template follows `seed` directly so seed 0 gives the
/// plainest form; everything else draws from a stream keyed by the seed.
pub(crate) struct Picker {
    seed: u64,
    rng: ChaCha8Rng,
}

impl Picker {
    fn new(seed: u64) -> Self {
        Picker { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub(crate) fn template(&self, n: usize) -> usize {
        (self.seed % n as u64) as usize
    }

    pub(crate) fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub(crate) fn pick<'a, T: ?Sized>(&mut self, items: &[&'a T]) -> &'a T {
        items[self.index(items.len())]
    }

    pub(crate) fn coin(&mut self) -> bool {
        self.rng.gen_bool(0.5)
    }
}

pub(crate) struct Plan<'a> {
    pub body: &'a str,
    pub decorations: BTreeSet<&'a str>,
    pub modifier: Option<&'a str>,
    pub frames: BTreeSet<&'a str>,
    /// No body was requested; a plain one is chosen.
    pub implicit_body: bool,
}

fn default_body(kind: &EntityKind) -> &'static str {
    match kind {
        EntityKind::ZipCode => "digit_by_digit",
        EntityKind::DateOfBirth => "spoken_date_8_digits",
        _ => "name_with_last",
    }
}

fn plan<'a>(kind: &EntityKind, ids: &'a [String]) -> Result<Plan<'a>, RenderError> {
    let reg = registry();
    for id in ids {
        let applies = reg.get(id).is_some_and(|v| v.category.applies_to(kind)) && id != crate::domain::NOT_LISTED;
        if !applies {
            return Err(RenderError::UnknownVariation { id: id.clone(), kind: kind.clone() });
        }
    }
    for (i, a) in ids.iter().enumerate() {
        for b in &ids[i + 1..] {
            if conflicts(a, b) {
                return Err(RenderError::UnsupportedCombination { a: a.clone(), b: b.clone() });
            }
        }
    }
    let mut out = Plan {
        body: default_body(kind),
        implicit_body: true,
        decorations: BTreeSet::new(),
        modifier: None,
        frames: BTreeSet::new(),
    };
    for id in ids {
        match role(id) {
            Role::Body => {
                out.body = id;
                out.implicit_body = false;
            }
            Role::Decoration => {
                out.decorations.insert(id);
            }
            Role::Modifier => out.modifier = Some(id),
            Role::Frame => {
                out.frames.insert(id);
            }
        }
    }
    Ok(out)
}

/// Verbalizes `request.value` with every requested variation.
pub fn render(request: &RenderRequest) -> Result<Transcript, RenderError> {
    let mut ids: Vec<String> = Vec::new();
    for id in &request.variation_ids {
        if !ids.contains(id) {
            ids.push(id.clone());
        }
    }
    if ids.is_empty() {
        return Err(RenderError::Empty);
    }
    if ids.len() > MAX_VARIATIONS {
        return Err(RenderError::TooMany { count: ids.len() });
    }
    let kind = &request.value.kind;
    if !kind.is_builtin() {
        return Err(RenderError::Unrepresentable { id: ids[0].clone(), value: request.value.canonical.clone() });
    }
    let plan = plan(kind, &ids)?;
    let mut picker = Picker::new(request.seed);
    let body = bodies::build(&request.value, &plan, &mut picker)?;
    let text = bodies::apply_modifier(&request.value, &plan, body, &mut picker)?;
    let text = frames::wrap(kind, &plan, &text, &mut picker)?;
    Ok(Transcript {
        text,
        variation_tags: ids.into_iter().collect(),
        value: request.value.clone(),
        provenance: Provenance::RuleRendered,
    })
}

/// Whether `first` can be spoken without colliding with number, month or filler
/// words the parser reserves.
pub fn speakable_first_name(first: &str) -> bool {
    let lower = first.to_lowercase();
    !first.is_empty()
        && first.chars().all(|c| c.is_alphabetic() || c == '\'' || c == '-')
        && first.chars().next().is_some_and(char::is_uppercase)
        && !lexicon::is_number_word(&lower)
        && lexicon::month_number(&lower).is_none()
        && !lexicon::NAME_STOPWORDS.contains(&lower.as_str())
        && !lexicon::TITLE_WORDS.contains(&lower.trim_end_matches('.'))
        && !lexicon::FILLERS.contains(&lower.as_str())
        && lexicon::ordinal_value(&lower).is_none()
}
