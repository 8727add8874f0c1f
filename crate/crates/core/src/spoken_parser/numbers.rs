//! Assembly of spoken number words into digit strings.

use super::lexicon;
use super::tokens::{Token, TokenClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Atom<'a> {
    Digit(u32),
    Written(&'a str),
    Teen(u32),
    Tens(u32),
    Hundred,
    Thousand,
    Repeat(usize),
    And,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Open {
    /// Accepts "and", a teen or a tens word.
    Open,
    /// Saw a tens word; accepts one unit digit.
    Tens,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Group {
    Digit(u32),
    Written(String),
    Teen(u32),
    /// A tens word not yet combined with a unit ("thirty").
    Tens(u32),
    /// A tens word combined with its unit ("thirty-four").
    Compound(u32),
    Hundreds {
        value: u32,
        open: Open,
    },
    Thousands {
        value: u32,
        open: Open,
    },
}

impl Group {
    pub fn digits(&self) -> String {
        match self {
            Group::Digit(d) => d.to_string(),
            Group::Written(s) => s.clone(),
            Group::Teen(n) | Group::Tens(n) | Group::Compound(n) => n.to_string(),
            Group::Hundreds { value, .. } => format!("{value:03}"),
            Group::Thousands { value, .. } => format!("{value:04}"),
        }
    }

    /// Numeric value for groups that denote a single spoken number.
    pub fn value(&self) -> Option<u32> {
        match self {
            Group::Digit(d) => Some(*d),
            Group::Written(s) if s.len() <= 4 => s.parse().ok(),
            Group::Written(_) => None,
            Group::Teen(n) | Group::Tens(n) | Group::Compound(n) => Some(*n),
            Group::Hundreds { value, .. } | Group::Thousands { value, .. } => Some(*value),
        }
    }

    fn multiplier_base(&self) -> Option<u32> {
        match self {
            Group::Digit(d) => Some(*d),
            Group::Teen(n) | Group::Tens(n) | Group::Compound(n) => Some(*n),
            _ => None,
        }
    }
}

/// A maximal stretch of number tokens, as token indices `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumberRun {
    pub start: usize,
    pub end: usize,
    pub groups: Vec<Group>,
}

impl NumberRun {
    pub fn digits(&self) -> String {
        self.groups.iter().map(Group::digits).collect()
    }
}

fn atom_of(token: &Token) -> Option<Atom<'_>> {
    let lower = token.surface.to_lowercase();
    match token.class {
        TokenClass::DigitWord => {
            if token.surface.bytes().all(|b| b.is_ascii_digit()) {
                Some(Atom::Written(token.surface.as_str()))
            } else {
                lexicon::digit_value(&lower).map(Atom::Digit)
            }
        }
        TokenClass::NumberWord => match lower.as_str() {
            "hundred" => Some(Atom::Hundred),
            "thousand" => Some(Atom::Thousand),
            "double" => Some(Atom::Repeat(2)),
            "triple" => Some(Atom::Repeat(3)),
            w => lexicon::teen_value(w).map(Atom::Teen).or_else(|| lexicon::tens_value(w).map(Atom::Tens)),
        },
        _ => None,
    }
}

fn is_transparent(token: &Token) -> bool {
    match token.class {
        TokenClass::Filler => true,
        TokenClass::Punct => matches!(token.surface.as_str(), "," | ";" | "..." | "—"),
        _ => false,
    }
}

/// Splits a token slice into number runs. Fillers, commas, ellipses and dashes
/// do not interrupt a run; any other word or sentence punctuation does.
pub fn number_runs(tokens: &[Token]) -> Vec<NumberRun> {
    let mut runs = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if atom_of(&tokens[i]).is_none() {
            i += 1;
            continue;
        }
        let start = i;
        let mut atoms: Vec<(Atom<'_>, bool, bool)> = Vec::new();
        let mut last_atom_end = i;
        let mut separated = false;
        while i < tokens.len() {
            let token = &tokens[i];
            if let Some(atom) = atom_of(token) {
                atoms.push((atom, separated, token.joined));
                separated = false;
                last_atom_end = i + 1;
                i += 1;
            } else if token.lower() == "and" && matches!(atoms.last(), Some((Atom::Hundred | Atom::Thousand, _, _))) {
                atoms.push((Atom::And, separated, false));
                i += 1;
            } else if is_transparent(token) {
                separated = true;
                i += 1;
            } else {
                break;
            }
        }
        i = last_atom_end;
        runs.push(NumberRun { start, end: last_atom_end, groups: assemble(&atoms) });
    }
    runs
}

/// Folds atoms `(atom, separated_from_previous, hyphen_joined)` into groups.
fn assemble(atoms: &[(Atom<'_>, bool, bool)]) -> Vec<Group> {
    let mut groups: Vec<Group> = Vec::new();
    let mut repeat: Option<usize> = None;
    let mut and_pending = false;
    for &(atom, separated, joined) in atoms {
        if let Some(n) = repeat.take() {
            let unit = match atom {
                Atom::Digit(d) => Some(Group::Digit(d)),
                Atom::Teen(t) => Some(Group::Teen(t)),
                Atom::Written(w) => Some(Group::Written(w.to_string())),
                _ => None,
            };
            if let Some(unit) = unit {
                groups.extend(std::iter::repeat_n(unit, n));
                continue;
            }
        }
        let last = groups.last_mut();
        match atom {
            Atom::Repeat(n) => repeat = Some(n),
            Atom::And => and_pending = true,
            Atom::Written(w) => groups.push(Group::Written(w.to_string())),
            Atom::Digit(d) => {
                let close_to_prev = joined || !separated;
                match last {
                    Some(slot @ Group::Tens(_)) if (1..=9).contains(&d) && close_to_prev => {
                        if let Group::Tens(t) = *slot {
                            *slot = Group::Compound(t + d);
                        }
                    }
                    Some(Group::Hundreds { value, open } | Group::Thousands { value, open })
                        if (*open == Open::Tens && close_to_prev && d > 0) || (*open == Open::Open && and_pending) =>
                    {
                        *value += d;
                        *open = Open::Closed;
                    }
                    Some(Group::Thousands { value, open }) if *open == Open::Open && *value % 100 == 0 => {
                        *value += d;
                        *open = Open::Closed;
                    }
                    _ => groups.push(Group::Digit(d)),
                }
            }
            Atom::Teen(n) => match last {
                Some(Group::Hundreds { value, open } | Group::Thousands { value, open }) if *open == Open::Open => {
                    *value += n;
                    *open = Open::Closed;
                }
                _ => groups.push(Group::Teen(n)),
            },
            Atom::Tens(n) => match last {
                Some(Group::Hundreds { value, open } | Group::Thousands { value, open }) if *open == Open::Open => {
                    *value += n;
                    *open = Open::Tens;
                }
                _ => groups.push(Group::Tens(n)),
            },
            Atom::Hundred => {
                if let Some(base) = last.as_ref().and_then(|g| g.multiplier_base()) {
                    *groups.last_mut().expect("non-empty") = Group::Hundreds { value: base * 100, open: Open::Open };
                }
            }
            Atom::Thousand => {
                let base = match last.as_ref() {
                    Some(Group::Hundreds { value, .. }) => Some(*value),
                    Some(g) => g.multiplier_base(),
                    None => None,
                };
                if let Some(base) = base {
                    *groups.last_mut().expect("non-empty") = Group::Thousands { value: base * 1000, open: Open::Open };
                }
            }
        }
        if !matches!(atom, Atom::And) {
            and_pending = false;
        }
    }
    groups
}
