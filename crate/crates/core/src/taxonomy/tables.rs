//! Built-in variation tables. Where the ZIP table reuses a general type name, the
//! ZIP entry is prefixed with `zip_` so ids stay unique.

use super::Category;
use crate::domain::EntityKind;

pub(super) type Row = (&'static str, &'static str, &'static str);

pub(super) const GENERAL: &[Row] = &[
    ("filler_words", "Include filler words like \"um\", \"uh\", \"you know\".", "um, it's one two three four five"),
    ("hesitation", "Include hesitations and pauses.", "it's... one... two... three..."),
    ("correction", "Include self-corrections.", "one two three... no wait, four five"),
    ("repetition", "Repeat parts for emphasis.", "one two three, one two three, four five"),
    ("pause", "Insert natural pauses.", "one two, pause, three four five"),
    ("formal", "Use formal, precise language.", "the number is one two three four five"),
    ("casual", "Use relaxed language.", "it's one two three four five"),
    ("polite", "Use polite language.", "please, it's one two three four five"),
    ("confident", "Sound confident.", "definitely one two three four five"),
    ("uncertain", "Sound unsure.", "I think it's one two three four five"),
    ("rushed", "Speak quickly.", "onetwothreefourfive"),
    ("careful", "Speak slowly and carefully.", "carefully, one two three four five"),
    ("confirmation", "Ask for confirmation.", "one two three four five, is that right?"),
    ("clarification", "Clarify the answer.", "one two three four five, does that make sense?"),
    ("direct_and_simple", "Be direct and simple.", "one two three four five"),
    ("brief_confirmation", "Use brief confirmation.", "yes, one two three four five"),
    ("concise_confirmation", "Use concise confirmation.", "confirmed, one two three four five"),
];

pub(super) const ZIP: &[Row] = &[
    ("digit_by_digit", "Say each digit separately.", "one two three four five"),
    ("grouped_two", "Group digits in twos.", "twelve thirty-four five"),
    ("grouped_three", "Group digits in threes.", "one twenty-three forty-five"),
    ("hundred", "Use \"hundred\".", "three hundred two five"),
    ("mixed_grouping", "Use mixed digit groupings.", "twelve three four five"),
    ("spoken_number_split", "Split number words into digits.", "thirty two five eight"),
    ("reversed", "Say digits in reverse.", "five four three two one"),
    ("with_pause", "Add pauses.", "one two... three four... five"),
    ("with_repetition", "Repeat groups.", "one two, one two, three four five"),
    ("with_correction", "Self-correct.", "one two three... no wait, four five"),
    ("with_hesitation", "Add hesitation.", "one... two... three... four... five"),
    ("with_filler", "Use filler words.", "um, one two three, you know, four five"),
    ("zip_formal", "Formal phrasing.", "the digits are one two three four five"),
    ("zip_casual", "Casual phrasing.", "yeah, it's one two three four five"),
    ("zip_polite", "Polite phrasing.", "please, it's one two three four five"),
    ("zip_confident", "Confident tone.", "definitely one two three four five"),
    ("zip_uncertain", "Uncertain tone.", "I think it's one two three four five"),
    ("spelled_out", "Spell digits with hyphens.", "one-two-three-four-five"),
];

pub(super) const DOB: &[Row] = &[
    ("date_as_4_digits", "4-digit format.", "1267 → 01-02-1967"),
    ("spoken_date_4_digits", "Spoken version of 4-digit.", "one two six seven → 01-02-1967"),
    ("date_as_5_digits", "5-digit format.", "32584 → 03-25-1984"),
    ("spoken_date_5_digits", "Spoken version of 5-digit.", "five one seven eight two → 05-17-1982"),
    ("date_as_6_digits", "6-digit format MMDDYY.", "120285 → 12-02-1985"),
    ("spoken_date_6_digits", "Spoken 6-digit format.", "one two zero two eight five → 12-02-1985"),
    ("date_as_8_digits", "Full 8-digit date.", "12021947 → 12-02-1947"),
    ("spoken_date_8_digits", "Spoken 8-digit format.", "one two zero two one nine four seven → 12-02-1947"),
    ("spoken_month_day_year", "Natural spoken format.", "January second, nineteen ninety"),
    ("mixed_spoken_and_digits", "Mixed formats.", "January zero two, nineteen ninety"),
    ("filler_or_correction", "Includes filler or correction.", "uh, zero one zero two one nine nine zero"),
    ("casual_or_polite_digits", "Casual/polite phrasing.", "please, one five, eighty five"),
];

pub(super) const NAME: &[Row] = &[
    ("name_with_last", "Full name.", "John Smith → John"),
    ("name_with_prefix", "Prefix + name.", "My name is John Smith → John"),
    ("name_reverse_order", "Last name first.", "Smith, John → John"),
    ("name_with_title", "Name with title.", "Mr. John Smith → John"),
    ("name_with_middle", "Name with middle.", "John Michael Smith → John"),
    ("name_with_suffix", "Name with suffix.", "John Smith Jr. → John"),
    ("name_with_initials", "Initials format.", "J. M. Smith → John"),
    ("name_with_correction", "Correction.", "James—no, I mean John Smith → John"),
    ("name_partial_spelling", "Partial spelling.", "John, that’s J-O-H-N Smith → John"),
    ("name_with_apostrophe", "Apostrophe in last name.", "O'Connor, John → John"),
    ("name_hyphenated", "Hyphenated last name.", "John Smith-Jones → John"),
    ("nickname", "Nickname.", "Johnny → John"),
];

pub(super) const NOT_LISTED_ROW: Row =
    (crate::domain::NOT_LISTED, "The transcript does not match any listed variation type.", "hello there");

pub(super) fn builtin_rows() -> impl Iterator<Item = (Category, &'static Row)> {
    GENERAL
        .iter()
        .map(|r| (Category::General, r))
        .chain(ZIP.iter().map(|r| (Category::Specific(EntityKind::ZipCode), r)))
        .chain(DOB.iter().map(|r| (Category::Specific(EntityKind::DateOfBirth), r)))
        .chain(NAME.iter().map(|r| (Category::Specific(EntityKind::PersonName), r)))
}
