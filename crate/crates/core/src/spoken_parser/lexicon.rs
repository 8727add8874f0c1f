//! Word tables shared by the parser, the renderer and the rule classifier.

pub const DIGIT_WORDS: [&str; 10] = ["zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine"];

pub const TEEN_WORDS: [&str; 10] =
    ["ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen"];

/// Index 0 and 1 are unused so that `TENS_WORDS[d]` names `d * 10`.
pub const TENS_WORDS: [&str; 10] =
    ["", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"];

pub const MONTHS: [&str; 12] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];

const MONTH_ABBREVIATIONS: [&str; 12] =
    ["jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"];

const ORDINAL_UNITS: [&str; 20] = [
    "",
    "first",
    "second",
    "third",
    "fourth",
    "fifth",
    "sixth",
    "seventh",
    "eighth",
    "ninth",
    "tenth",
    "eleventh",
    "twelfth",
    "thirteenth",
    "fourteenth",
    "fifteenth",
    "sixteenth",
    "seventeenth",
    "eighteenth",
    "nineteenth",
];

pub const FILLERS: &[&str] = &["um", "umm", "uh", "uhh", "uhm", "er", "erm", "hmm", "mm", "ah", "pause"];

/// Multi-word fillers, merged into a single token by the tokenizer.
pub const FILLER_PHRASES: &[&[&str]] = &[&["you", "know"], &["let", "me", "see"]];

/// Phrases that retract what was said just before them.
pub const CORRECTION_PHRASES: &[&[&str]] =
    &[&["no", "wait"], &["i", "mean"], &["scratch", "that"], &["no"], &["wait"], &["actually"], &["sorry"]];

/// Phrases that announce the digits were spoken back to front.
pub const REVERSAL_CUES: &[&str] = &["backwards", "backward", "reversed", "reverse"];

pub fn digit_value(word: &str) -> Option<u32> {
    match word {
        "oh" | "o" => Some(0),
        _ => DIGIT_WORDS.iter().position(|w| *w == word).map(|d| d as u32),
    }
}

pub fn teen_value(word: &str) -> Option<u32> {
    TEEN_WORDS.iter().position(|w| *w == word).map(|d| 10 + d as u32)
}

pub fn tens_value(word: &str) -> Option<u32> {
    TENS_WORDS.iter().enumerate().skip(2).find(|(_, w)| **w == word).map(|(d, _)| d as u32 * 10)
}

pub fn is_number_word(word: &str) -> bool {
    digit_value(word).is_some()
        || teen_value(word).is_some()
        || tens_value(word).is_some()
        || matches!(word, "hundred" | "thousand" | "double" | "triple")
}

pub fn month_number(word: &str) -> Option<u32> {
    let w = word.trim_end_matches('.');
    MONTHS
        .iter()
        .position(|m| *m == w)
        .or_else(|| MONTH_ABBREVIATIONS.iter().position(|m| *m == w))
        .or_else(|| (w == "sept").then_some(8))
        .map(|i| i as u32 + 1)
}

/// Value of a single-word ordinal: "second" → 2, "twentieth" → 20, "31st" → 31.
pub fn ordinal_value(word: &str) -> Option<u32> {
    if let Some(i) = ORDINAL_UNITS.iter().position(|w| !w.is_empty() && *w == word) {
        return Some(i as u32);
    }
    match word {
        "twentieth" => return Some(20),
        "thirtieth" => return Some(30),
        _ => {}
    }
    let digits = word.trim_end_matches(|c: char| c.is_ascii_alphabetic());
    let suffix = &word[digits.len()..];
    if !digits.is_empty()
        && digits.len() <= 2
        && digits.bytes().all(|b| b.is_ascii_digit())
        && matches!(suffix, "st" | "nd" | "rd" | "th")
    {
        return digits.parse().ok();
    }
    None
}

pub fn ordinal_word(n: u32) -> String {
    match n {
        1..=19 => ORDINAL_UNITS[n as usize].to_string(),
        20 => "twentieth".into(),
        30 => "thirtieth".into(),
        21..=29 | 31 => format!("{}-{}", TENS_WORDS[(n / 10) as usize], ORDINAL_UNITS[(n % 10) as usize]),
        _ => n.to_string(),
    }
}

/// Cardinal words for 0..=99 ("seven", "twelve", "thirty-four").
pub fn cardinal_under_100(n: u32) -> String {
    match n {
        0..=9 => DIGIT_WORDS[n as usize].to_string(),
        10..=19 => TEEN_WORDS[(n - 10) as usize].to_string(),
        _ if n.is_multiple_of(10) => TENS_WORDS[(n / 10) as usize].to_string(),
        _ => format!("{}-{}", TENS_WORDS[(n / 10) as usize], DIGIT_WORDS[(n % 10) as usize]),
    }
}

pub fn month_name(month: u32) -> &'static str {
    MONTHS[(month - 1) as usize]
}

/// Nickname → formal first name.
pub const NICKNAMES: &[(&str, &str)] = &[
    ("johnny", "John"),
    ("jim", "James"),
    ("jimmy", "James"),
    ("bill", "William"),
    ("billy", "William"),
    ("will", "William"),
    ("bob", "Robert"),
    ("bobby", "Robert"),
    ("rob", "Robert"),
    ("mike", "Michael"),
    ("mikey", "Michael"),
    ("dave", "David"),
    ("davey", "David"),
    ("tom", "Thomas"),
    ("tommy", "Thomas"),
    ("chris", "Christopher"),
    ("dan", "Daniel"),
    ("danny", "Daniel"),
    ("matt", "Matthew"),
    ("joe", "Joseph"),
    ("joey", "Joseph"),
    ("tony", "Anthony"),
    ("steve", "Steven"),
    ("rick", "Richard"),
    ("ricky", "Richard"),
    ("ed", "Edward"),
    ("eddie", "Edward"),
    ("andy", "Andrew"),
    ("ben", "Benjamin"),
    ("sam", "Samuel"),
    ("nick", "Nicholas"),
    ("alex", "Alexander"),
    ("charlie", "Charles"),
    ("chuck", "Charles"),
    ("liz", "Elizabeth"),
    ("beth", "Elizabeth"),
    ("betty", "Elizabeth"),
    ("kate", "Katherine"),
    ("katie", "Katherine"),
    ("kathy", "Katherine"),
    ("jenny", "Jennifer"),
    ("jen", "Jennifer"),
    ("sue", "Susan"),
    ("suzy", "Susan"),
    ("patty", "Patricia"),
    ("trish", "Patricia"),
    ("maggie", "Margaret"),
    ("peggy", "Margaret"),
    ("debbie", "Deborah"),
    ("becky", "Rebecca"),
    ("abby", "Abigail"),
    ("mandy", "Amanda"),
    ("vicky", "Victoria"),
    ("cindy", "Cynthia"),
    ("barb", "Barbara"),
];

pub fn formal_name(nickname: &str) -> Option<&'static str> {
    let lower = nickname.to_lowercase();
    NICKNAMES.iter().find(|(n, _)| *n == lower).map(|(_, f)| *f)
}

pub fn nicknames_of(formal: &str) -> Vec<&'static str> {
    NICKNAMES.iter().filter(|(_, f)| f.eq_ignore_ascii_case(formal)).map(|(n, _)| *n).collect()
}

/// First names the mock value generator draws from; each has at least one nickname.
pub const FIRST_NAMES: &[&str] = &[
    "John",
    "James",
    "William",
    "Robert",
    "Michael",
    "David",
    "Thomas",
    "Christopher",
    "Daniel",
    "Matthew",
    "Joseph",
    "Anthony",
    "Steven",
    "Richard",
    "Edward",
    "Andrew",
    "Benjamin",
    "Samuel",
    "Nicholas",
    "Alexander",
    "Charles",
    "Elizabeth",
    "Katherine",
    "Jennifer",
    "Susan",
    "Patricia",
    "Margaret",
    "Deborah",
    "Rebecca",
    "Abigail",
    "Amanda",
    "Victoria",
    "Cynthia",
    "Barbara",
];

pub const MIDDLE_NAMES: &[&str] = &["Michael", "Marie", "Lee", "Ann", "Ray", "Lynn", "Paul", "Grace", "Allen", "Rose"];

/// Fixed surname pool used for seeded last names.
pub const SURNAMES: &[&str] = &[
    "Smith",
    "Johnson",
    "Williams",
    "Brown",
    "Jones",
    "Garcia",
    "Miller",
    "Davis",
    "Rodriguez",
    "Martinez",
    "Hernandez",
    "Lopez",
    "Gonzalez",
    "Wilson",
    "Anderson",
    "Taylor",
    "Moore",
    "Jackson",
    "Martin",
    "Lee",
    "Perez",
    "Thompson",
    "White",
    "Harris",
    "Sanchez",
    "Clark",
    "Ramirez",
    "Lewis",
    "Robinson",
    "Walker",
    "Young",
    "Allen",
    "King",
    "Wright",
    "Scott",
    "Torres",
    "Nguyen",
    "Hill",
    "Flores",
    "Green",
    "Adams",
    "Nelson",
    "Baker",
    "Hall",
    "Rivera",
    "Campbell",
    "Mitchell",
    "Carter",
    "Roberts",
    "Patel",
];

pub const APOSTROPHE_SURNAMES: &[&str] = &["O'Connor", "O'Brien", "D'Angelo", "O'Neil", "O'Hara", "D'Souza"];

pub const NAME_SUFFIXES: &[&str] = &["Jr", "Sr", "II", "III", "IV"];

/// Words that never count as a name token, whatever their casing.
pub const NAME_STOPWORDS: &[&str] = &[
    "i",
    "i'm",
    "im",
    "it",
    "it's",
    "its",
    "is",
    "my",
    "name",
    "name's",
    "names",
    "the",
    "this",
    "that",
    "that's",
    "thats",
    "full",
    "first",
    "last",
    "middle",
    "call",
    "me",
    "you",
    "can",
    "am",
    "a",
    "an",
    "and",
    "yes",
    "yeah",
    "yep",
    "yup",
    "no",
    "sure",
    "okay",
    "ok",
    "please",
    "thanks",
    "thank",
    "confirmed",
    "correct",
    "right",
    "definitely",
    "certainly",
    "absolutely",
    "carefully",
    "slowly",
    "think",
    "believe",
    "maybe",
    "probably",
    "not",
    "so",
    "well",
    "um",
    "uh",
    "umm",
    "uhm",
    "er",
    "erm",
    "hmm",
    "ah",
    "pause",
    "know",
    "mean",
    "wait",
    "actually",
    "sorry",
    "does",
    "make",
    "sense",
    "hello",
    "hi",
    "hey",
    "spelled",
    "spell",
    "spelling",
    "let",
    "see",
    "say",
    "again",
    "would",
    "be",
    "of",
    "for",
    "record",
    "course",
    "just",
    "goes",
    "by",
    "called",
    "go",
    "gotta",
    "oh",
];

pub const TITLE_WORDS: &[&str] = &["mr", "mrs", "ms", "miss", "mx", "dr", "prof", "professor", "sir", "madam", "rev"];
