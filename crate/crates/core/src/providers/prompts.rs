//! Request builders for every provider-backed step.
//!
//! The classification prompt is our own reconstruction; no reference wording exists
//! for it.

use crate::domain::{EntityKind, EntityValue, FieldSpec};
use crate::taxonomy::VariationType;

use super::{ChatRequest, ExpectedShape, FailureCase, TaskContext};

const JSON_ONLY: &str = "Reply with the raw payload only. No markdown, no commentary.";

fn bullet_list<I: IntoIterator<Item = String>>(items: I) -> String {
    items.into_iter().map(|s| format!("- {s}\n")).collect()
}

pub fn values_request(spec: &FieldSpec, count: usize) -> ChatRequest {
    let user = format!(
        "Field name: {}\nField description: {}\nQuestion: {}\nExpected output type: {}\nNumber of values: {count}\n\n\
         Produce {count} distinct, realistic values for this field.\n\
         Format: {{\"values\": [\"value_1\", \"value_2\"]}}",
        spec.field_name, spec.description, spec.question, spec.output_type
    );
    ChatRequest::new(
        format!("You create sample values for structured form fields. {JSON_ONLY}"),
        user,
        ExpectedShape::ValuesPayload,
    )
    .with_task(TaskContext::Values { spec: spec.clone(), count })
}

pub fn transcripts_request(
    spec: &FieldSpec,
    value: &EntityValue,
    variations: &[&VariationType],
    existing: &[String],
    count: usize,
) -> ChatRequest {
    let ids: Vec<String> = variations.iter().map(|v| v.id.clone()).collect();
    let mut kind_notes = String::new();
    match value.kind {
        EntityKind::DateOfBirth => kind_notes.push_str(
            "- Dates may be spoken as words or as bare digit strings, e.g. \"January fifth, 1989\" or \"1589\".\n",
        ),
        EntityKind::PersonName => kind_notes.push_str("- Follow the first name with a plausible surname.\n"),
        _ => {}
    }
    let user = format!(
        "Question: {}\nOutput type: {}\nTarget value: {}\nAlready written (do not repeat):\n{}\
         Variation types: {}\nVariation instructions:\n{}\n\
         Write {count} new caller answers to the question. Each answer must state the target value \
         exactly; vary only the wording.\n{kind_notes}\
         - Tag each answer with one or more of the variation types above, or \"not_listed\" if none fits.\n\
         - Spread answers evenly over the variation types.\n\n\
         Format: {{\"transcripts\": [{{\"transcript\": \"...\", \"variation_types\": [\"...\"]}}]}}",
        spec.question,
        spec.output_type,
        value.canonical,
        bullet_list(existing.iter().cloned()),
        ids.join(", "),
        bullet_list(variations.iter().map(|v| format!("{}: {} e.g. \"{}\"", v.id, v.instruction, v.example))),
    );
    ChatRequest::new(
        format!("You write short spoken answers from phone calls. {JSON_ONLY}"),
        user,
        ExpectedShape::TranscriptsPayload,
    )
    .with_task(TaskContext::Transcripts {
        value: value.clone(),
        variation_ids: ids,
        count,
        existing: existing.to_vec(),
    })
}

pub fn verdict_request(spec: &FieldSpec, transcript: &str, truth: &str) -> ChatRequest {
    let user = format!(
        "Transcript: {transcript}\nGround truth: {truth}\nField: {}\n\n\
         Can the ground truth be recovered from the transcript?\n\
         - A value stated anywhere counts, including after a self-correction.\n\
         - Vague answers or answers that never state the value do not count.\n\
         - Dates may appear as continuous digits (01-15-2024 as 01152024 or 11524) or as spoken digits.\n\n\
         Answer with exactly one word: true or false.",
        spec.field_name
    );
    ChatRequest::new("You check whether a value is present in a transcript.", user, ExpectedShape::BooleanVerdict)
        .with_task(TaskContext::Verdict {
            kind: spec.kind.clone(),
            transcript: transcript.to_string(),
            truth: truth.to_string(),
        })
}

pub fn classification_request(transcript: &str, kind: &EntityKind, entries: &[&VariationType]) -> ChatRequest {
    let user = format!(
        "Entity kind: {kind}\nTranscript: {transcript}\n\nVariation types:\n{}\n\
         List every variation type the transcript exhibits. Use \"not_listed\" when none applies.\n\
         Format: [\"type_a\", \"type_b\"]",
        bullet_list(entries.iter().map(|v| format!("{}: {} e.g. \"{}\"", v.id, v.instruction, v.example))),
    );
    ChatRequest::new(format!("You label how a spoken answer is phrased. {JSON_ONLY}"), user, ExpectedShape::TagArray)
        .with_task(TaskContext::Tags { kind: kind.clone(), transcript: transcript.to_string() })
}

/// The starting extraction instruction for a field.
pub fn base_instruction(spec: &FieldSpec) -> String {
    let mut text = format!(
        "Pull the requested value out of the caller's answer.\nQuestion: {}\nField type: {}\nField description: {}\n\
         Reply with the value alone, without labels or punctuation.",
        spec.question, spec.output_type, spec.description
    );
    match spec.kind {
        EntityKind::ZipCode => text.push_str(
            "\nZIP codes are exactly 5 numeric digits. Never read them as dates. \"one two three four five\" is 12345.",
        ),
        EntityKind::DateOfBirth => text.push_str("\nWrite dates as MM-DD-YYYY."),
        EntityKind::PersonName => text.push_str("\nReturn the first name only."),
        EntityKind::Extension(_) => {}
    }
    text
}

pub fn extraction_request(spec: &FieldSpec, instruction: &str, transcript: &str) -> ChatRequest {
    ChatRequest::new(instruction, format!("transcript: \"{transcript}\"\npredicted:"), ExpectedShape::FreeText)
        .with_task(TaskContext::Extract {
            spec: spec.clone(),
            instruction: instruction.to_string(),
            transcript: transcript.to_string(),
        })
}

/// Asks for one revised instruction. `variant` distinguishes sibling requests.
pub fn mutation_request(instruction: &str, failures: &[FailureCase], variant: usize) -> ChatRequest {
    let cases = bullet_list(failures.iter().map(|f| {
        format!(
            "transcript: \"{}\" | expected: \"{}\" | got: \"{}\"",
            f.transcript,
            f.gold,
            f.predicted.as_deref().unwrap_or("")
        )
    }));
    let user = format!(
        "Current instruction:\n{instruction}\n\nCases it got wrong:\n{cases}\n\
         Write revision #{} of the instruction so these cases come out right. \
         Reply with the full revised instruction only.",
        variant + 1
    );
    ChatRequest::new("You improve extraction instructions.", user, ExpectedShape::FreeText)
        .with_task(TaskContext::Mutate { instruction: instruction.to_string(), failures: failures.to_vec(), variant })
}
