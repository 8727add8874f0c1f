use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use varspeech_core::domain::{
    read_samples_jsonl, write_samples_jsonl, EntityKind, EntityValue, LabeledSample, Provenance, Split, Transcript,
};
use varspeech_core::evaluator::{self, metrics_table, Metrics, Prediction, SplitRatios};
use varspeech_core::generation::{self, GenerationConfig, ProviderMode};
use varspeech_core::optimizer::{
    self, Extractor, OptimizerConfig, OracleExtractor, ProviderExtractor, ProviderMutator,
};
use varspeech_core::providers::{prompts, ChatBackend, DEFAULT_MAX_RETRIES};
use varspeech_core::similarity::{self, OverlapCategory, SimilarityConfig, Synthesis};
use varspeech_core::taxonomy::{ClassifyMode, VariationRegistry};
use varspeech_core::validation::{ValidationMode, Validator};

use crate::config::{sub_seed, RunConfig};
use crate::error::CliError;
use crate::manifest::{self, Manifest, Sink};
use crate::{Cli, Command, Result};

struct Ctx {
    config: RunConfig,
    seed: u64,
    mode: ProviderMode,
    registry: VariationRegistry,
    sink: Sink,
    sub_seeds: BTreeMap<String, u64>,
}

impl Ctx {
    fn sub_seed(&mut self, label: &str) -> u64 {
        let s = sub_seed(self.seed, label);
        self.sub_seeds.insert(label.to_string(), s);
        s
    }

    fn kind(&self) -> Result<EntityKind> {
        let tag = self.config.kind.as_deref().unwrap_or("zip_code");
        tag.parse().map_err(|e: varspeech_core::domain::DomainError| CliError::Usage(e.to_string()))
    }

    fn chat(&mut self) -> Result<Box<dyn ChatBackend>> {
        let seed = self.sub_seed("provider");
        Ok(self.config.chat_profile(self.mode)?.chat_backend(seed)?)
    }
}

fn read_text(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Usage(format!("cannot read stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn read_samples(path: &Path) -> Result<Vec<LabeledSample>> {
    read_samples_jsonl(&read_text(path)?)
        .map_err(|(line, e)| CliError::Data(format!("{} line {line}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(|e| CliError::Data(e.to_string()))
}

fn single_kind(samples: &[LabeledSample]) -> Result<EntityKind> {
    let kinds: BTreeSet<&EntityKind> = samples.iter().map(|s| &s.value().kind).collect();
    match kinds.len() {
        0 => Err(CliError::Data("no samples".into())),
        1 => Ok(kinds.into_iter().next().cloned().unwrap_or(EntityKind::ZipCode)),
        _ => Err(CliError::Data("samples mix several entity kinds".into())),
    }
}

/// Folds command-line flags over the config file.
fn merge(cli: &Cli) -> Result<RunConfig> {
    let mut c = match &cli.global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let g = &cli.global;
    c.seed = g.seed.or(c.seed);
    c.mode = g.mode.or(c.mode);
    c.output_dir = g.out.clone().or(c.output_dir);
    c.parallelism = g.parallelism.or(c.parallelism);
    match &cli.command {
        Command::GenValues { kind, .. } | Command::GenTranscripts { kind, .. } | Command::Extract { kind, .. } => {
            c.kind = kind.clone().or(c.kind);
        }
        Command::Pipeline { kind, values, target, rounds, variations, validation } => {
            c.kind = kind.clone().or(c.kind);
            let gen = &mut c.generation;
            gen.num_values = values.or(gen.num_values);
            gen.target_per_pair = target.or(gen.target_per_pair);
            gen.max_rounds = rounds.or(gen.max_rounds);
            gen.variations = variations.clone().or(gen.variations.take());
            gen.validation = validation.or(gen.validation);
        }
        Command::Validate { validation, .. } => {
            c.generation.validation = validation.or(c.generation.validation);
        }
        Command::Split { ratios: Some(r), .. } => {
            let arr: [f64; 3] = r
                .as_slice()
                .try_into()
                .map_err(|_| CliError::Usage("--ratios takes three numbers: train,valid,test".into()))?;
            c.split = Some(arr);
        }
        Command::Optimize { base, iterations, batch_size, pool_size, mutations, .. } => {
            let o = &mut c.optimizer;
            o.base_instruction = base.clone().or(o.base_instruction.take());
            o.iterations = iterations.or(o.iterations);
            o.batch_size = batch_size.or(o.batch_size);
            o.pool_size = pool_size.or(o.pool_size);
            o.mutation_count = mutations.or(o.mutation_count);
        }
        _ => {}
    }
    Ok(c)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::GenValues { .. } => "gen-values",
        Command::GenTranscripts { .. } => "gen-transcripts",
        Command::Pipeline { .. } => "pipeline",
        Command::Validate { .. } => "validate",
        Command::Split { .. } => "split",
        Command::Stats { .. } => "stats",
        Command::Score { .. } => "score",
        Command::Extract { .. } => "extract",
        Command::Optimize { .. } => "optimize",
        Command::Similarity { .. } => "similarity",
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let config = merge(&cli)?;
    let mut registry = VariationRegistry::builtin();
    if let Some(path) = &config.taxonomy {
        registry.extend(VariationRegistry::load(path)?)?;
    }
    let mode = config.mode.unwrap_or(ProviderMode::Mock);
    let mut ctx = Ctx {
        seed: config.seed.unwrap_or(0),
        mode,
        sink: Sink::new(config.output_dir.clone())?,
        registry,
        config,
        sub_seeds: BTreeMap::new(),
    };
    let name = command_name(&cli.command);
    match cli.command {
        Command::GenValues { count, .. } => gen_values(&mut ctx, count)?,
        Command::GenTranscripts { value, variations, count, .. } => {
            gen_transcripts(&mut ctx, &value, &variations, count)?
        }
        Command::Pipeline { .. } => pipeline(&mut ctx)?,
        Command::Validate { input, .. } => validate(&mut ctx, &input)?,
        Command::Split { input, .. } => split(&mut ctx, &input)?,
        Command::Stats { input } => stats(&mut ctx, &input)?,
        Command::Score { pred, gold } => score(&mut ctx, &pred, &gold)?,
        Command::Extract { text, input, instruction, oracle, .. } => {
            extract(&mut ctx, text, input.as_deref(), instruction, oracle)?
        }
        Command::Optimize { input, train, valid, trace, .. } => {
            optimize(&mut ctx, input.as_deref(), train.as_deref(), valid.as_deref(), trace.as_deref())?
        }
        Command::Similarity { input, classify, synthesis } => similarity(&mut ctx, &input, &classify, &synthesis)?,
    }
    let record = Manifest {
        command: name.to_string(),
        seed: ctx.seed,
        mode: ctx.mode.to_string(),
        config_hash: ctx.config.hash(),
        cli_version: env!("CARGO_PKG_VERSION").to_string(),
        core_version: varspeech_core::VERSION.to_string(),
        sub_seeds: ctx.sub_seeds.clone(),
        outputs: ctx.sink.outputs.clone(),
    };
    match (ctx.sink.dir(), &cli.global.manifest) {
        (_, Some(path)) => manifest::append(path, &record)?,
        (Some(dir), None) => manifest::append(&dir.join("manifest.jsonl"), &record)?,
        (None, None) => log::info!("manifest: {}", serde_json::to_string(&record).unwrap_or_default()),
    }
    Ok(())
}

fn gen_values(ctx: &mut Ctx, count: usize) -> Result<()> {
    let spec = ctx.config.spec_for(&ctx.kind()?)?;
    let chat = ctx.chat()?;
    let values = generation::generate_values(&spec, count, chat.as_ref())?;
    let mut out = String::new();
    for v in &values {
        out.push_str(&serde_json::to_string(v).map_err(|e| CliError::Data(e.to_string()))?);
        out.push('\n');
    }
    ctx.sink.emit("values.jsonl", &out, true)
}

fn gen_transcripts(ctx: &mut Ctx, raw: &str, variations: &[String], count: usize) -> Result<()> {
    let kind = ctx.kind()?;
    let spec = ctx.config.spec_for(&kind)?;
    let value = EntityValue::parse(kind, raw).map_err(|e| CliError::Usage(e.to_string()))?;
    let chat = ctx.chat()?;
    let produced =
        generation::generate_transcripts(&spec, &ctx.registry, &value, variations, &[], count, chat.as_ref())?;
    let provenance = match ctx.mode {
        ProviderMode::Mock => Provenance::RuleRendered,
        ProviderMode::Live => Provenance::LlmGenerated,
    };
    let samples = produced
        .into_iter()
        .map(|(text, tags)| {
            Transcript::new(text, tags, value.clone(), provenance)
                .map(|transcript| LabeledSample { transcript, validated: false, split: Split::Unassigned })
                .map_err(|e| CliError::Data(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    ctx.sink.emit("transcripts.jsonl", &write_samples_jsonl(&samples), true)
}

/// Oracle in mock mode, oracle and judge together in live mode.
fn default_validation(mode: ProviderMode) -> ValidationMode {
    match mode {
        ProviderMode::Mock => ValidationMode::Oracle,
        ProviderMode::Live => ValidationMode::Both,
    }
}

fn validator<'a>(mode: ValidationMode, judge: &'a dyn ChatBackend) -> Result<Validator<'a>> {
    Ok(match mode {
        ValidationMode::Oracle => Validator::oracle(),
        m => Validator::new(m, Some(judge))?,
    })
}

fn pipeline(ctx: &mut Ctx) -> Result<()> {
    let spec = ctx.config.spec_for(&ctx.kind()?)?;
    let gen = ctx.config.generation.clone();
    let mut config = GenerationConfig::new(
        spec,
        gen.num_values.unwrap_or(5),
        gen.target_per_pair.unwrap_or(3),
        gen.max_rounds.unwrap_or(8),
    );
    config.provider_mode = ctx.mode;
    config.seed = ctx.sub_seed("generation");
    config.variations = gen.variations.unwrap_or_default();
    config.parallelism = ctx.config.parallelism.unwrap_or(4);
    let chat = ctx.chat()?;
    let validator = validator(gen.validation.unwrap_or(default_validation(ctx.mode)), chat.as_ref())?;
    let (samples, report) = generation::run_pipeline(&config, &ctx.registry, chat.as_ref(), &validator)?;
    eprintln!(
        "pipeline: {} samples, {} rounds, {} invalid ({:.1}%), {} shortfalls",
        report.samples,
        report.rounds_used,
        report.invalid_samples,
        report.invalid_rate * 100.0,
        report.shortfalls.len()
    );
    ctx.sink.emit("samples.jsonl", &write_samples_jsonl(&samples), true)?;
    if ctx.sink.dir().is_some() {
        ctx.sink.emit("report.json", &to_json(&report)?, false)?;
    }
    Ok(())
}

fn validate(ctx: &mut Ctx, input: &Path) -> Result<()> {
    let mut samples = read_samples(input)?;
    let chat = ctx.chat()?;
    let validator = validator(ctx.config.generation.validation.unwrap_or(default_validation(ctx.mode)), chat.as_ref())?;
    let (mut valid, mut disagreements) = (0, 0);
    for s in &mut samples {
        let spec = ctx.config.spec_for(&s.value().kind)?;
        let outcome = validator.validate(s.text(), s.value(), &spec)?;
        s.validated = outcome.valid;
        valid += usize::from(outcome.valid);
        disagreements += usize::from(outcome.disagreement);
    }
    eprintln!("validate: {valid}/{} valid, {disagreements} disagreements", samples.len());
    ctx.sink.emit("validated.jsonl", &write_samples_jsonl(&samples), true)
}

fn split(ctx: &mut Ctx, input: &Path) -> Result<()> {
    let samples = read_samples(input)?;
    let ratios = match ctx.config.split {
        Some([a, b, c]) => SplitRatios::new(a, b, c).map_err(|e| CliError::Usage(e.to_string()))?,
        None => SplitRatios::default(),
    };
    let seed = ctx.sub_seed("split");
    let out = evaluator::split(&samples, ratios, seed).map_err(|e| CliError::Usage(e.to_string()))?;
    let counts = evaluator::dataset_stats(&out).split_counts;
    eprintln!("split: {} / {} / {}", counts.train, counts.valid, counts.test);
    ctx.sink.emit("split.jsonl", &write_samples_jsonl(&out), true)?;
    if ctx.sink.dir().is_some() {
        for (name, which) in [("train.jsonl", Split::Train), ("valid.jsonl", Split::Valid), ("test.jsonl", Split::Test)]
        {
            let part: Vec<LabeledSample> = out.iter().filter(|s| s.split == which).cloned().collect();
            ctx.sink.emit(name, &write_samples_jsonl(&part), false)?;
        }
    }
    Ok(())
}

fn stats(ctx: &mut Ctx, input: &Path) -> Result<()> {
    let samples = read_samples(input)?;
    ctx.sink.emit("stats.json", &to_json(&evaluator::dataset_stats(&samples))?, true)
}

#[derive(Debug, Deserialize)]
struct PredictionLine {
    predicted: Option<String>,
}

#[derive(Debug, Serialize)]
struct ScoreReport {
    overall: Metrics,
    by_kind: BTreeMap<String, Metrics>,
}

fn score(ctx: &mut Ctx, pred: &Path, gold: &Path) -> Result<()> {
    let gold = read_samples(gold)?;
    let preds: Vec<PredictionLine> = read_text(pred)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CliError::Data(format!("{} line {}: {e}", pred.display(), i + 1)))
        })
        .collect::<Result<_>>()?;
    if preds.len() != gold.len() {
        return Err(CliError::Data(format!("{} predictions for {} gold samples", preds.len(), gold.len())));
    }
    let pairs: Vec<Prediction> = preds
        .into_iter()
        .zip(&gold)
        .map(|(p, g)| Prediction { predicted: p.predicted, gold: g.value().clone() })
        .collect();
    let mut grouped: BTreeMap<String, Vec<Prediction>> = BTreeMap::new();
    for p in &pairs {
        grouped.entry(p.gold.kind.to_string()).or_default().push(p.clone());
    }
    let report = ScoreReport {
        overall: evaluator::score(&pairs),
        by_kind: grouped.iter().map(|(k, v)| (k.clone(), evaluator::score(v))).collect(),
    };
    ctx.sink.emit("metrics.json", &to_json(&report)?, true)?;
    ctx.sink.emit("metrics.txt", &metrics_table(&report.by_kind), false)
}

#[derive(Debug, Serialize)]
struct ExtractLine<'a> {
    text: &'a str,
    predicted: Option<String>,
}

fn extract(
    ctx: &mut Ctx,
    text: Option<String>,
    input: Option<&Path>,
    instruction: Option<String>,
    oracle: bool,
) -> Result<()> {
    let (texts, kind) = match (text, input) {
        (Some(t), _) => (vec![t], ctx.kind()?),
        (None, Some(p)) => {
            let samples = read_samples(p)?;
            let kind = single_kind(&samples)?;
            (samples.into_iter().map(|s| s.transcript.text).collect(), kind)
        }
        (None, None) => return Err(CliError::Usage("extract needs --text or --input".into())),
    };
    let spec = ctx.config.spec_for(&kind)?;
    let instruction = instruction.unwrap_or_else(|| prompts::base_instruction(&spec));
    let chat = ctx.chat()?;
    let extractor: Box<dyn Extractor> = if oracle {
        Box::new(OracleExtractor { spec })
    } else {
        Box::new(ProviderExtractor { spec, backend: chat.as_ref() })
    };
    let mut out = String::new();
    for t in &texts {
        let line = ExtractLine { text: t, predicted: extractor.extract(&instruction, t)? };
        out.push_str(&serde_json::to_string(&line).map_err(|e| CliError::Data(e.to_string()))?);
        out.push('\n');
    }
    ctx.sink.emit("predictions.jsonl", &out, true)
}

#[derive(Debug, Serialize)]
struct OptimizeSummary {
    best: optimizer::PromptCandidate,
    base_valid_score: f64,
    running_best: Vec<f64>,
}

fn optimize(
    ctx: &mut Ctx,
    input: Option<&Path>,
    train: Option<&Path>,
    valid: Option<&Path>,
    trace: Option<&Path>,
) -> Result<()> {
    let (train, valid) = match (input, train, valid) {
        (Some(p), _, _) => {
            let all = read_samples(p)?;
            let pick = |s: Split| all.iter().filter(|x| x.split == s).cloned().collect::<Vec<_>>();
            (pick(Split::Train), pick(Split::Valid))
        }
        (None, Some(t), Some(v)) => (read_samples(t)?, read_samples(v)?),
        _ => return Err(CliError::Usage("optimize needs --input or both --train and --valid".into())),
    };
    let kind = single_kind(&[train.clone(), valid.clone()].concat())?;
    let spec = ctx.config.spec_for(&kind)?;
    let o = ctx.config.optimizer.clone();
    let defaults = OptimizerConfig::default();
    let config = OptimizerConfig {
        batch_size: o.batch_size.unwrap_or(defaults.batch_size).min(train.len().max(1)),
        iterations: o.iterations.unwrap_or(defaults.iterations),
        pool_size: o.pool_size.unwrap_or(defaults.pool_size),
        mutation_count: o.mutation_count.unwrap_or(defaults.mutation_count),
        seed: ctx.sub_seed("optimizer"),
    };
    let base = o.base_instruction.unwrap_or_else(|| prompts::base_instruction(&spec));
    let chat = ctx.chat()?;
    let extractor = ProviderExtractor { spec, backend: chat.as_ref() };
    let mutator = ProviderMutator { backend: chat.as_ref() };
    let result = optimizer::optimize(&base, &train, &valid, &extractor, &mutator, &config)?;
    let mut trace_text = Vec::new();
    optimizer::write_trace(&result.trace, &mut trace_text).map_err(|e| CliError::Data(e.to_string()))?;
    let trace_text = String::from_utf8_lossy(&trace_text).into_owned();
    let summary = OptimizeSummary {
        best: result.best,
        base_valid_score: result.base_valid_score,
        running_best: result.running_best,
    };
    ctx.sink.emit("best.json", &to_json(&summary)?, true)?;
    match (ctx.sink.dir().is_some(), trace) {
        (_, Some(path)) => ctx.sink.emit_to(path, &trace_text),
        (true, None) => ctx.sink.emit("trace.jsonl", &trace_text, false),
        (false, None) => Ok(()),
    }
}

fn similarity(ctx: &mut Ctx, input: &Path, classify: &str, synthesis: &str) -> Result<()> {
    let real = read_samples(input)?;
    let chat = ctx.chat()?;
    let embedder = ctx.config.embed_profile(ctx.mode)?.embed_backend()?;
    let classify = match classify {
        "rule" => ClassifyMode::Rule,
        "provider" => {
            ClassifyMode::Provider { backend: chat.as_ref(), registry: &ctx.registry, max_retries: DEFAULT_MAX_RETRIES }
        }
        other => return Err(CliError::Usage(format!("unknown classify mode `{other}`"))),
    };
    let synthesis = match synthesis {
        "render" => Synthesis::Render,
        "provider" => Synthesis::Provider { backend: chat.as_ref() },
        other => return Err(CliError::Usage(format!("unknown synthesis mode `{other}`"))),
    };
    let config = SimilarityConfig {
        seed: sub_seed(ctx.seed, "similarity"),
        targets: OverlapCategory::ALL.to_vec(),
        classify,
        synthesis,
    };
    let report = similarity::pair_and_score(&real, &ctx.registry, embedder.as_ref(), &config)?;
    ctx.sub_seeds.insert("similarity".into(), config.seed);
    if report.skipped > 0 {
        eprintln!("similarity: {} pairs skipped after provider errors", report.skipped);
    }
    let table = report.table();
    ctx.sink.emit("similarity.json", &to_json(&report)?, true)?;
    ctx.sink.emit("similarity.txt", &table, false)
}
