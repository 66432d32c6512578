//! `vaxner`: the adverse-event extraction pipeline as one binary.
//!
//! Subcommands share the canonical corpus format, so stages compose
//! through files: ingest or synthesize a corpus, split it, predict spans
//! with a text-generation backend, combine predictors by majority vote,
//! and score the result. Exit status: 0 success, 1 usage or
//! configuration error, 2 data or validation error, 3 backend error.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use vaxner_core::corpus::{
    entity_stats, filter_social, ingest_vaers, load_corpus, load_social_records, render_stats,
    split_corpus, write_corpus, FilterRules, SplitSpec, DEFAULT_SPLIT_SEED,
};
use vaxner_core::ensemble::{ensemble_corpus, VoteMode};
use vaxner_core::eval::{
    agreement, categorize_corpus, render_agreement_report, render_error_report,
    render_score_report, score_corpus, MatchSelector,
};
use vaxner_core::llm::{predict_corpus, Backend, PredictionCache};
use vaxner_core::rng::mix;
use vaxner_core::synth::{gen_gold, perturb, NoiseProfile};
use vaxner_core::{Error, Result};

#[derive(Parser)]
#[command(name = "vaxner", version, about = "Adverse-event entity extraction pipeline")]
struct Cli {
    /// Shared configuration file (TOML); unknown keys are rejected.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Join the three VAERS CSV files into a span-free corpus.
    IngestVaers(IngestVaersArgs),
    /// Filter social-media records (LDJSON) into a span-free corpus.
    FilterSocial(FilterSocialArgs),
    /// Shuffle and split a corpus into train/validation/test files.
    Split(SplitArgs),
    /// Entity-count statistics for one or more corpora.
    Stats(StatsArgs),
    /// Predict entity spans with the configured generation backend.
    Predict(PredictArgs),
    /// Majority-vote two or more prediction corpora.
    Ensemble(EnsembleArgs),
    /// Strict/relaxed precision, recall, and F1 against gold.
    Score(ScoreArgs),
    /// Error-taxonomy breakdown against gold.
    Errors(ErrorsArgs),
    /// Inter-annotator agreement between two annotation corpora.
    Agreement(AgreementArgs),
    /// Generate a synthetic gold corpus and optional noisy predictors.
    Synth(SynthArgs),
}

#[derive(Args)]
struct IngestVaersArgs {
    /// VAERSDATA.CSV (VAERS_ID, SYMPTOM_TEXT).
    #[arg(long, value_name = "CSV")]
    data: PathBuf,
    /// VAERSVAX.CSV (VAERS_ID, VAX_TYPE).
    #[arg(long, value_name = "CSV")]
    vax: PathBuf,
    /// VAERSSYMPTOMS.CSV, attached as metadata only.
    #[arg(long, value_name = "CSV")]
    symptoms: Option<PathBuf>,
    /// Exact VAX_TYPE to keep.
    #[arg(long, default_value = "COVID19")]
    vax_type: String,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args)]
struct FilterSocialArgs {
    /// Filter-rules TOML file (falls back to [filter].rules in --config).
    #[arg(long, value_name = "PATH")]
    rules: Option<PathBuf>,
    /// Social records, one JSON object per line.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// train:val:test, e.g. 8:1:1.
    #[arg(long, value_name = "R:R:R")]
    ratios: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Writes <prefix>.train.jsonl, <prefix>.val.jsonl, <prefix>.test.jsonl.
    #[arg(long, value_name = "PREFIX")]
    out_prefix: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    /// Corpus files; each becomes one table row.
    #[arg(required = true, value_name = "PATH")]
    corpora: Vec<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Prediction cache file (falls back to [paths].cache in --config).
    #[arg(long, value_name = "PATH")]
    cache: Option<PathBuf>,
    /// Built-in template name, overriding the [prompt] section.
    #[arg(long, value_name = "NAME")]
    template: Option<String>,
}

#[derive(Args)]
struct EnsembleArgs {
    /// span (exact-triple votes) or token (per-token votes).
    #[arg(long, value_name = "MODE")]
    mode: Option<String>,
    /// Minimum votes; defaults to floor(k/2) + 1.
    #[arg(long)]
    threshold: Option<usize>,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Member prediction corpora (at least two).
    #[arg(required = true, value_name = "PATH")]
    members: Vec<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long, value_name = "PATH")]
    gold: PathBuf,
    #[arg(long, value_name = "PATH")]
    pred: PathBuf,
    /// strict, relaxed, or both.
    #[arg(long = "match", value_name = "MODE", default_value = "both")]
    matching: String,
    /// Write machine-readable records (LDJSON) here.
    #[arg(long, value_name = "PATH")]
    records: Option<PathBuf>,
}

#[derive(Args)]
struct ErrorsArgs {
    #[arg(long, value_name = "PATH")]
    gold: PathBuf,
    #[arg(long, value_name = "PATH")]
    pred: PathBuf,
    #[arg(long, value_name = "PATH")]
    records: Option<PathBuf>,
}

#[derive(Args)]
struct AgreementArgs {
    /// First annotator's corpus.
    first: PathBuf,
    /// Second annotator's corpus.
    second: PathBuf,
    #[arg(long, value_name = "PATH")]
    records: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = DEFAULT_SPLIT_SEED)]
    seed: u64,
    #[arg(long, value_name = "N")]
    docs: usize,
    #[arg(long, default_value_t = 1)]
    spans_min: usize,
    #[arg(long, default_value_t = 5)]
    spans_max: usize,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Also write this many independently perturbed predictor corpora.
    #[arg(long, default_value_t = 0)]
    predictors: usize,
    #[arg(long, default_value_t = 0.15)]
    p_delete: f64,
    #[arg(long, default_value_t = 0.15)]
    p_spurious: f64,
    #[arg(long, default_value_t = 0.1)]
    p_jitter: f64,
    /// Predictor files become <prefix><i>.jsonl.
    #[arg(long, value_name = "PREFIX")]
    pred_out_prefix: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(error: &Error) -> u8 {
    if error.is_backend() {
        3
    } else if matches!(error, Error::Config(_) | Error::Template(_) | Error::Invalid(_)) {
        1
    } else {
        2
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = RunConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::IngestVaers(args) => cmd_ingest_vaers(args),
        Command::FilterSocial(args) => cmd_filter_social(args, &config),
        Command::Split(args) => cmd_split(args, &config),
        Command::Stats(args) => cmd_stats(args),
        Command::Predict(args) => cmd_predict(args, &config),
        Command::Ensemble(args) => cmd_ensemble(args, &config),
        Command::Score(args) => cmd_score(args, &config),
        Command::Errors(args) => cmd_errors(args, &config),
        Command::Agreement(args) => cmd_agreement(args, &config),
        Command::Synth(args) => cmd_synth(args),
    }
}

/// Resolves where a command's LDJSON records go: the explicit flag, or
/// `<reports dir>/<name>.jsonl` when the config names a directory.
fn records_target(
    flag: Option<PathBuf>,
    config: &RunConfig,
    name: &str,
) -> Result<Option<PathBuf>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match &config.paths.reports {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Ok(Some(dir.join(format!("{name}.jsonl"))))
        }
        None => Ok(None),
    }
}

fn write_records(path: &Path, records: &[String]) -> Result<()> {
    let mut body = records.join("\n");
    if !body.is_empty() {
        body.push('\n');
    }
    fs::write(path, body)?;
    Ok(())
}

fn cmd_ingest_vaers(args: IngestVaersArgs) -> Result<()> {
    let out = ingest_vaers(
        &args.data,
        &args.vax,
        args.symptoms.as_deref(),
        &args.vax_type,
    )?;
    write_corpus(&out.corpus, &args.out)?;
    println!(
        "ingested {} document(s) with VAX_TYPE={} into {}",
        out.corpus.len(),
        args.vax_type,
        args.out.display()
    );
    if !out.symptoms.is_empty() {
        println!(
            "coded symptom terms attached for {} document(s) (metadata only)",
            out.symptoms.len()
        );
    }
    Ok(())
}

fn cmd_filter_social(args: FilterSocialArgs, config: &RunConfig) -> Result<()> {
    let rules_path = args
        .rules
        .or_else(|| config.filter.rules.clone())
        .ok_or_else(|| Error::Config("no filter rules: pass --rules or set [filter].rules".into()))?;
    let rules = FilterRules::from_file(&rules_path)?;
    let records = load_social_records(&args.input)?;
    let outcome = filter_social(&records, &rules)?;
    write_corpus(&outcome.corpus, &args.out)?;
    println!(
        "kept {} of {} record(s) into {}",
        outcome.corpus.len(),
        records.len(),
        args.out.display()
    );
    for (reason, count) in &outcome.rejected {
        println!("rejected {count:>6}  {reason}");
    }
    Ok(())
}

fn cmd_split(args: SplitArgs, config: &RunConfig) -> Result<()> {
    let ratios_text = args
        .ratios
        .or_else(|| config.split.ratios.clone())
        .unwrap_or_else(|| "8:1:1".to_string());
    let ratios = SplitSpec::parse_ratios(&ratios_text)?;
    let seed = args
        .seed
        .or(config.split.seed)
        .unwrap_or(DEFAULT_SPLIT_SEED);
    let spec = SplitSpec::new(ratios, seed)?;

    let corpus = load_corpus(&args.input)?;
    let (train, val, test) = split_corpus(&corpus, &spec);

    println!("# seed: {seed}");
    println!("# ratios: {ratios_text}");
    let prefix = args.out_prefix.display();
    for (name, part) in [("train", &train), ("val", &val), ("test", &test)] {
        let path = PathBuf::from(format!("{prefix}.{name}.jsonl"));
        write_corpus(part, &path)?;
        println!("{name:<5} {:>6} doc(s) -> {}", part.len(), path.display());
    }
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let mut named = Vec::new();
    for path in &args.corpora {
        let corpus = load_corpus(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        named.push((name, entity_stats(&corpus)));
    }
    print!("{}", render_stats(&named));
    Ok(())
}

fn cmd_predict(args: PredictArgs, config: &RunConfig) -> Result<()> {
    let cache_path = args
        .cache
        .clone()
        .or_else(|| config.paths.cache.clone())
        .ok_or_else(|| Error::Config("no cache path: pass --cache or set [paths].cache".into()))?;
    let template = match &args.template {
        Some(name) => vaxner_core::llm::PromptTemplate::builtin(name)?,
        None => config.prompt.resolve()?,
    };
    config.generation.validate()?;

    let corpus = load_corpus(&args.input)?;
    let cache = PredictionCache::open(&cache_path)?;
    let backend = Backend::new(config.backend.clone(), cache)?;
    let (predictions, stats) = predict_corpus(&corpus, &template, &config.generation, &backend)?;
    write_corpus(&predictions, &args.out)?;

    println!(
        "predicted {} document(s) -> {}",
        predictions.len(),
        args.out.display()
    );
    println!(
        "completions {}  grounded spans {}  ungrounded {}  merged overlaps {}  skipped lines {}",
        stats.completions,
        stats.grounded_spans,
        stats.ungrounded,
        stats.merged_overlaps,
        stats.skipped_lines
    );
    if stats.unknown_type_lines + stats.unlabeled_lines > 0 {
        println!(
            "merged-style lines without a usable type: {} unknown label(s), {} unlabeled",
            stats.unknown_type_lines, stats.unlabeled_lines
        );
    }
    Ok(())
}

fn cmd_ensemble(args: EnsembleArgs, config: &RunConfig) -> Result<()> {
    let mode: VoteMode = args
        .mode
        .or_else(|| config.ensemble.mode.clone())
        .map(|m| m.parse())
        .transpose()?
        .unwrap_or_default();
    let threshold = args.threshold.or(config.ensemble.threshold);

    let mut members = Vec::with_capacity(args.members.len());
    for path in &args.members {
        members.push(load_corpus(path)?);
    }
    let k = members.len();
    let combined = ensemble_corpus(members, mode, threshold)?;
    write_corpus(&combined, &args.out)?;
    println!(
        "voted {} member(s), threshold {} -> {}",
        k,
        threshold.unwrap_or_else(|| vaxner_core::ensemble::default_threshold(k)),
        args.out.display()
    );
    Ok(())
}

fn cmd_score(args: ScoreArgs, config: &RunConfig) -> Result<()> {
    let selector: MatchSelector = args.matching.parse()?;
    let gold = load_corpus(&args.gold)?;
    let pred = load_corpus(&args.pred)?;
    let report = score_corpus(&gold, &pred)?;
    let (text, records) = render_score_report(&report, selector);
    print!("{text}");
    if let Some(path) = records_target(args.records, config, "score")? {
        write_records(&path, &records)?;
        println!("records -> {}", path.display());
    }
    Ok(())
}

fn cmd_errors(args: ErrorsArgs, config: &RunConfig) -> Result<()> {
    let gold = load_corpus(&args.gold)?;
    let pred = load_corpus(&args.pred)?;
    let breakdown = categorize_corpus(&gold, &pred)?;
    let (text, records) = render_error_report(&breakdown)?;
    print!("{text}");
    if let Some(path) = records_target(args.records, config, "errors")? {
        write_records(&path, &records)?;
        println!("records -> {}", path.display());
    }
    Ok(())
}

fn cmd_agreement(args: AgreementArgs, config: &RunConfig) -> Result<()> {
    let first = load_corpus(&args.first)?;
    let second = load_corpus(&args.second)?;
    let report = agreement(&first, &second)?;
    let (text, records) = render_agreement_report(&report);
    print!("{text}");
    if let Some(path) = records_target(args.records, config, "agreement")? {
        write_records(&path, &records)?;
        println!("records -> {}", path.display());
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    if args.spans_min > args.spans_max {
        return Err(Error::Invalid(format!(
            "--spans-min {} exceeds --spans-max {}",
            args.spans_min, args.spans_max
        )));
    }
    println!("# seed: {}", args.seed);
    let gold = gen_gold(args.seed, args.docs, args.spans_min..=args.spans_max);
    write_corpus(&gold, &args.out)?;
    println!(
        "gold  {:>6} doc(s) -> {}",
        gold.len(),
        args.out.display()
    );

    if args.predictors > 0 {
        let prefix = args.pred_out_prefix.as_ref().ok_or_else(|| {
            Error::Config("--predictors needs --pred-out-prefix".into())
        })?;
        let base = NoiseProfile::new(args.p_delete, args.p_spurious, args.p_jitter, 0)?;
        let predictor_master = mix(args.seed ^ 0x00C0_FFEE);
        for index in 0..args.predictors {
            let profile = base.for_predictor(predictor_master, index as u64);
            let noisy = perturb(&gold, &profile);
            let path = PathBuf::from(format!("{}{}.jsonl", prefix.display(), index));
            write_corpus(&noisy, &path)?;
            println!("pred{index} {:>6} doc(s) -> {}", noisy.len(), path.display());
        }
    }
    Ok(())
}
