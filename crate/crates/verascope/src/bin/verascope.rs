//! Command-line front end. Stages read and write files inside `--out`,
//! so runs compose:
//!
//! ```text
//! verascope --seed 7 --out run gen
//! verascope --seed 7 --out run train
//! verascope --seed 7 --out run calibrate
//! verascope --seed 7 --out run detect
//! ```
//!
//! Exit codes: 0 success, 1 bad invocation or config, 2 data or
//! processing failure. All outputs are deterministic for a fixed
//! (config, seed) pair.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use verascope::aggregator::{AggregatedVerdict, CurveSet};
use verascope::base_models::{AffectFlow, Detector};
use verascope::config::RunConfig;
use verascope::coordination::intent::{self, IntentLabel, IntentModel};
use verascope::coordination::{self, ScanSettings};
use verascope::corpus::synth::{generate, GroundTruth, INTENT_BENIGN, INTENT_MALICIOUS};
use verascope::corpus::{
    load_corpus, load_ground_truth, save_corpus, save_ground_truth, Corpus,
};
use verascope::crossplatform::link_entities;
use verascope::explainer::Explanation;
use verascope::features::{AffectLexicon, FactorId};
use verascope::harness::{
    binned_f1_report, binned_rows_to_csv, cross_validate_with, split_folds, FoldSplit, Pipeline,
};

#[derive(Parser)]
#[command(name = "verascope", version, about = "Falsehood detection toolkit")]
struct Cli {
    /// TOML run configuration; every key is optional and defaults apply.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Overrides every per-stage seed named in the config.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,

    /// Artifact directory; created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CorpusArg {
    /// Corpus file; defaults to <out>/corpus.jsonl.
    #[arg(long, value_name = "FILE")]
    corpus: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    corpus: CorpusArg,

    /// Documents to score; defaults to the held-out test split.
    #[arg(long = "doc", value_name = "ID")]
    docs: Vec<String>,

    /// Observation time (unix seconds); defaults to the corpus end.
    #[arg(long, value_name = "T")]
    at: Option<i64>,
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    corpus: CorpusArg,

    /// Document to replay.
    #[arg(long, value_name = "ID")]
    doc: String,

    /// Ascending observation times (unix seconds).
    #[arg(long, value_name = "T,T,...", value_delimiter = ',', required = true)]
    times: Vec<i64>,
}

#[derive(Args)]
struct CoordScanArgs {
    #[command(flatten)]
    corpus: CorpusArg,

    /// Ground-truth sidecar; when given, an intent model is trained on
    /// its planted clusters and communities get intent labels.
    #[arg(long, value_name = "FILE")]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    corpus: CorpusArg,

    /// Restrict to one factor (e.g. word_count); defaults to every
    /// factor any enabled model requires.
    #[arg(long, value_name = "NAME")]
    factor: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus plus its ground-truth sidecar.
    Gen,
    /// Fit trainable base models on the training split.
    Train(CorpusArg),
    /// Fit per-factor reliability curves on the validation split.
    Calibrate(CorpusArg),
    /// Score documents and write verdicts with explanations.
    Detect(DetectArgs),
    /// Score one document at several observation times.
    Replay(ReplayArgs),
    /// Scan for coordinated actor communities.
    CoordScan(CoordScanArgs),
    /// Merge actor identities across platforms.
    Link(CorpusArg),
    /// Cross-validate the configured ensemble.
    Eval(CorpusArg),
    /// Write binned factor-performance tables as CSV.
    Report(ReportArgs),
}

/// Exit-code carrier: usage problems exit 1, data problems exit 2.
enum Failure {
    Usage(String),
    Data(String),
}

impl From<verascope::Error> for Failure {
    fn from(e: verascope::Error) -> Failure {
        Failure::Data(e.to_string())
    }
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests arrive as clap errors too.
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = match &cli.config {
        Some(path) => RunConfig::from_path(path).map_err(usage)?,
        None => RunConfig::default(),
    };
    fs::create_dir_all(&cli.out).map_err(|e| {
        Failure::Data(format!("cannot create `{}`: {e}", cli.out.display()))
    })?;

    match &cli.command {
        Command::Gen => gen(&cli, &config),
        Command::Train(args) => train(&cli, &config, args),
        Command::Calibrate(args) => calibrate(&cli, &config, args),
        Command::Detect(args) => detect(&cli, &config, args),
        Command::Replay(args) => replay(&cli, &config, args),
        Command::CoordScan(args) => coord_scan(&cli, &config, args),
        Command::Link(args) => link(&cli, &config, args),
        Command::Eval(args) => eval(&cli, &config, args),
        Command::Report(args) => report(&cli, &config, args),
    }
}

fn corpus_path(cli: &Cli, arg: &CorpusArg) -> PathBuf {
    arg.corpus
        .clone()
        .unwrap_or_else(|| cli.out.join("corpus.jsonl"))
}

fn read_corpus(cli: &Cli, arg: &CorpusArg) -> Result<Corpus, Failure> {
    let path = corpus_path(cli, arg);
    load_corpus(&path)
        .map_err(|e| Failure::Data(format!("corpus `{}`: {e}", path.display())))
}

/// The standing 70/10/20 split every standalone stage agrees on.
fn protocol_split(corpus: &Corpus, config: &RunConfig, cli: &Cli) -> Result<FoldSplit, Failure> {
    let seed = cli.seed.unwrap_or(config.folds.seed);
    let mut plan = split_folds(corpus, 1, seed)?;
    Ok(plan.folds.swap_remove(0))
}

fn model_file(cli: &Cli) -> PathBuf {
    cli.out.join("affect_flow.json")
}

fn curves_file(cli: &Cli) -> PathBuf {
    cli.out.join("curves.json")
}

/// Builds the configured roster with trained state loaded from disk.
fn load_models(cli: &Cli, config: &RunConfig) -> Result<Vec<Box<dyn Detector>>, Failure> {
    let mut models = config.build_models(cli.seed).map_err(usage)?;
    for slot in models.iter_mut() {
        if slot.model_id() == "affect_flow" {
            let path = model_file(cli);
            if !path.exists() {
                return Err(Failure::Data(format!(
                    "model file `{}` missing; run `verascope train` first",
                    path.display()
                )));
            }
            *slot = Box::new(AffectFlow::load(&path, AffectLexicon::bundled())?);
        }
    }
    Ok(models)
}

/// Roster plus calibration curves: everything scoring needs.
fn scoring_pipeline(cli: &Cli, config: &RunConfig) -> Result<Pipeline, Failure> {
    let mut pipeline = Pipeline::new(load_models(cli, config)?, config.pipeline_settings());
    let path = curves_file(cli);
    if !path.exists() {
        return Err(Failure::Data(format!(
            "curve file `{}` missing; run `verascope calibrate` first",
            path.display()
        )));
    }
    *pipeline.curves_mut() = CurveSet::load(&path)?;
    Ok(pipeline)
}

fn gen(cli: &Cli, config: &RunConfig) -> Result<(), Failure> {
    let seed = cli.seed.unwrap_or(0);
    let (corpus, truth) = generate(&config.synth, seed).map_err(usage)?;
    let corpus_out = cli.out.join("corpus.jsonl");
    let truth_out = cli.out.join("truth.jsonl");
    save_corpus(&corpus, &corpus_out)?;
    save_ground_truth(&truth, &truth_out)?;
    println!(
        "wrote {} documents, {} actors to {} (truth: {})",
        corpus.doc_ids().count(),
        corpus.n_actors(),
        corpus_out.display(),
        truth_out.display()
    );
    Ok(())
}

fn train(cli: &Cli, config: &RunConfig, args: &CorpusArg) -> Result<(), Failure> {
    let corpus = read_corpus(cli, args)?;
    let split = protocol_split(&corpus, config, cli)?;
    // Validates the roster; the credibility models carry no trained
    // state, so only affect_flow leaves an artifact behind.
    config.build_models(cli.seed).map_err(usage)?;
    let mut note = format!("training split: {} documents", split.train.len());
    if config.models.enabled.iter().any(|id| id == "affect_flow") {
        let hyper = verascope::base_models::AffectFlowHyper {
            seed: cli.seed.unwrap_or(config.models.affect_flow.seed),
            ..config.models.affect_flow.clone()
        };
        let mut model = AffectFlow::new(hyper);
        model.train(&corpus, &split.train)?;
        let path = model_file(cli);
        model.save(&path)?;
        write!(note, "; trained affect_flow, wrote {}", path.display()).unwrap();
    } else {
        note.push_str("; no trainable models in the roster");
    }
    println!("{note}");
    Ok(())
}

fn calibrate(cli: &Cli, config: &RunConfig, args: &CorpusArg) -> Result<(), Failure> {
    let corpus = read_corpus(cli, args)?;
    let split = protocol_split(&corpus, config, cli)?;
    let mut pipeline = Pipeline::new(load_models(cli, config)?, config.pipeline_settings());
    pipeline.calibrate(&corpus, &split.validation)?;
    let path = curves_file(cli);
    pipeline.curves().save(&path)?;
    println!(
        "calibrated {} models on {} documents; wrote {}",
        pipeline.models().len(),
        split.validation.len(),
        path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct VerdictRecord<'a> {
    verdict: &'a AggregatedVerdict,
    explanation: &'a Explanation,
}

fn detect(cli: &Cli, config: &RunConfig, args: &DetectArgs) -> Result<(), Failure> {
    let corpus = read_corpus(cli, &args.corpus)?;
    let pipeline = scoring_pipeline(cli, config)?;
    let doc_ids = if args.docs.is_empty() {
        protocol_split(&corpus, config, cli)?.test
    } else {
        args.docs.clone()
    };
    let t = args.at.unwrap_or_else(|| corpus.end_time());
    let mut lines = String::new();
    for doc_id in &doc_ids {
        let (verdict, explanation) = pipeline.detect(&corpus, doc_id, t)?;
        let record = VerdictRecord {
            verdict: &verdict,
            explanation: &explanation,
        };
        lines.push_str(&serde_json::to_string(&record).map_err(verascope::Error::from)?);
        lines.push('\n');
    }
    let path = cli.out.join("verdicts.jsonl");
    fs::write(&path, lines).map_err(verascope::Error::from)?;
    println!("wrote {} verdicts to {}", doc_ids.len(), path.display());
    Ok(())
}

fn replay(cli: &Cli, config: &RunConfig, args: &ReplayArgs) -> Result<(), Failure> {
    if args.times.windows(2).any(|w| w[1] < w[0]) {
        return Err(usage("--times must be ascending"));
    }
    let corpus = read_corpus(cli, &args.corpus)?;
    let pipeline = scoring_pipeline(cli, config)?;
    let points = pipeline.replay(&corpus, &args.doc, &args.times)?;
    let path = cli.out.join("replay.json");
    let json = serde_json::to_string_pretty(&points).map_err(verascope::Error::from)?;
    fs::write(&path, json + "\n").map_err(verascope::Error::from)?;
    println!(
        "replayed `{}` at {} times; wrote {}",
        args.doc,
        points.len(),
        path.display()
    );
    Ok(())
}

/// Platform-qualified intent labels from the planted-cluster roster.
fn intent_labels(corpus: &Corpus, truth: &GroundTruth) -> BTreeMap<String, IntentLabel> {
    let mut refs_by_bare: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for actor in corpus.actors() {
        refs_by_bare
            .entry(actor.actor_id.as_str())
            .or_default()
            .push(actor.actor_ref().to_string());
    }
    let mut labels = BTreeMap::new();
    for cluster in &truth.clusters {
        let label = match cluster.intent.as_str() {
            INTENT_MALICIOUS => IntentLabel::Malicious,
            INTENT_BENIGN => IntentLabel::Benign,
            _ => continue,
        };
        for bare in &cluster.actor_ids {
            for key in refs_by_bare.get(bare.as_str()).into_iter().flatten() {
                labels.insert(key.clone(), label);
            }
        }
    }
    labels
}

fn train_intent(
    corpus: &Corpus,
    truth: &GroundTruth,
    config: &RunConfig,
    settings: &ScanSettings,
) -> Result<IntentModel, Failure> {
    let traces = coordination::extract_traces(corpus);
    let features = intent::actor_features(&traces, corpus, settings.dt);
    let labels = intent_labels(corpus, truth);
    let xs: BTreeMap<String, Vec<f64>> = labels
        .keys()
        .filter_map(|k| features.get(k).map(|v| (k.clone(), v.clone())))
        .collect();
    let (same, diff) = intent::pairs_from_labels(&labels);
    let mut model = IntentModel::new(config.intent.clone());
    model.fit(&xs, &same, &diff)?;
    model.fit_centroids(&xs, &labels)?;
    Ok(model)
}

fn coord_scan(cli: &Cli, config: &RunConfig, args: &CoordScanArgs) -> Result<(), Failure> {
    let corpus = read_corpus(cli, &args.corpus)?;
    let mut settings = config.coordination.clone();
    settings.seed = cli.seed.unwrap_or(settings.seed);
    let model = match &args.truth {
        None => None,
        Some(path) => {
            let truth = load_ground_truth(path)
                .map_err(|e| Failure::Data(format!("truth `{}`: {e}", path.display())))?;
            let mut hyper = config.intent.clone();
            hyper.seed = cli.seed.unwrap_or(hyper.seed);
            let scoped = RunConfig {
                intent: hyper,
                ..config.clone()
            };
            Some(train_intent(&corpus, &truth, &scoped, &settings)?)
        }
    };
    let report = coordination::scan(&corpus, model.as_ref(), &settings)?;
    let path = cli.out.join("coordination.json");
    let json = serde_json::to_string_pretty(&report).map_err(verascope::Error::from)?;
    fs::write(&path, json + "\n").map_err(verascope::Error::from)?;
    println!(
        "found {} communities; wrote {}",
        report.communities.len(),
        path.display()
    );
    Ok(())
}

fn link(cli: &Cli, config: &RunConfig, args: &CorpusArg) -> Result<(), Failure> {
    let corpus = read_corpus(cli, args)?;
    let clusters = link_entities(&corpus, &config.linking);
    let merged = clusters.iter().filter(|c| c.members.len() > 1).count();
    let path = cli.out.join("identities.json");
    let json = serde_json::to_string_pretty(&clusters).map_err(verascope::Error::from)?;
    fs::write(&path, json + "\n").map_err(verascope::Error::from)?;
    println!(
        "{} identities ({} merged) across {} actors; wrote {}",
        clusters.len(),
        merged,
        corpus.n_actors(),
        path.display()
    );
    Ok(())
}

fn eval(cli: &Cli, config: &RunConfig, args: &CorpusArg) -> Result<(), Failure> {
    let corpus = read_corpus(cli, args)?;
    let seed = cli.seed.unwrap_or(config.folds.seed);
    let plan = split_folds(&corpus, config.folds.k, seed)?;
    let settings = config.pipeline_settings();
    let mut rosters = Vec::with_capacity(plan.k());
    for fold_idx in 0..plan.k() {
        let fold_seed = cli
            .seed
            .unwrap_or(config.models.affect_flow.seed)
            .wrapping_add(fold_idx as u64);
        rosters.push(config.build_models(Some(fold_seed)).map_err(usage)?);
    }
    let report = cross_validate_with(&corpus, &plan, |fold_idx| {
        Pipeline::new(std::mem::take(&mut rosters[fold_idx]), settings.clone())
    })?;
    let csv_path = cli.out.join("cv.csv");
    fs::write(&csv_path, report.to_csv()).map_err(verascope::Error::from)?;
    let json_path = cli.out.join("cv.json");
    let json = serde_json::to_string_pretty(&report).map_err(verascope::Error::from)?;
    fs::write(&json_path, json + "\n").map_err(verascope::Error::from)?;
    println!(
        "{}-fold cv: mean f1 {:.4}, mean accuracy {:.4}; wrote {} and {}",
        plan.k(),
        report.mean_f1,
        report.mean_accuracy,
        csv_path.display(),
        json_path.display()
    );
    Ok(())
}

fn report(cli: &Cli, config: &RunConfig, args: &ReportArgs) -> Result<(), Failure> {
    let corpus = read_corpus(cli, &args.corpus)?;
    let split = protocol_split(&corpus, config, cli)?;
    let models = load_models(cli, config)?;
    let only: Option<FactorId> = match &args.factor {
        None => None,
        Some(name) => Some(FactorId::from_str(name).map_err(usage)?),
    };
    let mut written = Vec::new();
    for model in &models {
        for &factor in model.required_factors() {
            if only.is_some_and(|f| f != factor) {
                continue;
            }
            let rows = binned_f1_report(
                model.as_ref(),
                &corpus,
                &split.test,
                factor,
                &config.calibration,
            )?;
            let path = cli
                .out
                .join(format!("curve_{}_{}.csv", model.model_id(), factor));
            fs::write(&path, binned_rows_to_csv(&rows)).map_err(verascope::Error::from)?;
            written.push(path.display().to_string());
        }
    }
    if written.is_empty() {
        return Err(usage(match only {
            Some(f) => format!("no enabled model uses factor `{f}`"),
            None => "no enabled model declares reliability factors".to_owned(),
        }));
    }
    println!("wrote {}", written.join(", "));
    Ok(())
}
