//! Command line front end. Every subcommand prints one JSON document on success;
//! failures print `{"error": {"kind", "message"}}` to stderr.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use chatsumm_core::arms::{Arm, ExtractiveArm, SimulatedArm, SimulatedArmSpec};
use chatsumm_core::bandit::{compare_policies, items_from_pipeline, BanditError, BanditItem, PolicyKind, RewardMetric};
use chatsumm_core::embeddings::{MeanWordEncoder, SentenceEncoder, WordVectorStore};
use chatsumm_core::extractive::{
    ChannelModels, ExtractiveError, PreparedTranscript, Punctuator, Resources, SourceTranscript, Step, StepClock,
};
use chatsumm_core::metrics::{aggregate, punct_accuracy, MetricScores};
use chatsumm_core::preprocess::{Corpus, CorpusError, Document, Preprocessor};
use chatsumm_core::punctuation::{restore, strip_punctuation, PunctError, PunctMode, RulePredictor};
use chatsumm_core::synthetic;
use chatsumm_core::topics::{coherence, fit_lda, fit_lsi, CoherenceReport, ModelKind, TopicError, TopicModel};
use chatsumm_core::transcript::{separate_channels, ChannelKind, ChatTranscript, RoleMap, TranscriptError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::io::{
    parse_role_map, read_contractions, read_transcripts, read_word_list, roles_by_prefix, write_transcripts,
    IngestError, RoleMapError,
};
use crate::pipeline::{pool, select_model_parallel, summarize_parallel, StdClock};
use crate::remote::{Endpoint, RemoteArm, RemoteEncoder, RemoteError, RemotePredictor};
use crate::report::{
    aggregate_records, bandit_table, item_table, step_seconds, summarizer_table, write_bandit_outputs, write_json,
    write_text, ReportError, RunMetadata, ScoredItem, SummarizerRow,
};
use crate::store::{persist_summaries, read_summaries, StoreError, SummaryRecord};

/// Dimension of the generated word vectors used when no vector file is configured.
const SYNTHETIC_DIM: usize = 32;
const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    RoleMap(#[from] RoleMapError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Extractive(#[from] ExtractiveError),
    #[error(transparent)]
    Bandit(#[from] BanditError),
    #[error(transparent)]
    Topic(#[from] TopicError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Transcript(#[from] TranscriptError),
    #[error(transparent)]
    Punctuation(#[from] PunctError),
    #[error(transparent)]
    Remote(#[from] RemoteError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::Usage(_) => "config",
            CliError::Ingest(_) | CliError::RoleMap(_) => "ingest",
            CliError::Store(_) => "store",
            CliError::Report(_) => "report",
            CliError::Extractive(_) => "summarize",
            CliError::Bandit(_) => "bandit",
            CliError::Topic(_) | CliError::Corpus(_) => "topics",
            CliError::Transcript(_) => "transcript",
            CliError::Punctuation(_) => "punctuation",
            CliError::Remote(_) => "remote",
            CliError::Io { .. } => "io",
            CliError::Format { .. } => "format",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}

fn read_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_owned(),
        source,
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(read_err(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Format {
        path: path.to_owned(),
        reason: e.to_string(),
    })
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let file = fs::File::open(path).map_err(read_err(path))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(read_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| CliError::Format {
            path: path.to_owned(),
            reason: format!("line {}: {e}", i + 1),
        })?);
    }
    Ok(out)
}

#[derive(Debug, Parser)]
#[command(name = "chatsumm", version, about = "Chat transcript summarization and summarizer routing")]
pub struct Cli {
    /// JSON run configuration; `CHATSUMM_SECTION__FIELD` variables override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic transcript corpus and its role map.
    Generate {
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a transcript file and report corpus statistics.
    Ingest {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        roles: Option<PathBuf>,
        /// Write the parsed transcripts back out in normalized form.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize every transcript and append the records to the summary table.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        roles: Option<PathBuf>,
        /// Restore punctuation from the source text instead of a predictor.
        #[arg(long)]
        oracle_punct: bool,
        /// Reuse channel models saved by an earlier run.
        #[arg(long)]
        models: Option<PathBuf>,
        /// Save the selected channel models.
        #[arg(long)]
        save_models: Option<PathBuf>,
    },
    #[command(subcommand)]
    Topics(TopicsCommand),
    /// Restore punctuation in a text file (`-` for stdin).
    Punctuate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Full)]
        mode: ModeArg,
    },
    /// Score candidate/reference pairs.
    Evaluate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    #[command(subcommand)]
    Bandit(BanditCommand),
    /// Build metric tables from stored summaries and bandit reports.
    Report {
        #[arg(long = "summaries")]
        summaries: Vec<PathBuf>,
        /// Directory holding bandit report JSON files.
        #[arg(long)]
        bandit: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum TopicsCommand {
    /// Fit one model with a fixed topic count.
    Fit {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Coherence of a saved model on a corpus.
    Score {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        model: PathBuf,
    },
    /// Grid search for the most coherent model.
    Select {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub roles: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ChannelArg::Full)]
    pub channel: ChannelArg,
}

#[derive(Debug, Subcommand)]
pub enum BanditCommand {
    /// Route items with one policy.
    Run {
        #[command(flatten)]
        common: BanditArgs,
        #[arg(long)]
        policy: String,
    },
    /// Route the same items with several policies over several seeds.
    Compare {
        #[command(flatten)]
        common: BanditArgs,
        /// Comma-separated policy names; all configured policies when omitted.
        #[arg(long, value_delimiter = ',')]
        policies: Vec<String>,
    },
}

#[derive(Debug, Args)]
pub struct BanditArgs {
    /// Transcripts to summarize and route.
    #[arg(long = "in", conflicts_with = "items")]
    pub input: Option<PathBuf>,
    /// Prepared bandit items (JSONL).
    #[arg(long)]
    pub items: Option<PathBuf>,
    #[arg(long)]
    pub roles: Option<PathBuf>,
    /// `extractive[:name]`, `remote:name=url` or `sim:spec.json`; repeatable.
    #[arg(long = "arm", required = true)]
    pub arms: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    #[arg(long, value_enum, default_value_t = ChannelArg::Customer)]
    pub channel: ChannelArg,
    /// Precomputed per-arm scores (`{"id", "scores"}` lines) for zero-score filtering.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Full,
    Periods,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Lda,
    Lsi,
}

impl From<KindArg> for ModelKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Lda => ModelKind::Lda,
            KindArg::Lsi => ModelKind::Lsi,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ChannelArg {
    Full,
    Customer,
    Agent,
}

impl From<ChannelArg> for ChannelKind {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::Full => ChannelKind::Full,
            ChannelArg::Customer => ChannelKind::Customer,
            ChannelArg::Agent => ChannelKind::Agent,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Bleu,
    RougeL,
}

impl From<MetricArg> for RewardMetric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Bleu => RewardMetric::Bleu,
            MetricArg::RougeL => RewardMetric::RougeL,
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let err = json!({ "error": { "kind": "config", "message": e.to_string().trim() } });
            eprintln!("{err}");
            return 2;
        }
    };
    match execute(cli) {
        Ok(v) => {
            // a closed stdout (e.g. piped into `head`) is not a failure of the command
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json output"));
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<Value, CliError> {
    let mut cfg = RunConfig::from_env(cli.config.as_deref())?;
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    match cli.command {
        Command::Generate { count, seed, out } => generate(count, seed, &out),
        Command::Ingest { input, roles, out } => ingest(&mut cfg, &input, roles, out.as_deref()),
        Command::Summarize {
            input,
            out,
            roles,
            oracle_punct,
            models,
            save_models,
        } => {
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            if roles.is_some() {
                cfg.resources.role_map = roles;
            }
            if models.is_some() {
                cfg.resources.models = models;
            }
            cfg.oracle_punctuation |= oracle_punct;
            summarize(&cfg, &input, save_models.as_deref())
        }
        Command::Topics(t) => topics(&mut cfg, t),
        Command::Punctuate { input, mode } => punctuate(&cfg, &input, mode),
        Command::Evaluate { input, out } => evaluate(&input, out.as_deref()),
        Command::Bandit(b) => bandit(&mut cfg, b),
        Command::Report { summaries, bandit, out } => report(&summaries, bandit.as_deref(), &out),
    }
}

fn generate(count: usize, seed: u64, out: &Path) -> Result<Value, CliError> {
    if count == 0 {
        return Err(CliError::Usage("--count must be positive".into()));
    }
    let chats = synthetic::chats(count, seed);
    let ts: Vec<ChatTranscript> = chats.iter().map(|c| c.transcript.clone()).collect();
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(read_err(parent))?;
    }
    write_transcripts(out, &ts).map_err(read_err(out))?;
    Ok(json!({ "transcripts": ts.len(), "path": out }))
}

fn load_roles(cfg: &RunConfig, ts: &[ChatTranscript]) -> Result<RoleMap, CliError> {
    match &cfg.resources.role_map {
        Some(p) => Ok(parse_role_map(&fs::read_to_string(p).map_err(read_err(p))?)?),
        None => Ok(roles_by_prefix(ts, &cfg.agent_prefix)),
    }
}

fn ingest(cfg: &mut RunConfig, input: &Path, roles: Option<PathBuf>, out: Option<&Path>) -> Result<Value, CliError> {
    if roles.is_some() {
        cfg.resources.role_map = roles;
    }
    cfg.check_paths()?;
    let ts = read_transcripts(input)?;
    let roles = load_roles(cfg, &ts)?;
    let (mut utterances, mut customer_words, mut agent_words, mut customer_only) = (0, 0, 0, 0);
    for t in &ts {
        let (c, a) = separate_channels(t, &roles)?;
        utterances += t.utterances.len();
        customer_words += c.word_count();
        agent_words += a.word_count();
        customer_only += usize::from(a.utterances.is_empty());
    }
    if let Some(o) = out {
        write_transcripts(o, &ts).map_err(read_err(o))?;
    }
    Ok(json!({
        "transcripts": ts.len(),
        "utterances": utterances,
        "customer_words": customer_words,
        "agent_words": agent_words,
        "without_agent": customer_only,
    }))
}

/// Preprocessor, vectors and predictors built from a run configuration.
struct Engine {
    pre: Preprocessor,
    store: WordVectorStore,
    rule: RulePredictor,
    remote_punct: Option<RemotePredictor>,
    remote_enc: Option<RemoteEncoder>,
    clock: StdClock,
}

fn endpoint(cfg: &RunConfig, url: &str) -> Result<Endpoint, CliError> {
    Ok(Endpoint::new(
        url,
        Duration::from_millis(cfg.endpoints.timeout_ms),
        cfg.endpoints.retries,
    )?)
}

impl Engine {
    fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        cfg.check_paths()?;
        let r = &cfg.resources;
        let mut pcfg = cfg.preprocess.clone();
        if let Some(p) = &r.stop_words {
            pcfg.stop_words = Some(read_word_list(p)?);
        }
        if let Some(p) = &r.extra_stop_words {
            pcfg.extra_stop_words.extend(read_word_list(p)?);
        }
        if let Some(p) = &r.contractions {
            pcfg.contractions = Some(read_contractions(p)?);
        }
        let store = match &r.vectors {
            Some(p) => crate::io::load_vectors(p)?.store,
            None => synthetic::word_vectors(SYNTHETIC_DIM, 0.3, cfg.seeds.first().copied().unwrap_or(0)),
        };
        let remote_punct = match &cfg.endpoints.punctuator {
            Some(url) => Some(RemotePredictor::new(endpoint(cfg, url)?)),
            None => None,
        };
        let remote_enc = match &cfg.endpoints.encoder {
            Some(url) => Some(RemoteEncoder::new(endpoint(cfg, url)?, cfg.endpoints.encoder_parallelism)),
            None => None,
        };
        Ok(Self {
            pre: Preprocessor::new(pcfg),
            store,
            rule: RulePredictor::default(),
            remote_punct,
            remote_enc,
            clock: StdClock::default(),
        })
    }

    fn resources<'a>(&'a self, cfg: &RunConfig, mean: &'a MeanWordEncoder<'a>) -> Resources<'a> {
        let encoder: &(dyn SentenceEncoder + Sync) = match &self.remote_enc {
            Some(r) => r,
            None => mean,
        };
        let punctuator = if cfg.oracle_punctuation {
            Punctuator::Oracle
        } else if let Some(p) = &self.remote_punct {
            Punctuator::Model(p)
        } else {
            Punctuator::Model(&self.rule)
        };
        Resources {
            preprocessor: &self.pre,
            store: &self.store,
            encoder,
            punctuator,
            clock: &self.clock,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SavedModels {
    format_version: u32,
    config_hash: String,
    models: ChannelModels,
}

fn load_models(cfg: &RunConfig) -> Result<Option<ChannelModels>, CliError> {
    match &cfg.resources.models {
        Some(p) => {
            let saved: SavedModels = read_json(p)?;
            if saved.format_version != MODEL_FORMAT_VERSION {
                return Err(CliError::Format {
                    path: p.clone(),
                    reason: format!("unsupported model format {}", saved.format_version),
                });
            }
            Ok(Some(saved.models))
        }
        None => Ok(None),
    }
}

struct PipelineRun {
    output: chatsumm_core::extractive::BatchOutput,
    prepared: Vec<PreparedTranscript>,
}

fn run_pipeline(cfg: &RunConfig, engine: &Engine, ts: &[ChatTranscript], roles: &RoleMap) -> Result<PipelineRun, CliError> {
    let models = load_models(cfg)?;
    let mean = MeanWordEncoder::new(&engine.store);
    let res = engine.resources(cfg, &mean);
    let batch: Vec<SourceTranscript<'_>> = ts.iter().map(|t| SourceTranscript { transcript: t, roles }).collect();
    let (output, prepared) = summarize_parallel(&batch, &cfg.summarizer, &res, models.as_ref(), &pool(cfg.threads))?;
    Ok(PipelineRun { output, prepared })
}

fn summarize(cfg: &RunConfig, input: &Path, save_models: Option<&Path>) -> Result<Value, CliError> {
    let started = Instant::now();
    let engine = Engine::new(cfg)?;
    let ts = read_transcripts(input)?;
    let roles = load_roles(cfg, &ts)?;
    let mut run = run_pipeline(cfg, &engine, &ts, &roles)?;
    let hash = cfg.hash();
    let records: Vec<SummaryRecord> = run.output.summaries.iter().map(|s| SummaryRecord::new(s, &hash)).collect();
    let t0 = engine.clock.now_nanos();
    let outcome = persist_summaries(&cfg.output_dir, &cfg.summarizer.summary_table_name, &records, cfg.dedup)?;
    run.output
        .timings
        .add(Step::Persist, engine.clock.now_nanos().saturating_sub(t0));
    if let Some(p) = save_models {
        let saved = SavedModels {
            format_version: MODEL_FORMAT_VERSION,
            config_hash: hash.clone(),
            models: run.output.models.clone(),
        };
        write_json(p, &saved)?;
    }
    let meta = RunMetadata {
        config_hash: hash,
        seeds: cfg.seeds.clone(),
        transcripts: ts.len(),
        written: outcome.written,
        skipped: outcome.skipped,
        threads: pool(cfg.threads).current_num_threads(),
        wall_seconds: started.elapsed().as_secs_f64(),
        step_seconds: step_seconds(&run.output.timings),
    };
    let meta_path = cfg.output_dir.join(format!("run_{}.json", cfg.short_hash()));
    write_json(&meta_path, &meta)?;
    let mut v = serde_json::to_value(&meta).expect("metadata serializes");
    v["summaries"] = json!(outcome.path);
    v["metadata"] = json!(meta_path);
    Ok(v)
}

fn channel_documents(
    cfg: &mut RunConfig,
    args: &CorpusArgs,
) -> Result<(Preprocessor, Vec<Document>), CliError> {
    if args.roles.is_some() {
        cfg.resources.role_map = args.roles.clone();
    }
    let engine = Engine::new(cfg)?;
    let ts = read_transcripts(&args.input)?;
    let roles = load_roles(cfg, &ts)?;
    let kind: ChannelKind = args.channel.into();
    let mut docs = Vec::with_capacity(ts.len());
    for t in &ts {
        let ch = match kind {
            ChannelKind::Full => t.clone(),
            ChannelKind::Customer => separate_channels(t, &roles)?.0,
            ChannelKind::Agent => separate_channels(t, &roles)?.1,
        };
        docs.push(engine.pre.prepare(&ch));
    }
    Ok((engine.pre, docs))
}

#[derive(Serialize, Deserialize)]
struct SavedTopicModel {
    format_version: u32,
    model: TopicModel,
    #[serde(default)]
    coherence: Option<CoherenceReport>,
}

fn topics(cfg: &mut RunConfig, cmd: TopicsCommand) -> Result<Value, CliError> {
    match cmd {
        TopicsCommand::Fit { corpus, kind, k, out } => {
            let (_, docs) = channel_documents(cfg, &corpus)?;
            let c = Corpus::build(&docs)?;
            let model = match ModelKind::from(kind) {
                ModelKind::Lda => fit_lda(&c, k, &cfg.summarizer.lda)?,
                ModelKind::Lsi => fit_lsi(&c, k)?,
            };
            let report = coherence(&model, &c, cfg.summarizer.coherence_top_n);
            save_topic_model(&out, model, report)
        }
        TopicsCommand::Score { corpus, model } => {
            let saved: SavedTopicModel = read_json(&model)?;
            let (_, docs) = channel_documents(cfg, &corpus)?;
            let c = Corpus::build(&docs)?;
            let report = coherence(&saved.model, &c, cfg.summarizer.coherence_top_n);
            Ok(serde_json::to_value(report).expect("report serializes"))
        }
        TopicsCommand::Select { corpus, kind, out } => {
            if let Some(k) = kind {
                cfg.summarizer.topic_model_type = Some(k.into());
            }
            let (_, docs) = channel_documents(cfg, &corpus)?;
            let c = Corpus::build(&docs)?;
            let best = pool(cfg.threads).install(|| select_model_parallel(&c, &cfg.summarizer.search()))?;
            save_topic_model(&out, best.model, best.report)
        }
    }
}

fn save_topic_model(out: &Path, model: TopicModel, report: CoherenceReport) -> Result<Value, CliError> {
    let top: Vec<Vec<String>> = (0..model.num_topics)
        .map(|k| model.top_words(k, 10).into_iter().map(String::from).collect())
        .collect();
    let saved = SavedTopicModel {
        format_version: MODEL_FORMAT_VERSION,
        model,
        coherence: Some(report.clone()),
    };
    write_json(out, &saved)?;
    Ok(json!({ "path": out, "coherence": report, "top_words": top }))
}

fn read_input(input: &Path) -> Result<String, CliError> {
    if input.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(read_err(input))?;
        Ok(s)
    } else {
        fs::read_to_string(input).map_err(read_err(input))
    }
}

fn punctuate(cfg: &RunConfig, input: &Path, mode: ModeArg) -> Result<Value, CliError> {
    let engine = Engine::new(cfg)?;
    let mode = match mode {
        ModeArg::Full => PunctMode::Full,
        ModeArg::Periods => PunctMode::PeriodsOnly,
    };
    let stripped = strip_punctuation(&read_input(input)?);
    let out = match &engine.remote_punct {
        Some(p) => restore(&stripped.clean, mode, p, cfg.summarizer.punct_batch_size)?,
        None => restore(&stripped.clean, mode, &engine.rule, cfg.summarizer.punct_batch_size)?,
    };
    // input that already carried punctuation doubles as the reference
    let had_punct = stripped.labels.iter().any(|l| l.symbol().is_some());
    let accuracy = had_punct
        .then(|| punct_accuracy(&stripped.labels, &out.labels, mode).ok())
        .flatten();
    Ok(json!({ "text": out.text, "tokens": out.labels.len(), "accuracy": accuracy }))
}

#[derive(Deserialize)]
struct EvalPair {
    id: String,
    #[serde(default = "full_channel")]
    channel: ChannelKind,
    candidate: String,
    reference: String,
}

fn full_channel() -> ChannelKind {
    ChannelKind::Full
}

fn evaluate(input: &Path, out: Option<&Path>) -> Result<Value, CliError> {
    let pairs: Vec<EvalPair> = read_jsonl(input)?;
    let items: Vec<ScoredItem> = pairs
        .iter()
        .map(|p| ScoredItem {
            id: p.id.clone(),
            channel: p.channel,
            scores: MetricScores::for_texts(&p.candidate, &p.reference),
        })
        .collect();
    let agg = aggregate(items.iter().map(|i| (i.channel, &i.scores)));
    if let Some(dir) = out {
        write_text(&dir.join("evaluation_items.csv"), &item_table(&items)?)?;
        write_json(&dir.join("evaluation_aggregate.json"), &agg)?;
    }
    Ok(serde_json::to_value(&agg).expect("aggregate serializes"))
}

enum ArmSpec {
    Extractive(String),
    Remote(String, String),
    Simulated(Vec<SimulatedArmSpec>),
}

fn parse_arm(s: &str) -> Result<ArmSpec, CliError> {
    if s == "extractive" {
        return Ok(ArmSpec::Extractive("extractive".into()));
    }
    if let Some(name) = s.strip_prefix("extractive:") {
        return Ok(ArmSpec::Extractive(name.into()));
    }
    if let Some(rest) = s.strip_prefix("remote:") {
        let (name, url) = rest
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("arm `{s}`: expected remote:name=url")))?;
        return Ok(ArmSpec::Remote(name.into(), url.into()));
    }
    if let Some(path) = s.strip_prefix("sim:") {
        let path = Path::new(path);
        let v: Value = read_json(path)?;
        let specs = if v.is_array() {
            serde_json::from_value(v)
        } else {
            serde_json::from_value(v).map(|one| vec![one])
        }
        .map_err(|e| CliError::Format {
            path: path.to_owned(),
            reason: e.to_string(),
        })?;
        return Ok(ArmSpec::Simulated(specs));
    }
    Err(CliError::Usage(format!(
        "arm `{s}`: expected extractive[:name], remote:name=url or sim:file.json"
    )))
}

#[derive(Deserialize)]
struct ScoreRow {
    id: String,
    scores: Vec<f64>,
}

fn attach_scores(items: &mut [BanditItem], path: &Path) -> Result<usize, CliError> {
    let rows: Vec<ScoreRow> = read_jsonl(path)?;
    let by_id: BTreeMap<&str, &Vec<f64>> = rows.iter().map(|r| (r.id.as_str(), &r.scores)).collect();
    let mut n = 0;
    for item in items {
        if let Some(s) = by_id.get(item.id.as_str()) {
            item.scores = Some((*s).clone());
            n += 1;
        }
    }
    Ok(n)
}

fn bandit(cfg: &mut RunConfig, cmd: BanditCommand) -> Result<Value, CliError> {
    let (common, kinds) = match cmd {
        BanditCommand::Run { common, policy } => (common, vec![policy]),
        BanditCommand::Compare { common, policies } => (common, policies),
    };
    let kinds: Vec<PolicyKind> = if kinds.is_empty() {
        cfg.bandit.policies.clone()
    } else {
        kinds
            .iter()
            .map(|k| PolicyKind::parse(k).ok_or_else(|| CliError::Usage(format!("unknown policy `{k}`"))))
            .collect::<Result<_, _>>()?
    };
    if let Some(o) = &common.out {
        cfg.output_dir = o.clone();
    }
    if common.roles.is_some() {
        cfg.resources.role_map = common.roles.clone();
    }
    if let Some(m) = common.metric {
        cfg.bandit.run.reward_metric = m.into();
    }
    let seeds = if common.seeds.is_empty() {
        cfg.seeds.clone()
    } else {
        common.seeds.clone()
    };
    let specs: Vec<ArmSpec> = common.arms.iter().map(|a| parse_arm(a)).collect::<Result<_, _>>()?;

    let engine = Engine::new(cfg)?;
    let channel: ChannelKind = common.channel.into();
    let (mut items, models) = match (&common.input, &common.items) {
        (Some(input), _) => {
            let ts = read_transcripts(input)?;
            let roles = load_roles(cfg, &ts)?;
            let run = run_pipeline(cfg, &engine, &ts, &roles)?;
            let items = items_from_pipeline(&run.prepared, &run.output.summaries, channel);
            (items, Some(run.output.models))
        }
        (None, Some(path)) => (read_jsonl::<BanditItem>(path)?, load_models(cfg)?),
        (None, None) => return Err(CliError::Usage("one of --in or --items is required".into())),
    };
    let scored = match &common.scores {
        Some(p) => attach_scores(&mut items, p)?,
        None => 0,
    };

    let mean = MeanWordEncoder::new(&engine.store);
    let res = engine.resources(cfg, &mean);
    let mut arms: Vec<Box<dyn Arm + '_>> = Vec::new();
    for spec in specs {
        match spec {
            ArmSpec::Extractive(name) => {
                let models = models
                    .as_ref()
                    .ok_or_else(|| CliError::Usage("extractive arm needs --in or a configured models file".into()))?;
                arms.push(Box::new(ExtractiveArm {
                    name,
                    config: cfg.summarizer.clone(),
                    resources: res,
                    models,
                }));
            }
            ArmSpec::Remote(name, url) => arms.push(Box::new(RemoteArm::new(name, endpoint(cfg, &url)?))),
            ArmSpec::Simulated(list) => {
                for s in list {
                    arms.push(Box::new(SimulatedArm::new(s)));
                }
            }
        }
    }
    let arm_refs: Vec<&dyn Arm> = arms.iter().map(|a| a.as_ref() as &dyn Arm).collect();
    let policies: Vec<_> = kinds.iter().map(|&k| cfg.bandit.policy_for(k, 0)).collect();
    let cmp = compare_policies(&policies, &arm_refs, &items, &cfg.bandit.run, &seeds)?;

    let arm_names: Vec<String> = arm_refs.iter().map(|a| a.name().to_string()).collect();
    let hash = cfg.derived_short_hash(&common.arms);
    let files = write_bandit_outputs(&cfg.output_dir, &hash, &seeds, &cmp.reports)?;
    let summary: Vec<Value> = kinds
        .iter()
        .enumerate()
        .map(|(i, k)| {
            let rs = cmp.reports_for(i, seeds.len());
            let ams = rs.iter().map(|r| r.ams).sum::<f64>() / rs.len() as f64;
            json!({ "policy": k.as_str(), "mean_ams": ams, "best_arms": rs.iter().map(|r| &arm_names[r.best_arm]).collect::<Vec<_>>() })
        })
        .collect();
    Ok(json!({
        "items": items.len(),
        "scored_items": scored,
        "arms": arm_names,
        "seeds": seeds,
        "config_hash": hash,
        "policies": summary,
        "reports": files.reports,
        "curves": files.curves,
        "table": files.table,
    }))
}

fn report(summaries: &[PathBuf], bandit_dir: Option<&Path>, out: &Path) -> Result<Value, CliError> {
    let mut rows = Vec::new();
    let mut hashes = Vec::new();
    for path in summaries {
        let records = read_summaries(path)?;
        let mut groups: Vec<(String, Vec<SummaryRecord>)> = Vec::new();
        for r in records {
            match groups.iter_mut().find(|g| g.0 == r.config_hash) {
                Some(g) => g.1.push(r),
                None => groups.push((r.config_hash.clone(), vec![r])),
            }
        }
        for (hash, recs) in groups {
            let short = &hash[..hash.len().min(12)];
            let meta = path
                .parent()
                .map(|d| d.join(format!("run_{short}.json")))
                .filter(|p| p.exists());
            let wall_seconds = match meta {
                Some(p) => read_json::<RunMetadata>(&p)?.wall_seconds,
                None => 0.0,
            };
            rows.push(SummarizerRow {
                name: format!("extractive-{short}"),
                aggregate: aggregate_records(&recs),
                wall_seconds,
            });
            hashes.push(short.to_string());
        }
    }
    let tag = if hashes.is_empty() { "empty".to_string() } else { hashes.join("-") };
    let table = out.join(format!("summarizer_table_{tag}.csv"));
    write_text(&table, &summarizer_table(&rows)?)?;
    let mut result = json!({ "summarizer_table": table, "rows": rows.len() });
    if let Some(dir) = bandit_dir {
        let mut names: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(read_err(dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension().is_some_and(|x| x == "json")
                    && p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("bandit_"))
            })
            .collect();
        names.sort();
        let reports = names.iter().map(|p| read_json(p)).collect::<Result<Vec<_>, _>>()?;
        let path = out.join("bandit_table.csv");
        write_text(&path, &bandit_table(&reports)?)?;
        result["bandit_table"] = json!(path);
        result["bandit_reports"] = json!(reports.len());
    }
    Ok(result)
}
