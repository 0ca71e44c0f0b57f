//! Extractive summarization of customer and agent channels.
//!
//! A batch runs in three stages so a caller can parallelize the per-transcript
//! parts: [`separate_and_restore`] (steps 1-2) per transcript, then document
//! preparation and topic model selection over the whole batch (steps 3-4), then
//! [`finish_transcript`] (steps 5-9) per transcript. Persisting the results
//! (step 10) is left to the caller.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embeddings::{cosine, EncoderError, SentenceEncoder, WordVectorStore};
use crate::metrics::{punct_accuracy, MetricScores};
use crate::preprocess::{Corpus, CorpusError, Document, PhraseModel, Preprocessor};
use crate::punctuation::{
    boundaries_of, merge_tokens, restore_with_boundaries, strip_punctuation, OraclePredictor,
    PunctError, PunctLabel, PunctMode, Predictor,
};
use crate::topics::{
    dominant_topics, select_optimal_model, Candidate, DominantTopics, LdaParams, ModelKind,
    TopicError, TopicModel, TopicSearch,
};
use crate::transcript::{separate_channels, ChannelKind, ChatTranscript, RoleMap, Sentence, TranscriptError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermMethod {
    /// Word-vector pairs between document words and dominant-topic keywords.
    Global,
    /// Most frequent document words.
    Local,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SummarizerConfig {
    pub topic_model_type: Option<ModelKind>,
    /// Smallest topic count tried during selection.
    pub number_of_topics: usize,
    pub max_topics: usize,
    pub topic_step: usize,
    pub coherence_top_n: usize,
    pub lda: LdaParams,
    pub number_of_dominant_topics: usize,
    pub keywords_per_topic: usize,
    pub punct_batch_size: usize,
    pub term_extraction_method: TermMethod,
    /// Sentences per summary.
    pub summary_length: usize,
    pub summary_table_name: String,
    pub word_similarity_threshold: f64,
    pub uniqueness_threshold: f64,
}

impl Default for SummarizerConfig {
    fn default() -> Self {
        Self {
            topic_model_type: None,
            number_of_topics: 5,
            max_topics: 50,
            topic_step: 5,
            coherence_top_n: 10,
            lda: LdaParams::default(),
            number_of_dominant_topics: 1,
            keywords_per_topic: 10,
            punct_batch_size: 512,
            term_extraction_method: TermMethod::Global,
            summary_length: 5,
            summary_table_name: String::from("summary_results"),
            word_similarity_threshold: 0.5,
            uniqueness_threshold: 0.5,
        }
    }
}

impl SummarizerConfig {
    pub fn validate(&self) -> Result<(), ExtractiveError> {
        let unit = 0.0..=1.0;
        if self.summary_length == 0 {
            return Err(ExtractiveError::InvalidConfig("summary_length must be at least 1"));
        }
        if !unit.contains(&self.word_similarity_threshold) {
            return Err(ExtractiveError::InvalidConfig("word_similarity_threshold must lie in [0, 1]"));
        }
        if !unit.contains(&self.uniqueness_threshold) {
            return Err(ExtractiveError::InvalidConfig("uniqueness_threshold must lie in [0, 1]"));
        }
        if self.number_of_topics == 0 {
            return Err(ExtractiveError::InvalidConfig("number_of_topics must be at least 1"));
        }
        Ok(())
    }

    pub fn search(&self) -> TopicSearch {
        TopicSearch {
            kind: self.topic_model_type,
            min_topics: self.number_of_topics,
            max_topics: self.max_topics,
            step: self.topic_step,
            coherence_top_n: self.coherence_top_n,
            lda: self.lda.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Separate,
    PeriodRestore,
    Prepare,
    SelectModel,
    DominantTopics,
    SignificantTerms,
    Extract,
    FullRestore,
    Evaluate,
    Persist,
}

impl Step {
    pub const ALL: [Step; 10] = [
        Step::Separate,
        Step::PeriodRestore,
        Step::Prepare,
        Step::SelectModel,
        Step::DominantTopics,
        Step::SignificantTerms,
        Step::Extract,
        Step::FullRestore,
        Step::Evaluate,
        Step::Persist,
    ];

    /// 1-based position in the procedure.
    pub fn number(self) -> usize {
        self as usize + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Step::Separate => "separate",
            Step::PeriodRestore => "period_restore",
            Step::Prepare => "prepare",
            Step::SelectModel => "select_model",
            Step::DominantTopics => "dominant_topics",
            Step::SignificantTerms => "significant_terms",
            Step::Extract => "extract",
            Step::FullRestore => "full_restore",
            Step::Evaluate => "evaluate",
            Step::Persist => "persist",
        }
    }
}

/// Monotonic time source; the core crate has no clock of its own.
pub trait StepClock {
    fn now_nanos(&self) -> u64;
}

/// Clock that always reads zero, for callers that do not time steps.
impl StepClock for () {
    fn now_nanos(&self) -> u64 {
        0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepTimings {
    pub nanos: [u64; 10],
}

impl StepTimings {
    pub fn add(&mut self, step: Step, nanos: u64) {
        self.nanos[step as usize] += nanos;
    }

    pub fn merge(&mut self, other: &StepTimings) {
        for (a, b) in self.nanos.iter_mut().zip(other.nanos) {
            *a += b;
        }
    }

    pub fn get(&self, step: Step) -> u64 {
        self.nanos[step as usize]
    }

    pub fn total(&self) -> u64 {
        self.nanos.iter().sum()
    }
}

fn timed<T>(clock: &dyn StepClock, timings: &mut StepTimings, step: Step, f: impl FnOnce() -> T) -> T {
    let start = clock.now_nanos();
    let out = f();
    timings.add(step, clock.now_nanos().saturating_sub(start));
    out
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StageError {
    #[error(transparent)]
    Transcript(#[from] TranscriptError),
    #[error(transparent)]
    Punctuation(#[from] PunctError),
    #[error(transparent)]
    Topic(#[from] TopicError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtractiveError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("step {} ({}) failed for `{transcript_id}`: {source}", step.number(), step.name())]
    Step {
        step: Step,
        transcript_id: String,
        source: StageError,
    },
}

fn at<E: Into<StageError>>(step: Step, id: &str) -> impl FnOnce(E) -> ExtractiveError + '_ {
    move |e| ExtractiveError::Step {
        step,
        transcript_id: String::from(id),
        source: e.into(),
    }
}

/// Which restorer to use: a predictor, or the reference labels themselves.
#[derive(Clone, Copy)]
pub enum Punctuator<'a> {
    Model(&'a (dyn Predictor + Sync)),
    Oracle,
}

impl Punctuator<'_> {
    fn restore(
        &self,
        tokens: &[&str],
        reference: &[PunctLabel],
        mode: PunctMode,
        segment_size: usize,
        boundaries: &[usize],
    ) -> Result<Vec<PunctLabel>, PunctError> {
        let text = tokens.join(" ");
        let out = match self {
            Punctuator::Model(p) => restore_with_boundaries(&text, mode, *p, segment_size, boundaries)?,
            Punctuator::Oracle => {
                let oracle = OraclePredictor::new(reference.to_vec());
                restore_with_boundaries(&text, mode, &oracle, segment_size, boundaries)?
            }
        };
        Ok(out.labels)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Punctuator::Model(_) => "model",
            Punctuator::Oracle => "oracle",
        }
    }
}

/// Shared read-only inputs for summarization.
#[derive(Clone, Copy)]
pub struct Resources<'a> {
    pub preprocessor: &'a Preprocessor,
    pub store: &'a WordVectorStore,
    pub encoder: &'a (dyn SentenceEncoder + Sync),
    pub punctuator: Punctuator<'a>,
    pub clock: &'a (dyn StepClock + Sync),
}

/// A topic model with the phrase model its vocabulary was built with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "ChannelModelRepr", into = "ChannelModelRepr")]
pub struct ChannelModel {
    pub model: TopicModel,
    pub phrases: Option<PhraseModel>,
    pub coherence: Option<f64>,
    index: BTreeMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct ChannelModelRepr {
    model: TopicModel,
    phrases: Option<PhraseModel>,
    #[serde(default)]
    coherence: Option<f64>,
}

impl From<ChannelModelRepr> for ChannelModel {
    fn from(r: ChannelModelRepr) -> Self {
        let mut m = ChannelModel::new(r.model, r.phrases);
        m.coherence = r.coherence;
        m
    }
}

impl From<ChannelModel> for ChannelModelRepr {
    fn from(m: ChannelModel) -> Self {
        Self {
            model: m.model,
            phrases: m.phrases,
            coherence: m.coherence,
        }
    }
}

impl ChannelModel {
    pub fn new(model: TopicModel, phrases: Option<PhraseModel>) -> Self {
        let index = model
            .vocabulary
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        Self {
            model,
            phrases,
            coherence: None,
            index,
        }
    }

    fn from_candidate(c: Candidate, phrases: Option<PhraseModel>) -> Self {
        let mut m = Self::new(c.model, phrases);
        m.coherence = Some(c.report.score);
        m
    }

    /// Bag-of-words over the model vocabulary; unknown tokens are skipped.
    pub fn bow_for(&self, tokens: &[String]) -> Vec<(u32, u32)> {
        let mut bow: Vec<(u32, u32)> = Vec::new();
        let mut slot: BTreeMap<u32, usize> = BTreeMap::new();
        for tok in tokens {
            if let Some(&id) = self.index.get(tok) {
                match slot.get(&id) {
                    Some(&i) => bow[i].1 += 1,
                    None => {
                        slot.insert(id, bow.len());
                        bow.push((id, 1));
                    }
                }
            }
        }
        bow
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelModels {
    pub customer: Option<ChannelModel>,
    pub agent: Option<ChannelModel>,
}

impl ChannelModels {
    pub fn get(&self, kind: ChannelKind) -> Option<&ChannelModel> {
        match kind {
            ChannelKind::Customer => self.customer.as_ref(),
            ChannelKind::Agent => self.agent.as_ref(),
            ChannelKind::Full => None,
        }
    }

    fn slot(&mut self, kind: ChannelKind) -> &mut Option<ChannelModel> {
        match kind {
            ChannelKind::Agent => &mut self.agent,
            _ => &mut self.customer,
        }
    }
}

/// Sentence significance query: every (document word, keyword) pair whose word
/// vectors reach cosine `w` contributes both words, first occurrence kept.
pub fn significant_terms<A: AsRef<str>, B: AsRef<str>>(
    doc: &[A],
    dom_kwds: &[B],
    w: f64,
    store: &WordVectorStore,
) -> String {
    let keyword_vecs: Vec<(&str, Option<Vec<f64>>)> = dom_kwds
        .iter()
        .map(|k| (k.as_ref(), store.token_vector(k.as_ref())))
        .collect();
    let mut seen: BTreeMap<&str, ()> = BTreeMap::new();
    let mut out: Vec<&str> = Vec::new();
    let mut visited_doc: BTreeMap<&str, ()> = BTreeMap::new();
    for k1 in doc {
        let k1 = k1.as_ref();
        if visited_doc.insert(k1, ()).is_some() {
            continue;
        }
        let Some(v1) = store.token_vector(k1) else {
            continue;
        };
        for (k2, v2) in &keyword_vecs {
            let Some(v2) = v2 else { continue };
            if cosine(&v1, v2).unwrap_or(0.0) >= w {
                for word in [k1, *k2] {
                    if seen.insert(word, ()).is_none() {
                        out.push(word);
                    }
                }
            }
        }
    }
    out.join(" ")
}

/// The `n` most frequent document words, ties broken by first occurrence.
pub fn local_terms<S: AsRef<str>>(doc: &[S], n: usize) -> String {
    let mut counts: Vec<(&str, usize)> = Vec::new();
    let mut slot: BTreeMap<&str, usize> = BTreeMap::new();
    for tok in doc {
        let tok = tok.as_ref();
        match slot.get(tok) {
            Some(&i) => counts[i].1 += 1,
            None => {
                slot.insert(tok, counts.len());
                counts.push((tok, 1));
            }
        }
    }
    // stable sort keeps first-occurrence order among equal counts
    counts.sort_by(|a, b| b.1.cmp(&a.1));
    let top: Vec<&str> = counts.into_iter().take(n).map(|(t, _)| t).collect();
    top.join(" ")
}

/// Greedy near-duplicate removal: keep item `i` unless its similarity to some
/// already kept item exceeds `u`. The first item is always kept.
pub fn unique_indices(n: usize, u: f64, sim: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..n {
        if kept.iter().all(|&j| sim(j, i) <= u) {
            kept.push(i);
        }
    }
    kept
}

/// Indices of the `l` highest scores (earlier index on ties), in ascending index order.
pub fn top_l(scores: &[f64], l: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(l);
    order.sort_unstable();
    order
}

fn encode_all(sentences: &[Sentence], encoder: &dyn SentenceEncoder) -> Result<Vec<Vec<f64>>, EncoderError> {
    sentences
        .iter()
        .map(|s| encoder.encode(&s.text).map(|v| v.values))
        .collect()
}

fn sim(a: &[f64], b: &[f64]) -> f64 {
    cosine(a, b).unwrap_or(0.0)
}

pub fn reduce_unique_sentences(
    sentences: &[Sentence],
    u: f64,
    encoder: &dyn SentenceEncoder,
) -> Result<Vec<Sentence>, EncoderError> {
    let vecs = encode_all(sentences, encoder)?;
    Ok(unique_indices(sentences.len(), u, |i, j| sim(&vecs[i], &vecs[j]))
        .into_iter()
        .map(|i| sentences[i].clone())
        .collect())
}

pub fn rank_and_extract(
    sentences: &[Sentence],
    term_string: &str,
    l: usize,
    encoder: &dyn SentenceEncoder,
) -> Result<Vec<Sentence>, EncoderError> {
    let vecs = encode_all(sentences, encoder)?;
    let query = encoder.encode(term_string)?.values;
    let scores: Vec<f64> = vecs.iter().map(|v| sim(v, &query)).collect();
    Ok(top_l(&scores, l).into_iter().map(|i| sentences[i].clone()).collect())
}

/// One channel after punctuation was stripped and periods restored.
#[derive(Debug, Clone, PartialEq)]
pub struct RestoredChannel {
    pub transcript: ChatTranscript,
    /// Lowercased words with punctuation removed.
    pub tokens: Vec<String>,
    /// Punctuation that originally followed each word.
    pub reference: Vec<PunctLabel>,
    /// Restored sentence boundaries.
    pub labels: Vec<PunctLabel>,
    pub boundaries: Vec<usize>,
    pub text: String,
    pub spans: Vec<Range<usize>>,
    pub sentences: Vec<Sentence>,
    pub period_accuracy: Option<f64>,
    pub document: Document,
}

impl RestoredChannel {
    pub fn kind(&self) -> ChannelKind {
        self.transcript.channel_kind
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedTranscript {
    pub id: String,
    pub full_words: usize,
    pub customer: RestoredChannel,
    pub agent: RestoredChannel,
    pub timings: StepTimings,
}

impl PreparedTranscript {
    pub fn channel(&self, kind: ChannelKind) -> &RestoredChannel {
        match kind {
            ChannelKind::Agent => &self.agent,
            _ => &self.customer,
        }
    }

    fn channel_mut(&mut self, kind: ChannelKind) -> &mut RestoredChannel {
        match kind {
            ChannelKind::Agent => &mut self.agent,
            _ => &mut self.customer,
        }
    }
}

fn sentence_spans(labels: &[PunctLabel]) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, l) in labels.iter().enumerate() {
        if matches!(l, PunctLabel::Period | PunctLabel::Question) {
            out.push(start..i + 1);
            start = i + 1;
        }
    }
    if start < labels.len() {
        out.push(start..labels.len());
    }
    out
}

fn restore_channel(
    transcript: ChatTranscript,
    cfg: &SummarizerConfig,
    punctuator: Punctuator<'_>,
) -> Result<RestoredChannel, PunctError> {
    let stripped = strip_punctuation(&transcript.channel_text());
    let boundaries = boundaries_of(transcript.utterances.iter().map(|u| u.text.as_str()));
    let tokens: Vec<String> = if stripped.clean.is_empty() {
        Vec::new()
    } else {
        stripped.clean.split(' ').map(String::from).collect()
    };
    let words: Vec<&str> = tokens.iter().map(String::as_str).collect();
    let labels = if words.is_empty() {
        Vec::new()
    } else {
        punctuator.restore(&words, &stripped.labels, PunctMode::PeriodsOnly, cfg.punct_batch_size, &boundaries)?
    };
    let spans = sentence_spans(&labels);
    let sentences = spans
        .iter()
        .enumerate()
        .map(|(index, r)| Sentence {
            index,
            text: merge_tokens(&words[r.clone()], &labels[r.clone()]),
        })
        .collect();
    let period_accuracy = (!words.is_empty())
        .then(|| punct_accuracy(&stripped.labels, &labels, PunctMode::PeriodsOnly).ok())
        .flatten();
    Ok(RestoredChannel {
        document: Document {
            transcript_id: transcript.id.clone(),
            tokens: Vec::new(),
        },
        text: merge_tokens(&words, &labels),
        transcript,
        tokens,
        reference: stripped.labels,
        labels,
        boundaries,
        spans,
        sentences,
        period_accuracy,
    })
}

/// A full transcript paired with the roles of its speakers.
#[derive(Debug, Clone, Copy)]
pub struct SourceTranscript<'a> {
    pub transcript: &'a ChatTranscript,
    pub roles: &'a RoleMap,
}

/// Steps 1 and 2: channel separation, then stripping and period restoration of both channels.
pub fn separate_and_restore(
    src: SourceTranscript<'_>,
    cfg: &SummarizerConfig,
    res: &Resources<'_>,
) -> Result<PreparedTranscript, ExtractiveError> {
    let id = src.transcript.id.as_str();
    let mut timings = StepTimings::default();
    let (customer, agent) = timed(res.clock, &mut timings, Step::Separate, || {
        separate_channels(src.transcript, src.roles)
    })
    .map_err(at(Step::Separate, id))?;
    let (customer, agent) = timed(res.clock, &mut timings, Step::PeriodRestore, || {
        Ok::<_, PunctError>((
            restore_channel(customer, cfg, res.punctuator)?,
            restore_channel(agent, cfg, res.punctuator)?,
        ))
    })
    .map_err(at(Step::PeriodRestore, id))?;
    Ok(PreparedTranscript {
        id: String::from(id),
        full_words: src.transcript.word_count(),
        customer,
        agent,
        timings,
    })
}

const CHANNELS: [ChannelKind; 2] = [ChannelKind::Customer, ChannelKind::Agent];

/// Phrase model learned over one channel of the batch.
pub fn learn_channel_phrases(
    batch: &[PreparedTranscript],
    kind: ChannelKind,
    pre: &Preprocessor,
) -> Option<PhraseModel> {
    let streams: Vec<Vec<String>> = batch
        .iter()
        .map(|p| pre.filter_stage(&p.channel(kind).transcript.channel_text()))
        .collect();
    pre.learn_phrases(&streams)
}

/// Step 3: document preparation for both channels of every transcript.
/// Returns the phrase models used, learned over the batch unless supplied.
pub fn prepare_documents(
    batch: &mut [PreparedTranscript],
    pre: &Preprocessor,
    given: Option<&ChannelModels>,
) -> [Option<PhraseModel>; 2] {
    CHANNELS.map(|kind| {
        let phrases = match given {
            Some(models) => models.get(kind).and_then(|m| m.phrases.clone()),
            None => learn_channel_phrases(batch, kind, pre),
        };
        for p in batch.iter_mut() {
            let ch = p.channel_mut(kind);
            ch.document = pre.prepare_with(&ch.transcript, phrases.as_ref());
        }
        phrases
    })
}

/// Corpus over the non-empty documents of one channel.
pub fn channel_corpus(batch: &[PreparedTranscript], kind: ChannelKind) -> Result<Corpus, CorpusError> {
    let docs: Vec<Document> = batch
        .iter()
        .map(|p| &p.channel(kind).document)
        .filter(|d| !d.tokens.is_empty())
        .cloned()
        .collect();
    Corpus::build(&docs)
}

/// Step 4 with a caller-supplied selection routine (for instance a parallel grid).
pub fn select_channel_models_with(
    batch: &[PreparedTranscript],
    phrases: [Option<PhraseModel>; 2],
    cfg: &SummarizerConfig,
    select: impl Fn(&Corpus, &TopicSearch) -> Result<Candidate, TopicError>,
) -> Result<ChannelModels, ExtractiveError> {
    let search = cfg.search();
    let mut models = ChannelModels::default();
    for (kind, phrases) in CHANNELS.into_iter().zip(phrases) {
        let corpus = match channel_corpus(batch, kind) {
            Ok(c) => c,
            Err(CorpusError::EmptyCorpus) => continue,
        };
        match select(&corpus, &search) {
            Ok(best) => *models.slot(kind) = Some(ChannelModel::from_candidate(best, phrases)),
            Err(TopicError::EmptyCorpus) => {}
            Err(e) => return Err(at(Step::SelectModel, kind.as_str())(e)),
        }
    }
    Ok(models)
}

pub fn select_channel_models(
    batch: &[PreparedTranscript],
    phrases: [Option<PhraseModel>; 2],
    cfg: &SummarizerConfig,
) -> Result<ChannelModels, ExtractiveError> {
    select_channel_models_with(batch, phrases, cfg, select_optimal_model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub transcript_id: String,
    pub channel_kind: ChannelKind,
    pub sentences: Vec<Sentence>,
    pub term_string: String,
    pub punctuated_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSummary {
    pub summary: Summary,
    /// Absent when the channel is empty.
    pub scores: Option<MetricScores>,
    pub dominant: DominantTopics,
    pub channel_words: usize,
    pub document_words: usize,
    /// Sentence-boundary agreement of the period-restored channel with its original punctuation.
    pub period_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptSummary {
    pub transcript_id: String,
    pub full_words: usize,
    pub customer: ChannelSummary,
    pub agent: ChannelSummary,
    pub timings: StepTimings,
}

impl TranscriptSummary {
    pub fn channel(&self, kind: ChannelKind) -> &ChannelSummary {
        match kind {
            ChannelKind::Agent => &self.agent,
            _ => &self.customer,
        }
    }
}

fn summarize_channel(
    ch: &RestoredChannel,
    model: Option<&ChannelModel>,
    cfg: &SummarizerConfig,
    res: &Resources<'_>,
    timings: &mut StepTimings,
) -> Result<ChannelSummary, (Step, StageError)> {
    let id = ch.transcript.id.as_str();
    let clock = res.clock;
    let dominant = timed(clock, timings, Step::DominantTopics, || match model {
        Some(m) => dominant_topics(
            &m.model,
            id,
            &m.bow_for(&ch.document.tokens),
            cfg.number_of_dominant_topics,
            cfg.keywords_per_topic,
        ),
        None => DominantTopics {
            transcript_id: String::from(id),
            entries: Vec::new(),
        },
    });
    let term_string = timed(clock, timings, Step::SignificantTerms, || match cfg.term_extraction_method {
        TermMethod::Global => significant_terms(
            &ch.document.tokens,
            &dominant.keywords(),
            cfg.word_similarity_threshold,
            res.store,
        ),
        TermMethod::Local => local_terms(&ch.document.tokens, cfg.keywords_per_topic),
    });

    let selected: Vec<usize> = timed(clock, timings, Step::Extract, || {
        let vecs = encode_all(&ch.sentences, res.encoder)?;
        let kept = unique_indices(vecs.len(), cfg.uniqueness_threshold, |i, j| sim(&vecs[i], &vecs[j]));
        let query = res.encoder.encode(&term_string)?.values;
        let scores: Vec<f64> = kept.iter().map(|&i| sim(&vecs[i], &query)).collect();
        Ok::<_, EncoderError>(top_l(&scores, cfg.summary_length).into_iter().map(|k| kept[k]).collect())
    })
    .map_err(|e| (Step::Extract, e.into()))?;

    // step 8: drop the restored periods and restore full punctuation on the summary alone
    let positions: Vec<usize> = selected.iter().flat_map(|&s| ch.spans[s].clone()).collect();
    let words: Vec<&str> = positions.iter().map(|&p| ch.tokens[p].as_str()).collect();
    let reference: Vec<PunctLabel> = positions.iter().map(|&p| ch.reference[p]).collect();
    let restored = timed(clock, timings, Step::FullRestore, || {
        if words.is_empty() {
            return Ok(Vec::new());
        }
        let boundaries: Vec<usize> = positions
            .iter()
            .enumerate()
            .filter(|(_, p)| ch.boundaries.binary_search(p).is_ok())
            .map(|(i, _)| i)
            .collect();
        res.punctuator
            .restore(&words, &reference, PunctMode::Full, cfg.punct_batch_size, &boundaries)
    })
    .map_err(|e| (Step::FullRestore, e.into()))?;
    let punctuated_text = merge_tokens(&words, &restored);

    let scores = timed(clock, timings, Step::Evaluate, || {
        (!ch.is_empty()).then(|| {
            let mut s = MetricScores::for_texts(&punctuated_text, &ch.text);
            s.punct_accuracy = punct_accuracy(&reference, &restored, PunctMode::PeriodsOnly).ok();
            s
        })
    });

    Ok(ChannelSummary {
        summary: Summary {
            transcript_id: String::from(id),
            channel_kind: ch.kind(),
            sentences: selected.iter().map(|&i| ch.sentences[i].clone()).collect(),
            term_string,
            punctuated_text,
        },
        scores,
        dominant,
        channel_words: ch.transcript.word_count(),
        document_words: ch.document.tokens.len(),
        period_accuracy: ch.period_accuracy,
    })
}

/// Steps 5 to 9 for both channels of one prepared transcript.
pub fn finish_transcript(
    p: &PreparedTranscript,
    models: &ChannelModels,
    cfg: &SummarizerConfig,
    res: &Resources<'_>,
) -> Result<TranscriptSummary, ExtractiveError> {
    let mut timings = p.timings;
    let mut run = |kind| {
        summarize_channel(p.channel(kind), models.get(kind), cfg, res, &mut timings).map_err(
            |(step, source)| ExtractiveError::Step {
                step,
                transcript_id: p.id.clone(),
                source,
            },
        )
    };
    let customer = run(ChannelKind::Customer)?;
    let agent = run(ChannelKind::Agent)?;
    Ok(TranscriptSummary {
        transcript_id: p.id.clone(),
        full_words: p.full_words,
        customer,
        agent,
        timings,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutput {
    pub summaries: Vec<TranscriptSummary>,
    pub models: ChannelModels,
    /// Per-step time summed over the batch.
    pub timings: StepTimings,
}

/// Sequential batch run. Topic models are selected over the batch unless `models` is given.
pub fn summarize_batch(
    batch: &[SourceTranscript<'_>],
    cfg: &SummarizerConfig,
    res: &Resources<'_>,
    models: Option<&ChannelModels>,
) -> Result<BatchOutput, ExtractiveError> {
    cfg.validate()?;
    let mut prepared = batch
        .iter()
        .map(|&src| separate_and_restore(src, cfg, res))
        .collect::<Result<Vec<_>, _>>()?;
    let mut timings = StepTimings::default();
    let phrases = timed(res.clock, &mut timings, Step::Prepare, || {
        prepare_documents(&mut prepared, res.preprocessor, models)
    });
    let models = match models {
        Some(m) => m.clone(),
        None => timed(res.clock, &mut timings, Step::SelectModel, || {
            select_channel_models(&prepared, phrases, cfg)
        })?,
    };
    let summaries = prepared
        .iter()
        .map(|p| finish_transcript(p, &models, cfg, res))
        .collect::<Result<Vec<_>, _>>()?;
    for s in &summaries {
        timings.merge(&s.timings);
    }
    Ok(BatchOutput {
        summaries,
        models,
        timings,
    })
}

/// Single-transcript run of steps 1 to 9.
pub fn summarize_extractive(
    src: SourceTranscript<'_>,
    cfg: &SummarizerConfig,
    res: &Resources<'_>,
    models: Option<&ChannelModels>,
) -> Result<TranscriptSummary, ExtractiveError> {
    let mut out = summarize_batch(core::slice::from_ref(&src), cfg, res, models)?;
    Ok(out.summaries.remove(0))
}

#[cfg(test)]
mod tests;
