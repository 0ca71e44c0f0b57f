//! Contextual multi-armed bandit routing across summarizer arms.
//!
//! Every policy keeps the same bookkeeping: a running mean reward `Q(a)` and
//! pull count per arm, a total pull count, and the running average metric score
//! over all rounds. Contextual policies add an online logistic model per arm.

mod model;

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arms::{Arm, ArmOutput, ArmRequest};
use crate::extractive::{ChannelSummary, PreparedTranscript, TranscriptSummary};
use crate::metrics::MetricScores;
use crate::preprocess::Document;
use crate::topics::DominantTopics;
use crate::transcript::{ChannelKind, ChatTranscript};

pub use model::{InversePrecision, OnlineLogistic};

pub const NUMERIC_FEATURES: usize = 5;
/// Topic ids map onto this many one-hot slots.
pub const TOPIC_SLOTS: usize = 50;
/// One-hot slot for documents without a dominant topic.
pub const NONE_SLOT: usize = TOPIC_SLOTS;
pub const FEATURE_DIM: usize = NUMERIC_FEATURES + TOPIC_SLOTS + 1;

/// Transcript descriptor before standardization.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RawContext {
    /// Word count of the channel.
    pub length: f64,
    /// Channel length over full chat length.
    pub length_fraction: f64,
    pub dominant_topic_id: Option<usize>,
    pub dominant_topic_contribution: f64,
    pub num_dominant_keywords: usize,
    pub num_document_words: usize,
}

impl RawContext {
    pub fn new(
        t: &ChatTranscript,
        full_len: usize,
        dt: &DominantTopics,
        doc: &Document,
    ) -> Self {
        let length = t.word_count();
        Self::from_counts(length, full_len, dt, doc.tokens.len())
    }

    pub fn from_counts(length: usize, full_len: usize, dt: &DominantTopics, doc_words: usize) -> Self {
        let length_fraction = if full_len == 0 {
            0.0
        } else {
            (length as f64 / full_len as f64).clamp(0.0, 1.0)
        };
        let first = dt.entries.first();
        Self {
            length: length as f64,
            length_fraction,
            dominant_topic_id: first.map(|e| e.topic_id),
            dominant_topic_contribution: first.map_or(0.0, |e| e.weight),
            num_dominant_keywords: dt.entries.iter().map(|e| e.keywords.len()).sum(),
            num_document_words: doc_words,
        }
    }

    pub fn from_summary(cs: &ChannelSummary, full_len: usize) -> Self {
        Self::from_counts(cs.channel_words, full_len, &cs.dominant, cs.document_words)
    }

    /// Length, fraction, contribution, keyword count, document word count.
    pub fn numeric(&self) -> [f64; NUMERIC_FEATURES] {
        [
            self.length,
            self.length_fraction,
            self.dominant_topic_contribution,
            self.num_dominant_keywords as f64,
            self.num_document_words as f64,
        ]
    }

    pub fn topic_slot(&self) -> usize {
        self.dominant_topic_id.map_or(NONE_SLOT, |id| id % TOPIC_SLOTS)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Context {
    pub raw: RawContext,
    /// Running z-scores of the numeric features.
    pub standardized: [f64; NUMERIC_FEATURES],
}

impl Context {
    /// Standardized numeric features followed by the topic one-hot block.
    pub fn features(&self) -> Vec<f64> {
        let mut f = vec![0.0; FEATURE_DIM];
        f[..NUMERIC_FEATURES].copy_from_slice(&self.standardized);
        f[NUMERIC_FEATURES + self.raw.topic_slot()] = 1.0;
        f
    }
}

/// Welford running mean and variance per numeric feature.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContextBuilder {
    n: u64,
    mean: [f64; NUMERIC_FEATURES],
    m2: [f64; NUMERIC_FEATURES],
}

impl ContextBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Folds `raw` into the running statistics and standardizes it with them.
    pub fn observe(&mut self, raw: RawContext) -> Context {
        self.n += 1;
        let n = self.n as f64;
        let x = raw.numeric();
        let mut z = [0.0; NUMERIC_FEATURES];
        for i in 0..NUMERIC_FEATURES {
            let d = x[i] - self.mean[i];
            self.mean[i] += d / n;
            self.m2[i] += d * (x[i] - self.mean[i]);
            let sd = libm::sqrt(self.m2[i] / n);
            z[i] = if sd > 0.0 { (x[i] - self.mean[i]) / sd } else { 0.0 };
        }
        Context {
            raw,
            standardized: z,
        }
    }

    pub fn build(&mut self, t: &ChatTranscript, full_len: usize, dt: &DominantTopics, doc: &Document) -> Context {
        self.observe(RawContext::new(t, full_len, dt, doc))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    EpsilonGreedy,
    ExploreFirst,
    Softmax,
    AdaptiveGreedy,
    LogisticUcb,
    BootstrappedUcb,
    BootstrappedTs,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 7] = [
        PolicyKind::EpsilonGreedy,
        PolicyKind::ExploreFirst,
        PolicyKind::Softmax,
        PolicyKind::AdaptiveGreedy,
        PolicyKind::LogisticUcb,
        PolicyKind::BootstrappedUcb,
        PolicyKind::BootstrappedTs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::EpsilonGreedy => "epsilon_greedy",
            PolicyKind::ExploreFirst => "explore_first",
            PolicyKind::Softmax => "softmax",
            PolicyKind::AdaptiveGreedy => "adaptive_greedy",
            PolicyKind::LogisticUcb => "logistic_ucb",
            PolicyKind::BootstrappedUcb => "bootstrapped_ucb",
            PolicyKind::BootstrappedTs => "bootstrapped_ts",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    fn bootstrapped(self) -> bool {
        matches!(self, PolicyKind::BootstrappedUcb | PolicyKind::BootstrappedTs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    pub epsilon: f64,
    /// Use `ε / √(N + 1)` instead of a constant ε.
    pub decay_epsilon: bool,
    /// Uniform rounds per arm before exploiting.
    pub explore_rounds_per_arm: usize,
    pub tau: f64,
    pub adaptive_percentile: f64,
    pub adaptive_window: usize,
    pub alpha: f64,
    pub replicas: usize,
    pub ucb_percentile: f64,
    pub learning_rate: f64,
    pub l2: f64,
    /// Pull every arm once before the policy takes over (not for explore-first).
    pub warm_start: bool,
    pub seed: u64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self::new(PolicyKind::LogisticUcb)
    }
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            epsilon: 0.1,
            decay_epsilon: false,
            explore_rounds_per_arm: 100,
            tau: 0.1,
            adaptive_percentile: 30.0,
            adaptive_window: 500,
            alpha: 1.0,
            replicas: 10,
            ucb_percentile: 80.0,
            learning_rate: 0.05,
            l2: 1.0,
            warm_start: true,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BanditError {
    #[error("policy has no arms")]
    Uninitialized,
    #[error("no arms supplied")]
    NoArms,
    #[error("no items to route")]
    NoItems,
    #[error("reward {0} is outside [0, 1]")]
    RewardOutOfRange(f64),
    #[error("arm {0} does not exist")]
    InvalidArm(usize),
    #[error("arm {arm} failed on `{transcript_id}`: {message}")]
    ArmFailure {
        arm: usize,
        transcript_id: String,
        message: String,
    },
    #[error("item {item} has {got} precomputed scores for {expected} arms")]
    ScoreCountMismatch { item: usize, expected: usize, got: usize },
    #[error("at least one seed is required")]
    NoSeeds,
}

/// Value at percentile `p` (0 to 100) by nearest rank.
fn percentile(values: &mut [f64], p: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let rank = libm::ceil(p / 100.0 * n as f64) as usize;
    values[rank.clamp(1, n) - 1]
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct PolicyState {
    pub config: PolicyConfig,
    pub k: usize,
    /// Running mean reward per arm.
    pub q: Vec<f64>,
    pub n_arm: Vec<u64>,
    pub n: u64,
    /// Running mean of every reward seen.
    pub ams: f64,
    models: Vec<OnlineLogistic>,
    precision: Vec<InversePrecision>,
    replicas: Vec<Vec<OnlineLogistic>>,
    recent: VecDeque<f64>,
    rng: ChaCha8Rng,
}

impl PolicyState {
    pub fn new(config: PolicyConfig, k: usize) -> Self {
        let kind = config.kind;
        let precision = if kind == PolicyKind::LogisticUcb {
            (0..k).map(|_| InversePrecision::new(FEATURE_DIM, config.l2.max(1e-9))).collect()
        } else {
            Vec::new()
        };
        let replicas = if kind.bootstrapped() {
            (0..k)
                .map(|_| (0..config.replicas.max(1)).map(|_| OnlineLogistic::new(FEATURE_DIM)).collect())
                .collect()
        } else {
            Vec::new()
        };
        Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            k,
            q: vec![0.0; k],
            n_arm: vec![0; k],
            n: 0,
            ams: 0.0,
            models: (0..k).map(|_| OnlineLogistic::new(FEATURE_DIM)).collect(),
            precision,
            replicas,
            recent: VecDeque::new(),
        }
    }

    pub fn kind(&self) -> PolicyKind {
        self.config.kind
    }

    /// Point predictions of every arm's reward for a feature vector.
    pub fn predictions(&self, f: &[f64]) -> Vec<f64> {
        self.models.iter().map(|m| m.predict(f)).collect()
    }

    /// Exploration bonus `α √(xᵀA⁻¹x)` of each arm; empty unless the policy is LogisticUCB.
    pub fn ucb_bonus(&self, f: &[f64]) -> Vec<f64> {
        self.precision
            .iter()
            .map(|p| self.config.alpha * libm::sqrt(p.quad(f).max(0.0)))
            .collect()
    }

    fn uniform(&mut self) -> usize {
        self.rng.random_range(0..self.k)
    }

    pub fn choose(&mut self, x: &Context) -> Result<usize, BanditError> {
        if self.k == 0 {
            return Err(BanditError::Uninitialized);
        }
        let kind = self.config.kind;
        if self.config.warm_start && kind != PolicyKind::ExploreFirst {
            if let Some(a) = self.n_arm.iter().position(|&c| c == 0) {
                return Ok(a);
            }
        }
        let f = x.features();
        let arm = match kind {
            PolicyKind::EpsilonGreedy => {
                let eps = if self.config.decay_epsilon {
                    self.config.epsilon / libm::sqrt(self.n as f64 + 1.0)
                } else {
                    self.config.epsilon
                };
                if self.rng.random::<f64>() < eps {
                    self.uniform()
                } else {
                    argmax(&self.predictions(&f))
                }
            }
            PolicyKind::ExploreFirst => {
                if self.n < (self.config.explore_rounds_per_arm * self.k) as u64 {
                    self.uniform()
                } else {
                    argmax(&self.predictions(&f))
                }
            }
            PolicyKind::Softmax => {
                let preds = self.predictions(&f);
                let top = preds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let tau = self.config.tau.max(1e-12);
                let weights: Vec<f64> = preds.iter().map(|p| libm::exp((p - top) / tau)).collect();
                let total: f64 = weights.iter().sum();
                let mut u = self.rng.random::<f64>() * total;
                let mut pick = self.k - 1;
                for (i, w) in weights.iter().enumerate() {
                    if u < *w {
                        pick = i;
                        break;
                    }
                    u -= w;
                }
                pick
            }
            PolicyKind::AdaptiveGreedy => {
                let preds = self.predictions(&f);
                let best = argmax(&preds);
                let top = preds[best];
                let explore = self.recent.len() >= 10 && {
                    let mut window: Vec<f64> = self.recent.iter().copied().collect();
                    top < percentile(&mut window, self.config.adaptive_percentile)
                };
                self.recent.push_back(top);
                if self.recent.len() > self.config.adaptive_window.max(1) {
                    self.recent.pop_front();
                }
                if explore {
                    self.uniform()
                } else {
                    best
                }
            }
            PolicyKind::LogisticUcb => {
                let preds = self.predictions(&f);
                let scores: Vec<f64> = preds
                    .iter()
                    .zip(self.ucb_bonus(&f))
                    .map(|(p, b)| p + b)
                    .collect();
                argmax(&scores)
            }
            PolicyKind::BootstrappedUcb => {
                let p = self.config.ucb_percentile;
                let scores: Vec<f64> = self
                    .replicas
                    .iter()
                    .map(|reps| {
                        let mut preds: Vec<f64> = reps.iter().map(|m| m.predict(&f)).collect();
                        percentile(&mut preds, p)
                    })
                    .collect();
                argmax(&scores)
            }
            PolicyKind::BootstrappedTs => {
                let mut scores = Vec::with_capacity(self.k);
                for a in 0..self.k {
                    let b = self.rng.random_range(0..self.replicas[a].len());
                    scores.push(self.replicas[a][b].predict(&f));
                }
                argmax(&scores)
            }
        };
        Ok(arm)
    }

    pub fn update(&mut self, x: &Context, a: usize, r: f64) -> Result<(), BanditError> {
        if !(0.0..=1.0).contains(&r) {
            return Err(BanditError::RewardOutOfRange(r));
        }
        if a >= self.k {
            return Err(BanditError::InvalidArm(a));
        }
        self.n_arm[a] += 1;
        self.n += 1;
        self.q[a] += (r - self.q[a]) / self.n_arm[a] as f64;
        self.ams += (r - self.ams) / self.n as f64;

        let f = x.features();
        let (lr, l2) = (self.config.learning_rate, self.config.l2);
        self.models[a].step(&f, r, lr, l2);
        if let Some(p) = self.precision.get_mut(a) {
            p.add_outer(&f);
        }
        if self.config.kind.bootstrapped() {
            let poisson = Poisson::new(1.0).expect("rate 1 is valid");
            for rep in &mut self.replicas[a] {
                let times = poisson.sample(&mut self.rng) as usize;
                for _ in 0..times {
                    rep.step(&f, r, lr, l2);
                }
            }
        }
        Ok(())
    }

    /// Arm with the highest running mean, lowest id on ties.
    pub fn best_arm(&self) -> usize {
        argmax(&self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMetric {
    Bleu,
    RougeL,
}

impl RewardMetric {
    pub fn score(self, candidate: &str, reference: &str) -> f64 {
        let s = MetricScores::for_texts(candidate, reference);
        match self {
            RewardMetric::Bleu => s.bleu,
            RewardMetric::RougeL => s.rouge_l.f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailurePolicy {
    /// Record a zero reward and continue.
    SkipWithZero,
    Abort,
}

/// One transcript to route, with the extractive summary it is scored against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditItem {
    pub id: String,
    pub channel: ChannelKind,
    pub transcript: ChatTranscript,
    pub reference: String,
    pub context: RawContext,
    /// Offline metric score of every arm on this item, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<f64>>,
}

impl BanditItem {
    /// Item without text, for arms that produce rewards directly.
    pub fn synthetic(id: impl Into<String>, context: RawContext) -> Self {
        let id = id.into();
        Self {
            transcript: ChatTranscript {
                id: id.clone(),
                utterances: Vec::new(),
                channel_kind: ChannelKind::Customer,
            },
            id,
            channel: ChannelKind::Customer,
            reference: String::new(),
            context,
            scores: None,
        }
    }
}

/// One item per non-empty `channel` of each transcript, scored against its extractive summary.
pub fn items_from_pipeline(
    prepared: &[PreparedTranscript],
    summaries: &[TranscriptSummary],
    channel: ChannelKind,
) -> Vec<BanditItem> {
    prepared
        .iter()
        .zip(summaries)
        .filter_map(|(p, s)| {
            let ch = p.channel(channel);
            if ch.is_empty() {
                return None;
            }
            let cs = s.channel(channel);
            Some(BanditItem {
                id: p.id.clone(),
                channel,
                transcript: ch.transcript.clone(),
                reference: cs.summary.punctuated_text.clone(),
                context: RawContext::from_summary(cs, s.full_words),
                scores: None,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunOptions {
    pub reward_metric: RewardMetric,
    /// Drop items on which every arm's precomputed score is zero.
    pub prefilter_zero: bool,
    pub on_failure: FailurePolicy,
    pub max_sentences: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            reward_metric: RewardMetric::RougeL,
            prefilter_zero: true,
            on_failure: FailurePolicy::SkipWithZero,
            max_sentences: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub round: usize,
    /// Index of the routed item in the input list.
    pub item: usize,
    pub arm: usize,
    pub reward: f64,
    pub ams: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmFailureRecord {
    pub round: usize,
    pub arm: usize,
    pub transcript_id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditReport {
    pub policy: PolicyKind,
    pub seed: u64,
    pub arm_names: Vec<String>,
    pub q: Vec<f64>,
    pub n_arm: Vec<u64>,
    pub ams: f64,
    pub best_arm: usize,
    pub trajectory: Vec<TrajectoryPoint>,
    /// Items dropped because every arm scored zero on them.
    pub filtered: usize,
    pub failures: Vec<ArmFailureRecord>,
}

fn arm_reward(
    arm: &dyn Arm,
    arm_id: usize,
    item_index: usize,
    item: &BanditItem,
    ctx: &Context,
    opts: &RunOptions,
) -> Result<f64, BanditError> {
    if let Some(scores) = &item.scores {
        return Ok(scores[arm_id]);
    }
    let req = ArmRequest {
        item_index,
        item,
        context: ctx,
        max_sentences: opts.max_sentences,
    };
    let out = arm.summarize(&req).map_err(|e| BanditError::ArmFailure {
        arm: arm_id,
        transcript_id: item.id.clone(),
        message: alloc::string::ToString::to_string(&e),
    })?;
    Ok(match out {
        ArmOutput::Reward(r) => r,
        ArmOutput::Text(text) => opts.reward_metric.score(&text, &item.reference),
    })
}

fn clip(r: f64) -> f64 {
    if r.is_nan() {
        0.0
    } else {
        r.clamp(0.0, 1.0)
    }
}

fn check_inputs(arms: &[&dyn Arm], items: &[BanditItem]) -> Result<(), BanditError> {
    if arms.is_empty() {
        return Err(BanditError::NoArms);
    }
    if items.is_empty() {
        return Err(BanditError::NoItems);
    }
    for (i, item) in items.iter().enumerate() {
        if let Some(s) = &item.scores {
            if s.len() != arms.len() {
                return Err(BanditError::ScoreCountMismatch {
                    item: i,
                    expected: arms.len(),
                    got: s.len(),
                });
            }
        }
    }
    Ok(())
}

fn keep_item(item: &BanditItem, opts: &RunOptions) -> bool {
    match (&item.scores, opts.prefilter_zero) {
        (Some(s), true) => s.iter().any(|&x| x != 0.0),
        _ => true,
    }
}

/// Routes `items` in the given order, updating the policy after every round.
pub fn run_bandit_ordered(
    mut policy: PolicyState,
    arms: &[&dyn Arm],
    items: &[BanditItem],
    order: &[usize],
    opts: &RunOptions,
) -> Result<BanditReport, BanditError> {
    check_inputs(arms, items)?;
    if policy.k != arms.len() {
        return Err(BanditError::Uninitialized);
    }
    let mut contexts = ContextBuilder::new();
    let mut trajectory = Vec::with_capacity(order.len());
    let mut failures = Vec::new();
    let mut filtered = 0;
    for &i in order {
        let item = &items[i];
        if !keep_item(item, opts) {
            filtered += 1;
            continue;
        }
        let ctx = contexts.observe(item.context);
        let a = policy.choose(&ctx)?;
        let reward = match arm_reward(arms[a], a, i, item, &ctx, opts) {
            Ok(r) => clip(r),
            Err(BanditError::ArmFailure {
                arm,
                transcript_id,
                message,
            }) if opts.on_failure == FailurePolicy::SkipWithZero => {
                failures.push(ArmFailureRecord {
                    round: trajectory.len(),
                    arm,
                    transcript_id,
                    message,
                });
                0.0
            }
            Err(e) => return Err(e),
        };
        policy.update(&ctx, a, reward)?;
        trajectory.push(TrajectoryPoint {
            round: trajectory.len(),
            item: i,
            arm: a,
            reward,
            ams: policy.ams,
        });
    }
    Ok(BanditReport {
        policy: policy.kind(),
        seed: policy.config.seed,
        arm_names: arms.iter().map(|a| String::from(a.name())).collect(),
        best_arm: policy.best_arm(),
        q: policy.q,
        n_arm: policy.n_arm,
        ams: policy.ams,
        trajectory,
        filtered,
        failures,
    })
}

pub fn run_bandit(
    policy: PolicyState,
    arms: &[&dyn Arm],
    items: &[BanditItem],
    opts: &RunOptions,
) -> Result<BanditReport, BanditError> {
    let order: Vec<usize> = (0..items.len()).collect();
    run_bandit_ordered(policy, arms, items, &order, opts)
}

/// Item order used for a seed: a seeded shuffle shared by every policy.
pub fn seed_order(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x0bde_75ee_d000));
    order
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// One report per (policy, seed), policies in input order, seeds inner.
    pub reports: Vec<BanditReport>,
    /// Running AMS per round for each policy, averaged over seeds.
    pub mean_curves: Vec<Vec<f64>>,
}

impl Comparison {
    pub fn reports_for(&self, policy: usize, seeds: usize) -> &[BanditReport] {
        &self.reports[policy * seeds..(policy + 1) * seeds]
    }
}

pub fn compare_policies(
    policies: &[PolicyConfig],
    arms: &[&dyn Arm],
    items: &[BanditItem],
    opts: &RunOptions,
    seeds: &[u64],
) -> Result<Comparison, BanditError> {
    if seeds.is_empty() {
        return Err(BanditError::NoSeeds);
    }
    let orders: Vec<Vec<usize>> = seeds.iter().map(|&s| seed_order(items.len(), s)).collect();
    let mut reports = Vec::with_capacity(policies.len() * seeds.len());
    let mut mean_curves = Vec::with_capacity(policies.len());
    for cfg in policies {
        let mut curve: Vec<f64> = Vec::new();
        for (&seed, order) in seeds.iter().zip(&orders) {
            let state = PolicyState::new(cfg.clone().with_seed(seed), arms.len());
            let rep = run_bandit_ordered(state, arms, items, order, opts)?;
            if curve.len() < rep.trajectory.len() {
                curve.resize(rep.trajectory.len(), 0.0);
            }
            for (c, p) in curve.iter_mut().zip(&rep.trajectory) {
                *c += p.ams / seeds.len() as f64;
            }
            reports.push(rep);
        }
        mean_curves.push(curve);
    }
    Ok(Comparison {
        reports,
        mean_curves,
    })
}

/// Mean reward of always pulling `arm` over the same items and order.
pub fn replay_single_arm(
    arm: &dyn Arm,
    arm_id: usize,
    items: &[BanditItem],
    order: &[usize],
    opts: &RunOptions,
) -> Result<f64, BanditError> {
    let mut contexts = ContextBuilder::new();
    let mut total = 0.0;
    let mut n = 0usize;
    for &i in order {
        let item = &items[i];
        if !keep_item(item, opts) {
            continue;
        }
        let ctx = contexts.observe(item.context);
        let r = match arm_reward(arm, arm_id, i, item, &ctx, opts) {
            Ok(r) => clip(r),
            Err(_) if opts.on_failure == FailurePolicy::SkipWithZero => 0.0,
            Err(e) => return Err(e),
        };
        total += r;
        n += 1;
    }
    Ok(if n == 0 { 0.0 } else { total / n as f64 })
}

/// Cumulative pseudo-regret after each round: best expected reward minus the
/// expected reward of the chosen arm, from `expected(item, arm)`.
pub fn cumulative_regret(report: &BanditReport, k: usize, expected: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut total = 0.0;
    report
        .trajectory
        .iter()
        .map(|p| {
            let best = (0..k).map(|a| expected(p.item, a)).fold(f64::NEG_INFINITY, f64::max);
            total += best - expected(p.item, p.arm);
            total
        })
        .collect()
}
