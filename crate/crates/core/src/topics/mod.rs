//! Topic models (LDA and LSI), UMass coherence, grid selection of the best
//! model and dominant topics per document.

mod lda;
mod lsi;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::Corpus;

pub use lda::{fit_lda, LdaParams};
pub use lsi::{fit_lsi, idf, tfidf_row, LsiFactorization, TfIdf, POWER_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lda,
    Lsi,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lda => "lda",
            ModelKind::Lsi => "lsi",
        }
    }
}

/// Fitted topic model. Rows of `topic_word` are probability distributions for
/// LDA and unit-norm loading vectors for LSI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub kind: ModelKind,
    pub num_topics: usize,
    pub vocabulary: Vec<String>,
    pub topic_word: Vec<Vec<f64>>,
    /// LDA document-topic prior; used when folding in new documents.
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub rng_seed: u64,
    /// LSI inverse document frequencies, for projecting new documents.
    #[serde(default)]
    pub idf: Vec<f64>,
    #[serde(default)]
    pub singular_values: Vec<f64>,
}

impl TopicModel {
    /// Word ids of topic `k` ranked by weight (LSI: absolute loading), ties by id.
    pub fn ranked_words(&self, k: usize) -> Vec<usize> {
        let row = &self.topic_word[k];
        let key = |w: usize| match self.kind {
            ModelKind::Lda => row[w],
            ModelKind::Lsi => row[w].abs(),
        };
        let mut ids: Vec<usize> = (0..row.len()).collect();
        ids.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
        ids
    }

    pub fn top_words(&self, k: usize, n: usize) -> Vec<&str> {
        self.ranked_words(k)
            .into_iter()
            .take(n)
            .map(|w| self.vocabulary[w].as_str())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopicError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("alpha and beta must be positive")]
    InvalidHyperparam,
    #[error("invalid topic count {0}")]
    InvalidTopicCount(usize),
    #[error("requested {requested} topics but the TF-IDF matrix has rank {achieved}")]
    RankDeficient {
        requested: usize,
        achieved: usize,
        /// Model at the achieved rank.
        model: Box<TopicModel>,
    },
    #[error("no grid point produced a model")]
    NoCandidate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub kind: ModelKind,
    pub num_topics: usize,
    pub score: f64,
    pub per_topic: Vec<f64>,
}

/// Per-word sorted lists of the documents containing it.
#[derive(Debug, Clone)]
pub struct DocIndex {
    postings: Vec<Vec<u32>>,
}

impl DocIndex {
    pub fn new(c: &Corpus) -> Self {
        let mut postings = alloc::vec![Vec::new(); c.vocab_size()];
        for (d, bow) in c.bows.iter().enumerate() {
            for &(w, _) in bow {
                let list: &mut Vec<u32> = &mut postings[w as usize];
                if list.last() != Some(&(d as u32)) {
                    list.push(d as u32);
                }
            }
        }
        Self { postings }
    }

    pub fn doc_freq(&self, w: usize) -> usize {
        self.postings.get(w).map_or(0, Vec::len)
    }

    pub fn co_doc_freq(&self, a: usize, b: usize) -> usize {
        let (Some(x), Some(y)) = (self.postings.get(a), self.postings.get(b)) else {
            return 0;
        };
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < x.len() && j < y.len() {
            match x[i].cmp(&y[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

/// UMass coherence over each topic's `top_n` words.
///
/// For ranked words `w_1..w_n`, a topic scores
/// `Σ_{i<j} ln((D(w_i, w_j) + 1) / D(w_j))` with `D` counting documents and
/// `D(w_j)` floored at 1. The model score is the mean over topics.
pub fn coherence(m: &TopicModel, c: &Corpus, top_n: usize) -> CoherenceReport {
    coherence_with_index(m, &DocIndex::new(c), top_n)
}

pub fn coherence_with_index(m: &TopicModel, index: &DocIndex, top_n: usize) -> CoherenceReport {
    let top_n = top_n.max(2);
    let per_topic: Vec<f64> = (0..m.num_topics)
        .map(|k| {
            let words: Vec<usize> = m.ranked_words(k).into_iter().take(top_n).collect();
            let mut sum = 0.0;
            for j in 1..words.len() {
                let dj = index.doc_freq(words[j]).max(1) as f64;
                for i in 0..j {
                    let co = index.co_doc_freq(words[i], words[j]) as f64;
                    sum += libm::log((co + 1.0) / dj);
                }
            }
            sum
        })
        .collect();
    let score = if per_topic.is_empty() {
        0.0
    } else {
        per_topic.iter().sum::<f64>() / per_topic.len() as f64
    };
    CoherenceReport {
        kind: m.kind,
        num_topics: m.num_topics,
        score,
        per_topic,
    }
}

/// Search space for optimal model selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TopicSearch {
    /// Restrict the search to one kind; both are searched when absent.
    pub kind: Option<ModelKind>,
    pub min_topics: usize,
    pub max_topics: usize,
    pub step: usize,
    pub coherence_top_n: usize,
    pub lda: LdaParams,
}

impl Default for TopicSearch {
    fn default() -> Self {
        Self {
            kind: None,
            min_topics: 5,
            max_topics: 50,
            step: 5,
            coherence_top_n: 10,
            lda: LdaParams::default(),
        }
    }
}

impl TopicSearch {
    /// Topic counts `N, N + step, …` up to `max_topics`; `{N}` when `N` is already past it.
    pub fn grid(&self) -> Vec<usize> {
        let start = self.min_topics.max(1);
        if start >= self.max_topics {
            return alloc::vec![start];
        }
        (start..=self.max_topics).step_by(self.step.max(1)).collect()
    }

    pub fn kinds(&self) -> Vec<ModelKind> {
        match self.kind {
            Some(k) => alloc::vec![k],
            None => alloc::vec![ModelKind::Lda, ModelKind::Lsi],
        }
    }

    /// Every `(kind, K)` pair in evaluation order.
    pub fn points(&self) -> Vec<(ModelKind, usize)> {
        let grid = self.grid();
        self.kinds()
            .into_iter()
            .flat_map(|kind| grid.iter().map(move |&k| (kind, k)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub model: TopicModel,
    pub report: CoherenceReport,
}

/// Shared per-corpus state for scoring grid points.
pub struct GridContext<'a> {
    pub corpus: &'a Corpus,
    pub index: DocIndex,
    pub lsi: Option<LsiFactorization>,
    pub search: &'a TopicSearch,
}

impl<'a> GridContext<'a> {
    /// Factors the corpus once at the largest grid size; smaller LSI models are truncations.
    pub fn new(corpus: &'a Corpus, search: &'a TopicSearch) -> Result<Self, TopicError> {
        if corpus.vocab_size() == 0 || corpus.bows.iter().all(|b| b.is_empty()) {
            return Err(TopicError::EmptyCorpus);
        }
        let lsi = search.kinds().contains(&ModelKind::Lsi).then(|| {
            let kmax = search.grid().into_iter().max().unwrap_or(1);
            LsiFactorization::compute(corpus, kmax)
        });
        Ok(Self {
            corpus,
            index: DocIndex::new(corpus),
            lsi,
            search,
        })
    }

    /// Fits and scores one grid point. LSI points beyond the matrix rank yield `None`.
    pub fn evaluate(&self, kind: ModelKind, k: usize) -> Result<Option<Candidate>, TopicError> {
        let model = match kind {
            ModelKind::Lda => fit_lda(self.corpus, k, &self.search.lda)?,
            ModelKind::Lsi => {
                let f = self.lsi.as_ref().expect("LSI factorization for an LSI search");
                if k > f.rank {
                    return Ok(None);
                }
                f.truncate(k)
            }
        };
        let report = coherence_with_index(&model, &self.index, self.search.coherence_top_n);
        Ok(Some(Candidate { model, report }))
    }

    /// Model at the achieved LSI rank, used when every LSI grid point exceeds it.
    pub fn lsi_fallback(&self) -> Option<Candidate> {
        let f = self.lsi.as_ref()?;
        if f.rank == 0 {
            return None;
        }
        let model = f.truncate(f.rank);
        let report = coherence_with_index(&model, &self.index, self.search.coherence_top_n);
        Some(Candidate { model, report })
    }
}

/// Highest coherence wins; ties go to the smaller K, then LDA before LSI.
pub fn pick_best(candidates: impl IntoIterator<Item = Candidate>) -> Option<Candidate> {
    candidates.into_iter().reduce(|best, c| {
        let better = c.report.score > best.report.score
            || (c.report.score == best.report.score
                && (c.model.num_topics, c.model.kind) < (best.model.num_topics, best.model.kind));
        if better {
            c
        } else {
            best
        }
    })
}

/// Fits every grid point sequentially and returns the most coherent model.
pub fn select_optimal_model(c: &Corpus, search: &TopicSearch) -> Result<Candidate, TopicError> {
    let ctx = GridContext::new(c, search)?;
    let mut found = Vec::new();
    for (kind, k) in search.points() {
        if let Some(cand) = ctx.evaluate(kind, k)? {
            found.push(cand);
        }
    }
    finish_selection(&ctx, found)
}

/// Applies the rank fallback and tie rules to scored candidates.
pub fn finish_selection(ctx: &GridContext<'_>, mut found: Vec<Candidate>) -> Result<Candidate, TopicError> {
    let has_lsi = found.iter().any(|c| c.model.kind == ModelKind::Lsi);
    if !has_lsi {
        if let Some(fallback) = ctx.lsi_fallback() {
            found.push(fallback);
        }
    }
    pick_best(found).ok_or(TopicError::NoCandidate)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominantTopic {
    pub topic_id: usize,
    pub weight: f64,
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominantTopics {
    pub transcript_id: String,
    pub entries: Vec<DominantTopic>,
}

impl DominantTopics {
    /// Keywords of all entries in order.
    pub fn keywords(&self) -> Vec<&str> {
        self.entries
            .iter()
            .flat_map(|e| e.keywords.iter().map(String::as_str))
            .collect()
    }
}

/// Per-topic weights of a document: LDA by fold-in sampling, LSI by projection.
pub fn topic_weights(m: &TopicModel, bow: &[(u32, u32)]) -> Vec<f64> {
    if bow.is_empty() || m.num_topics == 0 {
        return Vec::new();
    }
    match m.kind {
        ModelKind::Lda => lda::fold_in(m, bow),
        ModelKind::Lsi => lsi::project(m, bow),
    }
}

/// The `n` highest-weight topics of a document, each with its `top_m` keywords.
/// An empty bag-of-words yields no entries.
pub fn dominant_topics(
    m: &TopicModel,
    transcript_id: &str,
    bow: &[(u32, u32)],
    n: usize,
    top_m: usize,
) -> DominantTopics {
    let weights = topic_weights(m, bow);
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    let entries = order
        .into_iter()
        .take(n)
        .map(|k| DominantTopic {
            topic_id: k,
            weight: weights[k],
            keywords: m.top_words(k, top_m).into_iter().map(String::from).collect(),
        })
        .collect();
    DominantTopics {
        transcript_id: String::from(transcript_id),
        entries,
    }
}

#[cfg(test)]
mod tests;
