//! Document preparation: transcripts to keyword lists, keyword lists to a bag-of-words corpus.
//!
//! Stages run in a fixed order: lowercase, contraction expansion, tokenization on
//! non-alphanumerics, stop-word removal, short-word removal, phrase joining,
//! suffix-stripping lemmatization and a lexicon-based part-of-speech filter.

mod lexicon;
mod phrases;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::transcript::ChatTranscript;

pub use lexicon::{CONTRACTIONS, LEMMA_EXCEPTIONS, STOP_WORDS};
pub use phrases::PhraseModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    /// Replaces the bundled stop list when set.
    pub stop_words: Option<Vec<String>>,
    /// Appended to the active stop list.
    pub extra_stop_words: Vec<String>,
    /// Replaces the bundled contraction table when set.
    pub contractions: Option<Vec<(String, String)>>,
    /// Tokens with at most this many characters are dropped.
    pub max_short_len: usize,
    pub phrases: bool,
    pub phrase_min_count: u32,
    pub phrase_threshold: f64,
    pub lemmatize: bool,
    pub pos_filter: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            stop_words: None,
            extra_stop_words: Vec::new(),
            contractions: None,
            max_short_len: 4,
            phrases: true,
            phrase_min_count: 5,
            phrase_threshold: 10.0,
            lemmatize: true,
            pos_filter: true,
        }
    }
}

/// Keyword list extracted from one transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub transcript_id: String,
    pub tokens: Vec<String>,
}

/// Compiled preprocessing tables for one configuration.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    stop: BTreeSet<String>,
    contractions: BTreeMap<String, String>,
    lemma_exceptions: BTreeMap<&'static str, &'static str>,
    non_content: BTreeSet<&'static str>,
    ly_content: BTreeSet<&'static str>,
    cfg: PreprocessConfig,
}

impl Preprocessor {
    pub fn new(cfg: PreprocessConfig) -> Self {
        let mut stop: BTreeSet<String> = match &cfg.stop_words {
            Some(words) => words.iter().map(|w| w.to_lowercase()).collect(),
            None => STOP_WORDS.iter().map(|w| w.to_string()).collect(),
        };
        stop.extend(cfg.extra_stop_words.iter().map(|w| w.to_lowercase()));
        let contractions = match &cfg.contractions {
            Some(table) => table
                .iter()
                .map(|(k, v)| (k.to_lowercase(), v.to_lowercase()))
                .collect(),
            None => CONTRACTIONS
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        };
        Self {
            stop,
            contractions,
            lemma_exceptions: LEMMA_EXCEPTIONS.iter().copied().collect(),
            non_content: lexicon::NON_CONTENT_WORDS.iter().copied().collect(),
            ly_content: lexicon::LY_CONTENT_WORDS.iter().copied().collect(),
            cfg,
        }
    }

    pub fn config(&self) -> &PreprocessConfig {
        &self.cfg
    }

    pub fn is_stop_word(&self, token: &str) -> bool {
        self.stop.contains(token)
    }

    /// Prepares one transcript, learning phrases from its own tokens only.
    pub fn prepare(&self, t: &ChatTranscript) -> Document {
        let filtered = self.filter_stage(&t.channel_text());
        let phrases = self.learn_phrases(core::slice::from_ref(&filtered));
        self.finish(&t.id, filtered, phrases.as_ref())
    }

    /// Prepares a batch, learning the phrase model over the whole batch.
    pub fn prepare_batch(&self, ts: &[ChatTranscript]) -> Vec<Document> {
        let filtered: Vec<Vec<String>> = ts
            .iter()
            .map(|t| self.filter_stage(&t.channel_text()))
            .collect();
        let phrases = self.learn_phrases(&filtered);
        ts.iter()
            .zip(filtered)
            .map(|(t, tokens)| self.finish(&t.id, tokens, phrases.as_ref()))
            .collect()
    }

    /// Prepares a batch with an already learned phrase model.
    pub fn prepare_with(&self, t: &ChatTranscript, phrases: Option<&PhraseModel>) -> Document {
        let filtered = self.filter_stage(&t.channel_text());
        self.finish(&t.id, filtered, phrases)
    }

    pub fn learn_phrases(&self, streams: &[Vec<String>]) -> Option<PhraseModel> {
        self.cfg.phrases.then(|| {
            PhraseModel::learn(streams, self.cfg.phrase_min_count, self.cfg.phrase_threshold)
        })
    }

    /// Lowercase, contractions, tokenization, stop words, short words.
    pub fn filter_stage(&self, text: &str) -> Vec<String> {
        let lowered = text.to_lowercase().replace('\u{2019}', "'");
        let mut expanded = String::with_capacity(lowered.len());
        for word in lowered.split_whitespace() {
            let core = word.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'');
            let core = core.trim_end_matches('\'');
            match self.contractions.get(core) {
                Some(exp) => expanded.push_str(exp),
                None => expanded.push_str(word),
            }
            expanded.push(' ');
        }
        tokenize(&expanded)
            .filter(|tok| !self.stop.contains(*tok))
            .filter(|tok| tok.chars().count() > self.cfg.max_short_len)
            .map(str::to_string)
            .collect()
    }

    fn finish(&self, id: &str, tokens: Vec<String>, phrases: Option<&PhraseModel>) -> Document {
        let tokens = match phrases {
            Some(model) => model.apply(&tokens),
            None => tokens,
        };
        let tokens = tokens
            .into_iter()
            .filter_map(|tok| {
                if tok.contains('_') {
                    return Some(tok);
                }
                let lemma = if self.cfg.lemmatize {
                    self.lemmatize(&tok)
                } else {
                    tok
                };
                // stripping a suffix can bring a word under the length cutoff
                if lemma.chars().count() <= self.cfg.max_short_len || self.stop.contains(&lemma) {
                    return None;
                }
                if self.cfg.pos_filter && !self.tag(&lemma).is_allowed() {
                    return None;
                }
                Some(lemma)
            })
            .collect();
        Document {
            transcript_id: id.to_string(),
            tokens,
        }
    }

    /// Rule-based lemma: exception table, then plural and past/progressive suffixes.
    pub fn lemmatize(&self, word: &str) -> String {
        if let Some(l) = self.lemma_exceptions.get(word) {
            return l.to_string();
        }
        lemmatize_rules(word)
    }

    pub fn tag(&self, lemma: &str) -> PosTag {
        if lemma.chars().all(|c| c.is_ascii_digit()) {
            return PosTag::Other;
        }
        if self.non_content.contains(lemma) {
            return PosTag::Adverb;
        }
        if lemma.ends_with("ly") && !self.ly_content.contains(lemma) {
            return PosTag::Adverb;
        }
        if lemma.ends_with("ous") || lemma.ends_with("ful") || lemma.ends_with("able") {
            return PosTag::Adjective;
        }
        if lemma.ends_with("ize") || lemma.ends_with("ise") || lemma.ends_with("ate") {
            return PosTag::Verb;
        }
        PosTag::Noun
    }
}

/// Coarse part-of-speech classes assigned by the bundled lexicon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosTag {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Other,
}

impl PosTag {
    pub fn is_allowed(self) -> bool {
        matches!(self, PosTag::Noun | PosTag::Verb | PosTag::Adjective)
    }
}

/// Lowercase alphanumeric runs; everything else separates tokens.
pub fn tokenize(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn has_vowel(s: &str) -> bool {
    s.bytes().any(|b| is_vowel(b) || b == b'y')
}

fn lemmatize_rules(word: &str) -> String {
    if !word.is_ascii() || word.len() <= 3 {
        return word.to_string();
    }
    if let Some(stem) = word.strip_suffix("ies") {
        if stem.len() >= 2 {
            return [stem, "y"].concat();
        }
    }
    if word.ends_with("ss") || word.ends_with("us") || word.ends_with("is") {
        return word.to_string();
    }
    for suf in ["sses", "ches", "shes", "xes", "zes"] {
        if word.ends_with(suf) {
            return word[..word.len() - 2].to_string();
        }
    }
    if let Some(stem) = word.strip_suffix('s') {
        return stem.to_string();
    }
    if let Some(stem) = word.strip_suffix("ied") {
        if stem.len() >= 2 {
            return [stem, "y"].concat();
        }
    }
    if let Some(stem) = word.strip_suffix("eed") {
        return [stem, "ee"].concat();
    }
    for suf in ["ed", "ing"] {
        if let Some(stem) = word.strip_suffix(suf) {
            if stem.len() >= 3 && has_vowel(stem) {
                return restore_stem(stem);
            }
        }
    }
    word.to_string()
}

// After removing -ed/-ing: undouble final consonants and put back a silent e.
fn restore_stem(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    let last = b[n - 1];
    if n >= 2 && last == b[n - 2] && !is_vowel(last) && !matches!(last, b'l' | b's' | b'z') {
        return stem[..n - 1].to_string();
    }
    const E_ENDINGS: [&str; 12] = [
        "at", "bl", "iz", "rg", "dg", "nc", "rc", "rs", "ns", "lv", "rv", "uc",
    ];
    if E_ENDINGS.iter().any(|e| stem.ends_with(e)) {
        return [stem, "e"].concat();
    }
    // short consonant-vowel-consonant stems: "hop" -> "hope" is ambiguous, leave as is
    stem.to_string()
}

/// Vocabulary plus one bag-of-words per document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    /// Token for each id.
    pub vocabulary: Vec<String>,
    #[serde(skip)]
    index: BTreeMap<String, u32>,
    pub doc_ids: Vec<String>,
    /// `(token_id, count)` pairs in first-occurrence order.
    pub bows: Vec<Vec<(u32, u32)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("corpus has no tokens")]
    EmptyCorpus,
}

impl Corpus {
    pub fn build(docs: &[Document]) -> Result<Self, CorpusError> {
        let mut corpus = Corpus {
            vocabulary: Vec::new(),
            index: BTreeMap::new(),
            doc_ids: Vec::with_capacity(docs.len()),
            bows: Vec::with_capacity(docs.len()),
        };
        for doc in docs {
            let mut bow: Vec<(u32, u32)> = Vec::new();
            let mut slot: BTreeMap<u32, usize> = BTreeMap::new();
            for tok in &doc.tokens {
                let id = match corpus.index.get(tok) {
                    Some(&id) => id,
                    None => {
                        let id = corpus.vocabulary.len() as u32;
                        corpus.vocabulary.push(tok.clone());
                        corpus.index.insert(tok.clone(), id);
                        id
                    }
                };
                match slot.get(&id) {
                    Some(&i) => bow[i].1 += 1,
                    None => {
                        slot.insert(id, bow.len());
                        bow.push((id, 1));
                    }
                }
            }
            corpus.doc_ids.push(doc.transcript_id.clone());
            corpus.bows.push(bow);
        }
        if corpus.vocabulary.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        Ok(corpus)
    }

    /// Rebuilds the token index after deserialization.
    pub fn reindex(&mut self) {
        self.index = self
            .vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
    }

    pub fn doc_count(&self) -> usize {
        self.bows.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn id_of(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    /// Bag-of-words for tokens outside the corpus; unknown tokens are skipped.
    pub fn bow_for(&self, tokens: &[String]) -> Vec<(u32, u32)> {
        let mut bow: Vec<(u32, u32)> = Vec::new();
        for tok in tokens {
            if let Some(id) = self.id_of(tok) {
                match bow.iter_mut().find(|(w, _)| *w == id) {
                    Some(entry) => entry.1 += 1,
                    None => bow.push((id, 1)),
                }
            }
        }
        bow
    }

    /// Token multiset of document `i`, expanded from its bag-of-words.
    pub fn expand(&self, i: usize) -> Vec<&str> {
        self.bows[i]
            .iter()
            .flat_map(|&(id, n)| core::iter::repeat_n(self.vocabulary[id as usize].as_str(), n as usize))
            .collect()
    }
}

/// Convenience for one-off documents.
pub fn prepare_document(t: &ChatTranscript, cfg: &PreprocessConfig) -> Document {
    Preprocessor::new(cfg.clone()).prepare(t)
}

pub fn build_corpus(docs: &[Document]) -> Result<Corpus, CorpusError> {
    Corpus::build(docs)
}
