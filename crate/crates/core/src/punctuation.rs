//! Punctuation restoration: tokenize, map to ids, cut overlapping segments,
//! predict a label per token, resolve overlaps and merge labels back into text.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PunctLabel {
    #[serde(rename = "O")]
    O,
    #[serde(rename = "COMMA")]
    Comma,
    #[serde(rename = "PERIOD")]
    Period,
    #[serde(rename = "QUESTION")]
    Question,
}

impl PunctLabel {
    pub fn symbol(self) -> Option<char> {
        match self {
            PunctLabel::O => None,
            PunctLabel::Comma => Some(','),
            PunctLabel::Period => Some('.'),
            PunctLabel::Question => Some('?'),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PunctLabel::O => "O",
            PunctLabel::Comma => "COMMA",
            PunctLabel::Period => "PERIOD",
            PunctLabel::Question => "QUESTION",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "O" => PunctLabel::O,
            "COMMA" => PunctLabel::Comma,
            "PERIOD" => PunctLabel::Period,
            "QUESTION" => PunctLabel::Question,
            _ => return None,
        })
    }

    fn ends_sentence(self) -> bool {
        matches!(self, PunctLabel::Period | PunctLabel::Question)
    }

    fn strength(self) -> u8 {
        match self {
            PunctLabel::O => 0,
            PunctLabel::Comma => 1,
            PunctLabel::Period => 2,
            PunctLabel::Question => 3,
        }
    }

    /// Label as seen by a sentence-boundary-only restorer.
    pub fn periods_only(self) -> Self {
        match self {
            PunctLabel::O | PunctLabel::Comma => PunctLabel::O,
            PunctLabel::Period | PunctLabel::Question => PunctLabel::Period,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PunctMode {
    PeriodsOnly,
    Full,
}

/// Window of token ids handed to a predictor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    /// Position of the first token in the full token stream.
    pub start: usize,
    pub token_ids: Vec<u32>,
    /// Tokens shared with the previous segment.
    pub overlap: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.token_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_ids.is_empty()
    }
}

/// Everything a predictor sees for one restoration call.
#[derive(Debug, Clone, Copy)]
pub struct SegmentBatch<'a> {
    pub segments: &'a [Segment],
    /// Token text for each session id.
    pub vocab: &'a [String],
    /// Stream positions of tokens that end a speaker turn.
    pub turn_boundaries: &'a [usize],
}

impl SegmentBatch<'_> {
    pub fn tokens(&self, seg: &Segment) -> Vec<&str> {
        seg.token_ids
            .iter()
            .map(|&id| self.vocab[id as usize].as_str())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredictorError {
    #[error("predictor timed out")]
    Timeout,
    #[error("protocol error (status {status}): {body}")]
    Protocol { status: u16, body: String },
    #[error("{0}")]
    Failed(String),
}

/// Per-token punctuation classifier over segments.
pub trait Predictor {
    /// One label list per segment, each as long as its segment.
    fn predict(&self, batch: &SegmentBatch<'_>) -> Result<Vec<Vec<PunctLabel>>, PredictorError>;
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn predict(&self, batch: &SegmentBatch<'_>) -> Result<Vec<Vec<PunctLabel>>, PredictorError> {
        (**self).predict(batch)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PunctError {
    #[error("predictor failed: {0}")]
    PredictorFailure(#[from] PredictorError),
    #[error("segment size {0} is below the minimum of 8")]
    SegmentSizeInvalid(usize),
    #[error("segment {segment} has {expected} tokens but {got} labels")]
    LabelCountMismatch {
        segment: usize,
        expected: usize,
        got: usize,
    },
}

pub const DEFAULT_SEGMENT_SIZE: usize = 512;
pub const MIN_SEGMENT_SIZE: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PunctuatedText {
    pub text: String,
    pub labels: Vec<PunctLabel>,
    pub mode: PunctMode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stripped {
    /// Lowercased words separated by single spaces.
    pub clean: String,
    /// Punctuation class that followed each word.
    pub labels: Vec<PunctLabel>,
}

fn strip_class(c: char) -> Option<PunctLabel> {
    match c {
        ',' | ':' => Some(PunctLabel::Comma),
        '.' | ';' | '!' => Some(PunctLabel::Period),
        '?' => Some(PunctLabel::Question),
        _ => None,
    }
}

/// Removes `, . ? ! ; :` and records the class that followed each surviving word.
/// When several marks follow one word the strongest wins (`?` over `.` over `,`).
pub fn strip_punctuation(text: &str) -> Stripped {
    let mut words: Vec<String> = Vec::new();
    let mut labels: Vec<PunctLabel> = Vec::new();
    for raw in text.split_whitespace() {
        let mut word = String::new();
        let mut pending = PunctLabel::O;
        for c in raw.chars() {
            match strip_class(c) {
                Some(class) => {
                    if !word.is_empty() && !pending.ends_sentence() && pending == PunctLabel::O {
                        pending = class;
                    } else if class.strength() > pending.strength() {
                        pending = class;
                    }
                }
                None => {
                    // mark inside a token, e.g. "3.5" or "a,b": splits it
                    if pending != PunctLabel::O && !word.is_empty() {
                        words.push(core::mem::take(&mut word));
                        labels.push(pending);
                        pending = PunctLabel::O;
                    }
                    word.extend(c.to_lowercase());
                }
            }
        }
        if word.is_empty() {
            // bare punctuation attaches to the previous word
            if let Some(last) = labels.last_mut() {
                if pending.strength() > last.strength() {
                    *last = pending;
                }
            }
            continue;
        }
        words.push(word);
        labels.push(pending);
    }
    Stripped {
        clean: words.join(" "),
        labels,
    }
}

/// Overlapping windows of `size` tokens with a stride of `size - size / 4`.
pub fn make_segments(token_ids: &[u32], size: usize) -> Result<Vec<Segment>, PunctError> {
    if size < MIN_SEGMENT_SIZE {
        return Err(PunctError::SegmentSizeInvalid(size));
    }
    let stride = size - size / 4;
    let mut out = Vec::new();
    let mut start = 0;
    let mut prev_end: usize = 0;
    while start < token_ids.len() {
        let end = (start + size).min(token_ids.len());
        out.push(Segment {
            start,
            token_ids: token_ids[start..end].to_vec(),
            overlap: prev_end.saturating_sub(start),
        });
        if end == token_ids.len() {
            break;
        }
        prev_end = end;
        start += stride;
    }
    Ok(out)
}

/// For each stream position, the label from the segment where it sits farthest from an edge.
pub fn resolve_overlaps(
    n: usize,
    segments: &[Segment],
    preds: &[Vec<PunctLabel>],
) -> Vec<PunctLabel> {
    let mut best: Vec<Option<(usize, PunctLabel)>> = vec![None; n];
    for (seg, labels) in segments.iter().zip(preds) {
        let len = seg.len();
        for (i, &label) in labels.iter().enumerate() {
            let centrality = i.min(len - 1 - i);
            let slot = &mut best[seg.start + i];
            if slot.is_none_or(|(c, _)| centrality > c) {
                *slot = Some((centrality, label));
            }
        }
    }
    best.into_iter()
        .map(|s| s.map_or(PunctLabel::O, |(_, l)| l))
        .collect()
}

/// Re-attaches punctuation after each word and capitalizes sentence starts.
pub fn merge_tokens(tokens: &[&str], labels: &[PunctLabel]) -> String {
    let mut out = String::new();
    let mut capitalize = true;
    for (tok, &label) in tokens.iter().zip(labels) {
        if !out.is_empty() {
            out.push(' ');
        }
        if capitalize {
            let mut chars = tok.chars();
            if let Some(first) = chars.next() {
                out.extend(first.to_uppercase());
                out.push_str(chars.as_str());
            }
        } else {
            out.push_str(tok);
        }
        if let Some(sym) = label.symbol() {
            out.push(sym);
        }
        capitalize = label.ends_sentence();
    }
    out
}

pub fn restore(
    text: &str,
    mode: PunctMode,
    predictor: &dyn Predictor,
    segment_size: usize,
) -> Result<PunctuatedText, PunctError> {
    restore_with_boundaries(text, mode, predictor, segment_size, &[])
}

/// Restores punctuation to whitespace-tokenized `text`.
pub fn restore_with_boundaries(
    text: &str,
    mode: PunctMode,
    predictor: &dyn Predictor,
    segment_size: usize,
    turn_boundaries: &[usize],
) -> Result<PunctuatedText, PunctError> {
    if segment_size < MIN_SEGMENT_SIZE {
        return Err(PunctError::SegmentSizeInvalid(segment_size));
    }
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.is_empty() {
        return Ok(PunctuatedText {
            text: String::new(),
            labels: Vec::new(),
            mode,
        });
    }
    let mut ids: BTreeMap<&str, u32> = BTreeMap::new();
    let mut vocab: Vec<String> = Vec::new();
    let token_ids: Vec<u32> = tokens
        .iter()
        .map(|&t| {
            *ids.entry(t).or_insert_with(|| {
                vocab.push(String::from(t));
                (vocab.len() - 1) as u32
            })
        })
        .collect();
    let segments = make_segments(&token_ids, segment_size)?;
    let batch = SegmentBatch {
        segments: &segments,
        vocab: &vocab,
        turn_boundaries,
    };
    let preds = predictor.predict(&batch)?;
    if preds.len() != segments.len() {
        return Err(PunctError::LabelCountMismatch {
            segment: preds.len().min(segments.len()),
            expected: segments.len(),
            got: preds.len(),
        });
    }
    for (i, (seg, p)) in segments.iter().zip(&preds).enumerate() {
        if seg.len() != p.len() {
            return Err(PunctError::LabelCountMismatch {
                segment: i,
                expected: seg.len(),
                got: p.len(),
            });
        }
    }
    let mut labels = resolve_overlaps(tokens.len(), &segments, &preds);
    if mode == PunctMode::PeriodsOnly {
        labels.iter_mut().for_each(|l| *l = l.periods_only());
    }
    Ok(PunctuatedText {
        text: merge_tokens(&tokens, &labels),
        labels,
        mode,
    })
}

/// Replays known labels by stream position; the test oracle for restoration.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OraclePredictor {
    pub labels: Vec<PunctLabel>,
}

impl OraclePredictor {
    pub fn new(labels: Vec<PunctLabel>) -> Self {
        Self { labels }
    }
}

impl Predictor for OraclePredictor {
    fn predict(&self, batch: &SegmentBatch<'_>) -> Result<Vec<Vec<PunctLabel>>, PredictorError> {
        Ok(batch
            .segments
            .iter()
            .map(|seg| {
                (seg.start..seg.start + seg.len())
                    .map(|p| self.labels.get(p).copied().unwrap_or(PunctLabel::O))
                    .collect()
            })
            .collect())
    }
}

static WH_AND_AUX: &[&str] = &[
    "what", "when", "where", "which", "who", "whom", "whose", "why", "how", "do", "does", "did",
    "can", "could", "is", "are", "was", "were", "will", "would", "should", "shall", "may",
    "might", "must", "have", "has", "had", "am", "isn't", "aren't", "don't", "doesn't",
    "didn't", "can't", "won't",
];

static CONJUNCTIONS: &[&str] = &[
    "but", "because", "although", "though", "however", "unless", "whereas", "so", "otherwise",
];

/// Baseline predictor: periods at turn ends and long unbroken runs, question
/// marks for clauses opened by a wh-word or auxiliary, commas before conjunctions.
#[derive(Debug, Clone)]
pub struct RulePredictor {
    pub max_run: usize,
    questions: BTreeSet<&'static str>,
    conjunctions: BTreeSet<&'static str>,
}

impl Default for RulePredictor {
    fn default() -> Self {
        Self::new(25)
    }
}

impl RulePredictor {
    pub fn new(max_run: usize) -> Self {
        Self {
            max_run: max_run.max(1),
            questions: WH_AND_AUX.iter().copied().collect(),
            conjunctions: CONJUNCTIONS.iter().copied().collect(),
        }
    }

    /// Labels for one run of tokens starting at stream position `start`.
    pub fn label(&self, tokens: &[&str], start: usize, boundaries: &BTreeSet<usize>) -> Vec<PunctLabel> {
        let mut out = Vec::with_capacity(tokens.len());
        let mut run = 0;
        let mut question = false;
        for (i, tok) in tokens.iter().enumerate() {
            if run == 0 {
                question = self.questions.contains(tok);
            }
            run += 1;
            let at_boundary = boundaries.contains(&(start + i));
            let label = if at_boundary || run == self.max_run {
                run = 0;
                if question {
                    PunctLabel::Question
                } else {
                    PunctLabel::Period
                }
            } else if run >= 2 && tokens.get(i + 1).is_some_and(|n| self.conjunctions.contains(n)) {
                PunctLabel::Comma
            } else {
                PunctLabel::O
            };
            out.push(label);
        }
        out
    }
}

impl Predictor for RulePredictor {
    fn predict(&self, batch: &SegmentBatch<'_>) -> Result<Vec<Vec<PunctLabel>>, PredictorError> {
        let boundaries: BTreeSet<usize> = batch.turn_boundaries.iter().copied().collect();
        Ok(batch
            .segments
            .iter()
            .map(|seg| self.label(&batch.tokens(seg), seg.start, &boundaries))
            .collect())
    }
}

/// Stream positions of the last word of each chunk, counted with the same
/// tokenization `strip_punctuation` uses.
pub fn boundaries_of<'a>(chunks: impl IntoIterator<Item = &'a str>) -> Vec<usize> {
    let mut out = Vec::new();
    let mut seen = 0;
    for chunk in chunks {
        let n = strip_punctuation(chunk).labels.len();
        if n > 0 {
            seen += n;
            out.push(seen - 1);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::ToString;
    use PunctLabel::*;

    #[test]
    fn strip_example() {
        let s = strip_punctuation("Hi, thanks. Bye?");
        assert_eq!(s.clean, "hi thanks bye");
        assert_eq!(s.labels, [Comma, Period, Question]);
        let s = strip_punctuation("no punct here");
        assert_eq!(s.labels, [O, O, O]);
    }

    #[test]
    fn strip_fold_ins_and_stray_marks() {
        let s = strip_punctuation("wait; ok: go! what?! done .");
        assert_eq!(s.clean, "wait ok go what done");
        assert_eq!(s.labels, [Period, Comma, Period, Question, Period]);
        let s = strip_punctuation("version 3.5 works");
        assert_eq!(s.clean, "version 3 5 works");
        assert_eq!(s.labels, [O, Period, O, O]);
    }

    /// Independent count of word tokens: split on whitespace, drop tokens made only of marks,
    /// split tokens at interior marks.
    fn regex_like_count(text: &str) -> usize {
        text.split_whitespace()
            .map(|w| {
                w.split(|c: char| ",.?!;:".contains(c))
                    .filter(|p| !p.is_empty())
                    .count()
            })
            .sum()
    }

    #[test]
    fn strip_label_count_matches_token_count() {
        let mut text = String::new();
        for i in 0..200 {
            text.push_str(&format!("w{i}"));
            text.push_str(match i % 7 {
                0 => ", ",
                3 => ". ",
                5 => "? ",
                6 => " ; ",
                _ => " ",
            });
        }
        let s = strip_punctuation(&text);
        assert_eq!(s.labels.len(), 200);
        assert_eq!(s.labels.len(), regex_like_count(&text));
        assert_eq!(s.clean.split(' ').count(), s.labels.len());
    }

    #[test]
    fn restore_inverse_of_strip() {
        let p = OraclePredictor::new(vec![Comma, Period, Question]);
        let r = restore("hi thanks bye", PunctMode::Full, &p, 512).unwrap();
        assert_eq!(r.text, "Hi, thanks. Bye?");
        let r = restore("hi thanks bye", PunctMode::PeriodsOnly, &p, 512).unwrap();
        assert_eq!(r.text, "Hi thanks. Bye.");
        assert_eq!(r.labels, [O, Period, Period]);
    }

    #[test]
    fn all_o_capitalizes_first() {
        let p = OraclePredictor::default();
        let r = restore("my bill is wrong", PunctMode::Full, &p, 512).unwrap();
        assert_eq!(r.text, "My bill is wrong");
    }

    #[test]
    fn segment_size_checked() {
        let p = OraclePredictor::default();
        assert_eq!(
            restore("a b", PunctMode::Full, &p, 7),
            Err(PunctError::SegmentSizeInvalid(7))
        );
    }

    struct Recording {
        seen: core::cell::RefCell<Vec<usize>>,
    }

    impl Predictor for Recording {
        fn predict(&self, batch: &SegmentBatch<'_>) -> Result<Vec<Vec<PunctLabel>>, PredictorError> {
            self.seen.borrow_mut().extend(batch.segments.iter().map(|s| s.len()));
            // label each token by which segment produced it
            Ok(batch
                .segments
                .iter()
                .enumerate()
                .map(|(i, s)| vec![if i % 2 == 0 { Comma } else { Period }; s.len()])
                .collect())
        }
    }

    #[test]
    fn long_input_segments_and_single_assignment() {
        let text: Vec<String> = (0..1100).map(|i| format!("t{i}")).collect();
        let text = text.join(" ");
        let ids: Vec<u32> = (0..1100).collect();
        let segs = make_segments(&ids, 512).unwrap();
        assert_eq!(segs.len(), 3);
        assert_eq!(
            segs.iter().map(|s| (s.start, s.len(), s.overlap)).collect::<Vec<_>>(),
            [(0, 512, 0), (384, 512, 128), (768, 332, 128)]
        );
        // oracle: count label assignments per token position
        let mut owners = vec![0usize; 1100];
        let preds: Vec<Vec<PunctLabel>> = segs.iter().map(|s| vec![O; s.len()]).collect();
        let resolved = resolve_overlaps(1100, &segs, &preds);
        assert_eq!(resolved.len(), 1100);
        for s in &segs {
            for p in s.start..s.start + s.len() {
                owners[p] += 1;
            }
        }
        assert!(owners.iter().all(|&c| c == 1 || c == 2));

        let rec = Recording { seen: Default::default() };
        let r = restore(&text, PunctMode::Full, &rec, 512).unwrap();
        assert_eq!(r.labels.len(), 1100);
        assert_eq!(*rec.seen.borrow(), [512, 512, 332]);
        // the overlap [384, 512) splits at its middle: 384..448 from segment 0, 448.. from 1
        assert_eq!(r.labels[447], Comma);
        assert_eq!(r.labels[448], Period);
        assert_eq!(r.labels[831], Period);
        assert_eq!(r.labels[832], Comma);
    }

    #[test]
    fn label_count_mismatch_is_reported() {
        struct Short;
        impl Predictor for Short {
            fn predict(&self, b: &SegmentBatch<'_>) -> Result<Vec<Vec<PunctLabel>>, PredictorError> {
                Ok(b.segments.iter().map(|_| vec![O]).collect())
            }
        }
        let err = restore("a b c", PunctMode::Full, &Short, 512).unwrap_err();
        assert!(matches!(err, PunctError::LabelCountMismatch { expected: 3, got: 1, .. }));
    }

    fn rule_labels(text: &str, boundaries: &[usize]) -> Vec<PunctLabel> {
        let toks: Vec<&str> = text.split(' ').collect();
        RulePredictor::default().label(&toks, 0, &boundaries.iter().copied().collect())
    }

    #[test]
    fn rule_question_at_boundary() {
        assert_eq!(rule_labels("can you reset it", &[3]), [O, O, O, Question]);
        assert_eq!(rule_labels("please reset it", &[2]), [O, O, Period]);
    }

    #[test]
    fn rule_max_run() {
        let text: Vec<String> = (0..30).map(|i| format!("x{i}")).collect();
        let labels = rule_labels(&text.join(" "), &[]);
        for (i, l) in labels.iter().enumerate() {
            assert_eq!(*l, if i == 24 { Period } else { O }, "token {i}");
        }
        assert!(RulePredictor::default().label(&[], 0, &BTreeSet::new()).is_empty());
    }

    #[test]
    fn rule_comma_before_conjunction() {
        assert_eq!(
            rule_labels("i paid it but the bill is wrong", &[7]),
            [O, O, Comma, O, O, O, O, Period]
        );
    }

    #[test]
    fn boundaries_follow_strip_tokenization() {
        assert_eq!(boundaries_of(["Hi there.", "", "ok, so 3.5?"]), [1, 5]);
    }

    #[test]
    fn periods_only_has_no_commas() {
        let text = "what is this but why is that";
        let r = restore_with_boundaries(text, PunctMode::PeriodsOnly, &RulePredictor::default(), 512, &[2, 6]).unwrap();
        assert!(!r.text.contains(',') && !r.text.contains('?'));
        assert!(r.labels.iter().all(|l| matches!(l, O | Period)));
        assert_eq!(r.text.to_string(), "What is this. But why is that.");
    }
}
