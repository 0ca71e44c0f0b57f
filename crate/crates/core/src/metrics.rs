//! BLEU-4, ROUGE-1, ROUGE-L and punctuation accuracy, plus per-channel averages.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::tokenize;
use crate::punctuation::{PunctLabel, PunctMode};
use crate::transcript::ChannelKind;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("label lists differ in length: {reference} vs {predicted}")]
    LengthMismatch { reference: usize, predicted: usize },
}

/// Lowercased alphanumeric tokens, the unit every text metric counts.
pub fn metric_tokens(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    tokenize(&lower).map(String::from).collect()
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> BTreeMap<Vec<&str>, usize> {
    let mut out = BTreeMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *out.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
        }
    }
    out
}

fn clipped_matches<S: AsRef<str>>(candidate: &[S], reference: &[S], n: usize) -> (usize, usize) {
    let cand = ngram_counts(candidate, n);
    let refs = ngram_counts(reference, n);
    let matched = cand
        .iter()
        .map(|(g, &c)| c.min(refs.get(g).copied().unwrap_or(0)))
        .sum();
    (matched, candidate.len().saturating_sub(n - 1))
}

/// Sentence-level cumulative BLEU-4 with uniform weights.
///
/// An order with no matches contributes `(0 + 1) / (total + 1)` instead of zero.
pub fn bleu<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> f64 {
    let c = candidate.len();
    if c == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=4 {
        let (m, total) = clipped_matches(candidate, reference, n);
        let p = if m == 0 {
            1.0 / (total as f64 + 1.0)
        } else {
            m as f64 / total as f64
        };
        log_sum += 0.25 * libm::log(p);
    }
    let r = reference.len();
    let bp = if c < r {
        libm::exp(1.0 - r as f64 / c as f64)
    } else {
        1.0
    };
    (bp * libm::exp(log_sum)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RougeVariant {
    R1,
    RL,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    fn from_matches(m: usize, cand: usize, refr: usize) -> Self {
        if cand == 0 || refr == 0 {
            return Self::default();
        }
        let precision = m as f64 / cand as f64;
        let recall = m as f64 / refr as f64;
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f1,
        }
    }
}

pub fn lcs_len<S: AsRef<str>>(a: &[S], b: &[S]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x.as_ref() == y.as_ref() {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge<S: AsRef<str>>(candidate: &[S], reference: &[S], variant: RougeVariant) -> Prf {
    let m = match variant {
        RougeVariant::R1 => clipped_matches(candidate, reference, 1).0,
        RougeVariant::RL => lcs_len(candidate, reference),
    };
    Prf::from_matches(m, candidate.len(), reference.len())
}

/// Percentage of positions whose labels agree. An empty pair scores 100.
pub fn punct_accuracy(
    reference: &[PunctLabel],
    predicted: &[PunctLabel],
    mode: PunctMode,
) -> Result<f64, MetricError> {
    if reference.len() != predicted.len() {
        return Err(MetricError::LengthMismatch {
            reference: reference.len(),
            predicted: predicted.len(),
        });
    }
    if reference.is_empty() {
        return Ok(100.0);
    }
    let coerce = |l: PunctLabel| match mode {
        PunctMode::PeriodsOnly => l.periods_only(),
        PunctMode::Full => l,
    };
    let hits = reference
        .iter()
        .zip(predicted)
        .filter(|(&a, &b)| coerce(a) == coerce(b))
        .count();
    Ok(100.0 * hits as f64 / reference.len() as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricScores {
    pub bleu: f64,
    pub rouge1: Prf,
    #[serde(rename = "rougeL")]
    pub rouge_l: Prf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub punct_accuracy: Option<f64>,
}

impl MetricScores {
    /// Scores token lists; `candidate` is the summary.
    pub fn compute<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> Self {
        Self {
            bleu: bleu(candidate, reference),
            rouge1: rouge(candidate, reference, RougeVariant::R1),
            rouge_l: rouge(candidate, reference, RougeVariant::RL),
            punct_accuracy: None,
        }
    }

    pub fn for_texts(candidate: &str, reference: &str) -> Self {
        Self::compute(&metric_tokens(candidate), &metric_tokens(reference))
    }

    pub fn rouge(&self, variant: RougeVariant) -> Prf {
        match variant {
            RougeVariant::R1 => self.rouge1,
            RougeVariant::RL => self.rouge_l,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelAggregate {
    pub count: usize,
    pub bleu: f64,
    pub rouge1: Prf,
    #[serde(rename = "rougeL")]
    pub rouge_l: Prf,
    pub punct_accuracy: Option<f64>,
    pub punct_count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub channels: BTreeMap<ChannelKind, ChannelAggregate>,
}

impl AggregateReport {
    pub fn get(&self, kind: ChannelKind) -> Option<&ChannelAggregate> {
        self.channels.get(&kind)
    }
}

#[derive(Default)]
struct Sums {
    count: usize,
    bleu: f64,
    r1: [f64; 3],
    rl: [f64; 3],
    punct: f64,
    punct_count: usize,
}

fn add_prf(acc: &mut [f64; 3], p: &Prf) {
    acc[0] += p.precision;
    acc[1] += p.recall;
    acc[2] += p.f1;
}

fn mean_prf(acc: &[f64; 3], n: f64) -> Prf {
    Prf {
        precision: acc[0] / n,
        recall: acc[1] / n,
        f1: acc[2] / n,
    }
}

/// Arithmetic means per channel. Items without punctuation accuracy are left out of that mean only.
pub fn aggregate<'a>(items: impl IntoIterator<Item = (ChannelKind, &'a MetricScores)>) -> AggregateReport {
    let mut sums: BTreeMap<ChannelKind, Sums> = BTreeMap::new();
    for (kind, s) in items {
        let e = sums.entry(kind).or_default();
        e.count += 1;
        e.bleu += s.bleu;
        add_prf(&mut e.r1, &s.rouge1);
        add_prf(&mut e.rl, &s.rouge_l);
        if let Some(p) = s.punct_accuracy {
            e.punct += p;
            e.punct_count += 1;
        }
    }
    let channels = sums
        .into_iter()
        .map(|(k, s)| {
            let n = s.count as f64;
            let agg = ChannelAggregate {
                count: s.count,
                bleu: s.bleu / n,
                rouge1: mean_prf(&s.r1, n),
                rouge_l: mean_prf(&s.rl, n),
                punct_accuracy: (s.punct_count > 0).then(|| s.punct / s.punct_count as f64),
                punct_count: s.punct_count,
            };
            (k, agg)
        })
        .collect();
    AggregateReport { channels }
}

#[cfg(test)]
mod tests {
    use super::*;
    use PunctLabel::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn bleu_identity_and_disjoint() {
        let x = toks("the router keeps dropping the connection");
        assert!((bleu(&x, &x) - 1.0).abs() < 1e-15);
        let long_a: Vec<String> = (0..30).map(|i| alloc::format!("a{i}")).collect();
        let long_b: Vec<String> = (0..30).map(|i| alloc::format!("b{i}")).collect();
        assert!(bleu(&long_a, &long_b) < 0.05);
        assert_eq!(bleu::<&str>(&[], &x), 0.0);
    }

    #[test]
    fn bleu_hand_case() {
        // p1 = 5/5, p2 = 3/4, p3 = 2/3, p4 = 1/2; c = 5, r = 6
        let oracle = libm::exp(1.0 - 6.0 / 5.0) * libm::pow(1.0 * 0.75 * (2.0 / 3.0) * 0.5, 0.25);
        let got = bleu(&toks("the cat sat on mat"), &toks("the cat sat on the mat"));
        assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
    }

    #[test]
    fn rouge_hand_cases() {
        let r = rouge(&toks("a b c"), &toks("a b d"), RougeVariant::R1);
        for v in [r.precision, r.recall, r.f1] {
            assert!((v - 2.0 / 3.0).abs() < 1e-15);
        }
        let r = rouge(&toks("a b c d"), &toks("a c b d"), RougeVariant::RL);
        assert_eq!(lcs_len(&toks("a b c d"), &toks("a c b d")), 3);
        assert!((r.f1 - 0.75).abs() < 1e-15);
        let x = toks("same words here");
        assert_eq!(rouge(&x, &x, RougeVariant::R1).f1, 1.0);
        assert_eq!(rouge(&x, &x, RougeVariant::RL).f1, 1.0);
        assert_eq!(rouge(&x, &[], RougeVariant::R1), Prf::default());
    }

    #[test]
    fn punct_accuracy_cases() {
        let a = [O, Period, O];
        assert_eq!(punct_accuracy(&a, &a, PunctMode::Full), Ok(100.0));
        let got = punct_accuracy(&a, &[O, O, O], PunctMode::Full).unwrap();
        assert!((got - 66.67).abs() < 0.01);
        assert!(punct_accuracy(&a, &[O], PunctMode::Full).is_err());
        assert_eq!(punct_accuracy(&[Question, Comma], &[Period, O], PunctMode::PeriodsOnly), Ok(100.0));
    }

    #[test]
    fn aggregate_means() {
        let s = |b| MetricScores {
            bleu: b,
            ..Default::default()
        };
        let items = [s(0.2), s(0.4)];
        let rep = aggregate(items.iter().map(|x| (ChannelKind::Customer, x)));
        let c = rep.get(ChannelKind::Customer).unwrap();
        assert!((c.bleu - 0.3).abs() < 1e-15);
        assert_eq!((c.count, c.punct_count, c.punct_accuracy), (2, 0, None));
        let one = MetricScores::for_texts("a b c", "a b d");
        let rep = aggregate([(ChannelKind::Agent, &one)]);
        let a = rep.get(ChannelKind::Agent).unwrap();
        assert_eq!((a.bleu, a.rouge1, a.rouge_l), (one.bleu, one.rouge1, one.rouge_l));
    }
}
