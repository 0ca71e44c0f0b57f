use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Collocation detector producing bigrams in a first pass and trigrams in a second.
///
/// A pair `(a, b)` is joined as `a_b` when `count(a b) >= min_count` and
/// `(count(a b) - min_count) * N / (count(a) * count(b)) >= threshold`, where `N`
/// is the number of distinct unigram and bigram entries seen while learning.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhraseModel {
    passes: Vec<PairTable>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct PairTable {
    joined: BTreeSet<(String, String)>,
}

impl PairTable {
    fn learn(streams: &[Vec<String>], min_count: u32, threshold: f64) -> Self {
        let mut unigrams: BTreeMap<&str, u64> = BTreeMap::new();
        let mut bigrams: BTreeMap<(&str, &str), u64> = BTreeMap::new();
        for s in streams {
            for w in s {
                *unigrams.entry(w).or_default() += 1;
            }
            for pair in s.windows(2) {
                *bigrams.entry((&pair[0], &pair[1])).or_default() += 1;
            }
        }
        let n = (unigrams.len() + bigrams.len()) as f64;
        let min = u64::from(min_count);
        let joined = bigrams
            .iter()
            .filter(|(&(a, b), &count)| {
                if count < min {
                    return false;
                }
                let score = (count - min) as f64 * n / (unigrams[a] * unigrams[b]) as f64;
                score >= threshold
            })
            .map(|(&(a, b), _)| (String::from(a), String::from(b)))
            .collect();
        Self { joined }
    }

    fn apply(&self, tokens: &[String]) -> Vec<String> {
        let mut out = Vec::with_capacity(tokens.len());
        let mut i = 0;
        while i < tokens.len() {
            if i + 1 < tokens.len() {
                let key = (tokens[i].clone(), tokens[i + 1].clone());
                if self.joined.contains(&key) {
                    out.push([tokens[i].as_str(), "_", tokens[i + 1].as_str()].concat());
                    i += 2;
                    continue;
                }
            }
            out.push(tokens[i].clone());
            i += 1;
        }
        out
    }
}

impl PhraseModel {
    pub fn learn(streams: &[Vec<String>], min_count: u32, threshold: f64) -> Self {
        let bigram = PairTable::learn(streams, min_count, threshold);
        let joined: Vec<Vec<String>> = streams.iter().map(|s| bigram.apply(s)).collect();
        let trigram = PairTable::learn(&joined, min_count, threshold);
        Self {
            passes: alloc::vec![bigram, trigram],
        }
    }

    pub fn apply(&self, tokens: &[String]) -> Vec<String> {
        let mut cur = tokens.to_vec();
        for pass in &self.passes {
            cur = pass.apply(&cur);
        }
        cur
    }

    pub fn phrase_count(&self) -> usize {
        self.passes.iter().map(|p| p.joined.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn s(words: &str) -> Vec<String> {
        words.split(' ').map(|w| w.to_string()).collect()
    }

    #[test]
    fn threshold_score() {
        // "credit card" 6 times among filler: count(ab)=6, count(a)=count(b)=6
        let mut streams = vec![];
        for i in 0..6 {
            streams.push(s(&alloc::format!("credit card filler{i} other{i}")));
        }
        let m = PhraseModel::learn(&streams, 5, 10.0);
        // N = 14 unigrams + 13 bigrams = 27; score (6-5)*27/36 < 10 -> not joined
        assert_eq!(m.phrase_count(), 0);
        let m = PhraseModel::learn(&streams, 5, 0.5);
        assert_eq!(m.apply(&s("my credit card")), s("my credit_card"));
    }

    #[test]
    fn trigram_second_pass() {
        let streams: Vec<_> = (0..10).map(|_| s("new york city")).collect();
        let m = PhraseModel::learn(&streams, 2, 0.1);
        assert_eq!(m.apply(&s("new york city")), s("new_york_city"));
    }
}
