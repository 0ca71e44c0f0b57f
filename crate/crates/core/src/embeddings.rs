//! Word vectors, cosine similarity and sentence encoders.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::preprocess::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbeddingError {
    #[error("vector lengths differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("no valid vector rows")]
    NoValidRows,
}

/// Immutable token → vector table; every vector has length `dim`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WordVectorStore {
    dim: usize,
    table: BTreeMap<String, Vec<f32>>,
}

/// Result of parsing vector text: the store and how many rows were rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedVectors {
    pub store: WordVectorStore,
    pub skipped: usize,
}

impl WordVectorStore {
    /// Builds a store from `(token, vector)` rows. The first row fixes the
    /// dimension; rows of another length are skipped and counted.
    pub fn from_rows<I, S>(rows: I) -> Result<ParsedVectors, EmbeddingError>
    where
        I: IntoIterator<Item = (S, Vec<f32>)>,
        S: Into<String>,
    {
        let mut dim = None;
        let mut table = BTreeMap::new();
        let mut skipped = 0;
        for (tok, v) in rows {
            match dim {
                None if !v.is_empty() => dim = Some(v.len()),
                Some(d) if d == v.len() => {}
                _ => {
                    skipped += 1;
                    continue;
                }
            }
            table.insert(tok.into(), v);
        }
        match dim {
            Some(dim) => Ok(ParsedVectors {
                store: Self { dim, table },
                skipped,
            }),
            None => Err(EmbeddingError::NoValidRows),
        }
    }

    /// Parses the `token v1 v2 … vD` text format. Lines that fail to parse count as skipped.
    pub fn parse(text: &str) -> Result<ParsedVectors, EmbeddingError> {
        let mut bad = 0;
        let rows: Vec<(String, Vec<f32>)> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .filter_map(|line| {
                let mut parts = line.split_whitespace();
                let tok = parts.next()?;
                match parts.map(str::parse::<f32>).collect::<Result<Vec<_>, _>>() {
                    Ok(v) if !v.is_empty() => Some((tok.to_string(), v)),
                    _ => {
                        bad += 1;
                        None
                    }
                }
            })
            .collect();
        let mut parsed = Self::from_rows(rows)?;
        parsed.skipped += bad;
        Ok(parsed)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.table.get(token).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.table.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Vector for a document token. A joined phrase such as `credit_card` falls
    /// back to the mean of its known parts.
    pub fn token_vector(&self, token: &str) -> Option<Vec<f64>> {
        if let Some(v) = self.get(token) {
            return Some(v.iter().map(|&x| f64::from(x)).collect());
        }
        if !token.contains('_') {
            return None;
        }
        let mean = self.mean_of(token.split('_').filter(|p| !p.is_empty()));
        (mean.source_len > 0).then_some(mean.values)
    }

    /// Mean of the in-vocabulary vectors; out-of-vocabulary tokens are skipped.
    pub fn mean_of<'a>(&self, tokens: impl IntoIterator<Item = &'a str>) -> SentenceVector {
        let mut sum = vec![0.0f64; self.dim];
        let mut n = 0;
        for tok in tokens {
            if let Some(v) = self.get(tok) {
                sum.iter_mut().zip(v).for_each(|(s, &x)| *s += f64::from(x));
                n += 1;
            }
        }
        if n > 0 {
            let n = n as f64;
            sum.iter_mut().for_each(|s| *s /= n);
        }
        SentenceVector {
            values: sum,
            source_len: n,
        }
    }
}

/// `u·v / (‖u‖‖v‖)`, or 0 when either vector is zero.
pub fn cosine<T: Copy + Into<f64>>(u: &[T], v: &[T]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let mut uv = 0.0;
    let mut uu = 0.0;
    let mut vv = 0.0;
    for (&a, &b) in u.iter().zip(v) {
        let (a, b): (f64, f64) = (a.into(), b.into());
        uv += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Ok(0.0);
    }
    // product of norms is symmetric in (u, v) so the result is too
    let denom = libm::sqrt(uu) * libm::sqrt(vv);
    Ok((uv / denom).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceVector {
    pub values: Vec<f64>,
    /// Tokens that contributed to `values`.
    pub source_len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncoderError {
    #[error("encoder timed out")]
    Timeout,
    #[error("encoder protocol error: {0}")]
    Protocol(String),
    #[error("encoder failed: {0}")]
    Failed(String),
}

pub trait SentenceEncoder {
    fn encode(&self, text: &str) -> Result<SentenceVector, EncoderError>;

    /// Recorded in run metadata.
    fn provider(&self) -> &str;

    fn similarity(&self, a: &str, b: &str) -> Result<f64, EncoderError> {
        let (a, b) = (self.encode(a)?, self.encode(b)?);
        cosine(&a.values, &b.values).map_err(|e| EncoderError::Protocol(e.to_string()))
    }
}

impl<E: SentenceEncoder + ?Sized> SentenceEncoder for &E {
    fn encode(&self, text: &str) -> Result<SentenceVector, EncoderError> {
        (**self).encode(text)
    }

    fn provider(&self) -> &str {
        (**self).provider()
    }
}

/// Mean of the word vectors of the lowercased tokens.
#[derive(Debug, Clone, Copy)]
pub struct MeanWordEncoder<'a> {
    pub store: &'a WordVectorStore,
}

impl<'a> MeanWordEncoder<'a> {
    pub fn new(store: &'a WordVectorStore) -> Self {
        Self { store }
    }
}

impl SentenceEncoder for MeanWordEncoder<'_> {
    fn encode(&self, text: &str) -> Result<SentenceVector, EncoderError> {
        let lower = text.to_lowercase();
        let words: Vec<&str> = tokenize(&lower).collect();
        Ok(self.store.mean_of(words.iter().copied()))
    }

    fn provider(&self) -> &str {
        "mean-word-vectors"
    }
}

pub fn embed_sentence(text: &str, encoder: &dyn SentenceEncoder) -> Result<SentenceVector, EncoderError> {
    encoder.encode(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store() -> WordVectorStore {
        WordVectorStore::parse("router 1 0 0 0\nmodem 0.5 0.5 0 0\nbill 0 0 1 0\n")
            .unwrap()
            .store
    }

    #[test]
    fn parse_fixture() {
        let p = WordVectorStore::parse("a 1 2 3 4\nb 1 2 3\nc 0 0 0 1\nd 1 1 1 1\n").unwrap();
        assert_eq!(p.store.dim(), 4);
        assert_eq!(p.store.len(), 3);
        assert_eq!(p.skipped, 1);
        assert!(p.store.get("b").is_none());
        assert_eq!(WordVectorStore::parse(""), Err(EmbeddingError::NoValidRows));
        let p = WordVectorStore::parse("a 1 x\nb 1 2\n").unwrap();
        assert_eq!((p.store.len(), p.skipped), (1, 1));
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]), Ok(1.0));
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]), Ok(0.0));
        // 32 / sqrt(14 * 77)
        let oracle = 32.0 / libm::sqrt(1078.0);
        let got = cosine(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert!((got - oracle).abs() < 1e-15);
        assert!((got - 0.974_631_846).abs() < 1e-9);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 2.0]), Ok(0.0));
        assert_eq!(
            cosine(&[1.0], &[1.0, 2.0]),
            Err(EmbeddingError::DimensionMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    fn mean_encoder() {
        let s = store();
        let enc = MeanWordEncoder::new(&s);
        assert_eq!(enc.encode("Router").unwrap().values, [1.0, 0.0, 0.0, 0.0]);
        let oov = enc.encode("nothing known here").unwrap();
        assert_eq!(oov.source_len, 0);
        assert!(oov.values.iter().all(|&x| x == 0.0));
        let two = enc.encode("router, bill!").unwrap();
        assert_eq!(two.source_len, 2);
        assert_eq!(two.values, [0.5, 0.0, 0.5, 0.0]);
        assert_eq!(enc.encode("bill router").unwrap(), two);
    }

    #[test]
    fn phrase_tokens_fall_back_to_parts() {
        let s = store();
        assert_eq!(s.token_vector("router_bill"), Some(vec![0.5, 0.0, 0.5, 0.0]));
        assert_eq!(s.token_vector("router_zzz"), Some(vec![1.0, 0.0, 0.0, 0.0]));
        assert_eq!(s.token_vector("zzz"), None);
    }
}
