//! Latent semantic indexing: TF-IDF weighting and truncated SVD by subspace power iteration.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ModelKind, TopicError, TopicModel};
use crate::linalg::{dot, norm, orthonormalize, symmetric_eigen};
use crate::preprocess::Corpus;

pub const POWER_TOLERANCE: f64 = 1e-8;
const MAX_POWER_ITERS: usize = 2000;
const OVERSAMPLE: usize = 8;
// relative to the largest eigenvalue of XᵀX
const RANK_EPS: f64 = 1e-10;

/// Sparse L2-normalized TF-IDF document rows.
#[derive(Debug, Clone)]
pub struct TfIdf {
    pub idf: Vec<f64>,
    pub rows: Vec<Vec<(usize, f64)>>,
}

/// Smoothed inverse document frequency, `ln((1 + D) / (1 + df)) + 1`.
pub fn idf(c: &Corpus) -> Vec<f64> {
    let mut df = vec![0u32; c.vocab_size()];
    for bow in &c.bows {
        for &(w, _) in bow {
            df[w as usize] += 1;
        }
    }
    let d = c.doc_count() as f64;
    df.iter()
        .map(|&n| libm::log((1.0 + d) / (1.0 + f64::from(n))) + 1.0)
        .collect()
}

pub fn tfidf_row(bow: &[(u32, u32)], idf: &[f64]) -> Vec<(usize, f64)> {
    let mut row: Vec<(usize, f64)> = bow
        .iter()
        .filter(|&&(w, _)| (w as usize) < idf.len())
        .map(|&(w, n)| (w as usize, f64::from(n) * idf[w as usize]))
        .collect();
    let len = libm::sqrt(row.iter().map(|(_, x)| x * x).sum::<f64>());
    if len > 0.0 {
        row.iter_mut().for_each(|(_, x)| *x /= len);
    }
    row.sort_by_key(|&(w, _)| w);
    row
}

impl TfIdf {
    pub fn new(c: &Corpus) -> Self {
        let idf = idf(c);
        let rows = c.bows.iter().map(|b| tfidf_row(b, &idf)).collect();
        Self { idf, rows }
    }

    // y = X q
    fn mul(&self, q: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(w, x)| x * q[w]).sum())
            .collect()
    }

    // z = Xᵀ y
    fn mul_t(&self, y: &[f64], v: usize) -> Vec<f64> {
        let mut z = vec![0.0; v];
        for (r, &yd) in self.rows.iter().zip(y) {
            if yd == 0.0 {
                continue;
            }
            for &(w, x) in r {
                z[w] += x * yd;
            }
        }
        z
    }

    fn gram_mul(&self, q: &[f64], v: usize) -> Vec<f64> {
        self.mul_t(&self.mul(q), v)
    }
}

/// Leading right singular vectors of the TF-IDF matrix.
#[derive(Debug, Clone)]
pub struct LsiFactorization {
    pub idf: Vec<f64>,
    /// Singular values, descending.
    pub singular_values: Vec<f64>,
    /// Unit-norm right singular vectors, one per row.
    pub components: Vec<Vec<f64>>,
    pub vocabulary: Vec<alloc::string::String>,
    /// Numerical rank found, at most the requested component count.
    pub rank: usize,
    pub iterations: usize,
}

impl LsiFactorization {
    /// Computes up to `k` components. Requests beyond `min(D, V)` are capped there.
    pub fn compute(c: &Corpus, k: usize) -> Self {
        let tfidf = TfIdf::new(c);
        let v = c.vocab_size();
        let limit = k.min(v).min(c.doc_count());
        let block = (limit + OVERSAMPLE).min(v).min(c.doc_count()).max(limit);

        let mut rng = ChaCha8Rng::seed_from_u64(0x151_5eed);
        let mut random_col = |_: usize| -> Vec<f64> { (0..v).map(|_| rng.random::<f64>() - 0.5).collect() };
        let mut q: Vec<Vec<f64>> = (0..block).map(&mut random_col).collect();
        orthonormalize(&mut q, &mut random_col);

        let mut values = Vec::new();
        let mut ritz: Vec<Vec<f64>> = Vec::new();
        let mut iterations = 0;
        for it in 0..MAX_POWER_ITERS {
            iterations = it + 1;
            let z: Vec<Vec<f64>> = q.iter().map(|col| tfidf.gram_mul(col, v)).collect();
            // Rayleigh-Ritz on span(q)
            let b = q.len();
            let mut h = vec![0.0; b * b];
            for i in 0..b {
                for j in i..b {
                    let x = dot(&q[i], &z[j]);
                    h[i * b + j] = x;
                    h[j * b + i] = x;
                }
            }
            let (vals, vecs) = symmetric_eigen(&h, b);
            let combine = |cols: &[Vec<f64>], coef: &[f64]| -> Vec<f64> {
                let mut out = vec![0.0; v];
                for (col, &a) in cols.iter().zip(coef) {
                    if a != 0.0 {
                        out.iter_mut().zip(col).for_each(|(o, x)| *o += a * x);
                    }
                }
                out
            };
            ritz = vecs.iter().take(limit).map(|u| combine(&q, u)).collect();
            values = vals.iter().take(limit).map(|&x| x.max(0.0)).collect();
            let top = values.first().copied().unwrap_or(0.0);
            let converged = top <= 0.0
                || vecs.iter().take(limit).zip(&ritz).zip(&values).all(|((u, r), &lam)| {
                    let mr = combine(&z, u);
                    let res: f64 = mr
                        .iter()
                        .zip(r)
                        .map(|(a, b)| (a - lam * b) * (a - lam * b))
                        .sum();
                    libm::sqrt(res) <= POWER_TOLERANCE * top
                });
            if converged {
                break;
            }
            q = z;
            orthonormalize(&mut q, &mut random_col);
        }

        let top = values.first().copied().unwrap_or(0.0);
        let rank = values
            .iter()
            .take_while(|&&lam| top > 0.0 && lam > RANK_EPS * top)
            .count();
        let mut components: Vec<Vec<f64>> = ritz.into_iter().take(rank).collect();
        for comp in &mut components {
            let n = norm(comp);
            comp.iter_mut().for_each(|x| *x /= n);
            // sign convention: largest-magnitude loading is positive
            let pivot = comp
                .iter()
                .copied()
                .fold(0.0_f64, |best, x| if x.abs() > best.abs() { x } else { best });
            if pivot < 0.0 {
                comp.iter_mut().for_each(|x| *x = -*x);
            }
        }
        Self {
            idf: tfidf.idf,
            singular_values: values.iter().take(rank).map(|&l| libm::sqrt(l)).collect(),
            components,
            vocabulary: c.vocabulary.clone(),
            rank,
            iterations,
        }
    }

    /// Model with the leading `k` components; `k` must not exceed the rank.
    pub fn truncate(&self, k: usize) -> TopicModel {
        let k = k.min(self.rank);
        TopicModel {
            kind: ModelKind::Lsi,
            num_topics: k,
            vocabulary: self.vocabulary.clone(),
            topic_word: self.components[..k].to_vec(),
            alpha: 0.0,
            beta: 0.0,
            rng_seed: 0,
            idf: self.idf.clone(),
            singular_values: self.singular_values[..k].to_vec(),
        }
    }
}

pub fn fit_lsi(c: &Corpus, k: usize) -> Result<TopicModel, TopicError> {
    if k == 0 {
        return Err(TopicError::InvalidTopicCount(k));
    }
    if c.vocab_size() == 0 || c.bows.iter().all(|b| b.is_empty()) {
        return Err(TopicError::EmptyCorpus);
    }
    let f = LsiFactorization::compute(c, k);
    if f.rank < k {
        return Err(TopicError::RankDeficient {
            requested: k,
            achieved: f.rank,
            model: alloc::boxed::Box::new(f.truncate(f.rank)),
        });
    }
    Ok(f.truncate(k))
}

/// |projection| of the document's TF-IDF vector on each topic, normalized to sum 1.
pub(super) fn project(m: &TopicModel, bow: &[(u32, u32)]) -> Vec<f64> {
    let row = tfidf_row(bow, &m.idf);
    let mut w: Vec<f64> = m
        .topic_word
        .iter()
        .map(|topic| row.iter().map(|&(i, x)| x * topic[i]).sum::<f64>().abs())
        .collect();
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        w.iter_mut().for_each(|x| *x /= total);
    }
    w
}
