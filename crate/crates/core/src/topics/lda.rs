//! Collapsed Gibbs sampling for latent Dirichlet allocation.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ModelKind, TopicError, TopicModel};
use crate::preprocess::Corpus;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LdaParams {
    pub alpha: f64,
    pub beta: f64,
    pub iters: usize,
    pub seed: u64,
}

impl Default for LdaParams {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.01,
            iters: 200,
            seed: 42,
        }
    }
}

struct Sampler<'a> {
    k: usize,
    v: usize,
    alpha: f64,
    beta: f64,
    docs: &'a [Vec<u32>],
    z: Vec<Vec<u16>>,
    n_dk: Vec<u32>,
    n_kw: Vec<u32>,
    n_k: Vec<u32>,
    probs: Vec<f64>,
}

impl<'a> Sampler<'a> {
    fn new(docs: &'a [Vec<u32>], k: usize, v: usize, alpha: f64, beta: f64, rng: &mut ChaCha8Rng) -> Self {
        let mut s = Sampler {
            k,
            v,
            alpha,
            beta,
            docs,
            z: Vec::with_capacity(docs.len()),
            n_dk: vec![0; docs.len() * k],
            n_kw: vec![0; k * v],
            n_k: vec![0; k],
            probs: vec![0.0; k],
        };
        for (d, words) in docs.iter().enumerate() {
            let mut zd = Vec::with_capacity(words.len());
            for &w in words {
                let t = rng.random_range(0..k);
                s.n_dk[d * k + t] += 1;
                s.n_kw[t * v + w as usize] += 1;
                s.n_k[t] += 1;
                zd.push(t as u16);
            }
            s.z.push(zd);
        }
        s
    }

    fn sweep(&mut self, rng: &mut ChaCha8Rng) {
        let (k, v) = (self.k, self.v);
        let vbeta = v as f64 * self.beta;
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i] as usize;
                let old = self.z[d][i] as usize;
                self.n_dk[d * k + old] -= 1;
                self.n_kw[old * v + w] -= 1;
                self.n_k[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    let p = (f64::from(self.n_dk[d * k + t]) + self.alpha)
                        * (f64::from(self.n_kw[t * v + w]) + self.beta)
                        / (f64::from(self.n_k[t]) + vbeta);
                    total += p;
                    self.probs[t] = total;
                }
                let new = draw(&self.probs, total, rng);

                self.n_dk[d * k + new] += 1;
                self.n_kw[new * v + w] += 1;
                self.n_k[new] += 1;
                self.z[d][i] = new as u16;
            }
        }
    }

    #[cfg(debug_assertions)]
    fn check_counts(&self, word_totals: &[u32]) {
        for w in 0..self.v {
            let s: u32 = (0..self.k).map(|t| self.n_kw[t * self.v + w]).sum();
            debug_assert_eq!(s, word_totals[w], "topic counts for word {w} drifted");
        }
        for t in 0..self.k {
            let s: u32 = self.n_kw[t * self.v..(t + 1) * self.v].iter().sum();
            debug_assert_eq!(s, self.n_k[t], "topic {t} total drifted");
        }
    }
}

// Inverse-CDF draw over cumulative weights.
fn draw(cumulative: &[f64], total: f64, rng: &mut ChaCha8Rng) -> usize {
    let u = rng.random::<f64>() * total;
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

fn expand_docs(c: &Corpus) -> Vec<Vec<u32>> {
    c.bows
        .iter()
        .map(|bow| {
            bow.iter()
                .flat_map(|&(w, n)| core::iter::repeat_n(w, n as usize))
                .collect()
        })
        .collect()
}

pub fn fit_lda(c: &Corpus, k: usize, params: &LdaParams) -> Result<TopicModel, TopicError> {
    if !(params.alpha > 0.0) || !(params.beta > 0.0) {
        return Err(TopicError::InvalidHyperparam);
    }
    if k == 0 || k > usize::from(u16::MAX) {
        return Err(TopicError::InvalidTopicCount(k));
    }
    let v = c.vocab_size();
    if v == 0 || c.bows.iter().all(|b| b.is_empty()) {
        return Err(TopicError::EmptyCorpus);
    }
    let docs = expand_docs(c);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut sampler = Sampler::new(&docs, k, v, params.alpha, params.beta, &mut rng);

    #[cfg(debug_assertions)]
    let word_totals = {
        let mut totals = vec![0u32; v];
        for bow in &c.bows {
            for &(w, n) in bow {
                totals[w as usize] += n;
            }
        }
        totals
    };

    for _ in 0..params.iters {
        sampler.sweep(&mut rng);
        #[cfg(debug_assertions)]
        sampler.check_counts(&word_totals);
    }

    let vbeta = v as f64 * params.beta;
    let topic_word = (0..k)
        .map(|t| {
            let denom = f64::from(sampler.n_k[t]) + vbeta;
            (0..v)
                .map(|w| (f64::from(sampler.n_kw[t * v + w]) + params.beta) / denom)
                .collect()
        })
        .collect();

    Ok(TopicModel {
        kind: ModelKind::Lda,
        num_topics: k,
        vocabulary: c.vocabulary.clone(),
        topic_word,
        alpha: params.alpha,
        beta: params.beta,
        rng_seed: params.seed,
        idf: Vec::new(),
        singular_values: Vec::new(),
    })
}

const FOLD_IN_SWEEPS: usize = 20;
const FOLD_IN_BURN: usize = 10;

/// Topic proportions of an unseen document with topic-word distributions held fixed.
///
/// Runs a seeded Gibbs chain over the document's tokens and averages the
/// smoothed proportions over the sweeps after burn-in.
pub(super) fn fold_in(m: &TopicModel, bow: &[(u32, u32)]) -> Vec<f64> {
    let k = m.num_topics;
    let words: Vec<usize> = bow
        .iter()
        .flat_map(|&(w, n)| core::iter::repeat_n(w as usize, n as usize))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(m.rng_seed ^ 0x5eed_f01d);
    let mut n_dk = vec![0u32; k];
    let mut z: Vec<usize> = words
        .iter()
        .map(|_| {
            let t = rng.random_range(0..k);
            n_dk[t] += 1;
            t
        })
        .collect();
    let mut cumulative = vec![0.0; k];
    let mut theta = vec![0.0; k];
    let len = words.len() as f64;
    let kalpha = k as f64 * m.alpha;
    for sweep in 0..FOLD_IN_SWEEPS {
        for (i, &w) in words.iter().enumerate() {
            n_dk[z[i]] -= 1;
            let mut total = 0.0;
            for t in 0..k {
                total += (f64::from(n_dk[t]) + m.alpha) * m.topic_word[t][w];
                cumulative[t] = total;
            }
            let t = draw(&cumulative, total, &mut rng);
            n_dk[t] += 1;
            z[i] = t;
        }
        if sweep >= FOLD_IN_BURN {
            for t in 0..k {
                theta[t] += (f64::from(n_dk[t]) + m.alpha) / (len + kalpha);
            }
        }
    }
    let samples = (FOLD_IN_SWEEPS - FOLD_IN_BURN) as f64;
    theta.iter_mut().for_each(|x| *x /= samples);
    theta
}
