use super::*;
use crate::preprocess::{build_corpus, Document};
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn doc(tokens: &[&str]) -> Document {
    Document {
        transcript_id: "d".into(),
        tokens: tokens.iter().map(|s| s.to_string()).collect(),
    }
}

fn corpus(docs: &[&[&str]]) -> Corpus {
    build_corpus(&docs.iter().map(|d| doc(d)).collect::<Vec<_>>()).unwrap()
}

/// 300 documents, three topics over disjoint 10-word vocabularies, each document
/// drawn mostly from one topic.
fn three_topic_corpus(seed: u64) -> (Corpus, Vec<Vec<String>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab: Vec<Vec<String>> = (0..3)
        .map(|t| (0..10).map(|i| alloc::format!("t{t}w{i}")).collect())
        .collect();
    // word i has weight 1/(i+1)
    let weights: Vec<f64> = (0..10).map(|i| 1.0 / (i as f64 + 1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut docs = Vec::new();
    for d in 0..300 {
        let main = d % 3;
        let mut tokens = Vec::new();
        for _ in 0..40 {
            let topic = if rng.random::<f64>() < 0.9 { main } else { rng.random_range(0..3) };
            let mut u = rng.random::<f64>() * total;
            let mut w = 0;
            while u >= weights[w] && w < 9 {
                u -= weights[w];
                w += 1;
            }
            tokens.push(vocab[topic][w].clone());
        }
        docs.push(Document {
            transcript_id: alloc::format!("d{d}"),
            tokens,
        });
    }
    let truth = vocab.iter().map(|v| v[..5].to_vec()).collect();
    (build_corpus(&docs).unwrap(), truth)
}

fn best_matching_overlap(model: &TopicModel, truth: &[Vec<String>]) -> Vec<usize> {
    let fitted: Vec<Vec<&str>> = (0..model.num_topics).map(|k| model.top_words(k, 5)).collect();
    let overlap = |f: usize, t: usize| fitted[f].iter().filter(|w| truth[t].iter().any(|x| x == *w)).count();
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let best = perms
        .iter()
        .max_by_key(|p| (0..3).map(|t| overlap(p[t], t)).sum::<usize>())
        .unwrap();
    (0..3).map(|t| overlap(best[t], t)).collect()
}

#[test]
fn lda_single_topic_is_smoothed_unigram() {
    let c = corpus(&[&["a", "b", "a"], &["c", "a"]]);
    let p = LdaParams { iters: 5, ..Default::default() };
    let m = fit_lda(&c, 1, &p).unwrap();
    // counts a=3 b=1 c=1, total 5, V=3
    let denom = 5.0 + 3.0 * p.beta;
    for (w, n) in [(0, 3.0), (1, 1.0), (2, 1.0)] {
        assert!((m.topic_word[0][w] - (n + p.beta) / denom).abs() < 1e-15);
    }
}

#[test]
fn lda_recovers_disjoint_topics() {
    let (c, truth) = three_topic_corpus(7);
    let m = fit_lda(&c, 3, &LdaParams::default()).unwrap();
    for row in &m.topic_word {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(row.iter().all(|&x| x >= 0.0));
    }
    let overlaps = best_matching_overlap(&m, &truth);
    assert!(overlaps.iter().all(|&o| o >= 4), "{overlaps:?}");
}

#[test]
fn lda_seed_determinism() {
    let (c, _) = three_topic_corpus(1);
    let p = LdaParams { iters: 30, ..Default::default() };
    let a = fit_lda(&c, 4, &p).unwrap();
    let b = fit_lda(&c, 4, &p).unwrap();
    assert_eq!(a.topic_word, b.topic_word);
    let other = fit_lda(&c, 4, &LdaParams { seed: 99, ..p }).unwrap();
    assert_ne!(a.topic_word, other.topic_word);
}

#[test]
fn lda_rejects_bad_priors() {
    let c = corpus(&[&["a"]]);
    let bad = LdaParams { alpha: 0.0, ..Default::default() };
    assert_eq!(fit_lda(&c, 2, &bad), Err(TopicError::InvalidHyperparam));
    let bad = LdaParams { beta: -1.0, ..Default::default() };
    assert_eq!(fit_lda(&c, 2, &bad), Err(TopicError::InvalidHyperparam));
}

#[test]
fn lsi_rank_one() {
    let c = corpus(&[&["a", "b", "b"], &["a", "b", "b"], &["a", "b", "b"]]);
    let m = fit_lsi(&c, 1).unwrap();
    // shared TF-IDF row: every word in every doc, idf = 1, tf (1, 2) -> (1, 2)/sqrt(5)
    let expect = [1.0 / libm::sqrt(5.0), 2.0 / libm::sqrt(5.0)];
    for w in 0..2 {
        assert!((m.topic_word[0][w] - expect[w]).abs() < 1e-9);
    }
    match fit_lsi(&c, 2) {
        Err(TopicError::RankDeficient { requested, achieved, model }) => {
            assert_eq!((requested, achieved), (2, 1));
            assert_eq!(model.num_topics, 1);
        }
        other => panic!("expected RankDeficient, got {other:?}"),
    }
}

/// Dense TF-IDF matrix built straight from the definition.
fn dense_tfidf(c: &Corpus) -> nalgebra::DMatrix<f64> {
    let d = c.doc_count();
    let v = c.vocab_size();
    let mut m = nalgebra::DMatrix::zeros(d, v);
    for w in 0..v {
        let df = c.bows.iter().filter(|b| b.iter().any(|&(x, _)| x as usize == w)).count();
        let idf = ((1.0 + d as f64) / (1.0 + df as f64)).ln() + 1.0;
        for (i, bow) in c.bows.iter().enumerate() {
            if let Some(&(_, n)) = bow.iter().find(|&&(x, _)| x as usize == w) {
                m[(i, w)] = n as f64 * idf;
            }
        }
    }
    for mut row in m.row_iter_mut() {
        let n = row.norm();
        if n > 0.0 {
            row /= n;
        }
    }
    m
}

#[test]
fn lsi_block_diagonal_matches_dense_svd() {
    // two blocks of two documents each, with different weights so singular values differ
    let c = corpus(&[
        &["a", "a", "a", "b"],
        &["a", "b", "b", "b"],
        &["c", "d"],
        &["c", "c", "d"],
    ]);
    let m = fit_lsi(&c, 2).unwrap();
    let x = dense_tfidf(&c);
    let svd = x.clone().svd(false, true);
    let vt = svd.v_t.unwrap();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    for k in 0..2 {
        let oracle = vt.row(order[k]);
        let d: f64 = (0..4).map(|w| oracle[w] * m.topic_word[k][w]).sum();
        assert!((d.abs() - 1.0).abs() < 1e-8, "topic {k}: {d}");
        assert!((m.singular_values[k] - svd.singular_values[order[k]]).abs() < 1e-8);
    }
    // each topic lives on one block
    for k in 0..2 {
        let ab = m.topic_word[k][0].abs() + m.topic_word[k][1].abs();
        let cd = m.topic_word[k][2].abs() + m.topic_word[k][3].abs();
        assert!(ab < 1e-8 || cd < 1e-8);
    }
}

#[test]
fn lsi_rows_orthonormal() {
    let (c, _) = three_topic_corpus(3);
    let m = fit_lsi(&c, 8).unwrap();
    for i in 0..8 {
        assert!((crate::linalg::norm(&m.topic_word[i]) - 1.0).abs() < 1e-9);
        for j in 0..i {
            assert!(crate::linalg::dot(&m.topic_word[i], &m.topic_word[j]).abs() < 1e-6);
        }
    }
}

/// UMass straight from token lists.
fn umass_oracle(docs: &[&[&str]], words: &[&str]) -> f64 {
    let has = |d: &&[&str], w: &str| d.contains(&w);
    let mut s = 0.0;
    for j in 1..words.len() {
        let dj = docs.iter().filter(|d| has(d, words[j])).count().max(1) as f64;
        for i in 0..j {
            let co = docs.iter().filter(|d| has(d, words[i]) && has(d, words[j])).count() as f64;
            s += ((co + 1.0) / dj).ln();
        }
    }
    s
}

fn manual_model(vocab: &[&str], rows: Vec<Vec<f64>>) -> TopicModel {
    TopicModel {
        kind: ModelKind::Lda,
        num_topics: rows.len(),
        vocabulary: vocab.iter().map(|s| s.to_string()).collect(),
        topic_word: rows,
        alpha: 0.1,
        beta: 0.01,
        rng_seed: 1,
        idf: vec![],
        singular_values: vec![],
    }
}

#[test]
fn coherence_hand_computed() {
    let docs: [&[&str]; 3] = [&["x", "y"], &["y", "z"], &["x", "y", "z"]];
    let c = corpus(&docs);
    // vocab ids follow first occurrence: x, y, z; rank y > x > z
    let m = manual_model(&["x", "y", "z"], vec![vec![0.3, 0.5, 0.2]]);
    let r = coherence(&m, &c, 3);
    let expect = umass_oracle(&docs, &["y", "x", "z"]);
    // ln(3/2) + ln(2/2) + ln(3/2)
    assert!((expect - 2.0 * (1.5f64).ln()).abs() < 1e-12);
    assert!((r.score - expect).abs() < 1e-12);
    assert_eq!(r.per_topic.len(), 1);
}

#[test]
fn coherence_perfect_cooccurrence_bound() {
    let docs: [&[&str]; 4] = [&["a", "b"], &["a", "b"], &["b", "a"], &["a", "b", "c"]];
    let c = corpus(&docs);
    let m = manual_model(&["a", "b", "c"], vec![vec![0.5, 0.4, 0.1]]);
    let r = coherence(&m, &c, 2);
    assert!((r.score - (5.0f64 / 4.0).ln()).abs() < 1e-12);
}

#[test]
fn coherence_mean_matches_per_topic() {
    let (c, _) = three_topic_corpus(5);
    let m = fit_lda(&c, 3, &LdaParams { iters: 20, ..Default::default() }).unwrap();
    let r = coherence(&m, &c, 10);
    let mean = r.per_topic.iter().sum::<f64>() / r.per_topic.len() as f64;
    assert!((r.score - mean).abs() < 1e-12);
}

#[test]
fn grid_shapes() {
    let s = TopicSearch { min_topics: 50, ..Default::default() };
    assert_eq!(s.grid(), vec![50]);
    let s = TopicSearch::default();
    assert_eq!(s.grid(), vec![5, 10, 15, 20, 25, 30, 35, 40, 45, 50]);
    let s = TopicSearch { min_topics: 12, ..Default::default() };
    assert_eq!(s.grid(), vec![12, 17, 22, 27, 32, 37, 42, 47]);
}

#[test]
fn tie_prefers_smaller_k_then_lda() {
    let mk = |kind, k, score| Candidate {
        model: TopicModel { kind, num_topics: k, ..manual_model(&["a"], vec![vec![1.0]]) },
        report: CoherenceReport { kind, num_topics: k, score, per_topic: vec![score] },
    };
    let best = pick_best([mk(ModelKind::Lsi, 10, -1.0), mk(ModelKind::Lda, 15, -1.0), mk(ModelKind::Lda, 10, -1.0)]).unwrap();
    assert_eq!((best.model.kind, best.model.num_topics), (ModelKind::Lda, 10));
    let best = pick_best([mk(ModelKind::Lda, 5, -2.0), mk(ModelKind::Lsi, 20, -0.5)]).unwrap();
    assert_eq!((best.model.kind, best.model.num_topics), (ModelKind::Lsi, 20));
}

#[test]
fn selection_matches_exhaustive_rescoring() {
    let (c, _) = three_topic_corpus(11);
    let search = TopicSearch {
        min_topics: 2,
        max_topics: 12,
        step: 5,
        lda: LdaParams { iters: 40, ..Default::default() },
        ..Default::default()
    };
    let chosen = select_optimal_model(&c, &search).unwrap();
    // re-fit and re-score every grid point directly
    let mut best: Option<(f64, usize, ModelKind)> = None;
    for kind in [ModelKind::Lda, ModelKind::Lsi] {
        for k in [2, 7, 12] {
            let m = match kind {
                ModelKind::Lda => fit_lda(&c, k, &search.lda).unwrap(),
                ModelKind::Lsi => fit_lsi(&c, k).unwrap(),
            };
            let s = coherence(&m, &c, 10).score;
            if best.is_none_or(|(bs, bk, bkind)| s > bs || (s == bs && (k, kind) < (bk, bkind))) {
                best = Some((s, k, kind));
            }
        }
    }
    let (s, k, kind) = best.unwrap();
    assert_eq!((chosen.model.num_topics, chosen.model.kind), (k, kind));
    assert!((chosen.report.score - s).abs() < 1e-9);
}

#[test]
fn dominant_topic_on_disjoint_model() {
    let vocab = ["a", "b", "c", "d", "e", "f"];
    let c = corpus(&[&["a", "b"], &["c", "d"], &["e", "f"]]);
    let beta = 0.01;
    let rows: Vec<Vec<f64>> = (0..3)
        .map(|t| {
            let mut r: Vec<f64> = (0..6).map(|w| if w / 2 == t { 50.0 + beta } else { beta }).collect();
            let s: f64 = r.iter().sum();
            r.iter_mut().for_each(|x| *x /= s);
            r
        })
        .collect();
    let m = manual_model(&vocab, rows);
    let bow = c.bow_for(&["a", "b", "a", "a", "b", "b", "a", "b"].map(String::from));
    let dt = dominant_topics(&m, "x", &bow, 1, 2);
    assert_eq!(dt.entries.len(), 1);
    assert_eq!(dt.entries[0].topic_id, 0);
    // Dirichlet posterior mean with all 8 tokens on topic 0
    let exact = (8.0 + m.alpha) / (8.0 + 3.0 * m.alpha);
    assert!(dt.entries[0].weight > 0.9);
    assert!((dt.entries[0].weight - exact).abs() < 0.02);
    assert_eq!(dt.entries[0].keywords, ["a", "b"]);

    let all = dominant_topics(&m, "x", &bow, 3, 2);
    let total: f64 = all.entries.iter().map(|e| e.weight).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert!(all.entries.windows(2).all(|w| w[0].weight >= w[1].weight));

    assert!(dominant_topics(&m, "x", &[], 1, 2).entries.is_empty());
}

#[test]
fn lsi_dominant_weights_sum_to_one() {
    let (c, _) = three_topic_corpus(2);
    let m = fit_lsi(&c, 4).unwrap();
    let dt = dominant_topics(&m, "x", &c.bows[0], 4, 3);
    let total: f64 = dt.entries.iter().map(|e| e.weight).sum();
    assert!((total - 1.0).abs() < 1e-9);
}
