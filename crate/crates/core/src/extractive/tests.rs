use super::*;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::embeddings::{MeanWordEncoder, SentenceVector};
use crate::preprocess::PreprocessConfig;
use crate::punctuation::RulePredictor;
use crate::synthetic;
use crate::transcript::Role;

fn store(rows: &[(&str, &[f32])]) -> WordVectorStore {
    WordVectorStore::from_rows(rows.iter().map(|(w, v)| (w.to_string(), v.to_vec())))
        .unwrap()
        .store
}

fn sentences(texts: &[&str]) -> Vec<Sentence> {
    texts
        .iter()
        .enumerate()
        .map(|(index, t)| Sentence {
            index,
            text: t.to_string(),
        })
        .collect()
}

/// Encodes a sentence as the vector planted for its text.
struct Planted(Vec<(&'static str, Vec<f64>)>);

impl SentenceEncoder for Planted {
    fn encode(&self, text: &str) -> Result<SentenceVector, EncoderError> {
        let values = self
            .0
            .iter()
            .find(|(t, _)| *t == text)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| vec![0.0; self.0[0].1.len()]);
        Ok(SentenceVector {
            source_len: usize::from(values.iter().any(|&x| x != 0.0)),
            values,
        })
    }

    fn provider(&self) -> &str {
        "planted"
    }
}

#[test]
fn significant_terms_examples() {
    let s = store(&[("router", &[1.0, 0.0]), ("invoice", &[0.0, 1.0])]);
    assert_eq!(significant_terms(&["router"], &["router"], 0.5, &s), "router");
    assert_eq!(significant_terms(&["router"], &["invoice"], 0.5, &s), "");
    assert_eq!(significant_terms::<&str, &str>(&[], &[], 0.5, &s), "");
}

#[test]
fn significant_terms_match_brute_force() {
    // 5 document words and 3 keywords at planted angles on the unit circle
    let doc_angles = [0.0f64, 0.4, 0.9, 1.4, 2.5];
    let kw_angles = [0.1f64, 1.0, 2.0];
    let docs: Vec<String> = (0..5).map(|i| alloc::format!("doc{i}")).collect();
    let kws: Vec<String> = (0..3).map(|i| alloc::format!("kw{i}")).collect();
    let mut rows: Vec<(String, Vec<f32>)> = Vec::new();
    for (w, a) in docs.iter().zip(doc_angles).chain(kws.iter().zip(kw_angles)) {
        rows.push((w.clone(), vec![libm::cos(a) as f32, libm::sin(a) as f32]));
    }
    let s = WordVectorStore::from_rows(rows).unwrap().store;
    let w = 0.8;
    // oracle: enumerate all 15 pairs with the closed-form cosine cos(a - b)
    let mut expected: Vec<&str> = Vec::new();
    for (d, a) in docs.iter().zip(doc_angles) {
        for (k, b) in kws.iter().zip(kw_angles) {
            let c = libm::cos(f64::from(a as f32) - f64::from(b as f32));
            if c >= w - 1e-6 {
                for x in [d.as_str(), k.as_str()] {
                    if !expected.contains(&x) {
                        expected.push(x);
                    }
                }
            }
        }
    }
    assert!(expected.len() >= 4);
    assert_eq!(significant_terms(&docs, &kws, w, &s), expected.join(" "));
    // raising W never adds terms
    let counts: Vec<usize> = [0.0, 0.3, 0.6, 0.8, 0.95, 1.0]
        .iter()
        .map(|&w| {
            let t = significant_terms(&docs, &kws, w, &s);
            t.split_whitespace().count()
        })
        .collect();
    assert!(counts.windows(2).all(|p| p[0] >= p[1]), "{counts:?}");
}

#[test]
fn local_terms_by_frequency() {
    let doc = ["modem", "router", "router", "signal", "modem", "router"];
    assert_eq!(local_terms(&doc, 2), "router modem");
    assert_eq!(local_terms(&doc, 10), "router modem signal");
}

#[test]
fn unique_examples() {
    let enc = Planted(vec![("a", vec![1.0, 0.0]), ("b", vec![0.0, 1.0])]);
    let kept = reduce_unique_sentences(&sentences(&["a", "a"]), 0.5, &enc).unwrap();
    assert_eq!(kept.len(), 1);
    let kept = reduce_unique_sentences(&sentences(&["a", "b"]), 0.5, &enc).unwrap();
    assert_eq!(kept.len(), 2);
}

/// Independent greedy trace: walk the sentences keeping a boolean mask and
/// compare against the mask of earlier kept sentences.
fn greedy_oracle(m: &[[f64; 6]; 6], u: f64) -> Vec<usize> {
    let mut keep = [false; 6];
    for i in 0..6 {
        let mut dup = false;
        for j in 0..i {
            if keep[j] && m[j][i] > u {
                dup = true;
            }
        }
        keep[i] = !dup;
    }
    (0..6).filter(|&i| keep[i]).collect()
}

#[test]
fn unique_matches_greedy_trace() {
    let m = [
        [1.0, 0.9, 0.2, 0.6, 0.1, 0.3],
        [0.9, 1.0, 0.7, 0.1, 0.2, 0.95],
        [0.2, 0.7, 1.0, 0.4, 0.55, 0.1],
        [0.6, 0.1, 0.4, 1.0, 0.45, 0.2],
        [0.1, 0.2, 0.55, 0.45, 1.0, 0.8],
        [0.3, 0.95, 0.1, 0.2, 0.8, 1.0],
    ];
    let mut prev = usize::MAX;
    for u in [0.0, 0.3, 0.5, 0.58, 0.65, 0.85, 1.0] {
        let got = unique_indices(6, u, |i, j| m[i][j]);
        assert_eq!(got, greedy_oracle(&m, u), "u = {u}");
        assert_eq!(got[0], 0);
        // the kept count only changes monotonically with U
        if prev != usize::MAX {
            assert!(got.len() >= prev || u == 0.0);
        }
        prev = got.len();
    }
    assert_eq!(unique_indices(6, 0.5, |i, j| m[i][j]), [0, 2, 5]);
}

#[test]
fn rank_examples() {
    let enc = Planted(vec![
        ("q", vec![1.0, 0.0]),
        ("s0", vec![0.9, libm::sqrt(1.0 - 0.81)]),
        ("s1", vec![0.1, libm::sqrt(1.0 - 0.01)]),
        ("s2", vec![0.8, libm::sqrt(1.0 - 0.64)]),
    ]);
    let s = sentences(&["s0", "s1", "s2"]);
    let got = rank_and_extract(&s, "q", 2, &enc).unwrap();
    assert_eq!(got.iter().map(|s| s.index).collect::<Vec<_>>(), [0, 2]);
    let got = rank_and_extract(&s, "q", 5, &enc).unwrap();
    assert_eq!(got.iter().map(|s| s.index).collect::<Vec<_>>(), [0, 1, 2]);
    // empty query: every score is 0 and the tie rule keeps the first l
    let got = rank_and_extract(&s, "", 2, &enc).unwrap();
    assert_eq!(got.iter().map(|s| s.index).collect::<Vec<_>>(), [0, 1]);
}

#[test]
fn top_l_is_prefix_stable() {
    let scores = [0.3, 0.9, 0.3, 0.1, 0.9, 0.5, 0.3];
    for l in 1..scores.len() {
        let small = top_l(&scores, l);
        let big = top_l(&scores, l + 1);
        assert!(small.iter().all(|i| big.contains(i)), "l = {l}");
    }
    assert_eq!(top_l(&scores, 3), [1, 4, 5]);
}

struct Fixture {
    pre: Preprocessor,
    store: WordVectorStore,
    rule: RulePredictor,
}

impl Fixture {
    fn new() -> Self {
        Self {
            pre: Preprocessor::new(PreprocessConfig::default()),
            store: synthetic::word_vectors(32, 0.3, 3),
            rule: RulePredictor::default(),
        }
    }
}

fn with_resources<T>(f: &Fixture, oracle: bool, run: impl FnOnce(&Resources<'_>) -> T) -> T {
    let enc = MeanWordEncoder::new(&f.store);
    let res = Resources {
        preprocessor: &f.pre,
        store: &f.store,
        encoder: &enc,
        punctuator: if oracle {
            Punctuator::Oracle
        } else {
            Punctuator::Model(&f.rule)
        },
        clock: &(),
    };
    run(&res)
}

fn quick_cfg() -> SummarizerConfig {
    SummarizerConfig {
        topic_model_type: Some(ModelKind::Lda),
        number_of_topics: 2,
        max_topics: 4,
        topic_step: 2,
        lda: LdaParams {
            iters: 30,
            ..LdaParams::default()
        },
        ..SummarizerConfig::default()
    }
}

#[test]
fn vacuous_selection_and_empty_agent() {
    let f = Fixture::new();
    let t = ChatTranscript::from_turns(
        "t1",
        [
            ("c", "My router is broken. The modem blinks red."),
            ("c", "Can you check the signal? The network is slow."),
            ("c", "Thanks for the help."),
        ],
    );
    let roles = RoleMap::new().with("c", Role::Customer).with("a", Role::Agent);
    // no near-duplicate reduction, so only the length cap could drop sentences
    let cfg = SummarizerConfig {
        uniqueness_threshold: 1.0,
        ..quick_cfg()
    };
    let out = with_resources(&f, true, |res| {
        summarize_extractive(SourceTranscript { transcript: &t, roles: &roles }, &cfg, res, None).unwrap()
    });
    let texts: Vec<&str> = out.customer.summary.sentences.iter().map(|s| s.text.as_str()).collect();
    assert_eq!(
        texts,
        [
            "My router is broken.",
            "The modem blinks red.",
            "Can you check the signal.",
            "The network is slow.",
            "Thanks for the help."
        ]
    );
    // full restore through the oracle gives back the original marks
    assert_eq!(
        out.customer.summary.punctuated_text,
        "My router is broken. The modem blinks red. Can you check the signal? The network is slow. Thanks for the help."
    );
    let scores = out.customer.scores.unwrap();
    assert_eq!(scores.punct_accuracy, Some(100.0));
    assert!((scores.rouge1.f1 - 1.0).abs() < 1e-12);
    assert!(out.agent.summary.sentences.is_empty());
    assert!(out.agent.scores.is_none());
    assert!(out.agent.dominant.entries.is_empty());
}

fn normalize(s: &str) -> String {
    s.chars()
        .filter(|c| !",.?!;:".contains(*c))
        .collect::<String>()
        .to_lowercase()
}

#[test]
fn batch_summaries_are_extractive_and_bounded() {
    let f = Fixture::new();
    let chats = synthetic::chats(20, 11);
    let src: Vec<SourceTranscript<'_>> = chats
        .iter()
        .map(|c| SourceTranscript {
            transcript: &c.transcript,
            roles: &c.roles,
        })
        .collect();
    let cfg = quick_cfg();
    for oracle in [true, false] {
        let out = with_resources(&f, oracle, |res| summarize_batch(&src, &cfg, res, None).unwrap());
        assert_eq!(out.summaries.len(), 20);
        assert!(out.models.customer.is_some() && out.models.agent.is_some());
        for (s, chat) in out.summaries.iter().zip(&chats) {
            let (cust, agent) = separate_channels(&chat.transcript, &chat.roles).unwrap();
            for (ch, source) in [(&s.customer, cust), (&s.agent, agent)] {
                let summary = &ch.summary;
                assert!(summary.sentences.len() <= cfg.summary_length);
                let source_text = normalize(&source.channel_text());
                for sent in &summary.sentences {
                    let n = normalize(&sent.text);
                    assert!(source_text.contains(n.trim()), "{n} not in {source_text}");
                }
                assert_eq!(summary.transcript_id, chat.transcript.id);
                if oracle {
                    assert_eq!(ch.scores.unwrap().punct_accuracy, Some(100.0));
                    assert_eq!(ch.period_accuracy, Some(100.0));
                }
            }
        }
    }
}

#[test]
fn batch_is_deterministic_and_reuses_models() {
    let f = Fixture::new();
    let chats = synthetic::chats(8, 5);
    let src: Vec<SourceTranscript<'_>> = chats
        .iter()
        .map(|c| SourceTranscript {
            transcript: &c.transcript,
            roles: &c.roles,
        })
        .collect();
    let cfg = quick_cfg();
    let a = with_resources(&f, false, |res| summarize_batch(&src, &cfg, res, None).unwrap());
    let b = with_resources(&f, false, |res| summarize_batch(&src, &cfg, res, None).unwrap());
    assert_eq!(a.summaries, b.summaries);
    let c = with_resources(&f, false, |res| summarize_batch(&src, &cfg, res, Some(&a.models)).unwrap());
    assert_eq!(a.summaries, c.summaries);
}

#[test]
fn errors_carry_step() {
    let f = Fixture::new();
    let t = ChatTranscript::from_turns("t9", [("who", "hello there")]);
    let roles = RoleMap::new();
    let err = with_resources(&f, true, |res| {
        summarize_extractive(SourceTranscript { transcript: &t, roles: &roles }, &quick_cfg(), res, None).unwrap_err()
    });
    assert!(matches!(err, ExtractiveError::Step { step: Step::Separate, .. }));
    assert!(err.to_string().starts_with("step 1 (separate)"));
    let bad = SummarizerConfig {
        summary_length: 0,
        ..SummarizerConfig::default()
    };
    assert!(matches!(bad.validate(), Err(ExtractiveError::InvalidConfig(_))));
}

#[test]
fn channel_model_round_trips_index() {
    let f = Fixture::new();
    let chats = synthetic::chats(6, 2);
    let src: Vec<SourceTranscript<'_>> = chats
        .iter()
        .map(|c| SourceTranscript {
            transcript: &c.transcript,
            roles: &c.roles,
        })
        .collect();
    let out = with_resources(&f, true, |res| summarize_batch(&src, &quick_cfg(), res, None).unwrap());
    let m = out.models.customer.unwrap();
    let toks: Vec<String> = m.model.vocabulary.iter().take(3).cloned().collect();
    assert_eq!(m.bow_for(&toks), [(0, 1), (1, 1), (2, 1)]);
    assert!(m.coherence.is_some());
}
