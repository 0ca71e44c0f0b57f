//! Seeded synthetic chat transcripts and clustered word vectors.
//!
//! Each transcript is about one of a handful of support themes. Theme words share
//! a vector centroid, so same-theme words are close under cosine similarity and
//! words of different themes are nearly orthogonal.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::embeddings::WordVectorStore;
use crate::transcript::{ChatTranscript, Role, RoleMap};

pub struct Theme {
    pub name: &'static str,
    pub words: &'static [&'static str],
}

pub static THEMES: &[Theme] = &[
    Theme {
        name: "billing",
        words: &["invoice", "payment", "charge", "refund", "balance", "statement", "billing", "credit"],
    },
    Theme {
        name: "internet",
        words: &["router", "modem", "connection", "signal", "network", "outage", "bandwidth", "wireless"],
    },
    Theme {
        name: "device",
        words: &["phone", "screen", "battery", "charger", "camera", "warranty", "repair", "tablet"],
    },
    Theme {
        name: "shipping",
        words: &["package", "delivery", "courier", "tracking", "parcel", "address", "shipment", "warehouse"],
    },
    Theme {
        name: "account",
        words: &["password", "login", "username", "profile", "security", "verification", "email", "settings"],
    },
];

static FILLER: &[&str] = &[
    "problem", "issue", "update", "check", "look", "today", "yesterday", "again", "please", "thanks",
    "help", "working", "since", "morning", "number", "order", "customer", "service", "minute", "moment",
];

static CUSTOMER_TEMPLATES: &[&str] = &[
    "my {a} is not working since yesterday",
    "i have a problem with the {a} and the {b}",
    "can you check my {a}?",
    "the {a} keeps failing, and the {b} too",
    "why is my {a} so slow?",
    "i already tried to reset the {a}",
    "is there an update on my {a}?",
    "thanks, the {a} looks fine now",
    "hi, i need help with my {a}",
    "the {b} shows an error after the {a} changed",
];

static AGENT_TEMPLATES: &[&str] = &[
    "i can help you with the {a} today",
    "let me check the {a} on your account",
    "i see a recent change to your {a}",
    "please restart the {a} and wait a minute",
    "your {a} and {b} were updated this morning",
    "could you confirm the {a} for me?",
    "i have created a ticket for the {b}",
    "thank you for waiting, the {a} is fixed",
    "is there anything else about the {a}?",
    "the {b} will be ready within a moment",
];

fn fill(template: &str, theme: &Theme, rng: &mut ChaCha8Rng) -> String {
    let a = theme.words.choose(rng).copied().unwrap_or("issue");
    let b = theme.words.choose(rng).copied().unwrap_or("issue");
    template.replace("{a}", a).replace("{b}", b)
}

fn turn(templates: &[&str], theme: &Theme, rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(1..=3);
    let mut parts: Vec<String> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut s = fill(templates.choose(rng).copied().unwrap_or("{a}"), theme, rng);
        if !s.ends_with('?') {
            s.push('.');
        }
        parts.push(s);
    }
    let mut text = parts.join(" ");
    // chat turns often lack the final mark
    if rng.random_bool(0.3) && text.ends_with('.') {
        text.pop();
    }
    text
}

/// A transcript with its speaker roles and the index of its theme in [`THEMES`].
#[derive(Debug, Clone)]
pub struct SyntheticChat {
    pub transcript: ChatTranscript,
    pub roles: RoleMap,
    pub theme: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct ChatShape {
    pub min_turns: usize,
    pub max_turns: usize,
    /// Probability that a transcript has no agent turns at all.
    pub customer_only: f64,
}

impl Default for ChatShape {
    fn default() -> Self {
        Self {
            min_turns: 4,
            max_turns: 16,
            customer_only: 0.0,
        }
    }
}

pub fn chats(n: usize, seed: u64) -> Vec<SyntheticChat> {
    chats_with(n, seed, ChatShape::default())
}

pub fn chats_with(n: usize, seed: u64, shape: ChatShape) -> Vec<SyntheticChat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let theme = rng.random_range(0..THEMES.len());
            let turns = rng.random_range(shape.min_turns..=shape.max_turns.max(shape.min_turns));
            let customer_only = rng.random_bool(shape.customer_only.clamp(0.0, 1.0));
            let cust = format!("cust{}", i % 7);
            let agent = format!("agent{}", i % 3);
            let mut utterances: Vec<(String, String)> = Vec::with_capacity(turns);
            for k in 0..turns {
                let (speaker, templates) = if customer_only || k % 2 == 0 {
                    (&cust, CUSTOMER_TEMPLATES)
                } else {
                    (&agent, AGENT_TEMPLATES)
                };
                utterances.push((speaker.clone(), turn(templates, &THEMES[theme], &mut rng)));
            }
            let roles = RoleMap::new().with(cust.clone(), Role::Customer).with(agent.clone(), Role::Agent);
            SyntheticChat {
                transcript: ChatTranscript::from_turns(format!("chat-{seed}-{i:05}"), utterances),
                roles,
                theme,
            }
        })
        .collect()
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

/// Word vectors for every theme word and template word. Theme words sit at
/// `centroid + spread * noise`; everything else is an independent Gaussian.
pub fn word_vectors(dim: usize, spread: f64, seed: u64) -> WordVectorStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<(String, Vec<f32>)> = Vec::new();
    for theme in THEMES {
        let centroid = gaussian(&mut rng, dim);
        for w in theme.words {
            let noise = gaussian(&mut rng, dim);
            let v = centroid.iter().zip(&noise).map(|(c, e)| (c + spread * e) as f32).collect();
            rows.push((String::from(*w), v));
        }
    }
    let mut others: Vec<&str> = FILLER.to_vec();
    for t in CUSTOMER_TEMPLATES.iter().chain(AGENT_TEMPLATES) {
        others.extend(
            t.split(|c: char| !c.is_alphanumeric())
                .filter(|w| !w.is_empty() && *w != "a" && *w != "b"),
        );
    }
    others.sort_unstable();
    others.dedup();
    for w in others {
        if THEMES.iter().any(|t| t.words.contains(&w)) {
            continue;
        }
        let v = gaussian(&mut rng, dim).into_iter().map(|x| x as f32).collect();
        rows.push((String::from(w), v));
    }
    WordVectorStore::from_rows(rows)
        .map(|p| p.store)
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::cosine;

    #[test]
    fn chats_are_seeded() {
        let a = chats(5, 7);
        let b = chats(5, 7);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.transcript, y.transcript);
        }
        assert_ne!(a[0].transcript, chats(5, 8)[0].transcript);
        assert!(a.iter().all(|c| c.transcript.utterances.len() >= 4));
    }

    #[test]
    fn theme_words_cluster() {
        let s = word_vectors(50, 0.3, 1);
        let same = cosine(s.get("router").unwrap(), s.get("modem").unwrap()).unwrap();
        let other = cosine(s.get("router").unwrap(), s.get("invoice").unwrap()).unwrap();
        assert!(same > 0.7, "{same}");
        assert!(other.abs() < 0.5, "{other}");
        assert!(s.get("please").is_some());
    }
}
