//! Allocation-only core of a hybrid chat transcript summarizer.
//!
//! Everything here is pure computation over in-memory values: channel
//! separation, document preparation, topic models, punctuation restoration,
//! sentence selection, evaluation metrics and contextual bandit routing.
//! File formats, network clients and the command line live in the `chatsumm` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod arms;
pub mod bandit;
pub mod embeddings;
pub mod extractive;
pub mod metrics;
pub mod preprocess;
pub mod punctuation;
pub mod synthetic;
pub mod transcript;
pub mod topics;

mod linalg;
