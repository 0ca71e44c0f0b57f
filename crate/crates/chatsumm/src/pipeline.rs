//! Parallel batch summarization over a rayon pool.

use std::time::Instant;

use chatsumm_core::extractive::{
    finish_transcript, prepare_documents, select_channel_models_with, separate_and_restore, BatchOutput,
    ChannelModels, ExtractiveError, PreparedTranscript, Resources, SourceTranscript, Step, StepClock,
    StepTimings, SummarizerConfig,
};
use chatsumm_core::preprocess::Corpus;
use chatsumm_core::topics::{finish_selection, Candidate, GridContext, TopicError, TopicSearch};
use rayon::prelude::*;

/// Monotonic nanoseconds since construction.
#[derive(Debug, Clone, Copy)]
pub struct StdClock {
    start: Instant,
}

impl Default for StdClock {
    fn default() -> Self {
        Self { start: Instant::now() }
    }
}

impl StepClock for StdClock {
    fn now_nanos(&self) -> u64 {
        self.start.elapsed().as_nanos() as u64
    }
}

pub fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
}

/// Grid search with every `(kind, K)` point fitted in parallel; same result as the sequential search.
pub fn select_model_parallel(corpus: &Corpus, search: &TopicSearch) -> Result<Candidate, TopicError> {
    let ctx = GridContext::new(corpus, search)?;
    let found: Vec<Option<Candidate>> = search
        .points()
        .into_par_iter()
        .map(|(kind, k)| ctx.evaluate(kind, k))
        .collect::<Result<_, _>>()?;
    finish_selection(&ctx, found.into_iter().flatten().collect())
}

fn timed<T>(clock: &dyn StepClock, timings: &mut StepTimings, step: Step, f: impl FnOnce() -> T) -> T {
    let t0 = clock.now_nanos();
    let out = f();
    timings.add(step, clock.now_nanos().saturating_sub(t0));
    out
}

/// Steps 1 to 9 over a batch, per-transcript work spread over `pool`.
/// Output order and content match the sequential core driver.
pub fn summarize_parallel(
    batch: &[SourceTranscript<'_>],
    cfg: &SummarizerConfig,
    res: &Resources<'_>,
    models: Option<&ChannelModels>,
    pool: &rayon::ThreadPool,
) -> Result<(BatchOutput, Vec<PreparedTranscript>), ExtractiveError> {
    cfg.validate()?;
    pool.install(|| {
        let mut prepared: Vec<PreparedTranscript> = batch
            .par_iter()
            .map(|&src| separate_and_restore(src, cfg, res))
            .collect::<Result<_, _>>()?;
        let mut timings = StepTimings::default();
        let phrases = timed(res.clock, &mut timings, Step::Prepare, || {
            prepare_documents(&mut prepared, res.preprocessor, models)
        });
        let models = match models {
            Some(m) => m.clone(),
            None => timed(res.clock, &mut timings, Step::SelectModel, || {
                select_channel_models_with(&prepared, phrases, cfg, select_model_parallel)
            })?,
        };
        let summaries: Vec<_> = prepared
            .par_iter()
            .map(|p| finish_transcript(p, &models, cfg, res))
            .collect::<Result<_, _>>()?;
        for s in &summaries {
            timings.merge(&s.timings);
        }
        Ok((
            BatchOutput {
                summaries,
                models,
                timings,
            },
            prepared,
        ))
    })
}
