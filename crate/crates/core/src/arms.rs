//! Summarizer arms the bandit routes between.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bandit::{BanditItem, Context, NUMERIC_FEATURES};
use crate::extractive::{summarize_extractive, ChannelModels, Resources, SourceTranscript, SummarizerConfig};
use crate::transcript::{ChannelKind, Role, RoleMap};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArmError {
    #[error("arm timed out")]
    Timeout,
    #[error("arm protocol error: {0}")]
    Protocol(String),
    #[error("arm failed: {0}")]
    Failed(String),
}

#[derive(Debug, Clone, Copy)]
pub struct ArmRequest<'a> {
    /// Position of the item in the run's input list.
    pub item_index: usize,
    pub item: &'a BanditItem,
    pub context: &'a Context,
    pub max_sentences: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArmOutput {
    /// A reward in `[0, 1]`, used as is.
    Reward(f64),
    /// A summary, scored against the item's reference.
    Text(String),
}

pub trait Arm {
    fn name(&self) -> &str;
    fn summarize(&self, req: &ArmRequest<'_>) -> Result<ArmOutput, ArmError>;
}

impl<A: Arm + ?Sized> Arm for &A {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn summarize(&self, req: &ArmRequest<'_>) -> Result<ArmOutput, ArmError> {
        (**self).summarize(req)
    }
}

/// Adds `delta` to the expected reward when a raw feature exceeds `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepEffect {
    pub feature: usize,
    pub threshold: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulatedMode {
    #[default]
    Reward,
    /// Emit a degraded copy of the reference whose ROUGE-L F1 is near the reward.
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedArmSpec {
    pub name: String,
    pub base_mean: f64,
    /// Weights on the raw numeric features.
    #[serde(default)]
    pub coefficients: [f64; NUMERIC_FEATURES],
    #[serde(default)]
    pub step: Option<StepEffect>,
    pub noise_sd: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: SimulatedMode,
}

impl SimulatedArmSpec {
    pub fn constant(name: impl Into<String>, mean: f64, noise_sd: f64, seed: u64) -> Self {
        Self {
            name: name.into(),
            base_mean: mean,
            coefficients: [0.0; NUMERIC_FEATURES],
            step: None,
            noise_sd,
            seed,
            mode: SimulatedMode::Reward,
        }
    }
}

/// Arm with a known reward function of the context plus Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedArm {
    pub spec: SimulatedArmSpec,
}

impl SimulatedArm {
    pub fn new(spec: SimulatedArmSpec) -> Self {
        Self { spec }
    }

    /// Noise-free reward for a context, clipped to `[0, 1]`.
    pub fn expected(&self, ctx: &Context) -> f64 {
        self.expected_raw(&ctx.raw.numeric())
    }

    pub fn expected_raw(&self, x: &[f64; NUMERIC_FEATURES]) -> f64 {
        let mut m = self.spec.base_mean;
        for (c, v) in self.spec.coefficients.iter().zip(x) {
            m += c * v;
        }
        if let Some(s) = self.spec.step {
            if x.get(s.feature).is_some_and(|&v| v > s.threshold) {
                m += s.delta;
            }
        }
        m.clamp(0.0, 1.0)
    }

    /// Noise depends only on the arm seed and the item, so replays agree.
    fn rng_for(&self, item_index: usize) -> ChaCha8Rng {
        let key = self.spec.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ item_index as u64;
        ChaCha8Rng::seed_from_u64(key)
    }

    pub fn reward(&self, ctx: &Context, item_index: usize) -> f64 {
        let mut rng = self.rng_for(item_index);
        self.noisy(ctx, &mut rng)
    }

    fn noisy(&self, ctx: &Context, rng: &mut ChaCha8Rng) -> f64 {
        let mean = self.expected(ctx);
        let noise = if self.spec.noise_sd > 0.0 {
            Normal::new(0.0, self.spec.noise_sd).map_or(0.0, |n| n.sample(rng))
        } else {
            0.0
        };
        (mean + noise).clamp(0.0, 1.0)
    }
}

impl Arm for SimulatedArm {
    fn name(&self) -> &str {
        &self.spec.name
    }

    fn summarize(&self, req: &ArmRequest<'_>) -> Result<ArmOutput, ArmError> {
        let mut rng = self.rng_for(req.item_index);
        let r = self.noisy(req.context, &mut rng);
        Ok(match self.spec.mode {
            SimulatedMode::Reward => ArmOutput::Reward(r),
            SimulatedMode::Text => {
                // keeping each token with probability q gives an LCS F1 of about 2q/(1+q)
                let q = r / (2.0 - r);
                let kept: Vec<&str> = req
                    .item
                    .reference
                    .split_whitespace()
                    .filter(|_| rng.random::<f64>() < q)
                    .collect();
                ArmOutput::Text(kept.join(" "))
            }
        })
    }
}

/// The extractive summarizer as an arm, using fixed channel models.
pub struct ExtractiveArm<'a> {
    pub name: String,
    pub config: SummarizerConfig,
    pub resources: Resources<'a>,
    pub models: &'a ChannelModels,
}

impl Arm for ExtractiveArm<'_> {
    fn name(&self) -> &str {
        &self.name
    }

    fn summarize(&self, req: &ArmRequest<'_>) -> Result<ArmOutput, ArmError> {
        let t = &req.item.transcript;
        let role = match req.item.channel {
            ChannelKind::Agent => Role::Agent,
            _ => Role::Customer,
        };
        let mut roles = RoleMap::new();
        for u in &t.utterances {
            roles.insert(u.speaker_id.clone(), role);
        }
        let mut cfg = self.config.clone();
        if req.max_sentences > 0 {
            cfg.summary_length = req.max_sentences;
        }
        let src = SourceTranscript { transcript: t, roles: &roles };
        let out = summarize_extractive(src, &cfg, &self.resources, Some(self.models))
            .map_err(|e| ArmError::Failed(alloc::string::ToString::to_string(&e)))?;
        Ok(ArmOutput::Text(out.channel(req.item.channel).summary.punctuated_text.clone()))
    }
}
