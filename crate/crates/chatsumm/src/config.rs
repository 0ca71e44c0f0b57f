//! Run configuration: JSON file, `CHATSUMM_` environment overrides, and the config hash.

use std::path::{Path, PathBuf};

use chatsumm_core::bandit::{PolicyConfig, PolicyKind, RunOptions};
use chatsumm_core::extractive::SummarizerConfig;
use chatsumm_core::preprocess::PreprocessConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const ENV_PREFIX: &str = "CHATSUMM_";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("{field}: path {path} does not exist")]
    MissingPath { field: &'static str, path: PathBuf },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResourcePaths {
    /// Word vector text file; synthetic vectors are generated when absent.
    pub vectors: Option<PathBuf>,
    pub stop_words: Option<PathBuf>,
    pub extra_stop_words: Option<PathBuf>,
    pub contractions: Option<PathBuf>,
    /// `speaker=customer|agent` lines.
    pub role_map: Option<PathBuf>,
    /// Previously fitted channel models to reuse.
    pub models: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArmEndpoint {
    pub name: String,
    pub url: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Endpoints {
    pub punctuator: Option<String>,
    pub encoder: Option<String>,
    pub arms: Vec<ArmEndpoint>,
    pub timeout_ms: u64,
    pub retries: u32,
    pub encoder_parallelism: usize,
}

impl Default for Endpoints {
    fn default() -> Self {
        Self {
            punctuator: None,
            encoder: None,
            arms: Vec::new(),
            timeout_ms: 10_000,
            retries: 2,
            encoder_parallelism: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BanditSettings {
    pub policies: Vec<PolicyKind>,
    pub run: RunOptions,
    /// Hyperparameters shared by every policy; `kind` and `seed` are set per run.
    pub policy: PolicyConfig,
}

impl Default for BanditSettings {
    fn default() -> Self {
        Self {
            policies: PolicyKind::ALL.to_vec(),
            run: RunOptions::default(),
            policy: PolicyConfig::default(),
        }
    }
}

impl BanditSettings {
    pub fn policy_for(&self, kind: PolicyKind, seed: u64) -> PolicyConfig {
        PolicyConfig {
            kind,
            ..self.policy.clone()
        }
        .with_seed(seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub summarizer: SummarizerConfig,
    pub preprocess: PreprocessConfig,
    pub bandit: BanditSettings,
    pub resources: ResourcePaths,
    pub endpoints: Endpoints,
    pub seeds: Vec<u64>,
    /// Restore with the source punctuation instead of a predictor.
    pub oracle_punctuation: bool,
    /// Speaker ids with this prefix are agents when no role map is given.
    pub agent_prefix: String,
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    /// Skip records whose (transcript id, config hash) is already stored.
    pub dedup: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            summarizer: SummarizerConfig::default(),
            preprocess: PreprocessConfig::default(),
            bandit: BanditSettings::default(),
            resources: ResourcePaths::default(),
            endpoints: Endpoints::default(),
            seeds: vec![0],
            oracle_punctuation: false,
            agent_prefix: "agent".into(),
            output_dir: PathBuf::from("out"),
            threads: 0,
            dedup: true,
        }
    }
}

/// Parses an override value as JSON when possible, otherwise as a plain string.
fn override_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Applies `CHATSUMM_SECTION__FIELD=value` pairs: `__` separates nesting levels and
/// names are lowercased. Keys that do not exist in `doc` are rejected.
pub fn apply_overrides<'a>(
    doc: &mut Value,
    vars: impl IntoIterator<Item = (&'a str, &'a str)>,
) -> Result<(), ConfigError> {
    for (key, raw) in vars {
        let Some(rest) = key.strip_prefix(ENV_PREFIX) else {
            continue;
        };
        let path: Vec<String> = rest.split("__").map(str::to_ascii_lowercase).collect();
        let mut slot = &mut *doc;
        for part in &path {
            slot = slot
                .as_object_mut()
                .and_then(|o| o.get_mut(part))
                .ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
        }
        *slot = override_value(raw);
    }
    Ok(())
}

impl RunConfig {
    /// Defaults, then the optional JSON file, then environment overrides.
    pub fn load(path: Option<&Path>, env: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut doc = serde_json::to_value(RunConfig::default()).expect("config serializes");
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Unreadable {
                path: p.to_owned(),
                source,
            })?;
            let file: Value = serde_json::from_str(&text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
            // round-trip through the typed form so unknown file keys are rejected
            let typed: RunConfig = serde_json::from_value(file).map_err(|e| ConfigError::Invalid(e.to_string()))?;
            doc = serde_json::to_value(typed).expect("config serializes");
        }
        apply_overrides(&mut doc, env.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        let cfg: RunConfig = serde_json::from_value(doc).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.summarizer
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg)
    }

    pub fn from_env(path: Option<&Path>) -> Result<Self, ConfigError> {
        let env: Vec<(String, String)> = std::env::vars().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
        Self::load(path, &env)
    }

    /// Every configured resource file must exist.
    pub fn check_paths(&self) -> Result<(), ConfigError> {
        let r = &self.resources;
        let named = [
            ("resources.vectors", &r.vectors),
            ("resources.stop_words", &r.stop_words),
            ("resources.extra_stop_words", &r.extra_stop_words),
            ("resources.contractions", &r.contractions),
            ("resources.role_map", &r.role_map),
            ("resources.models", &r.models),
        ];
        for (field, p) in named {
            if let Some(p) = p {
                if !p.exists() {
                    return Err(ConfigError::MissingPath { field, path: p.clone() });
                }
            }
        }
        Ok(())
    }

    /// SHA-256 over every setting that can change results; output location and
    /// thread count are excluded.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(o) = v.as_object_mut() {
            o.remove("output_dir");
            o.remove("threads");
            o.remove("dedup");
        }
        // serde_json maps are ordered by key, so this encoding is canonical
        let bytes = serde_json::to_vec(&v).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn short_hash(&self) -> String {
        self.hash()[..12].to_string()
    }

    /// Short hash of the config together with run inputs given outside it, such as arm specs.
    pub fn derived_short_hash(&self, extra: &[String]) -> String {
        let mut h = Sha256::new();
        h.update(self.hash());
        for e in extra {
            h.update([0]);
            h.update(e.as_bytes());
        }
        hex::encode(h.finalize())[..12].to_string()
    }
}
