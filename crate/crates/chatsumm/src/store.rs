//! Append-only JSONL summary table.

use std::collections::BTreeSet;
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use chatsumm_core::extractive::{ChannelSummary, TranscriptSummary};
use chatsumm_core::metrics::MetricScores;
use chatsumm_core::topics::DominantTopic;
use chatsumm_core::transcript::Sentence;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {reason}")]
    Corrupt { path: PathBuf, line: usize, reason: String },
    #[error("invalid table name `{0}`")]
    InvalidName(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRecord {
    pub sentences: Vec<Sentence>,
    pub term_string: String,
    pub punctuated_text: String,
    pub scores: Option<MetricScores>,
    pub dominant: Vec<DominantTopic>,
    pub channel_words: usize,
    pub document_words: usize,
    pub period_accuracy: Option<f64>,
}

impl From<&ChannelSummary> for ChannelRecord {
    fn from(c: &ChannelSummary) -> Self {
        Self {
            sentences: c.summary.sentences.clone(),
            term_string: c.summary.term_string.clone(),
            punctuated_text: c.summary.punctuated_text.clone(),
            scores: c.scores.clone(),
            dominant: c.dominant.entries.clone(),
            channel_words: c.channel_words,
            document_words: c.document_words,
            period_accuracy: c.period_accuracy,
        }
    }
}

/// One stored transcript. Step timings are run metadata and are not part of the record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub schema_version: u32,
    pub transcript_id: String,
    pub config_hash: String,
    pub full_words: usize,
    pub customer: ChannelRecord,
    pub agent: ChannelRecord,
    /// Seconds since the Unix epoch.
    pub written_at: u64,
}

impl SummaryRecord {
    pub fn new(s: &TranscriptSummary, config_hash: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            transcript_id: s.transcript_id.clone(),
            config_hash: config_hash.to_string(),
            full_words: s.full_words,
            customer: (&s.customer).into(),
            agent: (&s.agent).into(),
            written_at: 0,
        }
    }

    fn key(&self) -> (String, String) {
        (self.transcript_id.clone(), self.config_hash.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersistOutcome {
    pub path: PathBuf,
    pub written: usize,
    /// Records dropped because their (transcript id, config hash) was already stored.
    pub skipped: usize,
}

pub fn table_path(dir: &Path, table_name: &str) -> Result<PathBuf, StoreError> {
    let ok = !table_name.is_empty()
        && table_name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        && !table_name.starts_with('.');
    if !ok {
        return Err(StoreError::InvalidName(table_name.to_string()));
    }
    Ok(dir.join(format!("{table_name}.jsonl")))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Reads every record of a table file; a missing file reads as empty.
pub fn read_summaries(path: &Path) -> Result<Vec<SummaryRecord>, StoreError> {
    let file = match fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
            path: path.to_owned(),
            line: i + 1,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Appends `records` to `dir/<table_name>.jsonl`, stamping `written_at`.
/// With `dedup`, records whose key is already in the file (or earlier in
/// `records`) are skipped. Callers funnel all appends through this one function.
pub fn persist_summaries(
    dir: &Path,
    table_name: &str,
    records: &[SummaryRecord],
    dedup: bool,
) -> Result<PersistOutcome, StoreError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = table_path(dir, table_name)?;
    let mut seen: BTreeSet<(String, String)> = if dedup {
        read_summaries(&path)?.iter().map(SummaryRecord::key).collect()
    } else {
        BTreeSet::new()
    };
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut text = String::new();
    let mut written = 0;
    let mut skipped = 0;
    for r in records {
        if dedup && !seen.insert(r.key()) {
            skipped += 1;
            continue;
        }
        let mut r = r.clone();
        r.written_at = now;
        text.push_str(&serde_json::to_string(&r).expect("records serialize"));
        text.push('\n');
        written += 1;
    }
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(io_err(&path))?;
    file.write_all(text.as_bytes()).map_err(io_err(&path))?;
    file.flush().map_err(io_err(&path))?;
    Ok(PersistOutcome { path, written, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, hash: &str) -> SummaryRecord {
        let ch = ChannelRecord {
            sentences: vec![Sentence {
                index: 0,
                text: "my router is down.".into(),
            }],
            term_string: "router".into(),
            punctuated_text: "My router is down.".into(),
            scores: None,
            dominant: Vec::new(),
            channel_words: 4,
            document_words: 1,
            period_accuracy: Some(100.0),
        };
        SummaryRecord {
            schema_version: SCHEMA_VERSION,
            transcript_id: id.into(),
            config_hash: hash.into(),
            full_words: 8,
            customer: ch.clone(),
            agent: ch,
            written_at: 0,
        }
    }

    #[test]
    fn append_read_back_and_dedup() {
        let dir = tempfile::tempdir().unwrap();
        let recs = vec![record("a", "h"), record("b", "h"), record("c", "h")];
        let out = persist_summaries(dir.path(), "summary_results", &recs, true).unwrap();
        assert_eq!((out.written, out.skipped), (3, 0));
        assert_eq!(fs::read_to_string(&out.path).unwrap().lines().count(), 3);
        let back = read_summaries(&out.path).unwrap();
        let mut stamped = back.clone();
        for r in &mut stamped {
            r.written_at = 0;
        }
        assert_eq!(stamped, recs);

        let again = persist_summaries(dir.path(), "summary_results", &[record("a", "h"), record("a", "h2")], true).unwrap();
        assert_eq!((again.written, again.skipped), (1, 1));
        let dup = persist_summaries(dir.path(), "summary_results", &[record("a", "h")], false).unwrap();
        assert_eq!(dup.written, 1);
        assert_eq!(read_summaries(&out.path).unwrap().len(), 5);
    }

    #[test]
    fn bad_names_and_corrupt_lines() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(table_path(dir.path(), "../x"), Err(StoreError::InvalidName(_))));
        assert!(read_summaries(&dir.path().join("none.jsonl")).unwrap().is_empty());
        let p = dir.path().join("t.jsonl");
        fs::write(&p, "{}\n").unwrap();
        assert!(matches!(read_summaries(&p), Err(StoreError::Corrupt { line: 1, .. })));
    }
}
