//! Transcript, role map, word list and word vector file formats.

use std::fs;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use chatsumm_core::embeddings::{EmbeddingError, WordVectorStore};
use chatsumm_core::transcript::{ChatTranscript, Role, RoleMap};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("input contains no records")]
    EmptyInput,
    #[error("cannot read {path}: {source}")]
    FileUnreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("read failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("{path}: no valid vector rows")]
    NoValidRows { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtteranceRecord {
    pub speaker: String,
    pub text: String,
}

/// One line of the transcript input format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub id: String,
    pub utterances: Vec<UtteranceRecord>,
}

impl TranscriptRecord {
    pub fn into_transcript(self) -> ChatTranscript {
        ChatTranscript::from_turns(self.id, self.utterances.into_iter().map(|u| (u.speaker, u.text)))
    }

    pub fn from_transcript(t: &ChatTranscript) -> Self {
        Self {
            id: t.id.clone(),
            utterances: t
                .utterances
                .iter()
                .map(|u| UtteranceRecord {
                    speaker: u.speaker_id.clone(),
                    text: u.text.clone(),
                })
                .collect(),
        }
    }
}

/// Reads line-delimited transcript records. Blank lines are skipped.
pub fn parse_transcripts(reader: impl BufRead) -> Result<Vec<ChatTranscript>, IngestError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TranscriptRecord = serde_json::from_str(&line).map_err(|e| IngestError::MalformedRecord {
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(record.into_transcript());
    }
    if out.is_empty() {
        return Err(IngestError::EmptyInput);
    }
    Ok(out)
}

pub fn read_transcripts(path: &Path) -> Result<Vec<ChatTranscript>, IngestError> {
    let file = fs::File::open(path).map_err(|source| IngestError::FileUnreadable {
        path: path.to_owned(),
        source,
    })?;
    parse_transcripts(std::io::BufReader::new(file))
}

pub fn write_transcripts(path: &Path, ts: &[ChatTranscript]) -> std::io::Result<()> {
    let mut text = String::new();
    for t in ts {
        text.push_str(&serde_json::to_string(&TranscriptRecord::from_transcript(t)).expect("records serialize"));
        text.push('\n');
    }
    fs::write(path, text)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RoleMapError {
    #[error("line {line}: expected `speaker=customer|agent`")]
    BadLine { line: usize },
}

fn parse_role(s: &str) -> Option<Role> {
    match s.trim().to_ascii_lowercase().as_str() {
        "customer" => Some(Role::Customer),
        "agent" => Some(Role::Agent),
        _ => None,
    }
}

/// Parses `speaker_id=customer|agent` lines; `#` starts a comment.
pub fn parse_role_map(text: &str) -> Result<RoleMap, RoleMapError> {
    let mut map = RoleMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (speaker, role) = line.split_once('=').ok_or(RoleMapError::BadLine { line: i + 1 })?;
        let role = parse_role(role).ok_or(RoleMapError::BadLine { line: i + 1 })?;
        map.insert(speaker.trim(), role);
    }
    Ok(map)
}

/// Speaker-name rule used when no role file is given: ids starting with
/// `prefix` are agents, everyone else is a customer.
pub fn roles_by_prefix<'a>(transcripts: impl IntoIterator<Item = &'a ChatTranscript>, prefix: &str) -> RoleMap {
    let mut map = RoleMap::new();
    for t in transcripts {
        for u in &t.utterances {
            let role = if u.speaker_id.starts_with(prefix) { Role::Agent } else { Role::Customer };
            map.insert(u.speaker_id.clone(), role);
        }
    }
    map
}

/// One entry per line, blank lines and `#` comments ignored.
pub fn read_word_list(path: &Path) -> Result<Vec<String>, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::FileUnreadable {
        path: path.to_owned(),
        source,
    })?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

/// Contraction table lines: `contraction expansion words`, split at the first whitespace or tab.
pub fn read_contractions(path: &Path) -> Result<Vec<(String, String)>, IngestError> {
    Ok(read_word_list(path)?
        .into_iter()
        .filter_map(|l| {
            let (k, v) = l.split_once(|c: char| c.is_whitespace())?;
            Some((k.to_string(), v.trim().to_string()))
        })
        .collect())
}

#[derive(Debug)]
pub struct LoadedVectors {
    pub store: WordVectorStore,
    /// Rows rejected for a dimension different from the first row's.
    pub skipped: usize,
}

pub fn load_vectors(path: &Path) -> Result<LoadedVectors, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::FileUnreadable {
        path: path.to_owned(),
        source,
    })?;
    match WordVectorStore::parse(&text) {
        Ok(p) => Ok(LoadedVectors {
            store: p.store,
            skipped: p.skipped,
        }),
        Err(EmbeddingError::NoValidRows) | Err(EmbeddingError::DimensionMismatch { .. }) => {
            Err(IngestError::NoValidRows { path: path.to_owned() })
        }
    }
}

pub fn write_vectors(path: &Path, store: &WordVectorStore) -> std::io::Result<()> {
    let mut text = String::new();
    for (tok, v) in store.iter() {
        text.push_str(tok);
        for x in v {
            text.push(' ');
            text.push_str(&x.to_string());
        }
        text.push('\n');
    }
    fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chatsumm_core::transcript::ChannelKind;

    #[test]
    fn records_keep_utterance_order() {
        let input = r#"{"id":"a","utterances":[{"speaker":"c1","text":"hi"},{"speaker":"a1","text":"hello"}]}"#;
        let ts = parse_transcripts(input.as_bytes()).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].utterances[0].index, 0);
        assert_eq!(ts[0].utterances[1].index, 1);
        assert_eq!(ts[0].utterances[1].text, "hello");
        assert_eq!(ts[0].channel_kind, ChannelKind::Full);
    }

    #[test]
    fn empty_and_malformed_inputs() {
        assert!(matches!(parse_transcripts("".as_bytes()), Err(IngestError::EmptyInput)));
        assert!(matches!(parse_transcripts("\n  \n".as_bytes()), Err(IngestError::EmptyInput)));
        let bad = "{\"id\":\"a\",\"utterances\":[]}\n{\"id\":\"b\",\"utterances\":[{\"text\":\"no speaker\"}]}\n";
        match parse_transcripts(bad.as_bytes()) {
            Err(IngestError::MalformedRecord { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn role_map_lines() {
        let m = parse_role_map("# roles\nc1=customer\na1 = Agent\n\n").unwrap();
        assert_eq!(m.get("c1"), Some(Role::Customer));
        assert_eq!(m.get("a1"), Some(Role::Agent));
        assert_eq!(parse_role_map("c1:customer"), Err(RoleMapError::BadLine { line: 1 }));
        assert_eq!(parse_role_map("c1=boss"), Err(RoleMapError::BadLine { line: 1 }));
    }

    #[test]
    fn vector_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.txt");
        fs::write(&p, "a 1 0 0 0\nb 0 1 0 0\nbad 1 2\nc 0 0 1 0\n").unwrap();
        let v = load_vectors(&p).unwrap();
        assert_eq!((v.store.dim(), v.store.len(), v.skipped), (4, 3, 1));
        let q = dir.path().join("w.txt");
        write_vectors(&q, &v.store).unwrap();
        assert_eq!(load_vectors(&q).unwrap().store, v.store);
        assert!(matches!(load_vectors(&dir.path().join("missing")), Err(IngestError::FileUnreadable { .. })));
        fs::write(&p, "\n\n").unwrap();
        assert!(matches!(load_vectors(&p), Err(IngestError::NoValidRows { .. })));
    }
}
