//! Speaker-tagged dialog transcripts and customer/agent channel separation.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which side of the conversation a transcript holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Full,
    Customer,
    Agent,
}

impl ChannelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::Full => "full",
            ChannelKind::Customer => "customer",
            ChannelKind::Agent => "agent",
        }
    }
}

/// Role a speaker plays in a conversation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Customer,
    Agent,
}

impl Role {
    pub fn channel(self) -> ChannelKind {
        match self {
            Role::Customer => ChannelKind::Customer,
            Role::Agent => ChannelKind::Agent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Utterance {
    /// Position in the original conversation, 0-based.
    pub index: usize,
    pub speaker_id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatTranscript {
    pub id: String,
    pub utterances: Vec<Utterance>,
    pub channel_kind: ChannelKind,
}

impl ChatTranscript {
    /// Builds a full transcript from `(speaker, text)` turns, numbering them in order.
    pub fn from_turns<S, T>(id: impl Into<String>, turns: impl IntoIterator<Item = (S, T)>) -> Self
    where
        S: Into<String>,
        T: Into<String>,
    {
        let utterances = turns
            .into_iter()
            .enumerate()
            .map(|(index, (speaker, text))| Utterance {
                index,
                speaker_id: speaker.into(),
                text: text.into(),
            })
            .collect();
        Self {
            id: id.into(),
            utterances,
            channel_kind: ChannelKind::Full,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }

    /// Number of whitespace-separated words over all utterances.
    pub fn word_count(&self) -> usize {
        self.utterances
            .iter()
            .map(|u| u.text.split_whitespace().count())
            .sum()
    }

    /// Utterances joined into one string, inserting a period between turns
    /// unless the previous turn already ends in terminal punctuation.
    pub fn channel_text(&self) -> String {
        join_turns(self.utterances.iter().map(|u| u.text.as_str()))
    }
}

pub(crate) fn join_turns<'a>(turns: impl Iterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for text in turns {
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        if !out.is_empty() {
            if !out.ends_with(is_terminal) {
                out.push('.');
            }
            out.push(' ');
        }
        out.push_str(text);
    }
    out
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '?' | '!')
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
}

/// Explicit speaker → role assignment. Every speaker in a transcript must be listed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleMap {
    roles: BTreeMap<String, Role>,
}

impl RoleMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, speaker: impl Into<String>, role: Role) -> Option<Role> {
        self.roles.insert(speaker.into(), role)
    }

    pub fn with(mut self, speaker: impl Into<String>, role: Role) -> Self {
        self.insert(speaker, role);
        self
    }

    pub fn get(&self, speaker: &str) -> Option<Role> {
        self.roles.get(speaker).copied()
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Role)> {
        self.roles.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl FromIterator<(String, Role)> for RoleMap {
    fn from_iter<I: IntoIterator<Item = (String, Role)>>(iter: I) -> Self {
        Self {
            roles: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranscriptError {
    #[error("speaker `{0}` is not present in the role map")]
    UnknownSpeaker(String),
}

/// Splits a transcript into its customer and agent channels.
///
/// Every utterance lands in exactly one output and keeps its original index,
/// so relative order is preserved. All non-customer speakers share the agent channel.
pub fn separate_channels(
    t: &ChatTranscript,
    role_map: &RoleMap,
) -> Result<(ChatTranscript, ChatTranscript), TranscriptError> {
    let mut customer = Vec::new();
    let mut agent = Vec::new();
    for u in &t.utterances {
        match role_map.get(&u.speaker_id) {
            Some(Role::Customer) => customer.push(u.clone()),
            Some(Role::Agent) => agent.push(u.clone()),
            None => return Err(TranscriptError::UnknownSpeaker(u.speaker_id.clone())),
        }
    }
    let build = |utterances, channel_kind| ChatTranscript {
        id: t.id.clone(),
        utterances,
        channel_kind,
    };
    Ok((
        build(customer, ChannelKind::Customer),
        build(agent, ChannelKind::Agent),
    ))
}

/// Splits period-delimited text at `.`, `?` and `!`, keeping the delimiter on
/// each sentence. A run of delimiters terminates a single sentence.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        current.push(c);
        if is_terminal(c) {
            while let Some(&next) = chars.peek() {
                if !is_terminal(next) {
                    break;
                }
                current.push(next);
                chars.next();
            }
            push_sentence(&mut out, &current);
            current.clear();
        }
    }
    push_sentence(&mut out, &current);
    out
}

fn push_sentence(out: &mut Vec<Sentence>, raw: &str) {
    let trimmed = raw.trim();
    if trimmed.is_empty() || trimmed.chars().all(is_terminal) {
        return;
    }
    out.push(Sentence {
        index: out.len(),
        text: trimmed.to_string(),
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn roles() -> RoleMap {
        RoleMap::new()
            .with("C", Role::Customer)
            .with("A", Role::Agent)
    }

    #[test]
    fn alg1_trace() {
        let t = ChatTranscript::from_turns(
            "t1",
            [("C", "hi"), ("A", "hello"), ("C", "bill is wrong")],
        );
        let (c, a) = separate_channels(&t, &roles()).unwrap();
        assert_eq!(c.channel_text(), "hi. bill is wrong");
        assert_eq!(a.channel_text(), "hello");
        assert_eq!(c.channel_kind, ChannelKind::Customer);
        assert_eq!(a.channel_kind, ChannelKind::Agent);
    }

    #[test]
    fn no_double_period() {
        let t = ChatTranscript::from_turns("t", [("C", "hi."), ("C", "why?"), ("C", "ok")]);
        assert_eq!(t.channel_text(), "hi. why? ok");
    }

    #[test]
    fn all_customer() {
        let t = ChatTranscript::from_turns("t", [("C", "a"), ("C", "b")]);
        let (c, a) = separate_channels(&t, &roles()).unwrap();
        assert_eq!(c.utterances.len(), 2);
        assert!(a.utterances.is_empty());
        // already separated: unchanged on the customer side
        let (c2, a2) = separate_channels(&c, &roles()).unwrap();
        assert_eq!(c2, c);
        assert!(a2.is_empty());
    }

    #[test]
    fn alternating() {
        let t = ChatTranscript::from_turns("t", [("C", "1"), ("A", "2"), ("C", "3"), ("A", "4")]);
        let (c, a) = separate_channels(&t, &roles()).unwrap();
        let ci: Vec<_> = c.utterances.iter().map(|u| u.index).collect();
        let ai: Vec<_> = a.utterances.iter().map(|u| u.index).collect();
        assert_eq!(ci, vec![0, 2]);
        assert_eq!(ai, vec![1, 3]);
    }

    #[test]
    fn unknown_speaker() {
        let t = ChatTranscript::from_turns("t", [("C", "hi"), ("bot", "beep")]);
        assert_eq!(
            separate_channels(&t, &roles()),
            Err(TranscriptError::UnknownSpeaker("bot".into()))
        );
    }

    #[test]
    fn sentences() {
        let s = split_sentences("a b. c d.");
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].text, "a b.");
        assert_eq!(s[1].text, "c d.");
        assert_eq!(s[1].index, 1);
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("   ").is_empty());
        let s = split_sentences("no delimiter at end");
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].text, "no delimiter at end");
    }

    #[test]
    fn sentences_mixed_delimiters() {
        let texts: Vec<_> = split_sentences("Is it? Yes!! done. . tail")
            .into_iter()
            .map(|s| s.text)
            .collect();
        assert_eq!(texts, vec!["Is it?", "Yes!!", "done.", "tail"]);
    }

    #[test]
    fn ten_sentence_fixture() {
        // segmented by hand
        let text = "my internet is down. it dropped last night. i restarted the router. \
                    nothing changed. can you check the line? the lights are blinking. \
                    i work from home. this is urgent. please send a technician. thanks";
        let expected = [
            "my internet is down.",
            "it dropped last night.",
            "i restarted the router.",
            "nothing changed.",
            "can you check the line?",
            "the lights are blinking.",
            "i work from home.",
            "this is urgent.",
            "please send a technician.",
            "thanks",
        ];
        let got: Vec<_> = split_sentences(text).into_iter().map(|s| s.text).collect();
        assert_eq!(got, expected);
    }
}
