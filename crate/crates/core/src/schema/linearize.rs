//! Input template:
//!
//! ```text
//! <task_token> <task_definition> [know] <knowledge_text> [dial] <speaker>: <text> [sep] <speaker>: <text>
//! ```
//!
//! The `[know]` segment is dropped when knowledge is `None`, the `[dial]`
//! segment when the history is empty.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::normalize::{DIAL_MARKER, KNOW_MARKER, SEP_MARKER};
use super::record::{TaskToken, Turn, UnifiedRecord};
use super::validate::{validate_record, ValidationReport};
use crate::knowledge::serialize_knowledge;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateConfig {
    /// Prefix each turn with `<speaker>: `.
    pub speaker_prefix: bool,
    /// Keep only the most recent N turns.
    pub max_history_turns: Option<usize>,
}

impl Default for TemplateConfig {
    fn default() -> Self {
        TemplateConfig {
            speaker_prefix: true,
            max_history_turns: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum LinearizeError {
    #[error("record failed validation: {0}")]
    Invalid(ValidationReport),
}

/// Joins turns as `<speaker>: <text>` separated by ` [sep] `.
pub fn dialogue_text(turns: &[Turn], speaker_prefix: bool) -> String {
    let sep = format!(" {SEP_MARKER} ");
    let mut out = String::new();
    for (i, turn) in turns.iter().enumerate() {
        if i > 0 {
            out.push_str(&sep);
        }
        if speaker_prefix {
            out.push_str(turn.speaker.as_str());
            out.push_str(": ");
        }
        out.push_str(&turn.text);
    }
    out
}

pub fn linearize_input(r: &UnifiedRecord, cfg: &TemplateConfig) -> Result<String, LinearizeError> {
    let report = validate_record(r);
    if !report.is_ok() {
        return Err(LinearizeError::Invalid(report));
    }
    let turns = match cfg.max_history_turns {
        Some(n) if n < r.dialogue.len() => &r.dialogue[r.dialogue.len() - n..],
        _ => &r.dialogue[..],
    };
    let mut out = String::with_capacity(128);
    out.push_str(&r.task.token());
    out.push(' ');
    out.push_str(&r.task_definition);
    if !r.knowledge.is_none() {
        out.push(' ');
        out.push_str(KNOW_MARKER);
        out.push(' ');
        out.push_str(&serialize_knowledge(&r.knowledge));
    }
    if !turns.is_empty() {
        out.push(' ');
        out.push_str(DIAL_MARKER);
        out.push(' ');
        out.push_str(&dialogue_text(turns, cfg.speaker_prefix));
    }
    Ok(out)
}

/// Segments recovered from a linearized input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delinearized {
    pub task: TaskToken,
    pub task_definition: String,
    pub knowledge: Option<String>,
    /// Raw turn strings, including the `speaker: ` prefix when present.
    pub turns: Vec<String>,
}

impl Delinearized {
    /// Splits each turn at its first `": "`; speaker names never contain a colon.
    pub fn speaker_turns(&self) -> Vec<(String, String)> {
        self.turns
            .iter()
            .map(|t| match t.split_once(": ") {
                Some((s, text)) => (s.to_string(), text.to_string()),
                None => (String::new(), t.clone()),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DelinearizeError {
    #[error("missing task token")]
    MissingTask,
    #[error("unknown task token `{0}`")]
    UnknownTask(String),
    #[error("malformed segments: {0}")]
    Malformed(&'static str),
}

/// Reference inverse of [`linearize_input`]; relies on segment markers never
/// appearing inside normalized payload text.
pub fn delinearize(s: &str) -> Result<Delinearized, DelinearizeError> {
    let (token, rest) = s.split_once(' ').ok_or(DelinearizeError::MissingTask)?;
    let task: TaskToken = token
        .parse()
        .map_err(|_| DelinearizeError::UnknownTask(token.to_string()))?;
    if !token.starts_with('[') {
        return Err(DelinearizeError::UnknownTask(token.to_string()));
    }
    let know = format!(" {KNOW_MARKER} ");
    let dial = format!(" {DIAL_MARKER} ");
    let sep = format!(" {SEP_MARKER} ");

    let (head, dialogue) = match rest.split_once(&dial) {
        Some((h, d)) => (h, Some(d)),
        None => (rest, None),
    };
    let (definition, knowledge) = match head.split_once(&know) {
        Some((d, k)) => (d, Some(k.to_string())),
        None => (head, None),
    };
    if definition.is_empty() {
        return Err(DelinearizeError::Malformed("empty task definition"));
    }
    let turns = match dialogue {
        Some(d) => d.split(&sep).map(str::to_string).collect(),
        None => Vec::new(),
    };
    Ok(Delinearized {
        task,
        task_definition: definition.to_string(),
        knowledge,
        turns,
    })
}
