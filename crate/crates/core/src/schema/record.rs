use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Task identification token. Rendered lowercase and bracket-delimited, e.g. `[dst]`.
///
/// The first fifteen variants are the supervised task families; `Reo` and `Clo`
/// are the two self-supervised denoising tasks. Declaration order is the
/// canonical task order used for tie-breaking and default scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskToken {
    Rew,
    Nlg,
    Sum,
    Fill,
    Intent,
    Dst,
    Comm,
    Emo,
    DocQa,
    DialQa,
    Chat,
    KgDial,
    Txt2Sql,
    Sim,
    Tod,
    Reo,
    Clo,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown task token `{0}`")]
pub struct UnknownTask(pub String);

impl TaskToken {
    pub const ALL: [TaskToken; 17] = [
        TaskToken::Rew,
        TaskToken::Nlg,
        TaskToken::Sum,
        TaskToken::Fill,
        TaskToken::Intent,
        TaskToken::Dst,
        TaskToken::Comm,
        TaskToken::Emo,
        TaskToken::DocQa,
        TaskToken::DialQa,
        TaskToken::Chat,
        TaskToken::KgDial,
        TaskToken::Txt2Sql,
        TaskToken::Sim,
        TaskToken::Tod,
        TaskToken::Reo,
        TaskToken::Clo,
    ];

    /// Bare lowercase name, as used in JSONL (`"dst"`).
    pub fn name(self) -> &'static str {
        match self {
            TaskToken::Rew => "rew",
            TaskToken::Nlg => "nlg",
            TaskToken::Sum => "sum",
            TaskToken::Fill => "fill",
            TaskToken::Intent => "intent",
            TaskToken::Dst => "dst",
            TaskToken::Comm => "comm",
            TaskToken::Emo => "emo",
            TaskToken::DocQa => "docqa",
            TaskToken::DialQa => "dialqa",
            TaskToken::Chat => "chat",
            TaskToken::KgDial => "kgdial",
            TaskToken::Txt2Sql => "txt2sql",
            TaskToken::Sim => "sim",
            TaskToken::Tod => "tod",
            TaskToken::Reo => "reo",
            TaskToken::Clo => "clo",
        }
    }

    /// Bracketed token as it appears at the head of a linearized input.
    pub fn token(self) -> String {
        format!("[{}]", self.name())
    }

    pub fn is_supervised(self) -> bool {
        !matches!(self, TaskToken::Reo | TaskToken::Clo)
    }

    pub fn supervised() -> impl Iterator<Item = TaskToken> {
        Self::ALL.into_iter().filter(|t| t.is_supervised())
    }
}

impl fmt::Display for TaskToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.name())
    }
}

impl FromStr for TaskToken {
    type Err = UnknownTask;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bare = s
            .strip_prefix('[')
            .and_then(|x| x.strip_suffix(']'))
            .unwrap_or(s);
        TaskToken::ALL
            .into_iter()
            .find(|t| t.name() == bare)
            .ok_or_else(|| UnknownTask(s.to_string()))
    }
}

impl Serialize for TaskToken {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for TaskToken {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Speaker {
    User,
    System,
    Other(String),
}

impl Speaker {
    pub fn from_name(name: &str) -> Self {
        match name {
            "user" => Speaker::User,
            "system" => Speaker::System,
            other => Speaker::Other(other.to_string()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            Speaker::User => "user",
            Speaker::System => "system",
            Speaker::Other(name) => name,
        }
    }
}

impl fmt::Display for Speaker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Speaker {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Speaker {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Speaker::from_name(&String::deserialize(d)?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: Speaker,
    pub text: String,
}

impl Turn {
    pub fn new(speaker: Speaker, text: impl Into<String>) -> Self {
        Turn {
            speaker,
            text: text.into(),
        }
    }

    pub fn user(text: impl Into<String>) -> Self {
        Self::new(Speaker::User, text)
    }

    pub fn system(text: impl Into<String>) -> Self {
        Self::new(Speaker::System, text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "dev" | "validation" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}` (expected train, dev or test)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "(String, String, String)", into = "(String, String, String)")]
pub struct Triple {
    pub head: String,
    pub relation: String,
    pub tail: String,
}

impl Triple {
    pub fn new(head: impl Into<String>, relation: impl Into<String>, tail: impl Into<String>) -> Self {
        Triple {
            head: head.into(),
            relation: relation.into(),
            tail: tail.into(),
        }
    }
}

impl From<(String, String, String)> for Triple {
    fn from((head, relation, tail): (String, String, String)) -> Self {
        Triple { head, relation, tail }
    }
}

impl From<Triple> for (String, String, String) {
    fn from(t: Triple) -> Self {
        (t.head, t.relation, t.tail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StructuredKnowledge {
    Schema(Vec<Table>),
    Triples(Vec<Triple>),
}

/// External knowledge attached to a record.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "KnowledgeWire", into = "KnowledgeWire")]
pub enum KnowledgeForm {
    None,
    Unstructured(String),
    SemiStructured(Vec<(String, String)>),
    Structured(StructuredKnowledge),
}

/// Coarse knowledge category, one per column value of the task format matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KnowledgeKind {
    None,
    Unstructured,
    SemiStructured,
    Structured,
}

impl fmt::Display for KnowledgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KnowledgeKind::None => "none",
            KnowledgeKind::Unstructured => "unstructured text",
            KnowledgeKind::SemiStructured => "semi-structured description",
            KnowledgeKind::Structured => "structured knowledge",
        })
    }
}

impl KnowledgeForm {
    pub fn kind(&self) -> KnowledgeKind {
        match self {
            KnowledgeForm::None => KnowledgeKind::None,
            KnowledgeForm::Unstructured(_) => KnowledgeKind::Unstructured,
            KnowledgeForm::SemiStructured(_) => KnowledgeKind::SemiStructured,
            KnowledgeForm::Structured(_) => KnowledgeKind::Structured,
        }
    }

    /// Wire name of the variant (`none`, `text`, `pairs`, `schema`, `triples`).
    pub fn wire_kind(&self) -> &'static str {
        match self {
            KnowledgeForm::None => "none",
            KnowledgeForm::Unstructured(_) => "text",
            KnowledgeForm::SemiStructured(_) => "pairs",
            KnowledgeForm::Structured(StructuredKnowledge::Schema(_)) => "schema",
            KnowledgeForm::Structured(StructuredKnowledge::Triples(_)) => "triples",
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, KnowledgeForm::None)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "lowercase")]
enum KnowledgeWire {
    None(()),
    Text(String),
    Pairs(Vec<(String, String)>),
    Schema(Vec<Table>),
    Triples(Vec<Triple>),
}

impl From<KnowledgeWire> for KnowledgeForm {
    fn from(w: KnowledgeWire) -> Self {
        match w {
            KnowledgeWire::None(()) => KnowledgeForm::None,
            KnowledgeWire::Text(t) => KnowledgeForm::Unstructured(t),
            KnowledgeWire::Pairs(p) => KnowledgeForm::SemiStructured(p),
            KnowledgeWire::Schema(s) => KnowledgeForm::Structured(StructuredKnowledge::Schema(s)),
            KnowledgeWire::Triples(t) => KnowledgeForm::Structured(StructuredKnowledge::Triples(t)),
        }
    }
}

impl From<KnowledgeForm> for KnowledgeWire {
    fn from(k: KnowledgeForm) -> Self {
        match k {
            KnowledgeForm::None => KnowledgeWire::None(()),
            KnowledgeForm::Unstructured(t) => KnowledgeWire::Text(t),
            KnowledgeForm::SemiStructured(p) => KnowledgeWire::Pairs(p),
            KnowledgeForm::Structured(StructuredKnowledge::Schema(s)) => KnowledgeWire::Schema(s),
            KnowledgeForm::Structured(StructuredKnowledge::Triples(t)) => KnowledgeWire::Triples(t),
        }
    }
}

/// One text-to-text training example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnifiedRecord {
    pub task: TaskToken,
    pub dataset: String,
    pub split: Split,
    pub dialogue: Vec<Turn>,
    pub knowledge: KnowledgeForm,
    pub task_definition: String,
    pub target: String,
    #[serde(default)]
    pub meta: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Error)]
pub enum RecordParseError {
    #[error(transparent)]
    UnknownTask(#[from] UnknownTask),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl UnifiedRecord {
    /// Parses one unified JSONL line. An unrecognized `task` value is reported
    /// as [`RecordParseError::UnknownTask`] rather than a generic JSON error.
    pub fn from_json_line(line: &str) -> Result<Self, RecordParseError> {
        match serde_json::from_str::<UnifiedRecord>(line) {
            Ok(r) => Ok(r),
            Err(e) => {
                if let Ok(serde_json::Value::Object(obj)) = serde_json::from_str::<serde_json::Value>(line) {
                    if let Some(serde_json::Value::String(task)) = obj.get("task") {
                        task.parse::<TaskToken>()?;
                    }
                }
                Err(RecordParseError::Json(e))
            }
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("UnifiedRecord serialization is infallible")
    }
}
