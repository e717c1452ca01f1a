//! Dataset adapters: one per input geometry, each mapping a raw JSON line to
//! zero or more unified records.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::schema::normalize::normalize_text;
use crate::schema::{KnowledgeForm, Speaker, Split, StructuredKnowledge, Table, TaskToken, Turn, UnifiedRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdapterId {
    IntentLabel,
    SlotSpans,
    DstMultiwozLike,
    ChitchatTurns,
    SummaryPair,
    Text2sqlSpiderLike,
    PassthroughUnified,
}

impl AdapterId {
    pub const ALL: [AdapterId; 7] = [
        AdapterId::IntentLabel,
        AdapterId::SlotSpans,
        AdapterId::DstMultiwozLike,
        AdapterId::ChitchatTurns,
        AdapterId::SummaryPair,
        AdapterId::Text2sqlSpiderLike,
        AdapterId::PassthroughUnified,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AdapterId::IntentLabel => "intent_label",
            AdapterId::SlotSpans => "slot_spans",
            AdapterId::DstMultiwozLike => "dst_multiwoz_like",
            AdapterId::ChitchatTurns => "chitchat_turns",
            AdapterId::SummaryPair => "summary_pair",
            AdapterId::Text2sqlSpiderLike => "text2sql_spider_like",
            AdapterId::PassthroughUnified => "passthrough_unified",
        }
    }

    /// Task family produced by the adapter; `None` for passthrough, which keeps
    /// whatever task each record already carries.
    pub fn task(self) -> Option<TaskToken> {
        match self {
            AdapterId::IntentLabel => Some(TaskToken::Intent),
            AdapterId::SlotSpans => Some(TaskToken::Fill),
            AdapterId::DstMultiwozLike => Some(TaskToken::Dst),
            AdapterId::ChitchatTurns => Some(TaskToken::Chat),
            AdapterId::SummaryPair => Some(TaskToken::Sum),
            AdapterId::Text2sqlSpiderLike => Some(TaskToken::Txt2Sql),
            AdapterId::PassthroughUnified => None,
        }
    }
}

impl fmt::Display for AdapterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AdapterId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AdapterId::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown adapter `{s}`"))
    }
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub dataset: String,
    pub split: Split,
    pub task_definition: String,
    /// Abort on the first rejected line instead of counting it.
    pub strict: bool,
    /// Fixed knowledge attached by the intent, slot and DST adapters
    /// (label inventory, slot inventory, ontology).
    pub knowledge: KnowledgeForm,
    /// `db_id` → schema, for the text-to-SQL adapter.
    pub schemas: HashMap<String, Vec<Table>>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            dataset: "unnamed".into(),
            split: Split::Train,
            task_definition: String::new(),
            strict: false,
            knowledge: KnowledgeForm::None,
            schemas: HashMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConvertError {
    /// Not JSON, or JSON with an unusable value (bad offsets, wrong types).
    Malformed(String),
    /// Valid JSON whose shape does not fit the adapter.
    Mismatch(String),
}

type Converted = Result<Vec<UnifiedRecord>, ConvertError>;

fn mismatch(msg: impl Into<String>) -> ConvertError {
    ConvertError::Mismatch(msg.into())
}

fn str_field<'a>(obj: &'a serde_json::Map<String, Value>, key: &str) -> Result<&'a str, ConvertError> {
    match obj.get(key) {
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(mismatch(format!("field `{key}` is not a string"))),
        None => Err(mismatch(format!("missing field `{key}`"))),
    }
}

fn record(task: TaskToken, opts: &IngestOptions, dialogue: Vec<Turn>, knowledge: KnowledgeForm, target: &str) -> UnifiedRecord {
    UnifiedRecord {
        task,
        dataset: opts.dataset.clone(),
        split: opts.split,
        dialogue,
        knowledge,
        task_definition: opts.task_definition.clone(),
        target: target.to_string(),
        meta: Default::default(),
    }
    .normalized()
}

/// Renders `(slot, value)` pairs as a logical form, `none` when empty.
pub fn pairs_logical_form(pairs: &[(String, String)]) -> String {
    if pairs.is_empty() {
        return "none".to_string();
    }
    pairs
        .iter()
        .map(|(k, v)| format!("{k} = {v}"))
        .collect::<Vec<_>>()
        .join(" ; ")
}

/// Turns given either as `{speaker, text}` objects or as bare strings; bare
/// strings alternate user/system starting with the user.
fn parse_turns(v: &Value) -> Result<Vec<Turn>, ConvertError> {
    let arr = v.as_array().ok_or_else(|| mismatch("turns must be an array"))?;
    arr.iter()
        .enumerate()
        .map(|(i, t)| match t {
            Value::String(s) => Ok(Turn::new(
                if i % 2 == 0 { Speaker::User } else { Speaker::System },
                s.as_str(),
            )),
            Value::Object(o) => {
                let text = str_field(o, "text").or_else(|_| str_field(o, "utterance"))?;
                let speaker = o.get("speaker").and_then(Value::as_str).unwrap_or(if i % 2 == 0 { "user" } else { "system" });
                Ok(Turn::new(canonical_speaker(speaker), text))
            }
            _ => Err(mismatch(format!("turn {i} is neither a string nor an object"))),
        })
        .collect()
}

/// `USER`/`System`/`agent` style role names map onto the canonical roles; any
/// other speaker name is kept verbatim.
fn canonical_speaker(name: &str) -> Speaker {
    match name.to_lowercase().as_str() {
        "user" | "usr" | "customer" => Speaker::User,
        "system" | "sys" | "agent" | "assistant" => Speaker::System,
        _ => Speaker::from_name(name),
    }
}

/// `Name: text` lines, as used by summary corpora.
fn parse_transcript(s: &str) -> Vec<Turn> {
    s.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| match l.split_once(':') {
            Some((name, text)) if !name.trim().is_empty() && !text.trim().is_empty() => {
                Turn::new(canonical_speaker(name.trim()), text.trim())
            }
            _ => Turn::new(Speaker::Other("speaker".into()), l),
        })
        .collect()
}

fn intent_label(obj: &serde_json::Map<String, Value>, opts: &IngestOptions) -> Converted {
    let text = str_field(obj, "text")?;
    let label = str_field(obj, "label").or_else(|_| str_field(obj, "intent"))?;
    Ok(vec![record(
        TaskToken::Intent,
        opts,
        vec![Turn::user(text)],
        opts.knowledge.clone(),
        label,
    )])
}

fn slot_spans(obj: &serde_json::Map<String, Value>, opts: &IngestOptions) -> Converted {
    let text = str_field(obj, "text")?;
    let spans = obj
        .get("spans")
        .and_then(Value::as_array)
        .ok_or_else(|| mismatch("missing array field `spans`"))?;
    let chars: Vec<char> = text.chars().collect();
    let mut pairs = Vec::with_capacity(spans.len());
    for (i, s) in spans.iter().enumerate() {
        let o = s.as_object().ok_or_else(|| mismatch(format!("span {i} is not an object")))?;
        let slot = str_field(o, "slot")?;
        let start = o.get("start").and_then(Value::as_u64);
        let end = o.get("end").and_then(Value::as_u64);
        let (Some(start), Some(end)) = (start, end) else {
            return Err(mismatch(format!("span {i} lacks integer `start`/`end`")));
        };
        let (start, end) = (start as usize, end as usize);
        if start >= end || end > chars.len() {
            return Err(ConvertError::Malformed(format!(
                "span {i} ({start}..{end}) out of range for {} chars",
                chars.len()
            )));
        }
        let value: String = chars[start..end].iter().collect();
        pairs.push((normalize_text(slot), normalize_text(&value)));
    }
    let target = pairs_logical_form(&pairs);
    Ok(vec![record(TaskToken::Fill, opts, vec![Turn::user(text)], opts.knowledge.clone(), &target)])
}

fn belief_pairs(state: &Value) -> Result<Vec<(String, String)>, ConvertError> {
    let obj = state.as_object().ok_or_else(|| mismatch("`state` must be an object"))?;
    // serde_json maps iterate in sorted key order.
    obj.iter()
        .map(|(k, v)| {
            let value = match v {
                Value::String(s) => s.clone(),
                Value::Array(a) => a.iter().filter_map(Value::as_str).collect::<Vec<_>>().join("|"),
                other => other.to_string(),
            };
            Ok((normalize_text(k).to_lowercase(), normalize_text(&value).to_lowercase()))
        })
        .filter(|p: &Result<(String, String), ConvertError>| p.as_ref().map_or(true, |(_, v)| !v.is_empty() && v != "none"))
        .collect()
}

fn dst_multiwoz_like(obj: &serde_json::Map<String, Value>, opts: &IngestOptions) -> Converted {
    let raw_turns = obj
        .get("turns")
        .and_then(Value::as_array)
        .ok_or_else(|| mismatch("missing array field `turns`"))?;
    let turns = parse_turns(&Value::Array(raw_turns.clone()))?;
    let mut out = Vec::new();
    for (i, (turn, raw)) in turns.iter().zip(raw_turns).enumerate() {
        if turn.speaker != Speaker::User {
            continue;
        }
        let state = raw
            .get("state")
            .ok_or_else(|| mismatch(format!("user turn {i} has no `state`")))?;
        let target = pairs_logical_form(&belief_pairs(state)?);
        out.push(record(TaskToken::Dst, opts, turns[..=i].to_vec(), opts.knowledge.clone(), &target));
    }
    if out.is_empty() {
        return Err(mismatch("dialogue has no user turns"));
    }
    Ok(out)
}

fn chitchat_turns(obj: &serde_json::Map<String, Value>, opts: &IngestOptions) -> Converted {
    let turns = parse_turns(obj.get("turns").ok_or_else(|| mismatch("missing field `turns`"))?)?;
    let knowledge = match obj.get("persona").or_else(|| obj.get("knowledge")) {
        Some(Value::String(s)) => KnowledgeForm::Unstructured(s.clone()),
        Some(Value::Array(a)) => KnowledgeForm::Unstructured(
            a.iter().filter_map(Value::as_str).collect::<Vec<_>>().join(" "),
        ),
        Some(Value::Null) | None => KnowledgeForm::None,
        Some(_) => return Err(mismatch("`persona` must be a string or array of strings")),
    };
    let out: Vec<UnifiedRecord> = (1..turns.len())
        .filter(|&i| turns[i].speaker != Speaker::User)
        .map(|i| record(TaskToken::Chat, opts, turns[..i].to_vec(), knowledge.clone(), &turns[i].text))
        .collect();
    if out.is_empty() {
        return Err(mismatch("no response turn with preceding context"));
    }
    Ok(out)
}

fn summary_pair(obj: &serde_json::Map<String, Value>, opts: &IngestOptions) -> Converted {
    let summary = str_field(obj, "summary")?;
    let turns = match obj.get("dialogue") {
        Some(Value::String(s)) => parse_transcript(s),
        Some(v @ Value::Array(_)) => parse_turns(v)?,
        _ => return Err(mismatch("missing field `dialogue` (string or array)")),
    };
    if turns.is_empty() {
        return Err(mismatch("dialogue is empty"));
    }
    Ok(vec![record(TaskToken::Sum, opts, turns, KnowledgeForm::None, summary)])
}

fn text2sql(obj: &serde_json::Map<String, Value>, opts: &IngestOptions) -> Converted {
    let db = str_field(obj, "db_id")?;
    let tables = opts
        .schemas
        .get(db)
        .ok_or_else(|| mismatch(format!("unknown db_id `{db}`")))?;
    let knowledge = KnowledgeForm::Structured(StructuredKnowledge::Schema(tables.clone()));
    let steps: Vec<(String, String)> = if let Some(inter) = obj.get("interaction") {
        let arr = inter.as_array().ok_or_else(|| mismatch("`interaction` must be an array"))?;
        arr.iter()
            .enumerate()
            .map(|(i, s)| {
                let o = s.as_object().ok_or_else(|| mismatch(format!("interaction step {i} is not an object")))?;
                Ok((str_field(o, "utterance")?.to_string(), str_field(o, "query")?.to_string()))
            })
            .collect::<Result<_, ConvertError>>()?
    } else {
        vec![(str_field(obj, "question")?.to_string(), str_field(obj, "query")?.to_string())]
    };
    let mut history = Vec::new();
    let mut out = Vec::with_capacity(steps.len());
    for (utterance, query) in steps {
        history.push(Turn::user(utterance));
        out.push(record(TaskToken::Txt2Sql, opts, history.clone(), knowledge.clone(), &query));
    }
    if out.is_empty() {
        return Err(mismatch("interaction is empty"));
    }
    Ok(out)
}

/// Converts one raw line.
pub fn convert_line(adapter: AdapterId, line: &str, opts: &IngestOptions) -> Converted {
    if adapter == AdapterId::PassthroughUnified {
        return match UnifiedRecord::from_json_line(line) {
            Ok(r) => Ok(vec![r.normalized()]),
            Err(crate::schema::RecordParseError::UnknownTask(e)) => Err(mismatch(e.to_string())),
            Err(crate::schema::RecordParseError::Json(e)) if e.is_syntax() || e.is_eof() => {
                Err(ConvertError::Malformed(e.to_string()))
            }
            Err(crate::schema::RecordParseError::Json(e)) => Err(mismatch(e.to_string())),
        };
    }
    let value: Value = serde_json::from_str(line).map_err(|e| ConvertError::Malformed(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| mismatch("line is not a JSON object"))?;
    match adapter {
        AdapterId::IntentLabel => intent_label(obj, opts),
        AdapterId::SlotSpans => slot_spans(obj, opts),
        AdapterId::DstMultiwozLike => dst_multiwoz_like(obj, opts),
        AdapterId::ChitchatTurns => chitchat_turns(obj, opts),
        AdapterId::SummaryPair => summary_pair(obj, opts),
        AdapterId::Text2sqlSpiderLike => text2sql(obj, opts),
        AdapterId::PassthroughUnified => unreachable!(),
    }
}

/// Reads a Spider-style `tables.json` into `db_id` → schema.
pub fn load_spider_tables(json: &str) -> Result<HashMap<String, Vec<Table>>, String> {
    #[derive(Deserialize)]
    struct Db {
        db_id: String,
        #[serde(alias = "table_names")]
        table_names_original: Vec<String>,
        #[serde(alias = "column_names")]
        column_names_original: Vec<(i64, String)>,
    }
    let dbs: Vec<Db> = serde_json::from_str(json).map_err(|e| e.to_string())?;
    Ok(dbs
        .into_iter()
        .map(|db| {
            let mut tables: Vec<Table> = db
                .table_names_original
                .iter()
                .map(|n| Table {
                    name: n.clone(),
                    columns: Vec::new(),
                })
                .collect();
            for (idx, col) in db.column_names_original {
                if let Some(t) = usize::try_from(idx).ok().and_then(|i| tables.get_mut(i)) {
                    t.columns.push(col);
                }
            }
            (db.db_id, tables)
        })
        .collect())
}
