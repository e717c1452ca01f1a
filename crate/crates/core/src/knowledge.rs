//! Canonical text serialization of external knowledge.
//!
//! | variant         | rendering                                  |
//! |-----------------|--------------------------------------------|
//! | none            | empty string                               |
//! | text            | the normalized text                        |
//! | pairs           | `key = value` joined by ` ; `              |
//! | schema          | `table(col1, col2)` joined by ` | `        |
//! | triples         | `( head | rel | tail )` joined by ` | `    |
//!
//! Input order is preserved. Normalization removes standalone separator tokens
//! from structured payload strings so that [`parse_knowledge`] can always
//! recover the structure.

use thiserror::Error;

use crate::schema::normalize::{collapse_whitespace, drop_standalone_tokens, normalize_text};
use crate::schema::{KnowledgeForm, KnowledgeKind, StructuredKnowledge, Table, Triple};

pub const PAIR_SEP: &str = " ; ";
pub const KEY_VALUE_SEP: &str = " = ";
pub const ITEM_SEP: &str = " | ";
const COLUMN_SEP: &str = ", ";

pub fn serialize_knowledge(k: &KnowledgeForm) -> String {
    match k {
        KnowledgeForm::None => String::new(),
        KnowledgeForm::Unstructured(text) => text.clone(),
        KnowledgeForm::SemiStructured(pairs) => pairs
            .iter()
            .map(|(key, value)| format!("{key}{KEY_VALUE_SEP}{value}"))
            .collect::<Vec<_>>()
            .join(PAIR_SEP),
        KnowledgeForm::Structured(StructuredKnowledge::Schema(tables)) => tables
            .iter()
            .map(|t| format!("{}({})", t.name, t.columns.join(COLUMN_SEP)))
            .collect::<Vec<_>>()
            .join(ITEM_SEP),
        KnowledgeForm::Structured(StructuredKnowledge::Triples(triples)) => triples
            .iter()
            .map(|t| format!("( {} | {} | {} )", t.head, t.relation, t.tail))
            .collect::<Vec<_>>()
            .join(ITEM_SEP),
    }
}

fn scrub_pair_part(s: &str) -> String {
    drop_standalone_tokens(&normalize_text(s), &[";", "="])
}

fn scrub_schema_name(s: &str) -> String {
    let cleaned: String = normalize_text(s)
        .chars()
        .filter(|c| !matches!(c, '(' | ')' | ','))
        .collect();
    drop_standalone_tokens(&collapse_whitespace(&cleaned), &["|"])
}

fn scrub_triple_slot(s: &str) -> String {
    drop_standalone_tokens(&normalize_text(s), &["|"])
}

/// Canonical form of a knowledge payload; idempotent.
pub fn normalize_knowledge(k: &KnowledgeForm) -> KnowledgeForm {
    match k {
        KnowledgeForm::None => KnowledgeForm::None,
        KnowledgeForm::Unstructured(text) => KnowledgeForm::Unstructured(normalize_text(text)),
        KnowledgeForm::SemiStructured(pairs) => KnowledgeForm::SemiStructured(
            pairs
                .iter()
                .map(|(k, v)| (scrub_pair_part(k), scrub_pair_part(v)))
                .collect(),
        ),
        KnowledgeForm::Structured(StructuredKnowledge::Schema(tables)) => {
            KnowledgeForm::Structured(StructuredKnowledge::Schema(
                tables
                    .iter()
                    .map(|t| Table {
                        name: scrub_schema_name(&t.name),
                        columns: t.columns.iter().map(|c| scrub_schema_name(c)).collect(),
                    })
                    .collect(),
            ))
        }
        KnowledgeForm::Structured(StructuredKnowledge::Triples(triples)) => {
            KnowledgeForm::Structured(StructuredKnowledge::Triples(
                triples
                    .iter()
                    .map(|t| Triple {
                        head: scrub_triple_slot(&t.head),
                        relation: scrub_triple_slot(&t.relation),
                        tail: scrub_triple_slot(&t.tail),
                    })
                    .collect(),
            ))
        }
    }
}

/// Structural problems with a knowledge payload. Empty strings are never legal
/// inside a non-`None` payload, since they would make serialization ambiguous.
pub fn knowledge_problems(k: &KnowledgeForm) -> Vec<String> {
    let mut problems = Vec::new();
    match k {
        KnowledgeForm::None => {}
        KnowledgeForm::Unstructured(text) => {
            if text.is_empty() {
                problems.push("unstructured knowledge text is empty".to_string());
            }
        }
        KnowledgeForm::SemiStructured(pairs) => {
            if pairs.is_empty() {
                problems.push("semi-structured knowledge has no entries".to_string());
            }
            for (i, (key, value)) in pairs.iter().enumerate() {
                if key.is_empty() {
                    problems.push(format!("entry {i} has an empty key path"));
                }
                if value.is_empty() {
                    problems.push(format!("entry {i} (`{key}`) has an empty value"));
                }
            }
        }
        KnowledgeForm::Structured(StructuredKnowledge::Schema(tables)) => {
            if tables.is_empty() {
                problems.push("schema has no tables".to_string());
            }
            let mut seen = std::collections::HashSet::new();
            for t in tables {
                if t.name.is_empty() {
                    problems.push("schema table with empty name".to_string());
                } else if !seen.insert(t.name.as_str()) {
                    problems.push(format!("duplicate schema table `{}`", t.name));
                }
                if t.columns.iter().any(|c| c.is_empty()) {
                    problems.push(format!("table `{}` has an empty column name", t.name));
                }
            }
        }
        KnowledgeForm::Structured(StructuredKnowledge::Triples(triples)) => {
            if triples.is_empty() {
                problems.push("triple list is empty".to_string());
            }
            for (i, t) in triples.iter().enumerate() {
                if t.head.is_empty() || t.relation.is_empty() || t.tail.is_empty() {
                    problems.push(format!("triple {i} has an empty slot"));
                }
            }
        }
    }
    problems
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {kind:?} knowledge: {reason}")]
pub struct KnowledgeParseError {
    pub kind: &'static str,
    pub reason: String,
}

fn parse_err(kind: &'static str, reason: impl Into<String>) -> KnowledgeParseError {
    KnowledgeParseError {
        kind,
        reason: reason.into(),
    }
}

/// Reference inverse of [`serialize_knowledge`]. The serialized text does not
/// carry its variant, so the caller supplies it; for structured knowledge the
/// schema/triples variant is inferred from the text shape.
pub fn parse_knowledge(kind: KnowledgeKind, text: &str) -> Result<KnowledgeForm, KnowledgeParseError> {
    match kind {
        KnowledgeKind::None => {
            if text.is_empty() {
                Ok(KnowledgeForm::None)
            } else {
                Err(parse_err("none", "expected empty text"))
            }
        }
        KnowledgeKind::Unstructured => Ok(KnowledgeForm::Unstructured(text.to_string())),
        KnowledgeKind::SemiStructured => text
            .split(PAIR_SEP)
            .map(|entry| {
                entry
                    .split_once(KEY_VALUE_SEP)
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .ok_or_else(|| parse_err("pairs", format!("entry `{entry}` lacks ` = `")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(KnowledgeForm::SemiStructured),
        KnowledgeKind::Structured => {
            if text.starts_with("( ") && text.ends_with(" )") {
                parse_triples(text)
            } else {
                parse_schema(text)
            }
        }
    }
}

fn parse_schema(text: &str) -> Result<KnowledgeForm, KnowledgeParseError> {
    text.split(ITEM_SEP)
        .map(|item| {
            let open = item
                .find('(')
                .ok_or_else(|| parse_err("schema", format!("table `{item}` lacks `(`")))?;
            let cols = item[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| parse_err("schema", format!("table `{item}` lacks `)`")))?;
            let columns = if cols.is_empty() {
                Vec::new()
            } else {
                cols.split(COLUMN_SEP).map(str::to_string).collect()
            };
            Ok(Table {
                name: item[..open].to_string(),
                columns,
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map(|t| KnowledgeForm::Structured(StructuredKnowledge::Schema(t)))
}

fn parse_triples(text: &str) -> Result<KnowledgeForm, KnowledgeParseError> {
    let parts: Vec<&str> = text.split(ITEM_SEP).collect();
    if !parts.len().is_multiple_of(3) {
        return Err(parse_err("triples", "slot count is not a multiple of three"));
    }
    parts
        .chunks(3)
        .map(|c| {
            let head = c[0]
                .strip_prefix("( ")
                .ok_or_else(|| parse_err("triples", "missing `( `"))?;
            let tail = c[2]
                .strip_suffix(" )")
                .ok_or_else(|| parse_err("triples", "missing ` )`"))?;
            Ok(Triple::new(head, c[1], tail))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(|t| KnowledgeForm::Structured(StructuredKnowledge::Triples(t)))
}
