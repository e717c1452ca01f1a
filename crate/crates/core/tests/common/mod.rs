#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde_json::json;
use unidial::schema::{
    KnowledgeForm, Speaker, Split, StructuredKnowledge, Table, TaskToken, Triple, Turn, UnifiedRecord,
};

const WORDS: &[&str] = &[
    "the", "a", "table", "for", "two", "please", "cheap", "near", "centre", "hotel", "book", "train", "leaves", "at",
    "what", "is", "your", "favourite", "song", "i", "like", "tea", "weather", "rain", "café", "naïve", "über", "ok",
    "sure", "thanks", "price", "area", "north", "south", "time", "people", "night", "stay", "wifi", "parking",
];
const NAMES: &[&str] = &["Paris", "London", "Anna", "Bob", "Zürich", "New York", "Cambridge", "Ely"];
const DAYS: &[&str] = &["Monday", "Friday", "Sunday", "March", "June"];
const SPEAKERS: &[&str] = &["agent", "customer", "host 1", "narrator"];

pub fn words<R: Rng>(rng: &mut R, lo: usize, hi: usize) -> String {
    let n = rng.random_range(lo..=hi);
    (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

/// Lowercase-start utterance, optionally carrying names, days and numbers.
pub fn utterance<R: Rng>(rng: &mut R, with_entities: bool) -> String {
    let mut parts = vec![words(rng, 1, 5)];
    if with_entities {
        for _ in 0..rng.random_range(1..=3) {
            match rng.random_range(0..3) {
                0 => parts.push(format!("in {}", NAMES.choose(rng).unwrap())),
                1 => parts.push(format!("on {}", DAYS.choose(rng).unwrap())),
                _ => parts.push(format!("for {}", rng.random_range(1..500))),
            }
            parts.push(words(rng, 1, 3));
        }
    }
    parts.join(" ")
}

fn speaker<R: Rng>(rng: &mut R, i: usize) -> Speaker {
    if rng.random_bool(0.1) {
        Speaker::Other(SPEAKERS.choose(rng).unwrap().to_string())
    } else if i.is_multiple_of(2) {
        Speaker::User
    } else {
        Speaker::System
    }
}

pub fn dialogue<R: Rng>(rng: &mut R, n: usize, with_entities: bool) -> Vec<Turn> {
    (0..n).map(|i| Turn::new(speaker(rng, i), utterance(rng, with_entities))).collect()
}

fn pairs<R: Rng>(rng: &mut R) -> Vec<(String, String)> {
    (0..rng.random_range(1..=4))
        .map(|i| (format!("slot{i}.{}", WORDS.choose(rng).unwrap()), words(rng, 1, 2)))
        .collect()
}

pub fn knowledge_of<R: Rng>(rng: &mut R, kind: &str) -> KnowledgeForm {
    match kind {
        "none" => KnowledgeForm::None,
        "text" => KnowledgeForm::Unstructured(words(rng, 3, 12)),
        "pairs" => KnowledgeForm::SemiStructured(pairs(rng)),
        "schema" => KnowledgeForm::Structured(StructuredKnowledge::Schema(
            (0..rng.random_range(1..=3))
                .map(|t| Table {
                    name: format!("table_{t}"),
                    columns: (0..rng.random_range(1..=4)).map(|c| format!("col_{c}")).collect(),
                })
                .collect(),
        )),
        "triples" => KnowledgeForm::Structured(StructuredKnowledge::Triples(
            (0..rng.random_range(1..=3))
                .map(|_| Triple::new(*NAMES.choose(rng).unwrap(), "located in", words(rng, 1, 2)))
                .collect(),
        )),
        _ => unreachable!("unknown knowledge kind {kind}"),
    }
}

/// (history turns range, knowledge kind) producing a clean record per task.
fn shape<R: Rng>(rng: &mut R, task: TaskToken) -> (usize, &'static str) {
    use TaskToken::*;
    let multi = rng.random_range(1..=6);
    match task {
        Rew | Sum => (multi, "none"),
        Nlg => (0, "pairs"),
        Fill | Intent | Emo => (1, "pairs"),
        Comm => (1, "text"),
        Dst | Sim | Tod => (multi, "pairs"),
        DocQa | DialQa | Chat => (multi, "text"),
        KgDial => (multi, "triples"),
        Txt2Sql => (multi, "schema"),
        Reo | Clo => unreachable!("self-supervised records come from the ssl generators"),
    }
}

/// A normalized record that passes validation without any violation.
pub fn supervised_record<R: Rng>(rng: &mut R) -> UnifiedRecord {
    let tasks: Vec<TaskToken> = TaskToken::supervised().collect();
    let task = *tasks.choose(rng).unwrap();
    let (turns, kind) = shape(rng, task);
    let mut meta = BTreeMap::new();
    if rng.random_bool(0.3) {
        meta.insert("source_id".to_string(), json!(rng.random_range(0..10_000)));
        meta.insert("tags".to_string(), json!(["a", "b"]));
    }
    let with_entities = rng.random_bool(0.5);
    UnifiedRecord {
        task,
        dataset: format!("ds{}", rng.random_range(0..5)),
        split: *[Split::Train, Split::Dev, Split::Test].choose(rng).unwrap(),
        dialogue: dialogue(rng, turns, with_entities),
        knowledge: knowledge_of(rng, kind),
        task_definition: format!("Solve the {} task for {}.", task.name(), words(rng, 1, 3)),
        target: format!("answer {}", words(rng, 1, 6)),
        meta,
    }
}

/// Multi-turn train-split chat record with entities, for the ssl generators.
pub fn ssl_source<R: Rng>(rng: &mut R, turns: usize) -> UnifiedRecord {
    UnifiedRecord {
        task: TaskToken::Chat,
        dataset: format!("ds{}", rng.random_range(0..3)),
        split: Split::Train,
        dialogue: dialogue(rng, turns, true),
        knowledge: knowledge_of(rng, "text"),
        task_definition: "Generate the next reply.".into(),
        target: format!("answer {}", words(rng, 1, 4)),
        meta: BTreeMap::new(),
    }
}
