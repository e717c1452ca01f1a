//! Self-supervised denoising corpora: turn reordering (`[reo]`) and entity
//! cloze (`[clo]`), each with provenance that lets [`verify_ssl`] rebuild the
//! target from the generated input.

pub mod entities;

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use entities::{check_spans, extract_entities, EntitySpan, SpanError};

use crate::knowledge::normalize_knowledge;
use crate::schema::{dialogue_text, normalize_target, KnowledgeForm, Split, TaskToken, Turn, UnifiedRecord, MASK_TOKEN};
use crate::seed::derive_seed;

pub const REO_DEFINITION: &str = "Recover the original order of the shuffled dialogue turns.";
pub const CLO_DEFINITION: &str = "Recover the complete dialogue by filling the masks with the given entities.";
pub const ENTITY_KEY: &str = "entity";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SslKind {
    Reo,
    Clo,
}

impl SslKind {
    pub fn task(self) -> TaskToken {
        match self {
            SslKind::Reo => TaskToken::Reo,
            SslKind::Clo => TaskToken::Clo,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SslKind::Reo => "reo",
            SslKind::Clo => "clo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    TooFewTurns,
    NoEntities,
    NotTrainSplit,
    NotSupervised,
    /// The source dialogue already contains a mask token.
    ReservedToken,
    InvalidSpans(String),
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkipReason::TooFewTurns => f.write_str("TooFewTurns"),
            SkipReason::NoEntities => f.write_str("NoEntities"),
            SkipReason::NotTrainSplit => f.write_str("NotTrainSplit"),
            SkipReason::NotSupervised => f.write_str("NotSupervised"),
            SkipReason::ReservedToken => f.write_str("ReservedToken"),
            SkipReason::InvalidSpans(d) => write!(f, "InvalidSpans({d})"),
        }
    }
}

impl SkipReason {
    /// Reason without payload, for aggregate reporting.
    pub fn label(&self) -> &'static str {
        match self {
            SkipReason::TooFewTurns => "TooFewTurns",
            SkipReason::NoEntities => "NoEntities",
            SkipReason::NotTrainSplit => "NotTrainSplit",
            SkipReason::NotSupervised => "NotSupervised",
            SkipReason::ReservedToken => "ReservedToken",
            SkipReason::InvalidSpans(_) => "InvalidSpans",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloAlignment {
    pub turn: usize,
    pub span: EntitySpan,
    pub knowledge_position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum SslProvenance {
    /// Output turn `j` is original turn `permutation[j]`.
    Reo { permutation: Vec<usize> },
    Clo { alignments: Vec<CloAlignment> },
}

pub type SslResult = Result<(UnifiedRecord, SslProvenance), SkipReason>;

fn check_source(r: &UnifiedRecord) -> Result<(), SkipReason> {
    if r.split != Split::Train {
        return Err(SkipReason::NotTrainSplit);
    }
    if !r.task.is_supervised() {
        return Err(SkipReason::NotSupervised);
    }
    Ok(())
}

fn derived_record(r: &UnifiedRecord, kind: SslKind, dialogue: Vec<Turn>, knowledge: KnowledgeForm) -> UnifiedRecord {
    let mut meta = BTreeMap::new();
    meta.insert("source_task".to_string(), serde_json::Value::from(r.task.name()));
    UnifiedRecord {
        task: kind.task(),
        dataset: r.dataset.clone(),
        split: Split::Train,
        dialogue,
        knowledge,
        task_definition: match kind {
            SslKind::Reo => REO_DEFINITION.to_string(),
            SslKind::Clo => CLO_DEFINITION.to_string(),
        },
        target: normalize_target(&dialogue_text(&r.dialogue, true)),
        meta,
    }
}

/// Turn-reordering example: the input dialogue is a uniformly drawn
/// non-identity permutation of the source turns; the target is the source
/// dialogue in its original order.
pub fn make_reo<R: Rng + ?Sized>(r: &UnifiedRecord, rng: &mut R) -> SslResult {
    check_source(r)?;
    let n = r.dialogue.len();
    if n < 2 {
        return Err(SkipReason::TooFewTurns);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        perm.shuffle(rng);
        if perm.iter().enumerate().any(|(i, &p)| i != p) {
            break;
        }
    }
    let dialogue = perm.iter().map(|&p| r.dialogue[p].clone()).collect();
    let out = derived_record(r, SslKind::Reo, dialogue, KnowledgeForm::None);
    Ok((out, SslProvenance::Reo { permutation: perm }))
}

fn mask_turn(text: &str, spans: &[EntitySpan]) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut pos = 0;
    for s in spans {
        out.extend(&chars[pos..s.start]);
        out.push_str(MASK_TOKEN);
        pos = s.end;
    }
    out.extend(&chars[pos..]);
    out
}

/// Entity-cloze example. Entity spans are taken from `entities` when given
/// (one list per turn), otherwise extracted with [`extract_entities`]. Every
/// span becomes `[mask]`; the surfaces, shuffled, form the knowledge.
pub fn make_clo<R: Rng + ?Sized>(r: &UnifiedRecord, rng: &mut R, entities: Option<&[Vec<EntitySpan>]>) -> SslResult {
    check_source(r)?;
    if r.dialogue.is_empty() {
        return Err(SkipReason::TooFewTurns);
    }
    if r.dialogue.iter().any(|t| t.text.contains(MASK_TOKEN)) {
        return Err(SkipReason::ReservedToken);
    }
    let per_turn: Vec<Vec<EntitySpan>> = match entities {
        Some(given) => {
            if given.len() != r.dialogue.len() {
                return Err(SkipReason::InvalidSpans(format!(
                    "{} span lists for {} turns",
                    given.len(),
                    r.dialogue.len()
                )));
            }
            for (turn, spans) in r.dialogue.iter().zip(given) {
                check_spans(&turn.text, spans).map_err(|e| SkipReason::InvalidSpans(e.to_string()))?;
            }
            given.to_vec()
        }
        None => r.dialogue.iter().map(|t| extract_entities(&t.text)).collect(),
    };
    let total: usize = per_turn.iter().map(Vec::len).sum();
    if total == 0 {
        return Err(SkipReason::NoEntities);
    }

    let dialogue: Vec<Turn> = r
        .dialogue
        .iter()
        .zip(&per_turn)
        .map(|(t, spans)| Turn::new(t.speaker.clone(), mask_turn(&t.text, spans)))
        .collect();

    // order[k] = index (in reading order) of the entity placed at knowledge position k
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(rng);
    let mut position = vec![0usize; total];
    for (k, &e) in order.iter().enumerate() {
        position[e] = k;
    }

    let flat: Vec<(usize, &EntitySpan)> = per_turn
        .iter()
        .enumerate()
        .flat_map(|(turn, spans)| spans.iter().map(move |s| (turn, s)))
        .collect();
    let pairs = order
        .iter()
        .map(|&e| (ENTITY_KEY.to_string(), flat[e].1.surface.clone()))
        .collect();
    let knowledge = normalize_knowledge(&KnowledgeForm::SemiStructured(pairs));
    if let KnowledgeForm::SemiStructured(p) = &knowledge {
        if p.iter().any(|(_, v)| v.is_empty()) {
            return Err(SkipReason::InvalidSpans("entity surface normalizes to empty".into()));
        }
    }
    let alignments = flat
        .iter()
        .enumerate()
        .map(|(e, (turn, span))| CloAlignment {
            turn: *turn,
            span: (*span).clone(),
            knowledge_position: position[e],
        })
        .collect();

    let out = derived_record(r, SslKind::Clo, dialogue, knowledge);
    Ok((out, SslProvenance::Clo { alignments }))
}

fn verify_reo(record: &UnifiedRecord, permutation: &[usize]) -> bool {
    let n = record.dialogue.len();
    if record.task != TaskToken::Reo || !record.knowledge.is_none() || permutation.len() != n || n < 2 {
        return false;
    }
    let mut original: Vec<Option<&Turn>> = vec![None; n];
    for (j, &p) in permutation.iter().enumerate() {
        if p >= n || original[p].is_some() {
            return false;
        }
        original[p] = Some(&record.dialogue[j]);
    }
    if permutation.iter().enumerate().all(|(i, &p)| i == p) {
        return false;
    }
    let original: Vec<Turn> = original.into_iter().map(|t| t.cloned().unwrap()).collect();
    normalize_target(&dialogue_text(&original, true)) == record.target
}

fn verify_clo(record: &UnifiedRecord, alignments: &[CloAlignment]) -> bool {
    if record.task != TaskToken::Clo || alignments.is_empty() {
        return false;
    }
    let KnowledgeForm::SemiStructured(pairs) = &record.knowledge else {
        return false;
    };
    if pairs.len() != alignments.len() || pairs.iter().any(|(k, _)| k != ENTITY_KEY) {
        return false;
    }
    // The knowledge must hold exactly the aligned surfaces, in any order.
    let mut listed: Vec<&str> = pairs.iter().map(|(_, v)| v.as_str()).collect();
    let surfaces = normalize_knowledge(&KnowledgeForm::SemiStructured(
        alignments
            .iter()
            .map(|a| (ENTITY_KEY.to_string(), a.span.surface.clone()))
            .collect(),
    ));
    let KnowledgeForm::SemiStructured(expected) = surfaces else {
        return false;
    };
    let mut expected: Vec<&str> = expected.iter().map(|(_, v)| v.as_str()).collect();
    listed.sort_unstable();
    expected.sort_unstable();
    if listed != expected {
        return false;
    }
    let mut positions: Vec<usize> = alignments.iter().map(|a| a.knowledge_position).collect();
    positions.sort_unstable();
    if positions.iter().enumerate().any(|(i, &p)| i != p) {
        return false;
    }

    let mut by_turn: Vec<Vec<&EntitySpan>> = vec![Vec::new(); record.dialogue.len()];
    for a in alignments {
        match by_turn.get_mut(a.turn) {
            Some(v) => v.push(&a.span),
            None => return false,
        }
    }
    let mut rebuilt = Vec::with_capacity(record.dialogue.len());
    for (turn, spans) in record.dialogue.iter().zip(by_turn.iter_mut()) {
        spans.sort_by_key(|s| s.start);
        let segments: Vec<&str> = turn.text.split(MASK_TOKEN).collect();
        if segments.len() != spans.len() + 1 {
            return false;
        }
        let mut text = String::with_capacity(turn.text.len());
        let mut chars = 0;
        for (seg, span) in segments.iter().zip(spans.iter()) {
            text.push_str(seg);
            chars += seg.chars().count();
            if chars != span.start || span.end != span.start + span.surface.chars().count() {
                return false;
            }
            text.push_str(&span.surface);
            chars = span.end;
        }
        text.push_str(segments.last().unwrap());
        rebuilt.push(Turn::new(turn.speaker.clone(), text));
    }
    normalize_target(&dialogue_text(&rebuilt, true)) == record.target
}

/// True iff the provenance reconstructs the record's target exactly.
pub fn verify_ssl(record: &UnifiedRecord, prov: &SslProvenance) -> bool {
    match prov {
        SslProvenance::Reo { permutation } => verify_reo(record, permutation),
        SslProvenance::Clo { alignments } => verify_clo(record, alignments),
    }
}

/// Reads pre-annotated entity spans from `meta.entities` (one list per turn).
pub fn entities_from_meta(r: &UnifiedRecord) -> Option<Result<Vec<Vec<EntitySpan>>, String>> {
    r.meta
        .get("entities")
        .map(|v| serde_json::from_value(v.clone()).map_err(|e| format!("meta.entities: {e}")))
}

/// Corpus-level generator. Every record draws from its own RNG seeded by
/// `(global seed, kind, dataset, ordinal)`, so output is independent of
/// processing order and thread count.
#[derive(Debug, Clone, Copy)]
pub struct SslGenerator {
    pub global_seed: u64,
}

impl SslGenerator {
    pub fn new(global_seed: u64) -> Self {
        SslGenerator { global_seed }
    }

    pub fn record_seed(&self, kind: SslKind, dataset: &str, ordinal: u64) -> u64 {
        derive_seed(
            self.global_seed,
            &[kind.name().as_bytes(), dataset.as_bytes(), &ordinal.to_le_bytes()],
        )
    }

    pub fn generate(&self, kind: SslKind, ordinal: u64, r: &UnifiedRecord) -> SslResult {
        let mut rng = ChaCha8Rng::seed_from_u64(self.record_seed(kind, &r.dataset, ordinal));
        match kind {
            SslKind::Reo => make_reo(r, &mut rng),
            SslKind::Clo => match entities_from_meta(r) {
                Some(Ok(spans)) => make_clo(r, &mut rng, Some(&spans)),
                Some(Err(e)) => Err(SkipReason::InvalidSpans(e)),
                None => make_clo(r, &mut rng, None),
            },
        }
    }

    /// Parallel generation over `(ordinal, record)` pairs; results keep input order.
    pub fn generate_all(&self, kind: SslKind, records: &[(u64, UnifiedRecord)]) -> Vec<(u64, SslResult)> {
        records
            .par_iter()
            .map(|(ord, r)| (*ord, self.generate(kind, *ord, r)))
            .collect()
    }
}
