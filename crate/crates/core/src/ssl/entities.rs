//! Deterministic entity extraction used for cloze masking.
//!
//! A span is one of:
//! - a run of capitalized tokens, unless it is a single token at the start of
//!   a sentence,
//! - a numeric token (`42`, `3.50`, `10:30`),
//! - a weekday or month name.
//!
//! Scanning is left to right and the longest candidate at each position wins.
//! Offsets are in chars and exclude surrounding punctuation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

const WEEKDAYS: [&str; 7] = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"];
const MONTHS: [&str; 12] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];
// Months that double as common lowercase words only count when capitalized.
const CASED_MONTHS: [&str; 2] = ["may", "march"];
const FIRST_PERSON: [&str; 5] = ["I", "I'm", "I'll", "I'd", "I've"];

#[derive(Debug)]
struct Token {
    core_start: usize,
    core_end: usize,
    lead_punct: bool,
    trail_punct: bool,
    sentence_start: bool,
    core: String,
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(c, '\u{2018}' | '\u{2019}' | '\u{201c}' | '\u{201d}' | '\u{2026}' | '\u{ab}' | '\u{bb}' | '\u{bf}' | '\u{a1}')
}

fn tokenize(chars: &[char]) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut prev_ends_sentence = true;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        let end = i;
        let mut cs = start;
        while cs < end && is_punct(chars[cs]) {
            cs += 1;
        }
        let mut ce = end;
        while ce > cs && is_punct(chars[ce - 1]) {
            ce -= 1;
        }
        tokens.push(Token {
            core_start: cs,
            core_end: ce,
            lead_punct: cs > start,
            trail_punct: ce < end,
            sentence_start: prev_ends_sentence,
            core: chars[cs..ce].iter().collect(),
        });
        prev_ends_sentence = matches!(chars[end - 1], '.' | '!' | '?');
    }
    tokens
}

fn is_capitalized(core: &str) -> bool {
    core.chars().next().is_some_and(char::is_uppercase) && !FIRST_PERSON.contains(&core)
}

fn is_numeric(core: &str) -> bool {
    let first_last = core.chars().next().zip(core.chars().last());
    matches!(first_last, Some((a, b)) if a.is_ascii_digit() && b.is_ascii_digit())
        && core.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | ',' | ':'))
}

fn is_lexicon(core: &str) -> bool {
    let lower = core.to_lowercase();
    if WEEKDAYS.contains(&lower.as_str()) {
        return true;
    }
    if MONTHS.contains(&lower.as_str()) {
        return !CASED_MONTHS.contains(&lower.as_str()) || is_capitalized(core);
    }
    false
}

pub fn extract_entities(text: &str) -> Vec<EntitySpan> {
    let chars: Vec<char> = text.chars().collect();
    let tokens = tokenize(&chars);
    let mut spans = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let tok = &tokens[i];
        if tok.core.is_empty() {
            i += 1;
            continue;
        }
        let mut best = 0;
        if is_capitalized(&tok.core) {
            let mut j = i;
            while j + 1 < tokens.len()
                && !tokens[j].trail_punct
                && !tokens[j + 1].lead_punct
                && is_capitalized(&tokens[j + 1].core)
            {
                j += 1;
            }
            let run = j - i + 1;
            if !tok.sentence_start || run >= 2 {
                best = run;
            }
        }
        if best == 0 && (is_numeric(&tok.core) || is_lexicon(&tok.core)) {
            best = 1;
        }
        if best == 0 {
            i += 1;
            continue;
        }
        let (start, end) = (tok.core_start, tokens[i + best - 1].core_end);
        spans.push(EntitySpan {
            start,
            end,
            surface: chars[start..end].iter().collect(),
        });
        i += best;
    }
    spans
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpanError {
    #[error("span {index} is empty or out of range ({start}..{end} in {len} chars)")]
    OutOfRange { index: usize, start: usize, end: usize, len: usize },
    #[error("span {index} overlaps or precedes the previous span")]
    Unordered { index: usize },
    #[error("span {index} surface `{surface}` does not match the text")]
    SurfaceMismatch { index: usize, surface: String },
    #[error("span {index} has leading or trailing whitespace")]
    Untrimmed { index: usize },
}

/// Checks the span invariants against `text`: in range, sorted, non-overlapping,
/// surfaces matching and whitespace-trimmed.
pub fn check_spans(text: &str, spans: &[EntitySpan]) -> Result<(), SpanError> {
    let chars: Vec<char> = text.chars().collect();
    let mut prev_end = 0;
    for (index, s) in spans.iter().enumerate() {
        if s.start >= s.end || s.end > chars.len() {
            return Err(SpanError::OutOfRange {
                index,
                start: s.start,
                end: s.end,
                len: chars.len(),
            });
        }
        if s.start < prev_end {
            return Err(SpanError::Unordered { index });
        }
        let slice: String = chars[s.start..s.end].iter().collect();
        if slice != s.surface {
            return Err(SpanError::SurfaceMismatch {
                index,
                surface: s.surface.clone(),
            });
        }
        if slice.trim() != slice {
            return Err(SpanError::Untrimmed { index });
        }
        prev_end = s.end;
    }
    Ok(())
}
