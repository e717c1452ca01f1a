//! Text normalization applied to every payload string before linearization.
//!
//! Payload text is NFC-composed, stripped of the segment markers that the
//! linearized template reserves, and whitespace-collapsed to single spaces.
//! Targets get NFC and whitespace collapsing only: the denoising targets
//! legitimately contain turn separators.

use unicode_normalization::{is_nfc_quick, IsNormalized, UnicodeNormalization};

use super::record::{Speaker, Turn, UnifiedRecord};
use crate::knowledge;

pub const KNOW_MARKER: &str = "[know]";
pub const DIAL_MARKER: &str = "[dial]";
pub const SEP_MARKER: &str = "[sep]";
pub const MASK_TOKEN: &str = "[mask]";

pub const RESERVED_MARKERS: [&str; 3] = [KNOW_MARKER, DIAL_MARKER, SEP_MARKER];

fn nfc(s: &str) -> String {
    match is_nfc_quick(s.chars()) {
        IsNormalized::Yes => s.to_string(),
        _ => s.nfc().collect(),
    }
}

pub fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Canonical form of payload text (turns, definitions, knowledge strings).
pub fn normalize_text(s: &str) -> String {
    let mut text = nfc(s);
    // Markers contain no whitespace, so replacing with a space cannot form a new one.
    for marker in RESERVED_MARKERS {
        if text.contains(marker) {
            text = text.replace(marker, " ");
        }
    }
    collapse_whitespace(&text)
}

pub fn normalize_target(s: &str) -> String {
    collapse_whitespace(&nfc(s))
}

/// Removes whitespace-delimited tokens that are exactly one of `tokens`.
pub(crate) fn drop_standalone_tokens(s: &str, tokens: &[&str]) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace().filter(|w| !tokens.contains(w)) {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

pub fn normalize_speaker(speaker: &Speaker) -> Speaker {
    match speaker {
        Speaker::Other(name) => {
            let cleaned: String = normalize_text(name).chars().filter(|c| *c != ':').collect();
            Speaker::from_name(&collapse_whitespace(&cleaned))
        }
        s => s.clone(),
    }
}

pub fn normalize_turn(turn: &Turn) -> Turn {
    Turn {
        speaker: normalize_speaker(&turn.speaker),
        text: normalize_text(&turn.text),
    }
}

impl UnifiedRecord {
    /// Returns the canonical form of this record. Idempotent.
    pub fn normalized(&self) -> UnifiedRecord {
        UnifiedRecord {
            task: self.task,
            dataset: self.dataset.trim().to_string(),
            split: self.split,
            dialogue: self.dialogue.iter().map(normalize_turn).collect(),
            knowledge: knowledge::normalize_knowledge(&self.knowledge),
            task_definition: normalize_text(&self.task_definition),
            target: normalize_target(&self.target),
            meta: self.meta.clone(),
        }
    }
}
