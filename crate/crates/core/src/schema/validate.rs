use std::fmt;

use serde::Serialize;

use super::linearize::dialogue_text;
use super::normalize::MASK_TOKEN;
use super::record::{KnowledgeForm, KnowledgeKind, Speaker, TaskToken, UnifiedRecord};
use crate::knowledge::knowledge_problems;

/// Shape of the dialogue history a task expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistoryShape {
    /// No dialogue; the input is carried entirely by the knowledge segment.
    None,
    SingleTurn,
    MultipleTurns,
    /// One or more turns, no preference.
    AnyTurns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    SingleUtterance,
    SummaryText,
    LogicalForm,
    ClassificationName,
    FactOrPhrase,
    Dialogue,
}

/// One row of the task format matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskFormat {
    pub history: HistoryShape,
    pub knowledge: KnowledgeKind,
    pub output: OutputFormat,
}

impl TaskToken {
    pub fn format(self) -> TaskFormat {
        use HistoryShape as H;
        use KnowledgeKind as K;
        use OutputFormat as O;
        let (history, knowledge, output) = match self {
            TaskToken::Rew => (H::MultipleTurns, K::None, O::SingleUtterance),
            TaskToken::Nlg => (H::None, K::SemiStructured, O::SingleUtterance),
            TaskToken::Sum => (H::MultipleTurns, K::None, O::SummaryText),
            TaskToken::Fill => (H::SingleTurn, K::SemiStructured, O::LogicalForm),
            TaskToken::Intent => (H::SingleTurn, K::SemiStructured, O::ClassificationName),
            TaskToken::Dst => (H::MultipleTurns, K::SemiStructured, O::LogicalForm),
            TaskToken::Comm => (H::SingleTurn, K::Unstructured, O::FactOrPhrase),
            TaskToken::Emo => (H::SingleTurn, K::SemiStructured, O::ClassificationName),
            TaskToken::DocQa => (H::MultipleTurns, K::Unstructured, O::FactOrPhrase),
            TaskToken::DialQa => (H::MultipleTurns, K::Unstructured, O::FactOrPhrase),
            TaskToken::Chat => (H::MultipleTurns, K::Unstructured, O::SingleUtterance),
            TaskToken::KgDial => (H::MultipleTurns, K::Structured, O::SingleUtterance),
            TaskToken::Txt2Sql => (H::MultipleTurns, K::Structured, O::LogicalForm),
            TaskToken::Sim => (H::MultipleTurns, K::SemiStructured, O::SingleUtterance),
            TaskToken::Tod => (H::MultipleTurns, K::SemiStructured, O::SingleUtterance),
            TaskToken::Reo => (H::MultipleTurns, K::None, O::Dialogue),
            TaskToken::Clo => (H::AnyTurns, K::SemiStructured, O::Dialogue),
        };
        TaskFormat {
            history,
            knowledge,
            output,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EmptyTarget,
    UnknownTask { task: String },
    IllegalCombination { task: TaskToken, detail: String, severity: Severity },
    EmptyTurnText { turn: usize },
    EmptySpeakerName { turn: usize },
    EmptyTaskDefinition,
    MultiSentenceDefinition,
    InvalidKnowledge { detail: String },
    Unnormalized { field: String },
    TargetIsDialogue,
    EmptyDataset,
}

impl Violation {
    pub fn severity(&self) -> Severity {
        match self {
            Violation::IllegalCombination { severity, .. } => *severity,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyTarget => write!(f, "target is empty"),
            Violation::UnknownTask { task } => write!(f, "unknown task `{task}`"),
            Violation::IllegalCombination { task, detail, severity } => {
                write!(f, "illegal combination for {task} ({severity:?}): {detail}")
            }
            Violation::EmptyTurnText { turn } => write!(f, "turn {turn} has empty text"),
            Violation::EmptySpeakerName { turn } => write!(f, "turn {turn} has an empty speaker name"),
            Violation::EmptyTaskDefinition => write!(f, "task definition is empty"),
            Violation::MultiSentenceDefinition => write!(f, "task definition spans more than one sentence"),
            Violation::InvalidKnowledge { detail } => write!(f, "invalid knowledge: {detail}"),
            Violation::Unnormalized { field } => write!(f, "field `{field}` is not in normalized form"),
            Violation::TargetIsDialogue => {
                write!(f, "supervised target equals the linearized dialogue")
            }
            Violation::EmptyDataset => write!(f, "dataset name is empty"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    /// True when no error-level violation is present; warnings are allowed.
    pub fn is_ok(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.severity() == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.severity() == Severity::Warning)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

/// A sentence boundary is terminal punctuation followed by whitespace and an
/// uppercase letter ("Do this. Then that.").
fn has_multiple_sentences(s: &str) -> bool {
    let chars: Vec<char> = s.chars().collect();
    chars.windows(3).any(|w| matches!(w[0], '.' | '!' | '?') && w[1] == ' ' && w[2].is_uppercase())
}

fn combination(task: TaskToken, severity: Severity, detail: impl Into<String>) -> Violation {
    Violation::IllegalCombination {
        task,
        detail: detail.into(),
        severity,
    }
}

fn check_combination(r: &UnifiedRecord, out: &mut Vec<Violation>) {
    let fmt = r.task.format();
    let turns = r.dialogue.len();
    match fmt.history {
        HistoryShape::None if turns > 0 => out.push(combination(
            r.task,
            Severity::Warning,
            format!("expects no dialogue history, found {turns} turn(s)"),
        )),
        HistoryShape::SingleTurn if turns == 0 => {
            out.push(combination(r.task, Severity::Error, "expects a single turn, history is empty"))
        }
        HistoryShape::SingleTurn if turns > 1 => out.push(combination(
            r.task,
            Severity::Warning,
            format!("expects a single turn, found {turns}"),
        )),
        HistoryShape::MultipleTurns | HistoryShape::AnyTurns if turns == 0 => {
            out.push(combination(r.task, Severity::Error, "dialogue history is empty"))
        }
        _ => {}
    }

    let kind = r.knowledge.kind();
    if kind != fmt.knowledge {
        if kind == KnowledgeKind::None {
            out.push(combination(
                r.task,
                Severity::Warning,
                format!("expects {} knowledge, none given", fmt.knowledge),
            ));
        } else {
            out.push(combination(
                r.task,
                Severity::Error,
                format!("expects {} knowledge, found {kind}", fmt.knowledge),
            ));
        }
    }

    match r.task {
        TaskToken::Reo if turns == 1 => {
            out.push(combination(r.task, Severity::Error, "reordering needs at least two turns"))
        }
        TaskToken::Clo => {
            let masks: usize = r.dialogue.iter().map(|t| t.text.matches(MASK_TOKEN).count()).sum();
            if let KnowledgeForm::SemiStructured(pairs) = &r.knowledge {
                if pairs.iter().any(|(k, _)| k != "entity") {
                    out.push(combination(r.task, Severity::Error, "cloze knowledge keys must be `entity`"));
                }
                if masks != pairs.len() {
                    out.push(combination(
                        r.task,
                        Severity::Error,
                        format!("{masks} mask token(s) but {} entities", pairs.len()),
                    ));
                }
            }
            if r.target.contains(MASK_TOKEN) {
                out.push(combination(r.task, Severity::Error, "cloze target contains a mask token"));
            }
        }
        _ => {}
    }
}

/// Checks every record invariant plus the task/history/knowledge matrix.
pub fn validate_record(r: &UnifiedRecord) -> ValidationReport {
    let mut v = Vec::new();

    if r.target.is_empty() {
        v.push(Violation::EmptyTarget);
    }
    if r.dataset.trim().is_empty() {
        v.push(Violation::EmptyDataset);
    }
    if r.task_definition.is_empty() {
        v.push(Violation::EmptyTaskDefinition);
    } else if has_multiple_sentences(&r.task_definition) {
        v.push(Violation::MultiSentenceDefinition);
    }
    for (i, turn) in r.dialogue.iter().enumerate() {
        if turn.text.trim().is_empty() {
            v.push(Violation::EmptyTurnText { turn: i });
        }
        if let Speaker::Other(name) = &turn.speaker {
            if name.trim().is_empty() {
                v.push(Violation::EmptySpeakerName { turn: i });
            }
        }
    }
    v.extend(
        knowledge_problems(&r.knowledge)
            .into_iter()
            .map(|detail| Violation::InvalidKnowledge { detail }),
    );

    let norm = r.normalized();
    if norm.dialogue != r.dialogue {
        v.push(Violation::Unnormalized { field: "dialogue".into() });
    }
    if norm.knowledge != r.knowledge {
        v.push(Violation::Unnormalized { field: "knowledge".into() });
    }
    if norm.task_definition != r.task_definition {
        v.push(Violation::Unnormalized { field: "task_definition".into() });
    }
    if norm.target != r.target {
        v.push(Violation::Unnormalized { field: "target".into() });
    }

    check_combination(r, &mut v);

    if r.task.is_supervised() && !r.dialogue.is_empty() && r.target == dialogue_text(&r.dialogue, true) {
        v.push(Violation::TargetIsDialogue);
    }

    ValidationReport { violations: v }
}
