//! Unified record model, normalization, validation and input linearization.

pub mod linearize;
pub mod normalize;
pub mod record;
pub mod validate;

pub use linearize::{delinearize, dialogue_text, linearize_input, Delinearized, LinearizeError, TemplateConfig};
pub use normalize::{normalize_target, normalize_text, MASK_TOKEN};
pub use record::{
    KnowledgeForm, KnowledgeKind, RecordParseError, Speaker, Split, StructuredKnowledge, Table, TaskToken, Triple, Turn,
    UnifiedRecord, UnknownTask,
};
pub use validate::{validate_record, HistoryShape, OutputFormat, Severity, TaskFormat, ValidationReport, Violation};
