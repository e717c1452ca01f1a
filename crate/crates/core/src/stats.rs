//! Per-task corpus accounting over a manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::CorpusManifest;
use crate::schema::TaskToken;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskShare {
    pub task: TaskToken,
    pub count: u64,
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total: u64,
    pub supervised: u64,
    pub self_supervised: u64,
    /// Descending by count; ties in task token order.
    pub tasks: Vec<TaskShare>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("manifest has no records to count")]
    EmptyManifest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TotalCheck {
    Ok,
    Mismatch { actual: u64, expected: u64 },
}

pub fn corpus_stats(m: &CorpusManifest, include_ssl: bool) -> Result<CorpusStats, StatsError> {
    let mut counts: BTreeMap<TaskToken, u64> = BTreeMap::new();
    for e in &m.entries {
        if include_ssl || e.task.is_supervised() {
            *counts.entry(e.task).or_insert(0) += e.count;
        }
    }
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(StatsError::EmptyManifest);
    }
    let supervised = counts.iter().filter(|(t, _)| t.is_supervised()).map(|(_, c)| c).sum();
    let mut tasks: Vec<TaskShare> = counts
        .into_iter()
        .map(|(task, count)| TaskShare {
            task,
            count,
            proportion: count as f64 / total as f64,
        })
        .collect();
    // Stable sort keeps the BTreeMap's token order among equal counts.
    tasks.sort_by_key(|t| std::cmp::Reverse(t.count));
    Ok(CorpusStats {
        total,
        supervised,
        self_supervised: total - supervised,
        tasks,
    })
}

pub fn check_total(m: &CorpusManifest, expected: u64) -> TotalCheck {
    let actual = m.total();
    if actual == expected {
        TotalCheck::Ok
    } else {
        TotalCheck::Mismatch { actual, expected }
    }
}

impl CorpusStats {
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<8} {:>12} {:>10}", "task", "count", "share");
        for t in &self.tasks {
            let _ = writeln!(out, "{:<8} {:>12} {:>9.4}%", t.task.name(), t.count, 100.0 * t.proportion);
        }
        let _ = writeln!(out, "{:<8} {:>12}", "total", self.total);
        out
    }
}
