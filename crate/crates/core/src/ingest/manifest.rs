use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema::{validate_record, Split, TaskToken, UnifiedRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub task: TaskToken,
    pub dataset: String,
    pub split: Split,
    pub count: u64,
    pub path: String,
}

/// Accounting of a materialized corpus: one entry per (task, dataset, split).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {detail}")]
    ValidationFailure { file: String, line: usize, detail: String },
    #[error("({task}, {dataset}, {split}) appears in both {first} and {second}")]
    DuplicateEntry {
        task: TaskToken,
        dataset: String,
        split: Split,
        first: String,
        second: String,
    },
    #[error("invalid manifest JSON: {0}")]
    Json(#[from] serde_json::Error),
}

type GroupKey = (TaskToken, String, Split);

fn count_file(path: &Path) -> Result<BTreeMap<GroupKey, u64>, ManifestError> {
    let shown = path.display().to_string();
    let io_err = |source| ManifestError::Io {
        path: shown.clone(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io_err)?);
    let mut counts = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let fail = |detail: String| ManifestError::ValidationFailure {
            file: shown.clone(),
            line: i + 1,
            detail,
        };
        let r = UnifiedRecord::from_json_line(&line).map_err(|e| fail(e.to_string()))?;
        let report = validate_record(&r);
        if !report.is_ok() {
            return Err(fail(report.to_string()));
        }
        *counts.entry((r.task, r.dataset, r.split)).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Counts valid records per (task, dataset, split) across unified JSONL files.
/// Entries are sorted, so the result does not depend on the order of `paths`.
pub fn build_manifest<P: AsRef<Path> + Sync>(paths: &[P]) -> Result<CorpusManifest, ManifestError> {
    let per_file: Vec<(String, BTreeMap<GroupKey, u64>)> = paths
        .par_iter()
        .map(|p| Ok((p.as_ref().display().to_string(), count_file(p.as_ref())?)))
        .collect::<Result<_, ManifestError>>()?;

    let mut seen: BTreeMap<GroupKey, String> = BTreeMap::new();
    let mut entries = Vec::new();
    for (path, counts) in per_file {
        for ((task, dataset, split), count) in counts {
            let key = (task, dataset.clone(), split);
            if let Some(first) = seen.get(&key) {
                if *first != path {
                    let (a, b) = if *first < path { (first.clone(), path) } else { (path, first.clone()) };
                    return Err(ManifestError::DuplicateEntry {
                        task,
                        dataset,
                        split,
                        first: a,
                        second: b,
                    });
                }
                // Same file listed twice.
                continue;
            }
            seen.insert(key, path.clone());
            entries.push(ManifestEntry {
                task,
                dataset,
                split,
                count,
                path: path.clone(),
            });
        }
    }
    entries.sort_by(|a, b| (a.task, &a.dataset, a.split, &a.path).cmp(&(b.task, &b.dataset, b.split, &b.path)));
    Ok(CorpusManifest { entries })
}

impl CorpusManifest {
    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.count).sum()
    }

    pub fn from_json(s: &str) -> Result<Self, ManifestError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialization is infallible")
    }

    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Distinct files referenced by the manifest, sorted.
    pub fn paths(&self) -> Vec<PathBuf> {
        let mut p: Vec<PathBuf> = self.entries.iter().map(|e| PathBuf::from(&e.path)).collect();
        p.sort();
        p.dedup();
        p
    }

    pub fn filter_split(&self, split: Split) -> CorpusManifest {
        CorpusManifest {
            entries: self.entries.iter().filter(|e| e.split == split).cloned().collect(),
        }
    }
}
