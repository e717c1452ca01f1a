//! Materializes schedules into record batches read from unified JSONL files.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::os::unix::fs::FileExt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{ScheduleCursor, ScheduleError, SchedulerConfig, TaskDescriptor};
use crate::ingest::CorpusManifest;
use crate::schema::{Split, TaskToken, UnifiedRecord};

#[derive(Debug, Error)]
pub enum StreamError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("manifest does not match corpus: {0}")]
    ManifestMismatch(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} at byte {offset}: {detail}")]
    Corrupt { path: String, offset: u64, detail: String },
    #[error("checkpoint does not belong to this configuration: {0}")]
    CheckpointMismatch(String),
}

/// One scheduled block with its records, in ordinal order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiniBatch {
    pub epoch: usize,
    pub block: usize,
    pub task: TaskToken,
    pub records: Vec<UnifiedRecord>,
}

/// Position of the next block to emit. A stream resumed from a checkpoint
/// continues exactly as the uninterrupted stream would have.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub epoch: usize,
    pub block: usize,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Debug, Clone, Copy)]
struct Location {
    file: u32,
    offset: u64,
    len: u32,
}

#[derive(Deserialize)]
struct RecordKey {
    task: TaskToken,
    dataset: String,
    split: Split,
}

/// Byte-offset index of the records of one split, grouped per task. A task's
/// ordinal space is its manifest entries concatenated in manifest order, each
/// entry's records in file order.
#[derive(Debug)]
pub struct CorpusIndex {
    files: Vec<(PathBuf, File)>,
    tasks: Vec<TaskDescriptor<TaskToken>>,
    locations: HashMap<TaskToken, Vec<Location>>,
}

type EntryKey = (TaskToken, String, Split);

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> StreamError + '_ {
    move |source| StreamError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn scan_file(path: &Path, file_idx: u32, known: &HashMap<EntryKey, usize>) -> Result<Vec<(usize, Location)>, StreamError> {
    let mut reader = BufReader::with_capacity(1 << 20, File::open(path).map_err(io_err(path))?);
    let mut out = Vec::new();
    let mut buf = Vec::new();
    let mut offset = 0u64;
    loop {
        buf.clear();
        let n = reader.read_until(b'\n', &mut buf).map_err(io_err(path))?;
        if n == 0 {
            break;
        }
        let line_offset = offset;
        offset += n as u64;
        let line = buf.trim_ascii_end();
        if line.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        let key: RecordKey = serde_json::from_slice(line).map_err(|e| StreamError::Corrupt {
            path: path.display().to_string(),
            offset: line_offset,
            detail: e.to_string(),
        })?;
        let entry_key = (key.task, key.dataset, key.split);
        let Some(&entry) = known.get(&entry_key) else {
            return Err(StreamError::ManifestMismatch(format!(
                "{} holds ({}, {}, {}) which the manifest does not list for that file",
                path.display(),
                entry_key.0.name(),
                entry_key.1,
                entry_key.2
            )));
        };
        out.push((
            entry,
            Location {
                file: file_idx,
                offset: line_offset,
                len: line.len() as u32,
            },
        ));
    }
    Ok(out)
}

impl CorpusIndex {
    /// Scans every file referenced by `manifest` and indexes the records of
    /// `split`. Fails if any file's per-entry counts differ from the manifest.
    pub fn open(manifest: &CorpusManifest, split: Split) -> Result<Self, StreamError> {
        let paths = manifest.paths();
        let mut per_file: Vec<HashMap<EntryKey, usize>> = vec![HashMap::new(); paths.len()];
        for (i, e) in manifest.entries.iter().enumerate() {
            let f = paths.iter().position(|p| p == Path::new(&e.path)).expect("path listed");
            per_file[f].insert((e.task, e.dataset.clone(), e.split), i);
        }
        let scanned: Vec<Vec<(usize, Location)>> = paths
            .par_iter()
            .enumerate()
            .map(|(i, p)| scan_file(p, i as u32, &per_file[i]))
            .collect::<Result<_, _>>()?;

        let mut by_entry: Vec<Vec<Location>> = vec![Vec::new(); manifest.entries.len()];
        for file in scanned {
            for (entry, loc) in file {
                by_entry[entry].push(loc);
            }
        }
        for (e, locs) in manifest.entries.iter().zip(&by_entry) {
            if locs.len() as u64 != e.count {
                return Err(StreamError::ManifestMismatch(format!(
                    "({}, {}, {}) in {}: manifest says {}, file holds {}",
                    e.task.name(),
                    e.dataset,
                    e.split,
                    e.path,
                    e.count,
                    locs.len()
                )));
            }
        }

        let mut grouped: BTreeMap<TaskToken, (Vec<usize>, Vec<Location>)> = BTreeMap::new();
        for (i, e) in manifest.entries.iter().enumerate() {
            if e.split != split || e.count == 0 {
                continue;
            }
            let g = grouped.entry(e.task).or_default();
            g.0.push(i);
            g.1.extend_from_slice(&by_entry[i]);
        }
        let mut tasks = Vec::new();
        let mut locations = HashMap::new();
        for (task, (sources, locs)) in grouped {
            tasks.push(TaskDescriptor {
                key: task,
                count: locs.len() as u64,
                sources,
            });
            locations.insert(task, locs);
        }
        let files = paths
            .into_iter()
            .map(|p| {
                let f = File::open(&p).map_err(io_err(&p))?;
                Ok((p, f))
            })
            .collect::<Result<_, StreamError>>()?;
        Ok(CorpusIndex { files, tasks, locations })
    }

    /// Tasks present in the indexed split, in canonical task order.
    pub fn tasks(&self) -> &[TaskDescriptor<TaskToken>] {
        &self.tasks
    }

    pub fn default_order(&self) -> Vec<TaskToken> {
        self.tasks.iter().map(|t| t.key).collect()
    }

    pub fn read(&self, task: TaskToken, ordinal: u64) -> Result<UnifiedRecord, StreamError> {
        let loc = self
            .locations
            .get(&task)
            .and_then(|l| l.get(ordinal as usize))
            .ok_or_else(|| StreamError::ManifestMismatch(format!("no ordinal {ordinal} for task {}", task.name())))?;
        let (path, file) = &self.files[loc.file as usize];
        let mut buf = vec![0u8; loc.len as usize];
        file.read_exact_at(&mut buf, loc.offset).map_err(io_err(path))?;
        let corrupt = |detail: String| StreamError::Corrupt {
            path: path.display().to_string(),
            offset: loc.offset,
            detail,
        };
        let line = std::str::from_utf8(&buf).map_err(|e| corrupt(e.to_string()))?;
        UnifiedRecord::from_json_line(line).map_err(|e| corrupt(e.to_string()))
    }

    fn read_block(&self, task: TaskToken, ordinals: &[u64]) -> Result<Vec<UnifiedRecord>, StreamError> {
        ordinals.par_iter().map(|&o| self.read(task, o)).collect()
    }
}

/// Digest identifying the schedule a checkpoint belongs to.
pub fn config_hash(cfg: &SchedulerConfig<TaskToken>, tasks: &[TaskDescriptor<TaskToken>]) -> String {
    let mut h = Sha256::new();
    h.update((cfg.step as u64).to_le_bytes());
    h.update(cfg.seed.to_le_bytes());
    h.update((cfg.epochs as u64).to_le_bytes());
    for k in &cfg.task_order {
        h.update(k.name().as_bytes());
        h.update([0]);
    }
    h.update([0xff]);
    for t in tasks {
        h.update(t.key.name().as_bytes());
        h.update([0]);
        h.update(t.count.to_le_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

/// Block-by-block producer of mini-batches over all configured epochs.
pub struct BatchStream<'a> {
    index: &'a CorpusIndex,
    cursor: ScheduleCursor<TaskToken>,
    hash: String,
    failed: bool,
}

impl<'a> BatchStream<'a> {
    pub fn new(index: &'a CorpusIndex, cfg: SchedulerConfig<TaskToken>) -> Result<Self, StreamError> {
        Ok(BatchStream {
            index,
            hash: config_hash(&cfg, index.tasks()),
            cursor: ScheduleCursor::new(index.tasks(), &cfg)?,
            failed: false,
        })
    }

    pub fn resume(index: &'a CorpusIndex, cfg: SchedulerConfig<TaskToken>, ck: &Checkpoint) -> Result<Self, StreamError> {
        if ck.seed != cfg.seed {
            return Err(StreamError::CheckpointMismatch(format!("seed {} != {}", ck.seed, cfg.seed)));
        }
        let hash = config_hash(&cfg, index.tasks());
        if ck.config_hash != hash {
            return Err(StreamError::CheckpointMismatch(format!("config hash {} != {hash}", ck.config_hash)));
        }
        let cursor = ScheduleCursor::at(index.tasks(), &cfg, ck.epoch, ck.block)
            .map_err(|e| StreamError::CheckpointMismatch(e.to_string()))?;
        Ok(BatchStream {
            index,
            cursor,
            hash,
            failed: false,
        })
    }

    pub fn config_hash(&self) -> &str {
        &self.hash
    }

    pub fn checkpoint(&self) -> Checkpoint {
        let (epoch, block) = self.cursor.position();
        Checkpoint {
            epoch,
            block,
            seed: self.cursor.config().seed,
            config_hash: self.hash.clone(),
        }
    }
}

impl Iterator for BatchStream<'_> {
    type Item = Result<MiniBatch, StreamError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let b = self.cursor.next()?;
        match self.index.read_block(b.inner.task, &b.inner.ordinals) {
            Ok(records) => Some(Ok(MiniBatch {
                epoch: b.epoch,
                block: b.block,
                task: b.inner.task,
                records,
            })),
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}
