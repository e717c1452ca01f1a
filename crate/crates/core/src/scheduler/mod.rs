//! Task-iterative scheduling.
//!
//! An epoch is a sequence of rounds. In every round each task contributes one
//! block of `step` samples, in `task_order`. The number of rounds is
//! `ceil(max_count / step)`, so the largest task is swept completely and every
//! task gets the same number of blocks. Each task draws from its own seeded
//! shuffle of `0..count`, reshuffling whenever that order is exhausted.

pub mod stream;

use std::collections::HashSet;
use std::fmt;
use std::hash::Hash;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema::TaskToken;
use crate::seed::derive_seed;

pub use stream::{BatchStream, Checkpoint, CorpusIndex, MiniBatch, StreamError};

/// Anything usable as a task identity. The display form seeds the task's shuffle.
pub trait TaskKey: Clone + Eq + Hash + fmt::Display {}

impl<T: Clone + Eq + Hash + fmt::Display> TaskKey for T {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskDescriptor<K = TaskToken> {
    pub key: K,
    pub count: u64,
    /// Manifest entry indices backing this task, in ordinal order.
    #[serde(default)]
    pub sources: Vec<usize>,
}

impl<K> TaskDescriptor<K> {
    pub fn new(key: K, count: u64) -> Self {
        TaskDescriptor {
            key,
            count,
            sources: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulerConfig<K = TaskToken> {
    /// Samples per task block.
    pub step: usize,
    pub seed: u64,
    pub epochs: usize,
    pub task_order: Vec<K>,
}

pub const DEFAULT_STEP: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block<K = TaskToken> {
    pub task: K,
    pub ordinals: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochSchedule<K = TaskToken> {
    pub epoch: usize,
    pub rounds: usize,
    pub blocks: Vec<Block<K>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("task set is empty")]
    EmptyTaskSet,
    #[error("step must be at least 1")]
    ZeroStep,
    #[error("epochs must be at least 1")]
    ZeroEpochs,
    #[error("task {0} has no samples")]
    EmptyTask(String),
    #[error("task {0} listed more than once")]
    DuplicateTask(String),
    #[error("task_order does not cover the task set exactly: {0}")]
    OrderMismatch(String),
    #[error("position (epoch {epoch}, block {block}) is outside the schedule")]
    OutOfRange { epoch: usize, block: usize },
}

/// Infinite sequence of ordinals for one task: successive independent
/// shuffles of `0..count`.
#[derive(Debug, Clone)]
struct CycleSampler {
    count: u64,
    rng: ChaCha8Rng,
    order: Vec<u64>,
    pos: usize,
}

impl CycleSampler {
    fn new(count: u64, seed: u64) -> Self {
        CycleSampler {
            count,
            rng: ChaCha8Rng::seed_from_u64(seed),
            order: Vec::new(),
            pos: 0,
        }
    }

    fn next(&mut self) -> u64 {
        if self.pos == self.order.len() {
            self.order.clear();
            self.order.extend(0..self.count);
            self.order.shuffle(&mut self.rng);
            self.pos = 0;
        }
        let v = self.order[self.pos];
        self.pos += 1;
        v
    }

    fn take(&mut self, n: usize) -> Vec<u64> {
        (0..n).map(|_| self.next()).collect()
    }
}

fn check<K: TaskKey>(tasks: &[TaskDescriptor<K>], cfg: &SchedulerConfig<K>) -> Result<(), ScheduleError> {
    if tasks.is_empty() {
        return Err(ScheduleError::EmptyTaskSet);
    }
    if cfg.step == 0 {
        return Err(ScheduleError::ZeroStep);
    }
    if cfg.epochs == 0 {
        return Err(ScheduleError::ZeroEpochs);
    }
    let mut keys = HashSet::new();
    for t in tasks {
        if t.count == 0 {
            return Err(ScheduleError::EmptyTask(t.key.to_string()));
        }
        if !keys.insert(&t.key) {
            return Err(ScheduleError::DuplicateTask(t.key.to_string()));
        }
    }
    let mut ordered = HashSet::new();
    for k in &cfg.task_order {
        if !ordered.insert(k) {
            return Err(ScheduleError::DuplicateTask(k.to_string()));
        }
        if !keys.contains(k) {
            return Err(ScheduleError::OrderMismatch(format!("{k} has no descriptor")));
        }
    }
    if ordered.len() != keys.len() {
        return Err(ScheduleError::OrderMismatch(format!(
            "{} task(s) missing from task_order",
            keys.len() - ordered.len()
        )));
    }
    Ok(())
}

/// Lazy block generator for one epoch; yields blocks in plan order.
#[derive(Debug, Clone)]
pub struct EpochPlanner<K = TaskToken> {
    epoch: usize,
    rounds: usize,
    step: usize,
    keys: Vec<K>,
    samplers: Vec<CycleSampler>,
    next_block: usize,
}

impl<K: TaskKey> EpochPlanner<K> {
    pub fn new(tasks: &[TaskDescriptor<K>], cfg: &SchedulerConfig<K>, epoch: usize) -> Result<Self, ScheduleError> {
        check(tasks, cfg)?;
        let max = tasks.iter().map(|t| t.count).max().unwrap_or(0);
        let rounds = max.div_ceil(cfg.step as u64) as usize;
        let epoch_bytes = (epoch as u64).to_le_bytes();
        let samplers = cfg
            .task_order
            .iter()
            .map(|k| {
                let count = tasks.iter().find(|t| &t.key == k).map(|t| t.count).unwrap_or(0);
                let name = k.to_string();
                let seed = derive_seed(cfg.seed, &[b"schedule", &epoch_bytes, name.as_bytes()]);
                CycleSampler::new(count, seed)
            })
            .collect();
        Ok(EpochPlanner {
            epoch,
            rounds,
            step: cfg.step,
            keys: cfg.task_order.clone(),
            samplers,
            next_block: 0,
        })
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn total_blocks(&self) -> usize {
        self.rounds * self.keys.len()
    }

    /// Index of the block the next call to `next` returns.
    pub fn next_index(&self) -> usize {
        self.next_block
    }
}

impl<K: TaskKey> Iterator for EpochPlanner<K> {
    type Item = Block<K>;

    fn next(&mut self) -> Option<Block<K>> {
        if self.next_block >= self.total_blocks() {
            return None;
        }
        let i = self.next_block % self.keys.len();
        self.next_block += 1;
        Some(Block {
            task: self.keys[i].clone(),
            ordinals: self.samplers[i].take(self.step),
        })
    }
}

/// Materializes the full schedule of one epoch.
pub fn plan_epoch<K: TaskKey>(tasks: &[TaskDescriptor<K>], cfg: &SchedulerConfig<K>, epoch: usize) -> Result<EpochSchedule<K>, ScheduleError> {
    let planner = EpochPlanner::new(tasks, cfg, epoch)?;
    let rounds = planner.rounds();
    Ok(EpochSchedule {
        epoch,
        rounds,
        blocks: planner.collect(),
    })
}

/// Position-aware walk over all epochs of a configuration. The position is
/// always the next block to produce; after the last block it is
/// `(epochs, 0)`.
#[derive(Debug, Clone)]
pub struct ScheduleCursor<K = TaskToken> {
    tasks: Vec<TaskDescriptor<K>>,
    cfg: SchedulerConfig<K>,
    epoch: usize,
    planner: Option<EpochPlanner<K>>,
}

/// A block together with where it sits in the stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacedBlock<K = TaskToken> {
    pub epoch: usize,
    pub block: usize,
    #[serde(flatten)]
    pub inner: Block<K>,
}

impl<K: TaskKey> ScheduleCursor<K> {
    pub fn new(tasks: &[TaskDescriptor<K>], cfg: &SchedulerConfig<K>) -> Result<Self, ScheduleError> {
        Self::at(tasks, cfg, 0, 0)
    }

    /// Cursor positioned at `(epoch, block)`. Blocks before it are drawn and
    /// discarded so every task sampler is in the same state as after an
    /// uninterrupted run.
    pub fn at(tasks: &[TaskDescriptor<K>], cfg: &SchedulerConfig<K>, epoch: usize, block: usize) -> Result<Self, ScheduleError> {
        check(tasks, cfg)?;
        let mut c = ScheduleCursor {
            tasks: tasks.to_vec(),
            cfg: cfg.clone(),
            epoch,
            planner: None,
        };
        if epoch > cfg.epochs || (epoch == cfg.epochs && block > 0) {
            return Err(ScheduleError::OutOfRange { epoch, block });
        }
        if epoch < cfg.epochs {
            let mut p = EpochPlanner::new(tasks, cfg, epoch)?;
            if block >= p.total_blocks() {
                return Err(ScheduleError::OutOfRange { epoch, block });
            }
            for _ in 0..block {
                p.next();
            }
            c.planner = Some(p);
        }
        Ok(c)
    }

    pub fn position(&self) -> (usize, usize) {
        match &self.planner {
            Some(p) if p.next_index() >= p.total_blocks() => (self.epoch + 1, 0),
            Some(p) => (self.epoch, p.next_index()),
            None => (self.epoch, 0),
        }
    }

    pub fn config(&self) -> &SchedulerConfig<K> {
        &self.cfg
    }

    pub fn tasks(&self) -> &[TaskDescriptor<K>] {
        &self.tasks
    }

    /// Blocks per epoch.
    pub fn blocks_per_epoch(&self) -> usize {
        let max = self.tasks.iter().map(|t| t.count).max().unwrap_or(0);
        max.div_ceil(self.cfg.step as u64) as usize * self.tasks.len()
    }
}

impl<K: TaskKey> Iterator for ScheduleCursor<K> {
    type Item = PlacedBlock<K>;

    fn next(&mut self) -> Option<PlacedBlock<K>> {
        loop {
            let planner = self.planner.as_mut()?;
            let block = planner.next_index();
            if let Some(inner) = planner.next() {
                return Some(PlacedBlock {
                    epoch: self.epoch,
                    block,
                    inner,
                });
            }
            self.epoch += 1;
            self.planner = if self.epoch < self.cfg.epochs {
                Some(EpochPlanner::new(&self.tasks, &self.cfg, self.epoch).expect("configuration already checked"))
            } else {
                None
            };
        }
    }
}

impl<K: TaskKey> SchedulerConfig<K> {
    /// Config with the given order, default step and a single epoch.
    pub fn with_order(task_order: Vec<K>) -> Self {
        SchedulerConfig {
            step: DEFAULT_STEP,
            seed: 0,
            epochs: 1,
            task_order,
        }
    }
}
