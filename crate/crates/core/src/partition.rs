//! Row-ownership plans for the partition schemes and their message-count
//! formulas. Nothing in here communicates.
//!
//! Rows are 0-based and `num_tasks` counts every task, master (rank 0)
//! included. All divisions are floor divisions.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("number of tasks must be at least 1")]
    NoTasks,
    #[error("{scheme} needs at least {required} tasks, got {num_tasks}")]
    TooFewTasks { scheme: Scheme, required: usize, num_tasks: usize },
    #[error("{scheme} needs at least as many rows as tasks ({height} rows, {num_tasks} tasks)")]
    TooFewRows { scheme: Scheme, height: usize, num_tasks: usize },
    #[error("rank {rank} out of range for {num_tasks} tasks")]
    RankOutOfRange { rank: usize, num_tasks: usize },
    #[error("unknown scheme '{0}' (expected serial, naive, fcfs or alternating)")]
    UnknownScheme(String),
}

/// A row partition scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Serial,
    Naive,
    Fcfs,
    Alternating,
}

impl Scheme {
    pub const PARALLEL: [Scheme; 3] = [Scheme::Naive, Scheme::Fcfs, Scheme::Alternating];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Serial => "serial",
            Scheme::Naive => "naive",
            Scheme::Fcfs => "fcfs",
            Scheme::Alternating => "alternating",
        }
    }

    /// Smallest legal task count. FCFS needs one worker besides the master.
    pub fn min_tasks(self) -> usize {
        match self {
            Scheme::Fcfs => 2,
            _ => 1,
        }
    }

    /// Whether row ownership is fixed before the run starts.
    pub fn is_static(self) -> bool {
        !matches!(self, Scheme::Fcfs)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Scheme {
    type Err = PartitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "serial" => Ok(Scheme::Serial),
            "naive" => Ok(Scheme::Naive),
            "fcfs" => Ok(Scheme::Fcfs),
            "alternating" | "alternate" | "alternative" => Ok(Scheme::Alternating),
            _ => Err(PartitionError::UnknownScheme(s.to_string())),
        }
    }
}

/// Rows owned by one rank in a static plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankRows {
    /// Inclusive `[start, end]`.
    Contiguous { start: usize, end: usize },
    /// `first, first + stride, …` strictly below `limit`.
    Strided { first: usize, stride: usize, limit: usize },
}

impl RankRows {
    pub fn len(&self) -> usize {
        match *self {
            RankRows::Contiguous { start, end } => end + 1 - start,
            RankRows::Strided { first, stride, limit } => {
                if first >= limit {
                    0
                } else {
                    (limit - first).div_ceil(stride)
                }
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Rows in ascending order.
    pub fn iter(&self) -> Box<dyn Iterator<Item = usize> + Send + '_> {
        match *self {
            RankRows::Contiguous { start, end } => Box::new(start..=end),
            RankRows::Strided { first, stride, limit } => Box::new((first..limit).step_by(stride)),
        }
    }

    /// Position of `row` within this rank's ascending row list.
    pub fn position_of(&self, row: usize) -> Option<usize> {
        match *self {
            RankRows::Contiguous { start, end } => (start..=end).contains(&row).then(|| row - start),
            RankRows::Strided { first, stride, limit } => {
                (row >= first && row < limit && (row - first).is_multiple_of(stride)).then(|| (row - first) / stride)
            }
        }
    }
}

/// Per-rank row assignments for one scheme, height and task count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    scheme: Scheme,
    num_tasks: usize,
    height: usize,
    /// One entry per rank for static schemes; empty for FCFS.
    assignments: Vec<RankRows>,
    /// Trailing rows the master computes after its strided share.
    remainder: Option<RangeInclusive<usize>>,
}

impl PartitionPlan {
    pub fn new(scheme: Scheme, height: usize, num_tasks: usize) -> Result<Self, PartitionError> {
        match scheme {
            Scheme::Serial => serial_plan(height),
            Scheme::Naive => naive_plan(height, num_tasks),
            Scheme::Fcfs => fcfs_plan(height, num_tasks),
            Scheme::Alternating => alternating_plan(height, num_tasks),
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn num_tasks(&self) -> usize {
        self.num_tasks
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn assignments(&self) -> &[RankRows] {
        &self.assignments
    }

    /// The block a rank computes and, for workers, ships to the master.
    /// `None` for FCFS and for ranks out of range.
    pub fn rank_rows(&self, rank: usize) -> Option<&RankRows> {
        self.assignments.get(rank)
    }

    pub fn remainder(&self) -> Option<RangeInclusive<usize>> {
        self.remainder.clone()
    }

    /// Every row a rank computes, remainder included, in the order it
    /// computes them. Empty for FCFS.
    pub fn owned_rows(&self, rank: usize) -> Vec<usize> {
        let mut rows: Vec<usize> = self.rank_rows(rank).map(|r| r.iter().collect()).unwrap_or_default();
        if rank == 0 {
            if let Some(rem) = self.remainder() {
                rows.extend(rem);
            }
        }
        rows
    }

    /// Rank that statically owns `row`, if any.
    pub fn owner_of(&self, row: usize) -> Option<usize> {
        if row >= self.height || !self.scheme.is_static() {
            return None;
        }
        if self.remainder.as_ref().is_some_and(|r| r.contains(&row)) {
            return Some(0);
        }
        match self.scheme {
            Scheme::Alternating => Some(row % self.num_tasks),
            _ => self.assignments.iter().position(|a| a.position_of(row).is_some()),
        }
    }
}

/// `⌊height / num_tasks⌋`.
pub fn rows_per_task(height: usize, num_tasks: usize) -> Result<usize, PartitionError> {
    if num_tasks == 0 {
        return Err(PartitionError::NoTasks);
    }
    Ok(height / num_tasks)
}

fn check_static(scheme: Scheme, height: usize, num_tasks: usize) -> Result<usize, PartitionError> {
    let per = rows_per_task(height, num_tasks)?;
    if height < num_tasks {
        return Err(PartitionError::TooFewRows { scheme, height, num_tasks });
    }
    Ok(per)
}

fn serial_plan(height: usize) -> Result<PartitionPlan, PartitionError> {
    check_static(Scheme::Serial, height, 1)?;
    Ok(PartitionPlan {
        scheme: Scheme::Serial,
        num_tasks: 1,
        height,
        assignments: vec![RankRows::Contiguous { start: 0, end: height - 1 }],
        remainder: None,
    })
}

/// Contiguous blocks: rank `r` owns `[per·r, per·(r+1) − 1]` with
/// `per = ⌊height/N⌋`; the last rank also takes the `height mod N` leftover
/// rows.
pub fn naive_plan(height: usize, num_tasks: usize) -> Result<PartitionPlan, PartitionError> {
    let per = check_static(Scheme::Naive, height, num_tasks)?;
    let leftover = height % num_tasks;
    let assignments = (0..num_tasks)
        .map(|r| {
            let start = per * r;
            let mut end = per * (r + 1) - 1;
            if r == num_tasks - 1 {
                end += leftover;
            }
            RankRows::Contiguous { start, end }
        })
        .collect();
    Ok(PartitionPlan { scheme: Scheme::Naive, num_tasks, height, assignments, remainder: None })
}

/// Interleaved rows: rank `r` owns `{r, r+N, r+2N, …}` below
/// `B = ⌊height/N⌋·N`; the master additionally owns `[B, height)`.
pub fn alternating_plan(height: usize, num_tasks: usize) -> Result<PartitionPlan, PartitionError> {
    let per = check_static(Scheme::Alternating, height, num_tasks)?;
    let limit = per * num_tasks;
    let assignments = (0..num_tasks).map(|r| RankRows::Strided { first: r, stride: num_tasks, limit }).collect();
    let remainder = (limit < height).then(|| limit..=height - 1);
    Ok(PartitionPlan { scheme: Scheme::Alternating, num_tasks, height, assignments, remainder })
}

/// FCFS has no static ownership; the plan only records the row count.
pub fn fcfs_plan(height: usize, num_tasks: usize) -> Result<PartitionPlan, PartitionError> {
    if num_tasks == 0 {
        return Err(PartitionError::NoTasks);
    }
    if num_tasks < 2 {
        return Err(PartitionError::TooFewTasks { scheme: Scheme::Fcfs, required: 2, num_tasks });
    }
    Ok(PartitionPlan { scheme: Scheme::Fcfs, num_tasks, height, assignments: Vec::new(), remainder: None })
}

/// Payload messages a run exchanges: `N − 1` for the static schemes (one
/// block per worker), `2·height` for FCFS (one assignment and one result per
/// row, termination sentinels excluded), zero for serial.
pub fn expected_message_count(scheme: Scheme, height: usize, num_tasks: usize) -> Result<u64, PartitionError> {
    if num_tasks == 0 {
        return Err(PartitionError::NoTasks);
    }
    match scheme {
        Scheme::Serial => Ok(0),
        Scheme::Naive | Scheme::Alternating => Ok(num_tasks as u64 - 1),
        Scheme::Fcfs if num_tasks < 2 => Err(PartitionError::TooFewTasks { scheme, required: 2, num_tasks }),
        Scheme::Fcfs => Ok(height as u64 * 2),
    }
}
