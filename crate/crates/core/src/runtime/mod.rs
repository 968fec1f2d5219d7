//! Master–worker execution engine.
//!
//! [`run_scheme`] starts one master (rank 0, the calling thread) and
//! `num_tasks − 1` worker threads, drives the chosen scheme's protocol over
//! a [`Transport`], assembles the grid on the master and reports timings,
//! message counts and per-rank instrumentation.

mod protocol;
pub mod socket;
pub mod transport;
pub mod wire;

use std::fmt;
use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::image::{write_ppm, ColorMap, ImageError};
use crate::kernel::{ConfigError, IterationGrid, Iterations, Plane, RenderConfig};
use crate::partition::{PartitionError, PartitionPlan, Scheme};

pub use socket::SocketTransport;
pub use transport::{ChannelTransport, Counted, Endpoint, MessageCounters, Rank, Transport, TransportError, MASTER};

/// The master–worker wire vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WorkerMessage {
    /// Master → worker (FCFS): compute this row.
    RowAssignment { row: usize },
    /// Master → worker (FCFS): no rows left. `sentinel_row` exceeds the height.
    Terminate { sentinel_row: usize },
    /// Worker → master (FCFS): one computed row.
    RowResult { row: usize, cells: Vec<Iterations> },
    /// Worker → master (Naive, Alternating): the rank's whole block, rows in
    /// ascending order.
    BlockResult { rank: Rank, rows: Vec<Vec<Iterations>> },
}

impl WorkerMessage {
    /// Whether the message carries row traffic. Termination sentinels do not.
    pub fn is_payload(&self) -> bool {
        !matches!(self, WorkerMessage::Terminate { .. })
    }

    fn kind(&self) -> &'static str {
        match self {
            WorkerMessage::RowAssignment { .. } => "row assignment",
            WorkerMessage::Terminate { .. } => "terminate",
            WorkerMessage::RowResult { .. } => "row result",
            WorkerMessage::BlockResult { .. } => "block result",
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("serial runs use exactly one task, got {0}")]
    SerialTaskCount(usize),
    #[error("transport error on rank {rank}: {source}")]
    Transport { rank: Rank, source: TransportError },
    #[error("protocol error from rank {rank}: {detail}")]
    Protocol { rank: Rank, detail: String },
    #[error("rank {rank} failed: {reason}")]
    WorkerFailed { rank: Rank, reason: String },
    #[error("row hook failed on rank {rank}, row {row}: {reason}")]
    Hook { rank: Rank, row: usize, reason: String },
    #[error("writing image: {0}")]
    Image(#[from] ImageError),
}

impl RunError {
    fn transport(rank: Rank, source: TransportError) -> Self {
        match source {
            TransportError::PeerAborted { rank, reason } => RunError::WorkerFailed { rank, reason },
            source => RunError::Transport { rank, source },
        }
    }

    pub(crate) fn protocol(rank: Rank, detail: impl Into<String>) -> Self {
        RunError::Protocol { rank, detail: detail.into() }
    }
}

/// Called before a task computes a row, with `(rank, row)`. Used to inject
/// delays or failures.
pub type RowHook = Arc<dyn Fn(Rank, usize) -> Result<(), String> + Send + Sync>;

#[derive(Clone, Default)]
pub struct RunOptions {
    pub row_hook: Option<RowHook>,
}

impl RunOptions {
    pub fn with_row_hook<F>(mut self, hook: F) -> Self
    where
        F: Fn(Rank, usize) -> Result<(), String> + Send + Sync + 'static,
    {
        self.row_hook = Some(Arc::new(hook));
        self
    }
}

impl fmt::Debug for RunOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RunOptions").field("row_hook", &self.row_hook.is_some()).finish()
    }
}

/// Where the master writes the finished image.
pub struct OutputSink<'a> {
    pub writer: &'a mut dyn Write,
    pub colormap: ColorMap,
}

/// Per-rank and per-row instrumentation of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunStats {
    /// Rows computed by each rank.
    pub rows_per_rank: Vec<u64>,
    /// Time each rank spent computing rows (row hooks included).
    pub busy_per_rank: Vec<Duration>,
    /// How many times each row was computed across all tasks.
    pub computations_per_row: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub grid: IterationGrid,
    pub config: RenderConfig,
    pub scheme: Scheme,
    pub num_tasks: usize,
    /// From the start of computation until the master holds the full grid.
    pub compute_time: Duration,
    /// `compute_time` plus image encoding and writing.
    pub total_time: Duration,
    /// Payload messages; termination sentinels excluded.
    pub messages_sent: u64,
    /// Every message, sentinels included.
    pub messages_total: u64,
    pub stats: RunStats,
}

/// Shared counters behind [`RunStats`].
struct Tally {
    rows: Vec<AtomicU64>,
    busy_nanos: Vec<AtomicU64>,
    per_row: Vec<AtomicU32>,
}

impl Tally {
    fn new(num_tasks: usize, height: usize) -> Self {
        Tally {
            rows: (0..num_tasks).map(|_| AtomicU64::new(0)).collect(),
            busy_nanos: (0..num_tasks).map(|_| AtomicU64::new(0)).collect(),
            per_row: (0..height).map(|_| AtomicU32::new(0)).collect(),
        }
    }

    fn snapshot(&self) -> RunStats {
        RunStats {
            rows_per_rank: self.rows.iter().map(|a| a.load(Ordering::SeqCst)).collect(),
            busy_per_rank: self.busy_nanos.iter().map(|a| Duration::from_nanos(a.load(Ordering::SeqCst))).collect(),
            computations_per_row: self.per_row.iter().map(|a| a.load(Ordering::SeqCst)).collect(),
        }
    }
}

/// What one task needs to compute rows.
pub(crate) struct TaskContext<'a> {
    pub rank: Rank,
    pub plane: &'a Plane,
    hook: Option<&'a RowHook>,
    tally: &'a Tally,
}

impl TaskContext<'_> {
    pub(crate) fn config(&self) -> &RenderConfig {
        self.plane.config()
    }

    pub(crate) fn compute_into(&self, row: usize, out: &mut [Iterations]) -> Result<(), RunError> {
        let start = Instant::now();
        if let Some(hook) = self.hook {
            hook(self.rank, row).map_err(|reason| RunError::Hook { rank: self.rank, row, reason })?;
        }
        self.plane.compute_row_into(row, out)?;
        let nanos = start.elapsed().as_nanos().min(u64::MAX as u128) as u64;
        self.tally.rows[self.rank].fetch_add(1, Ordering::SeqCst);
        self.tally.busy_nanos[self.rank].fetch_add(nanos, Ordering::SeqCst);
        self.tally.per_row[row].fetch_add(1, Ordering::SeqCst);
        Ok(())
    }

    pub(crate) fn compute(&self, row: usize) -> Result<Vec<Iterations>, RunError> {
        let mut out = vec![0; self.config().width];
        self.compute_into(row, &mut out)?;
        Ok(out)
    }
}

/// Runs `scheme` with `num_tasks` tasks (master included) and returns the
/// assembled grid with its timings and message counts.
pub fn run_scheme<T: Transport>(
    scheme: Scheme,
    config: &RenderConfig,
    num_tasks: usize,
    transport: &T,
    output: Option<OutputSink<'_>>,
    options: &RunOptions,
) -> Result<RunResult, RunError> {
    let plane = Plane::new(config)?;
    if scheme == Scheme::Serial && num_tasks != 1 {
        return Err(RunError::SerialTaskCount(num_tasks));
    }
    let plan = PartitionPlan::new(scheme, config.height, num_tasks)?;
    let tally = Tally::new(num_tasks, config.height);
    let counters = Arc::new(MessageCounters::default());
    let endpoints = match scheme {
        Scheme::Serial => Vec::new(),
        _ => transport.endpoints(num_tasks).map_err(|source| RunError::Transport { rank: MASTER, source })?,
    };

    let start = Instant::now();
    let grid = if scheme == Scheme::Serial {
        let ctx = TaskContext { rank: MASTER, plane: &plane, hook: options.row_hook.as_ref(), tally: &tally };
        protocol::serial(&ctx)?
    } else {
        run_tasks(&plan, &plane, endpoints, &counters, options, &tally)?
    };
    let compute_time = start.elapsed();

    if let Some(sink) = output {
        write_ppm(&grid, sink.colormap, sink.writer)?;
    }
    let total_time = start.elapsed();

    Ok(RunResult {
        grid,
        config: *config,
        scheme,
        num_tasks,
        compute_time,
        total_time,
        messages_sent: counters.payload(),
        messages_total: counters.total(),
        stats: tally.snapshot(),
    })
}

/// [`run_scheme`] over in-process channels, without image output.
pub fn run(scheme: Scheme, config: &RenderConfig, num_tasks: usize) -> Result<RunResult, RunError> {
    run_scheme(scheme, config, num_tasks, &ChannelTransport, None, &RunOptions::default())
}

fn run_tasks<E: Endpoint + 'static>(
    plan: &PartitionPlan,
    plane: &Plane,
    endpoints: Vec<E>,
    counters: &Arc<MessageCounters>,
    options: &RunOptions,
    tally: &Tally,
) -> Result<IterationGrid, RunError> {
    let mut endpoints = endpoints.into_iter().map(|ep| Counted::new(ep, counters.clone()));
    let master = endpoints.next().ok_or_else(|| RunError::protocol(MASTER, "transport returned no endpoints"))?;
    let hook = options.row_hook.as_ref();

    thread::scope(|scope| {
        let handles: Vec<_> = endpoints
            .map(|mut ep| {
                scope.spawn(move || {
                    let rank = ep.rank();
                    let ctx = TaskContext { rank, plane, hook, tally };
                    let outcome = panic::catch_unwind(AssertUnwindSafe(|| protocol::worker(plan, &ctx, &mut ep)));
                    let result = match outcome {
                        Ok(result) => result,
                        Err(payload) => Err(RunError::WorkerFailed { rank, reason: panic_message(&payload) }),
                    };
                    if let Err(e) = &result {
                        ep.abort(&e.to_string());
                    }
                    result
                })
            })
            .collect();

        let master_result = {
            let mut ep = master;
            let ctx = TaskContext { rank: MASTER, plane, hook, tally };
            protocol::master(plan, &ctx, &mut ep)
            // endpoint dropped here so blocked workers unblock on failure
        };

        let worker_results: Vec<_> = handles
            .into_iter()
            .enumerate()
            .map(|(i, h)| {
                h.join().unwrap_or_else(|payload| {
                    Err(RunError::WorkerFailed { rank: i + 1, reason: panic_message(&payload) })
                })
            })
            .collect();

        let grid = master_result?;
        for result in worker_results {
            result?;
        }
        Ok(grid)
    })
}

fn panic_message(payload: &Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        format!("panicked: {s}")
    } else if let Some(s) = payload.downcast_ref::<String>() {
        format!("panicked: {s}")
    } else {
        "panicked".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::compute_grid_serial;
    use crate::partition::expected_message_count;

    fn config(width: usize, height: usize) -> RenderConfig {
        RenderConfig::new(width, height).unwrap().with_max_iterations(64).unwrap()
    }

    #[test]
    fn serial_matches_oracle_without_messages() {
        let cfg = config(20, 13);
        let result = run(Scheme::Serial, &cfg, 1).unwrap();
        assert_eq!(result.grid, compute_grid_serial(&cfg).unwrap().0);
        assert_eq!(result.messages_sent, 0);
        assert!(matches!(run(Scheme::Serial, &cfg, 2), Err(RunError::SerialTaskCount(2))));
    }

    #[test]
    fn every_scheme_matches_oracle_on_64x64() {
        let cfg = config(64, 64);
        let oracle = compute_grid_serial(&cfg).unwrap().0;
        for (scheme, expected) in [(Scheme::Naive, 3), (Scheme::Fcfs, 128), (Scheme::Alternating, 3)] {
            let result = run(scheme, &cfg, 4).unwrap();
            assert_eq!(result.grid, oracle, "{scheme}");
            assert_eq!(result.messages_sent, expected, "{scheme}");
            assert!(result.compute_time <= result.total_time);
        }
    }

    #[test]
    fn fcfs_three_rows_two_tasks() {
        let cfg = config(5, 3);
        let result = run(Scheme::Fcfs, &cfg, 2).unwrap();
        assert_eq!(result.messages_sent, 6);
        // one sentinel to the single worker
        assert_eq!(result.messages_total, 7);
        assert_eq!(result.stats.rows_per_rank, vec![0, 3]);
    }

    #[test]
    fn fcfs_more_workers_than_rows() {
        let cfg = config(5, 2);
        let result = run(Scheme::Fcfs, &cfg, 6).unwrap();
        assert_eq!(result.grid, compute_grid_serial(&cfg).unwrap().0);
        assert_eq!(result.messages_sent, 4);
        assert_eq!(result.messages_total, 4 + 5);
    }

    #[test]
    fn naive_remainder_block_on_last_worker() {
        let cfg = config(6, 10);
        let result = run(Scheme::Naive, &cfg, 4).unwrap();
        assert_eq!(result.stats.rows_per_rank, vec![2, 2, 2, 4]);
        assert_eq!(result.messages_sent, expected_message_count(Scheme::Naive, 10, 4).unwrap());
    }

    #[test]
    fn alternating_master_takes_remainder() {
        let cfg = config(6, 10);
        let result = run(Scheme::Alternating, &cfg, 4).unwrap();
        assert_eq!(result.stats.rows_per_rank, vec![4, 2, 2, 2]);
        assert_eq!(result.grid, compute_grid_serial(&cfg).unwrap().0);
    }

    #[test]
    fn single_task_static_schemes_send_nothing() {
        let cfg = config(7, 9);
        for scheme in [Scheme::Naive, Scheme::Alternating] {
            let result = run(scheme, &cfg, 1).unwrap();
            assert_eq!(result.messages_sent, 0);
            assert_eq!(result.grid, compute_grid_serial(&cfg).unwrap().0);
        }
    }

    #[test]
    fn invalid_task_counts() {
        let cfg = config(4, 3);
        assert!(matches!(run(Scheme::Fcfs, &cfg, 1), Err(RunError::Partition(_))));
        assert!(matches!(run(Scheme::Naive, &cfg, 4), Err(RunError::Partition(_))));
        assert!(matches!(run(Scheme::Naive, &cfg, 0), Err(RunError::Partition(_))));
    }

    #[test]
    fn worker_failure_names_rank() {
        let cfg = config(8, 16);
        let options =
            RunOptions::default().with_row_hook(|rank, _| if rank == 2 { Err("injected".into()) } else { Ok(()) });
        for scheme in Scheme::PARALLEL {
            let err = run_scheme(scheme, &cfg, 4, &ChannelTransport, None, &options).unwrap_err();
            match err {
                RunError::WorkerFailed { rank, reason } => {
                    assert_eq!(rank, 2, "{scheme}");
                    assert!(reason.contains("injected"), "{reason}");
                }
                other => panic!("{scheme}: unexpected {other}"),
            }
        }
    }

    #[test]
    fn worker_panic_is_reported() {
        let cfg = config(8, 16);
        let options = RunOptions::default().with_row_hook(|rank, row| {
            if rank == 1 && row > 2 {
                panic!("worker exploded");
            }
            Ok(())
        });
        let err = run_scheme(Scheme::Fcfs, &cfg, 3, &ChannelTransport, None, &options).unwrap_err();
        assert!(matches!(err, RunError::WorkerFailed { rank: 1, .. }), "{err}");
    }

    #[test]
    fn sink_receives_ppm() {
        let cfg = config(4, 4);
        let mut buf = Vec::new();
        let sink = OutputSink { writer: &mut buf, colormap: ColorMap::Grayscale };
        let result = run_scheme(Scheme::Naive, &cfg, 2, &ChannelTransport, Some(sink), &RunOptions::default()).unwrap();
        assert!(buf.starts_with(b"P6\n4 4\n255\n"));
        assert_eq!(buf.len(), 11 + 3 * 16);
        assert!(result.compute_time <= result.total_time);
    }
}
