//! Master and worker routines for each scheme.

use std::collections::VecDeque;

use super::transport::{Endpoint, Rank, MASTER};
use super::{RunError, TaskContext, WorkerMessage};
use crate::kernel::{IterationGrid, Iterations, RenderConfig};
use crate::partition::{PartitionPlan, RankRows, Scheme};

pub(crate) fn serial(ctx: &TaskContext<'_>) -> Result<IterationGrid, RunError> {
    let mut grid = IterationGrid::blank(ctx.config())?;
    for row in 0..ctx.config().height {
        ctx.compute_into(row, grid.row_mut(row))?;
    }
    Ok(grid)
}

pub(crate) fn master<E: Endpoint>(
    plan: &PartitionPlan,
    ctx: &TaskContext<'_>,
    ep: &mut E,
) -> Result<IterationGrid, RunError> {
    match plan.scheme() {
        Scheme::Serial => serial(ctx),
        Scheme::Naive => naive_master(plan, ctx, ep),
        Scheme::Alternating => alternating_master(plan, ctx, ep),
        Scheme::Fcfs => fcfs_master(plan, ctx, ep),
    }
}

pub(crate) fn worker<E: Endpoint>(plan: &PartitionPlan, ctx: &TaskContext<'_>, ep: &mut E) -> Result<(), RunError> {
    match plan.scheme() {
        Scheme::Naive | Scheme::Alternating => static_worker(plan, ctx, ep),
        Scheme::Fcfs => fcfs_worker(ctx, ep),
        Scheme::Serial => Err(RunError::protocol(ctx.rank, "serial runs have no workers")),
    }
}

fn rank_rows(plan: &PartitionPlan, rank: Rank) -> Result<&RankRows, RunError> {
    plan.rank_rows(rank).ok_or_else(|| RunError::protocol(rank, "rank has no assignment in the plan"))
}

/// Checks a row received from `rank` against the configuration.
fn check_row(rank: Rank, row: usize, cells: &[Iterations], config: &RenderConfig) -> Result<(), RunError> {
    if cells.len() != config.width {
        return Err(RunError::protocol(
            rank,
            format!("row {row} has {} cells, expected {}", cells.len(), config.width),
        ));
    }
    if let Some(&bad) = cells.iter().find(|&&c| c == 0 || c > config.max_iterations) {
        return Err(RunError::protocol(
            rank,
            format!("row {row} holds iteration count {bad} outside [1, {}]", config.max_iterations),
        ));
    }
    Ok(())
}

/// Receives and validates the block a static-scheme worker owes the master.
fn receive_block<E: Endpoint>(
    plan: &PartitionPlan,
    ctx: &TaskContext<'_>,
    ep: &mut E,
    rank: Rank,
) -> Result<Vec<Vec<Iterations>>, RunError> {
    let expected = rank_rows(plan, rank)?;
    match ep.recv_from(rank).map_err(|e| RunError::transport(MASTER, e))? {
        WorkerMessage::BlockResult { rank: sender, rows } => {
            if sender != rank {
                return Err(RunError::protocol(rank, format!("block result claims rank {sender}")));
            }
            if rows.len() != expected.len() {
                return Err(RunError::protocol(
                    rank,
                    format!("block result carries {} rows, plan assigns {}", rows.len(), expected.len()),
                ));
            }
            for (row, cells) in expected.iter().zip(&rows) {
                check_row(rank, row, cells, ctx.config())?;
            }
            Ok(rows)
        }
        other => Err(RunError::protocol(rank, format!("expected block result, got {}", other.kind()))),
    }
}

fn static_worker<E: Endpoint>(plan: &PartitionPlan, ctx: &TaskContext<'_>, ep: &mut E) -> Result<(), RunError> {
    let rows = rank_rows(plan, ctx.rank)?.iter().map(|row| ctx.compute(row)).collect::<Result<Vec<_>, _>>()?;
    ep.send(MASTER, WorkerMessage::BlockResult { rank: ctx.rank, rows }).map_err(|e| RunError::transport(ctx.rank, e))
}

/// Master computes its contiguous block straight into the grid, then
/// collects each worker's block in ascending rank order.
fn naive_master<E: Endpoint>(
    plan: &PartitionPlan,
    ctx: &TaskContext<'_>,
    ep: &mut E,
) -> Result<IterationGrid, RunError> {
    let mut grid = IterationGrid::blank(ctx.config())?;
    for row in rank_rows(plan, MASTER)?.iter() {
        ctx.compute_into(row, grid.row_mut(row))?;
    }
    for rank in 1..plan.num_tasks() {
        let block = receive_block(plan, ctx, ep, rank)?;
        for (row, cells) in rank_rows(plan, rank)?.iter().zip(block) {
            grid.row_mut(row).copy_from_slice(&cells);
        }
    }
    Ok(grid)
}

/// Master computes rows `0, N, 2N, …`, then the trailing remainder, then
/// gathers the workers' blocks and interleaves them: row `q` of the strided
/// region is entry `q / N` of rank `q mod N`'s block.
fn alternating_master<E: Endpoint>(
    plan: &PartitionPlan,
    ctx: &TaskContext<'_>,
    ep: &mut E,
) -> Result<IterationGrid, RunError> {
    let n = plan.num_tasks();
    let own = rank_rows(plan, MASTER)?.iter().map(|row| ctx.compute(row)).collect::<Result<Vec<_>, _>>()?;
    let mut grid = IterationGrid::blank(ctx.config())?;
    if let Some(remainder) = plan.remainder() {
        for row in remainder {
            ctx.compute_into(row, grid.row_mut(row))?;
        }
    }
    let mut blocks = Vec::with_capacity(n);
    blocks.push(own);
    for rank in 1..n {
        blocks.push(receive_block(plan, ctx, ep, rank)?);
    }
    let strided = plan.height() - plan.remainder().map_or(0, |r| r.count());
    for q in 0..strided {
        grid.row_mut(q).copy_from_slice(&blocks[q % n][q / n]);
    }
    Ok(grid)
}

/// Master hands out one row per worker, then answers every result with the
/// next unassigned row, or a sentinel once rows run out. It computes nothing.
fn fcfs_master<E: Endpoint>(
    plan: &PartitionPlan,
    ctx: &TaskContext<'_>,
    ep: &mut E,
) -> Result<IterationGrid, RunError> {
    let height = plan.height();
    let sentinel = height + 1;
    let mut grid = IterationGrid::blank(ctx.config())?;
    let mut unassigned: VecDeque<usize> = (0..height).collect();
    // Row each worker is currently computing.
    let mut in_flight: Vec<Option<usize>> = vec![None; plan.num_tasks()];
    let mut received = vec![false; height];
    let mut active = 0usize;

    let mut dispatch = |ep: &mut E, worker: Rank, in_flight: &mut Vec<Option<usize>>| -> Result<bool, RunError> {
        let msg = match unassigned.pop_front() {
            Some(row) => {
                in_flight[worker] = Some(row);
                WorkerMessage::RowAssignment { row }
            }
            None => {
                in_flight[worker] = None;
                WorkerMessage::Terminate { sentinel_row: sentinel }
            }
        };
        let busy = msg.is_payload();
        ep.send(worker, msg).map_err(|e| RunError::transport(MASTER, e))?;
        Ok(busy)
    };

    for worker in 1..plan.num_tasks() {
        if dispatch(ep, worker, &mut in_flight)? {
            active += 1;
        }
    }

    while active > 0 {
        let (worker, msg) = ep.recv_any().map_err(|e| RunError::transport(MASTER, e))?;
        let (row, cells) = match msg {
            WorkerMessage::RowResult { row, cells } => (row, cells),
            other => return Err(RunError::protocol(worker, format!("expected row result, got {}", other.kind()))),
        };
        if row >= height {
            return Err(RunError::protocol(worker, format!("row result for row {row} beyond height {height}")));
        }
        if received[row] {
            return Err(RunError::protocol(worker, format!("duplicate result for row {row}")));
        }
        if in_flight.get(worker).copied().flatten() != Some(row) {
            return Err(RunError::protocol(worker, format!("row {row} was not assigned to this rank")));
        }
        check_row(worker, row, &cells, ctx.config())?;
        grid.row_mut(row).copy_from_slice(&cells);
        received[row] = true;
        if !dispatch(ep, worker, &mut in_flight)? {
            active -= 1;
        }
    }
    Ok(grid)
}

fn fcfs_worker<E: Endpoint>(ctx: &TaskContext<'_>, ep: &mut E) -> Result<(), RunError> {
    let height = ctx.config().height;
    loop {
        match ep.recv_from(MASTER).map_err(|e| RunError::transport(ctx.rank, e))? {
            WorkerMessage::RowAssignment { row } if row < height => {
                let cells = ctx.compute(row)?;
                ep.send(MASTER, WorkerMessage::RowResult { row, cells })
                    .map_err(|e| RunError::transport(ctx.rank, e))?;
            }
            WorkerMessage::RowAssignment { row } => {
                return Err(RunError::protocol(MASTER, format!("assignment of row {row} beyond height {height}")))
            }
            WorkerMessage::Terminate { sentinel_row } if sentinel_row > height => return Ok(()),
            WorkerMessage::Terminate { sentinel_row } => {
                return Err(RunError::protocol(
                    MASTER,
                    format!("terminate sentinel {sentinel_row} does not exceed height {height}"),
                ))
            }
            other => return Err(RunError::protocol(MASTER, format!("unexpected {} for a worker", other.kind()))),
        }
    }
}
