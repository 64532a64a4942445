//! TSO executions of pomsets and programs.
//!
//! An execution of `P` is a footstep with empty buffers before and after in
//! the footprint of `P` under some linearisation. Linearisations that flush
//! in the same order are handled together (see [`Grouped`]), so the search
//! ranges over orders of the global writes only.

mod litmus;

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::Serialize;

use crate::lang::{Loc, Program, Value};
use crate::po_sem::Bounds;
use crate::pomset::{members, Action, NodeId, Pomset, PomsetError};
use crate::state_foot::{footprint_in, EnvItem, FootprintCtx, Footstep, FootstepSet, Grouped, Visibility, WriteEnv};
use crate::tso_sem::tso_pomsets;

pub use litmus::{litmus_run, parse_litmus, LitmusError, LitmusSpec, Query, Verdict, Witness};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    #[error("pomset has {writes} global writes; flush orders are enumerated up to {limit}")]
    TooManyWrites { writes: usize, limit: usize },
    #[error("initial state must have empty buffers")]
    PendingInitialBuffers,
}

/// Footsteps of one flush order.
#[derive(Debug, Clone)]
pub struct FlushOrder {
    /// Global-write nodes in flush order.
    pub writes: Vec<NodeId>,
    pub footsteps: FootstepSet,
}

/// Executions grouped by the order in which global writes reach memory.
pub fn executions_by_flush_order(
    p: &Pomset,
    ctx: &FootprintCtx,
    write_bound: usize,
) -> Result<Vec<FlushOrder>, ExecError> {
    let gw = p.nodes_where(Action::is_global_write);
    let gw_nodes: Vec<NodeId> = members(gw).collect();
    let orders = p.induced(gw).linearisations(write_bound).map_err(|e| match e {
        PomsetError::LinearisationBound { nodes, bound } => ExecError::TooManyWrites { writes: nodes, limit: bound },
        other => unreachable!("restriction of a valid pomset: {other}"),
    })?;
    let Ok(mut grouped) = Grouped::new(p, ctx, Visibility::GlobalWrites) else {
        // Only series-parallel pomsets have footsteps.
        return Ok(Vec::new());
    };
    Ok(orders
        .into_iter()
        .map(|order| {
            let writes: Vec<NodeId> = order.iter().map(|&i| gw_nodes[i]).collect();
            let visible: Vec<EnvItem> = writes.iter().map(|&n| EnvItem::Node(n)).collect();
            FlushOrder { footsteps: grouped.zeta_footsteps(&visible), writes }
        })
        .collect())
}

/// Minimal executions of `p`: footsteps `(σ′, τ)` with empty buffers.
pub fn executions(p: &Pomset, b: &Bounds) -> Result<FootstepSet, ExecError> {
    let ctx = FootprintCtx::for_pomset(p, b);
    Ok(executions_by_flush_order(p, &ctx, b.lin_node_max)?.into_iter().flat_map(|o| o.footsteps).collect())
}

/// Final states of running `p` from `initial`.
pub fn run_from(
    p: &Pomset,
    initial: &crate::state_foot::BufferedState,
    b: &Bounds,
) -> Result<BTreeSet<crate::state_foot::BufferedState>, ExecError> {
    if !initial.zeta() {
        return Err(ExecError::PendingInitialBuffers);
    }
    Ok(executions(p, b)?.iter().filter(|f| f.pre.within(initial)).map(|f| initial.update(&f.post)).collect())
}

/// Counts reported alongside program-level results.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ExecStats {
    pub pomsets: usize,
    pub executable_pomsets: usize,
    pub flush_orders: usize,
    pub final_states: usize,
}

pub type GlobalState = BTreeMap<Loc, Value>;

/// One pomset's executions from a fixed initial state.
#[derive(Debug, Clone)]
pub struct PomsetRun {
    pub pomset: Pomset,
    /// `(flush order, footstep, final state)` for every execution from the
    /// initial state.
    pub runs: Vec<(Vec<NodeId>, Footstep, GlobalState)>,
    pub flush_orders: usize,
}

/// Runs every TSO pomset of `program` from `initial`.
pub fn program_runs(program: &Program, initial: &GlobalState, b: &Bounds) -> Result<Vec<PomsetRun>, ExecError> {
    let start = crate::state_foot::BufferedState::from_globals(initial.iter().map(|(&x, &v)| (x, v)));
    let pomsets: Vec<Pomset> = tso_pomsets(program, b).into_iter().collect();
    pomsets
        .into_par_iter()
        .map(|p| {
            let ctx = FootprintCtx::for_pomset(&p, b);
            let orders = executions_by_flush_order(&p, &ctx, b.lin_node_max)?;
            let flush_orders = orders.len();
            let mut runs = Vec::new();
            for order in orders {
                let mut steps: Vec<&Footstep> = order.footsteps.iter().filter(|f| f.pre.within(&start)).collect();
                steps.sort();
                for f in steps {
                    runs.push((order.writes.clone(), f.clone(), start.update(&f.post).global_map()));
                }
            }
            Ok(PomsetRun { pomset: p, runs, flush_orders })
        })
        .collect()
}

/// Final global states reachable by `program` from `initial`.
pub fn program_executions(
    program: &Program,
    initial: &GlobalState,
    b: &Bounds,
) -> Result<BTreeSet<GlobalState>, ExecError> {
    Ok(program_executions_with_stats(program, initial, b)?.0)
}

pub fn program_executions_with_stats(
    program: &Program,
    initial: &GlobalState,
    b: &Bounds,
) -> Result<(BTreeSet<GlobalState>, ExecStats), ExecError> {
    let runs = program_runs(program, initial, b)?;
    let finals: BTreeSet<GlobalState> = runs.iter().flat_map(|r| r.runs.iter().map(|(_, _, s)| s.clone())).collect();
    let stats = ExecStats {
        pomsets: runs.len(),
        executable_pomsets: runs.iter().filter(|r| !r.runs.is_empty()).count(),
        flush_orders: runs.iter().map(|r| r.flush_orders).sum(),
        final_states: finals.len(),
    };
    Ok((finals, stats))
}

/// A linearisation of `p` that flushes in order `writes` and has `f` in its
/// footprint, searching at most `budget` linearisations.
pub fn find_linearisation(
    p: &Pomset,
    writes: &[NodeId],
    f: &Footstep,
    ctx: &FootprintCtx,
    budget: usize,
) -> Option<WriteEnv> {
    let pairs: Vec<(NodeId, NodeId)> = writes.windows(2).map(|w| (w[0], w[1])).collect();
    let constrained = p.with_extra_order(&pairs).ok()?;
    let mut tried = 0;
    let found = constrained.for_each_linearisation(|lin| {
        tried += 1;
        let env = WriteEnv::from_linearisation(lin);
        if footprint_in(p, &env, ctx).is_ok_and(|set| set.contains(f)) {
            return ControlFlow::Break(Some(env));
        }
        if tried >= budget {
            return ControlFlow::Break(None);
        }
        ControlFlow::Continue(())
    });
    match found {
        ControlFlow::Break(env) => env,
        ControlFlow::Continue(()) => None,
    }
}
