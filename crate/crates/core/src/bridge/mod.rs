//! Cross-validation of the footprint executions against the axioms.
//!
//! A TSO pomset determines a program order by forgetting the flushes
//! ([`underlying`]); the orders of a program order that some TSO pomset
//! above it executes ([`ProgramBridge::t_of`]) should be exactly its
//! TSO-consistent total orders. [`s_construct`] goes the other way, merging
//! the flushes into a program order where a total order says.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::axiom::{check_selected, totals_selected, Axiom, AxiomError, CandidateOrder, InitialState};
use crate::exec::GlobalState;
use crate::lang::{Loc, Program};
use crate::po_sem::{denote_po, normalize, Bounds};
use crate::pomset::{bit, isomorphisms, members, Action, NodeId, NodeSet, Pomset, PomsetError, SpTerm};
use crate::state_foot::{EnvItem, FootprintCtx, Grouped, Visibility};
use crate::tso_sem::tso_pomsets;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BridgeError {
    #[error("pomset is not series-parallel")]
    NotSp,
    #[error("global write {0} has no buffer write before it")]
    UnmatchedWrite(NodeId),
    #[error("buffer write {0} is never flushed")]
    UnflushedWrite(NodeId),
    #[error("buffer write {buffer} is flushed by {write} with a different label")]
    LabelMismatch { buffer: NodeId, write: NodeId },
    #[error("pairing of buffer writes with global writes is not an order isomorphism")]
    NotIsomorphic,
    #[error(transparent)]
    Axiom(#[from] AxiomError),
    #[error("order is not TSO-consistent (fails {0:?})")]
    Inconsistent(Vec<Axiom>),
    #[error(transparent)]
    Order(#[from] PomsetError),
}

/// The pairing `ω` of each buffer write with the global write that flushes it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Balance {
    pub omega: BTreeMap<NodeId, NodeId>,
}

/// Pairs buffer writes with global writes first-in first-out per location
/// along each linear segment. Parallel parts must balance on their own.
pub fn well_balanced(p: &Pomset) -> Result<Balance, BridgeError> {
    if p.is_empty() {
        return Ok(Balance { omega: BTreeMap::new() });
    }
    let term = p.sp_decompose().map_err(|_| BridgeError::NotSp)?;
    let mut omega = BTreeMap::new();
    balance_closed(p, &term, &mut omega)?;

    let buffers: Vec<NodeId> = omega.keys().copied().collect();
    for &b in &buffers {
        let w = omega[&b];
        if !p.lt(b, w) {
            return Err(BridgeError::NotIsomorphic);
        }
        for &c in &buffers {
            if p.lt(b, c) != p.lt(w, omega[&c]) {
                return Err(BridgeError::NotIsomorphic);
            }
        }
    }
    Ok(Balance { omega })
}

fn balance_closed(p: &Pomset, term: &SpTerm, omega: &mut BTreeMap<NodeId, NodeId>) -> Result<(), BridgeError> {
    let mut pending: HashMap<Loc, std::collections::VecDeque<NodeId>> = HashMap::new();
    for part in term.seq_parts() {
        match part {
            SpTerm::Leaf(nodes) => {
                for &n in nodes {
                    let a = p.label(n);
                    if a.is_buffer_write() {
                        pending.entry(a.loc().expect("write location")).or_default().push_back(n);
                    } else if a.is_global_write() {
                        let queue = pending.get_mut(&a.loc().expect("write location"));
                        let b = queue.and_then(|q| q.pop_front()).ok_or(BridgeError::UnmatchedWrite(n))?;
                        if p.label(b).value() != a.value() {
                            return Err(BridgeError::LabelMismatch { buffer: b, write: n });
                        }
                        omega.insert(b, n);
                    }
                }
            }
            SpTerm::ParNode(..) => {
                for side in part.par_parts() {
                    balance_closed(p, side, omega)?;
                }
            }
            SpTerm::SeqNode(..) => unreachable!("seq_parts flattens sequences"),
        }
    }
    match pending.values().flatten().min() {
        Some(&b) => Err(BridgeError::UnflushedWrite(b)),
        None => Ok(()),
    }
}

/// A program order with its nodes identified in the TSO pomset it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Underlying {
    pub pomset: Pomset,
    /// The TSO node each node stands for: reads and `δ` themselves, writes
    /// the global write that flushes them.
    pub identified: Vec<NodeId>,
    /// The buffer write each write node came from.
    pub source: Vec<NodeId>,
}

impl Underlying {
    /// The node standing for TSO node `n`, if `n` is not a buffer write.
    pub fn node_of(&self, n: NodeId) -> Option<NodeId> {
        self.identified.iter().position(|&m| m == n)
    }
}

/// Drops global writes and relabels buffer writes as writes.
pub fn underlying(p: &Pomset) -> Result<Underlying, BridgeError> {
    let balance = well_balanced(p)?;
    let keep = p.nodes_where(|a| !a.is_global_write());
    let pomset = p.induced(keep).map_labels(|a| match *a {
        Action::BufferWrite { loc, value } => Action::write(loc, value),
        other => other,
    });
    let source: Vec<NodeId> = members(keep).collect();
    let identified = source.iter().map(|n| balance.omega.get(n).copied().unwrap_or(*n)).collect();
    Ok(Underlying { pomset, identified, source })
}

/// A TSO pomset built from a program order and a total order on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Merged {
    pub pomset: Pomset,
    /// For each node of the program order, the node standing for it:
    /// reads and `δ` keep their number, writes map to their global write.
    pub identified: Vec<NodeId>,
}

/// Merges global writes into `p` at the places the total order `order`
/// puts them. Nodes `0..p.len()` copy `p` with writes turned into buffer
/// writes; the global write of the `k`-th write (by node number) follows at
/// `p.len() + k`.
pub fn s_construct(p: &Pomset, order: &[NodeId], init: &InitialState) -> Result<Merged, BridgeError> {
    let report = check_selected(p, &CandidateOrder::total(p, order)?, init, &Axiom::ALL)?;
    if !report.consistent() {
        return Err(BridgeError::Inconsistent(report.failing()));
    }
    let n = p.len();
    let writes: Vec<NodeId> = members(p.nodes_where(Action::is_global_write)).collect();
    let flush: HashMap<NodeId, NodeId> = writes.iter().enumerate().map(|(k, &w)| (w, n + k)).collect();
    let mut position = vec![0; n];
    for (i, &a) in order.iter().enumerate() {
        position[a] = i;
    }
    let before = |a: NodeId, b: NodeId| position[a] < position[b];
    let related = |a: NodeId, b: NodeId| a == b || p.comparable(a, b);

    let mut labels: Vec<Action> = p
        .labels()
        .iter()
        .map(|a| match *a {
            Action::GlobalWrite { loc, value } => Action::buffer(loc, value),
            other => other,
        })
        .collect();
    labels.extend(writes.iter().map(|&w| p.label(w)));

    let mut edges = Vec::new();
    for a in p.nodes() {
        edges.extend(members(p.above(a)).map(|b| (a, b)));
    }
    for &w in &writes {
        edges.push((w, flush[&w]));
        for &u in &writes {
            if related(w, u) && before(w, u) {
                edges.push((flush[&w], flush[&u]));
            }
        }
        for q in p.nodes() {
            let is_write = p.label(q).is_global_write();
            // A write stands in the order as its flush, so its buffer write
            // only follows the flush of `w` when nothing at or after it in
            // program order must come before that flush.
            let blocked = || members(p.above(q) | bit(q)).any(|r| !p.label(r).is_global_write() && before(r, w));
            if !is_write && related(q, w) && before(q, w) {
                edges.push((q, flush[&w]));
            }
            if related(w, q) && before(w, q) && !(is_write && blocked()) {
                edges.push((flush[&w], q));
            }
        }
    }
    let pomset = Pomset::from_edges(labels, &edges)?;
    let identified = p.nodes().map(|a| flush.get(&a).copied().unwrap_or(a)).collect();
    Ok(Merged { pomset, identified })
}

/// A linearisation of `merged` listing the program-order nodes in `order`.
pub fn lift_order(merged: &Merged, order: &[NodeId]) -> Option<Vec<NodeId>> {
    let chain: Vec<NodeId> = order.iter().map(|&a| merged.identified[a]).collect();
    let pairs: Vec<(NodeId, NodeId)> = chain.windows(2).map(|w| (w[0], w[1])).collect();
    let constrained = merged.pomset.with_extra_order(&pairs).ok()?;
    let mut found = None;
    let _ = constrained.for_each_linearisation(|lin| {
        found = Some(lin.to_vec());
        std::ops::ControlFlow::Break(())
    });
    found
}

/// Orders of the program-order nodes under which `tso` has an execution,
/// with the initial globals each one needs.
fn executing_orders(tso: &Pomset, b: &Bounds) -> Result<BTreeMap<Vec<NodeId>, BTreeSet<GlobalState>>, BridgeError> {
    let ctx = FootprintCtx::for_pomset(tso, b);
    let mut grouped = Grouped::new(tso, &ctx, Visibility::ProgramOrder).map_err(|_| BridgeError::NotSp)?;
    let visible = tso.nodes_where(|a| Visibility::ProgramOrder.shows(a));
    let visible_nodes: Vec<NodeId> = members(visible).collect();
    let mut out = BTreeMap::new();
    for order in tso.induced(visible).linearisations(b.lin_node_max)? {
        let seq: Vec<NodeId> = order.iter().map(|&i| visible_nodes[i]).collect();
        let items: Vec<EnvItem> = seq.iter().map(|&n| EnvItem::Node(n)).collect();
        let steps = grouped.zeta_footsteps(&items);
        if !steps.is_empty() {
            out.insert(seq, steps.iter().map(|f| f.pre.global_map()).collect());
        }
    }
    Ok(out)
}

/// A program's TSO pomsets grouped by the program order beneath them.
pub struct ProgramBridge {
    pub bounds: Bounds,
    pub tso: BTreeSet<Pomset>,
    /// Keyed by the normalized underlying program order.
    above: BTreeMap<Pomset, Vec<(Pomset, Underlying)>>,
    pub unbalanced: Vec<(Pomset, BridgeError)>,
}

impl ProgramBridge {
    pub fn new(program: &Program, b: &Bounds) -> Self {
        let tso = tso_pomsets(program, b);
        let mut above: BTreeMap<Pomset, Vec<(Pomset, Underlying)>> = BTreeMap::new();
        let mut unbalanced = Vec::new();
        for p in &tso {
            match underlying(p) {
                Ok(u) => above.entry(normalize(&u.pomset)).or_default().push((p.clone(), u)),
                Err(e) => unbalanced.push((p.clone(), e)),
            }
        }
        ProgramBridge { bounds: b.clone(), tso, above, unbalanced }
    }

    /// Program orders underlying some TSO pomset.
    pub fn underlying_orders(&self) -> impl Iterator<Item = &Pomset> {
        self.above.keys()
    }

    /// Total orders of `p` (a normalized program order) that label some
    /// execution of a TSO pomset above it, each with the initial globals
    /// of its executions.
    pub fn t_of(&self, p: &Pomset) -> Result<BTreeMap<Vec<NodeId>, BTreeSet<GlobalState>>, BridgeError> {
        let mut out: BTreeMap<Vec<NodeId>, BTreeSet<GlobalState>> = BTreeMap::new();
        for (tso, u) in self.above.get(p).into_iter().flatten() {
            let maps = isomorphisms(&u.pomset, p);
            for (seq, pres) in executing_orders(tso, &self.bounds)? {
                let local: Vec<NodeId> =
                    seq.iter().map(|&n| u.node_of(n).expect("visible nodes are identified")).collect();
                for iso in &maps {
                    let order: Vec<NodeId> = local.iter().map(|&m| iso[m]).collect();
                    out.entry(order).or_default().extend(pres.iter().cloned());
                }
            }
        }
        Ok(out)
    }

    pub fn contains_tso(&self, p: &Pomset) -> bool {
        self.tso.contains(&normalize(p))
    }
}

/// One disagreement found by a harness run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub pomset: String,
    pub order: Vec<String>,
    pub problem: String,
}

impl Finding {
    fn new(p: &Pomset, order: &[NodeId], problem: impl Into<String>) -> Self {
        Finding {
            pomset: pomset_text(p),
            order: order.iter().map(|&n| p.label(n).ascii()).collect(),
            problem: problem.into(),
        }
    }
}

fn pomset_text(p: &Pomset) -> String {
    serde_json::to_string(p).expect("pomsets serialize")
}

/// Outcome of cross-checking one program.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct HarnessReport {
    pub program: String,
    pub po_pomsets: usize,
    pub tso_pomsets: usize,
    /// Orders found by executions, checked against the axioms.
    pub executed_orders: usize,
    /// Orders the axioms accept, rebuilt as TSO pomsets and executed.
    pub consistent_orders: usize,
    pub soundness: Vec<Finding>,
    pub completeness: Vec<Finding>,
    /// Program orders whose executed and axiomatic orders differ.
    pub mismatches: Vec<Finding>,
    pub errors: Vec<String>,
}

impl HarnessReport {
    pub fn passed(&self) -> bool {
        self.soundness.is_empty()
            && self.completeness.is_empty()
            && self.mismatches.is_empty()
            && self.errors.is_empty()
    }
}

/// What a harness run checks.
#[derive(Debug, Clone)]
pub struct HarnessConfig {
    pub bounds: Bounds,
    /// Initial values for locations no execution reads first.
    pub initial: GlobalState,
    /// Axioms the checker applies; the full set except for mutation runs.
    pub axioms: Vec<Axiom>,
    pub size_guard: usize,
}

impl HarnessConfig {
    pub fn new(bounds: Bounds, initial: GlobalState) -> Self {
        let size_guard = bounds.lin_node_max;
        HarnessConfig { bounds, initial, axioms: Axiom::ALL.to_vec(), size_guard }
    }
}

/// Every executed order of every program order passes the axioms from the
/// initial globals of one of its executions.
pub fn soundness_check(program: &Program, cfg: &HarnessConfig) -> HarnessReport {
    let bridge = ProgramBridge::new(program, &cfg.bounds);
    run_harness(program, &bridge, cfg, true, false)
}

/// Every consistent total order of every program order is rebuilt as a TSO
/// pomset of the program, lifts to a linearisation of it, and executes.
pub fn completeness_check(program: &Program, cfg: &HarnessConfig) -> HarnessReport {
    let bridge = ProgramBridge::new(program, &cfg.bounds);
    run_harness(program, &bridge, cfg, false, true)
}

/// A total order with the environment items of its rebuilt pomset.
type OrderRun<'a> = (&'a Vec<NodeId>, Vec<EnvItem>);

/// Both directions, plus equality of the two order sets per program order.
pub fn cross_check(program: &Program, cfg: &HarnessConfig) -> HarnessReport {
    let bridge = ProgramBridge::new(program, &cfg.bounds);
    run_harness(program, &bridge, cfg, true, true)
}

#[derive(Default)]
struct PomsetOutcome {
    executed: usize,
    consistent: usize,
    soundness: Vec<Finding>,
    completeness: Vec<Finding>,
    mismatches: Vec<Finding>,
    errors: Vec<String>,
}

fn run_harness(
    program: &Program,
    bridge: &ProgramBridge,
    cfg: &HarnessConfig,
    sound: bool,
    complete: bool,
) -> HarnessReport {
    let po: Vec<Pomset> = denote_po(program, &cfg.bounds).into_iter().collect();
    let mut report = HarnessReport {
        program: program.to_string(),
        po_pomsets: po.len(),
        tso_pomsets: bridge.tso.len(),
        ..HarnessReport::default()
    };
    for (p, e) in &bridge.unbalanced {
        report.errors.push(format!("{}: {e}", pomset_text(p)));
    }
    let known: BTreeSet<&Pomset> = po.iter().collect();
    for u in bridge.underlying_orders() {
        if !known.contains(u) {
            report.errors.push(format!("underlying order {} is not a program order", pomset_text(u)));
        }
    }
    let outcomes: Vec<PomsetOutcome> = po.par_iter().map(|p| check_pomset(p, bridge, cfg, sound, complete)).collect();
    for o in outcomes {
        report.executed_orders += o.executed;
        report.consistent_orders += o.consistent;
        report.soundness.extend(o.soundness);
        report.completeness.extend(o.completeness);
        report.mismatches.extend(o.mismatches);
        report.errors.extend(o.errors);
    }
    report
}

fn check_pomset(p: &Pomset, bridge: &ProgramBridge, cfg: &HarnessConfig, sound: bool, complete: bool) -> PomsetOutcome {
    let mut out = PomsetOutcome::default();
    let executed = match bridge.t_of(p) {
        Ok(t) => t,
        Err(e) => {
            out.errors.push(format!("{}: {e}", pomset_text(p)));
            return out;
        }
    };
    out.executed = executed.len();
    if sound {
        for (order, pres) in &executed {
            let passes = pres.iter().any(|pre| {
                let mut state = cfg.initial.clone();
                state.extend(pre.iter().map(|(&x, &v)| (x, v)));
                CandidateOrder::total(p, order)
                    .and_then(|t| check_selected(p, &t, &InitialState::Given(state), &cfg.axioms))
                    .is_ok_and(|r| r.consistent())
            });
            if !passes {
                out.soundness.push(Finding::new(p, order, "executed order fails the axioms"));
            }
        }
    }
    if !complete {
        return out;
    }
    let totals = match totals_selected(p, &InitialState::Any, cfg.size_guard, &cfg.axioms) {
        Ok(t) => t,
        Err(e) => {
            out.errors.push(format!("{}: {e}", pomset_text(p)));
            return out;
        }
    };
    out.consistent = totals.len();
    // Orders whose merged pomsets coincide share one footprint memo.
    let mut runs: BTreeMap<Pomset, Vec<OrderRun>> = BTreeMap::new();
    for order in &totals {
        match rebuild(p, order, bridge) {
            Ok((canonical, items)) => runs.entry(canonical).or_default().push((order, items)),
            Err(problem) => out.completeness.push(Finding::new(p, order, problem)),
        }
        if !executed.contains_key(order) {
            out.mismatches.push(Finding::new(p, order, "consistent order is never executed"));
        }
    }
    for (merged, group) in &runs {
        let ctx = FootprintCtx::for_pomset(merged, &cfg.bounds);
        let Ok(mut grouped) = Grouped::new(merged, &ctx, Visibility::ProgramOrder) else {
            for (order, _) in group {
                out.completeness.push(Finding::new(p, order, "merged pomset is not series-parallel"));
            }
            continue;
        };
        for (order, items) in group {
            if grouped.zeta_footsteps(items).is_empty() {
                out.completeness.push(Finding::new(p, order, "merged pomset has no execution in this order"));
            }
        }
    }
    let totals: BTreeSet<&Vec<NodeId>> = totals.iter().collect();
    for order in executed.keys().filter(|o| !totals.contains(o)) {
        out.mismatches.push(Finding::new(p, order, "executed order is not consistent"));
    }
    out
}

/// The merged pomset for `order` in canonical numbering, with `order` as
/// items over it, or why it cannot witness the order.
fn rebuild(p: &Pomset, order: &[NodeId], bridge: &ProgramBridge) -> Result<(Pomset, Vec<EnvItem>), String> {
    let merged = s_construct(p, order, &InitialState::Any).map_err(|e| format!("merge failed: {e}"))?;
    let (canonical, placed) = merged.pomset.canonical_with_order();
    let known = if canonical.labels().iter().any(Action::is_delta) {
        bridge.contains_tso(&canonical)
    } else {
        bridge.tso.contains(&canonical)
    };
    if !known {
        return Err("merged pomset is not a TSO pomset of the program".into());
    }
    match underlying(&merged.pomset) {
        Ok(u) if normalize(&u.pomset) == normalize(p) => {}
        _ => return Err("merged pomset does not sit above the program order".into()),
    }
    if lift_order(&merged, order).is_none() {
        return Err("order does not lift to a linearisation".into());
    }
    let mut renumber = vec![0; placed.len()];
    for (i, &n) in placed.iter().enumerate() {
        renumber[n] = i;
    }
    let items = order.iter().map(|&a| EnvItem::Node(renumber[merged.identified[a]])).collect();
    Ok((canonical, items))
}

/// Whether `seq` restricted to program-order actions is `order`.
pub fn restricts_to(merged: &Merged, seq: &[NodeId], order: &[NodeId]) -> bool {
    let wanted: NodeSet = order.iter().fold(0, |acc, &a| acc | bit(merged.identified[a]));
    let got: Vec<NodeId> = seq.iter().copied().filter(|&n| wanted & bit(n) != 0).collect();
    got == order.iter().map(|&a| merged.identified[a]).collect::<Vec<_>>()
}
