//! The axiomatic account: when an order on a program order's actions is
//! TSO-consistent from an initial state, enumeration of consistent total
//! orders, and extension of consistent partial orders to total ones.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::lang::{Loc, Value};
use crate::pomset::{bit, members, Action, NodeId, NodeSet, Pomset, PomsetError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Axiom {
    O,
    Va,
    Vb,
    Vc,
    L,
    S,
    F,
    J,
}

impl Axiom {
    pub const ALL: [Axiom; 8] = [Axiom::O, Axiom::Va, Axiom::Vb, Axiom::Vc, Axiom::L, Axiom::S, Axiom::F, Axiom::J];
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Where reads with no write below them may take their value from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialState {
    /// Read from this state.
    Given(BTreeMap<Loc, Value>),
    /// Some state: every location's unwritten reads must agree.
    Any,
    /// No initial values: every read needs a write.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AxiomError {
    #[error("order has {order} nodes or different labels from the {base}-node program order")]
    Mismatch { base: usize, order: usize },
    #[error("program order has {nodes} nodes; totals are enumerated up to {limit}")]
    TooLarge { nodes: usize, limit: usize },
    #[error(transparent)]
    Order(#[from] PomsetError),
    #[error("no pair extends the order consistently (stuck at {0:?})")]
    Stuck((NodeId, NodeId)),
    #[error("input order is not TSO-consistent: {0:?}")]
    Inconsistent(Vec<Axiom>),
}

/// First violation of one axiom: the nodes involved and a description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub nodes: Vec<NodeId>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    /// One entry per axiom, in [`Axiom::ALL`] order.
    pub results: Vec<(Axiom, bool)>,
    pub violations: Vec<Violation>,
}

impl AxiomReport {
    pub fn consistent(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn failing(&self) -> Vec<Axiom> {
        self.results.iter().filter(|(_, ok)| !ok).map(|&(a, _)| a).collect()
    }

    pub fn passes(&self, axiom: Axiom) -> bool {
        self.results.iter().any(|&(a, ok)| a == axiom && ok)
    }
}

/// An order on the nodes of `base`, held as a pomset with the same labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateOrder {
    pub order: Pomset,
}

impl CandidateOrder {
    pub fn from_pairs(base: &Pomset, pairs: &[(NodeId, NodeId)]) -> Result<Self, AxiomError> {
        Ok(CandidateOrder { order: Pomset::from_edges(base.labels().to_vec(), pairs)? })
    }

    /// The total order listing nodes in `sequence`.
    pub fn total(base: &Pomset, sequence: &[NodeId]) -> Result<Self, AxiomError> {
        let mut seen: NodeSet = 0;
        for &n in sequence {
            if n >= base.len() || seen & bit(n) != 0 {
                return Err(AxiomError::Mismatch { base: base.len(), order: sequence.len() });
            }
            seen |= bit(n);
        }
        if sequence.len() != base.len() {
            return Err(AxiomError::Mismatch { base: base.len(), order: sequence.len() });
        }
        let pairs: Vec<_> = sequence.windows(2).map(|w| (w[0], w[1])).collect();
        Self::from_pairs(base, &pairs)
    }

    pub fn is_total(&self) -> bool {
        self.order.is_linear()
    }

    /// Nodes in order, when total.
    pub fn sequence(&self) -> Option<Vec<NodeId>> {
        if !self.is_total() {
            return None;
        }
        let mut nodes: Vec<NodeId> = self.order.nodes().collect();
        nodes.sort_by_key(|&n| self.order.below(n).count_ones());
        Some(nodes)
    }
}

/// Values the reads of `x` in `p` would need from the initial state.
struct Checker<'a> {
    p: &'a Pomset,
    t: &'a Pomset,
}

impl Checker<'_> {
    fn writes_to(&self, x: Loc) -> NodeSet {
        self.p.nodes_where(|a| a.is_global_write() && a.loc() == Some(x))
    }

    fn value(&self, n: NodeId) -> Option<Value> {
        self.p.label(n).value()
    }

    fn va(&self, r: NodeId, x: Loc, v: Value) -> bool {
        let writes = self.writes_to(x);
        let t_below = writes & self.t.below(r);
        let p_below = writes & self.p.below(r);
        // With O the maximum is unique; without it any maximal write will do.
        members(t_below)
            .filter(|&w| self.t.above(w) & t_below == 0)
            .any(|w| self.value(w) == Some(v) && members(p_below).all(|u| u == w || self.t.lt(u, w)))
    }

    fn vb(&self, r: NodeId, x: Loc, v: Value) -> bool {
        let p_below = self.writes_to(x) & self.p.below(r);
        members(p_below)
            .filter(|&w| self.p.above(w) & p_below == 0)
            .any(|w| self.t.lt(r, w) && self.value(w) == Some(v))
    }

    fn unwritten(&self, r: NodeId, x: Loc) -> bool {
        self.writes_to(x) & (self.t.below(r) | self.p.below(r)) == 0
    }

    /// Which clause a failing read is charged to.
    fn blame(&self, r: NodeId, x: Loc) -> Axiom {
        if self.unwritten(r, x) {
            return Axiom::Vc;
        }
        let p_below = self.writes_to(x) & self.p.below(r);
        let buffered = members(p_below).filter(|&w| self.p.above(w) & p_below == 0).any(|w| self.t.lt(r, w));
        if buffered {
            Axiom::Vb
        } else {
            Axiom::Va
        }
    }
}

/// Checks every axiom, reporting the first counterexample of each.
pub fn check_axioms(p: &Pomset, t: &CandidateOrder, init: &InitialState) -> Result<AxiomReport, AxiomError> {
    check_selected(p, t, init, &Axiom::ALL)
}

/// Checks only `axioms`; the others are reported as passing. Dropping an
/// axiom gives a deliberately weakened checker for mutation runs.
pub fn check_selected(
    p: &Pomset,
    t: &CandidateOrder,
    init: &InitialState,
    axioms: &[Axiom],
) -> Result<AxiomReport, AxiomError> {
    let t = &t.order;
    if t.len() != p.len() || t.labels() != p.labels() {
        return Err(AxiomError::Mismatch { base: p.len(), order: t.len() });
    }
    let c = Checker { p, t };
    let mut violations: Vec<Violation> = Vec::new();
    let mut add = |axiom: Axiom, nodes: Vec<NodeId>, message: String| {
        if !violations.iter().any(|v| v.axiom == axiom) {
            violations.push(Violation { axiom, nodes, message });
        }
    };
    let label = |n: NodeId| p.label(n);
    let writes = p.nodes_where(|a| a.is_global_write());
    let reads = p.nodes_where(Action::is_read);

    for w in members(writes) {
        for u in members(writes & !bit(w)).filter(|&u| u > w) {
            if !t.comparable(w, u) {
                add(Axiom::O, vec![w, u], format!("writes {} and {} are unordered", label(w), label(u)));
            }
        }
    }

    let mut needed: BTreeMap<Loc, (Value, NodeId)> = BTreeMap::new();
    for r in members(reads) {
        let a = label(r);
        let (x, v) = (a.loc().expect("read location"), a.value().expect("read value"));
        if c.va(r, x, v) || c.vb(r, x, v) {
            continue;
        }
        if c.unwritten(r, x) {
            match init {
                InitialState::Given(state) if state.get(&x) == Some(&v) => continue,
                InitialState::Any => match needed.get(&x) {
                    None => {
                        needed.insert(x, (v, r));
                        continue;
                    }
                    Some(&(w, _)) if w == v => continue,
                    Some(&(_, other)) => {
                        add(
                            Axiom::Vc,
                            vec![other, r],
                            format!("reads {} and {} need different initial values", label(other), a),
                        );
                        continue;
                    }
                },
                _ => {}
            }
        }
        let clause = c.blame(r, x);
        add(clause, vec![r], format!("read {a} takes its value from nowhere"));
    }

    for r in members(reads) {
        for n in members(p.above(r)) {
            if !t.lt(r, n) {
                add(Axiom::L, vec![r, n], format!("read {} precedes {} in program order only", label(r), label(n)));
            }
        }
    }
    for w in members(writes) {
        for u in members(p.above(w) & writes) {
            if !t.lt(w, u) {
                add(Axiom::S, vec![w, u], format!("write {} precedes {} in program order only", label(w), label(u)));
            }
        }
    }
    for a1 in p.nodes() {
        let up = p.above(a1);
        for a2 in members(up) {
            for a3 in members(up & !bit(a2)).filter(|&a3| a3 > a2 && !p.comparable(a2, a3)) {
                if !(t.lt(a1, a2) && t.lt(a1, a3)) {
                    add(Axiom::F, vec![a1, a2, a3], format!("fork at {} not kept", label(a1)));
                }
            }
        }
        let down = p.below(a1);
        for a2 in members(down) {
            for a3 in members(down & !bit(a2)).filter(|&a3| a3 > a2 && !p.comparable(a2, a3)) {
                if !(t.lt(a2, a1) && t.lt(a3, a1)) {
                    add(Axiom::J, vec![a2, a3, a1], format!("join at {} not kept", label(a1)));
                }
            }
        }
    }

    violations.retain(|v| axioms.contains(&v.axiom));
    let results = Axiom::ALL.iter().map(|&ax| (ax, !violations.iter().any(|v| v.axiom == ax))).collect();
    violations.sort_by_key(|v| v.axiom);
    Ok(AxiomReport { results, violations })
}

/// Pairs every order passing `axioms` must contain: those forced by L, S,
/// F and J.
pub fn required_pairs(p: &Pomset, axioms: &[Axiom]) -> Vec<(NodeId, NodeId)> {
    let on = |a: Axiom| axioms.contains(&a);
    let mut pairs = Vec::new();
    for a in p.nodes() {
        let la = p.label(a);
        for b in members(p.above(a)) {
            let lb = p.label(b);
            let load = on(Axiom::L) && la.is_read();
            let store = on(Axiom::S) && la.is_global_write() && lb.is_global_write();
            // a < b is kept by F when some c above a is unordered with b, and
            // by J when some c below b is unordered with a.
            let fork = on(Axiom::F) && members(p.above(a)).any(|c| c != b && !p.comparable(b, c));
            let join = on(Axiom::J) && members(p.below(b)).any(|c| c != a && !p.comparable(a, c));
            if load || store || fork || join {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

/// All TSO-consistent total orders of `p`, as node sequences.
pub fn tso_consistent_totals(
    p: &Pomset,
    init: &InitialState,
    size_guard: usize,
) -> Result<Vec<Vec<NodeId>>, AxiomError> {
    totals_selected(p, init, size_guard, &Axiom::ALL)
}

/// Total orders passing `axioms`. Only orders containing the pairs those
/// axioms force are generated; the rest would fail anyway.
pub fn totals_selected(
    p: &Pomset,
    init: &InitialState,
    size_guard: usize,
    axioms: &[Axiom],
) -> Result<Vec<Vec<NodeId>>, AxiomError> {
    if p.len() > size_guard {
        return Err(AxiomError::TooLarge { nodes: p.len(), limit: size_guard });
    }
    let required = Pomset::from_edges(p.labels().to_vec(), &required_pairs(p, axioms))?;
    let mut out = Vec::new();
    for seq in required.linearisations(size_guard)? {
        if check_selected(p, &CandidateOrder::total(p, &seq)?, init, axioms)?.consistent() {
            out.push(seq);
        }
    }
    Ok(out)
}

/// How each added pair was justified while extending an order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Extension {
    pub total: Vec<NodeId>,
    /// Pairs `(a, b)` added because `μa <_T μb` or `a` has no write below it.
    pub by_condition: usize,
    /// Pairs added the other way round under the same condition.
    pub by_symmetric: usize,
    /// Pairs the condition does not cover, kept after checking the axioms.
    pub by_check: usize,
}

/// The `≤_T`-greatest write at or below `n`, if any.
fn maximum_write_below(t: &Pomset, n: NodeId) -> Option<NodeId> {
    let writes = t.nodes_where(|a| a.is_global_write()) & (t.below(n) | bit(n));
    members(writes).find(|&w| t.above(w) & writes == 0).filter(|&w| {
        // With O this maximum is unique; anything else means none exists.
        members(writes).all(|u| u == w || t.lt(u, w))
    })
}

fn covered(t: &Pomset, a: NodeId, b: NodeId) -> bool {
    match (maximum_write_below(t, a), maximum_write_below(t, b)) {
        (None, _) => true,
        (Some(ma), Some(mb)) => t.lt(ma, mb),
        (Some(_), None) => false,
    }
}

/// Extends a consistent order to a consistent total order by adding one
/// unordered pair at a time.
pub fn extend_to_total(p: &Pomset, t: &CandidateOrder, init: &InitialState) -> Result<Extension, AxiomError> {
    let report = check_axioms(p, t, init)?;
    if !report.consistent() {
        return Err(AxiomError::Inconsistent(report.failing()));
    }
    let mut current = t.order.clone();
    let mut ext = Extension::default();
    loop {
        let pair = current
            .nodes()
            .flat_map(|a| (a + 1..current.len()).map(move |b| (a, b)))
            .find(|&(a, b)| !current.comparable(a, b));
        let Some((a, b)) = pair else { break };
        let attempt = |from: NodeId, to: NodeId| -> Result<Option<Pomset>, AxiomError> {
            let next = current.with_extra_order(&[(from, to)])?;
            let ok = check_axioms(p, &CandidateOrder { order: next.clone() }, init)?.consistent();
            Ok(ok.then_some(next))
        };
        if covered(&current, a, b) {
            current = attempt(a, b)?.expect("the pair the condition allows keeps the order consistent");
            ext.by_condition += 1;
        } else if covered(&current, b, a) {
            current = attempt(b, a)?.expect("the pair the condition allows keeps the order consistent");
            ext.by_symmetric += 1;
        } else if let Some(next) = attempt(a, b)? {
            current = next;
            ext.by_check += 1;
        } else if let Some(next) = attempt(b, a)? {
            current = next;
            ext.by_check += 1;
        } else {
            return Err(AxiomError::Stuck((a, b)));
        }
    }
    ext.total = CandidateOrder { order: current }.sequence().expect("no unordered pairs left");
    Ok(ext)
}

/// Every strict partial order contained in the total order `sequence`.
/// Refuses totals with more than `pair_limit` ordered pairs.
pub fn weakenings(p: &Pomset, sequence: &[NodeId], pair_limit: usize) -> Result<Vec<CandidateOrder>, AxiomError> {
    let pairs: Vec<(NodeId, NodeId)> =
        sequence.iter().enumerate().flat_map(|(i, &a)| sequence[i + 1..].iter().map(move |&b| (a, b))).collect();
    if pairs.len() > pair_limit || pairs.len() >= 64 {
        return Err(AxiomError::TooLarge { nodes: pairs.len(), limit: pair_limit.min(63) });
    }
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let mut above = vec![0 as NodeSet; p.len()];
        for (i, &(a, b)) in pairs.iter().enumerate() {
            if mask & (1 << i) != 0 {
                above[a] |= bit(b);
            }
        }
        let transitive = p.nodes().all(|a| members(above[a]).all(|b| above[b] & !above[a] == 0));
        if transitive {
            let chosen: Vec<_> =
                pairs.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &pr)| pr).collect();
            out.push(CandidateOrder { order: Pomset::from_edges(p.labels().to_vec(), &chosen)? });
        }
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests;
