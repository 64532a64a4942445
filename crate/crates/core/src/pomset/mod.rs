//! Labelled strict partial orders (pomsets) over memory actions.
//!
//! A [`Pomset`] stores its order as bit-set rows of the transitive closure
//! together with the covering relation (the transitive reduction). Node ids
//! are dense indices; two pomsets are the same abstract pomset when they are
//! related by a label-preserving order isomorphism, which [`Pomset::canonical`]
//! turns into structural equality.

mod canon;
mod dot;
mod lin;
mod sp;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{Loc, Value};

pub use canon::isomorphisms;
pub use lin::count_linearisations;
pub use lin::DEFAULT_LIN_NODE_MAX;
pub use sp::{NotSp, SpTerm};

/// Upper bound on pomset size imposed by the bit-set representation.
pub const MAX_NODES: usize = 128;

pub type NodeId = usize;

/// A set of nodes of one pomset.
pub type NodeSet = u128;

pub fn bit(n: NodeId) -> NodeSet {
    1u128 << n
}

/// Iterates the members of a node set in increasing order.
pub fn members(mut set: NodeSet) -> impl Iterator<Item = NodeId> {
    std::iter::from_fn(move || {
        if set == 0 {
            return None;
        }
        let n = set.trailing_zeros() as usize;
        set &= set - 1;
        Some(n)
    })
}

pub(crate) fn full_set(n: usize) -> NodeSet {
    if n == 0 {
        0
    } else if n >= 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    /// `x := v`: the write reaches shared memory.
    GlobalWrite { loc: Loc, value: Value },
    /// `x̄ := v`: the write enters the thread's store buffer.
    BufferWrite { loc: Loc, value: Value },
    /// `x = v`.
    Read { loc: Loc, value: Value },
    /// The silent action `δ`.
    Delta,
}

impl Action {
    pub fn write(x: Loc, v: Value) -> Self {
        Action::GlobalWrite { loc: x, value: v }
    }

    pub fn buffer(x: Loc, v: Value) -> Self {
        Action::BufferWrite { loc: x, value: v }
    }

    pub fn read(x: Loc, v: Value) -> Self {
        Action::Read { loc: x, value: v }
    }

    pub fn loc(&self) -> Option<Loc> {
        match self {
            Action::GlobalWrite { loc, .. } | Action::BufferWrite { loc, .. } | Action::Read { loc, .. } => Some(*loc),
            Action::Delta => None,
        }
    }

    pub fn value(&self) -> Option<Value> {
        match self {
            Action::GlobalWrite { value, .. } | Action::BufferWrite { value, .. } | Action::Read { value, .. } => {
                Some(*value)
            }
            Action::Delta => None,
        }
    }

    pub fn is_global_write(&self) -> bool {
        matches!(self, Action::GlobalWrite { .. })
    }

    pub fn is_buffer_write(&self) -> bool {
        matches!(self, Action::BufferWrite { .. })
    }

    pub fn is_read(&self) -> bool {
        matches!(self, Action::Read { .. })
    }

    pub fn is_delta(&self) -> bool {
        matches!(self, Action::Delta)
    }

    /// Member of the program-order alphabet (everything but buffer writes).
    pub fn is_po(&self) -> bool {
        !self.is_buffer_write()
    }

    /// Label text with buffer locations spelled `x^` instead of `x̄`.
    pub fn ascii(&self) -> String {
        match self {
            Action::GlobalWrite { loc, value } => format!("{loc}:={value}"),
            Action::BufferWrite { loc, value } => format!("{loc}^:={value}"),
            Action::Read { loc, value } => format!("{loc}={value}"),
            Action::Delta => "delta".to_string(),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::GlobalWrite { loc, value } => write!(f, "{loc}:={value}"),
            Action::BufferWrite { loc, value } => write!(f, "{loc}\u{304}:={value}"),
            Action::Read { loc, value } => write!(f, "{loc}={value}"),
            Action::Delta => write!(f, "δ"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot read action label {0:?}")]
pub struct LabelError(pub String);

impl std::str::FromStr for Action {
    type Err = LabelError;

    /// Accepts both the ascii and the display spelling: `x:=1`, `x^:=1` or
    /// `x\u{304}:=1`, `x=1`, `delta` or `δ`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = || LabelError(text.to_string());
        let t = text.trim();
        if t == "delta" || t == "δ" {
            return Ok(Action::Delta);
        }
        let (lhs, rhs, assign) = match t.split_once(":=") {
            Some((l, r)) => (l, r, true),
            None => t.split_once('=').map(|(l, r)| (l, r, false)).ok_or_else(bad)?,
        };
        let value: Value = rhs.trim().parse().map_err(|_| bad())?;
        let lhs = lhs.trim();
        let (name, buffered) = match lhs.strip_suffix('^').or_else(|| lhs.strip_suffix('\u{304}')) {
            Some(name) => (name, true),
            None => (lhs, false),
        };
        let loc = Loc::new(name).ok_or_else(bad)?;
        match (assign, buffered) {
            (true, false) => Ok(Action::write(loc, value)),
            (true, true) => Ok(Action::buffer(loc, value)),
            (false, false) => Ok(Action::read(loc, value)),
            (false, true) => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PomsetError {
    #[error("pomset has {0} nodes; at most {MAX_NODES} are supported")]
    TooManyNodes(usize),
    #[error("edge {0} < {1} mentions a node outside the pomset")]
    BadEdge(NodeId, NodeId),
    #[error("order has a cycle through node {0}")]
    Cycle(NodeId),
    #[error("pomset has {nodes} nodes, above the linearisation bound {bound}")]
    LinearisationBound { nodes: usize, bound: usize },
}

/// A finite labelled strict partial order.
#[derive(Clone)]
pub struct Pomset {
    labels: Vec<Action>,
    /// `above[n]`: nodes strictly greater than `n`.
    above: Vec<NodeSet>,
    /// `below[n]`: nodes strictly smaller than `n`.
    below: Vec<NodeSet>,
    /// `covers[n]`: immediate successors of `n`.
    covers: Vec<NodeSet>,
}

impl PartialEq for Pomset {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.above == other.above
    }
}

impl Eq for Pomset {}

impl std::hash::Hash for Pomset {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.labels.hash(state);
        self.above.hash(state);
    }
}

impl PartialOrd for Pomset {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pomset {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.labels.len(), &self.labels, &self.above).cmp(&(other.labels.len(), &other.labels, &other.above))
    }
}

impl Default for Pomset {
    fn default() -> Self {
        Pomset::empty()
    }
}

impl Pomset {
    /// The empty pomset `𝟎`.
    pub fn empty() -> Self {
        Pomset { labels: Vec::new(), above: Vec::new(), below: Vec::new(), covers: Vec::new() }
    }

    pub fn singleton(a: Action) -> Self {
        Pomset { labels: vec![a], above: vec![0], below: vec![0], covers: vec![0] }
    }

    pub fn delta() -> Self {
        Pomset::singleton(Action::Delta)
    }

    /// The linear pomset `a1 < a2 < … < an`.
    pub fn chain(actions: impl IntoIterator<Item = Action>) -> Self {
        let labels: Vec<Action> = actions.into_iter().collect();
        let n = labels.len();
        assert!(n <= MAX_NODES, "chain of {n} actions exceeds {MAX_NODES} nodes");
        let full = full_set(n);
        let above = (0..n).map(|i| full & !full_set(i + 1)).collect();
        let below = (0..n).map(full_set).collect();
        let covers = (0..n).map(|i| if i + 1 < n { bit(i + 1) } else { 0 }).collect();
        Pomset { labels, above, below, covers }
    }

    /// Builds a pomset from labels and generating edges `a < b`; the order is
    /// their transitive closure.
    pub fn from_edges(labels: Vec<Action>, edges: &[(NodeId, NodeId)]) -> Result<Self, PomsetError> {
        let n = labels.len();
        if n > MAX_NODES {
            return Err(PomsetError::TooManyNodes(n));
        }
        let mut above = vec![0 as NodeSet; n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(PomsetError::BadEdge(a, b));
            }
            above[a] |= bit(b);
        }
        Self::from_relation(labels, above)
    }

    /// Closes a successor relation transitively and checks irreflexivity.
    pub(crate) fn from_relation(labels: Vec<Action>, mut above: Vec<NodeSet>) -> Result<Self, PomsetError> {
        let n = labels.len();
        if n > MAX_NODES {
            return Err(PomsetError::TooManyNodes(n));
        }
        // Warshall over bit rows.
        for k in 0..n {
            let row_k = above[k];
            for row in above.iter_mut() {
                if *row & bit(k) != 0 {
                    *row |= row_k;
                }
            }
        }
        if let Some(i) = (0..n).find(|&i| above[i] & bit(i) != 0) {
            return Err(PomsetError::Cycle(i));
        }
        Ok(Self::from_closed(labels, above))
    }

    /// `above` must already be a transitively closed strict order.
    fn from_closed(labels: Vec<Action>, above: Vec<NodeSet>) -> Self {
        let n = labels.len();
        let mut below = vec![0 as NodeSet; n];
        for (a, &row) in above.iter().enumerate() {
            for b in members(row) {
                below[b] |= bit(a);
            }
        }
        let covers = (0..n)
            .map(|a| {
                let indirect = members(above[a]).fold(0, |acc, m| acc | above[m]);
                above[a] & !indirect
            })
            .collect();
        Pomset { labels, above, below, covers }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, n: NodeId) -> Action {
        self.labels[n]
    }

    pub fn labels(&self) -> &[Action] {
        &self.labels
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.labels.len()
    }

    pub fn all_nodes(&self) -> NodeSet {
        full_set(self.len())
    }

    /// `a <_P b`.
    pub fn lt(&self, a: NodeId, b: NodeId) -> bool {
        self.above[a] & bit(b) != 0
    }

    /// Comparable under the reflexive closure.
    pub fn comparable(&self, a: NodeId, b: NodeId) -> bool {
        a == b || self.lt(a, b) || self.lt(b, a)
    }

    pub fn above(&self, n: NodeId) -> NodeSet {
        self.above[n]
    }

    pub fn below(&self, n: NodeId) -> NodeSet {
        self.below[n]
    }

    /// Immediate successors (edges of the transitive reduction).
    pub fn covers(&self, n: NodeId) -> NodeSet {
        self.covers[n]
    }

    /// Edges of the transitive reduction, sorted.
    pub fn cover_edges(&self) -> Vec<(NodeId, NodeId)> {
        self.nodes().flat_map(|a| members(self.covers[a]).map(move |b| (a, b))).collect()
    }

    /// `{n' | n' < n} ∪ {n}`.
    pub fn lower_closure(&self, n: NodeId) -> NodeSet {
        self.below[n] | bit(n)
    }

    pub fn nodes_where(&self, pred: impl Fn(&Action) -> bool) -> NodeSet {
        self.nodes().filter(|&n| pred(&self.labels[n])).fold(0, |acc, n| acc | bit(n))
    }

    pub fn count(&self, pred: impl Fn(&Action) -> bool) -> usize {
        self.labels.iter().filter(|a| pred(a)).count()
    }

    pub fn is_linear(&self) -> bool {
        self.nodes().all(|a| self.nodes().all(|b| self.comparable(a, b)))
    }

    /// `P ; Q`: every node of `P` below every node of `Q`.
    pub fn seq(&self, other: &Pomset) -> Pomset {
        self.compose(other, true)
    }

    /// `P ∥ Q`: disjoint union.
    pub fn par(&self, other: &Pomset) -> Pomset {
        self.compose(other, false)
    }

    fn compose(&self, other: &Pomset, ordered: bool) -> Pomset {
        let (n, m) = (self.len(), other.len());
        assert!(n + m <= MAX_NODES, "composition of {n} and {m} nodes exceeds {MAX_NODES}");
        let shifted = full_set(m) << n;
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        let mut above: Vec<NodeSet> = self.above.iter().map(|&row| if ordered { row | shifted } else { row }).collect();
        above.extend(other.above.iter().map(|&row| row << n));
        Pomset::from_closed(labels, above)
    }

    /// Induced suborder on `keep`, with nodes renumbered in increasing order.
    pub fn induced(&self, keep: NodeSet) -> Pomset {
        let kept: Vec<NodeId> = members(keep & self.all_nodes()).collect();
        let mut index = [usize::MAX; MAX_NODES];
        for (i, &n) in kept.iter().enumerate() {
            index[n] = i;
        }
        let labels = kept.iter().map(|&n| self.labels[n]).collect();
        let above = kept.iter().map(|&n| members(self.above[n] & keep).fold(0, |acc, m| acc | bit(index[m]))).collect();
        Pomset::from_closed(labels, above)
    }

    /// `P↾keep`: the suborder on actions satisfying `keep`.
    pub fn restrict(&self, keep: impl Fn(&Action) -> bool) -> Pomset {
        self.induced(self.nodes_where(keep))
    }

    /// Deletes every `δ`; an all-`δ` nonempty pomset becomes `{δ}`.
    pub fn delta_normalize(&self) -> Pomset {
        if !self.labels.iter().any(Action::is_delta) {
            return self.clone();
        }
        let kept = self.restrict(|a| !a.is_delta());
        if kept.is_empty() {
            Pomset::delta()
        } else {
            kept
        }
    }

    /// Relabels every node with `f`, keeping the order.
    pub fn map_labels(&self, f: impl Fn(&Action) -> Action) -> Pomset {
        Pomset {
            labels: self.labels.iter().map(f).collect(),
            above: self.above.clone(),
            below: self.below.clone(),
            covers: self.covers.clone(),
        }
    }

    /// Renumbers nodes: node `order[i]` of `self` becomes node `i`.
    pub fn permuted(&self, order: &[NodeId]) -> Pomset {
        debug_assert_eq!(order.len(), self.len());
        let mut index = vec![0; self.len()];
        for (i, &n) in order.iter().enumerate() {
            index[n] = i;
        }
        let labels = order.iter().map(|&n| self.labels[n]).collect();
        let above = order.iter().map(|&n| members(self.above[n]).fold(0, |acc, m| acc | bit(index[m]))).collect();
        Pomset::from_closed(labels, above)
    }

    /// Extends the order with extra pairs; fails on a cycle.
    pub fn with_extra_order(&self, pairs: &[(NodeId, NodeId)]) -> Result<Pomset, PomsetError> {
        let mut above = self.above.clone();
        for &(a, b) in pairs {
            above[a] |= bit(b);
        }
        Pomset::from_relation(self.labels.clone(), above)
    }
}

impl fmt::Debug for Pomset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Renders as `{0:x̄:=1 1:x:=1 | 0<1}`, listing cover edges only.
impl fmt::Display for Pomset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.labels.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{i}:{a}")?;
        }
        let edges = self.cover_edges();
        if !edges.is_empty() {
            write!(f, " |")?;
            for (a, b) in edges {
                write!(f, " {a}<{b}")?;
            }
        }
        write!(f, "}}")
    }
}

/// Serialized as node labels (ASCII spelling) and cover edges.
impl Serialize for Pomset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Pomset", 2)?;
        let nodes: Vec<String> = self.labels.iter().map(Action::ascii).collect();
        st.serialize_field("nodes", &nodes)?;
        st.serialize_field("edges", &self.cover_edges())?;
        st.end()
    }
}

/// Wire form: labels in ascii spelling and generating edges.
#[derive(Deserialize)]
struct PomsetText {
    nodes: Vec<String>,
    #[serde(default)]
    edges: Vec<(NodeId, NodeId)>,
}

impl<'de> Deserialize<'de> for Pomset {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let text = PomsetText::deserialize(d)?;
        let labels =
            text.nodes.iter().map(|l| l.parse()).collect::<Result<Vec<Action>, _>>().map_err(D::Error::custom)?;
        Pomset::from_edges(labels, &text.edges).map_err(D::Error::custom)
    }
}
