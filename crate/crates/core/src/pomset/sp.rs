//! Series-parallel decomposition.
//!
//! Parallel parts are the connected components of the comparability graph;
//! series parts are the connected components of the incomparability graph,
//! which a series composition orders totally. A connected poset whose
//! incomparability graph is also connected contains an N and is not SP.

use serde::Serialize;

use super::{bit, members, NodeId, NodeSet, Pomset};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpTerm {
    /// A maximal linear segment, listed bottom to top.
    Leaf(Vec<NodeId>),
    SeqNode(Box<SpTerm>, Box<SpTerm>),
    ParNode(Box<SpTerm>, Box<SpTerm>),
}

impl SpTerm {
    /// Rebuilds the pomset described by the term, taking labels from `p`.
    pub fn evaluate(&self, p: &Pomset) -> Pomset {
        match self {
            SpTerm::Leaf(nodes) => Pomset::chain(nodes.iter().map(|&n| p.label(n))),
            SpTerm::SeqNode(a, b) => a.evaluate(p).seq(&b.evaluate(p)),
            SpTerm::ParNode(a, b) => a.evaluate(p).par(&b.evaluate(p)),
        }
    }

    /// Nodes covered by the term.
    pub fn nodes(&self) -> NodeSet {
        match self {
            SpTerm::Leaf(ns) => ns.iter().fold(0, |acc, &n| acc | bit(n)),
            SpTerm::SeqNode(a, b) | SpTerm::ParNode(a, b) => a.nodes() | b.nodes(),
        }
    }

    /// Operands of a maximal run of sequential compositions, left to right.
    pub fn seq_parts(&self) -> Vec<&SpTerm> {
        match self {
            SpTerm::SeqNode(a, b) => {
                let mut parts = a.seq_parts();
                parts.extend(b.seq_parts());
                parts
            }
            other => vec![other],
        }
    }

    /// Operands of a maximal run of parallel compositions.
    pub fn par_parts(&self) -> Vec<&SpTerm> {
        match self {
            SpTerm::ParNode(a, b) => {
                let mut parts = a.par_parts();
                parts.extend(b.par_parts());
                parts
            }
            other => vec![other],
        }
    }

    /// The linear segments in left-to-right order.
    pub fn leaves(&self) -> Vec<&[NodeId]> {
        match self {
            SpTerm::Leaf(ns) => vec![ns.as_slice()],
            SpTerm::SeqNode(a, b) | SpTerm::ParNode(a, b) => {
                let mut out = a.leaves();
                out.extend(b.leaves());
                out
            }
        }
    }
}

/// The pomset has an N-shaped suborder, witnessed by the named subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("pomset is not series-parallel (N-shaped suborder among nodes {0:#b})")]
pub struct NotSp(pub NodeSet);

fn components(set: NodeSet, adjacent: impl Fn(NodeId) -> NodeSet) -> Vec<NodeSet> {
    let mut out = Vec::new();
    let mut left = set;
    while left != 0 {
        let start = left.trailing_zeros() as usize;
        let mut comp = bit(start);
        let mut frontier = comp;
        while frontier != 0 {
            let next = members(frontier).fold(0, |acc, n| acc | adjacent(n)) & set & !comp;
            comp |= next;
            frontier = next;
        }
        out.push(comp);
        left &= !comp;
    }
    out
}

fn fold_right(parts: Vec<SpTerm>, node: fn(Box<SpTerm>, Box<SpTerm>) -> SpTerm) -> SpTerm {
    let mut it = parts.into_iter().rev();
    let mut acc = it.next().expect("nonempty parts");
    for part in it {
        acc = node(Box::new(part), Box::new(acc));
    }
    acc
}

fn decompose(p: &Pomset, set: NodeSet) -> Result<SpTerm, NotSp> {
    if set.count_ones() <= 1 {
        return Ok(SpTerm::Leaf(members(set).collect()));
    }
    let comparable = |n: NodeId| p.above(n) | p.below(n);
    let parts = components(set, comparable);
    if parts.len() > 1 {
        let terms = parts.into_iter().map(|c| decompose(p, c)).collect::<Result<Vec<_>, _>>()?;
        return Ok(fold_right(terms, SpTerm::ParNode));
    }
    let incomparable = |n: NodeId| !(comparable(n) | bit(n));
    let mut series = components(set, incomparable);
    if series.len() == 1 {
        return Err(NotSp(set));
    }
    let first = |s: NodeSet| s.trailing_zeros() as usize;
    series.sort_by(
        |&a, &b| {
            if p.lt(first(a), first(b)) {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        },
    );
    let mut terms: Vec<SpTerm> = Vec::new();
    for s in series {
        let t = decompose(p, s)?;
        match (terms.last_mut(), t) {
            (Some(SpTerm::Leaf(prev)), SpTerm::Leaf(next)) => prev.extend(next),
            (_, t) => terms.push(t),
        }
    }
    Ok(fold_right(terms, SpTerm::SeqNode))
}

impl Pomset {
    /// Series-parallel decomposition; the empty pomset is `Leaf([])`.
    pub fn sp_decompose(&self) -> Result<SpTerm, NotSp> {
        decompose(self, self.all_nodes())
    }

    pub fn is_sp(&self) -> bool {
        self.sp_decompose().is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::loc;
    use crate::pomset::Action;

    fn a(v: i64) -> Action {
        Action::write(loc("x"), v)
    }

    #[test]
    fn chain_is_a_leaf() {
        let c = Pomset::chain([a(0), a(1), a(2)]);
        assert_eq!(c.sp_decompose().unwrap(), SpTerm::Leaf(vec![0, 1, 2]));
    }

    #[test]
    fn n_shape_is_not_sp() {
        let n = Pomset::from_edges(vec![a(0), a(1), a(2), a(3)], &[(0, 2), (1, 2), (1, 3)]).unwrap();
        assert!(n.sp_decompose().is_err());
    }

    #[test]
    fn diamond_decomposes_and_evaluates_back() {
        let d = Pomset::from_edges(vec![a(0), a(1), a(2), a(3)], &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let t = d.sp_decompose().unwrap();
        assert!(t.evaluate(&d).iso_eq(&d));
        assert_eq!(t.seq_parts().len(), 3);
    }
}
