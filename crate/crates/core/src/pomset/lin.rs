//! Linear extensions (topological orders).

use std::collections::HashMap;
use std::ops::ControlFlow;

use super::{bit, members, NodeId, NodeSet, Pomset, PomsetError};

/// Default node bound for exhaustive linearisation.
pub const DEFAULT_LIN_NODE_MAX: usize = 12;

impl Pomset {
    /// All linearisations, refusing pomsets above `node_bound` nodes.
    pub fn linearisations(&self, node_bound: usize) -> Result<Vec<Vec<NodeId>>, PomsetError> {
        if self.len() > node_bound {
            return Err(PomsetError::LinearisationBound { nodes: self.len(), bound: node_bound });
        }
        let mut out = Vec::new();
        let _ = self.for_each_linearisation(|seq| {
            out.push(seq.to_vec());
            ControlFlow::<()>::Continue(())
        });
        Ok(out)
    }

    /// Visits linearisations in lexicographic node order until `visit` breaks.
    pub fn for_each_linearisation<B>(&self, mut visit: impl FnMut(&[NodeId]) -> ControlFlow<B>) -> ControlFlow<B> {
        let mut prefix = Vec::with_capacity(self.len());
        self.extend_linearisation(0, &mut prefix, &mut visit)
    }

    fn extend_linearisation<B>(
        &self,
        placed: NodeSet,
        prefix: &mut Vec<NodeId>,
        visit: &mut impl FnMut(&[NodeId]) -> ControlFlow<B>,
    ) -> ControlFlow<B> {
        if prefix.len() == self.len() {
            return visit(prefix);
        }
        let ready = members(self.all_nodes() & !placed).filter(|&n| self.below(n) & !placed == 0);
        for n in ready.collect::<Vec<_>>() {
            prefix.push(n);
            self.extend_linearisation(placed | bit(n), prefix, visit)?;
            prefix.pop();
        }
        ControlFlow::Continue(())
    }

    /// Whether `seq` lists every node once in an order respecting `<`.
    pub fn is_linearisation(&self, seq: &[NodeId]) -> bool {
        if seq.len() != self.len() {
            return false;
        }
        let mut placed: NodeSet = 0;
        for &n in seq {
            if n >= self.len() || placed & bit(n) != 0 || self.below(n) & !placed != 0 {
                return false;
            }
            placed |= bit(n);
        }
        true
    }
}

/// Number of linearisations by dynamic programming over down-sets.
pub fn count_linearisations(p: &Pomset) -> u128 {
    fn go(p: &Pomset, placed: NodeSet, memo: &mut HashMap<NodeSet, u128>) -> u128 {
        if placed == p.all_nodes() {
            return 1;
        }
        if let Some(&c) = memo.get(&placed) {
            return c;
        }
        let total = members(p.all_nodes() & !placed)
            .filter(|&n| p.below(n) & !placed == 0)
            .map(|n| go(p, placed | bit(n), memo))
            .sum();
        memo.insert(placed, total);
        total
    }
    go(p, 0, &mut HashMap::new())
}
