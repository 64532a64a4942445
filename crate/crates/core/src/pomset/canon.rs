//! Canonical labelling by colour refinement with individualisation.
//!
//! Colours start from labels and are refined by the multisets of colours
//! strictly below and strictly above each node. When refinement stalls with a
//! non-singleton cell, each member of the first such cell is individualised in
//! turn and the lexicographically least resulting encoding wins.

use super::{members, Action, NodeId, Pomset};

type Colours = Vec<u32>;

fn refine(p: &Pomset, mut colours: Colours) -> Colours {
    let n = p.len();
    let mut classes = distinct(&colours);
    loop {
        let signatures: Vec<(u32, Vec<u32>, Vec<u32>)> = (0..n)
            .map(|v| {
                let mut below: Vec<u32> = members(p.below(v)).map(|u| colours[u]).collect();
                let mut above: Vec<u32> = members(p.above(v)).map(|u| colours[u]).collect();
                below.sort_unstable();
                above.sort_unstable();
                (colours[v], below, above)
            })
            .collect();
        let mut sorted: Vec<&(u32, Vec<u32>, Vec<u32>)> = signatures.iter().collect();
        sorted.sort();
        sorted.dedup();
        colours = signatures.iter().map(|s| sorted.binary_search(&s).expect("signature present") as u32).collect();
        let now = distinct(&colours);
        if now == classes {
            return colours;
        }
        classes = now;
    }
}

fn distinct(colours: &[u32]) -> usize {
    let mut c = colours.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

fn initial_colours(p: &Pomset) -> Colours {
    let mut labels: Vec<Action> = p.labels().to_vec();
    labels.sort();
    labels.dedup();
    p.labels().iter().map(|a| labels.binary_search(a).expect("label present") as u32).collect()
}

/// Encoding of the pomset under a node order; compared lexicographically.
fn encode(p: &Pomset, order: &[NodeId]) -> Code {
    let mut index = vec![0usize; p.len()];
    for (i, &v) in order.iter().enumerate() {
        index[v] = i;
    }
    let labels = order.iter().map(|&v| p.label(v)).collect();
    let rows = order.iter().map(|&v| members(p.above(v)).fold(0u128, |acc, u| acc | (1u128 << index[u]))).collect();
    (labels, rows)
}

/// Labels and successor bitsets in a given node order.
type Code = (Vec<Action>, Vec<u128>);

struct Search<'a> {
    p: &'a Pomset,
    best: Option<(Code, Vec<NodeId>)>,
}

impl Search<'_> {
    fn run(&mut self, colours: Colours) {
        let n = self.p.len();
        let mut counts = vec![0usize; n];
        for &c in &colours {
            counts[c as usize] += 1;
        }
        match (0..n).find(|&c| counts[c] > 1) {
            None => {
                let mut order: Vec<NodeId> = (0..n).collect();
                order.sort_by_key(|&v| colours[v]);
                let code = encode(self.p, &order);
                if self.best.as_ref().is_none_or(|(b, _)| code < *b) {
                    self.best = Some((code, order));
                }
            }
            Some(cell) => {
                let cell = cell as u32;
                for v in (0..n).filter(|&v| colours[v] == cell) {
                    // v keeps 2c, its cell-mates move to 2c+1; others double.
                    let split: Colours =
                        colours.iter().enumerate().map(|(u, &c)| 2 * c + u32::from(c == cell && u != v)).collect();
                    self.run(refine(self.p, split));
                }
            }
        }
    }
}

/// Node order placing `p` in canonical form: node `order[i]` becomes `i`.
pub(super) fn canonical_order(p: &Pomset) -> Vec<NodeId> {
    if p.len() <= 1 {
        return (0..p.len()).collect();
    }
    let mut search = Search { p, best: None };
    search.run(refine(p, initial_colours(p)));
    search.best.expect("at least one leaf").1
}

impl Pomset {
    /// The canonical representative of this pomset's isomorphism class.
    pub fn canonical(&self) -> Pomset {
        self.permuted(&canonical_order(self))
    }

    /// Canonical representative and the renumbering used: `order[i]` is the
    /// node of `self` placed at position `i`.
    pub fn canonical_with_order(&self) -> (Pomset, Vec<NodeId>) {
        let order = canonical_order(self);
        (self.permuted(&order), order)
    }

    /// Label-preserving order isomorphism test.
    pub fn iso_eq(&self, other: &Pomset) -> bool {
        self.len() == other.len() && self.canonical() == other.canonical()
    }
}

/// Every label-preserving order isomorphism `p → q`, as maps `node ↦ node`.
pub fn isomorphisms(p: &Pomset, q: &Pomset) -> Vec<Vec<NodeId>> {
    let n = p.len();
    if n != q.len() {
        return Vec::new();
    }
    let cp = refine(p, initial_colours(p));
    let cq = refine(q, initial_colours(q));
    // Colours are only comparable across pomsets when both refinements agree
    // on the multiset of signatures; check via canonical forms first.
    if p.canonical() != q.canonical() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    extend_iso(p, q, &cp, &cq, 0, &mut map, &mut used, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn extend_iso(
    p: &Pomset,
    q: &Pomset,
    cp: &[u32],
    cq: &[u32],
    v: NodeId,
    map: &mut Vec<NodeId>,
    used: &mut Vec<bool>,
    out: &mut Vec<Vec<NodeId>>,
) {
    if v == p.len() {
        out.push(map.clone());
        return;
    }
    for u in 0..q.len() {
        if used[u] || p.label(v) != q.label(u) || cp[v] != cq[u] {
            continue;
        }
        let fits = (0..v).all(|w| p.lt(w, v) == q.lt(map[w], u) && p.lt(v, w) == q.lt(u, map[w]));
        if !fits {
            continue;
        }
        map[v] = u;
        used[u] = true;
        extend_iso(p, q, cp, cq, v + 1, map, used, out);
        used[u] = false;
        map[v] = usize::MAX;
    }
}
