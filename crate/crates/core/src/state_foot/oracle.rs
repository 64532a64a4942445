//! Footprints straight from the three closure rules, trying every way a
//! rule can apply: every sequential split of the pomset at every cut of the
//! environment and every parallel split. No rule relates a pomset to
//! itself, so the least closed set is a plain recursive union.

use std::collections::HashMap;

use super::engine::FootprintError;
use super::env::{EnvItem, WriteEnv};
use super::footstep::{action_footprint, env_footprint, footstep_seq, FootprintCtx, Footstep, FootstepSet};
use crate::lang::{Loc, Value};
use crate::po_sem::Bounds;
use crate::pomset::{bit, members, NodeSet, Pomset};

pub const ORACLE_NODE_MAX: usize = 6;

pub fn footprint_oracle(p: &Pomset, env: &WriteEnv, b: &Bounds) -> Result<FootstepSet, FootprintError> {
    footprint_oracle_in(p, env, &FootprintCtx::for_pomset(p, b))
}

pub fn footprint_oracle_in(p: &Pomset, env: &WriteEnv, ctx: &FootprintCtx) -> Result<FootstepSet, FootprintError> {
    if p.len() > ORACLE_NODE_MAX {
        return Err(FootprintError::TooLarge { nodes: p.len(), limit: ORACLE_NODE_MAX });
    }
    env.validate(p)?;
    let mut closure = Closure { p, ctx, memo: HashMap::new() };
    Ok(closure.rules(p.all_nodes(), &env.items))
}

struct Closure<'a> {
    p: &'a Pomset,
    ctx: &'a FootprintCtx,
    memo: HashMap<(NodeSet, Vec<EnvItem>), FootstepSet>,
}

fn foreign_only(items: &[EnvItem]) -> Option<Vec<(Loc, Value)>> {
    items
        .iter()
        .map(|item| match *item {
            EnvItem::Foreign(x, v) => Some((x, v)),
            EnvItem::Node(_) => None,
        })
        .collect()
}

impl Closure<'_> {
    fn rules(&mut self, nodes: NodeSet, items: &[EnvItem]) -> FootstepSet {
        let key = (nodes, items.to_vec());
        if let Some(known) = self.memo.get(&key) {
            return known.clone();
        }
        let mut out = FootstepSet::new();
        if nodes.count_ones() == 1 {
            out.extend(self.act(nodes, items));
        }
        out.extend(self.seq_instances(nodes, items));
        out.extend(self.par_instances(nodes, items));
        self.memo.insert(key, out.clone());
        out
    }

    fn act(&self, nodes: NodeSet, items: &[EnvItem]) -> FootstepSet {
        let n = members(nodes).next().expect("singleton");
        let at = items.iter().position(|i| *i == EnvItem::Node(n)).expect("node in environment");
        let before = foreign_only(&items[..at]).expect("only one node");
        let after = foreign_only(&items[at + 1..]).expect("only one node");
        let step = footstep_seq(&env_footprint(&before, self.ctx), &action_footprint(&self.p.label(n), self.ctx));
        footstep_seq(&step, &env_footprint(&after, self.ctx))
    }

    /// Every split of `nodes` into a nonempty prefix wholly below a nonempty
    /// rest, at every cut of the environment separating them.
    fn seq_instances(&mut self, nodes: NodeSet, items: &[EnvItem]) -> FootstepSet {
        let mut out = FootstepSet::new();
        for first in subsets(nodes) {
            let rest = nodes & !first;
            let ordered = members(first).all(|a| members(rest).all(|b| self.p.lt(a, b)));
            if !ordered {
                continue;
            }
            for cut in 0..=items.len() {
                let (left, right) = items.split_at(cut);
                if node_set(left) != first || node_set(right) != rest {
                    continue;
                }
                let a = self.rules(first, left);
                let b = self.rules(rest, right);
                out.extend(footstep_seq(&a, &b));
            }
        }
        out
    }

    /// Every split of `nodes` into two unordered halves; each half sees the
    /// other's global writes as foreign and nothing else of it.
    fn par_instances(&mut self, nodes: NodeSet, items: &[EnvItem]) -> FootstepSet {
        let mut out = FootstepSet::new();
        for one in subsets(nodes) {
            let two = nodes & !one;
            let unordered = members(one).all(|a| members(two).all(|b| !self.p.comparable(a, b)));
            if !unordered {
                continue;
            }
            let s1 = self.rules(one, &self.view(items, one));
            let s2 = self.rules(two, &self.view(items, two));
            for a in s1.iter().filter(|f| f.pre.zeta() && f.post.zeta()) {
                for b in s2.iter().filter(|f| f.pre.zeta() && f.post.zeta()) {
                    // The rule only asks the preconditions to agree; the
                    // postconditions then agree too, and a clash would make
                    // the union ill-defined, so such pairs are skipped.
                    if a.pre.consistent(&b.pre) && a.post.consistent(&b.post) {
                        out.insert(Footstep::new(a.pre.union(&b.pre), a.post.union(&b.post)));
                    }
                }
            }
        }
        out
    }

    fn view(&self, items: &[EnvItem], keep: NodeSet) -> Vec<EnvItem> {
        let mut out = Vec::new();
        for item in items {
            match *item {
                EnvItem::Node(n) if keep & bit(n) != 0 => out.push(*item),
                EnvItem::Node(n) => {
                    let a = self.p.label(n);
                    if let (true, Some(x), Some(v)) = (a.is_global_write(), a.loc(), a.value()) {
                        out.push(EnvItem::Foreign(x, v));
                    }
                }
                EnvItem::Foreign(..) => out.push(*item),
            }
        }
        out
    }
}

fn node_set(items: &[EnvItem]) -> NodeSet {
    items.iter().fold(0, |acc, item| match *item {
        EnvItem::Node(n) => acc | bit(n),
        EnvItem::Foreign(..) => acc,
    })
}

/// Nonempty proper subsets of `set`.
fn subsets(set: NodeSet) -> impl Iterator<Item = NodeSet> {
    let elems: Vec<NodeSet> = members(set).map(bit).collect();
    let count = 1u32 << elems.len();
    (1..count.saturating_sub(1))
        .map(move |mask| elems.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).fold(0, |acc, (_, b)| acc | b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::loc;
    use crate::pomset::Action;

    #[test]
    fn single_actions_follow_the_act_rule() {
        let ctx = FootprintCtx::new([0, 1], 1);
        for a in [Action::write(loc("x"), 1), Action::buffer(loc("x"), 0), Action::read(loc("x"), 1), Action::Delta] {
            let p = Pomset::singleton(a);
            let env = WriteEnv::new(vec![EnvItem::Foreign(loc("y"), 1), EnvItem::Node(0)]);
            let expected = footstep_seq(&env_footprint(&[(loc("y"), 1)], &ctx), &action_footprint(&a, &ctx));
            assert_eq!(footprint_oracle_in(&p, &env, &ctx).unwrap(), expected);
        }
    }

    #[test]
    fn size_guard() {
        let p = Pomset::chain((0..7).map(|v| Action::write(loc("x"), v)));
        let env = WriteEnv::from_linearisation(&(0..7).collect::<Vec<_>>());
        let err = footprint_oracle(&p, &env, &Bounds::with_values([0])).unwrap_err();
        assert_eq!(err, FootprintError::TooLarge { nodes: 7, limit: ORACLE_NODE_MAX });
    }

    #[test]
    fn empty_pomset_has_no_footsteps() {
        let got = footprint_oracle(&Pomset::empty(), &WriteEnv::default(), &Bounds::with_values([0])).unwrap();
        assert!(got.is_empty());
    }
}
