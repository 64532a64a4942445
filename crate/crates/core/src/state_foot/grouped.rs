//! Footprints united over every environment that agrees on a fixed order of
//! the visible actions.
//!
//! Executions range over all linearisations of a pomset, but the footprint
//! under one only depends on where each linear segment's invisible actions
//! fall relative to the visible ones. Fixing the visible order and placing
//! the rest by dynamic programming avoids enumerating linearisations.

use std::collections::HashMap;
use std::rc::Rc;

use super::audit;
use super::env::{global_writes, project, EnvItem};
use super::footstep::{action_footprint, env_step, footstep_par, footstep_seq, unit_set, FootprintCtx, FootstepSet};
use crate::lang::Loc;
use crate::pomset::{bit, Action, NodeSet, NotSp, Pomset, SpTerm};

/// Which actions the fixed order covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Visibility {
    /// Global writes only: the order of flushes to memory.
    GlobalWrites,
    /// Reads, global writes and `δ`: everything but buffer writes.
    ProgramOrder,
}

impl Visibility {
    pub fn shows(self, a: &Action) -> bool {
        match self {
            Visibility::GlobalWrites => a.is_global_write(),
            Visibility::ProgramOrder => !a.is_buffer_write(),
        }
    }
}

type MemoKey = (NodeSet, Vec<EnvItem>, bool);

/// `W(P, M)`: the union of `⦃P⦄_Λ` over environments `Λ` whose visible
/// items, in order, are `M`. Node items in `M` must be visible nodes.
pub struct Grouped<'a> {
    p: &'a Pomset,
    term: SpTerm,
    ctx: &'a FootprintCtx,
    vis: Visibility,
    memo: HashMap<MemoKey, Rc<FootstepSet>>,
}

impl<'a> Grouped<'a> {
    pub fn new(p: &'a Pomset, ctx: &'a FootprintCtx, vis: Visibility) -> Result<Self, NotSp> {
        Ok(Grouped { p, term: p.sp_decompose()?, ctx, vis, memo: HashMap::new() })
    }

    /// Footsteps with empty buffers before and after.
    pub fn zeta_footsteps(&mut self, visible: &[EnvItem]) -> FootstepSet {
        if self.p.is_empty() {
            return FootstepSet::new();
        }
        let term = self.term.clone();
        self.union(&term, visible, true).iter().filter(|f| f.is_zeta()).cloned().collect()
    }

    /// All footsteps, unfiltered.
    pub fn footsteps(&mut self, visible: &[EnvItem]) -> FootstepSet {
        if self.p.is_empty() {
            return FootstepSet::new();
        }
        let term = self.term.clone();
        (*self.union(&term, visible, false)).clone()
    }

    /// With `zeta_pre`, footsteps whose precondition has pending writes are
    /// dropped early: prefixing cannot remove them.
    fn union(&mut self, term: &SpTerm, visible: &[EnvItem], zeta_pre: bool) -> Rc<FootstepSet> {
        let key = (term.nodes(), visible.to_vec(), zeta_pre);
        if let Some(hit) = self.memo.get(&key) {
            return Rc::clone(hit);
        }
        let result = match term {
            SpTerm::Leaf(chain) => self.leaf(chain, visible, zeta_pre),
            SpTerm::SeqNode(..) => self.series(&term.seq_parts(), visible, zeta_pre),
            SpTerm::ParNode(..) => {
                let parts = term.par_parts();
                let touched: Vec<Vec<Loc>> = parts.iter().map(|part| self.locations(part.nodes())).collect();
                let mut acc: Option<FootstepSet> = None;
                for (i, part) in parts.iter().enumerate() {
                    // Writes to a location this side never touches only matter
                    // to the sides that do; those see all of them.
                    let elsewhere = |x: Loc| !touched[i].contains(&x) && touched.iter().any(|t| t.contains(&x));
                    let mut view = project(self.p, visible, part.nodes(), |_| false);
                    view.retain(|item| !matches!(*item, EnvItem::Foreign(x, _) if elsewhere(x)));
                    let side = self.union(part, &view, true);
                    audit::audit_par_side(self.p, part, &side);
                    acc = Some(match acc {
                        None => side.iter().filter(|f| f.is_zeta()).cloned().collect(),
                        Some(a) => footstep_par(&a, &side),
                    });
                    if acc.as_ref().is_some_and(FootstepSet::is_empty) {
                        break;
                    }
                }
                acc.unwrap_or_default()
            }
        };
        if audit::is_enabled() {
            audit::audit(self.p, term, &global_writes(self.p, visible), &result);
        }
        let result = Rc::new(result);
        self.memo.insert(key, Rc::clone(&result));
        result
    }

    fn locations(&self, nodes: NodeSet) -> Vec<Loc> {
        let mut locs: Vec<Loc> = crate::pomset::members(nodes).filter_map(|n| self.p.label(n).loc()).collect();
        locs.sort_unstable();
        locs.dedup();
        locs
    }

    fn keep(&self, set: FootstepSet, zeta_pre: bool) -> FootstepSet {
        if zeta_pre {
            set.into_iter().filter(|f| f.pre.zeta()).collect()
        } else {
            set
        }
    }

    fn leaf(&self, chain: &[usize], visible: &[EnvItem], zeta_pre: bool) -> FootstepSet {
        let (k, m) = (chain.len(), visible.len());
        let mut cells: Vec<Vec<FootstepSet>> = vec![vec![FootstepSet::new(); m + 1]; k + 1];
        cells[0][0] = unit_set();
        for i in 0..=k {
            for j in 0..=m {
                let here = std::mem::take(&mut cells[i][j]);
                if here.is_empty() {
                    continue;
                }
                if i == k && j == m {
                    cells[i][j] = here;
                    continue;
                }
                if i < k {
                    let a = self.p.label(chain[i]);
                    if !self.vis.shows(&a) {
                        let next = self.keep(footstep_seq(&here, &action_footprint(&a, self.ctx)), zeta_pre);
                        cells[i + 1][j].extend(next);
                    }
                }
                if j < m {
                    match visible[j] {
                        EnvItem::Foreign(x, v) => {
                            let next = self.keep(footstep_seq(&here, &env_step(x, v, self.ctx)), zeta_pre);
                            cells[i][j + 1].extend(next);
                        }
                        EnvItem::Node(n) if i < k && chain[i] == n => {
                            let next =
                                self.keep(footstep_seq(&here, &action_footprint(&self.p.label(n), self.ctx)), zeta_pre);
                            cells[i + 1][j + 1].extend(next);
                        }
                        EnvItem::Node(_) => {}
                    }
                }
            }
        }
        std::mem::take(&mut cells[k][m])
    }

    /// Splits the visible items into consecutive windows, one per part, each
    /// holding exactly that part's visible nodes.
    fn series(&mut self, parts: &[&SpTerm], visible: &[EnvItem], zeta_pre: bool) -> FootstepSet {
        let m = visible.len();
        let mut reach: Vec<FootstepSet> = vec![FootstepSet::new(); m + 1];
        reach[0] = unit_set();
        for (t, part) in parts.iter().enumerate() {
            let nodes = part.nodes();
            let mut next: Vec<FootstepSet> = vec![FootstepSet::new(); m + 1];
            let part_zeta = zeta_pre && t == 0;
            for start in 0..=m {
                if reach[start].is_empty() {
                    continue;
                }
                for end in start..=m {
                    if end > start {
                        if let EnvItem::Node(n) = visible[end - 1] {
                            if nodes & bit(n) == 0 {
                                break;
                            }
                        }
                    }
                    if !self.window_fits(nodes, &visible[start..end], &visible[end..]) {
                        continue;
                    }
                    let inner = self.union(part, &visible[start..end], part_zeta);
                    if inner.is_empty() {
                        continue;
                    }
                    next[end].extend(footstep_seq(&reach[start], &inner));
                }
            }
            reach = next;
        }
        std::mem::take(&mut reach[m])
    }

    /// The window holds all of the part's visible nodes, none remain after it.
    fn window_fits(&self, nodes: NodeSet, window: &[EnvItem], after: &[EnvItem]) -> bool {
        let has = |items: &[EnvItem]| items.iter().any(|i| matches!(*i, EnvItem::Node(n) if nodes & bit(n) != 0));
        let wanted = crate::pomset::members(nodes).filter(|&n| self.vis.shows(&self.p.label(n))).count();
        let inside = window.iter().filter(|i| matches!(**i, EnvItem::Node(n) if nodes & bit(n) != 0)).count();
        inside == wanted && !has(after)
    }
}
