//! Footsteps, their sequential and parallel composition, and the
//! footprints of single actions and of foreign global writes.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::state::{BufferEntry, BufferedState};
use crate::lang::{Loc, Value};
use crate::po_sem::Bounds;
use crate::pomset::{Action, Pomset};

/// A minimal pre-state and the effect of running from it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Footstep {
    pub pre: BufferedState,
    pub post: BufferedState,
}

pub type FootstepSet = HashSet<Footstep>;

impl Footstep {
    pub fn new(pre: BufferedState, post: BufferedState) -> Self {
        Footstep { pre, post }
    }

    /// The unit `(∅, ∅)`.
    pub fn unit() -> Self {
        Footstep::new(BufferedState::empty(), BufferedState::empty())
    }

    /// `self ⨟ next`, defined when the state after `self` agrees with what
    /// `next` requires.
    pub fn then(&self, next: &Footstep) -> Option<Footstep> {
        if !self.pre.update(&self.post).consistent(&next.pre) {
            return None;
        }
        let pre = self.pre.union(&next.pre.minus_domain(&self.post));
        Some(Footstep::new(pre, self.post.update(&next.post)))
    }

    /// Parallel combination of two empty-buffered footsteps.
    pub fn beside(&self, other: &Footstep) -> Option<Footstep> {
        let empty = self.pre.zeta() && self.post.zeta() && other.pre.zeta() && other.post.zeta();
        if !empty || !self.pre.consistent(&other.pre) || !self.post.consistent(&other.post) {
            return None;
        }
        Some(Footstep::new(self.pre.union(&other.pre), self.post.union(&other.post)))
    }

    pub fn is_zeta(&self) -> bool {
        self.pre.zeta() && self.post.zeta()
    }
}

impl fmt::Display for Footstep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.pre, self.post)
    }
}

pub fn footstep_seq(left: &FootstepSet, right: &FootstepSet) -> FootstepSet {
    let mut out = FootstepSet::with_capacity(left.len().max(right.len()));
    for a in left {
        for b in right {
            if let Some(c) = a.then(b) {
                out.insert(c);
            }
        }
    }
    out
}

pub fn footstep_par(left: &FootstepSet, right: &FootstepSet) -> FootstepSet {
    let left: Vec<_> = left.iter().filter(|f| f.is_zeta()).collect();
    let right: Vec<_> = right.iter().filter(|f| f.is_zeta()).collect();
    let mut out = FootstepSet::new();
    for a in &left {
        for b in &right {
            if let Some(c) = a.beside(b) {
                out.insert(c);
            }
        }
    }
    out
}

pub fn unit_set() -> FootstepSet {
    FootstepSet::from([Footstep::unit()])
}

/// Footsteps in a stable order, for printing and comparison.
pub fn sorted(set: &FootstepSet) -> Vec<Footstep> {
    let mut v: Vec<Footstep> = set.iter().cloned().collect();
    v.sort();
    v
}

/// The finite instantiation of the footprint clauses: values range over the
/// universe and pending-write counts over `0..=n_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FootprintCtx {
    pub universe: Vec<Value>,
    pub n_max: u32,
}

impl FootprintCtx {
    pub fn new(universe: impl IntoIterator<Item = Value>, n_max: u32) -> Self {
        let mut universe: Vec<Value> = universe.into_iter().collect();
        universe.sort_unstable();
        universe.dedup();
        FootprintCtx { universe, n_max }
    }

    /// `n_max` is the number of buffer writes in `p`.
    pub fn for_pomset(p: &Pomset, b: &Bounds) -> Self {
        FootprintCtx::new(b.values(), p.count(Action::is_buffer_write) as u32)
    }
}

pub fn action_footprint(a: &Action, ctx: &FootprintCtx) -> FootstepSet {
    let counts = 0..=ctx.n_max;
    let e = BufferedState::empty;
    match *a {
        Action::Read { loc, value } => {
            let mut out = FootstepSet::from([Footstep::new(
                e().with_global(loc, value).with_buffer(loc, BufferEntry::empty()),
                e(),
            )]);
            out.extend(counts.map(|n| Footstep::new(e().with_buffer(loc, BufferEntry::new(value, n + 1)), e())));
            out
        }
        Action::BufferWrite { loc, value } => {
            let mut out = FootstepSet::new();
            for n in counts {
                for &old in &ctx.universe {
                    out.insert(Footstep::new(
                        e().with_buffer(loc, BufferEntry::new(old, n)),
                        e().with_buffer(loc, BufferEntry::new(value, n + 1)),
                    ));
                }
            }
            out
        }
        Action::GlobalWrite { loc, value } => {
            let mut out = FootstepSet::new();
            for n in counts {
                for &old in &ctx.universe {
                    for &pending in &ctx.universe {
                        out.insert(Footstep::new(
                            e().with_global(loc, old).with_buffer(loc, BufferEntry::new(pending, n + 1)),
                            e().with_global(loc, value).with_buffer(loc, BufferEntry::new(pending, n)),
                        ));
                    }
                }
            }
            out
        }
        Action::Delta => unit_set(),
    }
}

/// One global write performed by another thread.
pub fn env_step(x: Loc, v: Value, ctx: &FootprintCtx) -> FootstepSet {
    ctx.universe
        .iter()
        .map(|&old| Footstep::new(BufferedState::empty().with_global(x, old), BufferedState::empty().with_global(x, v)))
        .collect()
}

/// Footprint of a list of foreign global writes.
pub fn env_footprint(writes: &[(Loc, Value)], ctx: &FootprintCtx) -> FootstepSet {
    writes.iter().fold(unit_set(), |acc, &(x, v)| footstep_seq(&acc, &env_step(x, v, ctx)))
}
