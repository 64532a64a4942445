//! Per-location write accounting for series-parallel pomsets.

use serde::Serialize;

use crate::lang::Loc;
use crate::pomset::{Action, NotSp, Pomset, SpTerm};

/// `(g, b)`: global writes without a buffered counterpart, and buffer
/// entries left pending.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Characteristic {
    pub unmatched_globals: u32,
    pub pending_buffers: u32,
}

impl Characteristic {
    pub const ZERO: Characteristic = Characteristic { unmatched_globals: 0, pending_buffers: 0 };

    fn of_action(x: Loc, a: &Action) -> Characteristic {
        match *a {
            Action::GlobalWrite { loc, .. } if loc == x => Characteristic { unmatched_globals: 1, pending_buffers: 0 },
            Action::BufferWrite { loc, .. } if loc == x => Characteristic { unmatched_globals: 0, pending_buffers: 1 },
            _ => Characteristic::ZERO,
        }
    }

    fn then(self, next: Characteristic) -> Characteristic {
        let (g1, b1, g2, b2) =
            (self.unmatched_globals, self.pending_buffers, next.unmatched_globals, next.pending_buffers);
        Characteristic { unmatched_globals: g1 + g2.saturating_sub(b1), pending_buffers: b2 + b1.saturating_sub(g2) }
    }

    fn beside(self, other: Characteristic) -> Characteristic {
        Characteristic {
            unmatched_globals: self.unmatched_globals + other.unmatched_globals,
            pending_buffers: self.pending_buffers + other.pending_buffers,
        }
    }
}

pub(crate) fn term_characteristic(p: &Pomset, term: &SpTerm, x: Loc) -> Characteristic {
    match term {
        SpTerm::Leaf(nodes) => {
            nodes.iter().fold(Characteristic::ZERO, |acc, &n| acc.then(Characteristic::of_action(x, &p.label(n))))
        }
        SpTerm::SeqNode(a, b) => term_characteristic(p, a, x).then(term_characteristic(p, b, x)),
        SpTerm::ParNode(a, b) => term_characteristic(p, a, x).beside(term_characteristic(p, b, x)),
    }
}

pub fn characteristic(x: Loc, p: &Pomset) -> Result<Characteristic, NotSp> {
    if p.is_empty() {
        return Ok(Characteristic::ZERO);
    }
    Ok(term_characteristic(p, &p.sp_decompose()?, x))
}

/// Buffer writes to `x` minus global writes to `x`.
pub fn differential(x: Loc, p: &Pomset) -> i64 {
    differential_over(x, p.labels().iter())
}

pub(crate) fn differential_over<'a>(x: Loc, labels: impl Iterator<Item = &'a Action>) -> i64 {
    labels
        .map(|a| match *a {
            Action::BufferWrite { loc, .. } if loc == x => 1,
            Action::GlobalWrite { loc, .. } if loc == x => -1,
            _ => 0,
        })
        .sum()
}
