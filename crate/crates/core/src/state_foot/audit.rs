//! Optional run-time checks of the buffer-accounting facts on every
//! footstep the engines produce: the characteristic determines the
//! differential, pending counts move by the differential, counts are
//! bounded below by the characteristic, and final globals are the last
//! global write per location in the environment.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use super::charac::{differential_over, term_characteristic};
use super::footstep::FootstepSet;
use crate::lang::{Loc, Value};
use crate::pomset::{members, Pomset, SpTerm};

const KEPT_EXAMPLES: usize = 5;

static ENABLED: AtomicBool = AtomicBool::new(false);
static FOOTSTEPS: AtomicU64 = AtomicU64::new(0);
static VIOLATIONS: AtomicU64 = AtomicU64::new(0);
static EXAMPLES: Mutex<Vec<String>> = Mutex::new(Vec::new());

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub footsteps_checked: u64,
    pub violations: u64,
    pub examples: Vec<String>,
}

pub fn set_enabled(on: bool) {
    ENABLED.store(on, Ordering::SeqCst);
}

pub fn is_enabled() -> bool {
    ENABLED.load(Ordering::Relaxed)
}

pub fn report() -> AuditReport {
    AuditReport {
        footsteps_checked: FOOTSTEPS.load(Ordering::SeqCst),
        violations: VIOLATIONS.load(Ordering::SeqCst),
        examples: EXAMPLES.lock().map(|e| e.clone()).unwrap_or_default(),
    }
}

fn violation(message: String) {
    VIOLATIONS.fetch_add(1, Ordering::SeqCst);
    if let Ok(mut e) = EXAMPLES.lock() {
        if e.len() < KEPT_EXAMPLES {
            e.push(message);
        }
    }
}

/// Audits the footsteps of the sub-pomset `term` under an environment whose
/// global writes, in order, are `writes`.
pub(crate) fn audit(p: &Pomset, term: &SpTerm, writes: &[(Loc, Value)], set: &FootstepSet) {
    if !is_enabled() || set.is_empty() {
        return;
    }
    FOOTSTEPS.fetch_add(set.len() as u64, Ordering::Relaxed);
    let nodes = term.nodes();
    let mut locs: BTreeSet<Loc> = members(nodes).filter_map(|n| p.label(n).loc()).collect();
    for f in set {
        locs.extend(f.pre.buffers().iter().map(|(x, _)| *x));
        locs.extend(f.post.buffers().iter().map(|(x, _)| *x));
    }
    let last_write: BTreeMap<Loc, Value> = writes.iter().copied().collect();
    for &x in &locs {
        let c = term_characteristic(p, term, x);
        let (g, b) = (c.unmatched_globals as i64, c.pending_buffers as i64);
        let d = differential_over(x, members(nodes).map(|n| p.labels().get(n).expect("node in range")));
        if d != b - g {
            violation(format!("differential {d} of {x} differs from b-g = {} in {}", b - g, p.induced(nodes)));
        }
        for f in set {
            let (pre, post) = (f.pre.buffer(x), f.post.buffer(x));
            if let (Some(s), Some(t)) = (pre, post) {
                if t.count() as i64 != s.count() as i64 + d {
                    violation(format!("count of {x} moves by {} not {d} in {f}", t.count() as i64 - s.count() as i64));
                }
            }
            if (f.pre.count(x) as i64) < g || (pre.is_none() && g != 0) {
                violation(format!("pre-count of {x} below g = {g} in {f}"));
            }
            if (f.post.count(x) as i64) < b || (post.is_none() && b != 0) {
                violation(format!("post-count of {x} below b = {b} in {f}"));
            }
        }
    }
    for f in set {
        if f.post.global_map() != last_write {
            violation(format!("final globals of {f} differ from the environment's last writes {last_write:?}"));
        }
    }
}

/// A parallel operand with a footstep on empty buffers must leave every
/// location balanced: no unmatched global writes, nothing pending.
pub(crate) fn audit_par_side(p: &Pomset, term: &SpTerm, set: &FootstepSet) {
    if !is_enabled() || !set.iter().any(|f| f.is_zeta()) {
        return;
    }
    let locs: BTreeSet<Loc> = members(term.nodes()).filter_map(|n| p.label(n).loc()).collect();
    for x in locs {
        let c = term_characteristic(p, term, x);
        if c != super::charac::Characteristic::ZERO {
            violation(format!("parallel operand {} has characteristic {c:?} at {x}", p.induced(term.nodes())));
        }
    }
}
