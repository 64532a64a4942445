//! Footprints by series-parallel decomposition: linear segments are the
//! product of their steps in environment order, sequential parts are
//! joined by the environment writes between them, and parallel parts are
//! combined on empty buffers after projecting the environment.

use super::audit;
use super::env::{global_writes, project, EnvError, EnvItem, WriteEnv};
use super::footstep::{action_footprint, env_step, footstep_par, footstep_seq, unit_set, FootprintCtx, FootstepSet};
use crate::po_sem::Bounds;
use crate::pomset::{bit, NotSp, Pomset, SpTerm};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FootprintError {
    /// No footsteps can exist: only series-parallel pomsets have any.
    #[error(transparent)]
    NotSp(#[from] NotSp),
    #[error("not a global-write environment of the pomset: {0}")]
    BadEnv(#[from] EnvError),
    #[error("pomset has {nodes} nodes; the rule-closure oracle handles at most {limit}")]
    TooLarge { nodes: usize, limit: usize },
}

pub fn footprint(p: &Pomset, env: &WriteEnv, b: &Bounds) -> Result<FootstepSet, FootprintError> {
    footprint_in(p, env, &FootprintCtx::for_pomset(p, b))
}

pub fn footprint_in(p: &Pomset, env: &WriteEnv, ctx: &FootprintCtx) -> Result<FootstepSet, FootprintError> {
    env.validate(p)?;
    if p.is_empty() {
        return Ok(FootstepSet::new());
    }
    let term = p.sp_decompose()?;
    Ok(evaluate(p, &term, &env.items, ctx))
}

/// Product of steps in order; every node item must be a node of the segment.
pub(crate) fn linear_product(p: &Pomset, items: &[EnvItem], ctx: &FootprintCtx) -> FootstepSet {
    items.iter().fold(unit_set(), |acc, item| match *item {
        EnvItem::Node(n) => footstep_seq(&acc, &action_footprint(&p.label(n), ctx)),
        EnvItem::Foreign(x, v) => footstep_seq(&acc, &env_step(x, v, ctx)),
    })
}

fn foreign_writes(items: &[EnvItem]) -> Vec<(crate::lang::Loc, crate::lang::Value)> {
    items
        .iter()
        .map(|item| match *item {
            EnvItem::Foreign(x, v) => (x, v),
            EnvItem::Node(_) => unreachable!("only foreign writes lie between sequential parts"),
        })
        .collect()
}

fn evaluate(p: &Pomset, term: &SpTerm, items: &[EnvItem], ctx: &FootprintCtx) -> FootstepSet {
    let result = match term {
        SpTerm::Leaf(_) => linear_product(p, items, ctx),
        SpTerm::SeqNode(..) => {
            let mut acc = unit_set();
            let mut cursor = 0;
            for part in term.seq_parts() {
                let nodes = part.nodes();
                let inside = |item: &EnvItem| matches!(*item, EnvItem::Node(n) if nodes & bit(n) != 0);
                let first = items.iter().position(inside).expect("every part occurs in the environment");
                let last = items.iter().rposition(inside).expect("every part occurs in the environment");
                let gap = foreign_writes(&items[cursor..first]);
                acc = footstep_seq(&acc, &super::footstep::env_footprint(&gap, ctx));
                acc = footstep_seq(&acc, &evaluate(p, part, &items[first..=last], ctx));
                cursor = last + 1;
            }
            footstep_seq(&acc, &super::footstep::env_footprint(&foreign_writes(&items[cursor..]), ctx))
        }
        SpTerm::ParNode(..) => {
            let mut parts = term.par_parts().into_iter();
            let first = parts.next().expect("parallel term has parts");
            let side = |part: &SpTerm| {
                let set = evaluate(p, part, &project(p, items, part.nodes(), |_| false), ctx);
                audit::audit_par_side(p, part, &set);
                set
            };
            parts.fold(side(first), |acc, part| footstep_par(&acc, &side(part)))
        }
    };
    if audit::is_enabled() {
        audit::audit(p, term, &global_writes(p, items), &result);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::loc;
    use crate::pomset::Action;
    use crate::state_foot::{BufferEntry, BufferedState, Footstep};

    #[test]
    fn non_sp_pomsets_are_reported() {
        let a = |v| Action::write(loc("x"), v);
        let n = Pomset::from_edges(vec![a(0), a(1), a(2), a(3)], &[(0, 2), (1, 2), (1, 3)]).unwrap();
        let env = WriteEnv::from_linearisation(&[0, 1, 2, 3]);
        let err = footprint(&n, &env, &Bounds::with_values([0])).unwrap_err();
        assert!(matches!(err, FootprintError::NotSp(_)));
    }

    #[test]
    fn bad_environments_are_rejected() {
        let p = Pomset::chain([Action::write(loc("x"), 0), Action::write(loc("x"), 1)]);
        let env = WriteEnv::from_linearisation(&[1, 0]);
        assert!(matches!(footprint(&p, &env, &Bounds::with_values([0])), Err(FootprintError::BadEnv(_))));
    }

    #[test]
    fn single_write_under_empty_environment() {
        let x = loc("x");
        let p = Pomset::chain([Action::buffer(x, 1), Action::write(x, 1)]);
        let got = footprint(&p, &WriteEnv::from_linearisation(&[0, 1]), &Bounds::with_values([0, 1])).unwrap();
        let zeta: Vec<_> = got.iter().filter(|f| f.is_zeta()).cloned().collect();
        let expect = |old| {
            Footstep::new(
                BufferedState::empty().with_global(x, old).with_buffer(x, BufferEntry::empty()),
                BufferedState::empty().with_global(x, 1).with_buffer(x, BufferEntry::empty()),
            )
        };
        assert_eq!(zeta.len(), 2);
        assert!(zeta.contains(&expect(0)) && zeta.contains(&expect(1)));
    }
}
