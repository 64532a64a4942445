//! Program-order denotations of expressions, conditions and commands.
//!
//! Reads range over a finite value universe and loops are unrolled up to a
//! fixed budget. Every pomset is stored δ-normalized and in canonical form,
//! so set equality of denotations is equality up to isomorphism.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::lang::{constants_of, BExpr, Cmd, Expr, Loc, Program, Value};
use crate::pomset::{Action, Pomset, DEFAULT_LIN_NODE_MAX};

/// Rounds of universe closure over written values.
const UNIVERSE_CLOSURE_ROUNDS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundsError {
    #[error("value universe is empty")]
    EmptyUniverse,
    #[error("linearisation node bound must be positive")]
    ZeroNodeBound,
}

/// Finite cut-offs for enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub value_universe: BTreeSet<Value>,
    pub unroll_max: usize,
    pub lin_node_max: usize,
}

impl Bounds {
    pub fn new(
        values: impl IntoIterator<Item = Value>,
        unroll_max: usize,
        lin_node_max: usize,
    ) -> Result<Self, BoundsError> {
        let value_universe: BTreeSet<Value> = values.into_iter().collect();
        if value_universe.is_empty() {
            return Err(BoundsError::EmptyUniverse);
        }
        if lin_node_max == 0 {
            return Err(BoundsError::ZeroNodeBound);
        }
        Ok(Bounds { value_universe, unroll_max, lin_node_max })
    }

    /// Universe `{values}` with default unrolling and node bound.
    pub fn with_values(values: impl IntoIterator<Item = Value>) -> Self {
        Bounds::new(values, 2, DEFAULT_LIN_NODE_MAX).expect("nonempty universe")
    }

    /// Constants of `p`, initial values and `0`, closed under values the
    /// program can write (iterated a few rounds for arithmetic programs).
    pub fn for_program(p: &Program, initial: &BTreeMap<Loc, Value>, unroll_max: usize) -> Self {
        let mut universe: BTreeSet<Value> = constants_of(p);
        universe.extend(initial.values().copied());
        universe.insert(0);
        let mut bounds = Bounds { value_universe: universe, unroll_max, lin_node_max: DEFAULT_LIN_NODE_MAX };
        for _ in 0..UNIVERSE_CLOSURE_ROUNDS {
            let written = written_values(&denote_po(p, &bounds));
            if written.is_subset(&bounds.value_universe) {
                break;
            }
            bounds.value_universe.extend(written);
        }
        bounds
    }

    pub fn values(&self) -> impl Iterator<Item = Value> + '_ {
        self.value_universe.iter().copied()
    }
}

fn written_values(pomsets: &BTreeSet<Pomset>) -> BTreeSet<Value> {
    pomsets
        .iter()
        .flat_map(|p| p.labels().iter())
        .filter(|a| a.is_global_write() || a.is_buffer_write())
        .filter_map(Action::value)
        .collect()
}

/// δ-normalized canonical representative.
pub fn normalize(p: &Pomset) -> Pomset {
    p.delta_normalize().canonical()
}

pub fn denote_po_expr(e: &Expr, b: &Bounds) -> BTreeSet<(Pomset, Value)> {
    match e {
        Expr::IntConst(v) => BTreeSet::from([(Pomset::delta(), *v)]),
        Expr::ReadLoc(x) => b.values().map(|v| (Pomset::singleton(Action::read(*x, v)), v)).collect(),
        Expr::BinOp(op, l, r) => par_combine(&denote_po_expr(l, b), &denote_po_expr(r, b), |x, y| op.apply(x, y)),
    }
}

pub fn denote_po_bool(c: &BExpr, b: &Bounds) -> BTreeSet<(Pomset, bool)> {
    match c {
        BExpr::BoolConst(t) => BTreeSet::from([(Pomset::delta(), *t)]),
        BExpr::Not(inner) => denote_po_bool(inner, b).into_iter().map(|(p, t)| (p, !t)).collect(),
        BExpr::Cmp(op, l, r) => par_combine(&denote_po_expr(l, b), &denote_po_expr(r, b), |x, y| op.apply(x, y)),
        BExpr::Logic(op, l, r) => par_combine(&denote_po_bool(l, b), &denote_po_bool(r, b), |x, y| op.apply(x, y)),
    }
}

/// Pomsets of `c` evaluating to `outcome`.
pub fn po_when(c: &BExpr, outcome: bool, b: &Bounds) -> BTreeSet<Pomset> {
    denote_po_bool(c, b).into_iter().filter(|(_, t)| *t == outcome).map(|(p, _)| p).collect()
}

fn par_combine<A: Copy, B: Copy, R: Ord>(
    left: &BTreeSet<(Pomset, A)>,
    right: &BTreeSet<(Pomset, B)>,
    op: impl Fn(A, B) -> R,
) -> BTreeSet<(Pomset, R)> {
    let mut out = BTreeSet::new();
    for (p1, v1) in left {
        for (p2, v2) in right {
            out.insert((normalize(&p1.par(p2)), op(*v1, *v2)));
        }
    }
    out
}

/// Pointwise sequential composition of two sets.
pub fn seq_sets(left: &BTreeSet<Pomset>, right: &BTreeSet<Pomset>) -> BTreeSet<Pomset> {
    let mut out = BTreeSet::new();
    for p in left {
        for q in right {
            out.insert(normalize(&p.seq(q)));
        }
    }
    out
}

pub fn denote_po_cmd(c: &Cmd, b: &Bounds) -> BTreeSet<Pomset> {
    match c {
        Cmd::Skip | Cmd::Fence => BTreeSet::from([Pomset::delta()]),
        Cmd::Assign(x, e) => denote_po_expr(e, b)
            .into_iter()
            .map(|(p, v)| normalize(&p.seq(&Pomset::singleton(Action::write(*x, v)))))
            .collect(),
        Cmd::Seq(c1, c2) => seq_sets(&denote_po_cmd(c1, b), &denote_po_cmd(c2, b)),
        Cmd::Par(c1, c2) => {
            let right = denote_po_cmd(c2, b);
            let mut out = BTreeSet::new();
            for p in &denote_po_cmd(c1, b) {
                for q in &right {
                    out.insert(normalize(&p.par(q)));
                }
            }
            out
        }
        Cmd::If(cond, c1, c2) => {
            let mut out = seq_sets(&po_when(cond, true, b), &denote_po_cmd(c1, b));
            out.extend(seq_sets(&po_when(cond, false, b), &denote_po_cmd(c2, b)));
            out
        }
        Cmd::While(cond, body) => {
            let enter = seq_sets(&po_when(cond, true, b), &denote_po_cmd(body, b));
            let mut unrolling = po_when(cond, false, b);
            let mut out = unrolling.clone();
            for _ in 0..b.unroll_max {
                unrolling = seq_sets(&enter, &unrolling);
                out.extend(unrolling.iter().cloned());
            }
            out
        }
    }
}

pub fn denote_po(p: &Program, b: &Bounds) -> BTreeSet<Pomset> {
    denote_po_cmd(&p.body, b)
}
