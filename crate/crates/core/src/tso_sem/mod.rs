//! TSO denotations: pomsets paired with the store buffer left behind.
//!
//! Basic clauses run a phrase against a buffer; full clauses additionally
//! flush any prefix of the buffer before and after. A program's TSO pomsets
//! are those of the full clause that end with an empty buffer.

mod laws;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::lang::{BExpr, Cmd, Expr, Loc, Program, Value};
use crate::po_sem::{normalize, Bounds};
use crate::pomset::{Action, Pomset};

pub use laws::{law_cases, LawCase, LawFixture, LawFixtureError, LawKind};

/// One thread's FIFO store buffer; the head is the oldest write.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BufferList {
    entries: Vec<(Loc, Value)>,
}

impl BufferList {
    pub fn empty() -> Self {
        BufferList::default()
    }

    pub fn from_writes(entries: impl IntoIterator<Item = (Loc, Value)>) -> Self {
        BufferList { entries: entries.into_iter().collect() }
    }

    pub fn entries(&self) -> &[(Loc, Value)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn pushed(&self, x: Loc, v: Value) -> BufferList {
        let mut entries = self.entries.clone();
        entries.push((x, v));
        BufferList { entries }
    }

    /// The buffer as a chain of global writes.
    pub fn as_pomset(&self) -> Pomset {
        Pomset::chain(self.entries.iter().map(|&(x, v)| Action::write(x, v)))
    }

    /// The most recent buffered value per location.
    pub fn view(&self) -> BTreeMap<Loc, Value> {
        self.entries.iter().copied().collect()
    }

    /// The most recent buffered value of `x`, if any.
    pub fn lookup(&self, x: Loc) -> Option<Value> {
        self.entries.iter().rev().find(|(y, _)| *y == x).map(|&(_, v)| v)
    }
}

impl fmt::Display for BufferList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, (x, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}:={v}")?;
        }
        write!(f, ">")
    }
}

pub fn buffer_view(l: &BufferList) -> BTreeMap<Loc, Value> {
    l.view()
}

/// All ways to flush a prefix of `l`: (flushed prefix, remaining suffix).
pub fn split(l: &BufferList) -> Vec<(Pomset, BufferList)> {
    (0..=l.len())
        .map(|k| {
            let (prefix, suffix) = l.entries.split_at(k);
            (
                BufferList::from_writes(prefix.iter().copied()).as_pomset(),
                BufferList::from_writes(suffix.iter().copied()),
            )
        })
        .collect()
}

/// Pomsets paired with a final buffer.
pub type TsoDenot = BTreeSet<(Pomset, BufferList)>;

/// Pomsets paired with a result and a final buffer.
pub type Valued<T> = BTreeSet<(Pomset, T, BufferList)>;

/// Chains pairs into a buffer-indexed continuation, sequencing the pomsets.
pub fn seqit<A: Ord + Clone, B: Ord + Clone>(
    s: &BTreeSet<(Pomset, A)>,
    mut f: impl FnMut(&A) -> BTreeSet<(Pomset, B)>,
) -> BTreeSet<(Pomset, B)> {
    let mut cache: BTreeMap<A, BTreeSet<(Pomset, B)>> = BTreeMap::new();
    let mut out = BTreeSet::new();
    for (p, a) in s {
        let next = cache.entry(a.clone()).or_insert_with(|| f(a));
        for (q, b) in next.iter() {
            out.insert((normalize(&p.seq(q)), b.clone()));
        }
    }
    out
}

/// The triple form of [`seqit`]: the middle component is carried through.
pub fn seqit_valued<T: Ord + Clone>(s: &Valued<T>, mut f: impl FnMut(&BufferList) -> TsoDenot) -> Valued<T> {
    let mut cache: BTreeMap<BufferList, TsoDenot> = BTreeMap::new();
    let mut out = BTreeSet::new();
    for (p, t, l) in s {
        let next = cache.entry(l.clone()).or_insert_with(|| f(l));
        for (q, l2) in next.iter() {
            out.insert((normalize(&p.seq(q)), t.clone(), l2.clone()));
        }
    }
    out
}

fn split_set(l: &BufferList) -> TsoDenot {
    split(l).into_iter().collect()
}

/// Phrases with a value: integer and boolean expressions.
trait Phrase {
    type Out: Ord + Clone;
    /// The value when the phrase reads no location.
    fn constant(&self) -> Option<Self::Out>;
    fn basic(&self, b: &Bounds, l: &BufferList) -> Valued<Self::Out>;
}

impl Phrase for Expr {
    type Out = Value;

    fn constant(&self) -> Option<Value> {
        self.eval(&|_| None)
    }

    fn basic(&self, b: &Bounds, l: &BufferList) -> Valued<Value> {
        basic_tso_expr(self, l, b)
    }
}

impl Phrase for BExpr {
    type Out = bool;

    fn constant(&self) -> Option<bool> {
        self.eval(&|_| None)
    }

    fn basic(&self, b: &Bounds, l: &BufferList) -> Valued<bool> {
        basic_tso_bool(self, l, b)
    }
}

fn full<P: Phrase>(phrase: &P, b: &Bounds, l: &BufferList) -> Valued<P::Out> {
    let mut out = BTreeSet::new();
    for (flushed, rest) in split(l) {
        let body = seqit_valued(&phrase.basic(b, &rest), split_set);
        for (p, t, l2) in body {
            out.insert((normalize(&flushed.seq(&p)), t, l2));
        }
    }
    out
}

/// Binary operators. Two reading operands fork: the buffer is flushed and
/// both sides run from empty buffers. An operand that reads nothing
/// contributes only `δ`, so the other side runs against the buffer directly.
fn binary<A: Phrase, B: Phrase, R: Ord>(
    lhs: &A,
    rhs: &B,
    b: &Bounds,
    l: &BufferList,
    op: impl Fn(A::Out, B::Out) -> R,
) -> Valued<R> {
    match (lhs.constant(), rhs.constant()) {
        (Some(x), Some(y)) => BTreeSet::from([(Pomset::delta(), op(x, y), l.clone())]),
        (Some(x), None) => rhs.basic(b, l).into_iter().map(|(p, y, l2)| (p, op(x.clone(), y), l2)).collect(),
        (None, Some(y)) => lhs.basic(b, l).into_iter().map(|(p, x, l2)| (p, op(x, y.clone()), l2)).collect(),
        (None, None) => {
            let flushed = l.as_pomset();
            let empty = BufferList::empty();
            let left: Vec<_> = full(lhs, b, &empty).into_iter().filter(|(_, _, l2)| l2.is_empty()).collect();
            let right: Vec<_> = full(rhs, b, &empty).into_iter().filter(|(_, _, l2)| l2.is_empty()).collect();
            let mut out = BTreeSet::new();
            for (p1, v1, _) in &left {
                for (p2, v2, _) in &right {
                    let p = normalize(&flushed.seq(&p1.par(p2)));
                    out.insert((p, op(v1.clone(), v2.clone()), BufferList::empty()));
                }
            }
            out
        }
    }
}

pub fn basic_tso_expr(e: &Expr, l: &BufferList, b: &Bounds) -> Valued<Value> {
    match e {
        Expr::IntConst(v) => BTreeSet::from([(Pomset::delta(), *v, l.clone())]),
        Expr::ReadLoc(x) => match l.lookup(*x) {
            Some(v) => BTreeSet::from([(Pomset::singleton(Action::read(*x, v)), v, l.clone())]),
            None => b.values().map(|v| (Pomset::singleton(Action::read(*x, v)), v, l.clone())).collect(),
        },
        Expr::BinOp(op, e1, e2) => binary(e1.as_ref(), e2.as_ref(), b, l, |x, y| op.apply(x, y)),
    }
}

pub fn basic_tso_bool(c: &BExpr, l: &BufferList, b: &Bounds) -> Valued<bool> {
    match c {
        BExpr::BoolConst(t) => BTreeSet::from([(Pomset::delta(), *t, l.clone())]),
        BExpr::Not(inner) => basic_tso_bool(inner, l, b).into_iter().map(|(p, t, l2)| (p, !t, l2)).collect(),
        BExpr::Cmp(op, e1, e2) => binary(e1, e2, b, l, |x, y| op.apply(x, y)),
        BExpr::Logic(op, c1, c2) => binary(c1.as_ref(), c2.as_ref(), b, l, |x, y| op.apply(x, y)),
    }
}

pub fn denote_tso_expr(e: &Expr, l: &BufferList, b: &Bounds) -> Valued<Value> {
    full(e, b, l)
}

pub fn denote_tso_bool(c: &BExpr, l: &BufferList, b: &Bounds) -> Valued<bool> {
    full(c, b, l)
}

/// Pomsets of `c` under `l` evaluating to `outcome`, with their buffers.
pub fn tso_when(c: &BExpr, outcome: bool, l: &BufferList, b: &Bounds) -> TsoDenot {
    denote_tso_bool(c, l, b).into_iter().filter(|(_, t, _)| *t == outcome).map(|(p, _, l2)| (p, l2)).collect()
}

pub fn basic_tso(c: &Cmd, l: &BufferList, b: &Bounds) -> TsoDenot {
    match c {
        Cmd::Skip => BTreeSet::from([(Pomset::delta(), l.clone())]),
        Cmd::Assign(x, e) => denote_tso_expr(e, l, b)
            .into_iter()
            .map(|(p, v, l2)| (normalize(&p.seq(&Pomset::singleton(Action::buffer(*x, v)))), l2.pushed(*x, v)))
            .collect(),
        Cmd::Seq(c1, c2) => seqit(&denote_tso(c1, l, b), |l1| denote_tso(c2, l1, b)),
        Cmd::Par(c1, c2) => {
            let empty = BufferList::empty();
            let drained = |c: &Cmd| -> Vec<Pomset> {
                denote_tso(c, &empty, b).into_iter().filter(|(_, l2)| l2.is_empty()).map(|(p, _)| p).collect()
            };
            let (left, right) = (drained(c1), drained(c2));
            let flushed = l.as_pomset();
            let mut out = BTreeSet::new();
            for p1 in &left {
                for p2 in &right {
                    out.insert((normalize(&flushed.seq(&p1.par(p2))), BufferList::empty()));
                }
            }
            out
        }
        Cmd::If(cond, c1, c2) => {
            let mut out = seqit(&tso_when(cond, true, l, b), |l1| denote_tso(c1, l1, b));
            out.extend(seqit(&tso_when(cond, false, l, b), |l1| denote_tso(c2, l1, b)));
            out
        }
        Cmd::While(cond, body) => {
            // unrolling(n, L): exits after exactly n iterations
            let mut memo: BTreeMap<(usize, BufferList), TsoDenot> = BTreeMap::new();
            let mut out = BTreeSet::new();
            for n in 0..=b.unroll_max {
                out.extend(unrolling(cond, body, n, l, b, &mut memo));
            }
            out
        }
        Cmd::Fence => BTreeSet::from([(normalize(&l.as_pomset().seq(&Pomset::delta())), BufferList::empty())]),
    }
}

fn unrolling(
    cond: &BExpr,
    body: &Cmd,
    n: usize,
    l: &BufferList,
    b: &Bounds,
    memo: &mut BTreeMap<(usize, BufferList), TsoDenot>,
) -> TsoDenot {
    if let Some(hit) = memo.get(&(n, l.clone())) {
        return hit.clone();
    }
    let result = if n == 0 {
        tso_when(cond, false, l, b)
    } else {
        let entered = seqit(&tso_when(cond, true, l, b), |l1| denote_tso(body, l1, b));
        seqit(&entered, |l2| unrolling(cond, body, n - 1, l2, b, memo))
    };
    memo.insert((n, l.clone()), result.clone());
    result
}

/// Flush a prefix, run the basic clause, flush again.
pub fn denote_tso(c: &Cmd, l: &BufferList, b: &Bounds) -> TsoDenot {
    let mut out = BTreeSet::new();
    for (flushed, rest) in split(l) {
        let body = seqit(&basic_tso(c, &rest, b), split_set);
        for (p, l2) in body {
            out.insert((normalize(&flushed.seq(&p)), l2));
        }
    }
    out
}

/// Pomsets of `p` run from and ending with an empty buffer.
pub fn tso_pomsets(p: &Program, b: &Bounds) -> BTreeSet<Pomset> {
    denote_tso(&p.body, &BufferList::empty(), b).into_iter().filter(|(_, l)| l.is_empty()).map(|(p, _)| p).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{loc, parse, DEKKER};

    fn gw(x: &str, v: Value) -> Action {
        Action::write(loc(x), v)
    }

    fn bw(x: &str, v: Value) -> Action {
        Action::buffer(loc(x), v)
    }

    fn rd(x: &str, v: Value) -> Action {
        Action::read(loc(x), v)
    }

    fn buf(entries: &[(&str, Value)]) -> BufferList {
        BufferList::from_writes(entries.iter().map(|&(x, v)| (loc(x), v)))
    }

    #[test]
    fn buffer_view_is_last_write_wins() {
        assert_eq!(buf(&[]).lookup(loc("x")), None);
        assert_eq!(buf(&[("x", 3), ("y", 2)]).lookup(loc("x")), Some(3));
        assert_eq!(buf(&[("x", 1), ("x", 2)]).lookup(loc("x")), Some(2));
    }

    #[test]
    fn split_lists_every_prefix() {
        assert_eq!(split(&buf(&[])), vec![(Pomset::empty(), buf(&[]))]);
        assert_eq!(split(&buf(&[("x", 3), ("y", 2)])).len(), 3);
        assert_eq!(
            split(&buf(&[("x", 1)])),
            vec![(Pomset::empty(), buf(&[("x", 1)])), (Pomset::singleton(gw("x", 1)), buf(&[]))]
        );
    }

    #[test]
    fn basic_clauses() {
        let b = Bounds::with_values([0, 1]);
        let l = buf(&[("x", 1)]);
        assert_eq!(basic_tso(&Cmd::Skip, &l, &b), BTreeSet::from([(Pomset::delta(), l.clone())]));
        let fence = basic_tso(&Cmd::Fence, &l, &b);
        assert_eq!(fence, BTreeSet::from([(Pomset::singleton(gw("x", 1)), buf(&[]))]));
        let read = basic_tso_expr(&Expr::ReadLoc(loc("x")), &buf(&[("x", 3), ("y", 2)]), &b);
        assert_eq!(read, BTreeSet::from([(Pomset::singleton(rd("x", 3)), 3, buf(&[("x", 3), ("y", 2)]))]));
    }

    #[test]
    fn single_write_denotation() {
        let b = Bounds::with_values([0, 1]);
        let d = denote_tso(&parse("x := 1").unwrap().body, &buf(&[]), &b);
        let expected = BTreeSet::from([
            (Pomset::singleton(bw("x", 1)), buf(&[("x", 1)])),
            (normalize(&Pomset::chain([bw("x", 1), gw("x", 1)])), buf(&[])),
        ]);
        assert_eq!(d, expected);
        assert_eq!(
            tso_pomsets(&parse("x := 1").unwrap(), &b),
            BTreeSet::from([normalize(&Pomset::chain([bw("x", 1), gw("x", 1)]))])
        );
        assert_eq!(tso_pomsets(&parse("skip").unwrap(), &b), BTreeSet::from([Pomset::delta()]));
    }

    #[test]
    fn dekker_contains_the_four_families() {
        let b = Bounds::with_values([0, 1]);
        let all = tso_pomsets(&DEKKER.program(), &b);
        let fam1 = Pomset::chain([bw("x", 1), gw("x", 1), rd("y", 0), bw("z", 1), gw("z", 1)]).par(&Pomset::chain([
            bw("y", 1),
            gw("y", 1),
            rd("x", 0),
            bw("w", 1),
            gw("w", 1),
        ]));
        let fam2 = Pomset::chain([bw("x", 1), rd("y", 0), gw("x", 1), bw("z", 1), gw("z", 1)]).par(&Pomset::chain([
            bw("y", 1),
            rd("x", 0),
            gw("y", 1),
            bw("w", 1),
            gw("w", 1),
        ]));
        let fam3 = Pomset::chain([bw("x", 1), gw("x", 1), rd("y", 1)]).par(&Pomset::chain([
            bw("y", 1),
            gw("y", 1),
            rd("x", 0),
            bw("w", 1),
            gw("w", 1),
        ]));
        let fam4 = Pomset::chain([bw("x", 1), rd("y", 1), gw("x", 1)]).par(&Pomset::chain([
            bw("y", 1),
            gw("y", 1),
            rd("x", 1),
        ]));
        for (i, f) in [fam1, fam2, fam3, fam4].iter().enumerate() {
            assert!(all.contains(&normalize(f)), "family {}", i + 1);
        }
    }
}
