//! Seeded random generators for pomsets, environments and programs, shared
//! by the test suites and the CLI harness.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::lang::{loc, BExpr, Cmd, Expr, Loc, Program, Value};
use crate::pomset::{members, Action, NodeId, Pomset};
use crate::state_foot::{EnvItem, WriteEnv};

/// Locations and values that generated terms draw from.
#[derive(Debug, Clone)]
pub struct Alphabet {
    pub locs: Vec<Loc>,
    pub values: Vec<Value>,
}

impl Alphabet {
    pub fn new(locs: &[&str], values: impl IntoIterator<Item = Value>) -> Self {
        Alphabet { locs: locs.iter().map(|s| loc(s)).collect(), values: values.into_iter().collect() }
    }

    fn loc(&self, rng: &mut impl Rng) -> Loc {
        *self.locs.choose(rng).expect("alphabet has locations")
    }

    fn value(&self, rng: &mut impl Rng) -> Value {
        *self.values.choose(rng).expect("alphabet has values")
    }

    pub fn action(&self, rng: &mut impl Rng) -> Action {
        let (x, v) = (self.loc(rng), self.value(rng));
        match rng.gen_range(0..7) {
            0 | 1 => Action::write(x, v),
            2 | 3 => Action::buffer(x, v),
            4 | 5 => Action::read(x, v),
            _ => Action::Delta,
        }
    }
}

/// A series-parallel pomset with exactly `nodes` nodes, built by random
/// sequential and parallel composition.
pub fn sp_pomset(rng: &mut impl Rng, alphabet: &Alphabet, nodes: usize) -> Pomset {
    match nodes {
        0 => Pomset::empty(),
        1 => Pomset::singleton(alphabet.action(rng)),
        _ => {
            let left = rng.gen_range(1..nodes);
            let a = sp_pomset(rng, alphabet, left);
            let b = sp_pomset(rng, alphabet, nodes - left);
            if rng.gen_bool(0.5) {
                a.seq(&b)
            } else {
                a.par(&b)
            }
        }
    }
}

/// A uniformly chosen next step at each point: some linearisation of `p`.
pub fn linearisation(rng: &mut impl Rng, p: &Pomset) -> Vec<NodeId> {
    let mut done = 0u128;
    let mut order = Vec::with_capacity(p.len());
    while order.len() < p.len() {
        let ready: Vec<NodeId> =
            members(p.all_nodes() & !done).filter(|&n| p.below(n) & !done & !crate::pomset::bit(n) == 0).collect();
        let n = *ready.choose(rng).expect("a finite order has minimal elements");
        done |= crate::pomset::bit(n);
        order.push(n);
    }
    order
}

/// A linearisation of `p` with up to `foreign_max` foreign writes inserted.
pub fn write_env(rng: &mut impl Rng, p: &Pomset, alphabet: &Alphabet, foreign_max: usize) -> WriteEnv {
    let mut items: Vec<EnvItem> = linearisation(rng, p).into_iter().map(EnvItem::Node).collect();
    for _ in 0..rng.gen_range(0..=foreign_max) {
        let at = rng.gen_range(0..=items.len());
        items.insert(at, EnvItem::Foreign(alphabet.loc(rng), alphabet.value(rng)));
    }
    WriteEnv::new(items)
}

/// A small straight-line or branching command over the alphabet.
pub fn statement(rng: &mut impl Rng, alphabet: &Alphabet, registers: &[Loc]) -> Cmd {
    let x = alphabet.loc(rng);
    match rng.gen_range(0..3) {
        0 => Cmd::Assign(x, Expr::IntConst(alphabet.value(rng))),
        1 => {
            let r = *registers.choose(rng).expect("registers");
            Cmd::Assign(r, Expr::ReadLoc(x))
        }
        _ => {
            let y = alphabet.loc(rng);
            Cmd::if_(
                BExpr::eq(Expr::ReadLoc(x), Expr::IntConst(alphabet.value(rng))),
                Cmd::Assign(y, Expr::IntConst(alphabet.value(rng))),
                Cmd::Skip,
            )
        }
    }
}

/// One thread of up to `max_len` statements (at least one).
pub fn thread(rng: &mut impl Rng, alphabet: &Alphabet, registers: &[Loc], max_len: usize) -> Cmd {
    let len = rng.gen_range(1..=max_len.max(1));
    Cmd::seq_all((0..len).map(|_| statement(rng, alphabet, registers)))
}

/// Up to `max_threads` threads in parallel, each writing its own registers.
pub fn program(rng: &mut impl Rng, alphabet: &Alphabet, max_threads: usize, max_len: usize) -> Program {
    let threads = rng.gen_range(1..=max_threads.max(1));
    let body = (0..threads)
        .map(|t| {
            let registers = [loc(&format!("r{t}"))];
            thread(rng, alphabet, &registers, max_len)
        })
        .reduce(Cmd::par)
        .expect("at least one thread");
    Program::new(body)
}
