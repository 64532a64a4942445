//! Abstract syntax for the small imperative language: integer expressions,
//! boolean guards and commands with parallel composition and fences.

mod corpus;
mod parser;
mod printer;

use std::collections::BTreeSet;
use std::fmt;

use arrayvec::ArrayString;
use serde::{Serialize, Serializer};

pub use corpus::{
    corpus_programs, NamedProgram, DEKKER, FENCED_STORE_BUFFERING, IRIW, OWN_WRITE_READS, PETERSON, STORE_BUFFERING,
    WRITE_THEN_READ,
};
pub use parser::{parse, parse_bexpr, ParseError};
pub(crate) use parser::{Parser, Tok};

/// Program values. Only integers exist at run time.
pub type Value = i64;

/// Longest accepted location name, in bytes.
pub const MAX_LOC_LEN: usize = 16;

/// A shared-memory location name. Stored inline so states and actions stay `Copy`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Loc(ArrayString<MAX_LOC_LEN>);

impl Loc {
    /// Returns `None` when the name is empty, too long, or not an identifier.
    pub fn new(name: &str) -> Option<Self> {
        let mut chars = name.chars();
        let first = chars.next()?;
        if !(first.is_ascii_alphabetic() || first == '_') || !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return None;
        }
        ArrayString::from(name).ok().map(Loc)
    }

    pub fn as_str(&self) -> &str {
        self.0.as_str()
    }
}

/// Panicking constructor for literals in code and tests.
pub fn loc(name: &str) -> Loc {
    Loc::new(name).unwrap_or_else(|| panic!("invalid location name {name:?}"))
}

impl fmt::Debug for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Loc {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    pub fn apply(self, a: Value, b: Value) -> Value {
        match self {
            ArithOp::Add => a.wrapping_add(b),
            ArithOp::Sub => a.wrapping_sub(b),
            ArithOp::Mul => a.wrapping_mul(b),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Lt,
}

impl CmpOp {
    pub fn apply(self, a: Value, b: Value) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Lt => a < b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogicOp {
    Or,
    And,
}

impl LogicOp {
    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            LogicOp::Or => a || b,
            LogicOp::And => a && b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    IntConst(Value),
    ReadLoc(Loc),
    BinOp(ArithOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BExpr {
    BoolConst(bool),
    Not(Box<BExpr>),
    Cmp(CmpOp, Expr, Expr),
    Logic(LogicOp, Box<BExpr>, Box<BExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Cmd {
    Skip,
    Assign(Loc, Expr),
    Seq(Box<Cmd>, Box<Cmd>),
    Par(Box<Cmd>, Box<Cmd>),
    If(BExpr, Box<Cmd>, Box<Cmd>),
    While(BExpr, Box<Cmd>),
    Fence,
}

/// A closed command meant to be run from empty buffers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    pub body: Cmd,
}

impl Expr {
    pub fn sum(a: Expr, b: Expr) -> Expr {
        Expr::BinOp(ArithOp::Add, Box::new(a), Box::new(b))
    }

    pub fn product(a: Expr, b: Expr) -> Expr {
        Expr::BinOp(ArithOp::Mul, Box::new(a), Box::new(b))
    }

    /// Evaluates against a lookup; `None` if some location is unknown.
    pub fn eval(&self, lookup: &impl Fn(Loc) -> Option<Value>) -> Option<Value> {
        match self {
            Expr::IntConst(v) => Some(*v),
            Expr::ReadLoc(x) => lookup(*x),
            Expr::BinOp(op, a, b) => Some(op.apply(a.eval(lookup)?, b.eval(lookup)?)),
        }
    }
}

impl BExpr {
    pub fn negate(b: BExpr) -> BExpr {
        BExpr::Not(Box::new(b))
    }

    pub fn eq(a: Expr, b: Expr) -> BExpr {
        BExpr::Cmp(CmpOp::Eq, a, b)
    }

    pub fn and(a: BExpr, b: BExpr) -> BExpr {
        BExpr::Logic(LogicOp::And, Box::new(a), Box::new(b))
    }

    pub fn or(a: BExpr, b: BExpr) -> BExpr {
        BExpr::Logic(LogicOp::Or, Box::new(a), Box::new(b))
    }

    pub fn eval(&self, lookup: &impl Fn(Loc) -> Option<Value>) -> Option<bool> {
        match self {
            BExpr::BoolConst(b) => Some(*b),
            BExpr::Not(b) => b.eval(lookup).map(|b| !b),
            BExpr::Cmp(op, a, b) => Some(op.apply(a.eval(lookup)?, b.eval(lookup)?)),
            BExpr::Logic(op, a, b) => Some(op.apply(a.eval(lookup)?, b.eval(lookup)?)),
        }
    }
}

impl Cmd {
    pub fn seq(a: Cmd, b: Cmd) -> Cmd {
        Cmd::Seq(Box::new(a), Box::new(b))
    }

    pub fn par(a: Cmd, b: Cmd) -> Cmd {
        Cmd::Par(Box::new(a), Box::new(b))
    }

    pub fn assign(x: &str, e: Expr) -> Cmd {
        Cmd::Assign(loc(x), e)
    }

    pub fn if_(b: BExpr, t: Cmd, e: Cmd) -> Cmd {
        Cmd::If(b, Box::new(t), Box::new(e))
    }

    pub fn while_(b: BExpr, body: Cmd) -> Cmd {
        Cmd::While(b, Box::new(body))
    }

    /// Right-nested sequence of the given commands; `skip` when empty.
    pub fn seq_all(cmds: impl IntoIterator<Item = Cmd>) -> Cmd {
        let mut cmds: Vec<Cmd> = cmds.into_iter().collect();
        let Some(mut acc) = cmds.pop() else {
            return Cmd::Skip;
        };
        while let Some(c) = cmds.pop() {
            acc = Cmd::seq(c, acc);
        }
        acc
    }

    pub fn contains_par(&self) -> bool {
        match self {
            Cmd::Par(..) => true,
            Cmd::Seq(a, b) | Cmd::If(_, a, b) => a.contains_par() || b.contains_par(),
            Cmd::While(_, c) => c.contains_par(),
            Cmd::Skip | Cmd::Assign(..) | Cmd::Fence => false,
        }
    }
}

impl Program {
    pub fn new(body: Cmd) -> Self {
        Program { body }
    }
}

fn expr_locs(e: &Expr, out: &mut BTreeSet<Loc>) {
    match e {
        Expr::IntConst(_) => {}
        Expr::ReadLoc(x) => {
            out.insert(*x);
        }
        Expr::BinOp(_, a, b) => {
            expr_locs(a, out);
            expr_locs(b, out);
        }
    }
}

fn bexpr_locs(b: &BExpr, out: &mut BTreeSet<Loc>) {
    match b {
        BExpr::BoolConst(_) => {}
        BExpr::Not(b) => bexpr_locs(b, out),
        BExpr::Cmp(_, x, y) => {
            expr_locs(x, out);
            expr_locs(y, out);
        }
        BExpr::Logic(_, x, y) => {
            bexpr_locs(x, out);
            bexpr_locs(y, out);
        }
    }
}

fn cmd_locs(c: &Cmd, out: &mut BTreeSet<Loc>) {
    match c {
        Cmd::Skip | Cmd::Fence => {}
        Cmd::Assign(x, e) => {
            out.insert(*x);
            expr_locs(e, out);
        }
        Cmd::Seq(a, b) | Cmd::Par(a, b) => {
            cmd_locs(a, out);
            cmd_locs(b, out);
        }
        Cmd::If(g, a, b) => {
            bexpr_locs(g, out);
            cmd_locs(a, out);
            cmd_locs(b, out);
        }
        Cmd::While(g, body) => {
            bexpr_locs(g, out);
            cmd_locs(body, out);
        }
    }
}

fn expr_consts(e: &Expr, out: &mut BTreeSet<Value>) {
    match e {
        Expr::IntConst(v) => {
            out.insert(*v);
        }
        Expr::ReadLoc(_) => {}
        Expr::BinOp(_, a, b) => {
            expr_consts(a, out);
            expr_consts(b, out);
        }
    }
}

fn bexpr_consts(b: &BExpr, out: &mut BTreeSet<Value>) {
    match b {
        BExpr::BoolConst(_) => {}
        BExpr::Not(b) => bexpr_consts(b, out),
        BExpr::Cmp(_, x, y) => {
            expr_consts(x, out);
            expr_consts(y, out);
        }
        BExpr::Logic(_, x, y) => {
            bexpr_consts(x, out);
            bexpr_consts(y, out);
        }
    }
}

fn cmd_consts(c: &Cmd, out: &mut BTreeSet<Value>) {
    match c {
        Cmd::Skip | Cmd::Fence => {}
        Cmd::Assign(_, e) => expr_consts(e, out),
        Cmd::Seq(a, b) | Cmd::Par(a, b) => {
            cmd_consts(a, out);
            cmd_consts(b, out);
        }
        Cmd::If(g, a, b) => {
            bexpr_consts(g, out);
            cmd_consts(a, out);
            cmd_consts(b, out);
        }
        Cmd::While(g, body) => {
            bexpr_consts(g, out);
            cmd_consts(body, out);
        }
    }
}

/// Every location read or written anywhere in the program.
pub fn locations_of(p: &Program) -> BTreeSet<Loc> {
    let mut out = BTreeSet::new();
    cmd_locs(&p.body, &mut out);
    out
}

/// Every integer literal in the program.
pub fn constants_of(p: &Program) -> BTreeSet<Value> {
    let mut out = BTreeSet::new();
    cmd_consts(&p.body, &mut out);
    out
}

/// Locations mentioned by a boolean expression (used for litmus predicates).
pub fn bexpr_locations(b: &BExpr) -> BTreeSet<Loc> {
    let mut out = BTreeSet::new();
    bexpr_locs(b, &mut out);
    out
}

/// Integer literals in a boolean expression.
pub fn bexpr_constants(b: &BExpr) -> BTreeSet<Value> {
    let mut out = BTreeSet::new();
    bexpr_consts(b, &mut out);
    out
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.body)
    }
}
