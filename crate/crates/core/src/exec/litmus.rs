//! Litmus tests: a program, an initial state and a query on final states.
//!
//! ```text
//! name sb
//! program { (x := 1; r1 := y) || (y := 1; r2 := x) }
//! init { x = 0; y = 0; }
//! reachable ( r1 = 0 && r2 = 0 )
//! bounds { unroll = 2; values = {0, 1}; }
//! ```
//!
//! `forbidden ( … )` asks that no final state satisfy the predicate. The
//! `name` and `bounds` sections are optional. Every location the program
//! reads must be initialised; write-only locations default to 0.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{find_linearisation, program_runs, ExecError, ExecStats, GlobalState};
use crate::lang::{BExpr, Cmd, Expr, Loc, ParseError, Parser, Program, Tok, Value};
use crate::po_sem::Bounds;
use crate::pomset::Pomset;
use crate::state_foot::{footprint, BufferedState, FootprintCtx, Footstep, WriteEnv};

/// Linearisations tried per witness before giving up on replaying it.
const WITNESS_SEARCH_BUDGET: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Reachable(BExpr),
    Forbidden(BExpr),
}

impl Query {
    pub fn predicate(&self) -> &BExpr {
        match self {
            Query::Reachable(b) | Query::Forbidden(b) => b,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Query::Reachable(_) => "reachable",
            Query::Forbidden(_) => "forbidden",
        }
    }

    /// Whether a final state satisfies the predicate; locations the state
    /// lacks make it false.
    pub fn matches(&self, state: &GlobalState) -> bool {
        self.predicate().eval(&|x| state.get(&x).copied()).unwrap_or(false)
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.kind(), self.predicate())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LitmusSpec {
    pub name: String,
    pub program: Program,
    pub initial: GlobalState,
    pub query: Query,
    pub unroll: Option<usize>,
    pub values: Option<BTreeSet<Value>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LitmusError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("section `{0}` appears twice")]
    Duplicate(&'static str),
    #[error("missing section `{0}`")]
    Missing(&'static str),
    #[error("location `{0}` is read but has no initial value")]
    Uninitialised(Loc),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

impl LitmusSpec {
    /// Bounds from the file, with `unroll` defaulting to 2 and the universe
    /// derived from the program when no values are given.
    pub fn bounds(&self) -> Bounds {
        let unroll = self.unroll.unwrap_or(2);
        match &self.values {
            Some(values) => {
                let mut b = Bounds::with_values(values.iter().copied().chain(self.initial.values().copied()));
                b.unroll_max = unroll;
                b
            }
            None => Bounds::for_program(&self.program, &self.initial, unroll),
        }
    }
}

fn expr_reads(e: &Expr, out: &mut BTreeSet<Loc>) {
    match e {
        Expr::IntConst(_) => {}
        Expr::ReadLoc(x) => {
            out.insert(*x);
        }
        Expr::BinOp(_, a, b) => {
            expr_reads(a, out);
            expr_reads(b, out);
        }
    }
}

fn bexpr_reads(b: &BExpr, out: &mut BTreeSet<Loc>) {
    match b {
        BExpr::BoolConst(_) => {}
        BExpr::Not(a) => bexpr_reads(a, out),
        BExpr::Cmp(_, l, r) => {
            expr_reads(l, out);
            expr_reads(r, out);
        }
        BExpr::Logic(_, l, r) => {
            bexpr_reads(l, out);
            bexpr_reads(r, out);
        }
    }
}

/// Locations the program reads anywhere.
pub fn read_locations(c: &Cmd) -> BTreeSet<Loc> {
    fn go(c: &Cmd, out: &mut BTreeSet<Loc>) {
        match c {
            Cmd::Skip | Cmd::Fence => {}
            Cmd::Assign(_, e) => expr_reads(e, out),
            Cmd::Seq(a, b) | Cmd::Par(a, b) => {
                go(a, out);
                go(b, out);
            }
            Cmd::If(g, a, b) => {
                bexpr_reads(g, out);
                go(a, out);
                go(b, out);
            }
            Cmd::While(g, body) => {
                bexpr_reads(g, out);
                go(body, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    go(c, &mut out);
    out
}

fn keyword(p: &Parser) -> Option<String> {
    match p.peek() {
        Tok::Ident(s) => Some(s.clone()),
        _ => None,
    }
}

fn parse_init(p: &mut Parser) -> Result<GlobalState, ParseError> {
    p.expect(&Tok::LBrace)?;
    let mut init = BTreeMap::new();
    while !p.eat(&Tok::RBrace) {
        let x = p.location()?;
        p.expect(&Tok::Eq)?;
        let v = p.int()?;
        if init.insert(x, v).is_some() {
            return Err(p.error_here(format!("`{x}` initialised twice")));
        }
        p.eat(&Tok::Semi);
    }
    Ok(init)
}

fn parse_bounds(p: &mut Parser) -> Result<(Option<usize>, Option<BTreeSet<Value>>), ParseError> {
    p.expect(&Tok::LBrace)?;
    let (mut unroll, mut values) = (None, None);
    while !p.eat(&Tok::RBrace) {
        let key = p.ident()?;
        p.expect(&Tok::Eq)?;
        match key.as_str() {
            "unroll" => {
                let n = p.int()?;
                unroll = Some(usize::try_from(n).map_err(|_| p.error_here("unroll must be nonnegative"))?);
            }
            "values" => {
                p.expect(&Tok::LBrace)?;
                let mut set = BTreeSet::new();
                while !p.eat(&Tok::RBrace) {
                    set.insert(p.int()?);
                    p.eat(&Tok::Comma);
                }
                if set.is_empty() {
                    return Err(p.error_here("value set is empty"));
                }
                values = Some(set);
            }
            other => return Err(p.error_here(format!("unknown bound `{other}`"))),
        }
        p.eat(&Tok::Semi);
    }
    Ok((unroll, values))
}

pub fn parse_litmus(text: &str) -> Result<LitmusSpec, LitmusError> {
    let mut p = Parser::new(text)?;
    let mut name = None;
    let mut program = None;
    let mut initial = None;
    let mut query = None;
    let mut bounds = None;
    while let Some(word) = keyword(&p) {
        p.bump();
        match word.as_str() {
            "name" => {
                if name.replace(p.ident()?).is_some() {
                    return Err(LitmusError::Duplicate("name"));
                }
            }
            "program" => {
                p.expect(&Tok::LBrace)?;
                let body = p.cmd()?;
                p.expect(&Tok::RBrace)?;
                if program.replace(Program::new(body)).is_some() {
                    return Err(LitmusError::Duplicate("program"));
                }
            }
            "init" => {
                if initial.replace(parse_init(&mut p)?).is_some() {
                    return Err(LitmusError::Duplicate("init"));
                }
            }
            "reachable" | "forbidden" => {
                p.expect(&Tok::LParen)?;
                let pred = p.bexpr()?;
                p.expect(&Tok::RParen)?;
                let q = if word == "reachable" { Query::Reachable(pred) } else { Query::Forbidden(pred) };
                if query.replace(q).is_some() {
                    return Err(LitmusError::Duplicate("reachable/forbidden"));
                }
            }
            "bounds" => {
                if bounds.replace(parse_bounds(&mut p)?).is_some() {
                    return Err(LitmusError::Duplicate("bounds"));
                }
            }
            other => return Err(p.error_here(format!("unknown section `{other}`")).into()),
        }
    }
    p.expect_eof()?;
    let program = program.ok_or(LitmusError::Missing("program"))?;
    let mut initial = initial.ok_or(LitmusError::Missing("init"))?;
    let query = query.ok_or(LitmusError::Missing("reachable/forbidden"))?;
    if let Some(x) = read_locations(&program.body).into_iter().find(|x| !initial.contains_key(x)) {
        return Err(LitmusError::Uninitialised(x));
    }
    // A global write's footstep needs the overwritten value, so locations
    // that are only written start at 0 unless given.
    for x in crate::lang::locations_of(&program) {
        initial.entry(x).or_insert(0);
    }
    let (unroll, values) = bounds.unwrap_or((None, None));
    Ok(LitmusSpec { name: name.unwrap_or_else(|| "litmus".to_string()), program, initial, query, unroll, values })
}

/// An execution reaching a final state: the pomset, a linearisation whose
/// footprint contains the footstep, and the state reached.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub pomset: Pomset,
    pub pomset_text: String,
    pub env: WriteEnv,
    pub env_text: String,
    pub footstep: Footstep,
    pub final_state: GlobalState,
}

impl Witness {
    /// Recomputes the footprint under the recorded linearisation and checks
    /// that the footstep is in it, has empty buffers, applies to `initial`
    /// and yields the recorded final state.
    pub fn replays(&self, initial: &GlobalState, b: &Bounds) -> bool {
        let start = BufferedState::from_globals(initial.iter().map(|(&x, &v)| (x, v)));
        let Ok(set) = footprint(&self.pomset, &self.env, b) else {
            return false;
        };
        set.contains(&self.footstep)
            && self.footstep.is_zeta()
            && self.footstep.pre.within(&start)
            && start.update(&self.footstep.post).global_map() == self.final_state
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsEcho {
    pub unroll_max: usize,
    pub values: Vec<Value>,
    pub lin_node_max: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub query: String,
    pub holds: bool,
    pub satisfying_states: Vec<GlobalState>,
    pub final_states: Vec<GlobalState>,
    /// Executions reaching a satisfying state: evidence for `reachable`,
    /// counterexamples for `forbidden`.
    pub witnesses: Vec<Witness>,
    pub stats: ExecStats,
    pub bounds: BoundsEcho,
}

pub fn litmus_run(spec: &LitmusSpec, b: &Bounds, witness_cap: usize) -> Result<Verdict, LitmusError> {
    let runs = program_runs(&spec.program, &spec.initial, b)?;
    let final_states: BTreeSet<GlobalState> =
        runs.iter().flat_map(|r| r.runs.iter().map(|(_, _, s)| s.clone())).collect();
    let satisfying: Vec<GlobalState> = final_states.iter().filter(|s| spec.query.matches(s)).cloned().collect();
    let holds = match spec.query {
        Query::Reachable(_) => !satisfying.is_empty(),
        Query::Forbidden(_) => satisfying.is_empty(),
    };
    let mut witnesses = Vec::new();
    let mut covered: BTreeSet<GlobalState> = BTreeSet::new();
    'search: for run in &runs {
        let ctx = FootprintCtx::for_pomset(&run.pomset, b);
        for (writes, f, state) in &run.runs {
            if witnesses.len() >= witness_cap {
                break 'search;
            }
            // One witness per satisfying final state.
            if !spec.query.matches(state) || covered.contains(state) {
                continue;
            }
            if let Some(env) = find_linearisation(&run.pomset, writes, f, &ctx, WITNESS_SEARCH_BUDGET) {
                covered.insert(state.clone());
                let env_text = env.display(&run.pomset).to_string();
                witnesses.push(Witness {
                    pomset_text: run.pomset.to_string(),
                    env_text,
                    pomset: run.pomset.clone(),
                    env,
                    footstep: f.clone(),
                    final_state: state.clone(),
                });
            }
        }
    }
    let stats = ExecStats {
        pomsets: runs.len(),
        executable_pomsets: runs.iter().filter(|r| !r.runs.is_empty()).count(),
        flush_orders: runs.iter().map(|r| r.flush_orders).sum(),
        final_states: final_states.len(),
    };
    Ok(Verdict {
        name: spec.name.clone(),
        query: spec.query.to_string(),
        holds,
        satisfying_states: satisfying,
        final_states: final_states.into_iter().collect(),
        witnesses,
        stats,
        bounds: BoundsEcho { unroll_max: b.unroll_max, values: b.values().collect(), lin_node_max: b.lin_node_max },
    })
}
