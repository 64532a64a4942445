//! Algebraic laws as pairs of commands whose TSO denotations coincide.

use serde::Serialize;

use super::{denote_tso, BufferList};
use crate::lang::{parse, BExpr, Cmd, Loc, ParseError, Value};
use crate::po_sem::Bounds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    /// `skip; c ≡ c ≡ c; skip`
    SkipUnit,
    /// `(c1; c2); c3 ≡ c1; (c2; c3)`
    SeqAssoc,
    /// `c1 ∥ c2 ≡ c2 ∥ c1`
    ParComm,
    /// `(c1 ∥ c2) ∥ c3 ≡ c1 ∥ (c2 ∥ c3)`
    ParAssoc,
    /// `(if b then c1 else c2); c3 ≡ if b then (c1; c3) else (c2; c3)`
    IfDistrib,
    /// `while b do c ≡ if b then (c; while b do c) else skip`, the right
    /// side spending one unit of the unrolling budget on its `if`.
    WhileUnroll,
}

impl LawKind {
    pub const ALL: [LawKind; 6] = [
        LawKind::SkipUnit,
        LawKind::SeqAssoc,
        LawKind::ParComm,
        LawKind::ParAssoc,
        LawKind::IfDistrib,
        LawKind::WhileUnroll,
    ];
}

/// One instance of a law: the sides and the unrolling budget for each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawCase {
    pub kind: LawKind,
    pub sides: Vec<(Cmd, usize)>,
}

impl LawCase {
    /// Instantiates `kind` with commands `c1, c2, c3` and condition `b`.
    pub fn new(kind: LawKind, c: [&Cmd; 3], b: &BExpr, unroll: usize) -> LawCase {
        let [c1, c2, c3] = c.map(Clone::clone);
        let seq = Cmd::seq;
        let sides = match kind {
            LawKind::SkipUnit => {
                vec![(seq(Cmd::Skip, c1.clone()), unroll), (c1.clone(), unroll), (seq(c1, Cmd::Skip), unroll)]
            }
            LawKind::SeqAssoc => {
                vec![(seq(seq(c1.clone(), c2.clone()), c3.clone()), unroll), (seq(c1, seq(c2, c3)), unroll)]
            }
            LawKind::ParComm => vec![(Cmd::par(c1.clone(), c2.clone()), unroll), (Cmd::par(c2, c1), unroll)],
            LawKind::ParAssoc => vec![
                (Cmd::par(Cmd::par(c1.clone(), c2.clone()), c3.clone()), unroll),
                (Cmd::par(c1, Cmd::par(c2, c3)), unroll),
            ],
            LawKind::IfDistrib => vec![
                (seq(Cmd::if_(b.clone(), c1.clone(), c2.clone()), c3.clone()), unroll),
                (Cmd::if_(b.clone(), seq(c1, c3.clone()), seq(c2, c3)), unroll),
            ],
            LawKind::WhileUnroll => {
                let unroll = unroll.max(1);
                let lp = Cmd::while_(b.clone(), c1.clone());
                vec![(lp.clone(), unroll), (Cmd::if_(b.clone(), seq(c1, lp), Cmd::Skip), unroll - 1)]
            }
        };
        LawCase { kind, sides }
    }

    /// Whether every side has the same denotation under `l`.
    pub fn holds_under(&self, l: &BufferList, bounds: &Bounds) -> bool {
        let mut denotations = self.sides.iter().map(|(c, unroll)| {
            let b = Bounds { unroll_max: *unroll, ..bounds.clone() };
            denote_tso(c, l, &b)
        });
        let first = denotations.next().expect("a law has sides");
        denotations.all(|d| d == first)
    }
}

/// Every law instantiated on one triple and condition.
pub fn law_cases(c: [&Cmd; 3], b: &BExpr, unroll: usize) -> Vec<LawCase> {
    LawKind::ALL.iter().map(|&k| LawCase::new(k, c, b, unroll)).collect()
}

/// A law fixture file:
///
/// ```text
/// name seq_assoc
/// side (x := 1; r := y); y := 1
/// side x := 1; (r := y; y := 1)
/// buffer x := 3, y := 2
/// values 0, 1, 2, 3
/// unroll 2
/// expect equal
/// ```
///
/// `buffer` may repeat (the empty buffer is always included); `expect
/// different` asks that some buffer separate two sides. `side@N` runs that
/// side with unrolling budget `N` instead of `unroll`. Lines starting with
/// `#` are comments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawFixture {
    pub name: String,
    /// Each side with its own unrolling budget, if any.
    pub sides: Vec<(Cmd, Option<usize>)>,
    pub buffers: Vec<BufferList>,
    pub values: Vec<Value>,
    pub unroll: usize,
    pub expect_equal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LawFixtureError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Parse { line: usize, source: ParseError },
    #[error("a law needs at least two sides")]
    TooFewSides,
}

fn buffer_entry(text: &str) -> Option<(Loc, Value)> {
    let (x, v) = text.split_once(":=")?;
    Some((Loc::new(x.trim())?, v.trim().parse().ok()?))
}

impl LawFixture {
    pub fn parse(text: &str) -> Result<LawFixture, LawFixtureError> {
        let mut fixture = LawFixture {
            name: "law".to_string(),
            sides: Vec::new(),
            buffers: vec![BufferList::empty()],
            values: vec![0, 1],
            unroll: 2,
            expect_equal: true,
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let syntax = |message: &str| LawFixtureError::Syntax { line, message: message.to_string() };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
            let rest = rest.trim();
            match key {
                "name" => fixture.name = rest.to_string(),
                side if side == "side" || side.starts_with("side@") => {
                    let budget = match side.strip_prefix("side@") {
                        Some(n) => Some(n.parse().map_err(|_| syntax("expected `side@N`"))?),
                        None => None,
                    };
                    let cmd = parse(rest).map_err(|source| LawFixtureError::Parse { line, source })?.body;
                    fixture.sides.push((cmd, budget));
                }
                "buffer" => {
                    let entries = rest
                        .split(',')
                        .map(buffer_entry)
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| syntax("expected `x := v, ...`"))?;
                    fixture.buffers.push(BufferList::from_writes(entries));
                }
                "values" => {
                    fixture.values = rest
                        .split(',')
                        .map(|v| v.trim().parse())
                        .collect::<Result<_, _>>()
                        .map_err(|_| syntax("expected integers"))?;
                }
                "unroll" => fixture.unroll = rest.parse().map_err(|_| syntax("expected a count"))?,
                "expect" => {
                    fixture.expect_equal = match rest {
                        "equal" => true,
                        "different" => false,
                        _ => return Err(syntax("expected `equal` or `different`")),
                    }
                }
                _ => return Err(syntax("unknown key")),
            }
        }
        if fixture.sides.len() < 2 {
            return Err(LawFixtureError::TooFewSides);
        }
        Ok(fixture)
    }

    /// Whether the sides' TSO denotations agree under every buffer, or for
    /// `expect different`, disagree under some buffer.
    pub fn holds(&self) -> bool {
        let base = Bounds::with_values(self.values.iter().copied());
        let denote = |(c, budget): &(Cmd, Option<usize>), l: &BufferList| {
            let b = Bounds { unroll_max: budget.unwrap_or(self.unroll), ..base.clone() };
            denote_tso(c, l, &b)
        };
        let agree = |l: &BufferList| {
            let first = denote(&self.sides[0], l);
            self.sides[1..].iter().all(|side| denote(side, l) == first)
        };
        if self.expect_equal {
            self.buffers.iter().all(agree)
        } else {
            !self.buffers.iter().all(agree)
        }
    }
}
