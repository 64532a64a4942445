//! Pretty-printer emitting the grammar accepted by the parser, with just
//! enough parentheses for `parse(print(ast)) == ast`.

use std::fmt;

use super::{ArithOp, BExpr, Cmd, Expr, LogicOp};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum CmdLevel {
    Atom,
    Seq,
    Par,
}

fn cmd_level(c: &Cmd) -> CmdLevel {
    match c {
        Cmd::Par(..) => CmdLevel::Par,
        Cmd::Seq(..) => CmdLevel::Seq,
        _ => CmdLevel::Atom,
    }
}

fn write_cmd(f: &mut fmt::Formatter<'_>, c: &Cmd, allowed: CmdLevel) -> fmt::Result {
    if cmd_level(c) > allowed {
        write!(f, "(")?;
        write_cmd(f, c, CmdLevel::Par)?;
        return write!(f, ")");
    }
    match c {
        Cmd::Skip => write!(f, "skip"),
        Cmd::Fence => write!(f, "fence"),
        Cmd::Assign(x, e) => write!(f, "{x} := {e}"),
        Cmd::Seq(a, b) => {
            write_cmd(f, a, CmdLevel::Atom)?;
            write!(f, "; ")?;
            write_cmd(f, b, CmdLevel::Seq)
        }
        Cmd::Par(a, b) => {
            write_cmd(f, a, CmdLevel::Seq)?;
            write!(f, " || ")?;
            write_cmd(f, b, CmdLevel::Par)
        }
        Cmd::If(g, t, e) => {
            write!(f, "if {g} then ")?;
            write_cmd(f, t, CmdLevel::Atom)?;
            write!(f, " else ")?;
            write_cmd(f, e, CmdLevel::Atom)
        }
        Cmd::While(g, body) => {
            write!(f, "while {g} do ")?;
            write_cmd(f, body, CmdLevel::Atom)
        }
    }
}

impl fmt::Display for Cmd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_cmd(f, self, CmdLevel::Par)
    }
}

// Expression levels: 0 = sum, 1 = product, 2 = primary.
fn expr_level(e: &Expr) -> u8 {
    match e {
        Expr::BinOp(ArithOp::Add | ArithOp::Sub, ..) => 0,
        Expr::BinOp(ArithOp::Mul, ..) => 1,
        _ => 2,
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, min_level: u8) -> fmt::Result {
    if expr_level(e) < min_level {
        write!(f, "(")?;
        write_expr(f, e, 0)?;
        return write!(f, ")");
    }
    match e {
        Expr::IntConst(v) => write!(f, "{v}"),
        Expr::ReadLoc(x) => write!(f, "{x}"),
        Expr::BinOp(op, a, b) => {
            let level = expr_level(e);
            write_expr(f, a, level)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(f, b, level + 1)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

// Boolean levels: 0 = or, 1 = and, 2 = negation/atom.
fn bexpr_level(b: &BExpr) -> u8 {
    match b {
        BExpr::Logic(LogicOp::Or, ..) => 0,
        BExpr::Logic(LogicOp::And, ..) => 1,
        _ => 2,
    }
}

fn write_bexpr(f: &mut fmt::Formatter<'_>, b: &BExpr, min_level: u8) -> fmt::Result {
    if bexpr_level(b) < min_level {
        write!(f, "(")?;
        write_bexpr(f, b, 0)?;
        return write!(f, ")");
    }
    match b {
        BExpr::BoolConst(v) => write!(f, "{v}"),
        BExpr::Not(inner) => {
            write!(f, "!")?;
            write_bexpr(f, inner, 2)
        }
        BExpr::Cmp(op, x, y) => {
            let sym = match op {
                super::CmpOp::Eq => "=",
                super::CmpOp::Lt => "<",
            };
            write!(f, "{x} {sym} {y}")
        }
        BExpr::Logic(op, x, y) => {
            let (level, sym) = match op {
                LogicOp::Or => (0, "or"),
                LogicOp::And => (1, "&&"),
            };
            write_bexpr(f, x, level)?;
            write!(f, " {sym} ")?;
            write_bexpr(f, y, level + 1)
        }
    }
}

impl fmt::Display for BExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bexpr(f, self, 0)
    }
}
