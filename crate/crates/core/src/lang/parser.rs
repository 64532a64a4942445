//! Recursive-descent parser for the concrete syntax.
//!
//! Precedence, loosest first: `||`, `;`, then atomic commands. Both `;` and
//! `||` nest to the right. The branches of `if` and the body of `while` are
//! atomic, so `if b then c1 else c2; c3` sequences `c3` after the conditional.

use thiserror::Error;

use super::{ArithOp, BExpr, Cmd, CmpOp, Expr, Loc, LogicOp, Program, Value, MAX_LOC_LEN};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(Value),
    Skip,
    Fence,
    If,
    Then,
    Else,
    While,
    Do,
    True,
    False,
    Or,
    Assign,
    Semi,
    Bar2,
    Eq,
    Lt,
    Bang,
    And,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Plus,
    Minus,
    Star,
    Comma,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.spelling()),
        }
    }

    fn spelling(&self) -> &'static str {
        match self {
            Tok::Skip => "skip",
            Tok::Fence => "fence",
            Tok::If => "if",
            Tok::Then => "then",
            Tok::Else => "else",
            Tok::While => "while",
            Tok::Do => "do",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Or => "or",
            Tok::Assign => ":=",
            Tok::Semi => ";",
            Tok::Bar2 => "||",
            Tok::Eq => "=",
            Tok::Lt => "<",
            Tok::Bang => "!",
            Tok::And => "&&",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Comma => ",",
            Tok::Ident(_) | Tok::Int(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, message: String| ParseError { line, column, message };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        // `#` and `//` start line comments.
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let tok = match two.as_str() {
            ":=" => Some(Tok::Assign),
            "||" => Some(Tok::Bar2),
            "&&" => Some(Tok::And),
            _ => None,
        };
        if let Some(tok) = tok {
            out.push(Token { tok, line: start_line, column: start_col });
            i += 2;
            col += 2;
            continue;
        }
        let single = match c {
            ';' => Some(Tok::Semi),
            '=' => Some(Tok::Eq),
            '<' => Some(Tok::Lt),
            '!' => Some(Tok::Bang),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, line: start_line, column: start_col });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            col += i - start;
            let v = digits
                .parse::<Value>()
                .map_err(|_| err(start_line, start_col, format!("integer `{digits}` out of range")))?;
            out.push(Token { tok: Tok::Int(v), line: start_line, column: start_col });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match word.as_str() {
                "skip" => Tok::Skip,
                "fence" => Tok::Fence,
                "if" => Tok::If,
                "then" => Tok::Then,
                "else" => Tok::Else,
                "while" => Tok::While,
                "do" => Tok::Do,
                "true" => Tok::True,
                "false" => Tok::False,
                "or" => Tok::Or,
                _ => Tok::Ident(word),
            };
            out.push(Token { tok, line: start_line, column: start_col });
            continue;
        }
        return Err(err(start_line, start_col, format!("unexpected character `{c}`")));
    }
    out.push(Token { tok: Tok::Eof, line, column: col });
    Ok(out)
}

/// Token cursor shared with the litmus file reader.
pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub(crate) fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(text)?, pos: 0 })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn error_here(&self, message: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError { line: t.line, column: t.column, message: message.into() }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.error_here(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{}`", tok.spelling())))
        }
    }

    pub(crate) fn expect_eof(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => Err(self.unexpected("end of input")),
        }
    }

    pub(crate) fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    pub(crate) fn location(&mut self) -> Result<Loc, ParseError> {
        let here = self.error_here("");
        let name = self.ident()?;
        Loc::new(&name)
            .ok_or(ParseError { message: format!("location name `{name}` longer than {MAX_LOC_LEN} bytes"), ..here })
    }

    pub(crate) fn int(&mut self) -> Result<Value, ParseError> {
        let negative = self.eat(&Tok::Minus);
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(if negative { -v } else { v })
            }
            _ => Err(self.unexpected("integer")),
        }
    }

    pub(crate) fn cmd(&mut self) -> Result<Cmd, ParseError> {
        let left = self.seq_cmd()?;
        if self.eat(&Tok::Bar2) {
            let right = self.cmd()?;
            return Ok(Cmd::par(left, right));
        }
        Ok(left)
    }

    fn seq_cmd(&mut self) -> Result<Cmd, ParseError> {
        let first = self.atom_cmd()?;
        if self.eat(&Tok::Semi) {
            let rest = self.seq_cmd()?;
            return Ok(Cmd::seq(first, rest));
        }
        Ok(first)
    }

    fn atom_cmd(&mut self) -> Result<Cmd, ParseError> {
        match self.peek().clone() {
            Tok::Skip => {
                self.bump();
                Ok(Cmd::Skip)
            }
            Tok::Fence => {
                self.bump();
                Ok(Cmd::Fence)
            }
            Tok::Ident(_) => {
                let x = self.location()?;
                self.expect(&Tok::Assign)?;
                let e = self.expr()?;
                Ok(Cmd::Assign(x, e))
            }
            Tok::If => {
                self.bump();
                let guard = self.bexpr()?;
                self.expect(&Tok::Then)?;
                let then_branch = self.atom_cmd()?;
                self.expect(&Tok::Else)?;
                let else_branch = self.atom_cmd()?;
                Ok(Cmd::if_(guard, then_branch, else_branch))
            }
            Tok::While => {
                self.bump();
                let guard = self.bexpr()?;
                self.expect(&Tok::Do)?;
                let body = self.atom_cmd()?;
                Ok(Cmd::while_(guard, body))
            }
            Tok::LParen => {
                self.bump();
                let c = self.cmd()?;
                self.expect(&Tok::RParen)?;
                Ok(c)
            }
            _ => Err(self.unexpected("command")),
        }
    }

    pub(crate) fn bexpr(&mut self) -> Result<BExpr, ParseError> {
        let mut left = self.and_bexpr()?;
        while self.eat(&Tok::Or) {
            let right = self.and_bexpr()?;
            left = BExpr::Logic(LogicOp::Or, Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and_bexpr(&mut self) -> Result<BExpr, ParseError> {
        let mut left = self.not_bexpr()?;
        while self.eat(&Tok::And) {
            let right = self.not_bexpr()?;
            left = BExpr::Logic(LogicOp::And, Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn not_bexpr(&mut self) -> Result<BExpr, ParseError> {
        if self.eat(&Tok::Bang) {
            return Ok(BExpr::negate(self.not_bexpr()?));
        }
        self.atom_bexpr()
    }

    fn atom_bexpr(&mut self) -> Result<BExpr, ParseError> {
        match self.peek() {
            Tok::True => {
                self.bump();
                Ok(BExpr::BoolConst(true))
            }
            Tok::False => {
                self.bump();
                Ok(BExpr::BoolConst(false))
            }
            Tok::LParen => {
                // `(` opens either a boolean group or an arithmetic operand of a
                // comparison; try the boolean reading first and backtrack.
                let saved = self.pos;
                self.bump();
                if let Ok(b) = self.bexpr() {
                    if self.eat(&Tok::RParen) && !matches!(self.peek(), Tok::Eq | Tok::Lt) {
                        return Ok(b);
                    }
                }
                self.pos = saved;
                self.comparison()
            }
            _ => self.comparison(),
        }
    }

    fn comparison(&mut self) -> Result<BExpr, ParseError> {
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Lt => CmpOp::Lt,
            _ => return Err(self.unexpected("`=` or `<`")),
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(BExpr::Cmp(op, lhs, rhs))
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(left),
            };
            self.bump();
            let right = self.product()?;
            left = Expr::BinOp(op, Box::new(left), Box::new(right));
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.primary()?;
        while self.eat(&Tok::Star) {
            let right = self.primary()?;
            left = Expr::BinOp(ArithOp::Mul, Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Int(_) => Ok(Expr::IntConst(self.int()?)),
            Tok::Minus if matches!(self.peek_at(1), Tok::Int(_)) => Ok(Expr::IntConst(self.int()?)),
            Tok::Ident(_) => Ok(Expr::ReadLoc(self.location()?)),
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            _ => Err(self.unexpected("expression")),
        }
    }
}

/// Parses a whole program.
pub fn parse(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(text)?;
    let body = p.cmd()?;
    p.expect_eof()?;
    Ok(Program { body })
}

/// Parses a standalone boolean expression (litmus predicates use this).
pub fn parse_bexpr(text: &str) -> Result<BExpr, ParseError> {
    let mut p = Parser::new(text)?;
    let b = p.bexpr()?;
    p.expect_eof()?;
    Ok(b)
}
