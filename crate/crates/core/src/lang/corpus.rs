//! Built-in programs: the classic litmus shapes used throughout the tests.

use super::{parse, Program};

#[derive(Debug, Clone, Copy)]
pub struct NamedProgram {
    pub name: &'static str,
    pub source: &'static str,
}

impl NamedProgram {
    pub fn program(&self) -> Program {
        parse(self.source).unwrap_or_else(|e| panic!("corpus program {} fails to parse: {e}", self.name))
    }
}

pub const DEKKER: NamedProgram = NamedProgram {
    name: "dekker",
    source: "(x := 1; if y = 0 then z := 1 else skip) || (y := 1; if x = 0 then w := 1 else skip)",
};

/// Reduced two-flag instance without a turn variable.
pub const PETERSON: NamedProgram = NamedProgram {
    name: "peterson",
    source: "(x := 1; if x = 2 then l := 1 else skip) || (x := 2; if x = 1 then r := 1 else skip)",
};

pub const IRIW: NamedProgram =
    NamedProgram { name: "iriw", source: "x := 1 || y := 1 || (w1 := x; w2 := y) || (z1 := y; z2 := x)" };

pub const STORE_BUFFERING: NamedProgram = NamedProgram { name: "sb", source: "(x := 1; r1 := y) || (y := 1; r2 := x)" };

pub const FENCED_STORE_BUFFERING: NamedProgram =
    NamedProgram { name: "fence_sb", source: "(x := 1; fence; r1 := y) || (y := 1; fence; r2 := x)" };

/// Two threads that each write `x` and then test the value they wrote.
pub const OWN_WRITE_READS: NamedProgram = NamedProgram {
    name: "own_write_reads",
    source: "(x := 2; if x = 2 then skip else skip) || (x := 3; if x = 3 then skip else skip)",
};

pub const WRITE_THEN_READ: NamedProgram = NamedProgram { name: "write_then_read", source: "x := 1; r := x" };

pub fn corpus_programs() -> &'static [NamedProgram] {
    &[DEKKER, PETERSON, IRIW, STORE_BUFFERING, FENCED_STORE_BUFFERING, OWN_WRITE_READS, WRITE_THEN_READ]
}
