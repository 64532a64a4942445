//! Graphviz output, drawing covering edges only.

use std::fmt::Write;

use super::Pomset;

impl Pomset {
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", name.replace('"', "'"));
        let _ = writeln!(out, "  rankdir=LR;");
        for (i, a) in self.labels().iter().enumerate() {
            let _ = writeln!(out, "  n{i} [label=\"{}\"];", a.ascii());
        }
        for (a, b) in self.cover_edges() {
            let _ = writeln!(out, "  n{a} -> n{b};");
        }
        out.push_str("}\n");
        out
    }
}
