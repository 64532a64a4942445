pub mod axiom;
pub mod bridge;
pub mod cli;
pub mod exec;
pub mod gen;
pub mod lang;
pub mod po_sem;
pub mod pomset;
pub mod state_foot;
pub mod tso_sem;
