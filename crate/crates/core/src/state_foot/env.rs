//! Global-write environments: a linearisation of a pomset interleaved with
//! global writes flushed by other threads.

use std::fmt;

use serde::Serialize;

use crate::lang::{Loc, Value};
use crate::pomset::{bit, NodeId, NodeSet, Pomset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvItem {
    /// A node of the pomset.
    Node(NodeId),
    /// A global write from elsewhere.
    Foreign(Loc, Value),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnvError {
    #[error("node {0} is missing from the environment or repeated")]
    NodeCount(NodeId),
    #[error("node {0} is out of range")]
    UnknownNode(NodeId),
    #[error("environment places {later} before {earlier} against the pomset order")]
    OrderViolation { earlier: NodeId, later: NodeId },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct WriteEnv {
    pub items: Vec<EnvItem>,
}

impl WriteEnv {
    pub fn new(items: Vec<EnvItem>) -> Self {
        WriteEnv { items }
    }

    /// A plain linearisation with no foreign writes.
    pub fn from_linearisation(order: &[NodeId]) -> Self {
        WriteEnv { items: order.iter().map(|&n| EnvItem::Node(n)).collect() }
    }

    /// Checks that the nodes form a linearisation of `p`.
    pub fn validate(&self, p: &Pomset) -> Result<(), EnvError> {
        let mut seen: NodeSet = 0;
        for item in &self.items {
            if let EnvItem::Node(n) = *item {
                if n >= p.len() {
                    return Err(EnvError::UnknownNode(n));
                }
                if seen & bit(n) != 0 {
                    return Err(EnvError::NodeCount(n));
                }
                if let Some(earlier) = crate::pomset::members(p.above(n) & seen).next() {
                    return Err(EnvError::OrderViolation { earlier: n, later: earlier });
                }
                seen |= bit(n);
            }
        }
        match crate::pomset::members(p.all_nodes() & !seen).next() {
            Some(n) => Err(EnvError::NodeCount(n)),
            None => Ok(()),
        }
    }

    /// The global writes in order, foreign or not.
    pub fn global_writes(&self, p: &Pomset) -> Vec<(Loc, Value)> {
        global_writes(p, &self.items)
    }

    pub fn display<'a>(&'a self, p: &'a Pomset) -> impl fmt::Display + 'a {
        DisplayEnv { env: self, p }
    }
}

pub(crate) fn global_writes(p: &Pomset, items: &[EnvItem]) -> Vec<(Loc, Value)> {
    items
        .iter()
        .filter_map(|item| match *item {
            EnvItem::Node(n) => {
                let a = p.label(n);
                a.is_global_write()
                    .then(|| (a.loc().expect("write has a location"), a.value().expect("write has a value")))
            }
            EnvItem::Foreign(x, v) => Some((x, v)),
        })
        .collect()
}

/// The view of one parallel component: other components' global writes
/// become foreign and their remaining actions are dropped, unless `keep`
/// says otherwise.
pub(crate) fn project(
    p: &Pomset,
    items: &[EnvItem],
    part: NodeSet,
    keep_other: impl Fn(NodeId) -> bool,
) -> Vec<EnvItem> {
    items
        .iter()
        .filter_map(|item| match *item {
            EnvItem::Node(n) if part & bit(n) != 0 => Some(EnvItem::Node(n)),
            EnvItem::Node(n) => {
                let a = p.label(n);
                if a.is_global_write() {
                    Some(EnvItem::Foreign(a.loc().expect("write location"), a.value().expect("write value")))
                } else if keep_other(n) {
                    Some(EnvItem::Node(n))
                } else {
                    None
                }
            }
            foreign => Some(foreign),
        })
        .collect()
}

struct DisplayEnv<'a> {
    env: &'a WriteEnv,
    p: &'a Pomset,
}

impl fmt::Display for DisplayEnv<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, item) in self.env.items.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match *item {
                EnvItem::Node(n) => write!(f, "{}", self.p.label(n))?,
                EnvItem::Foreign(x, v) => write!(f, "[{x}:={v}]")?,
            }
        }
        write!(f, ">")
    }
}
