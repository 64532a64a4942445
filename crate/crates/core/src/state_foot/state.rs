//! Buffered states: global values plus per-location buffer summaries.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::lang::{Loc, Value};

/// A buffer summary `v_n`: `n` pending writes, the latest with value `v`.
/// All empty summaries are identified, so `count = 0` stores value 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BufferEntry {
    value: Value,
    count: u32,
}

impl BufferEntry {
    pub fn new(value: Value, count: u32) -> Self {
        if count == 0 {
            BufferEntry::empty()
        } else {
            BufferEntry { value, count }
        }
    }

    pub fn empty() -> Self {
        BufferEntry { value: 0, count: 0 }
    }

    /// The latest pending value; `None` when nothing is pending.
    pub fn value(&self) -> Option<Value> {
        (self.count > 0).then_some(self.value)
    }

    pub fn count(&self) -> u32 {
        self.count
    }
}

impl fmt::Display for BufferEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{v}_{}", self.count),
            None => write!(f, "*_0"),
        }
    }
}

impl Serialize for BufferEntry {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("value", &self.value())?;
        m.serialize_entry("count", &self.count)?;
        m.end()
    }
}

/// Finite maps `Loc ⇀ V` and `BLoc ⇀ BufferEntry`, kept sorted by location.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BufferedState {
    globals: Vec<(Loc, Value)>,
    buffers: Vec<(Loc, BufferEntry)>,
}

fn agrees<V: Eq>(a: &[(Loc, V)], b: &[(Loc, V)]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if a[i].1 != b[j].1 {
                    return false;
                }
                i += 1;
                j += 1;
            }
        }
    }
    true
}

/// Entries of both, `b` winning on shared keys.
fn overlay<V: Copy>(a: &[(Loc, V)], b: &[(Loc, V)]) -> Vec<(Loc, V)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(b[j]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn without_keys<V: Copy, W>(a: &[(Loc, V)], b: &[(Loc, W)]) -> Vec<(Loc, V)> {
    a.iter().filter(|(k, _)| b.binary_search_by(|(x, _)| x.cmp(k)).is_err()).copied().collect()
}

fn insert<V>(entries: &mut Vec<(Loc, V)>, x: Loc, v: V) {
    match entries.binary_search_by(|(k, _)| k.cmp(&x)) {
        Ok(i) => entries[i].1 = v,
        Err(i) => entries.insert(i, (x, v)),
    }
}

fn get<V: Copy>(entries: &[(Loc, V)], x: Loc) -> Option<V> {
    entries.binary_search_by(|(k, _)| k.cmp(&x)).ok().map(|i| entries[i].1)
}

impl BufferedState {
    pub fn empty() -> Self {
        BufferedState::default()
    }

    pub fn from_globals(globals: impl IntoIterator<Item = (Loc, Value)>) -> Self {
        let mut s = BufferedState::empty();
        for (x, v) in globals {
            insert(&mut s.globals, x, v);
        }
        s
    }

    pub fn with_global(mut self, x: Loc, v: Value) -> Self {
        insert(&mut self.globals, x, v);
        self
    }

    pub fn with_buffer(mut self, x: Loc, e: BufferEntry) -> Self {
        insert(&mut self.buffers, x, e);
        self
    }

    pub fn global(&self, x: Loc) -> Option<Value> {
        get(&self.globals, x)
    }

    pub fn buffer(&self, x: Loc) -> Option<BufferEntry> {
        get(&self.buffers, x)
    }

    /// `σ[x̄]`, reading an absent buffer location as 0.
    pub fn count(&self, x: Loc) -> u32 {
        self.buffer(x).map_or(0, |e| e.count())
    }

    pub fn globals(&self) -> &[(Loc, Value)] {
        &self.globals
    }

    pub fn buffers(&self) -> &[(Loc, BufferEntry)] {
        &self.buffers
    }

    pub fn is_empty(&self) -> bool {
        self.globals.is_empty() && self.buffers.is_empty()
    }

    pub fn global_map(&self) -> BTreeMap<Loc, Value> {
        self.globals.iter().copied().collect()
    }

    /// Agreement on every shared location.
    pub fn consistent(&self, other: &BufferedState) -> bool {
        agrees(&self.globals, &other.globals) && agrees(&self.buffers, &other.buffers)
    }

    /// `(self \ dom other) ∪ other`.
    pub fn update(&self, other: &BufferedState) -> BufferedState {
        BufferedState {
            globals: overlay(&self.globals, &other.globals),
            buffers: overlay(&self.buffers, &other.buffers),
        }
    }

    /// Union of consistent states; `self` wins on conflicts.
    pub fn union(&self, other: &BufferedState) -> BufferedState {
        other.update(self)
    }

    /// Entries whose location is outside the domain of `other`.
    pub fn minus_domain(&self, other: &BufferedState) -> BufferedState {
        BufferedState {
            globals: without_keys(&self.globals, &other.globals),
            buffers: without_keys(&self.buffers, &other.buffers),
        }
    }

    /// Every buffer location has no pending writes.
    pub fn zeta(&self) -> bool {
        self.buffers.iter().all(|(_, e)| e.count() == 0)
    }

    /// Whether `self` is contained in `other` as a map. Buffer locations
    /// absent from `other` count as empty.
    pub fn within(&self, other: &BufferedState) -> bool {
        self.globals.iter().all(|&(x, v)| other.global(x) == Some(v))
            && self.buffers.iter().all(|&(x, e)| other.buffer(x).unwrap_or_else(BufferEntry::empty) == e)
    }
}

pub fn consistent(a: &BufferedState, b: &BufferedState) -> bool {
    a.consistent(b)
}

pub fn update(a: &BufferedState, b: &BufferedState) -> BufferedState {
    a.update(b)
}

pub fn zeta(s: &BufferedState) -> bool {
    s.zeta()
}

impl fmt::Display for BufferedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        let mut first = true;
        for (x, v) in &self.globals {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{x}:{v}")?;
        }
        for (x, e) in &self.buffers {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{x}\u{0304}:{e}")?;
        }
        write!(f, "]")
    }
}

impl Serialize for BufferedState {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("globals", &self.global_map())?;
        let buffers: BTreeMap<Loc, BufferEntry> = self.buffers.iter().copied().collect();
        m.serialize_entry("buffers", &buffers)?;
        m.end()
    }
}
