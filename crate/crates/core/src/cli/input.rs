//! Small text inputs: order files, initial states and buffers.

use crate::axiom::InitialState;
use crate::lang::{Loc, Value};
use crate::pomset::NodeId;
use crate::tso_sem::BufferList;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderInput {
    /// A total order, listed first to last.
    Sequence(Vec<NodeId>),
    /// Generating pairs `a < b` of a partial order.
    Pairs(Vec<(NodeId, NodeId)>),
}

/// Reads an order: JSON (`[0, 2, 1]` or `[[1, 0], [3, 2]]`) or text
/// (`0 2 1` or `1<0, 3<2`). Empty input is the empty partial order.
pub fn parse_order(text: &str) -> Result<OrderInput, String> {
    let t = text.trim();
    if t.is_empty() {
        return Ok(OrderInput::Pairs(Vec::new()));
    }
    if t.starts_with('[') {
        if let Ok(seq) = serde_json::from_str::<Vec<NodeId>>(t) {
            return Ok(OrderInput::Sequence(seq));
        }
        return serde_json::from_str::<Vec<(NodeId, NodeId)>>(t)
            .map(OrderInput::Pairs)
            .map_err(|e| format!("expected a list of indices or of pairs: {e}"));
    }
    let index = |s: &str| s.trim().parse::<NodeId>().map_err(|_| format!("bad node index {s:?}"));
    let tokens = t.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty());
    if t.contains('<') {
        // Allow spaces around `<` by rejoining before splitting pairs.
        let joined: String = t.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pairs = Vec::new();
        for item in joined.split(',').filter(|s| !s.is_empty()) {
            let chain: Vec<NodeId> = item.split('<').map(index).collect::<Result<_, _>>()?;
            if chain.len() < 2 {
                return Err(format!("expected `a<b`, found {item:?}"));
            }
            pairs.extend(chain.windows(2).map(|w| (w[0], w[1])));
        }
        Ok(OrderInput::Pairs(pairs))
    } else {
        tokens.map(index).collect::<Result<_, _>>().map(OrderInput::Sequence)
    }
}

fn assignment(text: &str, sep: &str) -> Result<(Loc, Value), String> {
    let (x, v) = text.split_once(sep).ok_or_else(|| format!("expected `x{sep}v`, found {text:?}"))?;
    let x = Loc::new(x.trim()).ok_or_else(|| format!("bad location {x:?}"))?;
    let v = v.trim().parse().map_err(|_| format!("bad value {v:?}"))?;
    Ok((x, v))
}

/// `any`, `strict`, or a list such as `x=0,y=0`.
pub fn parse_initial(text: &str) -> Result<InitialState, String> {
    match text.trim() {
        "any" => Ok(InitialState::Any),
        "strict" => Ok(InitialState::Strict),
        t => t
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| assignment(s, "="))
            .collect::<Result<_, _>>()
            .map(InitialState::Given),
    }
}

/// A buffer such as `x:=3,y:=2`, oldest write first.
pub fn parse_buffer(text: &str) -> Result<BufferList, String> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| assignment(s, ":="))
        .collect::<Result<Vec<_>, _>>()
        .map(BufferList::from_writes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::loc;

    #[test]
    fn orders_in_every_spelling() {
        assert_eq!(parse_order("0 2 3 1"), Ok(OrderInput::Sequence(vec![0, 2, 3, 1])));
        assert_eq!(parse_order("[0,2,3,1]\n"), Ok(OrderInput::Sequence(vec![0, 2, 3, 1])));
        assert_eq!(parse_order("1 < 0, 3<2"), Ok(OrderInput::Pairs(vec![(1, 0), (3, 2)])));
        assert_eq!(parse_order("0<1<2"), Ok(OrderInput::Pairs(vec![(0, 1), (1, 2)])));
        assert_eq!(parse_order("[[1,0],[3,2]]"), Ok(OrderInput::Pairs(vec![(1, 0), (3, 2)])));
        assert_eq!(parse_order("  "), Ok(OrderInput::Pairs(vec![])));
        assert!(parse_order("0 a").is_err());
        assert!(parse_order("1<").is_err());
    }

    #[test]
    fn initial_states_and_buffers() {
        assert_eq!(parse_initial("any"), Ok(InitialState::Any));
        assert_eq!(parse_initial("x=0, y=1"), Ok(InitialState::Given([(loc("x"), 0), (loc("y"), 1)].into())));
        assert!(parse_initial("x").is_err());
        assert_eq!(parse_buffer("x:=3, y:=2"), Ok(BufferList::from_writes([(loc("x"), 3), (loc("y"), 2)])));
        assert_eq!(parse_buffer(""), Ok(BufferList::empty()));
        assert!(parse_buffer("x=3").is_err());
    }
}
