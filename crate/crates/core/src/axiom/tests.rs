use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::gen::{self, Alphabet};
use crate::lang::loc;

/// `(x:=2 < x=2) ∥ (x:=3 < x=3)`: nodes 0 x:=2, 1 x=2, 2 x:=3, 3 x=3.
pub(crate) fn two_writers() -> Pomset {
    let x = loc("x");
    Pomset::chain([Action::write(x, 2), Action::read(x, 2)])
        .par(&Pomset::chain([Action::write(x, 3), Action::read(x, 3)]))
}

fn given(pairs: &[(&str, Value)]) -> InitialState {
    InitialState::Given(pairs.iter().map(|&(x, v)| (loc(x), v)).collect())
}

/// A random pomset over reads, writes and δ.
pub(crate) fn po_pomset(rng: &mut ChaCha8Rng, nodes: usize) -> Pomset {
    let alphabet = Alphabet::new(&["x", "y"], [0, 1]);
    gen::sp_pomset(rng, &alphabet, nodes).map_labels(|a| match *a {
        Action::BufferWrite { loc, value } => Action::write(loc, value),
        other => other,
    })
}

/// Permutations of `p`'s nodes that pass every axiom.
fn brute_force_totals(p: &Pomset, init: &InitialState, axioms: &[Axiom]) -> Vec<Vec<NodeId>> {
    fn permute(rest: &mut Vec<NodeId>, prefix: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
        }
        for i in 0..rest.len() {
            let n = rest.remove(i);
            prefix.push(n);
            permute(rest, prefix, out);
            prefix.pop();
            rest.insert(i, n);
        }
    }
    let mut all = Vec::new();
    permute(&mut p.nodes().collect(), &mut Vec::new(), &mut all);
    all.into_iter()
        .filter(|seq| check_selected(p, &CandidateOrder::total(p, seq).unwrap(), init, axioms).unwrap().consistent())
        .collect()
}

#[test]
fn failing_linearisation_fails_only_va() {
    let p = two_writers();
    let t = CandidateOrder::total(&p, &[0, 2, 3, 1]).unwrap();
    assert!(p.is_linearisation(&[0, 2, 3, 1]));
    let report = check_axioms(&p, &t, &given(&[("x", 0)])).unwrap();
    assert_eq!(report.failing(), vec![Axiom::Va]);
    assert_eq!(report.violations[0].nodes, vec![1]);
}

#[test]
fn read_before_own_write_is_consistent() {
    let p = two_writers();
    assert!(!p.is_linearisation(&[1, 0, 3, 2]));
    let t = CandidateOrder::total(&p, &[1, 0, 3, 2]).unwrap();
    for init in [given(&[("x", 0)]), InitialState::Any, InitialState::Strict] {
        assert!(check_axioms(&p, &t, &init).unwrap().consistent());
    }
    let totals = tso_consistent_totals(&p, &InitialState::Strict, 8).unwrap();
    assert!(totals.contains(&vec![1, 0, 3, 2]));
    assert!(!totals.contains(&vec![0, 2, 3, 1]));
}

#[test]
fn empty_order_is_consistent() {
    let p = Pomset::empty();
    let t = CandidateOrder::total(&p, &[]).unwrap();
    assert!(check_axioms(&p, &t, &InitialState::Strict).unwrap().consistent());
    assert_eq!(tso_consistent_totals(&p, &InitialState::Strict, 4).unwrap(), vec![Vec::<NodeId>::new()]);
}

#[test]
fn unwritten_reads_use_the_initial_state() {
    let p = Pomset::singleton(Action::read(loc("x"), 0));
    assert_eq!(tso_consistent_totals(&p, &given(&[("x", 0)]), 4).unwrap(), vec![vec![0]]);
    assert!(tso_consistent_totals(&p, &given(&[("x", 1)]), 4).unwrap().is_empty());
    assert!(tso_consistent_totals(&p, &InitialState::Strict, 4).unwrap().is_empty());
    let report = check_axioms(&p, &CandidateOrder::total(&p, &[0]).unwrap(), &InitialState::Strict).unwrap();
    assert_eq!(report.failing(), vec![Axiom::Vc]);

    let both = Pomset::singleton(Action::read(loc("x"), 0)).par(&Pomset::singleton(Action::read(loc("x"), 1)));
    assert!(tso_consistent_totals(&both, &InitialState::Any, 4).unwrap().is_empty());
}

#[test]
fn unordered_writes_fail_o() {
    let x = loc("x");
    let p = Pomset::singleton(Action::write(x, 1)).par(&Pomset::singleton(Action::write(x, 2)));
    let t = CandidateOrder::from_pairs(&p, &[]).unwrap();
    assert_eq!(check_axioms(&p, &t, &InitialState::Strict).unwrap().failing(), vec![Axiom::O]);
}

#[test]
fn mismatched_orders_are_rejected() {
    let p = two_writers();
    let q = Pomset::chain([Action::Delta]);
    assert!(matches!(
        check_axioms(&p, &CandidateOrder::total(&q, &[0]).unwrap(), &InitialState::Strict),
        Err(AxiomError::Mismatch { .. })
    ));
    assert!(CandidateOrder::total(&p, &[0, 0, 1, 2]).is_err());
    assert!(matches!(tso_consistent_totals(&p, &InitialState::Strict, 3), Err(AxiomError::TooLarge { .. })));
}

#[test]
fn partial_order_from_the_example_extends() {
    let p = two_writers();
    // Each read precedes its own write; the threads' reads stay unordered.
    let t = CandidateOrder::from_pairs(&p, &[(1, 0), (3, 2), (0, 2)]).unwrap();
    assert!(check_axioms(&p, &t, &InitialState::Strict).unwrap().consistent());
    let ext = extend_to_total(&p, &t, &InitialState::Strict).unwrap();
    let total = CandidateOrder::total(&p, &ext.total).unwrap();
    assert!(check_axioms(&p, &total, &InitialState::Strict).unwrap().consistent());
    assert!(t.order.nodes().all(|a| members(t.order.above(a)).all(|b| total.order.lt(a, b))));
}

#[test]
fn total_input_extends_to_itself() {
    let p = two_writers();
    let t = CandidateOrder::total(&p, &[1, 0, 3, 2]).unwrap();
    let ext = extend_to_total(&p, &t, &InitialState::Strict).unwrap();
    assert_eq!(ext.total, vec![1, 0, 3, 2]);
    assert_eq!(ext.by_condition + ext.by_symmetric + ext.by_check, 0);
    let bad = CandidateOrder::total(&p, &[0, 2, 3, 1]).unwrap();
    assert_eq!(
        extend_to_total(&p, &bad, &InitialState::Strict).unwrap_err(),
        AxiomError::Inconsistent(vec![Axiom::Va])
    );
}

#[test]
fn weakenings_of_a_chain() {
    let p = Pomset::chain([Action::Delta, Action::Delta, Action::Delta]);
    // Strict partial orders inside a 3-chain: 7.
    assert_eq!(weakenings(&p, &[0, 1, 2], 10).unwrap().len(), 7);
    let q = Pomset::chain([Action::Delta; 4]);
    assert_eq!(weakenings(&q, &[0, 1, 2, 3], 10).unwrap().len(), 40);
    assert!(weakenings(&q, &[0, 1, 2, 3], 5).is_err());
}

#[test]
fn totals_match_permutation_filter() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for round in 0..120 {
        let p = po_pomset(&mut rng, 1 + round % 6);
        for init in [InitialState::Any, InitialState::Strict, given(&[("x", 0), ("y", 0)])] {
            let mut fast = tso_consistent_totals(&p, &init, 8).unwrap();
            let mut slow = brute_force_totals(&p, &init, &Axiom::ALL);
            fast.sort();
            slow.sort();
            assert_eq!(fast, slow, "{p:?}");
        }
        // Weakened checkers generate their own candidates.
        let dropped = Axiom::ALL[round % Axiom::ALL.len()];
        let axioms: Vec<Axiom> = Axiom::ALL.into_iter().filter(|&a| a != dropped).collect();
        let mut fast = totals_selected(&p, &InitialState::Any, 8, &axioms).unwrap();
        let mut slow = brute_force_totals(&p, &InitialState::Any, &axioms);
        fast.sort();
        slow.sort();
        assert_eq!(fast, slow, "without {dropped}: {p:?}");
    }
}

#[test]
fn weakened_consistent_orders_extend() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let init = given(&[("x", 0), ("y", 0)]);
    let mut extended = 0;
    for round in 0..40 {
        let p = po_pomset(&mut rng, 2 + round % 4);
        let totals = tso_consistent_totals(&p, &init, 8).unwrap();
        for seq in totals.iter().take(2) {
            for w in weakenings(&p, seq, 15).unwrap() {
                if check_axioms(&p, &w, &init).unwrap().consistent() {
                    let ext = extend_to_total(&p, &w, &init).unwrap();
                    assert!(totals.contains(&ext.total));
                    extended += 1;
                }
            }
        }
    }
    assert!(extended > 100);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linearisations_keep_program_order_axioms(seed in any::<u64>(), nodes in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = po_pomset(&mut rng, nodes);
        let lin = gen::linearisation(&mut rng, &p);
        let report = check_axioms(&p, &CandidateOrder::total(&p, &lin).unwrap(), &InitialState::Strict).unwrap();
        for axiom in [Axiom::L, Axiom::S, Axiom::F, Axiom::J, Axiom::O] {
            prop_assert!(report.passes(axiom), "{:?} on {:?}", axiom, lin);
        }
    }

    #[test]
    fn weakening_only_breaks_dropped_pairs(seed in any::<u64>(), nodes in 1usize..6, drop in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = po_pomset(&mut rng, nodes);
        let lin = gen::linearisation(&mut rng, &p);
        let all = weakenings(&p, &lin, 15).unwrap();
        let weak = &all[(drop % all.len() as u64) as usize];
        let report = check_axioms(&p, weak, &InitialState::Strict).unwrap();
        // Any reported L/S/F/J counterexample names a program-order pair the
        // weakening dropped.
        for v in report.violations.iter().filter(|v| matches!(v.axiom, Axiom::L | Axiom::S | Axiom::F | Axiom::J)) {
            let dropped = |a: NodeId, b: NodeId| p.lt(a, b) && !weak.order.lt(a, b);
            let ok = match v.axiom {
                Axiom::F => dropped(v.nodes[0], v.nodes[1]) || dropped(v.nodes[0], v.nodes[2]),
                Axiom::J => dropped(v.nodes[0], v.nodes[2]) || dropped(v.nodes[1], v.nodes[2]),
                _ => dropped(v.nodes[0], v.nodes[1]),
            };
            prop_assert!(ok, "{:?}", v);
        }
        if p.nodes().all(|a| members(p.above(a)).all(|b| weak.order.lt(a, b))) {
            for axiom in [Axiom::L, Axiom::S, Axiom::F, Axiom::J] {
                prop_assert!(report.passes(axiom));
            }
        }
    }
}
