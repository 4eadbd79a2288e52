use std::collections::BTreeSet;

use pdaproc::bisim::{bisimilar_complete, k_bisimilar, partition_refine, replay_witness, stateless_bisimilar, KBisimVerdict};
use pdaproc::core::{Action, Mode, ProcExpr};
use pdaproc::corpus;
use pdaproc::gen::{closed_context, TermGen};
use pdaproc::parser::parse_term;
use pdaproc::rewrite::{decide_bisim_rf, random_rewrites, RfVerdict};
use pdaproc::semantics::{explore_term, Bounds, Lts, SemanticsKind};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small complete graph with random transitions over `{a, b}`.
fn random_lts(rng: &mut impl Rng) -> Lts {
    let n = rng.gen_range(1..=6);
    let mut transitions = Vec::new();
    for s in 0..n {
        for _ in 0..rng.gen_range(0..=3) {
            let a = if rng.gen_bool(0.5) { "a" } else { "b" };
            transitions.push((s, Action::named(a), rng.gen_range(0..n)));
        }
    }
    transitions.sort();
    transitions.dedup();
    Lts {
        labels: (0..n).map(|i| format!("s{i}")).collect(),
        root: 0,
        transitions,
        accepting: (0..n).filter(|_| rng.gen_bool(0.5)).collect(),
        frontier: BTreeSet::new(),
        depth: vec![0; n],
    }
}

fn relabel(lts: &Lts) -> Lts {
    let mut out = lts.clone();
    for (_, a, _) in &mut out.transitions {
        *a = Action::named(if a.name() == "a" { "up" } else { "down" });
    }
    out
}

fn related(l: &Lts, r: &Lts, k: usize) -> bool {
    k_bisimilar(l, r, k).unwrap().is_equivalent()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn approximants_decrease_and_witnesses_replay(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (l, r) = (random_lts(&mut rng), random_lts(&mut rng));
        let mut still_related = true;
        for k in 0..8 {
            match k_bisimilar(&l, &r, k).unwrap() {
                KBisimVerdict::Equivalent(j) => {
                    prop_assert!(still_related, "related at {} after failing below", k);
                    prop_assert_eq!(j, k);
                }
                KBisimVerdict::Distinguished(w) => {
                    still_related = false;
                    prop_assert!(w.depth() <= k);
                    prop_assert_eq!(w.states(), (l.root, r.root));
                    prop_assert!(replay_witness(&l, &r, &w));
                }
            }
        }
    }

    /// On finite graphs the approximant at the combined size coincides with
    /// bisimilarity, computed independently by partition refinement.
    #[test]
    fn refinement_agrees_with_deep_approximants(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (l, r) = (random_lts(&mut rng), random_lts(&mut rng));
        let k = l.num_states() + r.num_states();
        prop_assert_eq!(bisimilar_complete(&l, &r).unwrap(), related(&l, &r, k));
        let (quotient, block) = partition_refine(&l).unwrap();
        prop_assert!(related(&l, &quotient, k));
        prop_assert_eq!(quotient.root, block[l.root]);
    }

    #[test]
    fn verdicts_ignore_action_names(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (l, r) = (random_lts(&mut rng), random_lts(&mut rng));
        for k in 0..5 {
            prop_assert_eq!(related(&l, &r, k), related(&relabel(&l), &relabel(&r), k));
        }
    }
}

#[test]
fn graph_and_rewriting_decisions_agree_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let ctx = closed_context(2, Mode::Seqc);
    let gen = TermGen::new(2, 3);
    let mut equal = 0;
    for i in 0..300 {
        let p = gen.term(&mut rng);
        let q = if i % 2 == 0 { random_rewrites(&p, Mode::Seqc, 2, 4, &mut rng) } else { gen.term(&mut rng) };
        let by_graph = stateless_bisimilar(&ctx, &p, &q).unwrap();
        let by_rewriting = decide_bisim_rf(&ctx, &p, &q).unwrap() == RfVerdict::Equal;
        assert_eq!(by_graph, by_rewriting, "{p:?} vs {q:?}");
        equal += usize::from(by_graph);
    }
    assert!(equal >= 150, "only {equal} related pairs");
}

/// `[P] -> a.1` and `[P] -> b.1` have no derived steps, so their derived graphs agree,
/// yet the valuation with P true tells them apart.
#[test]
fn derived_graphs_lose_valuation_dependent_steps() {
    let spec = corpus::spec(corpus::FALSEGUARDS_SPEC);
    let p = parse_term(&spec, "[P] -> a.1").unwrap();
    let q = parse_term(&spec, "[P] -> b.1").unwrap();
    let graph = |t: &ProcExpr| explore_term(&spec, t, Bounds::depth(4), SemanticsKind::Derived).unwrap();
    assert!(bisimilar_complete(&graph(&p), &graph(&q)).unwrap());
    assert!(!stateless_bisimilar(&spec, &p, &q).unwrap());
    let a = parse_term(&spec, "a.1").unwrap();
    let split = parse_term(&spec, "[P] -> a.1 + [!P] -> a.(1 + 0)").unwrap();
    assert!(stateless_bisimilar(&spec, &a, &split).unwrap());
    assert!(!bisimilar_complete(&graph(&a), &graph(&split)).unwrap());
}

#[test]
fn insufficient_exploration_is_refused() {
    let spec = corpus::spec(corpus::COUNTER_SPEC);
    let root = ProcExpr::ident("X");
    let shallow = explore_term(&spec, &root, Bounds::depth(3), SemanticsKind::Plain).unwrap();
    assert!(k_bisimilar(&shallow, &shallow, 2).is_ok());
    assert!(k_bisimilar(&shallow, &shallow, 3).is_err());
}
