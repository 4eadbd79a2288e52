#![allow(dead_code)]

use pdaproc::bisim::k_bisimilar;
use pdaproc::core::{ProcExpr, Spec};
use pdaproc::pda::{pda_lts, Pda};
use pdaproc::semantics::{explore_term, natural_kind, Bounds, Lts, SemanticsKind};

pub const MAX_STATES: usize = 50_000;

pub fn spec_lts(spec: &Spec, k: usize) -> Lts {
    spec_lts_as(spec, natural_kind(spec), k)
}

pub fn spec_lts_as(spec: &Spec, kind: SemanticsKind, k: usize) -> Lts {
    explore_term(spec, &ProcExpr::Ident(spec.init.clone()), Bounds::new(k + 1, MAX_STATES), kind).unwrap()
}

pub fn automaton_lts(pda: &Pda, k: usize) -> Lts {
    pda_lts(pda, Bounds::new(k + 1, MAX_STATES)).unwrap()
}

/// Bounded bisimilarity at `k`, lowered when a state budget cut exploration short.
pub fn agree(l: &Lts, r: &Lts, k: usize) -> bool {
    let depth = [l.min_frontier_depth(), r.min_frontier_depth()].into_iter().flatten().min().unwrap_or(k + 1);
    k_bisimilar(l, r, k.min(depth - 1)).unwrap().is_equivalent()
}
