//! Seeded random generators for terms, propositions and specifications.

use std::collections::BTreeSet;
use std::sync::Arc;

use indexmap::IndexMap;
use rand::Rng;

use crate::core::{big_choice, Action, Mode, ProcExpr, Prop, Spec};

/// Shape parameters for random closed terms.
#[derive(Clone, Debug)]
pub struct TermGen {
    pub nvars: usize,
    pub max_depth: usize,
    pub actions: Vec<Action>,
    pub guards: bool,
    pub signals: bool,
    pub na: bool,
    /// Composition operator used for sequential nodes.
    pub seq: Mode,
    /// Identifiers that may appear directly under an action prefix.
    pub idents: Vec<Arc<str>>,
}

impl TermGen {
    pub fn new(nvars: usize, max_depth: usize) -> TermGen {
        TermGen {
            nvars,
            max_depth,
            actions: ["a", "b", "c"].iter().map(|a| Action::named(a)).collect(),
            guards: nvars > 0,
            signals: nvars > 0,
            na: true,
            seq: Mode::Seqc,
            idents: Vec::new(),
        }
    }

    pub fn plain(max_depth: usize) -> TermGen {
        TermGen { guards: false, signals: false, ..TermGen::new(0, max_depth) }
    }

    pub fn prop(&self, rng: &mut impl Rng) -> Prop {
        let n = self.nvars;
        if n == 0 {
            return Prop::constant(0, rng.gen_bool(0.7));
        }
        match rng.gen_range(0..10) {
            0..=2 => Prop::var(n, rng.gen_range(0..n)),
            3 => Prop::var(n, rng.gen_range(0..n)).not(),
            4 => Prop::truth(n),
            5 => Prop::falsity(n),
            _ => Prop::from_rows(n, [rng.gen(), rng.gen(), rng.gen(), rng.gen()]),
        }
    }

    fn action(&self, rng: &mut impl Rng) -> Action {
        self.actions[rng.gen_range(0..self.actions.len())].clone()
    }

    fn leaf(&self, rng: &mut impl Rng, under_prefix: bool) -> ProcExpr {
        if under_prefix && !self.idents.is_empty() && rng.gen_bool(0.5) {
            return ProcExpr::Ident(self.idents[rng.gen_range(0..self.idents.len())].clone());
        }
        if rng.gen_bool(0.6) {
            ProcExpr::Accept
        } else {
            ProcExpr::Deadlock
        }
    }

    pub fn term(&self, rng: &mut impl Rng) -> ProcExpr {
        self.term_at(rng, self.max_depth, false)
    }

    fn term_at(&self, rng: &mut impl Rng, depth: usize, under_prefix: bool) -> ProcExpr {
        if depth == 0 || rng.gen_bool(0.15) {
            return self.leaf(rng, under_prefix);
        }
        let d = depth - 1;
        loop {
            match rng.gen_range(0..9) {
                0 | 1 => return ProcExpr::prefix(self.action(rng), self.term_at(rng, d, true)),
                2 | 3 => return ProcExpr::choice(self.term_at(rng, d, under_prefix), self.term_at(rng, d, under_prefix)),
                4 | 5 => {
                    let l = self.term_at(rng, d, under_prefix);
                    let r = self.term_at(rng, d, under_prefix);
                    return match self.seq {
                        Mode::Seqc => ProcExpr::seqc(l, r),
                        Mode::Seq => ProcExpr::seq_legacy(l, r),
                    };
                }
                6 if self.na => return ProcExpr::na(self.term_at(rng, d, under_prefix)),
                7 if self.guards => return ProcExpr::guard(self.prop(rng), self.term_at(rng, d, under_prefix)),
                8 if self.signals => return ProcExpr::signal(self.prop(rng), self.term_at(rng, d, under_prefix)),
                _ => {}
            }
        }
    }
}

/// A specification with a single trivial equation, used as the ambient context of
/// closed terms over `nvars` propositional variables.
pub fn closed_context(nvars: usize, mode: Mode) -> Spec {
    let vars = (0..nvars).map(|i| format!("P{i}")).collect();
    let eqs: IndexMap<Arc<str>, ProcExpr> = [(Arc::from("Top"), ProcExpr::Accept)].into_iter().collect();
    let alphabet = ["a", "b", "c"].iter().map(|a| Action::named(a)).collect();
    Spec::new("closed", mode, "Top", vars, alphabet, eqs).expect("well-formed context")
}

/// A random guarded, condition-free `seqc` specification.
///
/// Every body is a sum of at most `max_summands` summands, each either `1` or an
/// action prefix followed by a small term over the identifiers.
pub fn random_spec(rng: &mut impl Rng, max_idents: usize, max_summands: usize) -> Spec {
    let n = rng.gen_range(1..=max_idents.max(1));
    let names: Vec<Arc<str>> = ["X", "Y", "Z", "W", "V", "U"].iter().take(n).map(|s| Arc::from(*s)).collect();
    let gen = TermGen { idents: names.clone(), na: false, ..TermGen::plain(2) };
    let mut eqs = IndexMap::new();
    for x in &names {
        let k = rng.gen_range(1..=max_summands.max(1));
        let mut summands = Vec::new();
        let mut has_one = false;
        for _ in 0..k {
            if !has_one && rng.gen_bool(0.25) {
                has_one = true;
                summands.push(ProcExpr::Accept);
            } else {
                let body = gen.term_at(rng, 2, true);
                summands.push(ProcExpr::prefix(gen.action(rng), body));
            }
        }
        eqs.insert(x.clone(), big_choice(summands));
    }
    Spec::new("random", Mode::Seqc, &names[0], Vec::new(), BTreeSet::new(), eqs).expect("generated spec is closed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::check_guarded;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_specs_are_guarded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let s = random_spec(&mut rng, 4, 3);
            assert!(check_guarded(&s).is_guarded());
        }
    }

    #[test]
    fn fragment_flags_are_respected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = TermGen::plain(4);
        for _ in 0..200 {
            let t = g.term(&mut rng);
            assert!(!t.has_conditions());
            assert!(t.is_recursion_free());
        }
    }
}
