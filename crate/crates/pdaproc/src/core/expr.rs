use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

use super::{CoreError, Prop, MAX_VARS};

/// An action label. `Tau` is the silent action and never equals a named label.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Action {
    Tau,
    Named(Arc<str>),
}

impl Action {
    /// Builds an action from its textual name; the reserved name `tau` yields [`Action::Tau`].
    pub fn named(name: &str) -> Action {
        if name == "tau" {
            Action::Tau
        } else {
            Action::Named(Arc::from(name))
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Action::Tau => "tau",
            Action::Named(n) => n,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Abstract syntax of sequential process terms.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum ProcExpr {
    Deadlock,
    Accept,
    Prefix(Action, Arc<ProcExpr>),
    Choice(Arc<ProcExpr>, Arc<ProcExpr>),
    /// Sequencing: control passes only once the left side accepts and is stuck.
    Seqc(Arc<ProcExpr>, Arc<ProcExpr>),
    /// Classic sequential composition, where an accepting left side may be skipped.
    SeqLegacy(Arc<ProcExpr>, Arc<ProcExpr>),
    Na(Arc<ProcExpr>),
    Guard(Prop, Arc<ProcExpr>),
    Signal(Prop, Arc<ProcExpr>),
    Ident(Arc<str>),
}

impl ProcExpr {
    pub fn prefix(a: Action, body: ProcExpr) -> ProcExpr {
        ProcExpr::Prefix(a, Arc::new(body))
    }

    pub fn choice(l: ProcExpr, r: ProcExpr) -> ProcExpr {
        ProcExpr::Choice(Arc::new(l), Arc::new(r))
    }

    pub fn seqc(l: ProcExpr, r: ProcExpr) -> ProcExpr {
        ProcExpr::Seqc(Arc::new(l), Arc::new(r))
    }

    pub fn seq_legacy(l: ProcExpr, r: ProcExpr) -> ProcExpr {
        ProcExpr::SeqLegacy(Arc::new(l), Arc::new(r))
    }

    pub fn na(body: ProcExpr) -> ProcExpr {
        ProcExpr::Na(Arc::new(body))
    }

    pub fn guard(cond: Prop, body: ProcExpr) -> ProcExpr {
        ProcExpr::Guard(cond, Arc::new(body))
    }

    pub fn signal(sig: Prop, body: ProcExpr) -> ProcExpr {
        ProcExpr::Signal(sig, Arc::new(body))
    }

    pub fn ident(name: &str) -> ProcExpr {
        ProcExpr::Ident(Arc::from(name))
    }

    /// Shorthand for `a.body` with a named action.
    pub fn act(a: &str, body: ProcExpr) -> ProcExpr {
        ProcExpr::prefix(Action::named(a), body)
    }

    pub fn is_recursion_free(&self) -> bool {
        free_idents(self).is_empty()
    }

    /// True when the term mentions a guard or a signal anywhere.
    pub fn has_conditions(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if matches!(e, ProcExpr::Guard(..) | ProcExpr::Signal(..)) {
                found = true;
            }
        });
        found
    }

    pub fn has_legacy_seq(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if matches!(e, ProcExpr::SeqLegacy(..)) {
                found = true;
            }
        });
        found
    }

    /// Number of constructor nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Pre-order traversal over every subterm, including `self`.
    pub fn visit(&self, f: &mut impl FnMut(&ProcExpr)) {
        f(self);
        match self {
            ProcExpr::Deadlock | ProcExpr::Accept | ProcExpr::Ident(_) => {}
            ProcExpr::Prefix(_, p) | ProcExpr::Na(p) | ProcExpr::Guard(_, p) | ProcExpr::Signal(_, p) => {
                p.visit(f)
            }
            ProcExpr::Choice(l, r) | ProcExpr::Seqc(l, r) | ProcExpr::SeqLegacy(l, r) => {
                l.visit(f);
                r.visit(f);
            }
        }
    }

    /// Named actions occurring in the term.
    pub fn actions(&self) -> BTreeSet<Action> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let ProcExpr::Prefix(a, _) = e {
                out.insert(a.clone());
            }
        });
        out
    }

    fn props(&self) -> Vec<Prop> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let ProcExpr::Guard(p, _) | ProcExpr::Signal(p, _) = e {
                out.push(*p);
            }
        });
        out
    }
}

/// Identifiers occurring syntactically in `expr`.
pub fn free_idents(expr: &ProcExpr) -> BTreeSet<Arc<str>> {
    let mut out = BTreeSet::new();
    expr.visit(&mut |e| {
        if let ProcExpr::Ident(x) = e {
            out.insert(x.clone());
        }
    });
    out
}

/// Left-nested alternative composition; the empty sum is deadlock.
pub fn big_choice(exprs: impl IntoIterator<Item = ProcExpr>) -> ProcExpr {
    let mut it = exprs.into_iter();
    let Some(first) = it.next() else {
        return ProcExpr::Deadlock;
    };
    it.fold(first, ProcExpr::choice)
}

/// Left-nested composition of an identifier word; the empty word is `1`.
/// `mode` picks the composition operator.
pub fn seq_word<S: AsRef<str>>(word: &[S], mode: Mode) -> ProcExpr {
    let mut it = word.iter().map(|x| ProcExpr::ident(x.as_ref()));
    let Some(first) = it.next() else {
        return ProcExpr::Accept;
    };
    it.fold(first, |acc, x| match mode {
        Mode::Seqc => ProcExpr::seqc(acc, x),
        Mode::Seq => ProcExpr::seq_legacy(acc, x),
    })
}

/// Which sequential operator a specification is written with.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Mode {
    Seq,
    Seqc,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Seq => "seq",
            Mode::Seqc => "seqc",
        })
    }
}

/// A recursive specification: defining equations plus an initial identifier.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Spec {
    pub name: String,
    pub mode: Mode,
    pub init: Arc<str>,
    pub vars: Vec<String>,
    /// Declared alphabet, or the actions used when none is declared.
    pub alphabet: BTreeSet<Action>,
    pub equations: IndexMap<Arc<str>, ProcExpr>,
}

impl Spec {
    /// Builds and validates a specification. An empty `alphabet` is replaced by the
    /// actions the equations use.
    pub fn new(
        name: impl Into<String>,
        mode: Mode,
        init: &str,
        vars: Vec<String>,
        alphabet: BTreeSet<Action>,
        equations: IndexMap<Arc<str>, ProcExpr>,
    ) -> Result<Spec, CoreError> {
        let mut spec = Spec {
            name: name.into(),
            mode,
            init: Arc::from(init),
            vars,
            alphabet,
            equations,
        };
        if spec.alphabet.is_empty() {
            spec.alphabet = spec.used_actions();
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Convenience constructor for signal-free specifications with an inferred alphabet.
    pub fn from_equations<'a>(
        name: &str,
        mode: Mode,
        init: &str,
        equations: impl IntoIterator<Item = (&'a str, ProcExpr)>,
    ) -> Result<Spec, CoreError> {
        let eqs = equations.into_iter().map(|(x, p)| (Arc::from(x), p)).collect();
        Spec::new(name, mode, init, Vec::new(), BTreeSet::new(), eqs)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.vars.len() > MAX_VARS {
            return Err(CoreError::TooManyVars { found: self.vars.len() });
        }
        if !self.equations.contains_key(&self.init) {
            return Err(CoreError::UndefinedInit(self.init.to_string()));
        }
        for body in self.equations.values() {
            if let Some(x) = free_idents(body).into_iter().find(|x| !self.equations.contains_key(x)) {
                return Err(CoreError::UndefinedIdent(x.to_string()));
            }
            if self.mode == Mode::Seqc && body.has_legacy_seq() {
                return Err(CoreError::LegacyInSeqc);
            }
            for p in body.props() {
                p.check_arity(self.vars.len())?;
            }
        }
        Ok(())
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn body(&self, x: &str) -> Option<&ProcExpr> {
        self.equations.get(x)
    }

    pub fn idents(&self) -> impl Iterator<Item = &Arc<str>> {
        self.equations.keys()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn truth(&self) -> Prop {
        Prop::truth(self.nvars())
    }

    pub fn falsity(&self) -> Prop {
        Prop::falsity(self.nvars())
    }

    pub fn has_conditions(&self) -> bool {
        self.equations.values().any(ProcExpr::has_conditions)
    }

    pub fn used_actions(&self) -> BTreeSet<Action> {
        let mut out = BTreeSet::new();
        for body in self.equations.values() {
            out.extend(body.actions().into_iter().filter(|a| *a != Action::Tau));
        }
        out
    }

    /// Returns the same specification rooted at a different identifier.
    pub fn with_init(&self, init: &str) -> Result<Spec, CoreError> {
        let mut s = self.clone();
        s.init = Arc::from(init);
        s.validate()?;
        Ok(s)
    }

    /// An identifier name not yet defined, built from `base`.
    pub fn fresh_name(&self, base: &str) -> String {
        if !self.equations.contains_key(base) {
            return base.to_string();
        }
        (1..)
            .map(|i| format!("{base}'{i}"))
            .find(|n| !self.equations.contains_key(n.as_str()))
            .expect("unbounded search")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: &str) -> ProcExpr {
        ProcExpr::ident(n)
    }

    #[test]
    fn free_idents_scans_syntax() {
        assert!(free_idents(&ProcExpr::Deadlock).is_empty());
        let e = ProcExpr::act("a", ProcExpr::seqc(x("Y"), x("X")));
        let got: Vec<_> = free_idents(&e).into_iter().map(|s| s.to_string()).collect();
        assert_eq!(got, ["X", "Y"]);
        let g = ProcExpr::choice(
            ProcExpr::guard(Prop::var(2, 0), x("X")),
            ProcExpr::signal(Prop::var(2, 1), ProcExpr::Accept),
        );
        assert_eq!(free_idents(&g).len(), 1);
    }

    #[test]
    fn big_choice_shapes() {
        assert_eq!(big_choice([]), ProcExpr::Deadlock);
        assert_eq!(big_choice([x("P")]), x("P"));
        assert_eq!(
            big_choice([x("P"), x("Q"), x("R")]),
            ProcExpr::choice(ProcExpr::choice(x("P"), x("Q")), x("R"))
        );
    }

    #[test]
    fn seq_word_shapes() {
        let empty: [&str; 0] = [];
        assert_eq!(seq_word(&empty, Mode::Seqc), ProcExpr::Accept);
        assert_eq!(seq_word(&["X"], Mode::Seqc), x("X"));
        assert_eq!(
            seq_word(&["X", "Y", "Z"], Mode::Seqc),
            ProcExpr::seqc(ProcExpr::seqc(x("X"), x("Y")), x("Z"))
        );
    }

    #[test]
    fn validation_catches_undefined() {
        let r = Spec::from_equations("S", Mode::Seqc, "X", [("X", x("Y"))]);
        assert_eq!(r, Err(CoreError::UndefinedIdent("Y".into())));
        let r = Spec::from_equations("S", Mode::Seqc, "Z", [("X", ProcExpr::Accept)]);
        assert_eq!(r, Err(CoreError::UndefinedInit("Z".into())));
        let r = Spec::from_equations("S", Mode::Seqc, "X", [("X", ProcExpr::seq_legacy(x("X"), x("X")))]);
        assert_eq!(r, Err(CoreError::LegacyInSeqc));
    }
}
