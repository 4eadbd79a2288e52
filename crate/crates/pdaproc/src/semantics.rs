//! Operational semantics: plain transitions and acceptance, the valuation-indexed
//! semantics with consistency, the valuation-collapsed derived semantics, and
//! bounded breadth-first exploration into an [`Lts`].

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::hash::Hash;
use std::sync::Arc;

use thiserror::Error;

use crate::core::{Action, ProcExpr, Spec, Valuation};
use crate::parser::print_expr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("specification is unguarded: {}", cycle.join(" -> "))]
    Unguarded { cycle: Vec<String> },
    #[error("guards and signals are not allowed under the plain semantics")]
    ConditionsInPlainMode,
    #[error("term has no consistent valuation (its root signal is false)")]
    NoConsistentValuation,
    #[error("source state is inconsistent under the given valuation")]
    InconsistentSource,
    #[error("identifier `{0}` is not defined")]
    UnknownIdent(String),
    #[error("exploration bounds must be positive")]
    NonPositiveBounds,
    #[error("{0}")]
    Other(String),
}

/// Outcome of the guardedness check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guardedness {
    Guarded,
    /// A cycle of identifiers, each occurring unguarded in the body of the previous one.
    Unguarded(Vec<String>),
}

impl Guardedness {
    pub fn is_guarded(&self) -> bool {
        matches!(self, Guardedness::Guarded)
    }
}

/// Checks that every identifier occurrence lies under an action prefix.
pub fn check_guarded(spec: &Spec) -> Guardedness {
    let idents: Vec<&Arc<str>> = spec.idents().collect();
    let index: HashMap<&str, usize> = idents.iter().enumerate().map(|(i, x)| (x.as_ref(), i)).collect();
    let edges: Vec<Vec<usize>> = idents
        .iter()
        .map(|x| {
            let mut out = BTreeSet::new();
            unguarded_idents(&spec.equations[*x], &mut out);
            out.iter().map(|y| index[y.as_ref()]).collect()
        })
        .collect();
    // Depth-first search for a back edge; colours: 0 new, 1 on stack, 2 done.
    let mut colour = vec![0u8; idents.len()];
    let mut stack: Vec<usize> = Vec::new();
    fn dfs(u: usize, edges: &[Vec<usize>], colour: &mut [u8], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
        colour[u] = 1;
        stack.push(u);
        for &w in &edges[u] {
            if colour[w] == 1 {
                let pos = stack.iter().position(|&s| s == w).expect("on stack");
                return Some(stack[pos..].to_vec());
            }
            if colour[w] == 0 {
                if let Some(c) = dfs(w, edges, colour, stack) {
                    return Some(c);
                }
            }
        }
        stack.pop();
        colour[u] = 2;
        None
    }
    for u in 0..idents.len() {
        if colour[u] == 0 {
            if let Some(cycle) = dfs(u, &edges, &mut colour, &mut stack) {
                return Guardedness::Unguarded(cycle.into_iter().map(|i| idents[i].to_string()).collect());
            }
        }
    }
    Guardedness::Guarded
}

fn unguarded_idents(e: &ProcExpr, out: &mut BTreeSet<Arc<str>>) {
    match e {
        ProcExpr::Deadlock | ProcExpr::Accept | ProcExpr::Prefix(..) => {}
        ProcExpr::Ident(x) => {
            out.insert(x.clone());
        }
        ProcExpr::Na(p) | ProcExpr::Guard(_, p) | ProcExpr::Signal(_, p) => unguarded_idents(p, out),
        ProcExpr::Choice(l, r) | ProcExpr::Seqc(l, r) | ProcExpr::SeqLegacy(l, r) => {
            unguarded_idents(l, out);
            unguarded_idents(r, out);
        }
    }
}

/// Maps an action and the current valuation to the valuation after the action.
pub trait Effect {
    fn apply(&self, action: &Action, v: Valuation) -> Valuation;
}

/// The reset effect: every action leads to the all-true valuation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Reset;

impl Effect for Reset {
    fn apply(&self, _action: &Action, v: Valuation) -> Valuation {
        Valuation::all_true(v.nvars())
    }
}

pub type PlainStep = (Action, ProcExpr);
pub type ValStep = (Action, ProcExpr, Valuation);

fn push_unique<T: PartialEq>(out: &mut Vec<T>, item: T) {
    if !out.contains(&item) {
        out.push(item);
    }
}

/// Semantic engine bound to one guarded specification.
///
/// Construction performs the guardedness check, so no rule is ever evaluated on an
/// unguarded specification. Memo tables live for the lifetime of the engine.
pub struct Engine<'s, E: Effect = Reset> {
    spec: &'s Spec,
    effect: E,
    cons_memo: RefCell<HashMap<(ProcExpr, Valuation), bool>>,
    acc_memo: RefCell<HashMap<(ProcExpr, Valuation), bool>>,
}

impl<'s> Engine<'s, Reset> {
    pub fn new(spec: &'s Spec) -> Result<Engine<'s, Reset>, SemanticsError> {
        Engine::with_effect(spec, Reset)
    }
}

impl<'s, E: Effect> Engine<'s, E> {
    pub fn with_effect(spec: &'s Spec, effect: E) -> Result<Engine<'s, E>, SemanticsError> {
        if let Guardedness::Unguarded(cycle) = check_guarded(spec) {
            return Err(SemanticsError::Unguarded { cycle });
        }
        Ok(Engine { spec, effect, cons_memo: RefCell::default(), acc_memo: RefCell::default() })
    }

    pub fn spec(&self) -> &'s Spec {
        self.spec
    }

    fn unfold(&self, x: &str) -> Result<&'s ProcExpr, SemanticsError> {
        self.spec.body(x).ok_or_else(|| SemanticsError::UnknownIdent(x.to_string()))
    }

    fn check_arity(&self, v: Valuation) -> Result<(), SemanticsError> {
        if v.nvars() != self.spec.nvars() {
            return Err(SemanticsError::Other(format!(
                "valuation over {} variables, specification declares {}",
                v.nvars(),
                self.spec.nvars()
            )));
        }
        Ok(())
    }

    // ----- plain semantics -------------------------------------------------

    pub fn accepts_plain(&self, e: &ProcExpr) -> Result<bool, SemanticsError> {
        Ok(match e {
            ProcExpr::Deadlock | ProcExpr::Prefix(..) | ProcExpr::Na(_) => false,
            ProcExpr::Accept => true,
            ProcExpr::Choice(l, r) => self.accepts_plain(l)? || self.accepts_plain(r)?,
            ProcExpr::Seqc(l, r) | ProcExpr::SeqLegacy(l, r) => self.accepts_plain(l)? && self.accepts_plain(r)?,
            ProcExpr::Guard(..) | ProcExpr::Signal(..) => return Err(SemanticsError::ConditionsInPlainMode),
            ProcExpr::Ident(x) => self.accepts_plain(self.unfold(x)?)?,
        })
    }

    pub fn steps_plain(&self, e: &ProcExpr) -> Result<Vec<PlainStep>, SemanticsError> {
        let mut out = Vec::new();
        self.steps_plain_into(e, &mut out)?;
        Ok(out)
    }

    fn steps_plain_into(&self, e: &ProcExpr, out: &mut Vec<PlainStep>) -> Result<(), SemanticsError> {
        match e {
            ProcExpr::Deadlock | ProcExpr::Accept => {}
            ProcExpr::Prefix(a, p) => push_unique(out, (a.clone(), (**p).clone())),
            ProcExpr::Choice(l, r) => {
                self.steps_plain_into(l, out)?;
                self.steps_plain_into(r, out)?;
            }
            ProcExpr::Seqc(l, r) => {
                let left = self.steps_plain(l)?;
                let pass = left.is_empty() && self.accepts_plain(l)?;
                for (a, l2) in left {
                    push_unique(out, (a, ProcExpr::Seqc(Arc::new(l2), r.clone())));
                }
                if pass {
                    self.steps_plain_into(r, out)?;
                }
            }
            ProcExpr::SeqLegacy(l, r) => {
                for (a, l2) in self.steps_plain(l)? {
                    push_unique(out, (a, ProcExpr::SeqLegacy(Arc::new(l2), r.clone())));
                }
                if self.accepts_plain(l)? {
                    self.steps_plain_into(r, out)?;
                }
            }
            ProcExpr::Na(p) => self.steps_plain_into(p, out)?,
            ProcExpr::Guard(..) | ProcExpr::Signal(..) => return Err(SemanticsError::ConditionsInPlainMode),
            ProcExpr::Ident(x) => self.steps_plain_into(self.unfold(x)?, out)?,
        }
        Ok(())
    }

    // ----- valuation semantics ---------------------------------------------

    /// Consistency of `e` under `v`.
    pub fn cons(&self, e: &ProcExpr, v: Valuation) -> Result<bool, SemanticsError> {
        self.check_arity(v)?;
        self.cons_inner(e, v)
    }

    fn cons_inner(&self, e: &ProcExpr, v: Valuation) -> Result<bool, SemanticsError> {
        let quick = match e {
            ProcExpr::Deadlock | ProcExpr::Accept | ProcExpr::Prefix(..) => Some(true),
            _ => None,
        };
        if let Some(b) = quick {
            return Ok(b);
        }
        let key = (e.clone(), v);
        if let Some(&b) = self.cons_memo.borrow().get(&key) {
            return Ok(b);
        }
        let b = match e {
            ProcExpr::Choice(l, r) => self.cons_inner(l, v)? && self.cons_inner(r, v)?,
            ProcExpr::Guard(phi, p) => !phi.holds(v) || self.cons_inner(p, v)?,
            ProcExpr::Signal(phi, p) => phi.holds(v) && self.cons_inner(p, v)?,
            ProcExpr::Seqc(l, r) | ProcExpr::SeqLegacy(l, r) => {
                self.cons_inner(l, v)? && (!self.acc_raw(l, v)? || self.cons_inner(r, v)?)
            }
            ProcExpr::Na(p) => self.cons_inner(p, v)?,
            ProcExpr::Ident(x) => self.cons_inner(self.unfold(x)?, v)?,
            ProcExpr::Deadlock | ProcExpr::Accept | ProcExpr::Prefix(..) => unreachable!(),
        };
        self.cons_memo.borrow_mut().insert(key, b);
        Ok(b)
    }

    /// Acceptance rules without the outer consistency requirement.
    fn acc_raw(&self, e: &ProcExpr, v: Valuation) -> Result<bool, SemanticsError> {
        match e {
            ProcExpr::Deadlock | ProcExpr::Prefix(..) | ProcExpr::Na(_) => return Ok(false),
            ProcExpr::Accept => return Ok(true),
            _ => {}
        }
        let key = (e.clone(), v);
        if let Some(&b) = self.acc_memo.borrow().get(&key) {
            return Ok(b);
        }
        let b = match e {
            ProcExpr::Choice(l, r) => {
                (self.acc_raw(l, v)? && self.cons_inner(r, v)?) || (self.acc_raw(r, v)? && self.cons_inner(l, v)?)
            }
            ProcExpr::Seqc(l, r) | ProcExpr::SeqLegacy(l, r) => self.acc_raw(l, v)? && self.acc_raw(r, v)?,
            ProcExpr::Guard(phi, p) | ProcExpr::Signal(phi, p) => phi.holds(v) && self.acc_raw(p, v)?,
            ProcExpr::Ident(x) => self.acc_raw(self.unfold(x)?, v)?,
            _ => unreachable!(),
        };
        self.acc_memo.borrow_mut().insert(key, b);
        Ok(b)
    }

    /// Acceptance of the state `<e, v>`; inconsistent states never accept.
    pub fn accepts_val(&self, e: &ProcExpr, v: Valuation) -> Result<bool, SemanticsError> {
        Ok(self.cons(e, v)? && self.acc_raw(e, v)?)
    }

    /// Steps of the consistent state `<e, v>`.
    pub fn steps_val(&self, e: &ProcExpr, v: Valuation) -> Result<Vec<ValStep>, SemanticsError> {
        if !self.cons(e, v)? {
            return Err(SemanticsError::InconsistentSource);
        }
        let mut out = Vec::new();
        self.steps_val_into(e, v, &mut out)?;
        Ok(out)
    }

    fn raw_steps(&self, e: &ProcExpr, v: Valuation) -> Result<Vec<ValStep>, SemanticsError> {
        let mut out = Vec::new();
        self.steps_val_into(e, v, &mut out)?;
        Ok(out)
    }

    fn steps_val_into(&self, e: &ProcExpr, v: Valuation, out: &mut Vec<ValStep>) -> Result<(), SemanticsError> {
        match e {
            ProcExpr::Deadlock | ProcExpr::Accept => {}
            ProcExpr::Prefix(a, p) => {
                let v2 = self.effect.apply(a, v);
                if self.cons_inner(p, v2)? {
                    push_unique(out, (a.clone(), (**p).clone(), v2));
                }
            }
            ProcExpr::Choice(l, r) => {
                if self.cons_inner(r, v)? {
                    self.steps_val_into(l, v, out)?;
                }
                if self.cons_inner(l, v)? {
                    self.steps_val_into(r, v, out)?;
                }
            }
            ProcExpr::Seqc(l, r) => {
                let left = self.raw_steps(l, v)?;
                let pass = left.is_empty() && self.acc_raw(l, v)?;
                for (a, l2, v2) in left {
                    let target = ProcExpr::Seqc(Arc::new(l2), r.clone());
                    if self.cons_inner(&target, v2)? {
                        push_unique(out, (a, target, v2));
                    }
                }
                if pass {
                    self.steps_val_into(r, v, out)?;
                }
            }
            ProcExpr::SeqLegacy(l, r) => {
                for (a, l2, v2) in self.raw_steps(l, v)? {
                    let target = ProcExpr::SeqLegacy(Arc::new(l2), r.clone());
                    if self.cons_inner(&target, v2)? {
                        push_unique(out, (a, target, v2));
                    }
                }
                if self.acc_raw(l, v)? {
                    self.steps_val_into(r, v, out)?;
                }
            }
            ProcExpr::Na(p) => self.steps_val_into(p, v, out)?,
            ProcExpr::Guard(phi, p) | ProcExpr::Signal(phi, p) => {
                if phi.holds(v) {
                    self.steps_val_into(p, v, out)?;
                }
            }
            ProcExpr::Ident(x) => self.steps_val_into(self.unfold(x)?, v, out)?,
        }
        Ok(())
    }

    /// Valuations under which `e` is consistent.
    pub fn consistent_valuations(&self, e: &ProcExpr) -> Result<Vec<Valuation>, SemanticsError> {
        let mut out = Vec::new();
        for v in Valuation::all(self.spec.nvars()) {
            if self.cons_inner(e, v)? {
                out.push(v);
            }
        }
        Ok(out)
    }

    // ----- derived semantics -----------------------------------------------

    /// Steps present under every consistent valuation.
    pub fn steps_derived(&self, e: &ProcExpr) -> Result<Vec<PlainStep>, SemanticsError> {
        let vals = self.consistent_valuations(e)?;
        let Some((first, rest)) = vals.split_first() else {
            return Err(SemanticsError::NoConsistentValuation);
        };
        let strip = |steps: Vec<ValStep>| -> Vec<PlainStep> { steps.into_iter().map(|(a, q, _)| (a, q)).collect() };
        let mut common = strip(self.steps_val(e, *first)?);
        for v in rest {
            let here = strip(self.steps_val(e, *v)?);
            common.retain(|s| here.contains(s));
        }
        Ok(common)
    }

    /// Acceptance under every consistent valuation.
    pub fn accepts_derived(&self, e: &ProcExpr) -> Result<bool, SemanticsError> {
        let vals = self.consistent_valuations(e)?;
        if vals.is_empty() {
            return Err(SemanticsError::NoConsistentValuation);
        }
        for v in vals {
            if !self.acc_raw(e, v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// States reachable by performing `word`, where `tau` steps may be interleaved freely.
    #[allow(dead_code)]
    pub(crate) fn reach_by_word(
        &self,
        start: &ProcExpr,
        word: &[Action],
        max_states: usize,
    ) -> Result<BTreeSet<ProcExpr>, SemanticsError> {
        let tau_closure = |set: BTreeSet<ProcExpr>| -> Result<BTreeSet<ProcExpr>, SemanticsError> {
            let mut seen = set.clone();
            let mut todo: Vec<ProcExpr> = set.into_iter().collect();
            while let Some(p) = todo.pop() {
                for (a, q) in self.steps_plain(&p)? {
                    if a == Action::Tau && seen.len() < max_states && seen.insert(q.clone()) {
                        todo.push(q);
                    }
                }
            }
            Ok(seen)
        };
        let mut current = tau_closure(BTreeSet::from([start.clone()]))?;
        for w in word {
            let mut next = BTreeSet::new();
            for p in &current {
                for (a, q) in self.steps_plain(p)? {
                    if &a == w {
                        next.insert(q);
                    }
                }
            }
            current = tau_closure(next)?;
        }
        Ok(current)
    }
}

/// Convenience wrapper around [`Engine::steps_plain`].
pub fn steps_plain(spec: &Spec, e: &ProcExpr) -> Result<Vec<PlainStep>, SemanticsError> {
    Engine::new(spec)?.steps_plain(e)
}

pub fn accepts_plain(spec: &Spec, e: &ProcExpr) -> Result<bool, SemanticsError> {
    Engine::new(spec)?.accepts_plain(e)
}

pub fn cons(spec: &Spec, e: &ProcExpr, v: Valuation) -> Result<bool, SemanticsError> {
    Engine::new(spec)?.cons(e, v)
}

pub fn steps_val(spec: &Spec, e: &ProcExpr, v: Valuation) -> Result<Vec<ValStep>, SemanticsError> {
    Engine::new(spec)?.steps_val(e, v)
}

pub fn accepts_val(spec: &Spec, e: &ProcExpr, v: Valuation) -> Result<bool, SemanticsError> {
    Engine::new(spec)?.accepts_val(e, v)
}

pub fn steps_derived(spec: &Spec, e: &ProcExpr) -> Result<Vec<PlainStep>, SemanticsError> {
    Engine::new(spec)?.steps_derived(e)
}

pub fn accepts_derived(spec: &Spec, e: &ProcExpr) -> Result<bool, SemanticsError> {
    Engine::new(spec)?.accepts_derived(e)
}

// ----- exploration ---------------------------------------------------------

/// An explored process graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lts {
    pub labels: Vec<String>,
    pub root: usize,
    pub transitions: Vec<(usize, Action, usize)>,
    pub accepting: BTreeSet<usize>,
    /// States whose outgoing transitions were not explored.
    pub frontier: BTreeSet<usize>,
    /// Breadth-first distance of every state from the root.
    pub depth: Vec<usize>,
}

impl Lts {
    pub fn num_states(&self) -> usize {
        self.labels.len()
    }

    pub fn successors(&self, s: usize) -> impl Iterator<Item = (&Action, usize)> + '_ {
        self.transitions.iter().filter(move |(src, _, _)| *src == s).map(|(_, a, d)| (a, *d))
    }

    /// Outgoing transitions per state, indexed by source.
    pub fn adjacency(&self) -> Vec<Vec<(Action, usize)>> {
        let mut adj = vec![Vec::new(); self.num_states()];
        for (s, a, d) in &self.transitions {
            adj[*s].push((a.clone(), *d));
        }
        adj
    }

    pub fn is_complete(&self) -> bool {
        self.frontier.is_empty()
    }

    /// Smallest depth of a frontier state, or `None` when fully explored.
    pub fn min_frontier_depth(&self) -> Option<usize> {
        self.frontier.iter().map(|&s| self.depth[s]).min()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub max_depth: usize,
    pub max_states: usize,
}

impl Bounds {
    pub fn new(max_depth: usize, max_states: usize) -> Bounds {
        Bounds { max_depth, max_states }
    }

    pub fn depth(max_depth: usize) -> Bounds {
        Bounds { max_depth, max_states: 50_000 }
    }
}

impl Default for Bounds {
    fn default() -> Bounds {
        Bounds { max_depth: 12, max_states: 50_000 }
    }
}

/// A rooted transition system that can be explored breadth-first.
pub trait TransitionSystem {
    type State: Clone + Eq + Hash;
    type Error: From<SemanticsError>;

    fn root(&self) -> Result<Self::State, Self::Error>;
    fn steps(&self, s: &Self::State) -> Result<Vec<(Action, Self::State)>, Self::Error>;
    fn accepts(&self, s: &Self::State) -> Result<bool, Self::Error>;
    fn label(&self, s: &Self::State) -> String;
}

/// Breadth-first exploration up to the given bounds.
pub fn explore<T: TransitionSystem>(sys: &T, bounds: Bounds) -> Result<Lts, T::Error> {
    if bounds.max_depth == 0 || bounds.max_states == 0 {
        return Err(SemanticsError::NonPositiveBounds.into());
    }
    let root = sys.root()?;
    let mut states: Vec<T::State> = vec![root.clone()];
    let mut index: HashMap<T::State, usize> = HashMap::from([(root, 0)]);
    let mut depth = vec![0usize];
    let mut transitions = Vec::new();
    let mut frontier = BTreeSet::new();
    let mut queue = VecDeque::from([0usize]);
    let mut capped = false;
    while let Some(s) = queue.pop_front() {
        if capped || depth[s] >= bounds.max_depth {
            frontier.insert(s);
            continue;
        }
        let steps = sys.steps(&states[s])?;
        let mut fresh: Vec<&T::State> = Vec::new();
        for (_, t) in &steps {
            if !index.contains_key(t) && !fresh.contains(&t) {
                fresh.push(t);
            }
        }
        if states.len() + fresh.len() > bounds.max_states {
            capped = true;
            frontier.insert(s);
            continue;
        }
        for (a, t) in steps {
            let d = match index.get(&t) {
                Some(&d) => d,
                None => {
                    let d = states.len();
                    index.insert(t.clone(), d);
                    states.push(t);
                    depth.push(depth[s] + 1);
                    queue.push_back(d);
                    d
                }
            };
            if !transitions.contains(&(s, a.clone(), d)) {
                transitions.push((s, a, d));
            }
        }
    }
    let mut accepting = BTreeSet::new();
    for (i, st) in states.iter().enumerate() {
        if sys.accepts(st)? {
            accepting.insert(i);
        }
    }
    Ok(Lts { labels: states.iter().map(|s| sys.label(s)).collect(), root: 0, transitions, accepting, frontier, depth })
}

/// Which semantics drives the exploration of a specification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemanticsKind {
    Plain,
    Derived,
}

/// A specification viewed as a transition system over terms.
pub struct SpecSystem<'s> {
    engine: Engine<'s>,
    kind: SemanticsKind,
    root: ProcExpr,
}

impl<'s> SpecSystem<'s> {
    pub fn new(spec: &'s Spec, kind: SemanticsKind) -> Result<SpecSystem<'s>, SemanticsError> {
        let root = ProcExpr::Ident(spec.init.clone());
        SpecSystem::rooted(spec, kind, root)
    }

    pub fn rooted(spec: &'s Spec, kind: SemanticsKind, root: ProcExpr) -> Result<SpecSystem<'s>, SemanticsError> {
        Ok(SpecSystem { engine: Engine::new(spec)?, kind, root })
    }
}

impl TransitionSystem for SpecSystem<'_> {
    type State = ProcExpr;
    type Error = SemanticsError;

    fn root(&self) -> Result<ProcExpr, SemanticsError> {
        Ok(self.root.clone())
    }

    fn steps(&self, s: &ProcExpr) -> Result<Vec<(Action, ProcExpr)>, SemanticsError> {
        match self.kind {
            SemanticsKind::Plain => self.engine.steps_plain(s),
            SemanticsKind::Derived => self.engine.steps_derived(s),
        }
    }

    fn accepts(&self, s: &ProcExpr) -> Result<bool, SemanticsError> {
        match self.kind {
            SemanticsKind::Plain => self.engine.accepts_plain(s),
            SemanticsKind::Derived => self.engine.accepts_derived(s),
        }
    }

    fn label(&self, s: &ProcExpr) -> String {
        print_expr(s, &self.engine.spec().vars)
    }
}

/// Explores a specification from its initial identifier.
pub fn explore_spec(spec: &Spec, bounds: Bounds, kind: SemanticsKind) -> Result<Lts, SemanticsError> {
    explore(&SpecSystem::new(spec, kind)?, bounds)
}

/// Explores a specification from an arbitrary term.
pub fn explore_term(spec: &Spec, root: &ProcExpr, bounds: Bounds, kind: SemanticsKind) -> Result<Lts, SemanticsError> {
    explore(&SpecSystem::rooted(spec, kind, root.clone())?, bounds)
}

/// Picks the semantics matching a specification: derived when it uses conditions.
pub fn natural_kind(spec: &Spec) -> SemanticsKind {
    if spec.has_conditions() {
        SemanticsKind::Derived
    } else {
        SemanticsKind::Plain
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{Mode, Prop};

    fn a(body: ProcExpr) -> ProcExpr {
        ProcExpr::act("a", body)
    }
    fn b(body: ProcExpr) -> ProcExpr {
        ProcExpr::act("b", body)
    }
    fn one() -> ProcExpr {
        ProcExpr::Accept
    }

    fn empty_spec(nvars: usize) -> Spec {
        let vars = (0..nvars).map(|i| format!("P{i}")).collect();
        let eqs = [(Arc::from("X"), one())].into_iter().collect();
        Spec::new("T", Mode::Seqc, "X", vars, BTreeSet::new(), eqs).unwrap()
    }

    #[test]
    fn negative_premise_blocks_right_side() {
        let spec = empty_spec(0);
        let eng = Engine::new(&spec).unwrap();
        let p = ProcExpr::seqc(ProcExpr::choice(a(one()), one()), b(one()));
        let steps = eng.steps_plain(&p).unwrap();
        assert_eq!(steps, vec![(Action::named("a"), ProcExpr::seqc(one(), b(one())))]);
        let q = ProcExpr::choice(ProcExpr::seqc(a(one()), b(one())), ProcExpr::seqc(one(), b(one())));
        let steps = eng.steps_plain(&q).unwrap();
        assert_eq!(steps.len(), 2);
        assert!(steps.contains(&(Action::named("b"), one())));
    }

    #[test]
    fn plain_acceptance() {
        let spec = empty_spec(0);
        let eng = Engine::new(&spec).unwrap();
        assert!(eng.accepts_plain(&ProcExpr::seqc(one(), one())).unwrap());
        assert!(!eng.accepts_plain(&ProcExpr::na(one())).unwrap());
    }

    #[test]
    fn consistency_examples() {
        let spec = empty_spec(2);
        let eng = Engine::new(&spec).unwrap();
        let p = Prop::var(2, 0);
        let q = Prop::var(2, 1);
        let v_pf = Valuation::from_bools(&[false, true]);
        assert!(!eng.cons(&ProcExpr::signal(p, one()), v_pf).unwrap());
        for v in Valuation::all(2) {
            assert!(eng.cons(&ProcExpr::guard(p, one()), v).unwrap());
        }
        let both = ProcExpr::choice(ProcExpr::signal(p, one()), ProcExpr::signal(q, one()));
        assert!(eng.cons(&both, Valuation::all_true(2)).unwrap());
    }

    #[test]
    fn false_signal_under_prefix_blocks() {
        let spec = empty_spec(1);
        let eng = Engine::new(&spec).unwrap();
        let t = a(ProcExpr::signal(Prop::falsity(1), one()));
        for v in Valuation::all(1) {
            assert!(eng.steps_val(&t, v).unwrap().is_empty());
        }
        let t = a(ProcExpr::signal(Prop::var(1, 0), one()));
        let steps = eng.steps_val(&t, Valuation::new(1, 0)).unwrap();
        assert_eq!(steps, vec![(Action::named("a"), ProcExpr::signal(Prop::var(1, 0), one()), Valuation::all_true(1))]);
    }

    #[test]
    fn derived_semantics_examples() {
        let spec = empty_spec(1);
        let eng = Engine::new(&spec).unwrap();
        let p = Prop::var(1, 0);
        assert!(eng.steps_derived(&ProcExpr::guard(p, a(one()))).unwrap().is_empty());
        let t = ProcExpr::seqc(ProcExpr::signal(p, one()), ProcExpr::guard(p, a(one())));
        assert_eq!(eng.steps_derived(&t).unwrap(), vec![(Action::named("a"), one())]);
        let t = ProcExpr::signal(Prop::truth(1), a(one()));
        assert_eq!(eng.steps_derived(&t).unwrap(), vec![(Action::named("a"), one())]);
        let bad = ProcExpr::signal(Prop::falsity(1), one());
        assert_eq!(eng.steps_derived(&bad), Err(SemanticsError::NoConsistentValuation));
    }

    #[test]
    fn unguarded_specs_are_rejected() {
        let x = ProcExpr::ident("X");
        let spec =
            Spec::from_equations("U", Mode::Seqc, "X", [("X", ProcExpr::choice(ProcExpr::seqc(x, a(one())), one()))])
                .unwrap();
        assert_eq!(check_guarded(&spec), Guardedness::Unguarded(vec!["X".into()]));
        assert!(matches!(Engine::new(&spec), Err(SemanticsError::Unguarded { .. })));
    }

    #[test]
    fn tau_absorbing_reachability() {
        let tau = |p| ProcExpr::prefix(Action::Tau, p);
        let spec = empty_spec(0);
        let eng = Engine::new(&spec).unwrap();
        let t = tau(a(tau(b(one()))));
        let got = eng.reach_by_word(&t, &[Action::named("a"), Action::named("b")], 100).unwrap();
        assert_eq!(got, BTreeSet::from([one()]));
    }

    #[test]
    fn bounds_must_be_positive() {
        let spec = empty_spec(0);
        assert_eq!(
            explore_spec(&spec, Bounds::new(0, 10), SemanticsKind::Plain),
            Err(SemanticsError::NonPositiveBounds)
        );
    }
}
