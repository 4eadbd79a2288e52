//! Greibach normal forms, identifier classification, acceptance irredundancy and
//! the separation construction.
//!
//! Identifier words are sequences of identifiers read as a sequential composition;
//! the empty word is `1`. Fresh identifiers are named deterministically: `F0`, `F1`,
//! ... for factors introduced by [`to_gnf`], `X#na` for acceptance-stripped variants
//! introduced by [`to_aignf`], and `X#dag` for the variants introduced by [`separate`].

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::bisim::{k_bisimilar, BisimError, KBisimVerdict};
use crate::core::{big_choice, seq_word, Action, CoreError, Mode, ProcExpr, Spec};
use crate::rewrite::{hnf_in, Hnf, RewriteError};
use crate::semantics::{
    check_guarded, explore_term, natural_kind, Bounds, Engine, Guardedness, SemanticsError, SemanticsKind,
};

pub type Word = Vec<Arc<str>>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalError {
    #[error("specification is unguarded: {}", .0.join(" -> "))]
    Unguarded(Vec<String>),
    #[error("this transformation needs a specification in seqc mode")]
    NotSeqc,
    #[error("this transformation does not support conditions or signals")]
    ConditionsPresent,
    #[error("equation for `{0}` is not in Greibach normal form")]
    NotGnf(String),
    #[error("specification is not in AIGNF: {0}")]
    NotAignf(String),
    #[error("undefined identifier `{0}`")]
    UndefinedIdent(String),
    #[error("validation failed for `{ident}`: {reason}")]
    ValidationFailed { ident: String, reason: String },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Bisim(#[from] BisimError),
}

fn require_guarded(spec: &Spec) -> Result<(), NormalError> {
    match check_guarded(spec) {
        Guardedness::Guarded => Ok(()),
        Guardedness::Unguarded(cycle) => Err(NormalError::Unguarded(cycle)),
    }
}

fn require_plain_seqc(spec: &Spec) -> Result<(), NormalError> {
    if spec.mode != Mode::Seqc {
        return Err(NormalError::NotSeqc);
    }
    if spec.has_conditions() {
        return Err(NormalError::ConditionsPresent);
    }
    Ok(())
}

// ----- words -------------------------------------------------------------------

/// Reads a term as an identifier word, if it is a sequential composition of
/// identifiers and `1`s.
pub fn word_of(e: &ProcExpr) -> Option<Word> {
    match e {
        ProcExpr::Accept => Some(Vec::new()),
        ProcExpr::Ident(x) => Some(vec![x.clone()]),
        ProcExpr::Seqc(l, r) | ProcExpr::SeqLegacy(l, r) => {
            let mut w = word_of(l)?;
            w.extend(word_of(r)?);
            Some(w)
        }
        _ => None,
    }
}

fn is_ident_tree(e: &ProcExpr, mode: Mode) -> bool {
    match (e, mode) {
        (ProcExpr::Ident(_), _) => true,
        (ProcExpr::Seqc(l, r), Mode::Seqc) | (ProcExpr::SeqLegacy(l, r), Mode::Seq) => {
            is_ident_tree(l, mode) && is_ident_tree(r, mode)
        }
        _ => false,
    }
}

fn operands(e: &ProcExpr) -> Vec<&ProcExpr> {
    match e {
        ProcExpr::Choice(l, r) => {
            let mut v = operands(l);
            v.extend(operands(r));
            v
        }
        _ => vec![e],
    }
}

/// Syntactic check for `(1 +) Σ a_i.α_i` with identifier words `α_i`.
pub fn is_gnf_body(e: &ProcExpr, mode: Mode) -> bool {
    operands(e).into_iter().all(|o| match o {
        ProcExpr::Accept | ProcExpr::Deadlock => true,
        ProcExpr::Prefix(_, w) => matches!(**w, ProcExpr::Accept) || is_ident_tree(w, mode),
        _ => false,
    })
}

// ----- classification ------------------------------------------------------------

/// Partition of identifiers by acceptance, plus the hereditarily non-accepting ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdentClass {
    pub accepting: BTreeSet<Arc<str>>,
    pub nonaccepting: BTreeSet<Arc<str>>,
    pub hereditary: BTreeSet<Arc<str>>,
}

impl IdentClass {
    pub fn is_accepting(&self, x: &str) -> bool {
        self.accepting.contains(x)
    }

    fn known(&self, x: &str) -> Result<(), NormalError> {
        if self.accepting.contains(x) || self.nonaccepting.contains(x) {
            Ok(())
        } else {
            Err(NormalError::UndefinedIdent(x.to_string()))
        }
    }
}

/// Greatest subset of `nonaccepting` closed under "every identifier mentioned in the
/// body is in the set".
fn hereditary(nonaccepting: &BTreeSet<Arc<str>>, mentions: impl Fn(&str) -> BTreeSet<Arc<str>>) -> BTreeSet<Arc<str>> {
    let mut set = nonaccepting.clone();
    loop {
        let drop: Vec<Arc<str>> = set.iter().filter(|x| !mentions(x).is_subset(&set)).cloned().collect();
        if drop.is_empty() {
            return set;
        }
        for x in drop {
            set.remove(&x);
        }
    }
}

/// Classifies the identifiers of a guarded specification. With conditions, an
/// identifier accepts when every valuation satisfying its root signal accepts it.
pub fn classify(spec: &Spec) -> Result<IdentClass, NormalError> {
    require_guarded(spec)?;
    let engine = Engine::new(spec)?;
    let mut class = IdentClass::default();
    for x in spec.idents() {
        let id = ProcExpr::Ident(x.clone());
        let acc = match natural_kind(spec) {
            SemanticsKind::Plain => engine.accepts_plain(&id)?,
            SemanticsKind::Derived => engine.accepts_derived(&id)?,
        };
        if acc {
            class.accepting.insert(x.clone());
        } else {
            class.nonaccepting.insert(x.clone());
        }
    }
    class.hereditary = hereditary(&class.nonaccepting, |x| {
        spec.body(x).map(crate::core::free_idents).unwrap_or_default()
    });
    Ok(class)
}

fn last_nonaccepting(word: &[Arc<str>], class: &IdentClass) -> Result<Option<usize>, NormalError> {
    let mut last = None;
    for (i, x) in word.iter().enumerate() {
        class.known(x)?;
        if !class.is_accepting(x) {
            last = Some(i);
        }
    }
    Ok(last)
}

/// Membership in `P_INT* P_NT P_T* ∪ P_T*`.
pub fn is_acceptance_irredundant(word: &[Arc<str>], class: &IdentClass) -> Result<bool, NormalError> {
    Ok(match last_nonaccepting(word, class)? {
        None => true,
        Some(k) => word[..k].iter().all(|x| class.hereditary.contains(x)),
    })
}

/// Set of non-accepting identifiers marking where a word turns accepting.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SepSet(pub BTreeSet<Arc<str>>);

impl SepSet {
    pub fn contains(&self, x: &str) -> bool {
        self.0.contains(x)
    }
}

/// Membership in `(P_INT − P_sep)* P_sep P_T* ∪ P_T*`.
pub fn is_separated(word: &[Arc<str>], class: &IdentClass, sep: &SepSet) -> Result<bool, NormalError> {
    Ok(match last_nonaccepting(word, class)? {
        None => true,
        Some(k) => {
            sep.contains(&word[k])
                && word[..k].iter().all(|x| class.hereditary.contains(x) && !sep.contains(x))
        }
    })
}

// ----- GNF tables ------------------------------------------------------------------

/// One equation `(1 +) Σ a_i.α_i` of a condition-free GNF specification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GnfDef {
    pub accepts: bool,
    pub summands: Vec<(Action, Word)>,
}

/// A condition-free GNF specification as a table of definitions.
#[derive(Clone, Debug)]
pub struct GnfTable {
    pub defs: IndexMap<Arc<str>, GnfDef>,
}

impl GnfTable {
    pub fn from_spec(spec: &Spec) -> Result<GnfTable, NormalError> {
        let mut defs = IndexMap::new();
        for (x, body) in &spec.equations {
            let mut def = GnfDef { accepts: false, summands: Vec::new() };
            for o in operands(body) {
                match o {
                    ProcExpr::Accept => def.accepts = true,
                    ProcExpr::Deadlock => {}
                    ProcExpr::Prefix(a, w) => {
                        let w = word_of(w).ok_or_else(|| NormalError::NotGnf(x.to_string()))?;
                        def.summands.push((a.clone(), w));
                    }
                    _ => return Err(NormalError::NotGnf(x.to_string())),
                }
            }
            defs.insert(x.clone(), def);
        }
        Ok(GnfTable { defs })
    }

    pub fn def(&self, x: &str) -> Option<&GnfDef> {
        self.defs.get(x)
    }

    /// Classification read off the table: acceptance is the `1` summand.
    pub fn classify(&self) -> IdentClass {
        let mut class = IdentClass::default();
        for (x, d) in &self.defs {
            if d.accepts {
                class.accepting.insert(x.clone());
            } else {
                class.nonaccepting.insert(x.clone());
            }
        }
        class.hereditary = hereditary(&class.nonaccepting, |x| {
            self.defs.get(x).map(|d| d.summands.iter().flat_map(|(_, w)| w.iter().cloned()).collect()).unwrap_or_default()
        });
        class
    }
}

fn gnf_body(def: &GnfDef, mode: Mode) -> ProcExpr {
    let mut parts = Vec::new();
    if def.accepts {
        parts.push(ProcExpr::Accept);
    }
    for (a, w) in &def.summands {
        parts.push(ProcExpr::prefix(a.clone(), seq_word(w, mode)));
    }
    big_choice(parts)
}

/// Rebuilds `spec` with the given definitions; definitions listed in `keep` reuse the
/// original equation text.
fn rebuild(spec: &Spec, table: &GnfTable, keep: &BTreeSet<Arc<str>>) -> Result<Spec, NormalError> {
    let mut eqs = IndexMap::new();
    for (x, d) in &table.defs {
        let body = match spec.body(x) {
            Some(b) if keep.contains(x) => b.clone(),
            _ => gnf_body(d, spec.mode),
        };
        eqs.insert(x.clone(), body);
    }
    Ok(Spec::new(&spec.name, spec.mode, &spec.init, spec.vars.clone(), spec.alphabet.clone(), eqs)?)
}

// ----- to_gnf ------------------------------------------------------------------------

/// Splits a head-normal-form tail into its sequential factors.
fn factors(e: &ProcExpr, mode: Mode) -> Vec<ProcExpr> {
    match (e, mode) {
        (ProcExpr::Accept, _) => Vec::new(),
        (ProcExpr::Seqc(l, r), Mode::Seqc) | (ProcExpr::SeqLegacy(l, r), Mode::Seq) => {
            let mut v = factors(l, mode);
            v.extend(factors(r, mode));
            v
        }
        (ProcExpr::Signal(phi, body), _) => signal_factors(*phi, body, mode),
        _ => vec![e.clone()],
    }
}

/// Factors of `phi ^ body`; the signal stays attached to the first factor.
fn signal_factors(phi: crate::core::Prop, body: &ProcExpr, mode: Mode) -> Vec<ProcExpr> {
    if phi.is_true() {
        return factors(body, mode);
    }
    match (body, mode) {
        (ProcExpr::Seqc(l, r), Mode::Seqc) => {
            let mut v = signal_factors(phi, l, mode);
            v.extend(factors(r, mode));
            v
        }
        (ProcExpr::Signal(psi, inner), _) => signal_factors(phi.and(psi), inner, mode),
        _ => vec![ProcExpr::signal(phi, body.clone())],
    }
}

fn signal_gnf_body(h: &Hnf, words: &[Word], mode: Mode) -> ProcExpr {
    let plain_accept = h.root_signal.is_true() && h.acceptance.is_true();
    let mut parts = Vec::new();
    if plain_accept {
        parts.push(ProcExpr::Accept);
    }
    for (s, w) in h.summands.iter().zip(words) {
        let step = ProcExpr::prefix(s.action.clone(), seq_word(w, mode));
        parts.push(if s.guard.is_true() { step } else { ProcExpr::guard(s.guard, step) });
    }
    if !plain_accept {
        let signal_part = Hnf { summands: Vec::new(), root_signal: h.root_signal, acceptance: h.acceptance };
        let e = signal_part.to_expr();
        if e != ProcExpr::Deadlock {
            parts.push(e);
        }
    }
    big_choice(parts)
}

/// Greibach normal form. Each right-hand side becomes `(1 +) Σ a_i.α_i`, or
/// `Σ φ_i :-> a_i.α_i + ψ ^ (χ :-> 1)` when conditions are present; equations already
/// in that shape are kept verbatim.
pub fn to_gnf(spec: &Spec) -> Result<Spec, NormalError> {
    require_guarded(spec)?;
    let engine = Engine::new(spec)?;
    let mode = spec.mode;
    let mut eqs: IndexMap<Arc<str>, ProcExpr> = IndexMap::new();
    let mut names: HashMap<ProcExpr, Arc<str>> = HashMap::new();
    let mut taken: BTreeSet<String> = spec.idents().map(|x| x.to_string()).collect();
    let mut queue: VecDeque<(Arc<str>, ProcExpr)> = VecDeque::new();
    let mut counter = 0usize;
    for (x, body) in &spec.equations {
        if is_gnf_body(body, mode) {
            eqs.insert(x.clone(), body.clone());
        } else {
            eqs.insert(x.clone(), ProcExpr::Deadlock);
            queue.push_back((x.clone(), body.clone()));
        }
    }
    while let Some((x, term)) = queue.pop_front() {
        let (h, _) = hnf_in(&engine, &term)?;
        let mut words = Vec::new();
        for s in &h.summands {
            let mut word = Vec::new();
            for f in factors(&s.tail, mode) {
                let name = match &f {
                    ProcExpr::Ident(y) => y.clone(),
                    _ => match names.get(&f) {
                        Some(n) => n.clone(),
                        None => {
                            let n: Arc<str> = loop {
                                let candidate = format!("F{counter}");
                                counter += 1;
                                if taken.insert(candidate.clone()) {
                                    break Arc::from(candidate);
                                }
                            };
                            names.insert(f.clone(), n.clone());
                            eqs.insert(n.clone(), ProcExpr::Deadlock);
                            queue.push_back((n.clone(), f.clone()));
                            n
                        }
                    },
                };
                word.push(name);
            }
            words.push(word);
        }
        eqs.insert(x, signal_gnf_body(&h, &words, mode));
    }
    Ok(Spec::new(&spec.name, mode, &spec.init, spec.vars.clone(), spec.alphabet.clone(), eqs)?)
}

// ----- AIGNF -------------------------------------------------------------------------

/// Checks that every equation is in GNF with acceptance-irredundant words.
pub fn is_aignf(spec: &Spec) -> Result<bool, NormalError> {
    let Ok(table) = GnfTable::from_spec(spec) else {
        return Ok(false);
    };
    let class = table.classify();
    for d in table.defs.values() {
        for (_, w) in &d.summands {
            if !is_acceptance_irredundant(w, &class)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Acceptance Irredundant Greibach Normal Form.
///
/// Identifiers defined as exactly `1` are dropped from words and words are cut after
/// an identifier defined as exactly `0`. Accepting identifiers, and non-accepting ones
/// that can reach acceptance, are then replaced by `X#na` variants wherever a later
/// position is non-accepting. The result is checked against the input with the
/// bounded bisimulation oracle; a mismatch is reported as an error.
pub fn to_aignf(spec: &Spec) -> Result<Spec, NormalError> {
    require_plain_seqc(spec)?;
    let g = to_gnf(spec)?;
    let mut table = GnfTable::from_spec(&g)?;
    let mut changed: BTreeSet<Arc<str>> = BTreeSet::new();

    let ones: BTreeSet<Arc<str>> =
        table.defs.iter().filter(|(_, d)| d.accepts && d.summands.is_empty()).map(|(x, _)| x.clone()).collect();
    let zeros: BTreeSet<Arc<str>> =
        table.defs.iter().filter(|(_, d)| !d.accepts && d.summands.is_empty()).map(|(x, _)| x.clone()).collect();
    for (x, d) in table.defs.iter_mut() {
        for (_, w) in d.summands.iter_mut() {
            let mut out = Vec::new();
            for y in w.iter() {
                if ones.contains(y) {
                    continue;
                }
                out.push(y.clone());
                if zeros.contains(y) {
                    break;
                }
            }
            if out != *w {
                *w = out;
                changed.insert(x.clone());
            }
        }
    }

    let class = table.classify();
    let mut taken: BTreeSet<String> = table.defs.keys().map(|x| x.to_string()).collect();
    let mut variants: HashMap<Arc<str>, Arc<str>> = HashMap::new();
    let mut queue: VecDeque<Arc<str>> = VecDeque::new();
    let mut variant_of = |y: &Arc<str>, queue: &mut VecDeque<Arc<str>>| -> Arc<str> {
        if class.hereditary.contains(y) {
            return y.clone();
        }
        variants
            .entry(y.clone())
            .or_insert_with(|| {
                let mut name = format!("{y}#na");
                while !taken.insert(name.clone()) {
                    name.push('\'');
                }
                queue.push_back(y.clone());
                Arc::from(name)
            })
            .clone()
    };

    let originals: Vec<Arc<str>> = table.defs.keys().cloned().collect();
    let inlined = table.clone();
    for x in &originals {
        let d = table.defs.get_mut(x).expect("listed identifier");
        for (_, w) in d.summands.iter_mut() {
            if let Some(k) = last_nonaccepting(w, &class)? {
                let mut out = w.clone();
                for y in out[..k].iter_mut() {
                    *y = variant_of(y, &mut queue);
                }
                if out != *w {
                    *w = out;
                    changed.insert(x.clone());
                }
            }
        }
    }
    let mut stripped: Vec<(Arc<str>, GnfDef)> = Vec::new();
    while let Some(y) = queue.pop_front() {
        let base = inlined.defs[&y].clone();
        let summands = base
            .summands
            .iter()
            .map(|(a, w)| (a.clone(), w.iter().map(|z| variant_of(z, &mut queue)).collect()))
            .collect();
        stripped.push((y, GnfDef { accepts: false, summands }));
    }
    for (y, d) in stripped {
        let name = variant_name(&y, &table);
        table.defs.insert(name.clone(), d);
        changed.insert(name);
    }

    let keep: BTreeSet<Arc<str>> = table.defs.keys().filter(|x| !changed.contains(*x)).cloned().collect();
    let out = rebuild(&g, &table, &keep)?;
    if !is_aignf(&out)? {
        return Err(NormalError::ValidationFailed { ident: out.init.to_string(), reason: "output is not AIGNF".into() });
    }
    let out_class = GnfTable::from_spec(&out)?.classify();
    for x in spec.idents() {
        check_reachable_words(&out, x, 8, |w| is_acceptance_irredundant(w, &out_class))?;
    }
    validate_bisimilar(spec, &out, 6)?;
    Ok(out)
}

/// The `#na` name for `y`, primed until it is unused (mirrors the naming in `to_aignf`).
fn variant_name(y: &Arc<str>, table: &GnfTable) -> Arc<str> {
    let mut name = format!("{y}#na");
    while table.defs.contains_key(name.as_str()) {
        name.push('\'');
    }
    Arc::from(name)
}

/// Terms reachable from `root` within `depth` steps, with the transitions between them.
fn reachable(spec: &Spec, root: ProcExpr, depth: usize) -> Result<(Vec<ProcExpr>, Vec<(usize, usize)>), NormalError> {
    let engine = Engine::new(spec)?;
    let mut index: HashMap<ProcExpr, usize> = HashMap::new();
    let mut terms = vec![root.clone()];
    let mut edges = Vec::new();
    index.insert(root, 0);
    let mut layer = vec![0usize];
    for _ in 0..depth {
        let mut next = Vec::new();
        for s in layer {
            for (_, t) in engine.steps_plain(&terms[s].clone())? {
                let id = *index.entry(t.clone()).or_insert_with(|| {
                    terms.push(t);
                    next.push(terms.len() - 1);
                    terms.len() - 1
                });
                edges.push((s, id));
            }
            if terms.len() > 20_000 {
                return Ok((terms, edges));
            }
        }
        layer = next;
    }
    Ok((terms, edges))
}

/// Explores from `x` and applies `ok` to the word of every reached state.
fn check_reachable_words(
    spec: &Spec,
    x: &Arc<str>,
    depth: usize,
    mut ok: impl FnMut(&[Arc<str>]) -> Result<bool, NormalError>,
) -> Result<(), NormalError> {
    let (terms, _) = reachable(spec, ProcExpr::Ident(x.clone()), depth)?;
    for w in terms.iter().filter_map(word_of) {
        if !ok(&w)? {
            return Err(NormalError::ValidationFailed {
                ident: x.to_string(),
                reason: format!("reachable word {} violates the invariant", w.join(" ")),
            });
        }
    }
    Ok(())
}

/// Bounded bisimilarity of every identifier of `before` in both specifications.
pub(crate) fn validate_bisimilar(before: &Spec, after: &Spec, k: usize) -> Result<(), NormalError> {
    let kind = natural_kind(before);
    for x in before.idents() {
        let root = ProcExpr::Ident(x.clone());
        let l = explore_term(before, &root, Bounds::new(k + 1, 20_000), kind)?;
        let r = explore_term(after, &root, Bounds::new(k + 1, 20_000), kind)?;
        let depth = [l.min_frontier_depth(), r.min_frontier_depth()].into_iter().flatten().min().unwrap_or(k + 1);
        let k_eff = k.min(depth.saturating_sub(1));
        if let KBisimVerdict::Distinguished(w) = k_bisimilar(&l, &r, k_eff)? {
            return Err(NormalError::ValidationFailed { ident: x.to_string(), reason: w.to_string() });
        }
    }
    Ok(())
}

// ----- separation -----------------------------------------------------------------------

/// Makes the non-accepting identifiers separate non-acceptance from acceptance.
///
/// Every non-accepting identifier in a word except the last is replaced by its
/// `X#dag` variant, whose own words use variants at every non-accepting position.
/// Returns the new specification and the separating set (the original non-accepting
/// identifiers).
pub fn separate(spec: &Spec) -> Result<(Spec, SepSet), NormalError> {
    require_plain_seqc(spec)?;
    if !is_aignf(spec)? {
        return Err(NormalError::NotAignf(spec.name.clone()));
    }
    let mut table = GnfTable::from_spec(spec)?;
    let class = table.classify();
    let sep = SepSet(class.nonaccepting.clone());
    let mut taken: BTreeSet<String> = table.defs.keys().map(|x| x.to_string()).collect();
    let mut daggers: IndexMap<Arc<str>, Arc<str>> = IndexMap::new();
    let mut queue: VecDeque<Arc<str>> = VecDeque::new();
    let mut dagger = |y: &Arc<str>, queue: &mut VecDeque<Arc<str>>| -> Arc<str> {
        daggers
            .entry(y.clone())
            .or_insert_with(|| {
                let mut name = format!("{y}#dag");
                while !taken.insert(name.clone()) {
                    name.push('\'');
                }
                queue.push_back(y.clone());
                Arc::from(name)
            })
            .clone()
    };

    let mut changed: BTreeSet<Arc<str>> = BTreeSet::new();
    let originals: Vec<Arc<str>> = table.defs.keys().cloned().collect();
    for x in &originals {
        let d = table.defs.get_mut(x).expect("listed identifier");
        for (_, w) in d.summands.iter_mut() {
            if let Some(k) = last_nonaccepting(w, &class)? {
                let mut out = w.clone();
                for y in out[..k].iter_mut() {
                    if !class.is_accepting(y) {
                        *y = dagger(y, &mut queue);
                    }
                }
                if out != *w {
                    *w = out;
                    changed.insert(x.clone());
                }
            }
        }
    }
    let mut extra: Vec<(Arc<str>, GnfDef)> = Vec::new();
    let original_table = GnfTable::from_spec(spec)?;
    while let Some(y) = queue.pop_front() {
        let base = &original_table.defs[&y];
        let summands = base
            .summands
            .iter()
            .map(|(a, w)| {
                let w = w.iter().map(|z| if class.is_accepting(z) { z.clone() } else { dagger(z, &mut queue) }).collect();
                (a.clone(), w)
            })
            .collect();
        extra.push((y, GnfDef { accepts: base.accepts, summands }));
    }
    for (y, d) in extra {
        let name = daggers[&y].clone();
        table.defs.insert(name.clone(), d);
        changed.insert(name);
    }
    if changed.is_empty() {
        return Ok((spec.clone(), sep));
    }
    let keep: BTreeSet<Arc<str>> = table.defs.keys().filter(|x| !changed.contains(*x)).cloned().collect();
    let out = rebuild(spec, &table, &keep)?;
    Ok((out, sep))
}

/// Checks the separation invariant on every transition explored from `x`: whenever
/// the source word is separated, so is the target word.
pub fn check_separation_along(spec: &Spec, sep: &SepSet, x: &str, depth: usize) -> Result<bool, NormalError> {
    let class = GnfTable::from_spec(spec)?.classify();
    let (terms, edges) = reachable(spec, ProcExpr::ident(x), depth)?;
    let words: Vec<Option<Word>> = terms.iter().map(word_of).collect();
    for (s, t) in edges {
        if let (Some(a), Some(b)) = (&words[s], &words[t]) {
            if is_separated(a, &class, sep)? && !is_separated(b, &class, sep)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
