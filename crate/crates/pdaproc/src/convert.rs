//! Constructions between pushdown automata and recursive specifications.
//!
//! * [`onestate_pda_to_spec`]: a one-state automaton as a plain guarded specification.
//! * [`spec_to_pda`]: a plain guarded specification as a two-state automaton.
//! * [`pda_to_signal_spec`]: any automaton as a specification with signals and conditions.
//! * [`signal_spec_to_pda`]: a specification with signals and conditions as an automaton.
//!
//! Stack identifiers are named `X` (initial), `X_<d>` for each datum `d` and `X_eps`
//! for the empty stack. Words push their leftmost symbol on top.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::core::{big_choice, seq_word, Action, CoreError, Mode, ProcExpr, Prop, Spec, Valuation};
use crate::normal::{separate, to_aignf, to_gnf, word_of, GnfTable, NormalError, Word};
use crate::pda::{Pda, PdaError, Transition};
use crate::semantics::{Engine, SemanticsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConvertError {
    #[error("expected a one-state automaton, found {0} states")]
    NotOneState(usize),
    #[error("specification uses signals or conditions; use the signal construction")]
    SignalsPresent,
    #[error("step of `{0}` does not lead to an identifier word")]
    NotGnf(String),
    #[error(transparent)]
    Normal(#[from] NormalError),
    #[error(transparent)]
    Pda(#[from] PdaError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// Names of the identifiers standing for the stack.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StackIdents {
    pub init: String,
    pub empty: String,
    pub per_datum: IndexMap<String, String>,
}

impl StackIdents {
    fn new(data: &[String]) -> StackIdents {
        let mut taken: BTreeSet<String> = BTreeSet::new();
        let mut fresh = |base: String| {
            let mut name = base;
            while !taken.insert(name.clone()) {
                name.push('\'');
            }
            name
        };
        let init = fresh("X".to_string());
        let per_datum = data.iter().map(|d| (d.clone(), fresh(format!("X_{d}")))).collect();
        let empty = fresh("X_eps".to_string());
        StackIdents { init, empty, per_datum }
    }

    /// The identifier word for pushing `xs`.
    pub fn word(&self, xs: &[String]) -> Vec<String> {
        xs.iter().map(|d| self.per_datum[d].clone()).collect()
    }
}

fn eqs_from(list: Vec<(String, ProcExpr)>) -> IndexMap<Arc<str>, ProcExpr> {
    list.into_iter().map(|(x, e)| (Arc::from(x), e)).collect()
}

/// A one-state automaton as a plain guarded specification.
pub fn onestate_pda_to_spec(pda: &Pda) -> Result<Spec, ConvertError> {
    if pda.states.len() != 1 {
        return Err(ConvertError::NotOneState(pda.states.len()));
    }
    let names = StackIdents::new(&pda.data);
    let fin = pda.is_final(&pda.init);
    let accept = |parts: &mut Vec<ProcExpr>| {
        if fin {
            parts.push(ProcExpr::Accept);
        }
    };
    let name = format!("{}_spec", pda.name);
    let empty_top: Vec<&Transition> = pda.transitions.iter().filter(|t| t.pop.is_none()).collect();
    if empty_top.is_empty() {
        let body = if fin { ProcExpr::Accept } else { ProcExpr::Deadlock };
        let eqs = eqs_from(vec![(names.init.clone(), body)]);
        return Ok(Spec::new(name, Mode::Seqc, &names.init, Vec::new(), pda.alphabet.clone(), eqs)?);
    }
    let mut eqs = Vec::new();
    let mut parts = Vec::new();
    accept(&mut parts);
    for t in &empty_top {
        let mut w = names.word(&t.push);
        w.push(names.init.clone());
        parts.push(ProcExpr::prefix(t.action.clone(), seq_word(&w, Mode::Seqc)));
    }
    eqs.push((names.init.clone(), big_choice(parts)));
    for (d, x) in &names.per_datum {
        let mut parts = Vec::new();
        accept(&mut parts);
        for t in pda.transitions.iter().filter(|t| t.pop.as_deref() == Some(d)) {
            parts.push(ProcExpr::prefix(t.action.clone(), seq_word(&names.word(&t.push), Mode::Seqc)));
        }
        eqs.push((x.clone(), big_choice(parts)));
    }
    Ok(Spec::new(name, Mode::Seqc, &names.init, Vec::new(), pda.alphabet.clone(), eqs_from(eqs))?)
}

// ----- plain specification to two-state automaton ----------------------------------

pub const STATE_NONACCEPTING: &str = "n";
pub const STATE_ACCEPTING: &str = "t";

/// A guarded plain specification as an automaton with at most two states.
///
/// The input is brought into separated AIGNF first; its identifiers become
/// the stack alphabet. When the initial identifier accepts and can also terminate
/// completely, the initial pushes end in a bottom marker `⊥` so that an emptied
/// stack in the accepting state does not restart the initial identifier.
pub fn spec_to_pda(spec: &Spec) -> Result<Pda, ConvertError> {
    if spec.has_conditions() {
        return Err(ConvertError::SignalsPresent);
    }
    let aignf = to_aignf(spec)?;
    let (sp, sep) = separate(&aignf)?;
    let table = GnfTable::from_spec(&sp)?;
    let class = table.classify();
    let state = |accepting: bool| if accepting { STATE_ACCEPTING } else { STATE_NONACCEPTING }.to_string();
    let accepting_word = |w: &Word| w.first().map(|y| class.is_accepting(y));
    let s = sp.init.clone();
    let s_accepts = class.is_accepting(&s);

    let vanishing = vanishing_idents(&table);
    let mut data: Vec<String> = table.defs.keys().map(|x| x.to_string()).collect();
    let bottom = if s_accepts && vanishing.contains(&s) {
        let mut b = "⊥".to_string();
        while data.contains(&b) {
            b.push('\'');
        }
        data.push(b.clone());
        Some(b)
    } else {
        None
    };

    let mut transitions = Vec::new();
    for (x, def) in &table.defs {
        let src = state(class.is_accepting(x));
        for (a, w) in &def.summands {
            let dst = match accepting_word(w) {
                Some(acc) => acc,
                None => class.is_accepting(x) || sep.contains(x),
            };
            transitions.push(Transition {
                src: src.clone(),
                action: a.clone(),
                pop: Some(x.to_string()),
                push: w.iter().map(|y| y.to_string()).collect(),
                dst: state(dst),
            });
        }
    }
    for (a, w) in &table.defs[&s].summands {
        let mut push: Vec<String> = w.iter().map(|y| y.to_string()).collect();
        push.extend(bottom.iter().cloned());
        transitions.push(Transition {
            src: state(s_accepts),
            action: a.clone(),
            pop: None,
            push,
            dst: state(accepting_word(w).unwrap_or(true)),
        });
    }
    let states = vec![STATE_NONACCEPTING.to_string(), STATE_ACCEPTING.to_string()];
    let finals = [STATE_ACCEPTING.to_string()].into_iter().collect();
    Ok(Pda::new(format!("{}_pda", spec.name), states, sp.alphabet.clone(), data, transitions, state(s_accepts), finals)?)
}

/// Identifiers that can reach the empty word: least fixpoint over summand words.
fn vanishing_idents(table: &GnfTable) -> BTreeSet<Arc<str>> {
    let mut set: BTreeSet<Arc<str>> = BTreeSet::new();
    loop {
        let grown: Vec<Arc<str>> = table
            .defs
            .iter()
            .filter(|(x, d)| !set.contains(*x) && d.summands.iter().any(|(_, w)| w.iter().all(|y| set.contains(y))))
            .map(|(x, _)| x.clone())
            .collect();
        if grown.is_empty() {
            return set;
        }
        set.extend(grown);
    }
}

// ----- automaton to signal specification -----------------------------------------------

/// Name of the propositional variable recording control state `s`.
pub fn state_var(s: &str) -> String {
    format!("state_{s}")
}

/// Any automaton as a guarded specification with signals and conditions.
pub fn pda_to_signal_spec(pda: &Pda) -> Result<Spec, ConvertError> {
    let names = StackIdents::new(&pda.data);
    let mut vars: Vec<String> = pda.states.iter().map(|s| state_var(s)).collect();
    // A datum without any transition would let control fall through to the stack
    // below it whenever its state is final. Such data get a `blocked :-> tau.0`
    // summand: it fires under the all-true valuation, so the datum is never stuck
    // there, yet it is no derived step because `blocked` may also be false.
    let inert: BTreeSet<&String> =
        pda.data.iter().filter(|d| !pda.transitions.iter().any(|t| t.pop.as_ref() == Some(*d))).collect();
    let blocked_var = (!inert.is_empty()).then(|| {
        let mut b = "blocked".to_string();
        while vars.contains(&b) {
            b.push('\'');
        }
        vars.push(b);
        vars.len() - 1
    });
    let n = vars.len();
    let idx = |s: &str| pda.states.iter().position(|x| x == s).expect("validated state");
    let holds = |s: &str| Prop::var(n, idx(s));
    let name = format!("{}_spec", pda.name);
    let init_final = pda.is_final(&pda.init);
    let from_init: Vec<&Transition> =
        pda.transitions.iter().filter(|t| t.pop.is_none() && t.src == pda.init).collect();
    if from_init.is_empty() {
        let body = if init_final { ProcExpr::Accept } else { ProcExpr::Deadlock };
        let eqs = eqs_from(vec![(names.init.clone(), body)]);
        return Ok(Spec::new(name, Mode::Seqc, &names.init, vars, pda.alphabet.clone(), eqs)?);
    }

    let tail = |t: &Transition, then_empty: bool| {
        let mut w = names.word(&t.push);
        if then_empty {
            w.push(names.empty.clone());
        }
        ProcExpr::signal(holds(&t.dst), seq_word(&w, Mode::Seqc))
    };
    let final_summands = || {
        pda.states
            .iter()
            .filter(|s| pda.is_final(s))
            .map(|s| ProcExpr::guard(holds(s), ProcExpr::Accept))
            .collect::<Vec<_>>()
    };

    let mut eqs = Vec::new();
    let mut parts = Vec::new();
    if init_final {
        parts.push(ProcExpr::Accept);
    }
    for t in &from_init {
        parts.push(ProcExpr::prefix(t.action.clone(), tail(t, true)));
    }
    eqs.push((names.init.clone(), big_choice(parts)));

    for (d, x) in &names.per_datum {
        let mut parts: Vec<ProcExpr> = pda
            .transitions
            .iter()
            .filter(|t| t.pop.as_deref() == Some(d))
            .map(|t| ProcExpr::guard(holds(&t.src), ProcExpr::prefix(t.action.clone(), tail(t, false))))
            .collect();
        if let (true, Some(b)) = (inert.contains(d), blocked_var) {
            parts.push(ProcExpr::guard(Prop::var(n, b), ProcExpr::prefix(Action::Tau, ProcExpr::Deadlock)));
        }
        parts.extend(final_summands());
        eqs.push((x.clone(), big_choice(parts)));
    }
    let mut parts: Vec<ProcExpr> = pda
        .transitions
        .iter()
        .filter(|t| t.pop.is_none())
        .map(|t| ProcExpr::guard(holds(&t.src), ProcExpr::prefix(t.action.clone(), tail(t, true))))
        .collect();
    parts.extend(final_summands());
    eqs.push((names.empty.clone(), big_choice(parts)));
    Ok(Spec::new(name, Mode::Seqc, &names.init, vars, pda.alphabet.clone(), eqs_from(eqs))?)
}

// ----- signal specification to automaton -------------------------------------------------
//
// Once the input is in GNF every reachable term is an identifier word.
// Words are kept on the stack with two kinds of annotation per cell:
//
// * the consistency/acceptance summary of the part of the word below the cell, and
// * the combined effect of the run of "transparent" identifiers directly below it.
//
// A transparent identifier is consistent, accepting and stuck under the all-true
// valuation, so in reachable words it only constrains which valuations reach the
// identifier after it. Such identifiers never become stack cells; their effect is
// carried in the control state as the set of valuations that pass through them.

/// Consistency and acceptance of a word, as sets of valuations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Summary {
    cons: Prop,
    acc: Prop,
}

/// Effect of a run of transparent identifiers on the valuations passing through it:
/// control reaches the rest when the incoming set lies inside `pass`, and the set
/// is then narrowed by `keep`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Pending {
    keep: Prop,
    pass: Prop,
}

impl Pending {
    fn identity(n: usize) -> Pending {
        Pending { keep: Prop::truth(n), pass: Prop::truth(n) }
    }

    /// `self` on top, then `below`.
    fn then(&self, below: &Pending) -> Pending {
        Pending { keep: self.keep.and(&below.keep), pass: self.pass.and(&self.keep.not().or(&below.pass)) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Cell {
    ident: Arc<str>,
    below: Summary,
    pending: Pending,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Control {
    Init,
    Ctx(Prop, bool),
    Stuck(bool),
}

struct IdentInfo {
    /// Root signal: valuations under which the identifier is consistent.
    signal: Prop,
    /// Valuations under which it is consistent and accepting.
    accept: Prop,
    /// Valuations under which it has a step.
    enabled: Prop,
    groups: Vec<(Action, Word, Prop)>,
    transparent: bool,
}

struct Annotated {
    n: usize,
    info: HashMap<Arc<str>, IdentInfo>,
}

impl Annotated {
    fn new(spec: &Spec) -> Result<Annotated, ConvertError> {
        let engine = Engine::new(spec)?;
        let n = spec.nvars();
        let vt = Valuation::all_true(n);
        let mut info = HashMap::new();
        for y in spec.idents() {
            let id = ProcExpr::Ident(y.clone());
            let mut signal = Vec::new();
            let mut accept = Vec::new();
            let mut enabled = Vec::new();
            let mut groups: IndexMap<(Action, Word), Vec<bool>> = IndexMap::new();
            let rows = Valuation::all(n).count();
            for v in Valuation::all(n) {
                let cons = engine.cons(&id, v)?;
                signal.push(cons);
                accept.push(cons && engine.accepts_val(&id, v)?);
                let steps = if cons { engine.steps_val(&id, v)? } else { Vec::new() };
                enabled.push(!steps.is_empty());
                for (a, t, _) in steps {
                    let w = word_of(&t).ok_or_else(|| ConvertError::NotGnf(y.to_string()))?;
                    groups.entry((a, w)).or_insert_with(|| vec![false; rows])[v.row()] = true;
                }
            }
            let to_prop = |bits: &[bool]| Prop::from_fn(n, |v| bits[v.row()]);
            let item = IdentInfo {
                signal: to_prop(&signal),
                accept: to_prop(&accept),
                enabled: to_prop(&enabled),
                groups: groups.into_iter().map(|((a, w), bits)| (a, w, to_prop(&bits))).collect(),
                transparent: accept[vt.row()] && !enabled[vt.row()],
            };
            info.insert(y.clone(), item);
        }
        Ok(Annotated { n, info })
    }

    fn empty(&self) -> Summary {
        Summary { cons: Prop::truth(self.n), acc: Prop::truth(self.n) }
    }

    fn push(&self, y: &str, below: &Summary) -> Summary {
        let i = &self.info[y];
        Summary { cons: i.signal.and(&i.accept.not().or(&below.cons)), acc: i.accept.and(&below.acc) }
    }

    fn transparent_effect(&self, y: &str, below: &Summary) -> Pending {
        let i = &self.info[y];
        let inconsistent = self.push(y, below).cons.not();
        Pending { keep: i.accept, pass: inconsistent.or(&i.accept.and(&i.enabled.not())) }
    }

    fn derived_accepts(&self, s: &Summary) -> bool {
        s.cons.implies(&s.acc)
    }

    /// Places `word` on top of the part described by `below`/`pending`, returning the
    /// new cells (top first) and the resulting control state.
    fn place(&self, word: &[Arc<str>], mut below: Summary, mut pending: Pending) -> (Vec<Cell>, Control) {
        let mut cells = Vec::new();
        for y in word.iter().rev() {
            if self.info[y].transparent {
                pending = self.transparent_effect(y, &below).then(&pending);
            } else {
                cells.push(Cell { ident: y.clone(), below, pending });
                pending = Pending::identity(self.n);
            }
            below = self.push(y, &below);
        }
        cells.reverse();
        let acc = self.derived_accepts(&below);
        let truth = Prop::truth(self.n);
        let control =
            if truth.implies(&pending.pass) { Control::Ctx(pending.keep, acc) } else { Control::Stuck(acc) };
        (cells, control)
    }

    fn steps(&self, context: &Prop, cell: &Cell) -> Vec<(Action, Vec<Cell>, Control)> {
        let i = &self.info[&cell.ident];
        let reach = context.and(&i.signal).and(&i.accept.not().or(&cell.below.cons));
        let passes = reach.and(&i.accept).and(&i.enabled.not());
        if passes.is_satisfiable() {
            return Vec::new();
        }
        let vt = Valuation::all_true(self.n);
        let mut out = Vec::new();
        for (a, w, guard) in &i.groups {
            if !reach.implies(guard) {
                continue;
            }
            let target_cons = w.iter().rev().fold(cell.below, |s, y| self.push(y, &s));
            if !target_cons.cons.holds(vt) {
                continue;
            }
            let (cells, control) = self.place(w, cell.below, cell.pending);
            out.push((a.clone(), cells, control));
        }
        out
    }
}

/// A guarded specification with signals and conditions as a pushdown automaton, for
/// the derived (valuation-free) semantics under the reset effect.
pub fn signal_spec_to_pda(spec: &Spec) -> Result<Pda, ConvertError> {
    let g = to_gnf(spec)?;
    let ann = Annotated::new(&g)?;
    let n = ann.n;
    let init_cell = Cell { ident: g.init.clone(), below: ann.empty(), pending: Pending::identity(n) };
    let init_accepts = ann.derived_accepts(&ann.push(&g.init, &ann.empty()));

    let mut controls: IndexSet<Control> = IndexSet::new();
    controls.insert(Control::Init);
    let mut cells: IndexSet<Cell> = IndexSet::new();
    let mut raw: Vec<(usize, Action, Option<usize>, Vec<usize>, usize)> = Vec::new();

    let mut record = |src: usize,
                      pop: Option<usize>,
                      steps: Vec<(Action, Vec<Cell>, Control)>,
                      controls: &mut IndexSet<Control>,
                      cells: &mut IndexSet<Cell>| {
        for (a, push, dst) in steps {
            let push = push.into_iter().map(|c| cells.insert_full(c).0).collect();
            let dst = controls.insert_full(dst).0;
            raw.push((src, a, pop, push, dst));
        }
    };
    let first = ann.steps(&Prop::truth(n), &init_cell);
    record(0, None, first, &mut controls, &mut cells);

    let mut done: BTreeSet<(usize, usize)> = BTreeSet::new();
    loop {
        let mut todo = Vec::new();
        for (ci, c) in controls.iter().enumerate() {
            let Control::Ctx(context, _) = c else { continue };
            for di in 0..cells.len() {
                if !done.contains(&(ci, di)) {
                    todo.push((ci, di, *context));
                }
            }
        }
        if todo.is_empty() {
            break;
        }
        for (ci, di, context) in todo {
            done.insert((ci, di));
            let steps = ann.steps(&context, &cells[di]);
            record(ci, Some(di), steps, &mut controls, &mut cells);
        }
    }

    let state_names: Vec<String> = (0..controls.len()).map(|i| format!("q{i}")).collect();
    let mut taken: BTreeSet<String> = BTreeSet::new();
    let mut counters: HashMap<Arc<str>, usize> = HashMap::new();
    let trivial_below = ann.empty();
    let datum_names: Vec<String> = cells
        .iter()
        .map(|c| {
            let plain = c.below == trivial_below && c.pending == Pending::identity(n);
            if plain && taken.insert(c.ident.to_string()) {
                return c.ident.to_string();
            }
            loop {
                let k = counters.entry(c.ident.clone()).or_insert(0);
                *k += 1;
                let name = format!("{}'{}", c.ident, k);
                if taken.insert(name.clone()) {
                    return name;
                }
            }
        })
        .collect();
    let transitions = raw
        .into_iter()
        .map(|(src, action, pop, push, dst)| Transition {
            src: state_names[src].clone(),
            action,
            pop: pop.map(|d| datum_names[d].clone()),
            push: push.into_iter().map(|d| datum_names[d].clone()).collect(),
            dst: state_names[dst].clone(),
        })
        .collect();
    let finals = controls
        .iter()
        .enumerate()
        .filter(|(_, c)| match c {
            Control::Init => init_accepts,
            Control::Ctx(_, acc) | Control::Stuck(acc) => *acc,
        })
        .map(|(i, _)| state_names[i].clone())
        .collect();
    Ok(Pda::new(
        format!("{}_pda", spec.name),
        state_names.clone(),
        g.alphabet.clone(),
        datum_names,
        transitions,
        state_names[0].clone(),
        finals,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_pda, parse_spec};

    #[test]
    fn transitionless_automata_give_trivial_specs() {
        let p = parse_pda("pda P { states s; init s; final s; }").unwrap();
        let s = onestate_pda_to_spec(&p).unwrap();
        assert_eq!(s.equations.len(), 1);
        assert_eq!(s.body("X"), Some(&ProcExpr::Accept));
        let s = pda_to_signal_spec(&p).unwrap();
        assert_eq!(s.body("X"), Some(&ProcExpr::Accept));
    }

    #[test]
    fn accepting_spec_gives_trivial_automaton() {
        let s = parse_spec("spec T { X = 1 }").unwrap();
        let p = spec_to_pda(&s).unwrap();
        assert!(p.transitions.is_empty());
        assert!(p.is_final(&p.init));
        let p = signal_spec_to_pda(&s).unwrap();
        assert!(p.transitions.is_empty());
        assert!(p.is_final(&p.init));
    }

    #[test]
    fn several_states_are_rejected_by_onestate() {
        let p = parse_pda("pda P { states s, u; init s; }").unwrap();
        assert_eq!(onestate_pda_to_spec(&p), Err(ConvertError::NotOneState(2)));
    }
}
