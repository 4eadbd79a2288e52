//! Equational engine: axiom rules, head normal forms, reduction, depth, and the
//! decision procedure for recursion-free terms.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::bisim::{stateless_bisimilar, BisimError, Side};
use crate::core::{big_choice, Action, Mode, ProcExpr, Prop, Spec, Valuation};
use crate::gen::{closed_context, TermGen};
use crate::parser::{print_expr, print_prop};
use crate::semantics::{Engine, SemanticsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("axiom {axiom} is not valid in {mode} mode")]
    InvalidForMode { axiom: AxiomId, mode: Mode },
    #[error("root signal is unsatisfiable")]
    UnsatisfiableRootSignal,
    #[error("term contains process identifiers; only recursion-free terms are supported")]
    RecursionPresent,
    #[error("unknown axiom `{0}`")]
    UnknownAxiom(String),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Bisim(#[from] BisimError),
}

// ----- axioms ----------------------------------------------------------------

macro_rules! axioms {
    ($($id:ident),* $(,)?) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum AxiomId { $($id),* }

        impl AxiomId {
            pub const ALL: &'static [AxiomId] = &[$(AxiomId::$id),*];

            pub fn name(self) -> &'static str {
                match self { $(AxiomId::$id => stringify!($id)),* }
            }
        }
    };
}

axioms!(
    A1, A2, A3, A4, A5, A6, A7, A8, A9, A10, A11, A12, A13, NA1, NA2, NA3, NA4, C1, C2, C3, C4, C5, C6, C7, C8,
    SI1, SI2, SI3, SI4, SI5, SI6, SI7, SI8, SI9, R,
);

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AxiomId {
    type Err = RewriteError;

    fn from_str(s: &str) -> Result<AxiomId, RewriteError> {
        AxiomId::ALL
            .iter()
            .copied()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| RewriteError::UnknownAxiom(s.to_string()))
    }
}

/// The group an axiom belongs to; it fixes the fragment its variables range over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxiomGroup {
    /// Choice, sequential composition, deadlock and acceptance.
    Core,
    /// Non-acceptance and weak distributivity.
    NonAcceptance,
    Conditions,
    Signals,
    Reset,
}

impl AxiomId {
    pub fn group(self) -> AxiomGroup {
        use AxiomId::*;
        match self {
            A1 | A2 | A3 | A4 | A5 | A6 | A7 | A8 | A9 | A10 => AxiomGroup::Core,
            A11 | A12 | A13 | NA1 | NA2 | NA3 | NA4 => AxiomGroup::NonAcceptance,
            C1 | C2 | C3 | C4 | C5 | C6 | C7 | C8 => AxiomGroup::Conditions,
            SI1 | SI2 | SI3 | SI4 | SI5 | SI6 | SI7 | SI8 | SI9 => AxiomGroup::Signals,
            R => AxiomGroup::Reset,
        }
    }

    /// Whether the axiom belongs to the theory of the given composition mode.
    pub fn valid_in(self, mode: Mode) -> bool {
        match (self, mode) {
            (AxiomId::A4, Mode::Seqc) => false,
            (_, Mode::Seqc) => true,
            (_, Mode::Seq) => self.group() == AxiomGroup::Core,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TermVar {
    X,
    Y,
    Z,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PropPat {
    Phi,
    Psi,
    True,
    False,
    Not(Box<PropPat>),
    And(Box<PropPat>, Box<PropPat>),
    Or(Box<PropPat>, Box<PropPat>),
    /// Binds `Phi` to a proposition that is false under the all-true valuation.
    ResetFalse,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pat {
    Var(TermVar),
    Zero,
    One,
    /// Prefix by the action metavariable.
    Prefix(Box<Pat>),
    Choice(Box<Pat>, Box<Pat>),
    /// Sequential node; the operator is fixed by the owning rule.
    Seq(Box<Pat>, Box<Pat>),
    Na(Box<Pat>),
    Guard(PropPat, Box<Pat>),
    Signal(PropPat, Box<Pat>),
}

/// An oriented axiom instance scheme.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub id: AxiomId,
    /// Operator that `Pat::Seq` denotes.
    pub op: Mode,
    pub lhs: Pat,
    pub rhs: Pat,
}

mod build {
    use super::{Pat, PropPat, TermVar};

    pub fn x() -> Pat {
        Pat::Var(TermVar::X)
    }
    pub fn y() -> Pat {
        Pat::Var(TermVar::Y)
    }
    pub fn z() -> Pat {
        Pat::Var(TermVar::Z)
    }
    pub fn alt(l: Pat, r: Pat) -> Pat {
        Pat::Choice(Box::new(l), Box::new(r))
    }
    pub fn seq(l: Pat, r: Pat) -> Pat {
        Pat::Seq(Box::new(l), Box::new(r))
    }
    pub fn pre(p: Pat) -> Pat {
        Pat::Prefix(Box::new(p))
    }
    pub fn na(p: Pat) -> Pat {
        Pat::Na(Box::new(p))
    }
    pub fn gd(c: PropPat, p: Pat) -> Pat {
        Pat::Guard(c, Box::new(p))
    }
    pub fn sg(c: PropPat, p: Pat) -> Pat {
        Pat::Signal(c, Box::new(p))
    }
    pub fn phi() -> PropPat {
        PropPat::Phi
    }
    pub fn psi() -> PropPat {
        PropPat::Psi
    }
    pub fn or(l: PropPat, r: PropPat) -> PropPat {
        PropPat::Or(Box::new(l), Box::new(r))
    }
    pub fn and(l: PropPat, r: PropPat) -> PropPat {
        PropPat::And(Box::new(l), Box::new(r))
    }
    pub fn not(p: PropPat) -> PropPat {
        PropPat::Not(Box::new(p))
    }
}

fn scheme(id: AxiomId) -> (Pat, Pat) {
    use build::*;
    use AxiomId::*;
    use Pat::{One, Zero};
    match id {
        A1 => (alt(x(), y()), alt(y(), x())),
        A2 => (alt(x(), alt(y(), z())), alt(alt(x(), y()), z())),
        A3 => (alt(x(), x()), x()),
        A4 => (seq(alt(x(), y()), z()), alt(seq(x(), z()), seq(y(), z()))),
        A5 => (seq(seq(x(), y()), z()), seq(x(), seq(y(), z()))),
        A6 => (alt(x(), Zero), x()),
        A7 => (seq(Zero, x()), Zero),
        A8 => (seq(x(), One), x()),
        A9 => (seq(One, x()), x()),
        A10 => (seq(pre(x()), y()), pre(seq(x(), y()))),
        NA1 => (na(Zero), Zero),
        NA2 => (na(One), Zero),
        NA3 => (na(pre(x())), pre(x())),
        NA4 => (na(alt(x(), y())), alt(na(x()), na(y()))),
        A11 => (seq(na(alt(x(), y())), z()), alt(seq(na(x()), z()), seq(na(y()), z()))),
        A12 => (seq(alt(alt(pre(x()), y()), One), na(z())), seq(alt(pre(x()), y()), na(z()))),
        A13 => (
            seq(alt(alt(pre(x()), y()), One), alt(z(), One)),
            alt(seq(alt(pre(x()), y()), alt(z(), One)), One),
        ),
        C1 => (gd(PropPat::True, x()), x()),
        C2 => (gd(PropPat::False, x()), Zero),
        C3 => (gd(or(phi(), psi()), x()), alt(gd(phi(), x()), gd(psi(), x()))),
        C4 => (gd(and(phi(), psi()), x()), gd(phi(), gd(psi(), x()))),
        C5 => (gd(phi(), alt(x(), y())), alt(gd(phi(), x()), gd(phi(), y()))),
        C6 => (gd(phi(), seq(x(), y())), seq(gd(phi(), x()), y())),
        C7 => (gd(phi(), na(x())), na(gd(phi(), x()))),
        C8 => (
            seq(alt(na(x()), gd(phi(), One)), alt(na(y()), gd(psi(), One))),
            alt(seq(na(x()), alt(na(y()), gd(psi(), One))), gd(and(phi(), psi()), One)),
        ),
        SI1 => (sg(PropPat::True, x()), x()),
        SI2 => (sg(PropPat::False, x()), sg(PropPat::False, Zero)),
        SI3 => (pre(sg(PropPat::False, x())), Zero),
        SI4 => (alt(sg(phi(), x()), y()), sg(phi(), alt(x(), y()))),
        SI5 => (sg(phi(), sg(psi(), x())), sg(and(phi(), psi()), x())),
        SI6 => (gd(phi(), sg(psi(), x())), sg(or(not(phi()), psi()), gd(phi(), x()))),
        SI7 => (sg(phi(), gd(phi(), x())), sg(phi(), x())),
        SI8 => (sg(phi(), seq(x(), y())), seq(sg(phi(), x()), y())),
        SI9 => (sg(phi(), na(x())), na(sg(phi(), x()))),
        R => (pre(sg(PropPat::ResetFalse, x())), Zero),
    }
}

/// The rule for `id` in the theory of `mode`; `Pat::Seq` denotes that mode's operator.
pub fn axiom_rule(id: AxiomId, mode: Mode) -> Result<Rule, RewriteError> {
    if !id.valid_in(mode) {
        return Err(RewriteError::InvalidForMode { axiom: id, mode });
    }
    Ok(for_sequencing(id, mode))
}

/// The rule for `id` with sequential nodes read as `op`, regardless of validity.
pub fn for_sequencing(id: AxiomId, op: Mode) -> Rule {
    let (lhs, rhs) = scheme(id);
    Rule { id, op, lhs, rhs }
}

/// Every rule valid in `mode`.
pub fn axiom_instances(mode: Mode) -> Vec<Rule> {
    AxiomId::ALL.iter().filter(|a| a.valid_in(mode)).map(|a| for_sequencing(*a, mode)).collect()
}

fn show_prop_pat(p: &PropPat) -> String {
    match p {
        PropPat::Phi => "phi".into(),
        PropPat::Psi => "psi".into(),
        PropPat::True => "true".into(),
        PropPat::False => "false".into(),
        PropPat::Not(q) => format!("!{}", show_prop_pat(q)),
        PropPat::And(l, r) => format!("({} & {})", show_prop_pat(l), show_prop_pat(r)),
        PropPat::Or(l, r) => format!("({} | {})", show_prop_pat(l), show_prop_pat(r)),
        PropPat::ResetFalse => "(!P1 | ... | !Pk)".into(),
    }
}

fn show_pat(p: &Pat, op: Mode, ctx: u8) -> String {
    let (s, level) = match p {
        Pat::Var(TermVar::X) => ("x".to_string(), 3),
        Pat::Var(TermVar::Y) => ("y".to_string(), 3),
        Pat::Var(TermVar::Z) => ("z".to_string(), 3),
        Pat::Zero => ("0".into(), 3),
        Pat::One => ("1".into(), 3),
        Pat::Prefix(b) => (format!("a.{}", show_pat(b, op, 3)), 3),
        Pat::Na(b) => (format!("NA({})", show_pat(b, op, 0)), 3),
        Pat::Choice(l, r) => (format!("{} + {}", show_pat(l, op, 0), show_pat(r, op, 1)), 0),
        Pat::Seq(l, r) => {
            let o = if op == Mode::Seqc { ";" } else { "·" };
            (format!("{}{o}{}", show_pat(l, op, 2), show_pat(r, op, 3)), 2)
        }
        Pat::Guard(c, b) => (format!("[{}] -> {}", show_prop_pat(c), show_pat(b, op, 1)), 1),
        Pat::Signal(c, b) => (format!("[{}]^^ {}", show_prop_pat(c), show_pat(b, op, 1)), 1),
    };
    if level < ctx {
        format!("({s})")
    } else {
        s
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<4} {} = {}", self.id.name(), show_pat(&self.lhs, self.op, 0), show_pat(&self.rhs, self.op, 0))
    }
}

// ----- matching and instantiation ----------------------------------------------

/// Values for the metavariables of a rule.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Binding {
    pub terms: [Option<ProcExpr>; 3],
    pub action: Option<Action>,
    pub props: [Option<Prop>; 2],
}

fn var_slot(v: TermVar) -> usize {
    match v {
        TermVar::X => 0,
        TermVar::Y => 1,
        TermVar::Z => 2,
    }
}

impl Binding {
    fn prop_slot(&mut self, p: &PropPat) -> Option<&mut Option<Prop>> {
        match p {
            PropPat::Phi | PropPat::ResetFalse => Some(&mut self.props[0]),
            PropPat::Psi => Some(&mut self.props[1]),
            _ => None,
        }
    }

    fn eval_prop(&self, p: &PropPat, nvars: usize) -> Option<Prop> {
        Some(match p {
            PropPat::Phi | PropPat::ResetFalse => self.props[0]?,
            PropPat::Psi => self.props[1]?,
            PropPat::True => Prop::truth(nvars),
            PropPat::False => Prop::falsity(nvars),
            PropPat::Not(q) => self.eval_prop(q, nvars)?.not(),
            PropPat::And(l, r) => self.eval_prop(l, nvars)?.and(&self.eval_prop(r, nvars)?),
            PropPat::Or(l, r) => self.eval_prop(l, nvars)?.or(&self.eval_prop(r, nvars)?),
        })
    }
}

fn seq_matches(op: Mode, e: &ProcExpr) -> Option<(&ProcExpr, &ProcExpr)> {
    match (op, e) {
        (Mode::Seqc, ProcExpr::Seqc(l, r)) | (Mode::Seq, ProcExpr::SeqLegacy(l, r)) => Some((l, r)),
        _ => None,
    }
}

fn match_prop(p: &PropPat, theta: Prop, b: &mut Binding, deferred: &mut Vec<(PropPat, Prop)>) -> bool {
    match p {
        PropPat::True => theta.is_true(),
        PropPat::False => theta.is_false(),
        PropPat::ResetFalse if theta.holds(Valuation::all_true(theta.nvars())) => false,
        PropPat::Phi | PropPat::Psi | PropPat::ResetFalse => {
            let slot = b.prop_slot(p).expect("simple variable");
            match slot {
                Some(bound) => *bound == theta,
                None => {
                    *slot = Some(theta);
                    true
                }
            }
        }
        _ => {
            deferred.push((p.clone(), theta));
            true
        }
    }
}

fn match_pat(pat: &Pat, op: Mode, e: &ProcExpr, b: &mut Binding, deferred: &mut Vec<(PropPat, Prop)>) -> bool {
    match (pat, e) {
        (Pat::Var(v), _) => {
            let slot = &mut b.terms[var_slot(*v)];
            match slot {
                Some(bound) => bound == e,
                None => {
                    *slot = Some(e.clone());
                    true
                }
            }
        }
        (Pat::Zero, ProcExpr::Deadlock) | (Pat::One, ProcExpr::Accept) => true,
        (Pat::Prefix(p), ProcExpr::Prefix(a, body)) => {
            match &b.action {
                Some(bound) if bound != a => return false,
                _ => b.action = Some(a.clone()),
            }
            match_pat(p, op, body, b, deferred)
        }
        (Pat::Choice(pl, pr), ProcExpr::Choice(l, r)) => {
            match_pat(pl, op, l, b, deferred) && match_pat(pr, op, r, b, deferred)
        }
        (Pat::Seq(pl, pr), _) => match seq_matches(op, e) {
            Some((l, r)) => match_pat(pl, op, l, b, deferred) && match_pat(pr, op, r, b, deferred),
            None => false,
        },
        (Pat::Na(p), ProcExpr::Na(body)) => match_pat(p, op, body, b, deferred),
        (Pat::Guard(c, p), ProcExpr::Guard(theta, body)) | (Pat::Signal(c, p), ProcExpr::Signal(theta, body)) => {
            match_prop(c, *theta, b, deferred) && match_pat(p, op, body, b, deferred)
        }
        _ => false,
    }
}

/// Resolves constraints `compound = theta` left over after structural matching.
///
/// A disjunction with one bound side requires the bound side to imply `theta`
/// and binds the other side to `theta`; a conjunction binds its free side to
/// `theta` once `theta` implies the bound side. Fully free sides both get `theta`.
fn solve_deferred(deferred: Vec<(PropPat, Prop)>, b: &mut Binding) -> bool {
    for (p, theta) in deferred {
        let n = theta.nvars();
        match &p {
            PropPat::Not(q) if b.eval_prop(q, n).is_none() => {
                if let Some(slot) = b.prop_slot(q) {
                    *slot = Some(theta.not());
                }
            }
            PropPat::Or(l, r) | PropPat::And(l, r) => {
                let is_or = matches!(p, PropPat::Or(..));
                let lv = b.eval_prop(l, n);
                let rv = b.eval_prop(r, n);
                let fits = |bound: &Prop| if is_or { bound.implies(&theta) } else { theta.implies(bound) };
                match (lv, rv) {
                    (Some(_), Some(_)) => {}
                    (Some(bound), None) => {
                        if !fits(&bound) {
                            return false;
                        }
                        if let Some(slot) = b.prop_slot(r) {
                            *slot = Some(theta);
                        }
                    }
                    (None, Some(bound)) => {
                        if !fits(&bound) {
                            return false;
                        }
                        if let Some(slot) = b.prop_slot(l) {
                            *slot = Some(theta);
                        }
                    }
                    (None, None) => {
                        for side in [l, r] {
                            if let Some(slot) = b.prop_slot(side) {
                                *slot = Some(theta);
                            }
                        }
                    }
                }
            }
            _ => {}
        }
        if b.eval_prop(&p, n) != Some(theta) {
            return false;
        }
    }
    true
}

/// Matches the rule's left-hand side against `e`.
pub fn match_rule(rule: &Rule, e: &ProcExpr) -> Option<Binding> {
    let mut b = Binding::default();
    let mut deferred = Vec::new();
    if match_pat(&rule.lhs, rule.op, e, &mut b, &mut deferred) && solve_deferred(deferred, &mut b) {
        Some(b)
    } else {
        None
    }
}

/// Builds the term denoted by `pat` under `b`; `None` if a metavariable is unbound.
pub fn instantiate(pat: &Pat, op: Mode, b: &Binding, nvars: usize) -> Option<ProcExpr> {
    Some(match pat {
        Pat::Var(v) => b.terms[var_slot(*v)].clone()?,
        Pat::Zero => ProcExpr::Deadlock,
        Pat::One => ProcExpr::Accept,
        Pat::Prefix(p) => ProcExpr::prefix(b.action.clone()?, instantiate(p, op, b, nvars)?),
        Pat::Choice(l, r) => ProcExpr::choice(instantiate(l, op, b, nvars)?, instantiate(r, op, b, nvars)?),
        Pat::Seq(l, r) => {
            let (l, r) = (instantiate(l, op, b, nvars)?, instantiate(r, op, b, nvars)?);
            match op {
                Mode::Seqc => ProcExpr::seqc(l, r),
                Mode::Seq => ProcExpr::seq_legacy(l, r),
            }
        }
        Pat::Na(p) => ProcExpr::na(instantiate(p, op, b, nvars)?),
        Pat::Guard(c, p) => ProcExpr::guard(b.eval_prop(c, nvars)?, instantiate(p, op, b, nvars)?),
        Pat::Signal(c, p) => ProcExpr::signal(b.eval_prop(c, nvars)?, instantiate(p, op, b, nvars)?),
    })
}

/// Rewrites `e` at its root with `rule`, if the left-hand side matches.
pub fn apply_at_root(rule: &Rule, e: &ProcExpr, nvars: usize) -> Option<ProcExpr> {
    let b = match_rule(rule, e)?;
    instantiate(&rule.rhs, rule.op, &b, nvars)
}

/// A path of child indices from the root of a term.
pub type Position = Vec<usize>;

fn children(e: &ProcExpr) -> Vec<&ProcExpr> {
    match e {
        ProcExpr::Deadlock | ProcExpr::Accept | ProcExpr::Ident(_) => vec![],
        ProcExpr::Prefix(_, p) | ProcExpr::Na(p) | ProcExpr::Guard(_, p) | ProcExpr::Signal(_, p) => vec![p],
        ProcExpr::Choice(l, r) | ProcExpr::Seqc(l, r) | ProcExpr::SeqLegacy(l, r) => vec![l, r],
    }
}

/// Every position in pre-order.
pub fn positions(e: &ProcExpr) -> Vec<Position> {
    let mut out = vec![vec![]];
    for (i, c) in children(e).into_iter().enumerate() {
        for mut p in positions(c) {
            p.insert(0, i);
            out.push(p);
        }
    }
    out
}

pub fn subterm_at<'a>(e: &'a ProcExpr, pos: &[usize]) -> Option<&'a ProcExpr> {
    match pos.split_first() {
        None => Some(e),
        Some((i, rest)) => subterm_at(children(e).get(*i)?, rest),
    }
}

pub fn replace_at(e: &ProcExpr, pos: &[usize], new: ProcExpr) -> ProcExpr {
    use std::sync::Arc;
    let Some((i, rest)) = pos.split_first() else {
        return new;
    };
    let sub = |c: &Arc<ProcExpr>| Arc::new(replace_at(c, rest, new.clone()));
    match (e, i) {
        (ProcExpr::Prefix(a, p), 0) => ProcExpr::Prefix(a.clone(), sub(p)),
        (ProcExpr::Na(p), 0) => ProcExpr::Na(sub(p)),
        (ProcExpr::Guard(c, p), 0) => ProcExpr::Guard(*c, sub(p)),
        (ProcExpr::Signal(c, p), 0) => ProcExpr::Signal(*c, sub(p)),
        (ProcExpr::Choice(l, r), 0) => ProcExpr::Choice(sub(l), r.clone()),
        (ProcExpr::Choice(l, r), 1) => ProcExpr::Choice(l.clone(), sub(r)),
        (ProcExpr::Seqc(l, r), 0) => ProcExpr::Seqc(sub(l), r.clone()),
        (ProcExpr::Seqc(l, r), 1) => ProcExpr::Seqc(l.clone(), sub(r)),
        (ProcExpr::SeqLegacy(l, r), 0) => ProcExpr::SeqLegacy(sub(l), r.clone()),
        (ProcExpr::SeqLegacy(l, r), 1) => ProcExpr::SeqLegacy(l.clone(), sub(r)),
        _ => e.clone(),
    }
}

/// All single-step rewrites of `e` by `rule`, with their positions.
pub fn rewrites(rule: &Rule, e: &ProcExpr, nvars: usize) -> Vec<(Position, ProcExpr)> {
    positions(e)
        .into_iter()
        .filter_map(|pos| {
            let sub = subterm_at(e, &pos)?;
            let new = apply_at_root(rule, sub, nvars)?;
            Some((pos.clone(), replace_at(e, &pos, new)))
        })
        .collect()
}

// ----- soundness suite ---------------------------------------------------------

/// Outcome of checking random instances of one axiom.
#[derive(Clone, Debug)]
pub struct SoundnessReport {
    pub id: AxiomId,
    pub op: Mode,
    pub instances: usize,
    /// Instances whose two sides are not stateless bisimilar, printed.
    pub failures: Vec<(String, String)>,
}

impl SoundnessReport {
    pub fn passed(&self) -> usize {
        self.instances - self.failures.len()
    }
}

/// The term generator for the fragment an axiom's variables range over.
fn fragment_gen(id: AxiomId, op: Mode, nvars: usize, depth: usize) -> TermGen {
    let mut g = TermGen::new(nvars, depth);
    g.seq = op;
    g.na = op == Mode::Seqc;
    match id.group() {
        AxiomGroup::Core | AxiomGroup::NonAcceptance => {
            g.guards = false;
            g.signals = false;
        }
        AxiomGroup::Conditions => g.signals = false,
        AxiomGroup::Signals | AxiomGroup::Reset => {}
    }
    g
}

/// A random closed instance (left side, right side) of `rule`.
pub fn random_instance(rule: &Rule, rng: &mut impl Rng, max_depth: usize) -> (Spec, ProcExpr, ProcExpr) {
    let nvars = match rule.id.group() {
        AxiomGroup::Core | AxiomGroup::NonAcceptance => 0,
        _ => rng.gen_range(1..=3),
    };
    let g = fragment_gen(rule.id, rule.op, nvars, max_depth);
    let mut b = Binding {
        terms: [Some(g.term(rng)), Some(g.term(rng)), Some(g.term(rng))],
        action: Some(Action::named(["a", "b", "c"][rng.gen_range(0..3)])),
        props: [Some(g.prop(rng)), Some(g.prop(rng))],
    };
    if rule.id == AxiomId::R {
        let mut sigma = Prop::falsity(nvars);
        while sigma.is_false() {
            for i in 0..nvars {
                if rng.gen_bool(0.5) {
                    sigma = sigma.or(&Prop::var(nvars, i).not());
                }
            }
        }
        b.props[0] = Some(sigma);
    }
    let lhs = instantiate(&rule.lhs, rule.op, &b, nvars).expect("all metavariables bound");
    let rhs = instantiate(&rule.rhs, rule.op, &b, nvars).expect("all metavariables bound");
    (closed_context(nvars, rule.op), lhs, rhs)
}

/// Checks `instances` random instances of `rule` with the stateless bisimulation oracle.
pub fn soundness(rule: &Rule, instances: usize, max_depth: usize, rng: &mut impl Rng) -> Result<SoundnessReport, RewriteError> {
    let mut failures = Vec::new();
    for _ in 0..instances {
        let (ctx, lhs, rhs) = random_instance(rule, rng, max_depth);
        if !stateless_bisimilar(&ctx, &lhs, &rhs)? {
            failures.push((print_expr(&lhs, &ctx.vars), print_expr(&rhs, &ctx.vars)));
        }
    }
    Ok(SoundnessReport { id: rule.id, op: rule.op, instances, failures })
}

// ----- head normal forms -------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Summand {
    pub guard: Prop,
    pub action: Action,
    pub tail: ProcExpr,
}

/// `Σ guard_i :-> a_i.tail_i + root_signal ^ (acceptance :-> 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hnf {
    pub summands: Vec<Summand>,
    pub root_signal: Prop,
    pub acceptance: Prop,
}

impl Hnf {
    fn constant(nvars: usize, accept: bool) -> Hnf {
        Hnf { summands: vec![], root_signal: Prop::truth(nvars), acceptance: Prop::constant(nvars, accept) }
    }

    fn push(&mut self, s: Summand) {
        if s.guard.is_satisfiable() && !self.summands.contains(&s) {
            self.summands.push(s);
        }
    }

    /// The head normal form as a term, omitting trivially true guards and signals.
    pub fn to_expr(&self) -> ProcExpr {
        let mut parts: Vec<ProcExpr> = self
            .summands
            .iter()
            .map(|s| {
                let step = ProcExpr::prefix(s.action.clone(), s.tail.clone());
                if s.guard.is_true() {
                    step
                } else {
                    ProcExpr::guard(s.guard, step)
                }
            })
            .collect();
        let (psi, chi) = (self.root_signal, self.acceptance);
        let accept = if chi.is_true() {
            Some(ProcExpr::Accept)
        } else if chi.is_false() {
            None
        } else {
            Some(ProcExpr::guard(chi, ProcExpr::Accept))
        };
        match (psi.is_true(), accept) {
            (true, Some(acc)) => parts.push(acc),
            (true, None) => {}
            (false, acc) => parts.push(ProcExpr::signal(psi, acc.unwrap_or(ProcExpr::Deadlock))),
        }
        big_choice(parts)
    }

    pub fn render(&self, vars: &[String]) -> String {
        let mut out = String::new();
        for s in &self.summands {
            out.push_str(&format!(
                "  [{}] -> {}.{}\n",
                print_prop(&s.guard, vars),
                s.action,
                print_expr(&s.tail, vars)
            ));
        }
        out.push_str(&format!("  root signal: {}\n", print_prop(&self.root_signal, vars)));
        out.push_str(&format!("  acceptance:  {}\n", print_prop(&self.acceptance, vars)));
        out
    }
}

/// One case of the head-normal-form construction, with the axioms it relies on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub case: &'static str,
    pub term: String,
    pub axioms: Vec<AxiomId>,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let axioms: Vec<&str> = self.axioms.iter().map(|a| a.name()).collect();
        write!(f, "{:<12} {}  [{}]", self.case, self.term, axioms.join(" "))
    }
}

struct HnfBuilder<'e, 's> {
    engine: &'e Engine<'s>,
    trace: Vec<TraceStep>,
}

impl HnfBuilder<'_, '_> {
    fn note(&mut self, case: &'static str, e: &ProcExpr, axioms: &[AxiomId]) {
        let term = print_expr(e, &self.engine.spec().vars);
        self.trace.push(TraceStep { case, term, axioms: axioms.to_vec() });
    }

    /// Guards of the summands whose tails can be entered under the all-true valuation.
    fn enabled(&self, h: &Hnf) -> Result<Prop, RewriteError> {
        let n = self.engine.spec().nvars();
        let mut e = Prop::falsity(n);
        for s in &h.summands {
            if self.engine.cons(&s.tail, Valuation::all_true(n))? {
                e = e.or(&s.guard);
            }
        }
        Ok(e)
    }

    fn build(&mut self, e: &ProcExpr) -> Result<Hnf, RewriteError> {
        use AxiomId::*;
        let n = self.engine.spec().nvars();
        let truth = Prop::truth(n);
        Ok(match e {
            ProcExpr::Deadlock => {
                self.note("deadlock", e, &[A3, C2, SI1]);
                Hnf::constant(n, false)
            }
            ProcExpr::Accept => {
                self.note("accept", e, &[A6, A1, C1, SI1]);
                Hnf::constant(n, true)
            }
            ProcExpr::Prefix(a, p) => {
                self.note("prefix", e, &[A6, C2, SI1]);
                let mut h = Hnf::constant(n, false);
                h.push(Summand { guard: truth, action: a.clone(), tail: (**p).clone() });
                h
            }
            ProcExpr::Choice(l, r) => {
                let hl = self.build(l)?;
                let hr = self.build(r)?;
                self.note("choice", e, &[A1, A2, A3, C3, SI4, SI5]);
                let mut h = Hnf {
                    summands: vec![],
                    root_signal: hl.root_signal.and(&hr.root_signal),
                    acceptance: hl.acceptance.or(&hr.acceptance),
                };
                for s in hl.summands.into_iter().chain(hr.summands) {
                    h.push(s);
                }
                h
            }
            ProcExpr::Seqc(l, r) | ProcExpr::SeqLegacy(l, r) => {
                let legacy = matches!(e, ProcExpr::SeqLegacy(..));
                let hl = self.build(l)?;
                let hr = self.build(r)?;
                if legacy {
                    self.note("sequential", e, &[A1, A4, A5, A10, C5, C6, SI8]);
                } else {
                    self.note("sequencing", e, &[A1, NA1, NA3, NA4, C7, SI4, SI8, SI9, A11, C6, A5]);
                }
                // Control passes to the right side when the left side accepts and,
                // for sequencing, has no step it could take.
                let pass =
                    if legacy { hl.acceptance } else { hl.acceptance.and(&self.enabled(&hl)?.not()) };
                let mut h = Hnf {
                    summands: vec![],
                    root_signal: hl.root_signal.and(&hl.acceptance.not().or(&hr.root_signal)),
                    acceptance: hl.acceptance.and(&hr.acceptance),
                };
                for s in hl.summands {
                    let tail = if legacy {
                        ProcExpr::seq_legacy(s.tail, (**r).clone())
                    } else {
                        ProcExpr::seqc(s.tail, (**r).clone())
                    };
                    h.push(Summand { guard: s.guard, action: s.action, tail });
                }
                for s in hr.summands {
                    h.push(Summand { guard: pass.and(&s.guard), ..s });
                }
                h
            }
            ProcExpr::Na(p) => {
                let mut h = self.build(p)?;
                self.note("non-accept", e, &[NA1, NA2, NA3, NA4, A1, A6, C7, SI9, C2, C4]);
                h.acceptance = Prop::falsity(n);
                h
            }
            ProcExpr::Guard(phi, p) => {
                let hp = self.build(p)?;
                self.note("guard", e, &[C5, SI6, C4, C2]);
                let mut h = Hnf {
                    summands: vec![],
                    root_signal: phi.not().or(&hp.root_signal),
                    acceptance: phi.and(&hp.acceptance),
                };
                for s in hp.summands {
                    h.push(Summand { guard: phi.and(&s.guard), ..s });
                }
                h
            }
            ProcExpr::Signal(phi, p) => {
                let mut h = self.build(p)?;
                self.note("signal", e, &[A1, SI4, SI5]);
                h.root_signal = phi.and(&h.root_signal);
                h
            }
            ProcExpr::Ident(x) => {
                let body = self.engine.spec().body(x).ok_or_else(|| SemanticsError::UnknownIdent(x.to_string()))?;
                self.note("unfold", e, &[]);
                self.build(body)?
            }
        })
    }
}

/// Head normal form of `e` together with the construction trace.
pub fn hnf_with_trace(spec: &Spec, e: &ProcExpr) -> Result<(Hnf, Vec<TraceStep>), RewriteError> {
    let engine = Engine::new(spec)?;
    hnf_in(&engine, e)
}

pub(crate) fn hnf_in(engine: &Engine, e: &ProcExpr) -> Result<(Hnf, Vec<TraceStep>), RewriteError> {
    let mut b = HnfBuilder { engine, trace: Vec::new() };
    let h = b.build(e)?;
    Ok((h, b.trace))
}

pub fn hnf(spec: &Spec, e: &ProcExpr) -> Result<Hnf, RewriteError> {
    Ok(hnf_with_trace(spec, e)?.0)
}

/// Drops summands that no valuation can fire under the reset effect.
pub fn reduce_hnf(spec: &Spec, h: &Hnf) -> Result<Hnf, RewriteError> {
    let engine = Engine::new(spec)?;
    reduce_in(&engine, h)
}

fn reduce_in(engine: &Engine, h: &Hnf) -> Result<Hnf, RewriteError> {
    if h.root_signal.is_false() {
        return Err(RewriteError::UnsatisfiableRootSignal);
    }
    let v_true = Valuation::all_true(engine.spec().nvars());
    let mut out = Hnf { summands: vec![], ..h.clone() };
    for s in &h.summands {
        if s.guard.and(&h.root_signal).is_satisfiable() && engine.cons(&s.tail, v_true)? {
            out.summands.push(s.clone());
        }
    }
    Ok(out)
}

/// Checks the reducedness condition by enumerating valuations.
pub fn is_reduced(spec: &Spec, h: &Hnf) -> Result<bool, RewriteError> {
    let engine = Engine::new(spec)?;
    let n = spec.nvars();
    for s in &h.summands {
        let mut witnessed = false;
        for v in Valuation::all(n) {
            if s.guard.holds(v) && h.root_signal.holds(v) && engine.cons(&s.tail, Valuation::all_true(n))? {
                witnessed = true;
                break;
            }
        }
        if !witnessed {
            return Ok(false);
        }
    }
    Ok(true)
}

// ----- depth -------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Depth {
    Finite(usize),
    Infinite,
}

/// Longest step chain followed before a term is treated as having infinite depth.
/// Recursive specifications can reach ever larger terms without revisiting one.
pub const MAX_CHAIN: usize = 256;

/// Length of the longest step chain, where every step may start from any
/// consistent valuation. Cycles, chains longer than [`MAX_CHAIN`] and exhausted
/// budgets give [`Depth::Infinite`].
pub fn depth(spec: &Spec, e: &ProcExpr) -> Result<Depth, RewriteError> {
    let engine = Engine::new(spec)?;
    let mut memo: HashMap<ProcExpr, Depth> = HashMap::new();
    let mut on_stack: Vec<ProcExpr> = Vec::new();
    depth_in(&engine, e, &mut memo, &mut on_stack, 100_000)
}

fn depth_in(
    engine: &Engine,
    e: &ProcExpr,
    memo: &mut HashMap<ProcExpr, Depth>,
    on_stack: &mut Vec<ProcExpr>,
    budget: usize,
) -> Result<Depth, RewriteError> {
    if let Some(d) = memo.get(e) {
        return Ok(*d);
    }
    if on_stack.contains(e) || on_stack.len() >= MAX_CHAIN || memo.len() >= budget {
        return Ok(Depth::Infinite);
    }
    on_stack.push(e.clone());
    let mut best = Depth::Finite(0);
    for v in Valuation::all(engine.spec().nvars()) {
        if !engine.cons(e, v)? {
            continue;
        }
        for (_, q, _) in engine.steps_val(e, v)? {
            match depth_in(engine, &q, memo, on_stack, budget)? {
                Depth::Infinite => best = Depth::Infinite,
                Depth::Finite(d) => {
                    if let Depth::Finite(b) = best {
                        best = Depth::Finite(b.max(d + 1));
                    }
                }
            }
        }
    }
    on_stack.pop();
    memo.insert(e.clone(), best);
    Ok(best)
}

// ----- decision procedure --------------------------------------------------------

/// Why two recursion-free terms are not stateless bisimilar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Distinction {
    RootSignal { left: Prop, right: Prop },
    Acceptance { left: Prop, right: Prop },
    /// A summand of `side` fires under `valuation` and the other side has no match.
    Step { side: Side, action: Action, tail: ProcExpr, valuation: Valuation },
}

impl Distinction {
    pub fn render(&self, vars: &[String]) -> String {
        match self {
            Distinction::RootSignal { left, right } => format!(
                "root signals differ: {} vs {}",
                print_prop(left, vars),
                print_prop(right, vars)
            ),
            Distinction::Acceptance { left, right } => format!(
                "acceptance conditions differ: {} vs {}",
                print_prop(left, vars),
                print_prop(right, vars)
            ),
            Distinction::Step { side, action, tail, valuation } => {
                let who = if *side == Side::Left { "left" } else { "right" };
                let val: Vec<String> =
                    vars.iter().enumerate().map(|(i, x)| format!("{x}={}", valuation.get(i))).collect();
                format!(
                    "{who} side can do {action} to {} under {{{}}}; the other side cannot match",
                    print_expr(tail, vars),
                    val.join(", ")
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RfVerdict {
    Equal,
    Distinguished(Distinction),
}

struct Decider<'e, 's> {
    engine: &'e Engine<'s>,
    memo: HashMap<(ProcExpr, ProcExpr), bool>,
}

impl Decider<'_, '_> {
    fn normal(&self, e: &ProcExpr) -> Result<Option<Hnf>, RewriteError> {
        let (h, _) = hnf_in(self.engine, e)?;
        if h.root_signal.is_false() {
            return Ok(None);
        }
        let mut r = reduce_in(self.engine, &h)?;
        let psi = r.root_signal;
        for s in &mut r.summands {
            s.guard = s.guard.and(&psi);
        }
        r.acceptance = r.acceptance.and(&psi);
        Ok(Some(r))
    }

    fn equal(&mut self, p: &ProcExpr, q: &ProcExpr) -> Result<bool, RewriteError> {
        if p == q {
            return Ok(true);
        }
        let key = if p <= q { (p.clone(), q.clone()) } else { (q.clone(), p.clone()) };
        if let Some(&b) = self.memo.get(&key) {
            return Ok(b);
        }
        let b = self.compare(p, q)?.is_none();
        self.memo.insert(key, b);
        Ok(b)
    }

    fn compare(&mut self, p: &ProcExpr, q: &ProcExpr) -> Result<Option<Distinction>, RewriteError> {
        let n = self.engine.spec().nvars();
        let (hp, hq) = match (self.normal(p)?, self.normal(q)?) {
            (None, None) => return Ok(None),
            (Some(h), None) => {
                return Ok(Some(Distinction::RootSignal { left: h.root_signal, right: Prop::falsity(n) }))
            }
            (None, Some(h)) => {
                return Ok(Some(Distinction::RootSignal { left: Prop::falsity(n), right: h.root_signal }))
            }
            (Some(a), Some(b)) => (a, b),
        };
        if hp.root_signal != hq.root_signal {
            return Ok(Some(Distinction::RootSignal { left: hp.root_signal, right: hq.root_signal }));
        }
        if hp.acceptance != hq.acceptance {
            return Ok(Some(Distinction::Acceptance { left: hp.acceptance, right: hq.acceptance }));
        }
        for (side, mine, theirs) in [(Side::Left, &hp, &hq), (Side::Right, &hq, &hp)] {
            for s in &mine.summands {
                let mut cover = Prop::falsity(n);
                for t in &theirs.summands {
                    if t.action == s.action && self.equal(&s.tail, &t.tail)? {
                        cover = cover.or(&s.guard.and(&t.guard));
                    }
                }
                if cover != s.guard {
                    let valuation = s.guard.and(&cover.not()).satisfying().next().expect("nonempty difference");
                    return Ok(Some(Distinction::Step {
                        side,
                        action: s.action.clone(),
                        tail: s.tail.clone(),
                        valuation,
                    }));
                }
            }
        }
        Ok(None)
    }
}

/// Decides stateless bisimilarity of two recursion-free terms by comparing reduced
/// head normal forms, recursing into summand tails.
pub fn decide_bisim_rf(spec: &Spec, p: &ProcExpr, q: &ProcExpr) -> Result<RfVerdict, RewriteError> {
    if !p.is_recursion_free() || !q.is_recursion_free() {
        return Err(RewriteError::RecursionPresent);
    }
    let engine = Engine::new(spec)?;
    let mut d = Decider { engine: &engine, memo: HashMap::new() };
    Ok(match d.compare(p, q)? {
        None => RfVerdict::Equal,
        Some(x) => RfVerdict::Distinguished(x),
    })
}

/// Applies `steps` random rewrites by axioms that are sound for the term's fragment.
pub fn random_rewrites(p: &ProcExpr, mode: Mode, nvars: usize, steps: usize, rng: &mut impl Rng) -> ProcExpr {
    let rules: Vec<Rule> = axiom_instances(mode).into_iter().filter(|r| r.id != AxiomId::C8).collect();
    let mut cur = p.clone();
    for _ in 0..steps {
        let mut options: Vec<ProcExpr> = Vec::new();
        for r in &rules {
            for (pos, next) in rewrites(r, &cur, nvars) {
                let weak_distributivity = matches!(r.id, AxiomId::A11 | AxiomId::A12 | AxiomId::A13);
                let sub = subterm_at(&cur, &pos).expect("position exists");
                if weak_distributivity && sub.has_conditions() {
                    continue;
                }
                options.push(next);
            }
        }
        if options.is_empty() {
            break;
        }
        cur = options.swap_remove(rng.gen_range(0..options.len()));
    }
    cur
}
