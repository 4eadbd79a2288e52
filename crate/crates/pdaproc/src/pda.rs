//! Pushdown automata accepting by final state, and their process graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::core::Action;
use crate::semantics::{explore, Bounds, Lts, SemanticsError, TransitionSystem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PdaError {
    #[error("undeclared state `{0}`")]
    UndeclaredState(String),
    #[error("undeclared stack symbol `{0}`")]
    UndeclaredDatum(String),
    #[error("undeclared action `{0}`")]
    UndeclaredAction(String),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub src: String,
    pub action: Action,
    /// Symbol that must be on top of the stack, or `None` for the empty-stack test.
    pub pop: Option<String>,
    /// Pushed symbols, leftmost ends up on top.
    pub push: Vec<String>,
    pub dst: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pda {
    pub name: String,
    pub states: Vec<String>,
    pub alphabet: BTreeSet<Action>,
    pub data: Vec<String>,
    pub transitions: Vec<Transition>,
    pub init: String,
    pub finals: BTreeSet<String>,
}

impl Pda {
    /// Builds a PDA, checking that every transition refers to declared names.
    /// `tau` transitions need no declaration.
    pub fn new(
        name: impl Into<String>,
        states: Vec<String>,
        alphabet: BTreeSet<Action>,
        data: Vec<String>,
        transitions: Vec<Transition>,
        init: impl Into<String>,
        finals: BTreeSet<String>,
    ) -> Result<Pda, PdaError> {
        let pda = Pda { name: name.into(), states, alphabet, data, transitions, init: init.into(), finals };
        pda.validate()?;
        Ok(pda)
    }

    pub fn validate(&self) -> Result<(), PdaError> {
        let state_ok = |s: &String| {
            if self.states.contains(s) {
                Ok(())
            } else {
                Err(PdaError::UndeclaredState(s.clone()))
            }
        };
        let datum_ok = |d: &String| {
            if self.data.contains(d) {
                Ok(())
            } else {
                Err(PdaError::UndeclaredDatum(d.clone()))
            }
        };
        state_ok(&self.init)?;
        self.finals.iter().try_for_each(state_ok)?;
        for t in &self.transitions {
            state_ok(&t.src)?;
            state_ok(&t.dst)?;
            if t.action != Action::Tau && !self.alphabet.contains(&t.action) {
                return Err(PdaError::UndeclaredAction(t.action.to_string()));
            }
            t.pop.iter().try_for_each(datum_ok)?;
            t.push.iter().try_for_each(datum_ok)?;
        }
        Ok(())
    }

    pub fn initial_config(&self) -> Config {
        Config { state: self.init.clone(), stack: Vec::new() }
    }

    pub fn is_final(&self, state: &str) -> bool {
        self.finals.contains(state)
    }

    /// Transitions whose source and stack test match `(state, top)`.
    pub fn matching<'a>(&'a self, state: &'a str, top: Option<&'a str>) -> impl Iterator<Item = &'a Transition> + 'a {
        self.transitions.iter().filter(move |t| t.src == state && t.pop.as_deref() == top)
    }
}

/// A configuration: control state and stack contents, top first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Config {
    pub state: String,
    pub stack: Vec<String>,
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let stack = if self.stack.is_empty() {
            "eps".to_string()
        } else if self.stack.iter().all(|d| d.chars().count() == 1) {
            self.stack.concat()
        } else {
            self.stack.join(",")
        };
        write!(f, "({}, {})", self.state, stack)
    }
}

/// Steps of a configuration. Empty-stack transitions fire only on an empty stack.
pub fn pda_steps(pda: &Pda, cfg: &Config) -> Vec<(Action, Config)> {
    let (top, rest) = match cfg.stack.split_first() {
        Some((d, rest)) => (Some(d.as_str()), rest),
        None => (None, &cfg.stack[..]),
    };
    let mut out: Vec<(Action, Config)> = Vec::new();
    for t in pda.matching(&cfg.state, top) {
        let mut stack = t.push.clone();
        stack.extend_from_slice(rest);
        let step = (t.action.clone(), Config { state: t.dst.clone(), stack });
        if !out.contains(&step) {
            out.push(step);
        }
    }
    out
}

/// Acceptance by final state, regardless of the stack.
pub fn pda_accepts(pda: &Pda, cfg: &Config) -> bool {
    pda.is_final(&cfg.state)
}

impl TransitionSystem for Pda {
    type State = Config;
    type Error = SemanticsError;

    fn root(&self) -> Result<Config, SemanticsError> {
        Ok(self.initial_config())
    }

    fn steps(&self, s: &Config) -> Result<Vec<(Action, Config)>, SemanticsError> {
        Ok(pda_steps(self, s))
    }

    fn accepts(&self, s: &Config) -> Result<bool, SemanticsError> {
        Ok(pda_accepts(self, s))
    }

    fn label(&self, s: &Config) -> String {
        s.to_string()
    }
}

/// The process graph of a PDA, explored from `(init, empty stack)`.
pub fn pda_lts(pda: &Pda, bounds: Bounds) -> Result<Lts, SemanticsError> {
    explore(pda, bounds)
}

/// Largest number of transitions applicable to one `(state, top)` pair.
pub fn branching_degree(pda: &Pda) -> usize {
    let mut counts: BTreeMap<(&str, Option<&str>), usize> = BTreeMap::new();
    for t in &pda.transitions {
        *counts.entry((t.src.as_str(), t.pop.as_deref())).or_default() += 1;
    }
    counts.values().copied().max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(src: &str, a: &str, pop: Option<&str>, push: &[&str], dst: &str) -> Transition {
        Transition {
            src: src.into(),
            action: Action::named(a),
            pop: pop.map(String::from),
            push: push.iter().map(|s| s.to_string()).collect(),
            dst: dst.into(),
        }
    }

    fn counter() -> Pda {
        Pda::new(
            "counter",
            vec!["up".into()],
            [Action::named("a"), Action::named("b")].into_iter().collect(),
            vec!["1".into()],
            vec![
                tr("up", "a", None, &["1"], "up"),
                tr("up", "a", Some("1"), &["1", "1"], "up"),
                tr("up", "b", Some("1"), &[], "up"),
            ],
            "up",
            ["up".to_string()].into_iter().collect(),
        )
        .unwrap()
    }

    fn cfg(stack: &[&str]) -> Config {
        Config { state: "up".into(), stack: stack.iter().map(|s| s.to_string()).collect() }
    }

    #[test]
    fn counter_steps() {
        let p = counter();
        assert_eq!(pda_steps(&p, &cfg(&[])), vec![(Action::named("a"), cfg(&["1"]))]);
        let got = pda_steps(&p, &cfg(&["1", "1"]));
        assert_eq!(got, vec![(Action::named("a"), cfg(&["1", "1", "1"])), (Action::named("b"), cfg(&["1"]))]);
        assert_eq!(branching_degree(&p), 2);
    }

    #[test]
    fn empty_pda_has_degree_zero() {
        let p = Pda::new("e", vec!["s".into()], BTreeSet::new(), vec![], vec![], "s", BTreeSet::new()).unwrap();
        assert_eq!(branching_degree(&p), 0);
        assert!(pda_steps(&p, &p.initial_config()).is_empty());
        assert!(!pda_accepts(&p, &p.initial_config()));
    }

    #[test]
    fn undeclared_names_are_rejected() {
        let r = Pda::new("e", vec!["s".into()], BTreeSet::new(), vec![], vec![tr("s", "a", None, &[], "s")], "s", BTreeSet::new());
        assert_eq!(r, Err(PdaError::UndeclaredAction("a".into())));
    }
}
