//! Immutable process terms, propositions and specifications.

mod expr;
mod prop;

pub use expr::{big_choice, free_idents, seq_word, Action, Mode, ProcExpr, Spec};
pub use prop::{prop_eval, Prop, Valuation, MAX_VARS};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error("proposition over {found} variables used where {expected} are declared")]
    VariableMismatch { expected: usize, found: usize },
    #[error("identifier `{0}` is used but never defined")]
    UndefinedIdent(String),
    #[error("initial identifier `{0}` is not defined")]
    UndefinedInit(String),
    #[error("identifier `{0}` is defined twice")]
    DuplicateIdent(String),
    #[error("legacy sequential composition is only allowed in `seq` mode")]
    LegacyInSeqc,
    #[error("at most {max} propositional variables are supported, got {found}", max = MAX_VARS)]
    TooManyVars { found: usize },
}
