//! The bundled example inputs, parsed on demand.

use crate::core::Spec;
use crate::parser::{parse_pda, parse_spec};
use crate::pda::Pda;

pub const COUNTER_SPEC: &str = include_str!("../data/counter.pspec");
pub const COUNTER_PDA: &str = include_str!("../data/counter.pda");
pub const LADDER_PDA: &str = include_str!("../data/ladder.pda");
pub const STACK_PDA: &str = include_str!("../data/stack.pda");
pub const TWOSTATE_SPEC: &str = include_str!("../data/twostate.pspec");
pub const COINTOSS_SPEC: &str = include_str!("../data/cointoss.pspec");
pub const DIFFERENCE_SPEC: &str = include_str!("../data/difference.pspec");
pub const UNGUARDED_SPEC: &str = include_str!("../data/unguarded.pspec");
pub const UNGUARDED_SEQC_SPEC: &str = include_str!("../data/unguarded-seqc.pspec");
pub const NONSEPARATION_SPEC: &str = include_str!("../data/nonseparation.pspec");
pub const FALSEGUARDS_SPEC: &str = include_str!("../data/falseguards.pspec");
pub const SEPARATED_SPEC: &str = include_str!("../data/separated.pspec");

/// Bundled specifications by file stem.
pub const SPECS: &[(&str, &str)] = &[
    ("counter", COUNTER_SPEC),
    ("twostate", TWOSTATE_SPEC),
    ("cointoss", COINTOSS_SPEC),
    ("difference", DIFFERENCE_SPEC),
    ("unguarded", UNGUARDED_SPEC),
    ("unguarded-seqc", UNGUARDED_SEQC_SPEC),
    ("nonseparation", NONSEPARATION_SPEC),
    ("separated", SEPARATED_SPEC),
    ("falseguards", FALSEGUARDS_SPEC),
];

/// Bundled automata by file stem.
pub const PDAS: &[(&str, &str)] = &[("counter", COUNTER_PDA), ("ladder", LADDER_PDA), ("stack", STACK_PDA)];

/// Parses a bundled specification. Panics if the bundled text is malformed.
pub fn spec(text: &str) -> Spec {
    parse_spec(text).expect("bundled specification parses")
}

/// Parses a bundled automaton. Panics if the bundled text is malformed.
pub fn pda(text: &str) -> Pda {
    parse_pda(text).expect("bundled automaton parses")
}
