pub mod core;
pub mod parser;
pub mod pda;
pub mod semantics;
pub mod bisim;
pub mod gen;
pub mod rewrite;
pub mod normal;
pub mod convert;
pub mod corpus;
