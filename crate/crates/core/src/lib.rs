//! Parser generator for unification grammars.
//!
//! A grammar is compiled into LR tables over its context-free backbone. Table
//! symbols are anti-unification generalizations of the phrases they stand
//! for, so the LR phase already applies every constraint the similar rules
//! agree on. Parsing then runs in three phases:
//!
//! 1. [`runtime`]: depth-first backtracking LR parsing over the generalized
//!    grammar, with lookahead-set intersection, gap lists for empty
//!    productions, and back-checking of kernel prefixes;
//! 2. [`constraints::phase_two`]: the full syntactic constraints of the
//!    original rules and lexicon, tried nondeterministically per node;
//! 3. [`constraints::phase_three`]: the optional semantic constraint layer.
//!
//! [`oracle`] is a deliberately naive unification chart parser kept as an
//! independent reference for tests and the `oracle-compare` command.

pub mod compiler;
pub mod constraints;
pub mod grammar;
pub mod lexer;
pub mod oracle;
pub mod runtime;
pub mod term;
pub mod tree;

pub use compiler::{compile, LookaheadMode, ParseTables, TableError};
pub use grammar::{Grammar, GrammarError};
pub use runtime::{ParseOptions, ParseOutcome, Parser};
pub use term::Term;
