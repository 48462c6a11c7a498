//! PDDL front end: a STRIPS+typing subset parser, a reachability-pruned
//! grounder, and the benchmark bundle directory format.
//!
//! Supported language: `:strips` and `:typing` requirements only. Anything
//! beyond that (negative preconditions, disjunctions, quantifiers, numeric
//! fluents, …) is rejected with an error naming the feature, never silently
//! ignored. Symbols are case-insensitive and canonicalized to lower case.

mod ast;
mod bundle;
mod ground;
mod lexer;
mod parser;

use thiserror::Error;

pub use ast::{ActionSchema, Atom, DomainAst, PredicateDecl, ProblemAst, Term, TypedName};
pub use bundle::{
    load_bundle, load_bundle_with_cap, write_bundle, BundleError, BundleMeta, RecognitionBundle,
};
pub use ground::{ground, ground_with_cap, ground_with_extra_facts, GroundError, DEFAULT_GROUND_CAP};
pub use parser::{parse_domain, parse_problem};


/// Errors raised while parsing or semantically checking PDDL text.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PddlError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("unsupported feature at {line}:{col}: {feature}")]
    UnsupportedFeature {
        line: usize,
        col: usize,
        feature: String,
    },
    #[error("semantic error at {line}:{col}: {message}")]
    Semantic {
        line: usize,
        col: usize,
        message: String,
    },
}
