//! Tree queries over the ontology and the context index: parsing,
//! evaluation, ranking, re-rooting and suggestions.

mod ast;
mod eval;
mod parser;
mod rank;
mod reroot;
mod suggest;

use thiserror::Error;

pub use ast::{
    compatible, Arc, NodePath, NodeRef, OwItem, PathStep, QueryNode, QueryTree, RawArc, RawItem,
    RawNode,
};
pub use eval::{evaluate, evaluate_with, node_denotation, Evidence, ResultGroup, ResultSet};
pub use parser::{parse_query, parse_raw};
pub use rank::{rank_results, RankOptions, LEGACY_PINNED_ENTITY};
pub use reroot::change_root;
pub use suggest::{
    apply_suggestion, suggest, Focus, Preselect, SuggestOptions, Suggestion, SuggestionKind,
    Suggestions,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown class {0:?}")]
    UnknownClass(String),
    #[error("unknown entity {0:?}")]
    UnknownEntity(String),
    #[error("unknown relation {0:?}")]
    UnknownRelation(String),
    #[error("relation {relation:?} expects {expected}, got {found}")]
    Typing {
        relation: String,
        expected: String,
        found: String,
    },
    #[error("prefix {prefix:?} is shorter than {min} characters")]
    PrefixTooShort { prefix: String, min: usize },
    #[error("query too broad ({postings} postings, limit {limit}); refine your query")]
    TooBroad { postings: usize, limit: usize },
    #[error("invalid node path {0:?}")]
    InvalidPath(String),
    #[error("path does not lead to a class or instance node")]
    NotANode,
}
