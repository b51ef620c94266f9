//! Semantic full-text search: queries that combine ontology relations with
//! word and entity co-occurrence inside short text contexts.

pub mod corpus;
pub mod eval;
pub mod index;
pub mod nlp;
pub mod ontology;
pub mod oracle;
pub mod query;
