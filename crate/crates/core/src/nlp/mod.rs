//! Sentence processing: entity recognition, anaphora resolution, and the
//! decomposition of parsed sentences into contexts.
//!
//! A sentence's constituent parse is rewritten into a tree of enumeration,
//! sub-clause and concatenation nodes ([`sci`]), which is then recombined
//! into the token sets that become contexts ([`scr`]).

mod decompose;
mod parse_tree;
mod recognize;
pub mod sci;
pub mod scr;
mod tokenize;

pub use decompose::{
    decompose, decompose_document, Context, ContextId, ContextItem, DecomposeOptions, Item, Mode,
    SourceToken,
};
pub use parse_tree::{ParseNode, ParseTreeError};
pub use recognize::{
    gender_of, pronoun_gender, recognize_entities, resolve_anaphora, Gender, Provenance,
    TokenAnnotation,
};
pub use sci::{build_sci_tree, SciNode, SciRules, Span};
pub use scr::recombine;
pub use tokenize::{align_tokens, is_punctuation, normalize_word, tokenize};
