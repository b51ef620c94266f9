use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::{json, Value};

use super::parse_tree::ParseNode;
use super::recognize::{recognize_entities, resolve_anaphora, TokenAnnotation};
use super::sci::{build_sci_tree, SciRules};
use super::scr::{recombine_bounded, MAX_CONTEXTS};
use super::tokenize::is_punctuation;
use crate::corpus::{Corpus, Document};
use crate::ontology::{EntityId, Ontology};

/// Unit of co-occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    #[default]
    Contexts,
    Sentences,
    Sections,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Contexts, Mode::Sentences, Mode::Sections];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Contexts => "contexts",
            Mode::Sentences => "sentences",
            Mode::Sections => "sections",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "contexts" => Ok(Mode::Contexts),
            "sentences" => Ok(Mode::Sentences),
            "sections" => Ok(Mode::Sections),
            other => Err(format!(
                "unknown mode {other:?} (expected contexts, sentences or sections)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContextId(pub u32);

/// A token of the corpus: global sentence id and token index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceToken {
    pub sentence: u32,
    pub token: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Item {
    Word(String),
    Entity(EntityId),
}

/// An item of a context. Positions are 1-based and count items, not tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextItem {
    pub pos: u32,
    pub item: Item,
    pub source: SourceToken,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    pub id: ContextId,
    pub doc: u32,
    /// Global id of the first sentence the context draws from.
    pub sentence: u32,
    pub tokens: Vec<SourceToken>,
    pub items: Vec<ContextItem>,
}

impl Context {
    /// One line of `decompose` output.
    pub fn to_json(&self, corpus: &Corpus, ontology: &Ontology) -> Value {
        let doc = corpus
            .documents()
            .get(self.doc as usize)
            .map_or("", |d| d.id.as_str());
        let items: Vec<Value> = self
            .items
            .iter()
            .map(|it| match &it.item {
                Item::Word(w) => json!({ "pos": it.pos, "word": w }),
                Item::Entity(e) => json!({ "pos": it.pos, "entity": ontology.entity_name(*e) }),
            })
            .collect();
        json!({ "cid": self.id.0, "doc": doc, "sentence": self.sentence, "items": items })
    }
}

#[derive(Debug, Clone)]
pub struct DecomposeOptions {
    pub mode: Mode,
    pub rules: SciRules,
    pub max_contexts_per_sentence: usize,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            mode: Mode::Contexts,
            rules: SciRules::default(),
            max_contexts_per_sentence: MAX_CONTEXTS,
        }
    }
}

impl DecomposeOptions {
    pub fn with_mode(mode: Mode) -> Self {
        DecomposeOptions {
            mode,
            ..Default::default()
        }
    }
}

/// Decomposes every document in parallel. Context ids are assigned in
/// document order.
pub fn decompose(corpus: &Corpus, ontology: &Ontology, options: &DecomposeOptions) -> Vec<Context> {
    let per_doc: Vec<Vec<Context>> = corpus
        .documents()
        .par_iter()
        .enumerate()
        .map(|(d, doc)| {
            decompose_document(
                doc,
                d as u32,
                corpus.first_sentence_id(d),
                ontology,
                options,
            )
        })
        .collect();
    let mut out: Vec<Context> = per_doc.into_iter().flatten().collect();
    for (i, c) in out.iter_mut().enumerate() {
        c.id = ContextId(i as u32);
    }
    out
}

/// Contexts of one document, with ids numbered from 0.
pub fn decompose_document(
    doc: &Document,
    doc_index: u32,
    first_sentence: u32,
    ontology: &Ontology,
    options: &DecomposeOptions,
) -> Vec<Context> {
    let recognized = recognize_entities(doc, ontology);
    let annotations = resolve_anaphora(doc, &recognized, ontology);
    let sentences: Vec<_> = doc.sentences().collect();
    let lookup: Vec<Vec<Option<usize>>> = sentences
        .iter()
        .zip(&annotations)
        .map(|(s, anns)| annotation_lookup(s.tokens.len(), anns))
        .collect();
    let builder = ItemBuilder {
        doc: &sentences,
        first_sentence,
        annotations: &annotations,
        lookup: &lookup,
    };

    let mut token_sets: Vec<(u32, Vec<SourceToken>)> = Vec::new();
    let whole = |local: usize| -> Vec<SourceToken> {
        (0..sentences[local].tokens.len() as u32)
            .map(|token| SourceToken {
                sentence: first_sentence + local as u32,
                token,
            })
            .collect()
    };
    match options.mode {
        Mode::Sentences => {
            for local in 0..sentences.len() {
                token_sets.push((first_sentence + local as u32, whole(local)));
            }
        }
        Mode::Sections => {
            let mut local = 0;
            for section in &doc.sections {
                let start = first_sentence + local as u32;
                let mut tokens = Vec::new();
                for _ in &section.sentences {
                    tokens.extend(whole(local));
                    local += 1;
                }
                token_sets.push((start, tokens));
            }
        }
        Mode::Contexts => {
            for (local, sentence) in sentences.iter().enumerate() {
                let id = first_sentence + local as u32;
                match sentence_contexts(sentence.parse.as_deref(), sentence.tokens.len(), options) {
                    Some(sets) => {
                        for set in sets {
                            let tokens = set
                                .into_iter()
                                .map(|token| SourceToken {
                                    sentence: id,
                                    token,
                                })
                                .collect();
                            token_sets.push((id, tokens));
                        }
                    }
                    None => token_sets.push((id, whole(local))),
                }
            }
        }
    }

    token_sets
        .into_iter()
        .filter_map(|(sentence, tokens)| {
            let items = builder.items(&tokens);
            (!items.is_empty()).then_some((sentence, tokens, items))
        })
        .enumerate()
        .map(|(i, (sentence, tokens, items))| Context {
            id: ContextId(i as u32),
            doc: doc_index,
            sentence,
            tokens,
            items,
        })
        .collect()
}

/// Token index sets from the sentence's parse, or `None` when the sentence
/// must be used whole (no parse, malformed parse, leaf count mismatch, or
/// too many contexts).
fn sentence_contexts(
    parse: Option<&str>,
    num_tokens: usize,
    options: &DecomposeOptions,
) -> Option<Vec<Vec<u32>>> {
    let tree = match ParseNode::parse(parse?) {
        Ok(t) => t,
        Err(e) => {
            log::debug!("falling back to whole sentence: {e}");
            return None;
        }
    };
    if tree.leaves().len() != num_tokens {
        log::debug!("falling back to whole sentence: parse leaves do not match tokens");
        return None;
    }
    let sci = build_sci_tree(&tree, &options.rules);
    recombine_bounded(&sci, options.max_contexts_per_sentence)
}

fn annotation_lookup(len: usize, anns: &[TokenAnnotation]) -> Vec<Option<usize>> {
    let mut out = vec![None; len];
    for (i, a) in anns.iter().enumerate() {
        for t in a.first_token..=a.last_token {
            if let Some(slot) = out.get_mut(t as usize) {
                slot.get_or_insert(i);
            }
        }
    }
    out
}

struct ItemBuilder<'a> {
    doc: &'a [&'a crate::corpus::Sentence],
    first_sentence: u32,
    annotations: &'a [Vec<TokenAnnotation>],
    lookup: &'a [Vec<Option<usize>>],
}

impl ItemBuilder<'_> {
    /// Words and entities of a token set. An annotated span becomes a single
    /// entity item; punctuation is dropped.
    fn items(&self, tokens: &[SourceToken]) -> Vec<ContextItem> {
        let mut items = Vec::new();
        let mut emitted: Vec<(u32, usize)> = Vec::new();
        for &src in tokens {
            let local = (src.sentence - self.first_sentence) as usize;
            let sentence = self.doc[local];
            let item = match self.lookup[local][src.token as usize] {
                Some(a) => {
                    if emitted.contains(&(src.sentence, a)) {
                        continue;
                    }
                    emitted.push((src.sentence, a));
                    Item::Entity(self.annotations[local][a].entity)
                }
                None => {
                    let word = &sentence.tokens[src.token as usize];
                    if is_punctuation(word) {
                        continue;
                    }
                    Item::Word(word.clone())
                }
            };
            items.push(ContextItem {
                pos: items.len() as u32 + 1,
                item,
                source: src,
            });
        }
        items
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_round_trips() {
        for m in Mode::ALL {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
        }
        assert!("paragraphs".parse::<Mode>().is_err());
    }
}
