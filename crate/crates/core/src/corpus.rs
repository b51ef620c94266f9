//! Document collection with entity-link annotations and optional parses.
//!
//! One JSON object per line:
//!
//! ```text
//! {"id", "title", "sections":[{"heading", "sentences":[
//!     {"text", "tokens":[...], "parse": "<bracketed tree or null>",
//!      "links":[{"first_token","last_token","entity"}]}]}]}
//! ```
//!
//! `tokens` may be omitted, in which case the text is tokenized. A sentence
//! may carry `"list_item": true`; see [`merge_list_items`].

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nlp::tokenize;
use crate::ontology::{EntityId, Ontology};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: malformed record: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(
        "line {line}: link [{first}, {last}] in section {section} sentence {sentence} \
         is outside the sentence's {len} tokens"
    )]
    SpanOutOfRange {
        line: usize,
        section: usize,
        sentence: usize,
        first: u32,
        last: u32,
        len: usize,
    },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusWarning {
    UnknownEntity { line: usize, name: String },
    OverlappingLink { line: usize, first: u32, last: u32 },
}

impl std::fmt::Display for CorpusWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CorpusWarning::UnknownEntity { line, name } => {
                write!(f, "line {line}: link to unknown entity `{name}` dropped")
            }
            CorpusWarning::OverlappingLink { line, first, last } => {
                write!(
                    f,
                    "line {line}: link [{first}, {last}] overlaps an earlier link and was dropped"
                )
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub first_token: u32,
    pub last_token: u32,
    pub entity: EntityId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    pub text: String,
    pub tokens: Vec<String>,
    pub parse: Option<String>,
    pub links: Vec<Link>,
    pub list_item: bool,
}

impl Sentence {
    pub fn is_parsed(&self) -> bool {
        self.parse.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub heading: String,
    pub sentences: Vec<Sentence>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub sections: Vec<Section>,
}

impl Document {
    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.sections.iter().flat_map(|s| s.sentences.iter())
    }

    pub fn num_sentences(&self) -> usize {
        self.sections.iter().map(|s| s.sentences.len()).sum()
    }
}

/// Position of a sentence in the collection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SentenceLocation {
    pub doc: u32,
    pub section: u32,
    pub sentence: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    documents: Vec<Document>,
    sentence_index: Vec<SentenceLocation>,
    doc_offsets: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    pub corpus: Corpus,
    pub warnings: Vec<CorpusWarning>,
}

#[derive(Deserialize)]
struct RawDocument {
    id: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    sections: Vec<RawSection>,
}

#[derive(Deserialize)]
struct RawSection {
    #[serde(default)]
    heading: String,
    #[serde(default)]
    sentences: Vec<RawSentence>,
}

#[derive(Deserialize)]
struct RawSentence {
    text: String,
    #[serde(default)]
    tokens: Option<Vec<String>>,
    #[serde(default)]
    parse: Option<String>,
    #[serde(default)]
    links: Vec<RawLink>,
    #[serde(default)]
    list_item: bool,
}

#[derive(Deserialize)]
struct RawLink {
    first_token: u32,
    last_token: u32,
    entity: String,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Self {
        let mut sentence_index = Vec::new();
        let mut doc_offsets = Vec::with_capacity(documents.len());
        for (d, doc) in documents.iter().enumerate() {
            doc_offsets.push(sentence_index.len() as u32);
            for (s, section) in doc.sections.iter().enumerate() {
                for i in 0..section.sentences.len() {
                    sentence_index.push(SentenceLocation {
                        doc: d as u32,
                        section: s as u32,
                        sentence: i as u32,
                    });
                }
            }
        }
        Corpus {
            documents,
            sentence_index,
            doc_offsets,
        }
    }

    pub fn load(path: impl AsRef<Path>, ontology: &Ontology) -> Result<LoadedCorpus, CorpusError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_jsonl(&text, ontology)
    }

    pub fn parse_jsonl(text: &str, ontology: &Ontology) -> Result<LoadedCorpus, CorpusError> {
        let mut documents = Vec::new();
        let mut warnings = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            if raw_line.trim().is_empty() {
                continue;
            }
            let raw: RawDocument =
                serde_json::from_str(raw_line).map_err(|e| CorpusError::Malformed {
                    line,
                    reason: e.to_string(),
                })?;
            documents.push(convert_document(raw, line, ontology, &mut warnings)?);
        }
        Ok(LoadedCorpus {
            corpus: Corpus::new(documents),
            warnings,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn num_sentences(&self) -> usize {
        self.sentence_index.len()
    }

    /// Collection-wide id of the first sentence of `doc`.
    pub fn first_sentence_id(&self, doc: usize) -> u32 {
        self.doc_offsets[doc]
    }

    pub fn locate(&self, sentence_id: u32) -> Option<SentenceLocation> {
        self.sentence_index.get(sentence_id as usize).copied()
    }

    pub fn sentence(&self, sentence_id: u32) -> Option<&Sentence> {
        let loc = self.locate(sentence_id)?;
        Some(
            &self.documents[loc.doc as usize].sections[loc.section as usize].sentences
                [loc.sentence as usize],
        )
    }
}

fn convert_document(
    raw: RawDocument,
    line: usize,
    ontology: &Ontology,
    warnings: &mut Vec<CorpusWarning>,
) -> Result<Document, CorpusError> {
    let mut sections = Vec::with_capacity(raw.sections.len());
    for (s_idx, raw_section) in raw.sections.into_iter().enumerate() {
        let mut sentences = Vec::with_capacity(raw_section.sentences.len());
        for (i, raw_sentence) in raw_section.sentences.into_iter().enumerate() {
            let tokens = match raw_sentence.tokens {
                Some(t) if !t.is_empty() => t,
                _ => tokenize(&raw_sentence.text),
            };
            let mut links: Vec<Link> = Vec::new();
            for link in raw_sentence.links {
                if link.first_token > link.last_token || link.last_token as usize >= tokens.len() {
                    return Err(CorpusError::SpanOutOfRange {
                        line,
                        section: s_idx,
                        sentence: i,
                        first: link.first_token,
                        last: link.last_token,
                        len: tokens.len(),
                    });
                }
                let Some(entity) = ontology.resolve_entity(&link.entity) else {
                    warnings.push(CorpusWarning::UnknownEntity {
                        line,
                        name: link.entity,
                    });
                    continue;
                };
                let overlaps = links
                    .iter()
                    .any(|l| l.first_token <= link.last_token && link.first_token <= l.last_token);
                if overlaps {
                    warnings.push(CorpusWarning::OverlappingLink {
                        line,
                        first: link.first_token,
                        last: link.last_token,
                    });
                    continue;
                }
                links.push(Link {
                    first_token: link.first_token,
                    last_token: link.last_token,
                    entity,
                });
            }
            links.sort_by_key(|l| l.first_token);
            let parse = raw_sentence.parse.filter(|p| !p.trim().is_empty());
            sentences.push(Sentence {
                text: raw_sentence.text,
                tokens,
                parse,
                links,
                list_item: raw_sentence.list_item,
            });
        }
        sections.push(Section {
            heading: raw_section.heading,
            sentences,
        });
    }
    Ok(Document {
        id: raw.id,
        title: raw.title,
        sections,
    })
}

/// Appends every list-item sentence to the sentence before it in the same
/// section, so list entries share contexts with their lead-in sentence.
///
/// Merged sentences keep a parse only if both halves had one; the two trees
/// are joined under a fresh `S` node.
pub fn merge_list_items(corpus: &Corpus) -> Corpus {
    let documents = corpus
        .documents
        .iter()
        .map(|doc| Document {
            id: doc.id.clone(),
            title: doc.title.clone(),
            sections: doc
                .sections
                .iter()
                .map(|section| {
                    let mut merged: Vec<Sentence> = Vec::with_capacity(section.sentences.len());
                    for sentence in &section.sentences {
                        match merged.last_mut() {
                            Some(prev) if sentence.list_item => append_sentence(prev, sentence),
                            _ => merged.push(sentence.clone()),
                        }
                    }
                    Section {
                        heading: section.heading.clone(),
                        sentences: merged,
                    }
                })
                .collect(),
        })
        .collect();
    Corpus::new(documents)
}

fn append_sentence(prev: &mut Sentence, item: &Sentence) {
    let offset = prev.tokens.len() as u32;
    prev.text = format!("{} {}", prev.text, item.text);
    prev.tokens.extend(item.tokens.iter().cloned());
    prev.links.extend(item.links.iter().map(|l| Link {
        first_token: l.first_token + offset,
        last_token: l.last_token + offset,
        entity: l.entity,
    }));
    prev.parse = match (prev.parse.take(), &item.parse) {
        (Some(a), Some(b)) => Some(format!("(S {a} {b})")),
        _ => None,
    };
}
