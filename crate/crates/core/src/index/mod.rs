//! Context lists: per-prefix posting blocks holding word occurrences plus
//! the entity occurrences of the same contexts.

mod build;
mod excerpt;
pub mod format;
pub mod ops;
mod posting;

use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use build::build_index;
pub use excerpt::{Excerpt, ExcerptRecord, ExcerptStore, ItemSpan, Segment};
pub use format::FormatError;
pub use ops::{entities_in_contexts, filter_contexts_by_entities, intersect};
pub use posting::{entity_item, item_entity, ContextList, EntityList, Posting, ENTITY_BASE};

use crate::ontology::Ontology;

pub const CONTEXTS_FILE: &str = "index.contexts";
pub const RELATIONS_FILE: &str = "index.relations";
pub const EXCERPTS_FILE: &str = "index.excerpts";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndexConfig {
    /// Length of the block prefixes.
    pub prefix_len: usize,
    /// Shortest prefix a query may use.
    pub min_prefix: usize,
    /// Largest intermediate list a query may produce.
    pub max_postings: usize,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            prefix_len: 4,
            min_prefix: 1,
            max_postings: 10_000_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("context ids must be dense and increasing: expected {expected}, found {found}")]
    UnsortedContexts { expected: u32, found: u32 },
    #[error("too many contexts or words for 32-bit ids")]
    IdOverflow,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown context {0}")]
    UnknownContext(u32),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Words sharing a block key, with their postings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub key: String,
    /// Word ids of the block; word ids follow vocabulary order.
    pub words: Range<u32>,
    pub list: ContextList,
}

/// The first `k` characters of a word; shorter words are their own key.
pub fn block_key(word: &str, k: usize) -> String {
    word.chars().take(k).collect()
}

#[derive(Debug, Clone)]
pub struct Index {
    config: IndexConfig,
    num_contexts: u32,
    vocab: Vec<String>,
    blocks: Vec<Block>,
    /// Block of each word id.
    word_block: Vec<u32>,
    entity_postings: ContextList,
    ontology: Ontology,
    excerpts: ExcerptStore,
    generation: u64,
}

impl Index {
    pub(crate) fn assemble(
        config: IndexConfig,
        num_contexts: u32,
        vocab: Vec<String>,
        blocks: Vec<Block>,
        entity_postings: ContextList,
        ontology: Ontology,
        excerpts: ExcerptStore,
    ) -> Index {
        let mut word_block = vec![0u32; vocab.len()];
        for (b, block) in blocks.iter().enumerate() {
            for w in block.words.clone() {
                word_block[w as usize] = b as u32;
            }
        }
        let mut index = Index {
            config,
            num_contexts,
            vocab,
            blocks,
            word_block,
            entity_postings,
            ontology,
            excerpts,
            generation: 0,
        };
        let [c, r, e] = index.bodies();
        index.generation = format::generation(&[&c, &r, &e]);
        index
    }

    fn bodies(&self) -> [Vec<u8>; 3] {
        let contexts = format::ContextsFile {
            prefix_len: self.config.prefix_len,
            min_prefix: self.config.min_prefix,
            num_contexts: self.num_contexts,
            vocab: self.vocab.clone(),
            entity_postings: self.entity_postings.clone(),
            blocks: self.blocks.clone(),
        };
        [
            format::encode_contexts(&contexts),
            format::encode_relations(&self.ontology),
            format::encode_excerpts(&self.excerpts),
        ]
    }

    /// Contents of `index.contexts`, `index.relations` and `index.excerpts`.
    pub fn to_files(&self) -> [Vec<u8>; 3] {
        self.bodies()
            .map(|body| format::with_header(&body, self.generation))
    }

    pub fn from_files(
        contexts: &[u8],
        relations: &[u8],
        excerpts: &[u8],
    ) -> Result<Index, IndexError> {
        let (g1, cbody) = format::split_header(contexts)?;
        let (g2, rbody) = format::split_header(relations)?;
        let (g3, ebody) = format::split_header(excerpts)?;
        if g1 != g2 || g1 != g3 {
            return Err(FormatError::GenerationMismatch.into());
        }
        if format::generation(&[cbody, rbody, ebody]) != g1 {
            return Err(FormatError::Corrupt.into());
        }
        let file = format::decode_contexts_body(cbody)?;
        let ontology = format::decode_relations_body(rbody)?;
        let excerpts = format::decode_excerpts_body(ebody)?;
        format::check_entities(&file.entity_postings, ontology.num_entities())?;
        for b in &file.blocks {
            format::check_entities(&b.list, ontology.num_entities())?;
        }
        if excerpts.len() != file.num_contexts as usize {
            return Err(
                FormatError::Invalid("excerpt count differs from context count".into()).into(),
            );
        }
        let config = IndexConfig {
            prefix_len: file.prefix_len,
            min_prefix: file.min_prefix,
            ..IndexConfig::default()
        };
        let mut index = Index::assemble(
            config,
            file.num_contexts,
            file.vocab,
            file.blocks,
            file.entity_postings,
            ontology,
            excerpts,
        );
        index.generation = g1;
        Ok(index)
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<(), IndexError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|source| IndexError::Io {
            path: dir.into(),
            source,
        })?;
        let names = [CONTEXTS_FILE, RELATIONS_FILE, EXCERPTS_FILE];
        for (name, bytes) in names.iter().zip(self.to_files()) {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|source| IndexError::Io { path, source })?;
        }
        Ok(())
    }

    pub fn open(dir: impl AsRef<Path>) -> Result<Index, IndexError> {
        let dir = dir.as_ref();
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read(&path).map_err(|source| IndexError::Io { path, source })
        };
        Index::from_files(
            &read(CONTEXTS_FILE)?,
            &read(RELATIONS_FILE)?,
            &read(EXCERPTS_FILE)?,
        )
    }

    pub fn config(&self) -> &IndexConfig {
        &self.config
    }

    pub fn set_max_postings(&mut self, max: usize) {
        self.config.max_postings = max;
    }

    pub fn set_min_prefix(&mut self, min: usize) {
        self.config.min_prefix = min;
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn num_contexts(&self) -> u32 {
        self.num_contexts
    }

    pub fn num_postings(&self) -> usize {
        self.blocks.iter().map(|b| b.list.len()).sum()
    }

    pub fn ontology(&self) -> &Ontology {
        &self.ontology
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.vocab.get(id as usize).map(String::as_str)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, key: &str) -> Option<&Block> {
        let i = self.blocks.partition_point(|b| b.key.as_str() < key);
        self.blocks.get(i).filter(|b| b.key == key)
    }

    /// Every entity occurrence in the collection.
    pub fn entity_postings(&self) -> &ContextList {
        &self.entity_postings
    }

    /// Ids of the words starting with `prefix` (already lowercased).
    pub fn word_range(&self, prefix: &str) -> Range<u32> {
        let lo = self.vocab.partition_point(|w| w.as_str() < prefix);
        let len = self.vocab[lo..].partition_point(|w| w.starts_with(prefix));
        lo as u32..(lo + len) as u32
    }

    /// Postings for `prefix*` or for an exact word; matching is
    /// case-insensitive. Unknown words give an empty list.
    pub fn fetch_block(&self, pattern: &str) -> ContextList {
        let lower = crate::nlp::normalize_word(pattern);
        match lower.strip_suffix('*') {
            Some(prefix) => self.fetch_words(self.word_range(prefix)),
            None => match self.vocab.binary_search(&lower) {
                Ok(id) => self.fetch_words(id as u32..id as u32 + 1),
                Err(_) => ContextList::new(),
            },
        }
    }

    /// Word postings for the word ids in `range`, plus the entity postings
    /// of the contexts they occur in.
    pub fn fetch_words(&self, range: Range<u32>) -> ContextList {
        if range.is_empty() {
            return ContextList::new();
        }
        let first = self.word_block[range.start as usize] as usize;
        let last = self.word_block[range.end as usize - 1] as usize;
        if first == last && self.blocks[first].words == range {
            return self.blocks[first].list.clone();
        }
        let mut parts = Vec::with_capacity(last - first + 1);
        for block in &self.blocks[first..=last] {
            let list = &block.list;
            let mut out = ContextList::new();
            for (_, run) in list.context_runs() {
                let words = run.clone().filter(|&i| {
                    list.items[i] < ENTITY_BASE && range.contains(&(list.items[i] as u32))
                });
                let words: Vec<usize> = words.collect();
                if words.is_empty() {
                    continue;
                }
                words.into_iter().for_each(|i| out.push(list.get(i)));
                run.filter(|&i| list.items[i] >= ENTITY_BASE)
                    .for_each(|i| out.push(list.get(i)));
            }
            parts.push(out);
        }
        if parts.len() == 1 {
            return parts.pop().unwrap();
        }
        let refs: Vec<&ContextList> = parts.iter().collect();
        ops::union(&refs)
    }

    pub fn excerpt(&self, context: u32) -> Result<Excerpt, IndexError> {
        self.excerpts
            .excerpt(context)
            .ok_or(IndexError::UnknownContext(context))
    }
}
