//! Binary encoding of the three index files.
//!
//! Every file starts with the magic `BRIX`, a little-endian `u32` format
//! version and a `u64` generation stamp shared by all three files. All
//! numbers in the bodies are little-endian `u64`; strings are a length
//! followed by UTF-8 bytes.

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::excerpt::{ExcerptRecord, ExcerptStore, ItemSpan};
use super::posting::{item_entity, ContextList, Posting, ENTITY_BASE};
use super::{block_key, Block};
use crate::ontology::{ClassId, EntityId, Ontology, OntologyParts, RelationParts};

pub const MAGIC: &[u8; 4] = b"BRIX";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("not an index file (bad magic)")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated at byte {0}")]
    Truncated(usize),
    #[error("invalid index data: {0}")]
    Invalid(String),
    #[error("index files belong to different builds")]
    GenerationMismatch,
    #[error("index files do not match their generation stamp")]
    Corrupt,
    #[error("invalid ontology tables: {0}")]
    Ontology(#[from] crate::ontology::OntologyError),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::Invalid(msg.into()))
}

#[derive(Default)]
pub(crate) struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn usize(&mut self, v: usize) {
        self.u64(v as u64)
    }

    fn str(&mut self, s: &str) {
        self.usize(s.len());
        self.buf.extend_from_slice(s.as_bytes());
    }

    fn columns(&mut self, list: &ContextList) {
        self.usize(list.len());
        list.contexts.iter().for_each(|&v| self.u64(v as u64));
        list.items.iter().for_each(|&v| self.u64(v));
        list.scores.iter().for_each(|&v| self.u64(v as u64));
        list.positions.iter().for_each(|&v| self.u64(v as u64));
    }

    fn pairs(&mut self, pairs: impl ExactSizeIterator<Item = (u32, u32)>) {
        self.usize(pairs.len());
        for (a, b) in pairs {
            self.u64(a as u64);
            self.u64(b as u64);
        }
    }
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn bytes(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.buf.len() - self.pos < n {
            return Err(FormatError::Truncated(self.pos));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.bytes(8)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        let v = self.u64()?;
        u32::try_from(v).or_else(|_| invalid(format!("value {v} exceeds 32 bits")))
    }

    /// A count of elements that each take at least `min_size` bytes.
    fn count(&mut self, min_size: usize) -> Result<usize, FormatError> {
        let at = self.pos;
        let n = self.u64()?;
        let remaining = (self.buf.len() - self.pos) as u64;
        if n.saturating_mul(min_size as u64) > remaining {
            return Err(FormatError::Truncated(at));
        }
        Ok(n as usize)
    }

    fn string(&mut self) -> Result<String, FormatError> {
        let n = self.count(1)?;
        let at = self.pos;
        String::from_utf8(self.bytes(n)?.to_vec())
            .or_else(|_| invalid(format!("invalid UTF-8 at byte {at}")))
    }

    fn strings(&mut self) -> Result<Vec<String>, FormatError> {
        let n = self.count(8)?;
        (0..n).map(|_| self.string()).collect()
    }

    fn columns(&mut self) -> Result<ContextList, FormatError> {
        let n = self.count(32)?;
        let mut list = ContextList::with_capacity(n);
        list.contexts = (0..n).map(|_| self.u32()).collect::<Result<_, _>>()?;
        list.items = (0..n).map(|_| self.u64()).collect::<Result<_, _>>()?;
        list.scores = (0..n).map(|_| self.u32()).collect::<Result<_, _>>()?;
        list.positions = (0..n).map(|_| self.u32()).collect::<Result<_, _>>()?;
        list.witness = vec![false; n];
        list.validate().or_else(invalid)?;
        Ok(list)
    }

    fn pairs(&mut self) -> Result<Vec<(u32, u32)>, FormatError> {
        let n = self.count(16)?;
        (0..n).map(|_| Ok((self.u32()?, self.u32()?))).collect()
    }

    fn finish(&self) -> Result<(), FormatError> {
        if self.pos != self.buf.len() {
            return invalid(format!("trailing bytes at {}", self.pos));
        }
        Ok(())
    }
}

/// Generation stamp of a set of file bodies.
pub fn generation(bodies: &[&[u8]]) -> u64 {
    let mut hasher = Sha256::new();
    for body in bodies {
        hasher.update((body.len() as u64).to_le_bytes());
        hasher.update(body);
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

pub fn with_header(body: &[u8], generation: u64) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + body.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&generation.to_le_bytes());
    out.extend_from_slice(body);
    out
}

/// Splits a file into its generation stamp and body.
pub fn split_header(bytes: &[u8]) -> Result<(u64, &[u8]), FormatError> {
    if bytes.len() < HEADER_LEN {
        return if bytes.len() >= 4 && &bytes[..4] != MAGIC {
            Err(FormatError::BadMagic)
        } else {
            Err(FormatError::Truncated(bytes.len()))
        };
    }
    if &bytes[..4] != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let generation = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    Ok((generation, &bytes[HEADER_LEN..]))
}

/// Decoded `index.contexts`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextsFile {
    pub prefix_len: usize,
    pub min_prefix: usize,
    pub num_contexts: u32,
    pub vocab: Vec<String>,
    pub entity_postings: ContextList,
    pub blocks: Vec<Block>,
}

pub fn encode_contexts(file: &ContextsFile) -> Vec<u8> {
    let mut w = Writer::default();
    w.usize(file.prefix_len);
    w.usize(file.min_prefix);
    w.u64(file.num_contexts as u64);
    w.usize(file.vocab.len());
    file.vocab.iter().for_each(|s| w.str(s));
    w.columns(&file.entity_postings);

    w.usize(file.blocks.len());
    let mut offset = 0usize;
    for b in &file.blocks {
        w.str(&b.key);
        w.u64(b.words.start as u64);
        w.u64(b.words.end as u64);
        w.usize(offset);
        w.usize(b.list.len());
        offset += b.list.len() * 32;
    }
    w.usize(offset);
    for b in &file.blocks {
        let mut data = Writer::default();
        data.columns(&b.list);
        // The count is already in the directory.
        w.buf.extend_from_slice(&data.buf[8..]);
    }
    w.buf
}

pub fn decode_contexts_body(body: &[u8]) -> Result<ContextsFile, FormatError> {
    let mut r = Reader::new(body);
    let prefix_len = r.u32()? as usize;
    let min_prefix = r.u32()? as usize;
    if prefix_len == 0 {
        return invalid("prefix length 0");
    }
    let num_contexts = r.u32()?;
    let vocab = r.strings()?;
    if vocab.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("vocabulary not strictly sorted");
    }
    let entity_postings = r.columns()?;
    check_postings(&entity_postings, num_contexts, None)?;

    let n_blocks = r.count(40)?;
    let mut directory = Vec::with_capacity(n_blocks);
    for _ in 0..n_blocks {
        let key = r.string()?;
        let start = r.u32()?;
        let end = r.u32()?;
        let offset = r.u64()?;
        let count = r.u64()?;
        directory.push((key, start..end, offset, count));
    }
    let data_len = r.count(1)?;
    let data = r.bytes(data_len)?;
    r.finish()?;

    let mut blocks = Vec::with_capacity(n_blocks);
    let mut next_word = 0u32;
    for (key, words, offset, count) in directory {
        if words.start != next_word || words.end <= words.start || words.end as usize > vocab.len()
        {
            return invalid(format!("block {key:?} has a bad word range"));
        }
        next_word = words.end;
        if vocab[words.start as usize..words.end as usize]
            .iter()
            .any(|w| block_key(w, prefix_len) != key)
        {
            return invalid(format!("block {key:?} holds words of another prefix"));
        }
        let size = count
            .checked_mul(32)
            .filter(|s| offset.checked_add(*s).is_some_and(|e| e <= data_len as u64));
        let Some(size) = size else {
            return invalid(format!("block {key:?} lies outside the data region"));
        };
        let slice = &data[offset as usize..(offset + size) as usize];
        let mut framed = Vec::with_capacity(8 + slice.len());
        framed.extend_from_slice(&count.to_le_bytes());
        framed.extend_from_slice(slice);
        let list = Reader::new(&framed).columns()?;
        check_postings(&list, num_contexts, Some(&words))?;
        blocks.push(Block { key, words, list });
    }
    if next_word as usize != vocab.len() {
        return invalid("blocks do not cover the vocabulary");
    }
    Ok(ContextsFile {
        prefix_len,
        min_prefix,
        num_contexts,
        vocab,
        entity_postings,
        blocks,
    })
}

fn check_postings(
    list: &ContextList,
    num_contexts: u32,
    words: Option<&std::ops::Range<u32>>,
) -> Result<(), FormatError> {
    for p in list.iter() {
        if p.context >= num_contexts {
            return invalid(format!("context id {} out of range", p.context));
        }
        if p.item < ENTITY_BASE {
            let in_block = words.is_some_and(|w| w.contains(&(p.item as u32)));
            if !in_block {
                return invalid(format!("word item {} outside its block", p.item));
            }
        } else if p.item - ENTITY_BASE > u32::MAX as u64 {
            return invalid(format!("entity item {} out of range", p.item));
        }
    }
    Ok(())
}

pub fn decode_contexts(bytes: &[u8]) -> Result<(u64, ContextsFile), FormatError> {
    let (generation, body) = split_header(bytes)?;
    Ok((generation, decode_contexts_body(body)?))
}

pub fn encode_relations(ontology: &Ontology) -> Vec<u8> {
    let parts = ontology.to_parts();
    let mut w = Writer::default();
    w.usize(parts.class_names.len());
    parts.class_names.iter().for_each(|s| w.str(s));
    w.usize(parts.entity_names.len());
    parts.entity_names.iter().for_each(|s| w.str(s));
    w.pairs(parts.parent_edges.iter().map(|&(c, p)| (c.0, p.0)));
    w.pairs(parts.memberships.iter().map(|&(e, c)| (e.0, c.0)));
    w.usize(ontology.relations().len());
    for rel in ontology.relations() {
        w.str(&rel.name);
        w.u64(rel.source.0 as u64);
        w.u64(rel.target.0 as u64);
        w.pairs(rel.facts().iter().map(|&(s, o)| (s.0, o.0)));
        w.pairs(rel.reverse_facts().iter().map(|&(o, s)| (o.0, s.0)));
    }
    w.buf
}

pub fn decode_relations_body(body: &[u8]) -> Result<Ontology, FormatError> {
    let mut r = Reader::new(body);
    let class_names = r.strings()?;
    let entity_names = r.strings()?;
    let parent_edges = r
        .pairs()?
        .into_iter()
        .map(|(c, p)| (ClassId(c), ClassId(p)))
        .collect();
    let memberships = r
        .pairs()?
        .into_iter()
        .map(|(e, c)| (EntityId(e), ClassId(c)))
        .collect();
    let n = r.count(40)?;
    let mut relations = Vec::with_capacity(n);
    for _ in 0..n {
        let name = r.string()?;
        let source = ClassId(r.u32()?);
        let target = ClassId(r.u32()?);
        let forward = r.pairs()?;
        let reverse = r.pairs()?;
        let mut expected: Vec<(u32, u32)> = forward.iter().map(|&(s, o)| (o, s)).collect();
        expected.sort_unstable();
        if forward.windows(2).any(|w| w[0] >= w[1]) || expected != reverse {
            return invalid(format!("relation {name:?} has inconsistent fact arrays"));
        }
        let facts = forward
            .into_iter()
            .map(|(s, o)| (EntityId(s), EntityId(o)))
            .collect();
        relations.push(RelationParts {
            name,
            source,
            target,
            facts,
        });
    }
    r.finish()?;
    Ok(Ontology::from_parts(OntologyParts {
        class_names,
        entity_names,
        parent_edges,
        memberships,
        relations,
    })?)
}

pub fn decode_relations(bytes: &[u8]) -> Result<(u64, Ontology), FormatError> {
    let (generation, body) = split_header(bytes)?;
    Ok((generation, decode_relations_body(body)?))
}

pub fn encode_excerpts(store: &ExcerptStore) -> Vec<u8> {
    let mut w = Writer::default();
    w.usize(store.docs.len());
    for (id, title) in &store.docs {
        w.str(id);
        w.str(title);
    }
    w.usize(store.texts.len());
    for (doc, text) in &store.texts {
        w.u64(*doc as u64);
        w.str(text);
    }
    let mut region = Writer::default();
    let mut offsets = Vec::with_capacity(store.records.len());
    for rec in &store.records {
        offsets.push(region.buf.len());
        region.u64(rec.text as u64);
        region.pairs(rec.active.iter().copied());
        region.usize(rec.items.len());
        for it in &rec.items {
            region.u64(it.pos as u64);
            region.u64(it.start as u64);
            region.u64(it.end as u64);
        }
    }
    w.usize(offsets.len());
    offsets.iter().for_each(|&o| w.usize(o));
    w.usize(region.buf.len());
    w.buf.extend_from_slice(&region.buf);
    w.buf
}

pub fn decode_excerpts_body(body: &[u8]) -> Result<ExcerptStore, FormatError> {
    let mut r = Reader::new(body);
    let n_docs = r.count(16)?;
    let docs = (0..n_docs)
        .map(|_| Ok((r.string()?, r.string()?)))
        .collect::<Result<Vec<_>, FormatError>>()?;
    let n_texts = r.count(16)?;
    let mut texts = Vec::with_capacity(n_texts);
    for _ in 0..n_texts {
        let doc = r.u32()?;
        if doc as usize >= docs.len() {
            return invalid(format!("document {doc} out of range"));
        }
        texts.push((doc, r.string()?));
    }
    let n_records = r.count(8)?;
    let offsets = (0..n_records)
        .map(|_| r.u64())
        .collect::<Result<Vec<_>, _>>()?;
    let region_len = r.count(1)?;
    let region = r.bytes(region_len)?;
    r.finish()?;

    let mut records = Vec::with_capacity(n_records);
    for offset in offsets {
        if offset >= region_len as u64 {
            return invalid(format!("record offset {offset} out of range"));
        }
        let mut rr = Reader::new(&region[offset as usize..]);
        let text = rr.u32()?;
        let Some((_, t)) = texts.get(text as usize) else {
            return invalid(format!("text {text} out of range"));
        };
        let valid = |a: u32, b: u32| {
            a <= b
                && (b as usize) <= t.len()
                && t.is_char_boundary(a as usize)
                && t.is_char_boundary(b as usize)
        };
        let active = rr.pairs()?;
        if active.iter().any(|&(a, b)| !valid(a, b)) || active.windows(2).any(|w| w[0].1 > w[1].0) {
            return invalid("bad active span");
        }
        let n_items = rr.count(24)?;
        let mut items = Vec::with_capacity(n_items);
        for _ in 0..n_items {
            let (pos, start, end) = (rr.u32()?, rr.u32()?, rr.u32()?);
            if !valid(start, end) {
                return invalid("bad item span");
            }
            items.push(ItemSpan { pos, start, end });
        }
        records.push(ExcerptRecord {
            text,
            active,
            items,
        });
    }
    Ok(ExcerptStore {
        docs,
        texts,
        records,
    })
}

pub fn decode_excerpts(bytes: &[u8]) -> Result<(u64, ExcerptStore), FormatError> {
    let (generation, body) = split_header(bytes)?;
    Ok((generation, decode_excerpts_body(body)?))
}

/// Entity ids referenced by a context list that the ontology does not know.
pub(crate) fn check_entities(list: &ContextList, num_entities: usize) -> Result<(), FormatError> {
    match list
        .iter()
        .find(|p: &Posting| item_entity(p.item).is_some_and(|e| e.0 as usize >= num_entities))
    {
        Some(p) => invalid(format!("entity item {} not in ontology", p.item)),
        None => Ok(()),
    }
}
