use std::collections::{BTreeSet, HashMap};

use super::excerpt::ExcerptStore;
use super::posting::{entity_item, ContextList, Posting, ENTITY_BASE};
use super::{block_key, Block, Index, IndexConfig, IndexError};
use crate::corpus::Corpus;
use crate::nlp::{normalize_word, Context, Item};
use crate::ontology::Ontology;

/// Builds the index. Context ids must be `0, 1, 2, ...` in order. Without a
/// corpus, excerpts are rendered from the context items.
pub fn build_index(
    contexts: &[Context],
    ontology: &Ontology,
    corpus: Option<&Corpus>,
    config: &IndexConfig,
) -> Result<Index, IndexError> {
    if config.prefix_len == 0 {
        return Err(IndexError::Config(
            "prefix length must be at least 1".into(),
        ));
    }
    if contexts.len() > u32::MAX as usize {
        return Err(IndexError::IdOverflow);
    }
    for (i, c) in contexts.iter().enumerate() {
        if c.id.0 != i as u32 {
            return Err(IndexError::UnsortedContexts {
                expected: i as u32,
                found: c.id.0,
            });
        }
    }

    let words: BTreeSet<String> = contexts
        .iter()
        .flat_map(|c| c.items.iter())
        .filter_map(|it| match &it.item {
            Item::Word(w) => Some(normalize_word(w)),
            Item::Entity(_) => None,
        })
        .collect();
    if words.len() as u64 >= ENTITY_BASE {
        return Err(IndexError::IdOverflow);
    }
    let vocab: Vec<String> = words.into_iter().collect();
    let word_ids: HashMap<&str, u32> = vocab
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i as u32))
        .collect();

    let mut blocks: Vec<Block> = Vec::new();
    let mut word_block = Vec::with_capacity(vocab.len());
    for (i, w) in vocab.iter().enumerate() {
        let key = block_key(w, config.prefix_len);
        match blocks.last_mut() {
            Some(b) if b.key == key => b.words.end = i as u32 + 1,
            _ => blocks.push(Block {
                key,
                words: i as u32..i as u32 + 1,
                list: ContextList::new(),
            }),
        }
        word_block.push(blocks.len() as u32 - 1);
    }

    let mut entity_postings = ContextList::new();
    let mut word_postings: Vec<(u32, u64, u32)> = Vec::new();
    let mut entity_row: Vec<Posting> = Vec::new();
    for ctx in contexts {
        word_postings.clear();
        entity_row.clear();
        for it in &ctx.items {
            match &it.item {
                Item::Word(w) => {
                    let id = word_ids[normalize_word(w).as_str()];
                    word_postings.push((word_block[id as usize], id as u64, it.pos));
                }
                Item::Entity(e) => entity_row.push(Posting {
                    context: ctx.id.0,
                    item: entity_item(*e),
                    score: 1,
                    position: it.pos,
                    witness: false,
                }),
            }
        }
        word_postings.sort_unstable();
        entity_row.sort_unstable_by_key(|p| (p.item, p.position));
        entity_row.iter().for_each(|p| entity_postings.push(*p));

        let mut i = 0;
        while i < word_postings.len() {
            let block = word_postings[i].0;
            let list = &mut blocks[block as usize].list;
            while i < word_postings.len() && word_postings[i].0 == block {
                let (_, item, position) = word_postings[i];
                list.push(Posting {
                    context: ctx.id.0,
                    item,
                    score: 1,
                    position,
                    witness: false,
                });
                i += 1;
            }
            entity_row.iter().for_each(|p| list.push(*p));
        }
    }

    let excerpts = ExcerptStore::build(contexts, corpus, ontology);
    Ok(Index::assemble(
        *config,
        contexts.len() as u32,
        vocab,
        blocks,
        entity_postings,
        ontology.clone(),
        excerpts,
    ))
}
