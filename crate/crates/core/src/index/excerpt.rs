use serde::Serialize;

use crate::corpus::Corpus;
use crate::nlp::{align_tokens, Context, Item};
use crate::ontology::Ontology;

type TokenSpans = Vec<Option<(usize, usize)>>;

/// Byte range of a context item within its excerpt text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ItemSpan {
    pub pos: u32,
    pub start: u32,
    pub end: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcerptRecord {
    pub text: u32,
    /// Byte ranges of the text that belong to the context.
    pub active: Vec<(u32, u32)>,
    pub items: Vec<ItemSpan>,
}

/// Texts of the sentences contexts were drawn from, and where each context
/// lies within them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExcerptStore {
    pub docs: Vec<(String, String)>,
    pub texts: Vec<(u32, String)>,
    pub records: Vec<ExcerptRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub start: u32,
    pub end: u32,
    pub active: bool,
}

/// A sentence with the parts outside the context marked inactive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Excerpt {
    pub context: u32,
    pub doc: String,
    pub title: String,
    pub text: String,
    pub segments: Vec<Segment>,
    pub items: Vec<ItemSpan>,
}

impl Excerpt {
    pub fn segment_text(&self, s: &Segment) -> &str {
        &self.text[s.start as usize..s.end as usize]
    }

    /// Active segments joined by single spaces.
    pub fn active_text(&self) -> String {
        self.segments
            .iter()
            .filter(|s| s.active)
            .map(|s| self.segment_text(s).trim())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl ExcerptStore {
    pub fn build(contexts: &[Context], corpus: Option<&Corpus>, ontology: &Ontology) -> Self {
        match corpus {
            Some(corpus) => Self::from_corpus(contexts, corpus),
            None => Self::synthesized(contexts, ontology),
        }
    }

    fn from_corpus(contexts: &[Context], corpus: &Corpus) -> Self {
        let docs = corpus
            .documents()
            .iter()
            .map(|d| (d.id.clone(), d.title.clone()))
            .collect();
        let mut texts: Vec<(u32, String)> = Vec::new();
        let mut records = Vec::with_capacity(contexts.len());
        let mut current: Option<(u32, u32)> = None;
        // Byte offset of each token of the current text, keyed by sentence.
        let mut offsets: Vec<(u32, TokenSpans)> = Vec::new();

        for ctx in contexts {
            let first = ctx
                .tokens
                .iter()
                .map(|t| t.sentence)
                .min()
                .unwrap_or(ctx.sentence);
            let last = ctx
                .tokens
                .iter()
                .map(|t| t.sentence)
                .max()
                .unwrap_or(ctx.sentence);
            if current != Some((first, last)) {
                current = Some((first, last));
                offsets.clear();
                let mut text = String::new();
                for sid in first..=last {
                    let Some(sentence) = corpus.sentence(sid) else {
                        continue;
                    };
                    if !text.is_empty() {
                        text.push(' ');
                    }
                    let base = text.len();
                    text.push_str(&sentence.text);
                    let spans = align_tokens(&sentence.text, &sentence.tokens)
                        .into_iter()
                        .map(|s| s.map(|(a, b)| (a + base, b + base)))
                        .collect();
                    offsets.push((sid, spans));
                }
                texts.push((ctx.doc, text));
            }
            let text = &texts.last().unwrap().1;
            let lookup = |sentence: u32, token: u32| {
                offsets
                    .iter()
                    .find(|(s, _)| *s == sentence)
                    .and_then(|(_, spans)| spans.get(token as usize).copied().flatten())
            };
            let mut ranges: Vec<(usize, usize)> = ctx
                .tokens
                .iter()
                .filter_map(|t| lookup(t.sentence, t.token))
                .collect();
            ranges.sort_unstable();
            let active = merge_ranges(text, ranges);
            let items = ctx
                .items
                .iter()
                .filter_map(|it| {
                    let (start, end) = lookup(it.source.sentence, it.source.token)?;
                    Some(ItemSpan {
                        pos: it.pos,
                        start: start as u32,
                        end: end as u32,
                    })
                })
                .collect();
            records.push(ExcerptRecord {
                text: texts.len() as u32 - 1,
                active,
                items,
            });
        }
        ExcerptStore {
            docs,
            texts,
            records,
        }
    }

    /// Excerpts rendered from the context items alone.
    fn synthesized(contexts: &[Context], ontology: &Ontology) -> Self {
        let num_docs = contexts.iter().map(|c| c.doc + 1).max().unwrap_or(0);
        let docs = (0..num_docs)
            .map(|d| (format!("doc{d}"), String::new()))
            .collect();
        let mut texts = Vec::with_capacity(contexts.len());
        let mut records = Vec::with_capacity(contexts.len());
        for ctx in contexts {
            let mut text = String::new();
            let mut items = Vec::with_capacity(ctx.items.len());
            for it in &ctx.items {
                if !text.is_empty() {
                    text.push(' ');
                }
                let start = text.len() as u32;
                match &it.item {
                    Item::Word(w) => text.push_str(w),
                    Item::Entity(e) => text.push_str(&ontology.entity_name(*e).replace('_', " ")),
                }
                items.push(ItemSpan {
                    pos: it.pos,
                    start,
                    end: text.len() as u32,
                });
            }
            let active = if text.is_empty() {
                Vec::new()
            } else {
                vec![(0, text.len() as u32)]
            };
            records.push(ExcerptRecord {
                text: texts.len() as u32,
                active,
                items,
            });
            texts.push((ctx.doc, text));
        }
        ExcerptStore {
            docs,
            texts,
            records,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn excerpt(&self, context: u32) -> Option<Excerpt> {
        let record = self.records.get(context as usize)?;
        let (doc, text) = self.texts.get(record.text as usize)?;
        let (doc_id, title) = self.docs.get(*doc as usize).cloned().unwrap_or_default();
        let mut segments = Vec::new();
        let mut cursor = 0u32;
        for &(start, end) in &record.active {
            if start > cursor {
                segments.push(Segment {
                    start: cursor,
                    end: start,
                    active: false,
                });
            }
            segments.push(Segment {
                start,
                end,
                active: true,
            });
            cursor = end;
        }
        if (cursor as usize) < text.len() {
            segments.push(Segment {
                start: cursor,
                end: text.len() as u32,
                active: false,
            });
        }
        Some(Excerpt {
            context,
            doc: doc_id,
            title,
            text: text.clone(),
            segments,
            items: record.items.clone(),
        })
    }
}

/// Sorted ranges merged when only whitespace separates them.
fn merge_ranges(text: &str, ranges: Vec<(usize, usize)>) -> Vec<(u32, u32)> {
    let mut out: Vec<(u32, u32)> = Vec::new();
    for (start, end) in ranges {
        if let Some(last) = out.last_mut() {
            let gap_start = last.1 as usize;
            if start <= gap_start || text[gap_start..start].trim().is_empty() {
                last.1 = last.1.max(end as u32);
                continue;
            }
        }
        out.push((start as u32, end as u32));
    }
    out
}
