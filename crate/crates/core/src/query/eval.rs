use std::collections::BTreeMap;

use serde::Serialize;

use super::ast::{Arc, NodeRef, OwItem, QueryNode, QueryTree};
use super::rank::{rank_results, RankOptions};
use super::QueryError;
use crate::index::{
    filter_contexts_by_entities, intersect, ContextList, EntityList, Index, ENTITY_BASE,
};
use crate::ontology::{Direction, EntityId};

/// Why an entity matches one of the root's arcs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// A context satisfying an occurs-with arc; `weight` sums the scores of
    /// the matched postings.
    Context {
        arc: usize,
        context: u32,
        weight: u64,
    },
    Fact {
        arc: usize,
        relation: String,
        direction: Direction,
        subject: EntityId,
        object: EntityId,
    },
}

impl Evidence {
    pub fn arc(&self) -> usize {
        match self {
            Evidence::Context { arc, .. } | Evidence::Fact { arc, .. } => *arc,
        }
    }

    pub fn weight(&self) -> u64 {
        match self {
            Evidence::Context { weight, .. } => *weight,
            Evidence::Fact { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultGroup {
    pub entity: EntityId,
    pub score: u64,
    pub evidence: Vec<Evidence>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResultSet {
    /// Best first.
    pub groups: Vec<ResultGroup>,
}

impl ResultSet {
    pub fn total(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn entities(&self) -> Vec<EntityId> {
        let mut out: Vec<EntityId> = self.groups.iter().map(|g| g.entity).collect();
        out.sort_unstable();
        out
    }
}

/// Evaluates and ranks a query.
pub fn evaluate(q: &QueryTree, index: &Index) -> Result<ResultSet, QueryError> {
    evaluate_with(q, index, &RankOptions::default())
}

pub fn evaluate_with(
    q: &QueryTree,
    index: &Index,
    options: &RankOptions,
) -> Result<ResultSet, QueryError> {
    let groups = evaluate_node(&q.root, index)?;
    Ok(rank_results(groups, index.ontology(), options))
}

/// Entities matching `node` with their evidence, sorted by entity id.
pub(crate) fn evaluate_node(
    node: &QueryNode,
    index: &Index,
) -> Result<Vec<ResultGroup>, QueryError> {
    let ontology = index.ontology();
    let base: Vec<EntityId> = match node.node {
        NodeRef::Entity(e) => vec![e],
        NodeRef::Class(c) => ontology
            .instances_of(c)
            .map_err(|_| QueryError::UnknownClass(c.0.to_string()))?,
    };
    let mut groups: BTreeMap<EntityId, ResultGroup> = base
        .into_iter()
        .map(|e| {
            (
                e,
                ResultGroup {
                    entity: e,
                    score: 0,
                    evidence: Vec::new(),
                },
            )
        })
        .collect();

    for (i, arc) in node.arcs.iter().enumerate() {
        if groups.is_empty() {
            break;
        }
        match arc {
            Arc::Relation {
                name,
                direction,
                target,
            } => {
                let rel = ontology
                    .relation(name)
                    .ok_or_else(|| QueryError::UnknownRelation(name.clone()))?;
                let allowed = node_denotation(target, index)?;
                groups.retain(|&e, group| {
                    let mut hit = false;
                    for &(_, o) in rel.image_of(*direction, e) {
                        if allowed.contains(o) {
                            hit = true;
                            group.score += 1;
                            group.evidence.push(Evidence::Fact {
                                arc: i,
                                relation: name.clone(),
                                direction: *direction,
                                subject: e,
                                object: o,
                            });
                        }
                    }
                    hit
                });
            }
            Arc::OccursWith(items) => {
                let candidates: Vec<EntityId> = groups.keys().copied().collect();
                let hits = occurs_with(&candidates, items, index)?;
                groups.retain(|e, _| hits.contains_key(e));
                for (e, contexts) in hits {
                    let group = groups.get_mut(&e).expect("hits are candidates");
                    for (context, weight) in contexts {
                        group.score += weight;
                        group.evidence.push(Evidence::Context {
                            arc: i,
                            context,
                            weight,
                        });
                    }
                }
            }
        }
    }
    Ok(groups.into_values().collect())
}

/// Entity set of a node.
pub fn node_denotation(node: &QueryNode, index: &Index) -> Result<EntityList, QueryError> {
    if node.arcs.is_empty() {
        if let NodeRef::Entity(e) = node.node {
            return Ok(EntityList::from_ids([e]));
        }
    }
    Ok(EntityList::from_ids(
        evaluate_node(node, index)?.into_iter().map(|g| g.entity),
    ))
}

fn check_size(list: &ContextList, index: &Index) -> Result<(), QueryError> {
    let limit = index.config().max_postings;
    if list.len() > limit {
        return Err(QueryError::TooBroad {
            postings: list.len(),
            limit,
        });
    }
    Ok(())
}

/// The postings of contexts containing every word and prefix item. With no
/// such items, every entity occurrence.
pub(crate) fn word_contexts(words: &[&OwItem], index: &Index) -> Result<ContextList, QueryError> {
    let mut lists = Vec::with_capacity(words.len());
    for item in words {
        let list = match item {
            OwItem::Word(w) => index.fetch_block(w),
            OwItem::Prefix(p) => {
                let min = index.config().min_prefix;
                if p.chars().count() < min {
                    return Err(QueryError::PrefixTooShort {
                        prefix: p.clone(),
                        min,
                    });
                }
                index.fetch_words(index.word_range(p))
            }
            OwItem::Node(_) => continue,
        };
        check_size(&list, index)?;
        if list.is_empty() {
            return Ok(ContextList::new());
        }
        lists.push(list);
    }
    if lists.is_empty() {
        let all = index.entity_postings();
        check_size(all, index)?;
        return Ok(all.clone());
    }
    let refs: Vec<&ContextList> = lists.iter().collect();
    Ok(intersect(&refs))
}

/// Contexts of `candidates` satisfying an occurs-with arc, with weights.
fn occurs_with(
    candidates: &[EntityId],
    items: &[OwItem],
    index: &Index,
) -> Result<BTreeMap<EntityId, Vec<(u32, u64)>>, QueryError> {
    let words: Vec<&OwItem> = items
        .iter()
        .filter(|i| !matches!(i, OwItem::Node(_)))
        .collect();
    let mut list = word_contexts(&words, index)?;
    for item in items {
        if let OwItem::Node(n) = item {
            if list.is_empty() {
                break;
            }
            let den = node_denotation(n, index)?;
            list = filter_contexts_by_entities(&list, &den);
        }
    }
    Ok(context_hits(&list, candidates))
}

/// For each candidate entity, the contexts of `list` it occurs in and their
/// weights (word posting scores plus witness entity scores).
pub(crate) fn context_hits(
    list: &ContextList,
    candidates: &[EntityId],
) -> BTreeMap<EntityId, Vec<(u32, u64)>> {
    let mut hits: BTreeMap<EntityId, Vec<(u32, u64)>> = BTreeMap::new();
    for (context, run) in list.context_runs() {
        let weight: u64 = run
            .clone()
            .filter(|&i| list.items[i] < ENTITY_BASE || list.witness[i])
            .map(|i| list.scores[i] as u64)
            .sum();
        let mut seen: Vec<EntityId> = Vec::new();
        for i in run {
            if let Some(e) = crate::index::item_entity(list.items[i]) {
                if candidates.binary_search(&e).is_ok() && !seen.contains(&e) {
                    seen.push(e);
                    hits.entry(e).or_default().push((context, weight));
                }
            }
        }
    }
    hits
}
