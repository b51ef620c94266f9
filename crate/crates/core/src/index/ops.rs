//! Operations on context lists.

use super::posting::{item_entity, ContextList, EntityList, Posting};
use crate::ontology::EntityId;

/// Postings of the contexts present in every input. Word postings of all
/// inputs are kept; postings present in several inputs (the shared entity
/// postings) appear once.
pub fn intersect(lists: &[&ContextList]) -> ContextList {
    match lists {
        [] => ContextList::new(),
        [only] => (*only).clone(),
        _ => {
            let mut common = lists[0].context_ids();
            for l in &lists[1..] {
                let ids = l.context_ids();
                common = sorted_intersection(&common, &ids);
            }
            let mut postings: Vec<Posting> = Vec::new();
            for l in lists {
                postings.extend(restrict(l, &common).iter());
            }
            let mut merged = ContextList::from_postings(postings);
            dedup(&mut merged);
            merged
        }
    }
}

/// All postings of the inputs, sorted, with duplicates removed.
pub fn union(lists: &[&ContextList]) -> ContextList {
    let postings: Vec<Posting> = lists.iter().flat_map(|l| l.iter()).collect();
    let mut merged = ContextList::from_postings(postings);
    dedup(&mut merged);
    merged
}

fn sorted_intersection(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn dedup(list: &mut ContextList) {
    let mut out = ContextList::with_capacity(list.len());
    for p in list.iter() {
        let n = out.len();
        if n > 0
            && out.contexts[n - 1] == p.context
            && out.items[n - 1] == p.item
            && out.positions[n - 1] == p.position
        {
            out.witness[n - 1] |= p.witness;
            continue;
        }
        out.push(p);
    }
    *list = out;
}

/// Postings of `list` whose context is in the sorted `contexts`.
pub fn restrict(list: &ContextList, contexts: &[u32]) -> ContextList {
    let mut out = ContextList::new();
    for (c, range) in list.context_runs() {
        if contexts.binary_search(&c).is_ok() {
            range.for_each(|i| out.push(list.get(i)));
        }
    }
    out
}

/// Entities occurring in `list`, optionally restricted to the sorted
/// `restrict_to`, with summed posting scores.
pub fn entities_in_contexts(list: &ContextList, restrict_to: Option<&[EntityId]>) -> EntityList {
    let mut pairs: Vec<(EntityId, u64)> = list
        .iter()
        .filter_map(|p| p.entity().map(|e| (e, p.score as u64)))
        .filter(|(e, _)| restrict_to.is_none_or(|r| r.binary_search(e).is_ok()))
        .collect();
    pairs.sort_unstable_by_key(|&(e, _)| e);
    let mut out = EntityList::default();
    for (e, s) in pairs {
        if out.entities.last() == Some(&e) {
            *out.scores.last_mut().unwrap() += s;
        } else {
            out.entities.push(e);
            out.scores.push(s);
        }
    }
    out
}

/// Postings of the contexts that contain an entity of `entities`. The
/// matching entity postings are marked as witnesses.
pub fn filter_contexts_by_entities(list: &ContextList, entities: &EntityList) -> ContextList {
    let mut out = ContextList::new();
    for (_, range) in list.context_runs() {
        let hit = range
            .clone()
            .any(|i| item_entity(list.items[i]).is_some_and(|e| entities.contains(e)));
        if !hit {
            continue;
        }
        for i in range {
            let mut p = list.get(i);
            if p.entity().is_some_and(|e| entities.contains(e)) {
                p.witness = true;
            }
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::posting::entity_item;

    fn list(postings: &[(u32, u64)]) -> ContextList {
        ContextList::from_postings(
            postings
                .iter()
                .map(|&(context, item)| Posting {
                    context,
                    item,
                    score: 1,
                    position: 1,
                    witness: false,
                })
                .collect(),
        )
    }

    #[test]
    fn intersect_merges_words_and_dedups_entities() {
        let e = entity_item(EntityId(3));
        let a = list(&[(1, 10), (1, e), (2, 10), (2, e)]);
        let b = list(&[(2, 20), (2, e), (5, 20)]);
        let c = intersect(&[&a, &b]);
        assert_eq!(c.contexts, [2, 2, 2]);
        assert_eq!(c.items, [10, 20, e]);
        assert!(c.validate().is_ok());
        assert_eq!(intersect(&[&a]), a);
        assert!(intersect(&[&a, &list(&[(9, 1)])]).is_empty());
    }

    #[test]
    fn entity_aggregation_and_filtering() {
        let e1 = entity_item(EntityId(1));
        let e2 = entity_item(EntityId(2));
        let l = list(&[(1, 5), (1, e1), (2, 5), (2, e1), (2, e2), (3, e2)]);
        let all = entities_in_contexts(&l, None);
        assert_eq!(all.entities, [EntityId(1), EntityId(2)]);
        assert_eq!(all.scores, [2, 2]);
        let only = entities_in_contexts(&l, Some(&[EntityId(2)]));
        assert_eq!(only.entities, [EntityId(2)]);

        let f = filter_contexts_by_entities(&l, &EntityList::from_ids([EntityId(1)]));
        assert_eq!(f.context_ids(), [1, 2]);
        assert_eq!(f.iter().filter(|p| p.witness).count(), 2);
        assert!(filter_contexts_by_entities(&l, &EntityList::default()).is_empty());
    }
}
