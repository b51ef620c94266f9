use crate::ontology::EntityId;

/// Entity item ids start here, so entities sort after all words.
pub const ENTITY_BASE: u64 = 1 << 32;

pub fn entity_item(entity: EntityId) -> u64 {
    ENTITY_BASE + entity.0 as u64
}

pub fn item_entity(item: u64) -> Option<EntityId> {
    (item >= ENTITY_BASE).then(|| EntityId((item - ENTITY_BASE) as u32))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub context: u32,
    pub item: u64,
    pub score: u32,
    pub position: u32,
    pub witness: bool,
}

impl Posting {
    pub fn entity(&self) -> Option<EntityId> {
        item_entity(self.item)
    }

    fn key(&self) -> (u32, u64, u32) {
        (self.context, self.item, self.position)
    }
}

/// Postings in columns, sorted by (context, item, position).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContextList {
    pub contexts: Vec<u32>,
    pub items: Vec<u64>,
    pub scores: Vec<u32>,
    pub positions: Vec<u32>,
    /// Entity postings that matched a subquery in `filter_contexts_by_entities`.
    pub witness: Vec<bool>,
}

impl ContextList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        ContextList {
            contexts: Vec::with_capacity(n),
            items: Vec::with_capacity(n),
            scores: Vec::with_capacity(n),
            positions: Vec::with_capacity(n),
            witness: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    pub fn push(&mut self, p: Posting) {
        self.contexts.push(p.context);
        self.items.push(p.item);
        self.scores.push(p.score);
        self.positions.push(p.position);
        self.witness.push(p.witness);
    }

    pub fn get(&self, i: usize) -> Posting {
        Posting {
            context: self.contexts[i],
            item: self.items[i],
            score: self.scores[i],
            position: self.positions[i],
            witness: self.witness[i],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Posting> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }

    pub fn from_postings(mut postings: Vec<Posting>) -> Self {
        postings.sort_by_key(Posting::key);
        let mut out = ContextList::with_capacity(postings.len());
        postings.into_iter().for_each(|p| out.push(p));
        out
    }

    /// Runs of equal context id as index ranges.
    pub fn context_runs(&self) -> impl Iterator<Item = (u32, std::ops::Range<usize>)> + '_ {
        let mut i = 0;
        std::iter::from_fn(move || {
            if i >= self.len() {
                return None;
            }
            let c = self.contexts[i];
            let start = i;
            while i < self.len() && self.contexts[i] == c {
                i += 1;
            }
            Some((c, start..i))
        })
    }

    /// Distinct context ids, ascending.
    pub fn context_ids(&self) -> Vec<u32> {
        self.context_runs().map(|(c, _)| c).collect()
    }

    /// Checks column lengths and the sort order.
    pub fn validate(&self) -> Result<(), &'static str> {
        let n = self.len();
        if self.items.len() != n
            || self.scores.len() != n
            || self.positions.len() != n
            || self.witness.len() != n
        {
            return Err("column lengths differ");
        }
        for i in 1..n {
            if self.get(i - 1).key() > self.get(i).key() {
                return Err("postings out of order");
            }
        }
        Ok(())
    }
}

/// Entities with aggregated scores, sorted by id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntityList {
    pub entities: Vec<EntityId>,
    pub scores: Vec<u64>,
}

impl EntityList {
    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn contains(&self, e: EntityId) -> bool {
        self.entities.binary_search(&e).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = (EntityId, u64)> + '_ {
        self.entities
            .iter()
            .copied()
            .zip(self.scores.iter().copied())
    }

    /// Unit-score list from arbitrary ids.
    pub fn from_ids(ids: impl IntoIterator<Item = EntityId>) -> Self {
        let mut entities: Vec<EntityId> = ids.into_iter().collect();
        entities.sort_unstable();
        entities.dedup();
        let scores = vec![1; entities.len()];
        EntityList { entities, scores }
    }
}
