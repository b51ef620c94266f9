//! Slow reference implementations for checking the index and the query
//! engine: a query interpreter that scans every context and fact, and
//! generators for random desk-scale instances.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::nlp::{Context, ContextId, ContextItem, Item, SourceToken};
use crate::ontology::{ClassId, Direction, EntityId, Ontology};
use crate::query::{compatible, Arc, NodeRef, OwItem, QueryNode, QueryTree};

/// Words and entities of one context, as the scan sees them.
struct ScanContext {
    words: Vec<String>,
    entities: BTreeSet<EntityId>,
}

pub struct Scanner<'a> {
    ontology: &'a Ontology,
    contexts: Vec<ScanContext>,
}

impl<'a> Scanner<'a> {
    pub fn new(contexts: &[Context], ontology: &'a Ontology) -> Self {
        let contexts = contexts
            .iter()
            .map(|c| {
                let mut words = Vec::new();
                let mut entities = BTreeSet::new();
                for it in &c.items {
                    match &it.item {
                        Item::Word(w) => words.push(w.to_lowercase()),
                        Item::Entity(e) => {
                            entities.insert(*e);
                        }
                    }
                }
                ScanContext { words, entities }
            })
            .collect();
        Scanner { ontology, contexts }
    }

    /// Entities matching the query.
    pub fn evaluate(&self, q: &QueryTree) -> BTreeSet<EntityId> {
        self.den(&q.root)
    }

    fn den(&self, node: &QueryNode) -> BTreeSet<EntityId> {
        let o = self.ontology;
        let mut set: BTreeSet<EntityId> = match node.node {
            NodeRef::Entity(e) => BTreeSet::from([e]),
            NodeRef::Class(c) => o.entities().filter(|&e| o.is_instance_of(e, c)).collect(),
        };
        for arc in &node.arcs {
            match arc {
                Arc::Relation {
                    name,
                    direction,
                    target,
                } => {
                    let allowed = self.den(target);
                    let facts = o.relation(name).expect("query is resolved").facts();
                    set.retain(|&e| {
                        facts.iter().any(|&(s, t)| match direction {
                            Direction::Forward => s == e && allowed.contains(&t),
                            Direction::Reverse => t == e && allowed.contains(&s),
                        })
                    });
                }
                Arc::OccursWith(items) => {
                    let subs: Vec<Option<BTreeSet<EntityId>>> = items
                        .iter()
                        .map(|i| {
                            if let OwItem::Node(n) = i {
                                Some(self.den(n))
                            } else {
                                None
                            }
                        })
                        .collect();
                    let matching: Vec<&ScanContext> = self
                        .contexts
                        .iter()
                        .filter(|c| {
                            items.iter().zip(&subs).all(|(item, sub)| match item {
                                OwItem::Word(w) => c.words.iter().any(|x| x == w),
                                OwItem::Prefix(p) => {
                                    c.words.iter().any(|x| x.starts_with(p.as_str()))
                                }
                                OwItem::Node(_) => {
                                    sub.as_ref().unwrap().iter().any(|e| c.entities.contains(e))
                                }
                            })
                        })
                        .collect();
                    set.retain(|e| matching.iter().any(|c| c.entities.contains(e)));
                }
            }
        }
        set
    }

    /// Ids of contexts with a word starting with `prefix`.
    pub fn prefix_contexts(&self, prefix: &str) -> Vec<u32> {
        (0..self.contexts.len() as u32)
            .filter(|&i| {
                self.contexts[i as usize]
                    .words
                    .iter()
                    .any(|w| w.starts_with(prefix))
            })
            .collect()
    }

    /// Ids of contexts containing exactly `word`.
    pub fn word_contexts(&self, word: &str) -> Vec<u32> {
        (0..self.contexts.len() as u32)
            .filter(|&i| self.contexts[i as usize].words.iter().any(|w| w == word))
            .collect()
    }

    pub fn entities_of(&self, context: u32) -> &BTreeSet<EntityId> {
        &self.contexts[context as usize].entities
    }

    /// Occurrence counts of entities over `contexts`, optionally restricted.
    pub fn entity_counts(
        &self,
        contexts: &[u32],
        original: &[Context],
        restrict: Option<&BTreeSet<EntityId>>,
    ) -> BTreeMap<EntityId, u64> {
        let mut out = BTreeMap::new();
        for &c in contexts {
            for it in &original[c as usize].items {
                if let Item::Entity(e) = it.item {
                    if restrict.is_none_or(|r| r.contains(&e)) {
                        *out.entry(e).or_default() += 1;
                    }
                }
            }
        }
        out
    }

    /// The subset of `contexts` containing an entity of `entities`.
    pub fn filter(&self, contexts: &[u32], entities: &BTreeSet<EntityId>) -> Vec<u32> {
        contexts
            .iter()
            .copied()
            .filter(|&c| {
                self.contexts[c as usize]
                    .entities
                    .iter()
                    .any(|e| entities.contains(e))
            })
            .collect()
    }
}

/// Size limits of a random instance.
#[derive(Debug, Clone, Copy)]
pub struct InstanceShape {
    pub max_classes: usize,
    pub max_entities: usize,
    pub max_relations: usize,
    pub max_contexts: usize,
    pub max_words: usize,
    pub max_depth: usize,
    pub max_arcs: usize,
}

impl Default for InstanceShape {
    fn default() -> Self {
        InstanceShape {
            max_classes: 6,
            max_entities: 20,
            max_relations: 3,
            max_contexts: 200,
            max_words: 100,
            max_depth: 3,
            max_arcs: 2,
        }
    }
}

pub struct Instance {
    pub ontology_tsv: String,
    pub ontology: Ontology,
    pub vocab: Vec<String>,
    pub contexts: Vec<Context>,
}

/// A random ontology and context collection. Words come from a three-letter
/// alphabet so that many share prefixes.
pub fn random_instance(rng: &mut impl Rng, shape: &InstanceShape) -> Instance {
    let n_classes = rng.gen_range(1..=shape.max_classes);
    let n_entities = rng.gen_range(1..=shape.max_entities);
    let n_relations = rng.gen_range(0..=shape.max_relations);

    let mut tsv = String::new();
    let class_names: Vec<String> = (0..n_classes).map(|i| format!("K{i}")).collect();
    for (i, c) in class_names.iter().enumerate() {
        let parent = if i == 0 || rng.gen_bool(0.3) {
            "Entity".to_string()
        } else {
            class_names[rng.gen_range(0..i)].clone()
        };
        let _ = writeln!(tsv, "class\t{c}\tsubclass-of\t{parent}");
    }
    for e in 0..n_entities {
        for _ in 0..rng.gen_range(1..=2) {
            let c = class_names.choose(rng).unwrap();
            let _ = writeln!(tsv, "instance\tE{e}\tis-a\t{c}");
        }
    }
    let structure = Ontology::parse_tsv(&tsv).expect("generated taxonomy is valid");
    for r in 0..n_relations {
        let source = class_names.choose(rng).unwrap().clone();
        let target = class_names.choose(rng).unwrap().clone();
        let _ = writeln!(tsv, "relation\tr{r}\t{source}\t{target}");
        let subjects = structure
            .instances_of(structure.class_by_name(&source).unwrap())
            .unwrap();
        let objects = structure
            .instances_of(structure.class_by_name(&target).unwrap())
            .unwrap();
        let mut facts = BTreeSet::new();
        for _ in 0..rng.gen_range(0..=2 * n_entities) {
            if let (Some(s), Some(o)) = (subjects.choose(rng), objects.choose(rng)) {
                facts.insert((*s, *o));
            }
        }
        for (s, o) in facts {
            let _ = writeln!(
                tsv,
                "fact\t{}\tr{r}\t{}",
                structure.entity_name(s),
                structure.entity_name(o)
            );
        }
    }
    let ontology = Ontology::parse_tsv(&tsv).expect("generated ontology is valid");

    let n_words = rng.gen_range(1..=shape.max_words);
    let mut vocab = BTreeSet::new();
    while vocab.len() < n_words {
        let len = rng.gen_range(1..=6);
        let w: String = (0..len)
            .map(|_| ['a', 'b', 'c'][rng.gen_range(0..3)])
            .collect();
        vocab.insert(w);
    }
    let vocab: Vec<String> = vocab.into_iter().collect();

    let n_contexts = rng.gen_range(0..=shape.max_contexts);
    let mut contexts = Vec::with_capacity(n_contexts);
    for id in 0..n_contexts as u32 {
        let n_items = rng.gen_range(1..=8);
        let items = (0..n_items)
            .map(|i| {
                let item = if rng.gen_bool(0.6) {
                    let w = vocab.choose(rng).unwrap();
                    Item::Word(if rng.gen_bool(0.1) {
                        w.to_uppercase()
                    } else {
                        w.clone()
                    })
                } else {
                    Item::Entity(EntityId(rng.gen_range(0..ontology.num_entities() as u32)))
                };
                ContextItem {
                    pos: i + 1,
                    item,
                    source: SourceToken {
                        sentence: id,
                        token: i,
                    },
                }
            })
            .collect();
        contexts.push(Context {
            id: ContextId(id),
            doc: id / 4,
            sentence: id,
            tokens: Vec::new(),
            items,
        });
    }
    Instance {
        ontology_tsv: tsv,
        ontology,
        vocab,
        contexts,
    }
}

/// A random type-correct query over the instance.
pub fn random_query(rng: &mut impl Rng, instance: &Instance, shape: &InstanceShape) -> QueryTree {
    QueryTree {
        root: random_node(rng, instance, shape, 1, None),
    }
}

fn random_ref(rng: &mut impl Rng, ontology: &Ontology, required: Option<ClassId>) -> NodeRef {
    let fits = |n: NodeRef| required.is_none_or(|c| compatible(ontology, n, c));
    if rng.gen_bool(0.3) {
        let entities: Vec<NodeRef> = ontology
            .entities()
            .map(NodeRef::Entity)
            .filter(|&n| fits(n))
            .collect();
        if let Some(n) = entities.choose(rng) {
            return *n;
        }
    }
    let classes: Vec<NodeRef> = ontology
        .classes()
        .map(NodeRef::Class)
        .filter(|&n| fits(n))
        .collect();
    *classes.choose(rng).expect("the required class itself fits")
}

fn random_node(
    rng: &mut impl Rng,
    instance: &Instance,
    shape: &InstanceShape,
    depth: usize,
    required: Option<ClassId>,
) -> QueryNode {
    let o = &instance.ontology;
    let node = random_ref(rng, o, required);
    let mut arcs = Vec::new();
    if depth < shape.max_depth {
        for _ in 0..rng.gen_range(0..=shape.max_arcs) {
            let usable: Vec<(&str, Direction)> = o
                .relations()
                .iter()
                .flat_map(|r| [(r, Direction::Forward), (r, Direction::Reverse)])
                .filter(|(r, d)| compatible(o, node, r.domain(*d)))
                .map(|(r, d)| (r.name.as_str(), d))
                .collect();
            if !usable.is_empty() && rng.gen_bool(0.4) {
                let &(name, direction) = usable.choose(rng).unwrap();
                let range = o.relation(name).unwrap().range(direction);
                let target = random_node(rng, instance, shape, depth + 1, Some(range));
                arcs.push(Arc::Relation {
                    name: name.to_string(),
                    direction,
                    target,
                });
            } else {
                let mut items = Vec::new();
                for _ in 0..rng.gen_range(1..=3) {
                    let w = instance.vocab.choose(rng).unwrap();
                    match rng.gen_range(0..10) {
                        0..=4 => items.push(OwItem::Word(w.clone())),
                        5..=7 => {
                            let len = rng.gen_range(1..=w.len());
                            items.push(OwItem::Prefix(w[..len].to_string()));
                        }
                        _ => items.push(OwItem::Node(random_node(
                            rng,
                            instance,
                            shape,
                            depth + 1,
                            None,
                        ))),
                    }
                }
                arcs.push(Arc::OccursWith(items));
            }
        }
    }
    QueryNode { node, arcs }
}
