use std::collections::HashMap;

use serde::Serialize;

use super::ast::{compatible, Arc, NodePath, NodeRef, OwItem, QueryNode, QueryTree};
use super::eval::{evaluate_node, node_denotation, word_contexts};
use super::reroot::change_root;
use super::QueryError;
use crate::index::{
    entities_in_contexts, filter_contexts_by_entities, EntityList, Index, ENTITY_BASE,
};
use crate::ontology::{ClassId, Direction, EntityId, Ontology};

/// Where the user is typing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Focus {
    /// Refining a class or instance node.
    Node(NodePath),
    /// Adding items to an occurs-with arc of the node at `node`: arc number
    /// `arc`, or a new arc when `None`.
    OccursWith { node: NodePath, arc: Option<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SuggestionKind {
    Word,
    Class,
    Instance,
    Relation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Suggestion {
    pub kind: SuggestionKind,
    pub label: String,
    /// Class, entity or relation name, or space-separated words.
    pub value: String,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub reverse: bool,
    pub score: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Suggestions {
    pub words: Vec<Suggestion>,
    pub classes: Vec<Suggestion>,
    pub instances: Vec<Suggestion>,
    pub relations: Vec<Suggestion>,
    pub preselected: Option<(SuggestionKind, usize)>,
}

impl Suggestions {
    pub fn list(&self, kind: SuggestionKind) -> &[Suggestion] {
        match kind {
            SuggestionKind::Word => &self.words,
            SuggestionKind::Class => &self.classes,
            SuggestionKind::Instance => &self.instances,
            SuggestionKind::Relation => &self.relations,
        }
    }

    pub fn all(&self) -> impl Iterator<Item = &Suggestion> {
        self.words
            .iter()
            .chain(&self.classes)
            .chain(&self.instances)
            .chain(&self.relations)
    }

    pub fn is_empty(&self) -> bool {
        self.all().next().is_none()
    }

    pub fn preselected_entry(&self) -> Option<&Suggestion> {
        self.preselected.and_then(|(k, i)| self.list(k).get(i))
    }
}

/// Candidates for the pre-selected entry, tried in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preselect {
    ExactClass,
    ExactInstance,
    TopRelation,
    TopWord,
    TopClass,
    TopInstance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuggestOptions {
    /// Length of each list.
    pub limit: usize,
    pub priority: Vec<Preselect>,
}

impl Default for SuggestOptions {
    fn default() -> Self {
        SuggestOptions {
            limit: 8,
            priority: vec![
                Preselect::ExactClass,
                Preselect::ExactInstance,
                Preselect::TopRelation,
                Preselect::TopClass,
                Preselect::TopInstance,
                Preselect::TopWord,
            ],
        }
    }
}

fn normalize_name(s: &str) -> String {
    s.to_lowercase().replace('_', " ")
}

fn implicit_query(ontology: &Ontology) -> QueryTree {
    QueryTree {
        root: QueryNode::new(NodeRef::Class(ontology.root())),
    }
}

/// Suggestions for the focus. Without a query, the root is the class of all
/// entities.
pub fn suggest(
    q: Option<&QueryTree>,
    focus: &Focus,
    typed: &str,
    index: &Index,
    options: &SuggestOptions,
) -> Result<Suggestions, QueryError> {
    let ontology = index.ontology();
    let implicit;
    let q = match q {
        Some(q) => q,
        None => {
            implicit = implicit_query(ontology);
            &implicit
        }
    };
    let typed_name = normalize_name(typed.trim());
    let mut out = Suggestions::default();

    match focus {
        Focus::Node(path) => {
            let rerooted = change_root(q, path)?;
            let groups = evaluate_node(&rerooted.root, index)?;
            let hits: Vec<(EntityId, u64)> = groups.iter().map(|g| (g.entity, g.score)).collect();
            let r = EntityList::from_ids(hits.iter().map(|h| h.0));
            let node = &rerooted.root;
            if let NodeRef::Class(c) = node.node {
                out.classes = class_suggestions(ontology, &hits, Some(c), &typed_name, |d| {
                    fits_arcs(ontology, NodeRef::Class(d), &node.arcs)
                });
                out.instances = instance_suggestions(ontology, &hits, &typed_name, |e| {
                    fits_arcs(ontology, NodeRef::Entity(e), &node.arcs)
                });
            }
            out.relations = relation_suggestions(ontology, node.node, &hits, &typed_name);
            out.words = word_suggestions(index, &r, &[], typed)?;
        }
        Focus::OccursWith { node: path, arc } => {
            let mut base = q.clone();
            let mut fixed = Vec::new();
            if let Some(a) = arc {
                let n = base.root.at_mut(path)?;
                match n.arcs.get(*a) {
                    Some(Arc::OccursWith(items)) => fixed = items.clone(),
                    _ => return Err(QueryError::InvalidPath(format!("{path} arc {a}"))),
                }
                n.arcs.remove(*a);
            }
            let rerooted = change_root(&base, path)?;
            let r = node_denotation(&rerooted.root, index)?;
            out.words = word_suggestions(index, &r, &fixed, typed)?;

            let fixed_words: Vec<&OwItem> = fixed
                .iter()
                .filter(|i| !matches!(i, OwItem::Node(_)))
                .collect();
            let mut list = word_contexts(&fixed_words, index)?;
            for item in &fixed {
                if let OwItem::Node(n) = item {
                    list = filter_contexts_by_entities(&list, &node_denotation(n, index)?);
                }
            }
            list = filter_contexts_by_entities(&list, &r);
            let co = entities_in_contexts(&list, None);
            let hits: Vec<(EntityId, u64)> = co.iter().collect();
            out.classes = class_suggestions(ontology, &hits, None, &typed_name, |_| true);
            out.instances = instance_suggestions(ontology, &hits, &typed_name, |_| true);
        }
    }

    for list in [
        &mut out.words,
        &mut out.classes,
        &mut out.instances,
        &mut out.relations,
    ] {
        list.truncate(options.limit);
    }
    out.preselected = preselect(&out, &typed_name, &options.priority);
    Ok(out)
}

/// Whether a node may replace the focus node without breaking the typing
/// of its relation arcs.
fn fits_arcs(ontology: &Ontology, node: NodeRef, arcs: &[Arc]) -> bool {
    arcs.iter().all(|arc| match arc {
        Arc::Relation {
            name, direction, ..
        } => ontology
            .relation(name)
            .is_some_and(|r| compatible(ontology, node, r.domain(*direction))),
        Arc::OccursWith(_) => true,
    })
}

fn sort_suggestions(list: &mut [Suggestion]) {
    list.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.label.cmp(&b.label)));
}

/// Classes (below `below`, when given) with instances among `hits`, scored
/// by the hits' scores plus one per hit.
fn class_suggestions(
    ontology: &Ontology,
    hits: &[(EntityId, u64)],
    below: Option<ClassId>,
    typed: &str,
    fits: impl Fn(ClassId) -> bool,
) -> Vec<Suggestion> {
    let mut closure_cache: HashMap<Vec<ClassId>, Vec<ClassId>> = HashMap::new();
    let mut totals: HashMap<ClassId, u64> = HashMap::new();
    for &(e, score) in hits {
        let direct = ontology.taxonomy().memberships(e).to_vec();
        let classes = closure_cache
            .entry(direct)
            .or_insert_with(|| ontology.classes_of(e));
        for &c in classes.iter() {
            *totals.entry(c).or_default() += score + 1;
        }
    }
    let mut out: Vec<Suggestion> = totals
        .into_iter()
        .filter(|&(c, _)| c != ontology.root())
        .filter(|&(c, _)| below.is_none_or(|b| c != b && ontology.is_subclass_of(c, b)))
        .filter(|&(c, _)| normalize_name(ontology.class_name(c)).starts_with(typed))
        .filter(|&(c, _)| fits(c))
        .map(|(c, score)| Suggestion {
            kind: SuggestionKind::Class,
            label: ontology.class_name(c).to_string(),
            value: ontology.class_name(c).to_string(),
            reverse: false,
            score,
        })
        .collect();
    sort_suggestions(&mut out);
    out
}

fn instance_suggestions(
    ontology: &Ontology,
    hits: &[(EntityId, u64)],
    typed: &str,
    fits: impl Fn(EntityId) -> bool,
) -> Vec<Suggestion> {
    let mut out: Vec<Suggestion> = hits
        .iter()
        .filter(|(e, _)| normalize_name(ontology.entity_name(*e)).starts_with(typed))
        .filter(|(e, _)| fits(*e))
        .map(|&(e, score)| Suggestion {
            kind: SuggestionKind::Instance,
            label: ontology.entity_name(e).to_string(),
            value: ontology.entity_name(e).to_string(),
            reverse: false,
            score: score + 1,
        })
        .collect();
    sort_suggestions(&mut out);
    out
}

/// Relations usable from the node with at least one fact whose subject is
/// a hit, ranked by the number of such facts.
fn relation_suggestions(
    ontology: &Ontology,
    node: NodeRef,
    hits: &[(EntityId, u64)],
    typed: &str,
) -> Vec<Suggestion> {
    let mut out = Vec::new();
    for rel in ontology.relations() {
        if !rel.name.to_lowercase().starts_with(typed) {
            continue;
        }
        for direction in [Direction::Forward, Direction::Reverse] {
            if !compatible(ontology, node, rel.domain(direction)) {
                continue;
            }
            let count: usize = hits
                .iter()
                .map(|&(e, _)| rel.image_of(direction, e).len())
                .sum();
            if count == 0 {
                continue;
            }
            let reverse = direction == Direction::Reverse;
            out.push(Suggestion {
                kind: SuggestionKind::Relation,
                label: if reverse {
                    format!("{} (inverse)", rel.name)
                } else {
                    rel.name.clone()
                },
                value: rel.name.clone(),
                reverse,
                score: count as u64,
            });
        }
    }
    sort_suggestions(&mut out);
    out
}

/// Completed words of `typed` and the word being typed, lowercased. A
/// trailing space means no word is in progress.
fn split_typed(typed: &str) -> (Vec<String>, Option<String>) {
    let mut words: Vec<String> = typed
        .split_whitespace()
        .map(crate::nlp::normalize_word)
        .filter(|w| !w.contains(['*', '(', ')']))
        .collect();
    let partial = if typed.ends_with(char::is_whitespace) {
        None
    } else {
        words.pop()
    };
    (words, partial)
}

/// Completions of the word being typed that co-occur, in one context, with
/// the completed words, the fixed items and an entity of `r`.
fn word_suggestions(
    index: &Index,
    r: &EntityList,
    fixed: &[OwItem],
    typed: &str,
) -> Result<Vec<Suggestion>, QueryError> {
    let (completed, partial) = split_typed(typed);
    let Some(partial) = partial else {
        return Ok(Vec::new());
    };
    if partial.chars().count() < index.config().min_prefix {
        return Ok(Vec::new());
    }
    let range = index.word_range(&partial);
    if range.is_empty() || r.is_empty() {
        return Ok(Vec::new());
    }
    let mut items: Vec<OwItem> = fixed
        .iter()
        .filter(|i| !matches!(i, OwItem::Node(_)))
        .cloned()
        .collect();
    items.extend(completed.iter().cloned().map(OwItem::Word));
    items.push(OwItem::Prefix(partial));
    let refs: Vec<&OwItem> = items.iter().collect();
    let mut list = word_contexts(&refs, index)?;
    for item in fixed {
        if let OwItem::Node(n) = item {
            list = filter_contexts_by_entities(&list, &node_denotation(n, index)?);
        }
    }
    list = filter_contexts_by_entities(&list, r);

    let mut counts: HashMap<u32, u64> = HashMap::new();
    let mut seen: Vec<u32> = Vec::new();
    for (_, run) in list.context_runs() {
        seen.clear();
        for i in run {
            let item = list.items[i];
            if item < ENTITY_BASE
                && range.contains(&(item as u32))
                && !seen.contains(&(item as u32))
            {
                seen.push(item as u32);
                *counts.entry(item as u32).or_default() += 1;
            }
        }
    }
    let mut out: Vec<Suggestion> = counts
        .into_iter()
        .map(|(id, score)| {
            let mut words = completed.clone();
            words.push(index.word(id).unwrap_or_default().to_string());
            let text = words.join(" ");
            Suggestion {
                kind: SuggestionKind::Word,
                label: text.clone(),
                value: text,
                reverse: false,
                score,
            }
        })
        .collect();
    sort_suggestions(&mut out);
    Ok(out)
}

fn preselect(
    s: &Suggestions,
    typed: &str,
    priority: &[Preselect],
) -> Option<(SuggestionKind, usize)> {
    let exact = |list: &[Suggestion]| {
        if typed.is_empty() {
            return None;
        }
        list.iter().position(|x| normalize_name(&x.value) == typed)
    };
    let top = |list: &[Suggestion]| (!list.is_empty()).then_some(0);
    priority.iter().find_map(|rule| match rule {
        Preselect::ExactClass => exact(&s.classes).map(|i| (SuggestionKind::Class, i)),
        Preselect::ExactInstance => exact(&s.instances).map(|i| (SuggestionKind::Instance, i)),
        Preselect::TopRelation => top(&s.relations).map(|i| (SuggestionKind::Relation, i)),
        Preselect::TopWord => top(&s.words).map(|i| (SuggestionKind::Word, i)),
        Preselect::TopClass => top(&s.classes).map(|i| (SuggestionKind::Class, i)),
        Preselect::TopInstance => top(&s.instances).map(|i| (SuggestionKind::Instance, i)),
    })
}

/// The query that results from accepting `suggestion` at `focus`.
pub fn apply_suggestion(
    q: Option<&QueryTree>,
    focus: &Focus,
    suggestion: &Suggestion,
    ontology: &Ontology,
) -> Result<QueryTree, QueryError> {
    let mut q = q.cloned().unwrap_or_else(|| implicit_query(ontology));
    let class = |name: &str| {
        ontology
            .resolve_class(name)
            .ok_or_else(|| QueryError::UnknownClass(name.into()))
    };
    let entity = |name: &str| {
        ontology
            .resolve_entity(name)
            .ok_or_else(|| QueryError::UnknownEntity(name.into()))
    };
    let words = || {
        suggestion
            .value
            .split_whitespace()
            .map(|w| OwItem::Word(w.to_string()))
            .collect::<Vec<_>>()
    };

    match focus {
        Focus::Node(path) => {
            let node = q.root.at_mut(path)?;
            match suggestion.kind {
                SuggestionKind::Class => node.node = NodeRef::Class(class(&suggestion.value)?),
                SuggestionKind::Instance => node.node = NodeRef::Entity(entity(&suggestion.value)?),
                SuggestionKind::Relation => {
                    let rel = ontology
                        .relation(&suggestion.value)
                        .ok_or_else(|| QueryError::UnknownRelation(suggestion.value.clone()))?;
                    let direction = if suggestion.reverse {
                        Direction::Reverse
                    } else {
                        Direction::Forward
                    };
                    node.arcs.push(Arc::Relation {
                        name: rel.name.clone(),
                        direction,
                        target: QueryNode::new(NodeRef::Class(rel.range(direction))),
                    });
                }
                SuggestionKind::Word => node.arcs.push(Arc::OccursWith(words())),
            }
        }
        Focus::OccursWith { node: path, arc } => {
            let new_items = match suggestion.kind {
                SuggestionKind::Word => words(),
                SuggestionKind::Class => vec![OwItem::Node(QueryNode::new(NodeRef::Class(class(
                    &suggestion.value,
                )?)))],
                SuggestionKind::Instance => {
                    vec![OwItem::Node(QueryNode::new(NodeRef::Entity(entity(
                        &suggestion.value,
                    )?)))]
                }
                SuggestionKind::Relation => return Err(QueryError::NotANode),
            };
            let node = q.root.at_mut(path)?;
            match arc {
                Some(a) => match node.arcs.get_mut(*a) {
                    Some(Arc::OccursWith(items)) => items.extend(new_items),
                    _ => return Err(QueryError::InvalidPath(format!("{path} arc {a}"))),
                },
                None => node.arcs.push(Arc::OccursWith(new_items)),
            }
        }
    }
    Ok(q)
}
