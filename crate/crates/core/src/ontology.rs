//! Typed-relation ontology with a class taxonomy rooted at `Entity`.
//!
//! The text form is a tab-separated file with four record kinds:
//!
//! ```text
//! class     NAME     subclass-of  PARENT
//! instance  NAME     is-a         CLASS
//! relation  NAME     SOURCE_CLASS TARGET_CLASS
//! fact      SUBJECT  RELATION     OBJECT
//! ```
//!
//! Ids are interned in lexicographic order of the canonical names, so two
//! loads of the same file produce identical tables. Class membership is
//! stored as asserted; closures are computed when asked for.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Name of the taxonomy root.
pub const ROOT_CLASS: &str = "Entity";

/// Relation name reserved for text co-occurrence in queries.
pub const OCCURS_WITH: &str = "occurs-with";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntityId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }
}

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("line {line}: malformed record: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: taxonomy cycle through class `{class}`")]
    Cycle { line: usize, class: String },
    #[error("line {line}: duplicate relation `{name}`")]
    DuplicateRelation { line: usize, name: String },
    #[error("line {line}: fact references unknown relation `{name}`")]
    UndeclaredRelation { line: usize, name: String },
    #[error(
        "line {line}: fact ({subject}, {relation}, {object}) violates relation typing: \
         {role} is not an instance of `{class}`"
    )]
    Typing {
        line: usize,
        subject: String,
        relation: String,
        object: String,
        role: &'static str,
        class: String,
    },
    #[error("unknown class id {0}")]
    UnknownClass(u32),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A typed relation and its facts, kept sorted in both orientations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub source: ClassId,
    pub target: ClassId,
    forward: Vec<(EntityId, EntityId)>,
    reverse: Vec<(EntityId, EntityId)>,
}

impl Relation {
    /// Facts as (subject, object), sorted.
    pub fn facts(&self) -> &[(EntityId, EntityId)] {
        &self.forward
    }

    /// Facts as (object, subject), sorted.
    pub fn reverse_facts(&self) -> &[(EntityId, EntityId)] {
        &self.reverse
    }

    pub fn pairs(&self, direction: Direction) -> &[(EntityId, EntityId)] {
        match direction {
            Direction::Forward => &self.forward,
            Direction::Reverse => &self.reverse,
        }
    }

    /// Class of the node an arc in `direction` starts from.
    pub fn domain(&self, direction: Direction) -> ClassId {
        match direction {
            Direction::Forward => self.source,
            Direction::Reverse => self.target,
        }
    }

    pub fn range(&self, direction: Direction) -> ClassId {
        match direction {
            Direction::Forward => self.target,
            Direction::Reverse => self.source,
        }
    }

    /// Objects reached from `from` (subjects when reversed).
    pub fn image_of(&self, direction: Direction, from: EntityId) -> &[(EntityId, EntityId)] {
        let pairs = self.pairs(direction);
        let lo = pairs.partition_point(|&(s, _)| s < from);
        let hi = pairs.partition_point(|&(s, _)| s <= from);
        &pairs[lo..hi]
    }
}

/// Parent edges and asserted instance membership.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Taxonomy {
    parents: Vec<Vec<ClassId>>,
    children: Vec<Vec<ClassId>>,
    memberships: Vec<Vec<ClassId>>,
    members: Vec<Vec<EntityId>>,
}

impl Taxonomy {
    pub fn parents(&self, class: ClassId) -> &[ClassId] {
        &self.parents[class.0 as usize]
    }

    pub fn children(&self, class: ClassId) -> &[ClassId] {
        &self.children[class.0 as usize]
    }

    /// Classes an entity was asserted to belong to (no closure).
    pub fn memberships(&self, entity: EntityId) -> &[ClassId] {
        &self.memberships[entity.0 as usize]
    }

    pub fn direct_members(&self, class: ClassId) -> &[EntityId] {
        &self.members[class.0 as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ontology {
    class_names: Vec<String>,
    entity_names: Vec<String>,
    class_lookup: HashMap<String, ClassId>,
    entity_lookup: HashMap<String, EntityId>,
    taxonomy: Taxonomy,
    root: ClassId,
    relations: Vec<Relation>,
    relation_lookup: HashMap<String, usize>,
}

/// Raw ontology tables, in the shape they are serialized into the index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OntologyParts {
    pub class_names: Vec<String>,
    pub entity_names: Vec<String>,
    /// (child, parent)
    pub parent_edges: Vec<(ClassId, ClassId)>,
    /// (entity, class)
    pub memberships: Vec<(EntityId, ClassId)>,
    pub relations: Vec<RelationParts>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationParts {
    pub name: String,
    pub source: ClassId,
    pub target: ClassId,
    pub facts: Vec<(EntityId, EntityId)>,
}

struct RawRelation {
    name: String,
    source: String,
    target: String,
    line: usize,
}

struct RawFact {
    subject: String,
    relation: String,
    object: String,
    line: usize,
}

impl Ontology {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, OntologyError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| OntologyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_tsv(&text)
    }

    /// An ontology holding only the root class.
    pub fn empty() -> Self {
        Self::parse_tsv("").expect("empty ontology is valid")
    }

    pub fn parse_tsv(text: &str) -> Result<Self, OntologyError> {
        let mut class_edges: Vec<(String, String, usize)> = Vec::new();
        let mut instance_edges: Vec<(String, String, usize)> = Vec::new();
        let mut raw_relations: Vec<RawRelation> = Vec::new();
        let mut raw_facts: Vec<RawFact> = Vec::new();

        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw_line.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
            let malformed = |reason: &str| OntologyError::Malformed {
                line,
                reason: reason.to_string(),
            };
            if fields.len() != 4 {
                return Err(malformed(&format!(
                    "expected 4 tab-separated fields, found {}",
                    fields.len()
                )));
            }
            if fields.iter().any(|f| f.is_empty()) {
                return Err(malformed("empty field"));
            }
            let (a, b, c) = (fields[1].to_string(), fields[2], fields[3].to_string());
            match fields[0] {
                "class" => {
                    if b != "subclass-of" {
                        return Err(malformed("class records use `subclass-of`"));
                    }
                    if a == ROOT_CLASS {
                        return Err(malformed("the root class cannot have a parent"));
                    }
                    class_edges.push((a, c, line));
                }
                "instance" => {
                    if b != "is-a" {
                        return Err(malformed("instance records use `is-a`"));
                    }
                    instance_edges.push((a, c, line));
                }
                "relation" => {
                    if a == OCCURS_WITH {
                        return Err(malformed("`occurs-with` is a reserved relation name"));
                    }
                    raw_relations.push(RawRelation {
                        name: a,
                        source: b.to_string(),
                        target: c,
                        line,
                    });
                }
                "fact" => raw_facts.push(RawFact {
                    subject: a,
                    relation: b.to_string(),
                    object: c,
                    line,
                }),
                other => return Err(malformed(&format!("unknown record kind `{other}`"))),
            }
        }

        // Intern names in lexicographic order.
        let mut class_set: BTreeSet<String> = BTreeSet::new();
        class_set.insert(ROOT_CLASS.to_string());
        for (child, parent, _) in &class_edges {
            class_set.insert(child.clone());
            class_set.insert(parent.clone());
        }
        for (_, class, _) in &instance_edges {
            class_set.insert(class.clone());
        }
        for rel in &raw_relations {
            class_set.insert(rel.source.clone());
            class_set.insert(rel.target.clone());
        }
        let mut entity_set: BTreeSet<String> = BTreeSet::new();
        for (entity, _, _) in &instance_edges {
            entity_set.insert(entity.clone());
        }
        for fact in &raw_facts {
            entity_set.insert(fact.subject.clone());
            entity_set.insert(fact.object.clone());
        }

        let class_names: Vec<String> = class_set.into_iter().collect();
        let entity_names: Vec<String> = entity_set.into_iter().collect();
        let class_index: HashMap<&str, ClassId> = class_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), ClassId(i as u32)))
            .collect();
        let entity_index: HashMap<&str, EntityId> = entity_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), EntityId(i as u32)))
            .collect();

        let parent_edges: Vec<(ClassId, ClassId, usize)> = class_edges
            .iter()
            .map(|(c, p, line)| (class_index[c.as_str()], class_index[p.as_str()], *line))
            .collect();
        let memberships: Vec<(EntityId, ClassId, usize)> = instance_edges
            .iter()
            .map(|(e, c, line)| (entity_index[e.as_str()], class_index[c.as_str()], *line))
            .collect();

        let mut seen_relations: HashMap<&str, usize> = HashMap::new();
        for rel in &raw_relations {
            if seen_relations.insert(rel.name.as_str(), rel.line).is_some() {
                return Err(OntologyError::DuplicateRelation {
                    line: rel.line,
                    name: rel.name.clone(),
                });
            }
        }
        let mut facts_by_relation: BTreeMap<&str, Vec<(EntityId, EntityId, usize)>> =
            BTreeMap::new();
        for fact in &raw_facts {
            if !seen_relations.contains_key(fact.relation.as_str()) {
                return Err(OntologyError::UndeclaredRelation {
                    line: fact.line,
                    name: fact.relation.clone(),
                });
            }
            facts_by_relation
                .entry(fact.relation.as_str())
                .or_default()
                .push((
                    entity_index[fact.subject.as_str()],
                    entity_index[fact.object.as_str()],
                    fact.line,
                ));
        }
        let relations: Vec<(RelationParts, usize, Vec<usize>)> = raw_relations
            .iter()
            .map(|rel| {
                let facts = facts_by_relation
                    .remove(rel.name.as_str())
                    .unwrap_or_default();
                let lines = facts.iter().map(|f| f.2).collect();
                (
                    RelationParts {
                        name: rel.name.clone(),
                        source: class_index[rel.source.as_str()],
                        target: class_index[rel.target.as_str()],
                        facts: facts.iter().map(|f| (f.0, f.1)).collect(),
                    },
                    rel.line,
                    lines,
                )
            })
            .collect();

        Self::assemble(
            class_names,
            entity_names,
            parent_edges,
            memberships,
            relations,
        )
    }

    /// Rebuilds an ontology from serialized tables, re-running all checks.
    pub fn from_parts(parts: OntologyParts) -> Result<Self, OntologyError> {
        let OntologyParts {
            class_names,
            entity_names,
            parent_edges,
            memberships,
            relations,
        } = parts;
        let n_classes = class_names.len() as u32;
        let n_entities = entity_names.len() as u32;
        let bad = |reason: String| OntologyError::Malformed { line: 0, reason };
        if class_names.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("class names not strictly sorted".into()));
        }
        if entity_names.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("entity names not strictly sorted".into()));
        }
        if class_names
            .binary_search_by(|n| n.as_str().cmp(ROOT_CLASS))
            .is_err()
        {
            return Err(bad("missing root class".into()));
        }
        let check_class = |c: ClassId| {
            if c.0 < n_classes {
                Ok(())
            } else {
                Err(OntologyError::UnknownClass(c.0))
            }
        };
        let check_entity = |e: EntityId| {
            if e.0 < n_entities {
                Ok(())
            } else {
                Err(bad(format!("entity id {} out of range", e.0)))
            }
        };
        for &(c, p) in &parent_edges {
            check_class(c)?;
            check_class(p)?;
        }
        for &(e, c) in &memberships {
            check_entity(e)?;
            check_class(c)?;
        }
        let mut names = HashMap::new();
        let mut rels = Vec::with_capacity(relations.len());
        for rel in relations {
            check_class(rel.source)?;
            check_class(rel.target)?;
            if rel.name == OCCURS_WITH {
                return Err(bad("`occurs-with` is a reserved relation name".into()));
            }
            if names.insert(rel.name.clone(), ()).is_some() {
                return Err(OntologyError::DuplicateRelation {
                    line: 0,
                    name: rel.name,
                });
            }
            for &(s, o) in &rel.facts {
                check_entity(s)?;
                check_entity(o)?;
            }
            let lines = vec![0; rel.facts.len()];
            rels.push((rel, 0, lines));
        }
        Self::assemble(
            class_names,
            entity_names,
            parent_edges.into_iter().map(|(c, p)| (c, p, 0)).collect(),
            memberships.into_iter().map(|(e, c)| (e, c, 0)).collect(),
            rels,
        )
    }

    fn assemble(
        class_names: Vec<String>,
        entity_names: Vec<String>,
        parent_edges: Vec<(ClassId, ClassId, usize)>,
        memberships: Vec<(EntityId, ClassId, usize)>,
        relations: Vec<(RelationParts, usize, Vec<usize>)>,
    ) -> Result<Self, OntologyError> {
        let n_classes = class_names.len();
        let n_entities = entity_names.len();
        let class_lookup: HashMap<String, ClassId> = class_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), ClassId(i as u32)))
            .collect();
        let entity_lookup: HashMap<String, EntityId> = entity_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), EntityId(i as u32)))
            .collect();
        let root = class_lookup[ROOT_CLASS];

        let mut parents: Vec<Vec<ClassId>> = vec![Vec::new(); n_classes];
        let mut edge_lines: HashMap<(ClassId, ClassId), usize> = HashMap::new();
        for &(child, parent, line) in &parent_edges {
            if child == root {
                return Err(OntologyError::Malformed {
                    line,
                    reason: "the root class cannot have a parent".into(),
                });
            }
            parents[child.0 as usize].push(parent);
            edge_lines.entry((child, parent)).or_insert(line);
        }
        // Classes never given a parent hang directly under the root.
        for (i, ps) in parents.iter_mut().enumerate() {
            ps.sort_unstable();
            ps.dedup();
            if ps.is_empty() && i != root.0 as usize {
                ps.push(root);
            }
        }
        if let Some((class, line)) = find_cycle(&parents, &edge_lines) {
            return Err(OntologyError::Cycle {
                line,
                class: class_names[class.0 as usize].clone(),
            });
        }
        let mut children: Vec<Vec<ClassId>> = vec![Vec::new(); n_classes];
        for (child, ps) in parents.iter().enumerate() {
            for p in ps {
                children[p.0 as usize].push(ClassId(child as u32));
            }
        }
        let mut member_of: Vec<Vec<ClassId>> = vec![Vec::new(); n_entities];
        let mut members: Vec<Vec<EntityId>> = vec![Vec::new(); n_classes];
        for &(e, c, _) in &memberships {
            member_of[e.0 as usize].push(c);
            members[c.0 as usize].push(e);
        }
        for m in member_of.iter_mut() {
            m.sort_unstable();
            m.dedup();
        }
        for m in members.iter_mut() {
            m.sort_unstable();
            m.dedup();
        }

        let mut ontology = Ontology {
            class_names,
            entity_names,
            class_lookup,
            entity_lookup,
            taxonomy: Taxonomy {
                parents,
                children,
                memberships: member_of,
                members,
            },
            root,
            relations: Vec::new(),
            relation_lookup: HashMap::new(),
        };

        let mut relation_lookup = HashMap::new();
        let mut built = Vec::with_capacity(relations.len());
        for (parts, _rel_line, fact_lines) in relations {
            let sources = ontology.instance_mask(parts.source);
            let targets = ontology.instance_mask(parts.target);
            for (i, &(s, o)) in parts.facts.iter().enumerate() {
                let (role, class) = if !sources[s.0 as usize] {
                    ("subject", parts.source)
                } else if !targets[o.0 as usize] {
                    ("object", parts.target)
                } else {
                    continue;
                };
                return Err(OntologyError::Typing {
                    line: fact_lines.get(i).copied().unwrap_or(0),
                    subject: ontology.entity_name(s).to_string(),
                    relation: parts.name.clone(),
                    object: ontology.entity_name(o).to_string(),
                    role,
                    class: ontology.class_name(class).to_string(),
                });
            }
            let mut forward = parts.facts;
            forward.sort_unstable();
            forward.dedup();
            let mut reverse: Vec<_> = forward.iter().map(|&(s, o)| (o, s)).collect();
            reverse.sort_unstable();
            relation_lookup.insert(parts.name.clone(), built.len());
            built.push(Relation {
                name: parts.name,
                source: parts.source,
                target: parts.target,
                forward,
                reverse,
            });
        }
        ontology.relations = built;
        ontology.relation_lookup = relation_lookup;
        Ok(ontology)
    }

    pub fn root(&self) -> ClassId {
        self.root
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn num_entities(&self) -> usize {
        self.entity_names.len()
    }

    pub fn class_name(&self, class: ClassId) -> &str {
        &self.class_names[class.0 as usize]
    }

    pub fn entity_name(&self, entity: EntityId) -> &str {
        &self.entity_names[entity.0 as usize]
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn entity_names(&self) -> &[String] {
        &self.entity_names
    }

    pub fn classes(&self) -> impl Iterator<Item = ClassId> {
        (0..self.class_names.len() as u32).map(ClassId)
    }

    pub fn entities(&self) -> impl Iterator<Item = EntityId> {
        (0..self.entity_names.len() as u32).map(EntityId)
    }

    pub fn class_by_name(&self, name: &str) -> Option<ClassId> {
        self.class_lookup.get(name).copied()
    }

    pub fn entity_by_name(&self, name: &str) -> Option<EntityId> {
        self.entity_lookup.get(name).copied()
    }

    /// Looks up a class, accepting `_` for spaces.
    pub fn resolve_class(&self, name: &str) -> Option<ClassId> {
        self.class_by_name(name)
            .or_else(|| self.class_by_name(&name.replace('_', " ")))
    }

    pub fn resolve_entity(&self, name: &str) -> Option<EntityId> {
        self.entity_by_name(name)
            .or_else(|| self.entity_by_name(&name.replace('_', " ")))
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relation_lookup.get(name).map(|&i| &self.relations[i])
    }

    /// Position of the relation in [`Ontology::relations`].
    pub fn relation_id(&self, name: &str) -> Option<usize> {
        self.relation_lookup.get(name).copied()
    }

    /// `class` and all classes below it, sorted.
    pub fn descendants(&self, class: ClassId) -> Vec<ClassId> {
        self.closure(class, |c| self.taxonomy.children(c))
    }

    /// `class` and all classes above it, sorted.
    pub fn ancestors(&self, class: ClassId) -> Vec<ClassId> {
        self.closure(class, |c| self.taxonomy.parents(c))
    }

    fn closure<'a>(
        &'a self,
        start: ClassId,
        next: impl Fn(ClassId) -> &'a [ClassId],
    ) -> Vec<ClassId> {
        let mut seen = vec![false; self.class_names.len()];
        let mut stack = vec![start];
        seen[start.0 as usize] = true;
        let mut out = Vec::new();
        while let Some(c) = stack.pop() {
            out.push(c);
            for &n in next(c) {
                if !seen[n.0 as usize] {
                    seen[n.0 as usize] = true;
                    stack.push(n);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// True when `class` equals `ancestor` or lies below it.
    pub fn is_subclass_of(&self, class: ClassId, ancestor: ClassId) -> bool {
        ancestor == self.root || self.ancestors(class).binary_search(&ancestor).is_ok()
    }

    /// All classes the entity belongs to, including inherited ones.
    pub fn classes_of(&self, entity: EntityId) -> Vec<ClassId> {
        let mut seen = vec![false; self.class_names.len()];
        let mut stack: Vec<ClassId> = self.taxonomy.memberships(entity).to_vec();
        stack.push(self.root);
        for c in &stack {
            seen[c.0 as usize] = true;
        }
        let mut out = Vec::new();
        while let Some(c) = stack.pop() {
            out.push(c);
            for &p in self.taxonomy.parents(c) {
                if !seen[p.0 as usize] {
                    seen[p.0 as usize] = true;
                    stack.push(p);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn is_instance_of(&self, entity: EntityId, class: ClassId) -> bool {
        class == self.root || self.classes_of(entity).binary_search(&class).is_ok()
    }

    /// Every entity belonging to `class` or to a class below it, sorted.
    pub fn instances_of(&self, class: ClassId) -> Result<Vec<EntityId>, OntologyError> {
        if class.0 as usize >= self.class_names.len() {
            return Err(OntologyError::UnknownClass(class.0));
        }
        if class == self.root {
            return Ok(self.entities().collect());
        }
        let mut out: Vec<EntityId> = self
            .descendants(class)
            .into_iter()
            .flat_map(|c| self.taxonomy.direct_members(c).iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    fn instance_mask(&self, class: ClassId) -> Vec<bool> {
        let mut mask = vec![class == self.root; self.entity_names.len()];
        if class != self.root {
            for e in self.instances_of(class).unwrap_or_default() {
                mask[e.0 as usize] = true;
            }
        }
        mask
    }

    /// Maps each source entity to the entities it reaches through `relation`.
    /// Sources without facts are absent from the map.
    pub fn relation_image(
        &self,
        relation: &str,
        direction: Direction,
        sources: &[EntityId],
    ) -> Result<BTreeMap<EntityId, Vec<EntityId>>, OntologyError> {
        let rel = self
            .relation(relation)
            .ok_or_else(|| OntologyError::UnknownRelation(relation.to_string()))?;
        let mut out = BTreeMap::new();
        for &s in sources {
            let hits = rel.image_of(direction, s);
            if !hits.is_empty() {
                out.insert(s, hits.iter().map(|&(_, o)| o).collect());
            }
        }
        Ok(out)
    }

    /// The serializable tables of this ontology.
    pub fn to_parts(&self) -> OntologyParts {
        let mut parent_edges = Vec::new();
        for c in self.classes() {
            for &p in self.taxonomy.parents(c) {
                parent_edges.push((c, p));
            }
        }
        let mut memberships = Vec::new();
        for e in self.entities() {
            for &c in self.taxonomy.memberships(e) {
                memberships.push((e, c));
            }
        }
        OntologyParts {
            class_names: self.class_names.clone(),
            entity_names: self.entity_names.clone(),
            parent_edges,
            memberships,
            relations: self
                .relations
                .iter()
                .map(|r| RelationParts {
                    name: r.name.clone(),
                    source: r.source,
                    target: r.target,
                    facts: r.forward.clone(),
                })
                .collect(),
        }
    }
}

/// Returns a class on a parent-edge cycle and the line of an edge in it.
fn find_cycle(
    parents: &[Vec<ClassId>],
    edge_lines: &HashMap<(ClassId, ClassId), usize>,
) -> Option<(ClassId, usize)> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut marks = vec![Mark::New; parents.len()];
    for start in 0..parents.len() {
        if marks[start] != Mark::New {
            continue;
        }
        // Iterative DFS: (node, next parent index)
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        marks[start] = Mark::Open;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if let Some(&p) = parents[node].get(*next) {
                *next += 1;
                let p = p.0 as usize;
                match marks[p] {
                    Mark::Open => {
                        let child = ClassId(node as u32);
                        let line = edge_lines
                            .get(&(child, ClassId(p as u32)))
                            .copied()
                            .unwrap_or(0);
                        return Some((ClassId(p as u32), line));
                    }
                    Mark::New => {
                        marks[p] = Mark::Open;
                        stack.push((p, 0));
                    }
                    Mark::Done => {}
                }
            } else {
                marks[node] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}
