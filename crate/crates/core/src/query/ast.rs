use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::QueryError;
use crate::ontology::{ClassId, Direction, EntityId, Ontology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRef {
    Class(ClassId),
    Entity(EntityId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryNode {
    pub node: NodeRef,
    pub arcs: Vec<Arc>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arc {
    Relation {
        name: String,
        direction: Direction,
        target: QueryNode,
    },
    OccursWith(Vec<OwItem>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OwItem {
    Word(String),
    Prefix(String),
    Node(QueryNode),
}

/// A tree query; all arcs point away from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryTree {
    pub root: QueryNode,
}

impl QueryNode {
    pub fn new(node: NodeRef) -> Self {
        QueryNode {
            node,
            arcs: Vec::new(),
        }
    }

    pub fn depth(&self) -> usize {
        1 + self
            .arcs
            .iter()
            .map(|a| match a {
                Arc::Relation { target, .. } => target.depth(),
                Arc::OccursWith(items) => items
                    .iter()
                    .map(|i| {
                        if let OwItem::Node(n) = i {
                            n.depth()
                        } else {
                            0
                        }
                    })
                    .max()
                    .unwrap_or(0),
            })
            .max()
            .unwrap_or(0)
    }
}

/// Name-based form of a query node, as exchanged in JSON:
/// `{"class": "Plant", "arcs": [{"relation": {"name": "native-to", "target": {"entity": "Europe"}}},
///   {"occurs_with": [{"word": "edible"}, {"prefix": "leav"}]}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNode {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub arcs: Vec<RawArc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RawArc {
    Relation {
        name: String,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        reverse: bool,
        target: RawNode,
    },
    OccursWith(Vec<RawItem>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RawItem {
    Word(String),
    Prefix(String),
    Node(RawNode),
}

impl QueryTree {
    /// Resolves names and checks relation typing.
    pub fn resolve(raw: &RawNode, ontology: &Ontology) -> Result<QueryTree, QueryError> {
        Ok(QueryTree {
            root: resolve_node(raw, ontology, 0)?,
        })
    }

    pub fn from_json(
        value: &serde_json::Value,
        ontology: &Ontology,
    ) -> Result<QueryTree, QueryError> {
        let raw: RawNode =
            serde_json::from_value(value.clone()).map_err(|e| QueryError::Syntax {
                position: 0,
                message: e.to_string(),
            })?;
        Self::resolve(&raw, ontology)
    }

    pub fn to_raw(&self, ontology: &Ontology) -> RawNode {
        raw_node(&self.root, ontology)
    }

    pub fn to_json(&self, ontology: &Ontology) -> serde_json::Value {
        serde_json::to_value(self.to_raw(ontology)).expect("query serializes")
    }

    /// Text form accepted by [`super::parse_query`].
    pub fn to_text(&self, ontology: &Ontology) -> String {
        let mut out = String::new();
        write_node(&self.root, ontology, &mut out);
        out
    }
}

const MAX_DEPTH: usize = 64;

fn resolve_node(raw: &RawNode, ontology: &Ontology, depth: usize) -> Result<QueryNode, QueryError> {
    if depth > MAX_DEPTH {
        return Err(QueryError::Syntax {
            position: 0,
            message: "query nested too deeply".into(),
        });
    }
    let node = match (&raw.class, &raw.entity) {
        (Some(c), None) => NodeRef::Class(
            ontology
                .resolve_class(c)
                .ok_or_else(|| QueryError::UnknownClass(c.clone()))?,
        ),
        (None, Some(e)) => NodeRef::Entity(
            ontology
                .resolve_entity(e)
                .ok_or_else(|| QueryError::UnknownEntity(e.clone()))?,
        ),
        _ => {
            return Err(QueryError::Syntax {
                position: 0,
                message: "a node needs exactly one of `class` or `entity`".into(),
            })
        }
    };
    let mut arcs = Vec::with_capacity(raw.arcs.len());
    for arc in &raw.arcs {
        arcs.push(match arc {
            RawArc::Relation {
                name,
                reverse,
                target,
            } => {
                let direction = if *reverse {
                    Direction::Reverse
                } else {
                    Direction::Forward
                };
                let target = resolve_node(target, ontology, depth + 1)?;
                check_typing(ontology, name, direction, node, target.node)?;
                Arc::Relation {
                    name: name.clone(),
                    direction,
                    target,
                }
            }
            RawArc::OccursWith(items) => {
                if items.is_empty() {
                    return Err(QueryError::Syntax {
                        position: 0,
                        message: "occurs-with needs at least one item".into(),
                    });
                }
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    out.push(match item {
                        RawItem::Word(w) => OwItem::Word(check_word(w)?),
                        RawItem::Prefix(p) => OwItem::Prefix(check_word(p)?),
                        RawItem::Node(n) => OwItem::Node(resolve_node(n, ontology, depth + 1)?),
                    });
                }
                Arc::OccursWith(out)
            }
        });
    }
    Ok(QueryNode { node, arcs })
}

fn check_word(w: &str) -> Result<String, QueryError> {
    if w.is_empty() || w.contains(|c: char| c.is_whitespace() || c == '*' || c == '(' || c == ')') {
        return Err(QueryError::Syntax {
            position: 0,
            message: format!("invalid word {w:?}"),
        });
    }
    Ok(crate::nlp::normalize_word(w))
}

/// Whether `node` may stand where `class` is expected: a class related to it
/// by ancestry in either direction, or an entity with such a class.
pub fn compatible(ontology: &Ontology, node: NodeRef, class: ClassId) -> bool {
    let related =
        |c: ClassId| ontology.is_subclass_of(c, class) || ontology.is_subclass_of(class, c);
    match node {
        NodeRef::Class(c) => related(c),
        NodeRef::Entity(e) => {
            ontology.is_instance_of(e, class) || ontology.classes_of(e).into_iter().any(related)
        }
    }
}

pub(crate) fn check_typing(
    ontology: &Ontology,
    name: &str,
    direction: Direction,
    source: NodeRef,
    target: NodeRef,
) -> Result<(), QueryError> {
    let rel = ontology
        .relation(name)
        .ok_or_else(|| QueryError::UnknownRelation(name.to_string()))?;
    for (node, class) in [
        (source, rel.domain(direction)),
        (target, rel.range(direction)),
    ] {
        if !compatible(ontology, node, class) {
            return Err(QueryError::Typing {
                relation: name.to_string(),
                expected: ontology.class_name(class).to_string(),
                found: node_name(ontology, node),
            });
        }
    }
    Ok(())
}

pub(crate) fn node_name(ontology: &Ontology, node: NodeRef) -> String {
    match node {
        NodeRef::Class(c) => ontology.class_name(c).to_string(),
        NodeRef::Entity(e) => ontology.entity_name(e).to_string(),
    }
}

fn raw_node(node: &QueryNode, ontology: &Ontology) -> RawNode {
    let (class, entity) = match node.node {
        NodeRef::Class(c) => (Some(ontology.class_name(c).to_string()), None),
        NodeRef::Entity(e) => (None, Some(ontology.entity_name(e).to_string())),
    };
    let arcs = node
        .arcs
        .iter()
        .map(|arc| match arc {
            Arc::Relation {
                name,
                direction,
                target,
            } => RawArc::Relation {
                name: name.clone(),
                reverse: *direction == Direction::Reverse,
                target: raw_node(target, ontology),
            },
            Arc::OccursWith(items) => RawArc::OccursWith(
                items
                    .iter()
                    .map(|i| match i {
                        OwItem::Word(w) => RawItem::Word(w.clone()),
                        OwItem::Prefix(p) => RawItem::Prefix(p.clone()),
                        OwItem::Node(n) => RawItem::Node(raw_node(n, ontology)),
                    })
                    .collect(),
            ),
        })
        .collect();
    RawNode {
        class,
        entity,
        arcs,
    }
}

fn write_node(node: &QueryNode, ontology: &Ontology, out: &mut String) {
    match node.node {
        NodeRef::Class(c) => {
            out.push_str("class:");
            out.push_str(&ontology.class_name(c).replace(' ', "_"));
        }
        NodeRef::Entity(e) => {
            out.push_str("entity:");
            out.push_str(&ontology.entity_name(e).replace(' ', "_"));
        }
    }
    for arc in &node.arcs {
        out.push_str(" (");
        match arc {
            Arc::Relation {
                name,
                direction,
                target,
            } => {
                if *direction == Direction::Reverse {
                    out.push('~');
                }
                out.push_str(name);
                out.push(' ');
                write_node(target, ontology, out);
            }
            Arc::OccursWith(items) => {
                out.push_str(crate::ontology::OCCURS_WITH);
                for item in items {
                    out.push(' ');
                    match item {
                        OwItem::Word(w) => out.push_str(w),
                        OwItem::Prefix(p) => {
                            out.push_str(p);
                            out.push('*');
                        }
                        OwItem::Node(n) => write_node(n, ontology, out),
                    }
                }
            }
        }
        out.push(')');
    }
}

/// Address of a node: arc indices from the root, with the item index for
/// steps into an occurs-with arc. Text form `1.0:2`; the root is `""`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct NodePath(pub Vec<PathStep>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PathStep {
    pub arc: usize,
    pub item: Option<usize>,
}

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, step: PathStep) -> Self {
        let mut steps = self.0.clone();
        steps.push(step);
        NodePath(steps)
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{}", s.arc)?;
            if let Some(item) = s.item {
                write!(f, ":{item}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for NodePath {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(NodePath::root());
        }
        let bad = || QueryError::InvalidPath(s.to_string());
        s.split('.')
            .map(|step| {
                let (arc, item) = match step.split_once(':') {
                    Some((a, i)) => (a, Some(i.parse().map_err(|_| bad())?)),
                    None => (step, None),
                };
                Ok(PathStep {
                    arc: arc.parse().map_err(|_| bad())?,
                    item,
                })
            })
            .collect::<Result<_, _>>()
            .map(NodePath)
    }
}

impl QueryNode {
    pub fn at(&self, path: &NodePath) -> Result<&QueryNode, QueryError> {
        let mut node = self;
        for step in &path.0 {
            node =
                step_into(node, *step).ok_or_else(|| QueryError::InvalidPath(path.to_string()))?;
        }
        Ok(node)
    }

    pub fn at_mut(&mut self, path: &NodePath) -> Result<&mut QueryNode, QueryError> {
        let mut node = self;
        for step in &path.0 {
            let arc = node.arcs.get_mut(step.arc);
            node = match (arc, step.item) {
                (Some(Arc::Relation { target, .. }), None) => target,
                (Some(Arc::OccursWith(items)), Some(i)) => match items.get_mut(i) {
                    Some(OwItem::Node(n)) => n,
                    Some(_) => return Err(QueryError::NotANode),
                    None => return Err(QueryError::InvalidPath(path.to_string())),
                },
                _ => return Err(QueryError::InvalidPath(path.to_string())),
            };
        }
        Ok(node)
    }
}

pub(crate) fn step_into(node: &QueryNode, step: PathStep) -> Option<&QueryNode> {
    match (node.arcs.get(step.arc)?, step.item) {
        (Arc::Relation { target, .. }, None) => Some(target),
        (Arc::OccursWith(items), Some(i)) => match items.get(i)? {
            OwItem::Node(n) => Some(n),
            _ => None,
        },
        _ => None,
    }
}
