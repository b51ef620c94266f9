use super::ast::{step_into, Arc, NodePath, OwItem, PathStep, QueryNode, QueryTree};
use super::QueryError;

/// Re-orients the query so the node at `path` becomes the root. Relation
/// arcs on the path are walked backwards; an occurs-with arc on the path
/// becomes an occurs-with arc of the new root that lists the old parent in
/// place of the new root.
pub fn change_root(q: &QueryTree, path: &NodePath) -> Result<QueryTree, QueryError> {
    let mut chain: Vec<(&QueryNode, PathStep)> = Vec::with_capacity(path.0.len());
    let mut node = &q.root;
    for &step in &path.0 {
        match (node.arcs.get(step.arc), step.item) {
            (Some(Arc::OccursWith(items)), Some(i)) => match items.get(i) {
                Some(OwItem::Node(_)) => {}
                Some(_) => return Err(QueryError::NotANode),
                None => return Err(QueryError::InvalidPath(path.to_string())),
            },
            (Some(Arc::Relation { .. }), None) => {}
            _ => return Err(QueryError::InvalidPath(path.to_string())),
        }
        chain.push((node, step));
        node = step_into(node, step).expect("step checked above");
    }

    let mut back: Option<Arc> = None;
    for (node, step) in chain {
        let mut rebuilt = QueryNode {
            node: node.node,
            arcs: Vec::with_capacity(node.arcs.len()),
        };
        for (i, arc) in node.arcs.iter().enumerate() {
            if i != step.arc {
                rebuilt.arcs.push(arc.clone());
            }
        }
        rebuilt.arcs.extend(back.take());
        back = Some(match &node.arcs[step.arc] {
            Arc::Relation {
                name, direction, ..
            } => Arc::Relation {
                name: name.clone(),
                direction: direction.flip(),
                target: rebuilt,
            },
            Arc::OccursWith(items) => {
                let mut items = items.clone();
                items[step.item.expect("checked")] = OwItem::Node(rebuilt);
                Arc::OccursWith(items)
            }
        });
    }
    let mut root = node.clone();
    root.arcs.extend(back);
    Ok(QueryTree { root })
}
