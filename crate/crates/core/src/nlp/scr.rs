//! Recombines an SCI tree into contexts (sets of token indices).

use super::sci::{SciNode, Span};

/// Default cap on contexts from one sentence.
pub const MAX_CONTEXTS: usize = 256;

/// Contexts of a sentence as ascending token index lists, SUB contexts
/// first. Returns `None` when more than `limit` contexts would be produced.
pub fn recombine_bounded(root: &SciNode, limit: usize) -> Option<Vec<Vec<u32>>> {
    let mut out = Vec::new();
    process_unit(std::slice::from_ref(root), None, limit, &mut out)?;
    out.retain(|c| !c.is_empty());
    for c in &mut out {
        c.sort_unstable();
        c.dedup();
    }
    Some(out)
}

/// [`recombine_bounded`] with the default cap; a sentence over the cap yields
/// a single context covering all its leaves.
pub fn recombine(root: &SciNode) -> Vec<Vec<u32>> {
    recombine_bounded(root, MAX_CONTEXTS).unwrap_or_else(|| {
        let all: Vec<u32> = root.leaves().iter().flat_map(|(s, _)| s.tokens()).collect();
        vec![all]
    })
}

fn process_unit(
    children: &[SciNode],
    head: Option<Span>,
    limit: usize,
    out: &mut Vec<Vec<u32>>,
) -> Option<()> {
    let mut subs = Vec::new();
    for c in children {
        collect_subs(c, &mut subs);
    }
    for sub in subs {
        if let SciNode::Sub { head, children } = sub {
            process_unit(children, *head, limit, out)?;
        }
    }
    let contexts = conc(children, limit)?;
    for mut c in contexts {
        if let Some(h) = head {
            let mut with_head: Vec<u32> = h.tokens().collect();
            with_head.append(&mut c);
            c = with_head;
        }
        out.push(c);
        if out.len() > limit {
            return None;
        }
    }
    Some(())
}

fn collect_subs<'a>(node: &'a SciNode, out: &mut Vec<&'a SciNode>) {
    match node {
        SciNode::Sub { .. } => out.push(node),
        SciNode::Conc(cs) | SciNode::Enum(cs) => cs.iter().for_each(|c| collect_subs(c, out)),
        SciNode::Leaf { .. } => {}
    }
}

/// Token sets of a node with SUB parts removed. An empty vector means the
/// node contributes nothing (a separator).
fn eval(node: &SciNode, limit: usize) -> Option<Vec<Vec<u32>>> {
    Some(match node {
        SciNode::Leaf {
            separator: true, ..
        } => Vec::new(),
        SciNode::Leaf { span, .. } => vec![span.tokens().collect()],
        SciNode::Sub { .. } => vec![Vec::new()],
        SciNode::Conc(cs) => conc(cs, limit)?,
        SciNode::Enum(items) => {
            let mut union = Vec::new();
            for item in items {
                if matches!(item, SciNode::Sub { .. }) {
                    continue;
                }
                union.extend(eval(item, limit)?);
                if union.len() > limit {
                    return None;
                }
            }
            if union.is_empty() {
                vec![Vec::new()]
            } else {
                union
            }
        }
    })
}

fn conc(children: &[SciNode], limit: usize) -> Option<Vec<Vec<u32>>> {
    let mut acc: Vec<Vec<u32>> = vec![Vec::new()];
    for child in children {
        let sets = eval(child, limit)?;
        if sets.is_empty() {
            continue;
        }
        if acc.len().saturating_mul(sets.len()) > limit {
            return None;
        }
        let mut next = Vec::with_capacity(acc.len() * sets.len());
        for a in &acc {
            for s in &sets {
                let mut c = a.clone();
                c.extend_from_slice(s);
                next.push(c);
            }
        }
        acc = next;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlp::{build_sci_tree, ParseNode, SciRules};

    fn contexts(parse: &str) -> Vec<String> {
        let p = ParseNode::parse(parse).unwrap();
        let words = p.leaves();
        let tree = build_sci_tree(&p, &SciRules::default());
        recombine(&tree)
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&t| words[t as usize])
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect()
    }

    #[test]
    fn cross_product_of_enumerations() {
        let got = contexts("(S (NP (NP (NNP Anna)) (CC and) (NP (NNP Bob))) (VP (VP (VBP sing)) (CC and) (VP (VBP dance))))");
        assert_eq!(got, ["Anna sing", "Anna dance", "Bob sing", "Bob dance"]);
    }

    #[test]
    fn sub_clause_gets_its_head() {
        let got = contexts("(S (NP (NNP Rhubarb)) (VP (VBZ has) (NP (NP (NNS leaves)) (SBAR (WHNP (WDT which)) (S (VP (VBP are) (ADJP (JJ toxic))))))))");
        assert_eq!(got, ["leaves which are toxic", "Rhubarb has leaves"]);
    }

    #[test]
    fn explosion_is_capped() {
        let item = "(NP (NP (NN a)) (CC and) (NP (NN b)))";
        let parse = format!("(S {})", item.repeat(10));
        let p = ParseNode::parse(&parse).unwrap();
        let tree = build_sci_tree(&p, &SciRules::default());
        assert!(recombine_bounded(&tree, 256).is_none());
        assert_eq!(recombine(&tree), vec![(0..30).collect::<Vec<u32>>()]);
    }
}
