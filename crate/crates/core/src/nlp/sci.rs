//! Rewrites a constituent parse into a tree of enumerations (ENUM),
//! detachable sub-clauses (SUB) and concatenations (CONC) over token spans.

use serde::{Deserialize, Serialize};

use super::parse_tree::ParseNode;
use super::tokenize::is_punctuation;

/// Half-open token range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub start: u32,
    pub end: u32,
}

impl Span {
    pub fn new(start: u32, end: u32) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> u32 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn tokens(&self) -> impl Iterator<Item = u32> {
        self.start..self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SciNode {
    /// Consecutive tokens. Separator leaves (conjunctions and punctuation
    /// between enumeration items) never contribute to a context.
    Leaf {
        span: Span,
        separator: bool,
    },
    Conc(Vec<SciNode>),
    Enum(Vec<SciNode>),
    /// A detachable part. When `head` is set, its tokens are prepended to the
    /// contexts produced from `children`.
    Sub {
        head: Option<Span>,
        children: Vec<SciNode>,
    },
}

/// Trigger word lists for the rewrite rules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SciRules {
    /// First words of relative clauses that become SUB nodes.
    pub relative_pronouns: Vec<String>,
    /// First words of prepositional phrases that become SUB nodes.
    pub subordinators: Vec<String>,
    /// Whether a PP at the very start of a sentence becomes a SUB node.
    pub sentence_initial_pp: bool,
}

impl Default for SciRules {
    fn default() -> Self {
        let words = |ws: &[&str]| ws.iter().map(|w| w.to_string()).collect();
        SciRules {
            relative_pronouns: words(&["which", "who", "whom", "whose", "that"]),
            subordinators: words(&[
                "before", "after", "while", "during", "although", "though", "because", "since",
            ]),
            sentence_initial_pp: true,
        }
    }
}

impl SciNode {
    fn leaf(span: Span) -> Self {
        SciNode::Leaf {
            span,
            separator: false,
        }
    }

    /// Leaves in sentence order (a SUB's head is not a leaf).
    pub fn leaves(&self) -> Vec<(Span, bool)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<(Span, bool)>) {
        match self {
            SciNode::Leaf { span, separator } => out.push((*span, *separator)),
            SciNode::Conc(cs) | SciNode::Enum(cs) | SciNode::Sub { children: cs, .. } => {
                cs.iter().for_each(|c| c.collect_leaves(out))
            }
        }
    }

    /// Compact rendering for debugging and tests, e.g.
    /// `ENUM(CONC("Anna sings") SEP("and") ...)`.
    pub fn render(&self, tokens: &[String]) -> String {
        let text = |s: &Span| {
            s.tokens()
                .filter_map(|t| tokens.get(t as usize))
                .cloned()
                .collect::<Vec<_>>()
                .join(" ")
        };
        let list = |cs: &[SciNode]| {
            cs.iter()
                .map(|c| c.render(tokens))
                .collect::<Vec<_>>()
                .join(" ")
        };
        match self {
            SciNode::Leaf {
                span,
                separator: false,
            } => format!("{:?}", text(span)),
            SciNode::Leaf {
                span,
                separator: true,
            } => format!("SEP({:?})", text(span)),
            SciNode::Conc(cs) => format!("CONC({})", list(cs)),
            SciNode::Enum(cs) => format!("ENUM({})", list(cs)),
            SciNode::Sub {
                head: Some(h),
                children,
            } => {
                format!("SUB<{}>({})", text(h), list(children))
            }
            SciNode::Sub {
                head: None,
                children,
            } => format!("SUB({})", list(children)),
        }
    }
}

/// Parse node annotated with its token span.
struct Node<'a> {
    parse: &'a ParseNode,
    span: Span,
    children: Vec<Node<'a>>,
}

fn annotate<'a>(parse: &'a ParseNode, next: &mut u32) -> Node<'a> {
    let start = *next;
    if parse.is_preterminal() {
        *next += 1;
        return Node {
            parse,
            span: Span::new(start, *next),
            children: Vec::new(),
        };
    }
    let children = parse.children.iter().map(|c| annotate(c, next)).collect();
    Node {
        parse,
        span: Span::new(start, *next),
        children,
    }
}

impl Node<'_> {
    fn tag(&self) -> &str {
        self.parse.base_tag()
    }

    fn first_word(&self) -> Option<&str> {
        let mut node = self;
        loop {
            if let Some(w) = &node.parse.word {
                return Some(w);
            }
            node = node.children.first()?;
        }
    }

    fn is_punctuation(&self) -> bool {
        self.parse.word.as_deref().is_some_and(is_punctuation)
    }

    fn is_conjunction(&self) -> bool {
        matches!(self.tag(), "CC" | "CONJP")
    }

    fn is_separator(&self) -> bool {
        self.is_punctuation() || self.is_conjunction()
    }
}

struct Builder<'r> {
    rules: &'r SciRules,
    first_content: u32,
}

/// Builds the SCI tree of a parsed sentence. Leaves cover the sentence's
/// tokens exactly once and in order.
pub fn build_sci_tree(parse: &ParseNode, rules: &SciRules) -> SciNode {
    let mut next = 0;
    let root = annotate(parse, &mut next);
    let first_content = parse
        .leaves()
        .iter()
        .position(|w| !is_punctuation(w))
        .unwrap_or(0) as u32;
    let builder = Builder {
        rules,
        first_content,
    };
    let mut ancestors = Vec::new();
    normalize(builder.convert(&root, &mut ancestors))
}

fn word_in(word: Option<&str>, list: &[String]) -> bool {
    word.is_some_and(|w| list.iter().any(|t| t.eq_ignore_ascii_case(w)))
}

impl Builder<'_> {
    fn convert<'a>(
        &self,
        node: &'a Node<'a>,
        ancestors: &mut Vec<(&'a Node<'a>, usize)>,
    ) -> SciNode {
        if node.children.is_empty() {
            return SciNode::leaf(node.span);
        }
        let tag = node.tag();
        let first = node.first_word();

        if tag == "SBAR" && word_in(first, &self.rules.relative_pronouns) {
            let head = nearest_left_np(ancestors);
            let children = self.convert_children(node, 0, ancestors);
            return SciNode::Sub { head, children };
        }
        if tag == "PP"
            && (word_in(first, &self.rules.subordinators)
                || (self.rules.sentence_initial_pp && node.span.start == self.first_content))
        {
            let children = self.convert_children(node, 0, ancestors);
            return SciNode::Sub {
                head: None,
                children,
            };
        }
        if tag == "NP" && is_appositive(node) {
            ancestors.push((node, 0));
            let first = self.convert(&node.children[0], ancestors);
            ancestors.pop();
            let rest = self.convert_children(node, 1, ancestors);
            return SciNode::Conc(vec![
                first,
                SciNode::Sub {
                    head: Some(node.children[0].span),
                    children: rest,
                },
            ]);
        }
        if is_enumeration(node) {
            let mut items: Vec<SciNode> = Vec::new();
            for (i, child) in node.children.iter().enumerate() {
                if child.is_separator() {
                    if child.is_punctuation() {
                        if let Some(SciNode::Leaf {
                            span,
                            separator: false,
                        }) = items.last_mut()
                        {
                            span.end = child.span.end;
                            continue;
                        }
                    }
                    items.push(SciNode::Leaf {
                        span: child.span,
                        separator: true,
                    });
                    continue;
                }
                ancestors.push((node, i));
                let converted = normalize(self.convert(child, ancestors));
                ancestors.pop();
                match converted {
                    SciNode::Enum(inner) if child.tag() == tag => items.extend(inner),
                    other => items.push(other),
                }
            }
            return SciNode::Enum(items);
        }
        SciNode::Conc(self.convert_children(node, 0, ancestors))
    }

    fn convert_children<'a>(
        &self,
        node: &'a Node<'a>,
        from: usize,
        ancestors: &mut Vec<(&'a Node<'a>, usize)>,
    ) -> Vec<SciNode> {
        let mut out = Vec::new();
        for (i, child) in node.children.iter().enumerate().skip(from) {
            ancestors.push((node, i));
            out.push(self.convert(child, ancestors));
            ancestors.pop();
        }
        match normalize(SciNode::Conc(out)) {
            SciNode::Conc(cs) => cs,
            other => vec![other],
        }
    }
}

/// The closest NP to the left of the current node, looking at earlier
/// siblings first and then moving up.
fn nearest_left_np(ancestors: &[(&Node<'_>, usize)]) -> Option<Span> {
    for (parent, idx) in ancestors.iter().rev() {
        if let Some(np) = parent.children[..*idx]
            .iter()
            .rev()
            .find(|s| s.tag() == "NP")
        {
            return Some(np.span);
        }
    }
    None
}

/// `NP , NP [,]` without a conjunction: the second NP describes the first.
fn is_appositive(node: &Node<'_>) -> bool {
    let cs = &node.children;
    if cs.len() < 3 || cs[0].tag() != "NP" || cs[1].parse.word.as_deref() != Some(",") {
        return false;
    }
    if cs.iter().any(|c| c.is_conjunction()) {
        return false;
    }
    let content: Vec<_> = cs.iter().filter(|c| !c.is_separator()).collect();
    content.len() == 2 && content.iter().all(|c| c.tag() == "NP")
}

fn is_enumeration(node: &Node<'_>) -> bool {
    let content: Vec<_> = node.children.iter().filter(|c| !c.is_separator()).collect();
    if content.len() < 2 || content.len() == node.children.len() {
        return false;
    }
    ["NP", "VP", "S"]
        .iter()
        .any(|t| content.iter().all(|c| c.tag() == *t))
}

/// Flattens nested concatenations, merges adjacent plain leaves and
/// contracts single-child concatenations.
fn normalize(node: SciNode) -> SciNode {
    match node {
        SciNode::Conc(children) => {
            let mut flat = Vec::with_capacity(children.len());
            flatten_conc(children, &mut flat);
            if flat.len() == 1 {
                flat.pop().unwrap()
            } else {
                SciNode::Conc(flat)
            }
        }
        SciNode::Sub { head, children } => {
            let mut flat = Vec::with_capacity(children.len());
            flatten_conc(children, &mut flat);
            SciNode::Sub {
                head,
                children: flat,
            }
        }
        other => other,
    }
}

fn flatten_conc(children: Vec<SciNode>, out: &mut Vec<SciNode>) {
    for child in children {
        match normalize(child) {
            SciNode::Conc(inner) => flatten_conc(inner, out),
            SciNode::Leaf {
                span,
                separator: false,
            } => match out.last_mut() {
                Some(SciNode::Leaf {
                    span: prev,
                    separator: false,
                }) if prev.end == span.start => prev.end = span.end,
                _ => out.push(SciNode::leaf(span)),
            },
            other => out.push(other),
        }
    }
}
