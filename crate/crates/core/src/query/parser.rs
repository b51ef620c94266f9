//! Text form of queries:
//!
//! ```text
//! node   := ref arc*
//! ref    := "class:" NAME | "entity:" NAME
//! arc    := "(" ["~"] RELNAME node ")" | "(occurs-with" item+ ")"
//! item   := WORD | PREFIX "*" | node
//! ```
//!
//! Names use underscores for spaces; `~` walks a relation backwards.

use super::ast::{QueryTree, RawArc, RawItem, RawNode};
use super::QueryError;
use crate::ontology::{Ontology, OCCURS_WITH};

const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok<'a> {
    Open,
    Close,
    Atom(&'a str),
}

struct Parser<'a> {
    toks: Vec<(usize, Tok<'a>)>,
    at: usize,
    end: usize,
}

fn lex(text: &str) -> Vec<(usize, Tok<'_>)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in text.char_indices() {
        if ch == '(' || ch == ')' || ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, Tok::Atom(&text[s..i])));
            }
            match ch {
                '(' => out.push((i, Tok::Open)),
                ')' => out.push((i, Tok::Close)),
                _ => {}
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, Tok::Atom(&text[s..])));
    }
    out
}

/// Parses the text form into the name-based tree, without consulting an
/// ontology.
pub fn parse_raw(text: &str) -> Result<RawNode, QueryError> {
    let mut p = Parser {
        toks: lex(text),
        at: 0,
        end: text.len(),
    };
    if p.toks.is_empty() {
        return Err(p.error(0, "empty query"));
    }
    let node = p.node(0)?;
    if let Some((pos, _)) = p.toks.get(p.at) {
        return Err(p.error(*pos, "unexpected input after query"));
    }
    Ok(node)
}

/// Parses and resolves a query against the ontology, checking relation
/// typing.
pub fn parse_query(text: &str, ontology: &Ontology) -> Result<QueryTree, QueryError> {
    QueryTree::resolve(&parse_raw(text)?, ontology)
}

impl<'a> Parser<'a> {
    fn error(&self, position: usize, message: &str) -> QueryError {
        QueryError::Syntax {
            position,
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<&Tok<'a>> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn node(&mut self, depth: usize) -> Result<RawNode, QueryError> {
        if depth > MAX_DEPTH {
            return Err(self.error(self.pos(), "query nested too deeply"));
        }
        let pos = self.pos();
        let Some(Tok::Atom(atom)) = self.peek().cloned() else {
            return Err(self.error(pos, "expected `class:NAME` or `entity:NAME`"));
        };
        let mut node = match node_ref(atom) {
            Some(n) => n,
            None => return Err(self.error(pos, "expected `class:NAME` or `entity:NAME`")),
        };
        self.at += 1;
        while self.peek() == Some(&Tok::Open) {
            node.arcs.push(self.arc(depth)?);
        }
        Ok(node)
    }

    fn arc(&mut self, depth: usize) -> Result<RawArc, QueryError> {
        self.at += 1;
        let pos = self.pos();
        let Some(Tok::Atom(name)) = self.peek().cloned() else {
            return Err(self.error(pos, "expected a relation name or `occurs-with`"));
        };
        self.at += 1;
        let arc = if name == OCCURS_WITH {
            let mut items = Vec::new();
            loop {
                let pos = self.pos();
                match self.peek().cloned() {
                    Some(Tok::Close) => break,
                    Some(Tok::Atom(atom)) if node_ref(atom).is_some() => {
                        items.push(RawItem::Node(self.node(depth + 1)?))
                    }
                    Some(Tok::Atom(atom)) => {
                        items.push(
                            word_item(atom)
                                .ok_or_else(|| self.error(pos, "invalid word or prefix"))?,
                        );
                        self.at += 1;
                    }
                    Some(Tok::Open) => return Err(self.error(pos, "unexpected `(`")),
                    None => return Err(self.error(pos, "missing `)`")),
                }
            }
            if items.is_empty() {
                return Err(self.error(self.pos(), "occurs-with needs at least one item"));
            }
            RawArc::OccursWith(items)
        } else {
            let (reverse, name) = match name.strip_prefix('~') {
                Some(rest) => (true, rest),
                None => (false, name),
            };
            if name.is_empty() {
                return Err(self.error(pos, "empty relation name"));
            }
            let target = self.node(depth + 1)?;
            RawArc::Relation {
                name: name.to_string(),
                reverse,
                target,
            }
        };
        match self.peek() {
            Some(Tok::Close) => {
                self.at += 1;
                Ok(arc)
            }
            _ => Err(self.error(self.pos(), "expected `)`")),
        }
    }
}

fn node_ref(atom: &str) -> Option<RawNode> {
    if let Some(name) = atom.strip_prefix("class:") {
        return (!name.is_empty()).then(|| RawNode {
            class: Some(name.into()),
            entity: None,
            arcs: vec![],
        });
    }
    if let Some(name) = atom.strip_prefix("entity:") {
        return (!name.is_empty()).then(|| RawNode {
            class: None,
            entity: Some(name.into()),
            arcs: vec![],
        });
    }
    None
}

fn word_item(atom: &str) -> Option<RawItem> {
    let (body, prefix) = match atom.strip_suffix('*') {
        Some(b) => (b, true),
        None => (atom, false),
    };
    if body.is_empty() || body.contains('*') {
        return None;
    }
    let word = crate::nlp::normalize_word(body);
    Some(if prefix {
        RawItem::Prefix(word)
    } else {
        RawItem::Word(word)
    })
}
