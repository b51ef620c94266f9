use thiserror::Error;

use super::tokenize::unescape_bracket;

const MAX_DEPTH: usize = 512;

/// A constituent of a bracketed parse. Preterminals carry the word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseNode {
    pub tag: String,
    pub word: Option<String>,
    pub children: Vec<ParseNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed parse tree at byte {position}: {message}")]
pub struct ParseTreeError {
    pub position: usize,
    pub message: &'static str,
}

struct Frame {
    open: usize,
    tag: Option<String>,
    word: Option<String>,
    children: Vec<ParseNode>,
}

enum Lexeme<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn lex(text: &str) -> impl Iterator<Item = (usize, Lexeme<'_>)> {
    let bytes = text.as_bytes();
    let mut i = 0;
    std::iter::from_fn(move || {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i >= bytes.len() {
            return None;
        }
        let start = i;
        match bytes[i] {
            b'(' => {
                i += 1;
                Some((start, Lexeme::Open))
            }
            b')' => {
                i += 1;
                Some((start, Lexeme::Close))
            }
            _ => {
                while i < bytes.len()
                    && !bytes[i].is_ascii_whitespace()
                    && bytes[i] != b'('
                    && bytes[i] != b')'
                {
                    i += 1;
                }
                Some((start, Lexeme::Atom(&text[start..i])))
            }
        }
    })
}

impl ParseNode {
    /// Parses a Penn-style bracketed tree, e.g. `(S (NP (NNP Anna)) (VP (VBP sings)))`.
    /// An unlabeled outer wrapper `( (S ...) )` is accepted and removed.
    pub fn parse(text: &str) -> Result<ParseNode, ParseTreeError> {
        let mut stack: Vec<Frame> = Vec::new();
        let mut root: Option<ParseNode> = None;
        let err = |position, message| Err(ParseTreeError { position, message });

        for (pos, lexeme) in lex(text) {
            if root.is_some() {
                return err(pos, "trailing input after tree");
            }
            match lexeme {
                Lexeme::Open => {
                    if let Some(top) = stack.last_mut() {
                        if top.word.is_some() {
                            return err(pos, "constituent after word");
                        }
                        top.tag.get_or_insert_with(String::new);
                    }
                    if stack.len() >= MAX_DEPTH {
                        return err(pos, "tree too deep");
                    }
                    stack.push(Frame {
                        open: pos,
                        tag: None,
                        word: None,
                        children: Vec::new(),
                    });
                }
                Lexeme::Atom(atom) => {
                    let Some(top) = stack.last_mut() else {
                        return err(pos, "word outside brackets");
                    };
                    if top.tag.is_none() {
                        top.tag = Some(atom.to_string());
                    } else if top.word.is_none() && top.children.is_empty() {
                        top.word = Some(unescape_bracket(atom));
                    } else {
                        return err(pos, "unexpected word");
                    }
                }
                Lexeme::Close => {
                    let Some(frame) = stack.pop() else {
                        return err(pos, "unbalanced closing bracket");
                    };
                    let Some(tag) = frame.tag else {
                        return err(frame.open, "empty brackets");
                    };
                    let node = if frame.word.is_some() {
                        ParseNode {
                            tag,
                            word: frame.word,
                            children: Vec::new(),
                        }
                    } else if frame.children.is_empty() {
                        return err(frame.open, "constituent without children");
                    } else if tag.is_empty() && frame.children.len() == 1 {
                        frame.children.into_iter().next().unwrap()
                    } else {
                        ParseNode {
                            tag,
                            word: None,
                            children: frame.children,
                        }
                    };
                    match stack.last_mut() {
                        Some(parent) => parent.children.push(node),
                        None => root = Some(node),
                    }
                }
            }
        }
        if let Some(frame) = stack.first() {
            return err(frame.open, "unclosed bracket");
        }
        root.ok_or(ParseTreeError {
            position: text.len(),
            message: "empty input",
        })
    }

    pub fn is_preterminal(&self) -> bool {
        self.word.is_some()
    }

    /// Words in order.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            match &node.word {
                Some(w) => out.push(w.as_str()),
                None => stack.extend(node.children.iter().rev()),
            }
        }
        out
    }

    /// Tag with function suffixes stripped (`NP-SBJ` -> `NP`).
    pub fn base_tag(&self) -> &str {
        let tag = self.tag.as_str();
        if tag.starts_with('-') {
            return tag;
        }
        tag.split(['-', '=']).next().unwrap_or(tag)
    }
}
