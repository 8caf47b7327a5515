//! Constituency trees: bracketed (Penn Treebank style) reading and writing,
//! the flat fallback tree, and label paths between two leaves.

use std::fmt;

use thiserror::Error;

use super::Sentence;

/// A constituency tree node.
///
/// Leaves carry the surface word as their label and the index of the token
/// they cover; every leaf hangs under a preterminal whose label is the POS tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTree {
    pub label: String,
    pub children: Vec<ParseTree>,
    pub leaf_token: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("unexpected '{found}' at offset {offset}")]
    Unexpected { offset: usize, found: char },
    #[error("unexpected end of input at offset {offset}")]
    UnexpectedEnd { offset: usize },
    #[error("empty node at offset {offset}")]
    EmptyNode { offset: usize },
    #[error("node at offset {offset} mixes a bare leaf with other children")]
    MixedLeaf { offset: usize },
    #[error("trailing input at offset {offset}")]
    Trailing { offset: usize },
    #[error("cannot build a tree for an empty sentence")]
    EmptySentence,
}

const ESCAPES: [(&str, &str); 4] = [("(", "-LRB-"), (")", "-RRB-"), ("{", "-LCB-"), ("}", "-RCB-")];

fn escape_leaf(word: &str) -> &str {
    ESCAPES
        .iter()
        .find(|(raw, _)| *raw == word)
        .map(|(_, esc)| *esc)
        .unwrap_or(word)
}

fn unescape_leaf(word: &str) -> String {
    ESCAPES
        .iter()
        .find(|(_, esc)| *esc == word)
        .map(|(raw, _)| raw.to_string())
        .unwrap_or_else(|| word.to_string())
}

impl ParseTree {
    pub fn leaf(word: impl Into<String>, token: usize) -> Self {
        ParseTree { label: word.into(), children: Vec::new(), leaf_token: Some(token) }
    }

    pub fn node(label: impl Into<String>, children: Vec<ParseTree>) -> Self {
        ParseTree { label: label.into(), children, leaf_token: None }
    }

    pub fn is_leaf(&self) -> bool {
        self.leaf_token.is_some()
    }

    pub fn is_preterminal(&self) -> bool {
        self.children.len() == 1 && self.children[0].is_leaf()
    }

    /// Leaves in reading order.
    pub fn leaves(&self) -> Vec<&ParseTree> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a ParseTree>) {
        if self.is_leaf() {
            out.push(self);
        }
        for c in &self.children {
            c.collect_leaves(out);
        }
    }

    /// Preterminals in reading order (one per leaf in a well-formed tree).
    pub fn preterminals(&self) -> Vec<&ParseTree> {
        let mut out = Vec::new();
        self.collect_preterminals(&mut out);
        out
    }

    fn collect_preterminals<'a>(&'a self, out: &mut Vec<&'a ParseTree>) {
        if self.is_preterminal() {
            out.push(self);
            return;
        }
        for c in &self.children {
            c.collect_preterminals(out);
        }
    }

    /// Bracketed rendering; `parse_bracketed_tree` reads it back unchanged.
    pub fn to_bracketed(&self) -> String {
        let mut s = String::new();
        self.write_bracketed(&mut s);
        s
    }

    fn write_bracketed(&self, out: &mut String) {
        if self.is_leaf() {
            out.push_str(escape_leaf(&self.label));
            return;
        }
        out.push('(');
        out.push_str(&self.label);
        for c in &self.children {
            out.push(' ');
            c.write_bracketed(out);
        }
        out.push(')');
    }

    /// Child-index path from the root to the preterminal above `token`.
    fn preterminal_path(&self, token: usize) -> Option<Vec<usize>> {
        fn walk(node: &ParseTree, token: usize, path: &mut Vec<usize>) -> bool {
            if node.is_preterminal() {
                return node.children[0].leaf_token == Some(token);
            }
            for (i, c) in node.children.iter().enumerate() {
                path.push(i);
                if walk(c, token, path) {
                    return true;
                }
                path.pop();
            }
            false
        }
        let mut path = Vec::new();
        walk(self, token, &mut path).then_some(path)
    }

    fn labels_along(&self, path: &[usize]) -> Vec<&str> {
        let mut node = self;
        let mut labels = vec![node.label.as_str()];
        for &i in path {
            node = &node.children[i];
            labels.push(node.label.as_str());
        }
        labels
    }

    /// Label sequence on the unique tree path from the preterminal over token
    /// `from` up to the lowest common ancestor and down to the preterminal over
    /// token `to`. `None` if either token is not a leaf of this tree or they
    /// are the same token.
    pub fn path_labels(&self, from: usize, to: usize) -> Option<Vec<String>> {
        if from == to {
            return None;
        }
        let pa = self.preterminal_path(from)?;
        let pb = self.preterminal_path(to)?;
        let common = pa.iter().zip(&pb).take_while(|(x, y)| x == y).count();
        let la = self.labels_along(&pa);
        let lb = self.labels_along(&pb);
        let mut out: Vec<String> = la[common..].iter().rev().map(|s| s.to_string()).collect();
        out.extend(lb[common + 1..].iter().map(|s| s.to_string()));
        Some(out)
    }
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bracketed())
    }
}

struct Reader<'a> {
    src: &'a str,
    pos: usize,
    next_leaf: usize,
}

impl<'a> Reader<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn atom(&mut self) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_whitespace() || c == '(' || c == ')' {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.src[start..self.pos]
    }

    fn expect_open(&mut self) -> Result<usize, TreeError> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                let at = self.pos;
                self.pos += 1;
                Ok(at)
            }
            Some(c) => Err(TreeError::Unexpected { offset: self.pos, found: c }),
            None => Err(TreeError::UnexpectedEnd { offset: self.pos }),
        }
    }

    /// Parses one bracketed node whose opening paren has already been consumed.
    fn node(&mut self, open_at: usize) -> Result<ParseTree, TreeError> {
        self.skip_ws();
        let label = match self.peek() {
            None => return Err(TreeError::UnexpectedEnd { offset: self.pos }),
            Some(')') => return Err(TreeError::EmptyNode { offset: open_at }),
            Some('(') => String::new(),
            Some(_) => self.atom().to_string(),
        };
        let mut children = Vec::new();
        let mut bare_leaves = 0usize;
        loop {
            self.skip_ws();
            match self.peek() {
                None => return Err(TreeError::UnexpectedEnd { offset: self.pos }),
                Some(')') => {
                    self.pos += 1;
                    break;
                }
                Some('(') => {
                    let at = self.pos;
                    self.pos += 1;
                    children.push(self.node(at)?);
                }
                Some(_) => {
                    let word = unescape_leaf(self.atom());
                    children.push(ParseTree::leaf(word, usize::MAX));
                    bare_leaves += 1;
                }
            }
        }
        if children.is_empty() {
            return Err(TreeError::EmptyNode { offset: open_at });
        }
        if bare_leaves > 0 && (bare_leaves > 1 || children.len() > 1) {
            return Err(TreeError::MixedLeaf { offset: open_at });
        }
        if bare_leaves == 1 {
            if label.is_empty() {
                return Err(TreeError::EmptyNode { offset: open_at });
            }
            children[0].leaf_token = Some(self.next_leaf);
            self.next_leaf += 1;
        }
        if label.is_empty() {
            // PTB files wrap each tree in an unlabeled outer bracket.
            if children.len() == 1 {
                return Ok(children.pop().unwrap());
            }
            return Ok(ParseTree::node("ROOT", children));
        }
        Ok(ParseTree::node(label, children))
    }
}

/// Reads a single bracketed tree such as `(S (NP (N I)) (VP (V like) (N eggs)))`.
/// Leaves are numbered 0.. in reading order.
pub fn parse_bracketed_tree(s: &str) -> Result<ParseTree, TreeError> {
    let mut r = Reader { src: s, pos: 0, next_leaf: 0 };
    let open = r.expect_open()?;
    let tree = r.node(open)?;
    r.skip_ws();
    if r.peek().is_some() {
        return Err(TreeError::Trailing { offset: r.pos });
    }
    Ok(tree)
}

/// Root `S` over one preterminal per token, labeled with the token's tag.
pub fn flat_tree(sentence: &Sentence) -> Result<ParseTree, TreeError> {
    if sentence.tokens.is_empty() {
        return Err(TreeError::EmptySentence);
    }
    let children = sentence
        .tokens
        .iter()
        .map(|t| ParseTree::node(t.pos.clone(), vec![ParseTree::leaf(t.text.clone(), t.index)]))
        .collect();
    Ok(ParseTree::node("S", children))
}
