//! Annotated document model and corpus loading.
//!
//! Two on-disk formats are read: `annotated-json` (one document per file with
//! tokens, tags and optional bracketed trees) and `plain-text` (whole file is
//! one document, tokenized by rule).

mod tokenize;
mod tree;

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use tokenize::{tokenize, words};
pub use tree::{flat_tree, parse_bracketed_tree, ParseTree, TreeError};

/// Tag used for tokens that have not been POS-tagged.
pub const PLACEHOLDER_POS: &str = "X";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub index: usize,
    pub text: String,
    pub pos: String,
    /// Byte offsets into the document's raw text.
    pub char_start: usize,
    pub char_end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub index: usize,
    pub tokens: Vec<Token>,
    pub tree: Option<ParseTree>,
}

impl Sentence {
    pub fn is_pos_tagged(&self) -> bool {
        self.tokens.iter().all(|t| t.pos != PLACEHOLDER_POS)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationLevel {
    Raw,
    Tokenized,
    PosTagged,
    Parsed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub source_uri: String,
    pub raw_text: String,
    pub sentences: Vec<Sentence>,
    pub annotation_level: AnnotationLevel,
    pub relevance_label: Option<bool>,
}

impl Document {
    /// Builds a document from raw text using the rule tokenizer.
    pub fn from_plain_text(id: impl Into<String>, source_uri: impl Into<String>, text: impl Into<String>) -> Self {
        let raw_text = text.into();
        let sentences = tokenize(&raw_text);
        let mut doc = Document {
            id: id.into(),
            source_uri: source_uri.into(),
            raw_text,
            sentences,
            annotation_level: AnnotationLevel::Raw,
            relevance_label: None,
        };
        doc.annotation_level = doc.infer_level();
        doc
    }

    /// The most specific level every sentence supports.
    pub fn infer_level(&self) -> AnnotationLevel {
        if self.sentences.is_empty() {
            AnnotationLevel::Raw
        } else if self.sentences.iter().all(|s| s.tree.is_some()) {
            AnnotationLevel::Parsed
        } else if self.sentences.iter().all(Sentence::is_pos_tagged) {
            AnnotationLevel::PosTagged
        } else {
            AnnotationLevel::Tokenized
        }
    }

    /// Source text covered by a sentence.
    pub fn sentence_text(&self, sentence: usize) -> &str {
        let s = &self.sentences[sentence];
        match (s.tokens.first(), s.tokens.last()) {
            (Some(a), Some(b)) => &self.raw_text[a.char_start..b.char_end],
            _ => "",
        }
    }

    /// Attaches a flat tree to every sentence that has none. The annotation
    /// level is left untouched: these trees are a structural stand-in, not a
    /// parse.
    pub fn ensure_trees(&mut self) {
        for s in &mut self.sentences {
            if s.tree.is_none() && !s.tokens.is_empty() {
                s.tree = flat_tree(s).ok();
            }
        }
    }

    /// Checks offsets, ordering, tags and tree alignment. The error message
    /// names the offending sentence/token.
    pub fn validate(&self) -> Result<(), String> {
        for (si, s) in self.sentences.iter().enumerate() {
            if s.index != si {
                return Err(format!("sentences[{si}]: index {} out of order", s.index));
            }
            let mut prev_end = 0usize;
            for (ti, t) in s.tokens.iter().enumerate() {
                let at = format!("sentences[{si}].tokens[{ti}]");
                if t.index != ti {
                    return Err(format!("{at}: index {} out of order", t.index));
                }
                if t.char_start >= t.char_end {
                    return Err(format!("{at}: start {} must be < end {}", t.char_start, t.char_end));
                }
                if t.char_end > self.raw_text.len()
                    || !self.raw_text.is_char_boundary(t.char_start)
                    || !self.raw_text.is_char_boundary(t.char_end)
                {
                    return Err(format!("{at}: offsets {}..{} outside raw_text", t.char_start, t.char_end));
                }
                if self.raw_text[t.char_start..t.char_end] != t.text {
                    return Err(format!(
                        "{at}: raw_text[{}..{}] is {:?}, token text is {:?}",
                        t.char_start,
                        t.char_end,
                        &self.raw_text[t.char_start..t.char_end],
                        t.text
                    ));
                }
                if t.char_start < prev_end {
                    return Err(format!("{at}: overlaps the previous token"));
                }
                if t.pos.is_empty() {
                    return Err(format!("{at}: empty pos tag"));
                }
                prev_end = t.char_end;
            }
            if let Some(tree) = &s.tree {
                let pre = tree.preterminals();
                let leaves = tree.leaves();
                if leaves.len() != s.tokens.len() || pre.len() != s.tokens.len() {
                    return Err(format!(
                        "sentences[{si}].tree: {} leaves for {} tokens",
                        leaves.len(),
                        s.tokens.len()
                    ));
                }
                for ((t, leaf), p) in s.tokens.iter().zip(&leaves).zip(&pre) {
                    if leaf.label != t.text || leaf.leaf_token != Some(t.index) {
                        return Err(format!(
                            "sentences[{si}].tree: leaf {:?} does not align with token {} {:?}",
                            leaf.label, t.index, t.text
                        ));
                    }
                    if p.label != t.pos {
                        return Err(format!(
                            "sentences[{si}].tree: preterminal {:?} over token {} differs from its tag {:?}",
                            p.label, t.index, t.pos
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Malformed { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("duplicate document id {id:?} in {first} and {second}")]
    DuplicateId { id: String, first: PathBuf, second: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    AnnotatedJson,
    PlainText,
    /// `.json` files as annotated-json, `.txt` files as plain text.
    Auto,
}

impl std::str::FromStr for CorpusFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "annotated-json" => Ok(CorpusFormat::AnnotatedJson),
            "plain-text" => Ok(CorpusFormat::PlainText),
            "auto" => Ok(CorpusFormat::Auto),
            other => Err(format!("unknown corpus format {other:?}")),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TokenRecord {
    text: String,
    pos: String,
    start: usize,
    end: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct SentenceRecord {
    tokens: Vec<TokenRecord>,
    #[serde(default)]
    tree: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DocumentRecord {
    id: String,
    #[serde(default)]
    source_uri: String,
    raw_text: String,
    #[serde(default)]
    sentences: Vec<SentenceRecord>,
    #[serde(default)]
    relevance_label: Option<bool>,
}

/// Serializes a document in the annotated-json layout.
pub fn to_annotated_json(doc: &Document) -> String {
    let record = DocumentRecord {
        id: doc.id.clone(),
        source_uri: doc.source_uri.clone(),
        raw_text: doc.raw_text.clone(),
        sentences: doc
            .sentences
            .iter()
            .map(|s| SentenceRecord {
                tokens: s
                    .tokens
                    .iter()
                    .map(|t| TokenRecord {
                        text: t.text.clone(),
                        pos: t.pos.clone(),
                        start: t.char_start,
                        end: t.char_end,
                    })
                    .collect(),
                tree: s.tree.as_ref().map(ParseTree::to_bracketed),
            })
            .collect(),
        relevance_label: doc.relevance_label,
    };
    serde_json::to_string_pretty(&record).expect("document records always serialize")
}

/// Parses one annotated-json document. `path` is used for error messages.
pub fn parse_annotated_json(path: &Path, content: &str) -> Result<Document, CorpusError> {
    let record: DocumentRecord = serde_json::from_str(content).map_err(|e| CorpusError::Malformed {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let invalid = |message: String| CorpusError::Invalid { path: path.to_path_buf(), message };
    if record.id.is_empty() {
        return Err(invalid("document id is empty".into()));
    }
    let mut sentences = Vec::with_capacity(record.sentences.len());
    for (si, s) in record.sentences.into_iter().enumerate() {
        let tokens: Vec<Token> = s
            .tokens
            .into_iter()
            .enumerate()
            .map(|(ti, t)| Token { index: ti, text: t.text, pos: t.pos, char_start: t.start, char_end: t.end })
            .collect();
        let tree = match s.tree {
            Some(src) => Some(
                parse_bracketed_tree(&src).map_err(|e| invalid(format!("sentences[{si}].tree: {e}")))?,
            ),
            None => None,
        };
        sentences.push(Sentence { index: si, tokens, tree });
    }
    let mut doc = Document {
        id: record.id,
        source_uri: record.source_uri,
        raw_text: record.raw_text,
        sentences,
        annotation_level: AnnotationLevel::Raw,
        relevance_label: record.relevance_label,
    };
    doc.validate().map_err(invalid)?;
    doc.annotation_level = doc.infer_level();
    Ok(doc)
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })
}

fn load_file(path: &Path, format: CorpusFormat) -> Result<Option<Document>, CorpusError> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let format = match format {
        CorpusFormat::Auto => match ext {
            "json" => CorpusFormat::AnnotatedJson,
            "txt" => CorpusFormat::PlainText,
            _ => return Ok(None),
        },
        f => f,
    };
    let content = read(path)?;
    match format {
        CorpusFormat::AnnotatedJson => parse_annotated_json(path, &content).map(Some),
        _ => {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            Ok(Some(Document::from_plain_text(stem, path.display().to_string(), content)))
        }
    }
}

/// Loads every document under `path` (a directory, or a single file).
/// Directory entries are visited in file-name order; hidden files are
/// skipped, and under `Auto` so are files that are neither `.json` nor `.txt`.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<Document>, CorpusError> {
    let io = |source| CorpusError::Io { path: path.to_path_buf(), source };
    let files: Vec<PathBuf> = if path.is_dir() {
        let mut files = Vec::new();
        for entry in fs::read_dir(path).map_err(io)? {
            let entry = entry.map_err(io)?;
            let p = entry.path();
            let hidden = p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with('.'));
            if p.is_file() && !hidden {
                files.push(p);
            }
        }
        files.sort();
        files
    } else if path.is_file() {
        vec![path.to_path_buf()]
    } else {
        return Err(io(std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory")));
    };

    let mut seen: HashMap<String, PathBuf> = HashMap::new();
    let mut docs = Vec::new();
    for f in files {
        if let Some(doc) = load_file(&f, format)? {
            if let Some(first) = seen.get(&doc.id) {
                return Err(CorpusError::DuplicateId { id: doc.id, first: first.clone(), second: f });
            }
            seen.insert(doc.id.clone(), f);
            docs.push(doc);
        }
    }
    Ok(docs)
}

/// Writes each document as `<id>.json` under `dir`.
pub fn write_corpus(dir: &Path, docs: &[Document]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for d in docs {
        fs::write(dir.join(format!("{}.json", d.id)), to_annotated_json(d))?;
    }
    Ok(())
}
