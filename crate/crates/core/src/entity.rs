//! Entity tagging: alias-aware gazetteers for vendors, products and
//! vulnerability terms, token-level regular expressions for versions,
//! advisory identifiers and code symbols.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{words, Document, Sentence};

/// Longest alias, in tokens, considered by the gazetteer tagger.
pub const MAX_ALIAS_WORDS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityType {
    #[serde(rename = "SW_Vendor")]
    SwVendor,
    #[serde(rename = "SW_Product")]
    SwProduct,
    #[serde(rename = "SW_Version")]
    SwVersion,
    #[serde(rename = "CVE_ID")]
    CveId,
    #[serde(rename = "MS_ID")]
    MsId,
    #[serde(rename = "Vuln_Term")]
    VulnTerm,
    #[serde(rename = "SW_Symbol")]
    SwSymbol,
}

impl EntityType {
    /// All types in table order; also the feature order of count vectors.
    pub const ALL: [EntityType; 7] = [
        EntityType::SwVendor,
        EntityType::SwProduct,
        EntityType::SwVersion,
        EntityType::CveId,
        EntityType::MsId,
        EntityType::VulnTerm,
        EntityType::SwSymbol,
    ];

    /// Types backed by a gazetteer file.
    pub const GAZETTEER: [EntityType; 3] = [EntityType::SwVendor, EntityType::SwProduct, EntityType::VulnTerm];

    pub fn name(self) -> &'static str {
        match self {
            EntityType::SwVendor => "SW_Vendor",
            EntityType::SwProduct => "SW_Product",
            EntityType::SwVersion => "SW_Version",
            EntityType::CveId => "CVE_ID",
            EntityType::MsId => "MS_ID",
            EntityType::VulnTerm => "Vuln_Term",
            EntityType::SwSymbol => "SW_Symbol",
        }
    }

    pub fn ordinal(self) -> usize {
        self as usize
    }

    /// Rank used to break ties between equal spans; lower wins.
    fn precedence(self) -> usize {
        match self {
            EntityType::CveId => 0,
            EntityType::MsId => 1,
            EntityType::SwSymbol => 2,
            EntityType::SwVersion => 3,
            gaz => 4 + gaz.ordinal(),
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EntityType {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EntityType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown entity type {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MentionProvenance {
    Gazetteer,
    Regex,
    Bootstrap,
    User,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntityMention {
    pub doc_id: String,
    pub sentence_index: usize,
    /// Inclusive token indices.
    pub token_span: (usize, usize),
    pub entity_type: EntityType,
    pub canonical: String,
    pub provenance: MentionProvenance,
}

impl EntityMention {
    pub fn first(&self) -> usize {
        self.token_span.0
    }

    pub fn last(&self) -> usize {
        self.token_span.1
    }

    /// Number of tokens covered.
    pub fn width(&self) -> usize {
        self.token_span.1 - self.token_span.0 + 1
    }

    pub fn overlaps(&self, other: &EntityMention) -> bool {
        self.sentence_index == other.sentence_index
            && self.first() <= other.last()
            && other.first() <= self.last()
    }

    /// Case-folded canonical form used for relation identity.
    pub fn key(&self) -> String {
        self.canonical.to_lowercase()
    }
}

#[derive(Debug, Error)]
pub enum GazetteerError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: alias {alias:?} maps to both {first:?} and {second:?}")]
    Conflict { path: PathBuf, line: usize, alias: String, first: String, second: String },
    #[error("{path}:{line}: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },
    #[error("missing gazetteer for {entity_type}: expected {path}")]
    Missing { entity_type: EntityType, path: PathBuf },
}

/// Alias table for one entity type; keys are case-folded and whitespace
/// normalized the same way sentences are tokenized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gazetteer {
    pub entity_type: EntityType,
    pub entries: BTreeMap<String, String>,
}

/// Case-folded, token-normalized form of an alias.
pub fn normalize_alias(alias: &str) -> String {
    words(alias).iter().map(|w| w.to_lowercase()).collect::<Vec<_>>().join(" ")
}

impl Gazetteer {
    pub fn new(entity_type: EntityType) -> Self {
        Gazetteer { entity_type, entries: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds `alias -> canonical`; `Err(existing)` if the alias already names
    /// another canonical.
    pub fn insert(&mut self, canonical: &str, alias: &str) -> Result<(), String> {
        let key = normalize_alias(alias);
        if key.is_empty() {
            return Ok(());
        }
        match self.entries.get(&key) {
            Some(existing) if existing != canonical => Err(existing.clone()),
            Some(_) => Ok(()),
            None => {
                self.entries.insert(key, canonical.to_string());
                Ok(())
            }
        }
    }

    pub fn lookup(&self, alias: &str) -> Option<&str> {
        self.entries.get(&normalize_alias(alias)).map(String::as_str)
    }

    /// Distinct canonical ids in sorted order.
    pub fn canonicals(&self) -> Vec<&str> {
        let mut c: Vec<&str> = self.entries.values().map(String::as_str).collect();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// Aliases (as written in the table, i.e. normalized) of one canonical.
    pub fn aliases_of(&self, canonical: &str) -> Vec<&str> {
        self.entries.iter().filter(|(_, c)| *c == canonical).map(|(a, _)| a.as_str()).collect()
    }

    /// Parses `canonical<TAB>alias` rows. A row with a single column declares
    /// a canonical with no extra alias.
    pub fn from_tsv(entity_type: EntityType, content: &str, path: &Path) -> Result<Self, GazetteerError> {
        let mut g = Gazetteer::new(entity_type);
        let mut rows = Vec::new();
        for (i, line) in content.lines().enumerate() {
            let lineno = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            let (canonical, alias) = match cols.as_slice() {
                [c] => (*c, *c),
                [c, a] => (*c, *a),
                _ => {
                    return Err(GazetteerError::Malformed {
                        path: path.to_path_buf(),
                        line: lineno,
                        message: format!("expected canonical<TAB>alias, found {} columns", cols.len()),
                    })
                }
            };
            if canonical.is_empty() {
                return Err(GazetteerError::Malformed {
                    path: path.to_path_buf(),
                    line: lineno,
                    message: "empty canonical".into(),
                });
            }
            rows.push((lineno, canonical, alias));
        }
        // Self-aliases first so a canonical always owns its own name.
        for &(lineno, canonical, _) in &rows {
            g.insert(canonical, canonical).map_err(|first| GazetteerError::Conflict {
                path: path.to_path_buf(),
                line: lineno,
                alias: canonical.to_string(),
                first,
                second: canonical.to_string(),
            })?;
        }
        for &(lineno, canonical, alias) in &rows {
            g.insert(canonical, alias).map_err(|first| GazetteerError::Conflict {
                path: path.to_path_buf(),
                line: lineno,
                alias: alias.to_string(),
                first,
                second: canonical.to_string(),
            })?;
        }
        Ok(g)
    }
}

pub fn load_gazetteer(path: &Path, entity_type: EntityType) -> Result<Gazetteer, GazetteerError> {
    let content =
        fs::read_to_string(path).map_err(|source| GazetteerError::Io { path: path.to_path_buf(), source })?;
    Gazetteer::from_tsv(entity_type, &content, path)
}

/// The gazetteer-backed taggers, one per gazetteer entity type.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Gazetteers {
    pub tables: Vec<Gazetteer>,
}

impl Gazetteers {
    pub fn new(tables: Vec<Gazetteer>) -> Self {
        Gazetteers { tables }
    }

    /// Loads `<Type>.tsv` for every gazetteer-backed type from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, GazetteerError> {
        let mut tables = Vec::new();
        for ty in EntityType::GAZETTEER {
            let path = dir.join(format!("{}.tsv", ty.name()));
            if !path.is_file() {
                return Err(GazetteerError::Missing { entity_type: ty, path });
            }
            tables.push(load_gazetteer(&path, ty)?);
        }
        Ok(Gazetteers { tables })
    }

    pub fn get(&self, ty: EntityType) -> Option<&Gazetteer> {
        self.tables.iter().find(|g| g.entity_type == ty)
    }

    /// Canonical id of `surface` under `ty`, if the gazetteer knows it.
    pub fn canonicalize(&self, ty: EntityType, surface: &str) -> Option<&str> {
        self.get(ty).and_then(|g| g.lookup(surface))
    }
}

/// Greedy longest-match, left to right, over case-folded token n-grams.
pub fn tag_gazetteer(doc_id: &str, sentence: &Sentence, gazetteer: &Gazetteer) -> Vec<EntityMention> {
    let folded: Vec<String> = sentence.tokens.iter().map(|t| t.text.to_lowercase()).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < folded.len() {
        let longest = MAX_ALIAS_WORDS.min(folded.len() - i);
        let hit = (1..=longest).rev().find_map(|n| {
            let key = folded[i..i + n].join(" ");
            gazetteer.entries.get(&key).map(|c| (n, c))
        });
        match hit {
            Some((n, canonical)) => {
                out.push(EntityMention {
                    doc_id: doc_id.to_string(),
                    sentence_index: sentence.index,
                    token_span: (i, i + n - 1),
                    entity_type: gazetteer.entity_type,
                    canonical: canonical.clone(),
                    provenance: MentionProvenance::Gazetteer,
                });
                i += n;
            }
            None => i += 1,
        }
    }
    out
}

static CVE_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^CVE-\d{4}-\d{4,7}$").unwrap());
static MS_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^MS-?\d{2}-\d{3}$").unwrap());
static VERSION_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\d+(\.\d+)*$").unwrap());
static CALL_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Za-z_][A-Za-z0-9_.:$~-]*\(\)$").unwrap());
static FILE_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^[A-Za-z0-9_$~-]+(\.[A-Za-z0-9_$~-]+)*\.(exe|dll|sys|php|js|py)$").unwrap());

/// Type a single token is assigned by the built-in expressions, if any.
pub fn regex_type(token: &str) -> Option<EntityType> {
    if CVE_RE.is_match(token) {
        Some(EntityType::CveId)
    } else if MS_RE.is_match(token) {
        Some(EntityType::MsId)
    } else if CALL_RE.is_match(token) || FILE_RE.is_match(token) {
        Some(EntityType::SwSymbol)
    } else if VERSION_RE.is_match(token) {
        Some(EntityType::SwVersion)
    } else {
        None
    }
}

pub fn tag_regex(doc_id: &str, sentence: &Sentence) -> Vec<EntityMention> {
    sentence
        .tokens
        .iter()
        .filter_map(|t| {
            let ty = regex_type(&t.text)?;
            let canonical = match ty {
                EntityType::CveId | EntityType::MsId => t.text.to_uppercase(),
                _ => t.text.clone(),
            };
            Some(EntityMention {
                doc_id: doc_id.to_string(),
                sentence_index: sentence.index,
                token_span: (t.index, t.index),
                entity_type: ty,
                canonical,
                provenance: MentionProvenance::Regex,
            })
        })
        .collect()
}

/// Keeps a non-overlapping subset: longer spans first, then type precedence,
/// then position. Output is sorted by (sentence, span, type name).
pub fn resolve_overlaps(mut candidates: Vec<EntityMention>) -> Vec<EntityMention> {
    candidates.sort_by(|a, b| {
        (a.sentence_index, std::cmp::Reverse(a.width()), a.entity_type.precedence(), a.token_span).cmp(&(
            b.sentence_index,
            std::cmp::Reverse(b.width()),
            b.entity_type.precedence(),
            b.token_span,
        ))
    });
    let mut kept: Vec<EntityMention> = Vec::with_capacity(candidates.len());
    for c in candidates {
        if !kept.iter().any(|k| k.overlaps(&c)) {
            kept.push(c);
        }
    }
    sort_mentions(&mut kept);
    kept
}

pub fn sort_mentions(mentions: &mut [EntityMention]) {
    mentions.sort_by(|a, b| {
        (a.sentence_index, a.token_span, a.entity_type.name()).cmp(&(b.sentence_index, b.token_span, b.entity_type.name()))
    });
}

pub fn tag_sentence(doc_id: &str, sentence: &Sentence, gazetteers: &Gazetteers) -> Vec<EntityMention> {
    let mut all = tag_regex(doc_id, sentence);
    for g in &gazetteers.tables {
        all.extend(tag_gazetteer(doc_id, sentence, g));
    }
    resolve_overlaps(all)
}

pub fn tag_document(document: &Document, gazetteers: &Gazetteers) -> Vec<EntityMention> {
    document
        .sentences
        .iter()
        .flat_map(|s| tag_sentence(&document.id, s, gazetteers))
        .collect()
}

/// Mentions per type in table order.
pub fn entity_type_counts(mentions: &[EntityMention]) -> [usize; 7] {
    let mut counts = [0; 7];
    for m in mentions {
        counts[m.entity_type.ordinal()] += 1;
    }
    counts
}
