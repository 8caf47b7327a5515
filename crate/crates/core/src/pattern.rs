//! Extraction patterns: generation from a sentence holding a known relation,
//! and matching against tagged sentences.
//!
//! Three variants exist: the full word or tag sequence between the two
//! entities, a short window of that sequence anchored at one entity, and the
//! constituency-tree label path between the entities' head tokens.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Document, Sentence, Token, PLACEHOLDER_POS};
use crate::entity::EntityMention;
use crate::relation::{RelationKey, RelationKind};

pub const DEFAULT_WINDOW_CAP: usize = 5;
pub const DEFAULT_BETWEEN_CAP: usize = 12;

/// Which entity comes first in the sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    SubjectFirst,
    ObjectFirst,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::SubjectFirst => "subject_first",
            Direction::ObjectFirst => "object_first",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    #[default]
    Word,
    Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    LeftEntity,
    RightEntity,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PatternVariant {
    FullBetween {
        #[serde(default)]
        kind: TokenKind,
        tokens: Vec<String>,
    },
    AnchoredWindow {
        anchor: Anchor,
        #[serde(default)]
        kind: TokenKind,
        tokens: Vec<String>,
    },
    ParsePath {
        labels: Vec<String>,
    },
}

impl PatternVariant {
    fn kind_name(&self) -> &'static str {
        match self {
            PatternVariant::FullBetween { kind: TokenKind::Word, .. } => "full_between-word",
            PatternVariant::FullBetween { kind: TokenKind::Pos, .. } => "full_between-pos",
            PatternVariant::AnchoredWindow { anchor: Anchor::LeftEntity, kind: TokenKind::Word, .. } => "anchored_left-word",
            PatternVariant::AnchoredWindow { anchor: Anchor::LeftEntity, kind: TokenKind::Pos, .. } => "anchored_left-pos",
            PatternVariant::AnchoredWindow { anchor: Anchor::RightEntity, kind: TokenKind::Word, .. } => "anchored_right-word",
            PatternVariant::AnchoredWindow { anchor: Anchor::RightEntity, kind: TokenKind::Pos, .. } => "anchored_right-pos",
            PatternVariant::ParsePath { .. } => "parse_path",
        }
    }

    fn items(&self) -> &[String] {
        match self {
            PatternVariant::FullBetween { tokens, .. } | PatternVariant::AnchoredWindow { tokens, .. } => tokens,
            PatternVariant::ParsePath { labels } => labels,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PatternProvenance {
    #[default]
    Seed,
    Learned,
}

/// Pattern identity. The derived order (relation, direction, variant, with
/// full-between before anchored before parse-path) is the deterministic
/// tie-break used when ranking.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PatternId {
    pub relation: RelationKind,
    pub direction: Direction,
    pub variant: PatternVariant,
}

impl PatternId {
    /// Stable key used in answer files.
    pub fn candidate_key(&self) -> String {
        format!(
            "pat:{}:{}:{}:{}",
            self.relation.name(),
            self.direction.name(),
            self.variant.kind_name(),
            self.variant.items().join(" ")
        )
    }
}

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (left, right) = match self.direction {
            Direction::SubjectFirst => ("<subject>", "<object>"),
            Direction::ObjectFirst => ("<object>", "<subject>"),
        };
        let kind_tag = |k: &TokenKind| if *k == TokenKind::Pos { "/pos" } else { "" };
        match &self.variant {
            PatternVariant::FullBetween { kind, tokens } => {
                write!(f, "{}{}: {left} {} {right}", self.relation, kind_tag(kind), tokens.join(" "))
            }
            PatternVariant::AnchoredWindow { anchor: Anchor::LeftEntity, kind, tokens } => {
                write!(f, "{}{}: {left} {} ... {right}", self.relation, kind_tag(kind), tokens.join(" "))
            }
            PatternVariant::AnchoredWindow { anchor: Anchor::RightEntity, kind, tokens } => {
                write!(f, "{}{}: {left} ... {} {right}", self.relation, kind_tag(kind), tokens.join(" "))
            }
            PatternVariant::ParsePath { labels } => {
                write!(f, "{}: {left} [{}] {right}", self.relation, labels.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub relation: RelationKind,
    pub direction: Direction,
    pub variant: PatternVariant,
    #[serde(default)]
    pub provenance: PatternProvenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("pattern has an empty token sequence")]
    EmptySequence,
    #[error("pattern contains an empty token")]
    EmptyToken,
    #[error("anchored window of {len} tokens exceeds the cap of {cap}")]
    WindowTooLong { len: usize, cap: usize },
    #[error("parse path needs at least 2 labels, got {0}")]
    ShortPath(usize),
    #[error("document {0:?} appears more than once")]
    DuplicateDocument(String),
}

impl Pattern {
    /// Builds a pattern, case-folding word tokens.
    pub fn new(relation: RelationKind, direction: Direction, variant: PatternVariant, provenance: PatternProvenance) -> Self {
        let variant = match variant {
            PatternVariant::FullBetween { kind: TokenKind::Word, tokens } => PatternVariant::FullBetween {
                kind: TokenKind::Word,
                tokens: tokens.iter().map(|t| t.to_lowercase()).collect(),
            },
            PatternVariant::AnchoredWindow { anchor, kind: TokenKind::Word, tokens } => PatternVariant::AnchoredWindow {
                anchor,
                kind: TokenKind::Word,
                tokens: tokens.iter().map(|t| t.to_lowercase()).collect(),
            },
            other => other,
        };
        Pattern { relation, direction, variant, provenance }
    }

    /// Re-applies the case folding of [`Pattern::new`], e.g. after deserializing.
    pub fn normalized(self) -> Self {
        Pattern::new(self.relation, self.direction, self.variant, self.provenance)
    }

    pub fn id(&self) -> PatternId {
        PatternId { relation: self.relation, direction: self.direction, variant: self.variant.clone() }
    }

    pub fn validate(&self, window_cap: usize) -> Result<(), PatternError> {
        match &self.variant {
            PatternVariant::FullBetween { tokens, .. } | PatternVariant::AnchoredWindow { tokens, .. } => {
                if tokens.is_empty() {
                    return Err(PatternError::EmptySequence);
                }
                if tokens.iter().any(String::is_empty) {
                    return Err(PatternError::EmptyToken);
                }
                if matches!(self.variant, PatternVariant::AnchoredWindow { .. }) && tokens.len() > window_cap {
                    return Err(PatternError::WindowTooLong { len: tokens.len(), cap: window_cap });
                }
            }
            PatternVariant::ParsePath { labels } => {
                if labels.len() < 2 {
                    return Err(PatternError::ShortPath(labels.len()));
                }
                if labels.iter().any(String::is_empty) {
                    return Err(PatternError::EmptyToken);
                }
            }
        }
        Ok(())
    }
}

/// Two type-compatible mentions in one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandidatePair<'a> {
    pub subject: &'a EntityMention,
    pub object: &'a EntityMention,
    pub direction: Direction,
}

impl<'a> CandidatePair<'a> {
    pub fn left(&self) -> &'a EntityMention {
        match self.direction {
            Direction::SubjectFirst => self.subject,
            Direction::ObjectFirst => self.object,
        }
    }

    pub fn right(&self) -> &'a EntityMention {
        match self.direction {
            Direction::SubjectFirst => self.object,
            Direction::ObjectFirst => self.subject,
        }
    }

    /// Tokens strictly between the two mentions.
    pub fn between<'s>(&self, sentence: &'s Sentence) -> &'s [Token] {
        &sentence.tokens[self.left().last() + 1..self.right().first()]
    }

    pub fn relation_key(&self, relation: RelationKind) -> RelationKey {
        RelationKey::new(relation, &self.subject.canonical, &self.object.canonical)
    }
}

/// All ordered (subject, object) pairs of non-overlapping mentions of the
/// relation's types in `sentence`, in (subject span, object span) order.
/// Adjacent pairs are included; only parse paths can use them.
pub fn candidate_pairs<'a>(
    sentence: &Sentence,
    mentions: &'a [EntityMention],
    relation: RelationKind,
) -> Vec<CandidatePair<'a>> {
    let in_sentence = |m: &&'a EntityMention| m.sentence_index == sentence.index && m.last() < sentence.tokens.len();
    let subjects: Vec<&EntityMention> =
        mentions.iter().filter(in_sentence).filter(|m| m.entity_type == relation.subject_type()).collect();
    let objects: Vec<&EntityMention> =
        mentions.iter().filter(in_sentence).filter(|m| m.entity_type == relation.object_type()).collect();
    let mut out = Vec::new();
    for s in &subjects {
        for o in &objects {
            if std::ptr::eq(*s, *o) || s.overlaps(o) {
                continue;
            }
            let direction = if s.first() < o.first() { Direction::SubjectFirst } else { Direction::ObjectFirst };
            out.push(CandidatePair { subject: s, object: o, direction });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerationOptions {
    pub window_cap: usize,
    pub between_cap: usize,
    /// Emit parse-path patterns. Off for sentences whose tree is only the
    /// flat fallback, whose paths say nothing beyond the two tags.
    pub parse_paths: bool,
}

impl Default for GenerationOptions {
    fn default() -> Self {
        GenerationOptions { window_cap: DEFAULT_WINDOW_CAP, between_cap: DEFAULT_BETWEEN_CAP, parse_paths: true }
    }
}

fn project(tokens: &[Token], kind: TokenKind) -> Vec<String> {
    tokens
        .iter()
        .map(|t| match kind {
            TokenKind::Word => t.text.to_lowercase(),
            TokenKind::Pos => t.pos.clone(),
        })
        .collect()
}

pub fn projection_eq(tokens: &[Token], kind: TokenKind, seq: &[String]) -> bool {
    tokens.len() == seq.len()
        && tokens.iter().zip(seq).all(|(t, s)| match kind {
            TokenKind::Word => t.text.to_lowercase() == *s,
            TokenKind::Pos => t.pos == *s,
        })
}

/// Tree label path between the head (last) tokens of the pair, left to right.
pub fn pair_path(sentence: &Sentence, pair: &CandidatePair<'_>) -> Option<Vec<String>> {
    sentence.tree.as_ref()?.path_labels(pair.left().last(), pair.right().last())
}

/// Patterns describing how `pair` is expressed in `sentence`, deduplicated.
pub fn generate_patterns(
    sentence: &Sentence,
    pair: &CandidatePair<'_>,
    relation: RelationKind,
    options: &GenerationOptions,
) -> Vec<Pattern> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |variant: PatternVariant| {
        let p = Pattern::new(relation, pair.direction, variant, PatternProvenance::Learned);
        if seen.insert(p.id()) {
            out.push(p);
        }
    };

    let between = pair.between(sentence);
    if !between.is_empty() {
        if between.len() <= options.between_cap {
            push(PatternVariant::FullBetween { kind: TokenKind::Word, tokens: project(between, TokenKind::Word) });
            if between.iter().all(|t| t.pos != PLACEHOLDER_POS) {
                push(PatternVariant::FullBetween { kind: TokenKind::Pos, tokens: project(between, TokenKind::Pos) });
            }
        }
        let words = project(between, TokenKind::Word);
        for k in 1..=options.window_cap.min(words.len()) {
            push(PatternVariant::AnchoredWindow {
                anchor: Anchor::LeftEntity,
                kind: TokenKind::Word,
                tokens: words[..k].to_vec(),
            });
            push(PatternVariant::AnchoredWindow {
                anchor: Anchor::RightEntity,
                kind: TokenKind::Word,
                tokens: words[words.len() - k..].to_vec(),
            });
        }
    }
    if options.parse_paths {
        if let Some(labels) = pair_path(sentence, pair) {
            push(PatternVariant::ParsePath { labels });
        }
    }
    out
}

/// True if `pattern` matches the configuration of `pair` in `sentence`.
pub fn pattern_matches_pair(pattern: &Pattern, sentence: &Sentence, pair: &CandidatePair<'_>) -> bool {
    if pair.direction != pattern.direction {
        return false;
    }
    let between = || pair.between(sentence);
    match &pattern.variant {
        PatternVariant::FullBetween { kind, tokens } => projection_eq(between(), *kind, tokens),
        PatternVariant::AnchoredWindow { anchor, kind, tokens } => {
            let b = between();
            if b.len() < tokens.len() {
                return false;
            }
            let window = match anchor {
                Anchor::LeftEntity => &b[..tokens.len()],
                Anchor::RightEntity => &b[b.len() - tokens.len()..],
            };
            projection_eq(window, *kind, tokens)
        }
        PatternVariant::ParsePath { labels } => pair_path(sentence, pair).is_some_and(|p| p == *labels),
    }
}

/// One place a pattern matched.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Occurrence {
    pub pattern: PatternId,
    pub doc_id: String,
    pub sentence_index: usize,
    pub subject: EntityMention,
    pub object: EntityMention,
}

impl Occurrence {
    pub fn relation_key(&self) -> RelationKey {
        RelationKey::new(self.pattern.relation, &self.subject.canonical, &self.object.canonical)
    }
}

pub fn match_pattern(pattern: &Pattern, sentence: &Sentence, mentions: &[EntityMention]) -> Vec<Occurrence> {
    let id = pattern.id();
    candidate_pairs(sentence, mentions, pattern.relation)
        .into_iter()
        .filter(|pair| pattern_matches_pair(pattern, sentence, pair))
        .map(|pair| Occurrence {
            pattern: id.clone(),
            doc_id: pair.subject.doc_id.clone(),
            sentence_index: sentence.index,
            subject: pair.subject.clone(),
            object: pair.object.clone(),
        })
        .collect()
}

/// Matches every pattern against every sentence. Each pattern gets an entry
/// (possibly empty); occurrence lists are sorted and deduplicated.
pub fn match_corpus(
    patterns: &[Pattern],
    documents: &[Document],
    mentions_by_doc: &BTreeMap<String, Vec<EntityMention>>,
) -> Result<BTreeMap<PatternId, Vec<Occurrence>>, PatternError> {
    let mut out: BTreeMap<PatternId, Vec<Occurrence>> = patterns.iter().map(|p| (p.id(), Vec::new())).collect();
    if patterns.is_empty() {
        return Ok(out);
    }
    let mut by_relation: BTreeMap<RelationKind, Vec<&Pattern>> = BTreeMap::new();
    for p in patterns {
        by_relation.entry(p.relation).or_default().push(p);
    }
    let mut seen_docs = HashSet::new();
    for doc in documents {
        if !seen_docs.insert(doc.id.as_str()) {
            return Err(PatternError::DuplicateDocument(doc.id.clone()));
        }
        let mentions = mentions_by_doc.get(&doc.id).map(Vec::as_slice).unwrap_or(&[]);
        for sentence in &doc.sentences {
            for (relation, pats) in &by_relation {
                let pairs = candidate_pairs(sentence, mentions, *relation);
                if pairs.is_empty() {
                    continue;
                }
                for p in pats {
                    let id = p.id();
                    for pair in pairs.iter().filter(|pair| pattern_matches_pair(p, sentence, pair)) {
                        out.get_mut(&id).expect("every pattern has an entry").push(Occurrence {
                            pattern: id.clone(),
                            doc_id: doc.id.clone(),
                            sentence_index: sentence.index,
                            subject: pair.subject.clone(),
                            object: pair.object.clone(),
                        });
                    }
                }
            }
        }
    }
    for occ in out.values_mut() {
        occ.sort();
        occ.dedup();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_bracketed_tree, tokenize};
    use crate::entity::{EntityType, MentionProvenance};

    fn mention(sentence: usize, span: (usize, usize), ty: EntityType, canonical: &str) -> EntityMention {
        EntityMention {
            doc_id: "d".into(),
            sentence_index: sentence,
            token_span: span,
            entity_type: ty,
            canonical: canonical.into(),
            provenance: MentionProvenance::Gazetteer,
        }
    }

    fn vendor(span: (usize, usize), c: &str) -> EntityMention {
        mention(0, span, EntityType::SwVendor, c)
    }

    fn product(span: (usize, usize), c: &str) -> EntityMention {
        mention(0, span, EntityType::SwProduct, c)
    }

    fn words_of(p: &Pattern) -> (&'static str, Vec<String>) {
        (p.variant.kind_name(), p.variant.items().to_vec())
    }

    fn eggs() -> Sentence {
        let mut s = tokenize("I like eggs").remove(0);
        for (t, pos) in s.tokens.iter_mut().zip(["N", "V", "N"]) {
            t.pos = pos.into();
        }
        s.tree = Some(parse_bracketed_tree("(S (NP (N I)) (VP (V like) (N eggs)))").unwrap());
        s
    }

    #[test]
    fn pairs_by_type() {
        let s = tokenize("Adobe ships Acrobat").remove(0);
        let ms = vec![vendor((0, 0), "Adobe"), product((2, 2), "Acrobat")];
        let pairs = candidate_pairs(&s, &ms, RelationKind::IsVendorOf);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].direction, Direction::SubjectFirst);

        let s = tokenize("Acrobat and Reader 9 updates").remove(0);
        let ms = vec![
            product((0, 0), "Acrobat"),
            product((2, 2), "Reader"),
            mention(0, (3, 3), EntityType::SwVersion, "9"),
        ];
        let pairs = candidate_pairs(&s, &ms, RelationKind::IsVersionOf);
        assert_eq!(pairs.len(), 2);
        assert!(pairs.iter().all(|p| p.direction == Direction::ObjectFirst));
        assert!(candidate_pairs(&s, &ms, RelationKind::CveOfVuln).is_empty());
    }

    #[test]
    fn eggs_parse_path() {
        let s = eggs();
        let ms = vec![vendor((0, 0), "I"), product((2, 2), "eggs")];
        let pairs = candidate_pairs(&s, &ms, RelationKind::IsVendorOf);
        let pats = generate_patterns(&s, &pairs[0], RelationKind::IsVendorOf, &GenerationOptions::default());
        let path = pats.iter().find(|p| matches!(p.variant, PatternVariant::ParsePath { .. })).unwrap();
        assert_eq!(path.variant.items(), ["N", "NP", "S", "VP", "N"]);

        let seed = Pattern::new(
            RelationKind::IsVendorOf,
            Direction::SubjectFirst,
            PatternVariant::ParsePath { labels: ["N", "NP", "S", "VP", "N"].map(String::from).to_vec() },
            PatternProvenance::Seed,
        );
        assert_eq!(match_pattern(&seed, &s, &ms).len(), 1);
    }

    #[test]
    fn generation_from_example_sentence() {
        let s = tokenize("Microsoft has released a fix for Internet Explorer").remove(0);
        let ms = vec![vendor((0, 0), "Microsoft"), product((6, 7), "Internet Explorer")];
        let pair = candidate_pairs(&s, &ms, RelationKind::IsVendorOf)[0];
        let pats = generate_patterns(&s, &pair, RelationKind::IsVendorOf, &GenerationOptions::default());
        let got: Vec<_> = pats.iter().map(words_of).collect();
        let w = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(got[0], ("full_between-word", w(&["has", "released", "a", "fix", "for"])));
        assert!(got.contains(&("anchored_left-word", w(&["has"]))));
        assert!(got.contains(&("anchored_left-word", w(&["has", "released"]))));
        assert!(got.contains(&("anchored_right-word", w(&["fix", "for"]))));
        // No POS tags, no tree: words only, 1 full + 5 left + 5 right.
        assert_eq!(pats.len(), 11);
        assert!(pats.iter().all(|p| p.validate(DEFAULT_WINDOW_CAP).is_ok()));
    }

    #[test]
    fn adjacent_entities_without_tree_generate_nothing() {
        let s = tokenize("Adobe Acrobat").remove(0);
        let ms = vec![vendor((0, 0), "Adobe"), product((1, 1), "Acrobat")];
        let pair = candidate_pairs(&s, &ms, RelationKind::IsVendorOf)[0];
        assert!(generate_patterns(&s, &pair, RelationKind::IsVendorOf, &GenerationOptions::default()).is_empty());
    }

    #[test]
    fn full_between_match_and_mismatch() {
        let p = Pattern::new(
            RelationKind::IsVendorOf,
            Direction::SubjectFirst,
            PatternVariant::FullBetween { kind: TokenKind::Word, tokens: vec!["ships".into()] },
            PatternProvenance::Seed,
        );
        let s = tokenize("Adobe ships Acrobat").remove(0);
        let ms = vec![vendor((0, 0), "Adobe"), product((2, 2), "Acrobat")];
        assert_eq!(match_pattern(&p, &s, &ms).len(), 1);

        let s = tokenize("Adobe never ships Acrobat").remove(0);
        let ms = vec![vendor((0, 0), "Adobe"), product((3, 3), "Acrobat")];
        assert!(match_pattern(&p, &s, &ms).is_empty());

        let s = tokenize("ADOBE SHIPS ACROBAT").remove(0);
        let ms = vec![vendor((0, 0), "Adobe"), product((2, 2), "Acrobat")];
        assert_eq!(match_pattern(&p, &s, &ms).len(), 1);
    }

    #[test]
    fn direction_is_respected() {
        let p = Pattern::new(
            RelationKind::IsVendorOf,
            Direction::ObjectFirst,
            PatternVariant::FullBetween { kind: TokenKind::Word, tokens: vec!["by".into()] },
            PatternProvenance::Seed,
        );
        let s = tokenize("Acrobat by Adobe").remove(0);
        let ms = vec![product((0, 0), "Acrobat"), vendor((2, 2), "Adobe")];
        let occ = match_pattern(&p, &s, &ms);
        assert_eq!(occ.len(), 1);
        assert_eq!(occ[0].relation_key(), RelationKey::new(RelationKind::IsVendorOf, "Adobe", "Acrobat"));
        let flipped = Pattern { direction: Direction::SubjectFirst, ..p };
        assert!(match_pattern(&flipped, &s, &ms).is_empty());
    }

    #[test]
    fn pos_and_word_variants_are_independent() {
        let mut s = tokenize("Adobe ships Acrobat").remove(0);
        for (t, pos) in s.tokens.iter_mut().zip(["NNP", "VBZ", "NNP"]) {
            t.pos = pos.into();
        }
        let ms = vec![vendor((0, 0), "Adobe"), product((2, 2), "Acrobat")];
        let pair = candidate_pairs(&s, &ms, RelationKind::IsVendorOf)[0];
        let pats = generate_patterns(&s, &pair, RelationKind::IsVendorOf, &GenerationOptions::default());
        let word = pats.iter().find(|p| p.variant.kind_name() == "full_between-word").unwrap();
        let pos = pats.iter().find(|p| p.variant.kind_name() == "full_between-pos").unwrap();

        let mut s2 = s.clone();
        s2.tokens[1].text = "sells".into();
        assert!(match_pattern(word, &s2, &ms).is_empty());
        assert_eq!(match_pattern(pos, &s2, &ms).len(), 1);
    }

    #[test]
    fn corpus_matching() {
        let p = Pattern::new(
            RelationKind::IsVendorOf,
            Direction::SubjectFirst,
            PatternVariant::FullBetween { kind: TokenKind::Word, tokens: vec!["ships".into()] },
            PatternProvenance::Seed,
        );
        assert!(match_corpus(&[], &[], &BTreeMap::new()).unwrap().is_empty());

        let d1 = Document::from_plain_text("a", "m", "Adobe ships Acrobat.");
        let d2 = Document::from_plain_text("b", "m", "Oracle ships Java.");
        let mut mentions = BTreeMap::new();
        let with_doc = |d: &str, m: EntityMention| EntityMention { doc_id: d.into(), ..m };
        mentions.insert("a".to_string(), vec![with_doc("a", vendor((0, 0), "Adobe")), with_doc("a", product((2, 2), "Acrobat"))]);
        mentions.insert("b".to_string(), vec![with_doc("b", vendor((0, 0), "Oracle")), with_doc("b", product((2, 2), "Java"))]);
        let res = match_corpus(std::slice::from_ref(&p), &[d1.clone(), d2], &mentions).unwrap();
        assert_eq!(res[&p.id()].len(), 2);

        let err = match_corpus(std::slice::from_ref(&p), &[d1.clone(), d1], &mentions).unwrap_err();
        assert_eq!(err, PatternError::DuplicateDocument("a".into()));
    }

    #[test]
    fn validation() {
        let mk = |variant| Pattern::new(RelationKind::SymbolOf, Direction::SubjectFirst, variant, PatternProvenance::Seed);
        assert_eq!(
            mk(PatternVariant::FullBetween { kind: TokenKind::Word, tokens: vec![] }).validate(5),
            Err(PatternError::EmptySequence)
        );
        assert_eq!(
            mk(PatternVariant::AnchoredWindow {
                anchor: Anchor::LeftEntity,
                kind: TokenKind::Word,
                tokens: vec!["a".into(); 6]
            })
            .validate(5),
            Err(PatternError::WindowTooLong { len: 6, cap: 5 })
        );
        assert_eq!(mk(PatternVariant::ParsePath { labels: vec!["N".into()] }).validate(5), Err(PatternError::ShortPath(1)));
    }

    #[test]
    fn seed_json_shape() {
        let json = r#"{"relation":"is_vendor_of","direction":"subject_first",
                       "variant":{"type":"anchored_window","anchor":"right_entity","tokens":["its"]}}"#;
        let p: Pattern = serde_json::from_str(json).unwrap();
        assert_eq!(p.provenance, PatternProvenance::Seed);
        assert_eq!(p.id().candidate_key(), "pat:is_vendor_of:subject_first:anchored_right-word:its");
    }
}
