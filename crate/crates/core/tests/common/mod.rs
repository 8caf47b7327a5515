//! Brute-force references shared by the pattern tests and the acceptance run.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use cyberrel::corpus::{load_corpus, CorpusFormat, Document, ParseTree, Sentence, Token};
use cyberrel::entity::{tag_document, EntityMention, EntityType, Gazetteers, MentionProvenance};
use cyberrel::evalgen::{generate_corpus, SynthSpec};
use cyberrel::pattern::*;
use cyberrel::relation::RelationKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: [&str; 5] = ["of", "the", "Fix", "by", "a"];
const TAGS: [&str; 3] = ["NN", "IN", "DT"];
const LABELS: [&str; 3] = ["NP", "VP", "PP"];

pub fn data_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data"))
}

fn random_tree(lo: usize, hi: usize, tokens: &[Token], rng: &mut ChaCha8Rng) -> Vec<ParseTree> {
    if hi - lo == 1 {
        let t = &tokens[lo];
        return vec![ParseTree::node(t.pos.clone(), vec![ParseTree::leaf(t.text.clone(), t.index)])];
    }
    let mut out = Vec::new();
    let mut start = lo;
    while start < hi {
        let end = rng.gen_range(start + 1..=hi);
        if end - start == hi - lo {
            let mid = rng.gen_range(lo + 1..hi);
            out.extend(random_tree(lo, mid, tokens, rng));
            out.extend(random_tree(mid, hi, tokens, rng));
            break;
        }
        let kids = random_tree(start, end, tokens, rng);
        if kids.len() == 1 {
            out.extend(kids);
        } else {
            out.push(ParseTree::node(LABELS[rng.gen_range(0..LABELS.len())], kids));
        }
        start = end;
    }
    out
}

pub fn random_sentence(seed: u64) -> (Sentence, Vec<EntityMention>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=8);
    let tokens: Vec<Token> = (0..n)
        .map(|i| Token {
            index: i,
            text: WORDS[rng.gen_range(0..WORDS.len())].into(),
            pos: TAGS[rng.gen_range(0..TAGS.len())].into(),
            char_start: 0,
            char_end: 0,
        })
        .collect();
    let tree = ParseTree::node("S", random_tree(0, n, &tokens, &mut rng));
    let mut mentions = Vec::new();
    let mut i = 0;
    while i < n {
        let w = rng.gen_range(1..=2).min(n - i);
        if rng.gen_bool(0.6) {
            let ty = if rng.gen_bool(0.5) { EntityType::SwVendor } else { EntityType::SwProduct };
            mentions.push(EntityMention {
                doc_id: "d".into(),
                sentence_index: 0,
                token_span: (i, i + w - 1),
                entity_type: ty,
                canonical: format!("e{i}"),
                provenance: MentionProvenance::Gazetteer,
            });
        }
        i += w;
    }
    (Sentence { index: 0, tokens, tree: Some(tree) }, mentions)
}

/// Root-to-preterminal label chains, found by exhaustive descent.
pub fn chains(tree: &ParseTree) -> BTreeMap<usize, Vec<(Vec<usize>, String)>> {
    fn walk(node: &ParseTree, addr: Vec<usize>, acc: Vec<(Vec<usize>, String)>, out: &mut BTreeMap<usize, Vec<(Vec<usize>, String)>>) {
        let mut acc = acc;
        acc.push((addr.clone(), node.label.clone()));
        if node.children.len() == 1 {
            if let Some(t) = node.children[0].leaf_token {
                out.insert(t, acc);
                return;
            }
        }
        for (i, c) in node.children.iter().enumerate() {
            let mut a = addr.clone();
            a.push(i);
            walk(c, a, acc.clone(), out);
        }
    }
    let mut out = BTreeMap::new();
    walk(tree, Vec::new(), Vec::new(), &mut out);
    out
}

pub fn brute_path(tree: &ParseTree, from: usize, to: usize) -> Option<Vec<String>> {
    let c = chains(tree);
    let (a, b) = (c.get(&from)?, c.get(&to)?);
    if from == to {
        return None;
    }
    let shared = a.iter().zip(b).filter(|(x, y)| x.0 == y.0).count();
    let mut out: Vec<String> = a[shared - 1..].iter().rev().map(|x| x.1.clone()).collect();
    out.extend(b[shared..].iter().map(|x| x.1.clone()));
    Some(out)
}

pub fn brute_matches(p: &Pattern, s: &Sentence, mentions: &[EntityMention]) -> BTreeSet<((usize, usize), (usize, usize))> {
    let mut out = BTreeSet::new();
    for a in mentions.iter().filter(|m| m.entity_type == p.relation.subject_type()) {
        for b in mentions.iter().filter(|m| m.entity_type == p.relation.object_type()) {
            let ia: BTreeSet<usize> = (a.token_span.0..=a.token_span.1).collect();
            let ib: BTreeSet<usize> = (b.token_span.0..=b.token_span.1).collect();
            if !ia.is_disjoint(&ib) {
                continue;
            }
            let subject_first = a.token_span.0 < b.token_span.0;
            let dir = if subject_first { Direction::SubjectFirst } else { Direction::ObjectFirst };
            if dir != p.direction {
                continue;
            }
            let (l, r) = if subject_first { (a, b) } else { (b, a) };
            let between: Vec<&Token> = s.tokens.iter().filter(|t| t.index > l.token_span.1 && t.index < r.token_span.0).collect();
            let view = |t: &Token, kind: TokenKind| match kind {
                TokenKind::Word => t.text.to_lowercase(),
                TokenKind::Pos => t.pos.clone(),
            };
            let ok = match &p.variant {
                PatternVariant::FullBetween { kind, tokens } => {
                    between.iter().map(|t| view(t, *kind)).collect::<Vec<_>>() == *tokens
                }
                PatternVariant::AnchoredWindow { anchor, kind, tokens } => {
                    let v: Vec<String> = between.iter().map(|t| view(t, *kind)).collect();
                    match anchor {
                        Anchor::LeftEntity => v.starts_with(tokens),
                        Anchor::RightEntity => v.ends_with(tokens),
                    }
                }
                PatternVariant::ParsePath { labels } => {
                    brute_path(s.tree.as_ref().unwrap(), l.token_span.1, r.token_span.1).as_ref() == Some(labels)
                }
            };
            if ok {
                out.insert((a.token_span, b.token_span));
            }
        }
    }
    out
}

pub fn probe_patterns(s: &Sentence, mentions: &[EntityMention]) -> Vec<Pattern> {
    let rel = RelationKind::IsVendorOf;
    let mut out = Vec::new();
    for pair in candidate_pairs(s, mentions, rel) {
        out.extend(generate_patterns(s, &pair, rel, &GenerationOptions::default()));
    }
    let words: Vec<String> = s.tokens.iter().map(|t| t.text.to_lowercase()).collect();
    for i in 0..words.len() {
        for j in i + 1..=words.len().min(i + 3) {
            let seq = words[i..j].to_vec();
            for direction in [Direction::SubjectFirst, Direction::ObjectFirst] {
                out.push(Pattern::new(rel, direction, PatternVariant::FullBetween { kind: TokenKind::Word, tokens: seq.clone() }, PatternProvenance::Learned));
                for anchor in [Anchor::LeftEntity, Anchor::RightEntity] {
                    out.push(Pattern::new(rel, direction, PatternVariant::AnchoredWindow { anchor, kind: TokenKind::Word, tokens: seq.clone() }, PatternProvenance::Learned));
                }
            }
        }
    }
    out
}

pub fn fixture_sentences() -> (Vec<Document>, BTreeMap<String, Vec<EntityMention>>) {
    let gaz = Gazetteers::load_dir(&data_dir().join("gazetteers")).unwrap();
    let mut docs = load_corpus(&data_dir().join("fixtures/corpus"), CorpusFormat::Auto).unwrap();
    let synth = generate_corpus(&SynthSpec { num_docs: 5, ..SynthSpec::default() }, &gaz).unwrap();
    docs.extend(synth.documents);
    for d in &mut docs {
        d.ensure_trees();
    }
    let mentions = docs.iter().map(|d| (d.id.clone(), tag_document(d, &gaz))).collect();
    (docs, mentions)
}

/// Every pattern generated from a (sentence, pair) must match that pair
/// again. Returns how many patterns were checked.
pub fn generated_patterns_round_trip(docs: &[Document], mentions: &BTreeMap<String, Vec<EntityMention>>) -> Result<usize, String> {
    let mut checked = 0;
    for d in docs {
        let ms = &mentions[&d.id];
        for s in &d.sentences {
            for rel in RelationKind::ALL {
                for pair in candidate_pairs(s, ms, rel) {
                    let patterns = generate_patterns(s, &pair, rel, &GenerationOptions::default());
                    let found = match_corpus(&patterns, docs, mentions).map_err(|e| e.to_string())?;
                    for p in &patterns {
                        let hit = found[&p.id()].iter().any(|o| {
                            o.doc_id == d.id && o.sentence_index == s.index && o.subject == *pair.subject && o.object == *pair.object
                        });
                        if !hit {
                            return Err(format!("{} does not match its source in {} sentence {}", p.id(), d.id, s.index));
                        }
                        checked += 1;
                    }
                }
            }
        }
    }
    Ok(checked)
}
