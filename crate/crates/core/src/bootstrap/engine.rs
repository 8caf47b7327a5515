use std::collections::{BTreeMap, BTreeSet, HashMap};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::{
    BootstrapConfig, BootstrapState, ConflictRecord, IterationRecord, KnownPattern, KnownRelation, Seeds, StageCounts,
};
use crate::corpus::{AnnotationLevel, Document, Sentence, Token};
use crate::entity::{sort_mentions, EntityMention, EntityType, MentionProvenance};
use crate::oracle::{Answer, ContextSentence, Oracle, OracleQuery, QueryKind, RelationProgress, RunSnapshot, MAX_CONTEXT};
use crate::pattern::{
    candidate_pairs, generate_patterns, match_corpus, projection_eq, Direction, GenerationOptions, Occurrence, Pattern,
    PatternError, PatternId, PatternProvenance, PatternVariant,
};
use crate::relation::{RelationInstance, RelationKey, RelationKind, RelationProvenance};
use crate::scoring::{accept_with_answers, apply_oracle_override, score_pattern, score_relation, select_queries, Scored};

/// Why a conflict went the way it did.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "cue")]
pub enum ConflictReason {
    Oracle,
    Cue(String),
    Score,
    Tie,
    RivalSeed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConflictSide {
    pub relation: RelationKind,
    pub score: f64,
}

/// Chooses between two relations claimed for the same entity pair.
/// `answer` replies to "is the conservative reading (`not_version_of`, or
/// `b` when neither side is) correct?".
pub fn resolve_conflict(
    a: ConflictSide,
    b: ConflictSide,
    between: &[Token],
    cues: &[String],
    answer: Option<Answer>,
) -> (RelationKind, ConflictReason) {
    let (safe, other) = if a.relation == RelationKind::NotVersionOf { (a, b) } else { (b, a) };
    match answer {
        Some(Answer::Yes) => return (safe.relation, ConflictReason::Oracle),
        Some(Answer::No) => return (other.relation, ConflictReason::Oracle),
        _ => {}
    }
    if let Some(cue) = between.iter().map(|t| t.text.to_lowercase()).find(|w| cues.iter().any(|c| c == w)) {
        return (safe.relation, ConflictReason::Cue(cue));
    }
    let (s, o) = ((safe.score * 1e9).round(), (other.score * 1e9).round());
    if s > o {
        (safe.relation, ConflictReason::Score)
    } else if o > s {
        (other.relation, ConflictReason::Score)
    } else {
        (safe.relation, ConflictReason::Tie)
    }
}

/// A candidate offered to the oracle and then ranked.
struct Candidate<K> {
    id: K,
    key: String,
    score: f64,
    payload: String,
    competing: Vec<String>,
    context: Vec<ContextSentence>,
}

/// What the rival relation's seeds say about entity pairs.
#[derive(Default)]
struct RivalEvidence {
    relation: Option<RelationKind>,
    seeds: BTreeSet<(String, String)>,
    scores: BTreeMap<(String, String), f64>,
}

struct Engine<'a> {
    relation: RelationKind,
    docs: &'a [Document],
    by_id: HashMap<&'a str, &'a Document>,
    mentions: BTreeMap<String, Vec<EntityMention>>,
    config: &'a BootstrapConfig,
    oracle: &'a mut dyn Oracle,
    snapshot: &'a mut RunSnapshot,
    rival: RivalEvidence,
    state: BootstrapState,
}

/// Runs `state` to its fixpoint or `max_iterations` over `documents`.
/// `rival` holds the seeds of the relation that contradicts this one, used
/// to detect conflicts. An empty corpus leaves the state untouched.
pub fn bootstrap_relation(
    state: BootstrapState,
    documents: &[Document],
    mentions: &BTreeMap<String, Vec<EntityMention>>,
    rival: Option<&Seeds>,
    config: &BootstrapConfig,
    oracle: &mut dyn Oracle,
    snapshot: &mut RunSnapshot,
) -> Result<BootstrapState, PatternError> {
    let mut by_id = HashMap::new();
    for d in documents {
        if by_id.insert(d.id.as_str(), d).is_some() {
            return Err(PatternError::DuplicateDocument(d.id.clone()));
        }
    }
    let relation = state.relation;
    let mut engine = Engine {
        relation,
        docs: documents,
        by_id,
        mentions: mentions.clone(),
        config,
        oracle,
        snapshot,
        rival: RivalEvidence::default(),
        state,
    };
    engine.rival = engine.rival_evidence(rival)?;
    engine.publish(None);
    if documents.is_empty() {
        return Ok(engine.state);
    }
    while engine.state.iteration < config.max_iterations {
        let it = engine.state.iteration + 1;
        let record = engine.iterate(it)?;
        engine.state.iteration = it;
        engine.state.history.push(record);
        info!(
            "{} iteration {}: patterns {}/{}/{} relations {}/{}/{} (nominated/queried/accepted), promoted {}, conflicts {}",
            relation,
            it,
            record.patterns.nominated,
            record.patterns.queried,
            record.patterns.accepted,
            record.relations.nominated,
            record.relations.queried,
            record.relations.accepted,
            record.promoted,
            record.conflicts
        );
        engine.publish(None);
        if record.relations.accepted == 0 {
            break;
        }
    }
    Ok(engine.state)
}

fn distinct_known(occurrences: &[Occurrence], known: &BTreeSet<RelationKey>) -> u64 {
    occurrences.iter().map(Occurrence::relation_key).filter(|k| known.contains(k)).collect::<BTreeSet<_>>().len() as u64
}

fn entity_like(token: &Token) -> bool {
    let mut chars = token.text.chars();
    chars.next().is_some_and(|c| c.is_uppercase() || c.is_ascii_digit()) && token.text.chars().any(char::is_alphanumeric)
}

impl Engine<'_> {
    fn mentions_of(&self, doc_id: &str) -> &[EntityMention] {
        self.mentions.get(doc_id).map(Vec::as_slice).unwrap_or(&[])
    }

    fn known_keys(&self) -> BTreeSet<RelationKey> {
        self.state.relations().map(RelationInstance::key).collect()
    }

    fn rival_evidence(&self, rival: Option<&Seeds>) -> Result<RivalEvidence, PatternError> {
        let (Some(relation), Some(seeds)) = (self.relation.rival(), rival) else {
            return Ok(RivalEvidence::default());
        };
        let seed_keys: BTreeSet<RelationKey> = seeds.relations.iter().map(RelationInstance::key).collect();
        let occ = match_corpus(&seeds.patterns, self.docs, &self.mentions)?;
        let mut support: BTreeMap<(String, String), Vec<u64>> = BTreeMap::new();
        for os in occ.values() {
            let f = distinct_known(os, &seed_keys);
            let pairs: BTreeSet<(String, String)> = os.iter().map(|o| (o.subject.key(), o.object.key())).collect();
            for pair in pairs {
                support.entry(pair).or_default().push(f);
            }
        }
        Ok(RivalEvidence {
            relation: Some(relation),
            seeds: seed_keys.into_iter().map(|k| (k.subject, k.object)).collect(),
            scores: support.into_iter().filter_map(|(pair, f)| Some((pair, score_relation(&f).ok()?))).collect(),
        })
    }

    fn context_sentence(&self, doc_id: &str, sentence_index: usize, spans: &[(usize, usize)]) -> Option<ContextSentence> {
        let doc = self.by_id.get(doc_id)?;
        let sentence = doc.sentences.get(sentence_index)?;
        let base = sentence.tokens.first()?.char_start;
        let highlights = spans
            .iter()
            .filter_map(|&(a, b)| Some((sentence.tokens.get(a)?.char_start - base, sentence.tokens.get(b)?.char_end - base)))
            .collect();
        Some(ContextSentence {
            doc_id: doc_id.to_string(),
            sentence_index,
            text: doc.sentence_text(sentence_index).to_string(),
            highlights,
        })
    }

    fn occurrence_context<'o>(&self, occurrences: impl IntoIterator<Item = &'o Occurrence>) -> Vec<ContextSentence> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for o in occurrences {
            if out.len() == MAX_CONTEXT {
                break;
            }
            if !seen.insert((o.doc_id.as_str(), o.sentence_index)) {
                continue;
            }
            if let Some(c) = self.context_sentence(&o.doc_id, o.sentence_index, &[o.subject.token_span, o.object.token_span]) {
                out.push(c);
            }
        }
        out
    }

    /// Collects answers for `items`: remembered or prior answers first, then
    /// queries for the best-scoring unanswered candidates. Returns each
    /// candidate with its answer, and the number of queries asked.
    fn decide<K: Ord + Clone>(
        &mut self,
        kind: QueryKind,
        iteration: usize,
        items: Vec<Candidate<K>>,
    ) -> (Vec<(Candidate<K>, Option<Answer>)>, usize) {
        let mut answers: Vec<Option<Answer>> = Vec::with_capacity(items.len());
        for c in &items {
            let known = self.state.answers.get(&c.key).copied();
            let a = known.or_else(|| self.oracle.prior(&c.key));
            if known.is_none() {
                if let Some(a) = a {
                    self.state.answers.insert(c.key.clone(), a);
                }
            }
            answers.push(a);
        }
        let open: Vec<Scored<usize>> =
            items.iter().enumerate().filter(|(i, _)| answers[*i].is_none()).map(|(i, c)| Scored::new(i, c.score)).collect();
        let ask = select_queries(&open, self.config.query_fraction);
        let kind_name = match kind {
            QueryKind::Pattern => "pattern",
            QueryKind::Relation => "relation",
            QueryKind::Entity => "entity",
            QueryKind::Conflict => "conflict",
        };
        let queries: Vec<OracleQuery> = ask
            .iter()
            .enumerate()
            .map(|(n, &i)| {
                let c = &items[i];
                let id = format!("{}-{}-{}-{}", self.relation.name(), iteration, kind_name, n + 1);
                let mut q = OracleQuery::new(id, kind, self.relation.name(), &c.key, &c.payload, iteration);
                q.competing = c.competing.clone();
                q.context = c.context.clone();
                q.score = c.score;
                q
            })
            .collect();
        if !queries.is_empty() {
            let mut progress = self.progress();
            progress.queried = queries.iter().map(|q| q.candidate_key.clone()).collect();
            self.publish(Some(progress));
            let got = self.oracle.resolve(&queries).unwrap_or_else(|e| {
                warn!("oracle failed, treating {} queries as don't know: {e}", queries.len());
                BTreeMap::new()
            });
            for (q, &i) in queries.iter().zip(&ask) {
                if let Some(&a) = got.get(&q.id) {
                    answers[i] = Some(a);
                    self.state.answers.insert(q.candidate_key.clone(), a);
                }
            }
        }
        (items.into_iter().zip(answers).collect(), queries.len())
    }

    fn progress(&self) -> RelationProgress {
        self.snapshot.relations.get(self.relation.name()).cloned().unwrap_or_default()
    }

    fn publish(&mut self, progress: Option<RelationProgress>) {
        let mut p = progress.unwrap_or_else(|| self.progress());
        p.iteration = self.state.iteration;
        p.known_relations = self.state.known_relations.len();
        p.known_patterns = self.state.known_patterns.len();
        self.snapshot.current_relation = Some(self.relation.name().to_string());
        self.snapshot.relations.insert(self.relation.name().to_string(), p);
        self.oracle.publish(self.snapshot);
    }

    fn record_scores<K>(&mut self, decided: &[(Candidate<K>, Option<Answer>)]) {
        let mut p = self.progress();
        for (c, a) in decided {
            p.scores.insert(c.key.clone(), a.map_or(c.score, |a| apply_oracle_override(c.score, a)));
        }
        self.publish(Some(p));
    }

    fn iterate(&mut self, it: usize) -> Result<IterationRecord, PatternError> {
        let mut record = IterationRecord { iteration: it, ..IterationRecord::default() };
        let mut p = self.progress();
        p.accepted_patterns.clear();
        p.accepted_relations.clear();
        p.queried.clear();
        p.scores.clear();
        self.publish(Some(p));

        record.patterns = self.pattern_stage(it)?;
        record.promoted = self.promotion_stage(it);
        let (relations, conflicts) = self.relation_stage(it)?;
        record.relations = relations;
        record.conflicts = conflicts;
        Ok(record)
    }

    fn pattern_stage(&mut self, it: usize) -> Result<StageCounts, PatternError> {
        let rel = self.relation;
        let known = self.known_keys();
        let mut generated: BTreeMap<PatternId, Pattern> = BTreeMap::new();
        for doc in self.docs {
            let options = GenerationOptions {
                window_cap: self.config.window_cap,
                between_cap: self.config.between_cap,
                parse_paths: doc.annotation_level == AnnotationLevel::Parsed,
            };
            let mentions = self.mentions_of(&doc.id);
            for sentence in &doc.sentences {
                for pair in candidate_pairs(sentence, mentions, rel) {
                    if !known.contains(&pair.relation_key(rel)) {
                        continue;
                    }
                    for p in generate_patterns(sentence, &pair, rel, &options) {
                        if !self.state.known_patterns.contains_key(&p.id().candidate_key()) {
                            generated.entry(p.id()).or_insert(p);
                        }
                    }
                }
            }
        }
        let patterns: Vec<Pattern> = generated.into_values().collect();
        let occurrences = match_corpus(&patterns, self.docs, &self.mentions)?;
        let mut items = Vec::new();
        for p in &patterns {
            let id = p.id();
            let os = &occurrences[&id];
            let Ok(score) = score_pattern(distinct_known(os, &known), os.len() as u64) else {
                continue;
            };
            items.push(Candidate {
                key: id.candidate_key(),
                payload: id.to_string(),
                competing: Vec::new(),
                context: self.occurrence_context(os),
                id,
                score,
            });
        }
        let nominated = items.len();
        let (decided, queried) = self.decide(QueryKind::Pattern, it, items);
        self.record_scores(&decided);
        let ranked: Vec<(Scored<PatternId>, Option<Answer>)> =
            decided.iter().map(|(c, a)| (Scored::new(c.id.clone(), c.score), *a)).collect();
        let accepted = accept_with_answers(&ranked, self.config.accept_fraction);
        let by_id: BTreeMap<&PatternId, &(Candidate<PatternId>, Option<Answer>)> =
            decided.iter().map(|d| (&d.0.id, d)).collect();
        let mut p = self.progress();
        for id in &accepted {
            let (c, a) = by_id[id];
            let pattern = patterns.iter().find(|p| p.id() == *id).expect("accepted pattern was generated").clone();
            self.state.known_patterns.insert(
                c.key.clone(),
                KnownPattern {
                    pattern: Pattern { provenance: PatternProvenance::Learned, ..pattern },
                    score: Some(a.map_or(c.score, |a| apply_oracle_override(c.score, a))),
                    iteration: it,
                },
            );
            p.accepted_patterns.push(c.key.clone());
        }
        self.publish(Some(p));
        Ok(StageCounts { nominated, queried, accepted: accepted.len() })
    }

    /// Unlabeled token runs sitting where a known full-between pattern
    /// expects its missing entity.
    fn promotion_candidates(&self) -> BTreeMap<String, (f64, Vec<EntityMention>)> {
        let rel = self.relation;
        let mut out: BTreeMap<String, (f64, Vec<EntityMention>)> = BTreeMap::new();
        for known in self.state.known_patterns.values() {
            let PatternVariant::FullBetween { kind, tokens } = &known.pattern.variant else {
                continue;
            };
            let (left_ty, right_ty) = match known.pattern.direction {
                Direction::SubjectFirst => (rel.subject_type(), rel.object_type()),
                Direction::ObjectFirst => (rel.object_type(), rel.subject_type()),
            };
            let score = known.score.unwrap_or(0.0);
            for doc in self.docs {
                let mentions = self.mentions_of(&doc.id);
                for sentence in &doc.sentences {
                    let here: Vec<&EntityMention> =
                        mentions.iter().filter(|m| m.sentence_index == sentence.index).collect();
                    let covered = |i: usize| here.iter().any(|m| m.first() <= i && i <= m.last());
                    let n = sentence.tokens.len();
                    for m in &here {
                        let mut found: Option<(usize, usize, EntityType)> = None;
                        if m.entity_type == left_ty && EntityType::GAZETTEER.contains(&right_ty) {
                            let start = m.last() + 1;
                            let end = start + tokens.len();
                            if end < n && projection_eq(&sentence.tokens[start..end], *kind, tokens) {
                                let mut last = end;
                                while last < n
                                    && last - end < self.config.max_promoted_tokens
                                    && entity_like(&sentence.tokens[last])
                                    && !covered(last)
                                {
                                    last += 1;
                                }
                                if last > end {
                                    found = Some((end, last - 1, right_ty));
                                }
                            }
                        }
                        if m.entity_type == right_ty && EntityType::GAZETTEER.contains(&left_ty) && m.first() > tokens.len() {
                            let start = m.first() - tokens.len();
                            if projection_eq(&sentence.tokens[start..m.first()], *kind, tokens) {
                                let mut first = start;
                                while first > 0
                                    && start - first < self.config.max_promoted_tokens
                                    && entity_like(&sentence.tokens[first - 1])
                                    && !covered(first - 1)
                                {
                                    first -= 1;
                                }
                                if first < start {
                                    found = Some((first, start - 1, left_ty));
                                }
                            }
                        }
                        let Some((a, b, ty)) = found else { continue };
                        let canonical =
                            sentence.tokens[a..=b].iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ");
                        let key = format!("ent:{}:{}", ty.name(), canonical.to_lowercase());
                        let entry = out.entry(key).or_insert((score, Vec::new()));
                        entry.0 = entry.0.max(score);
                        let mention = EntityMention {
                            doc_id: doc.id.clone(),
                            sentence_index: sentence.index,
                            token_span: (a, b),
                            entity_type: ty,
                            canonical,
                            provenance: MentionProvenance::Bootstrap,
                        };
                        if !entry.1.contains(&mention) {
                            entry.1.push(mention);
                        }
                    }
                }
            }
        }
        out
    }

    fn promotion_stage(&mut self, it: usize) -> usize {
        let found = self.promotion_candidates();
        if found.is_empty() {
            return 0;
        }
        let items: Vec<Candidate<String>> = found
            .iter()
            .map(|(key, (score, ms))| {
                let m = &ms[0];
                Candidate {
                    id: key.clone(),
                    key: key.clone(),
                    score: *score,
                    payload: format!("{} ({})", m.canonical, m.entity_type),
                    competing: Vec::new(),
                    context: ms
                        .iter()
                        .take(MAX_CONTEXT)
                        .filter_map(|m| self.context_sentence(&m.doc_id, m.sentence_index, &[m.token_span]))
                        .collect(),
                }
            })
            .collect();
        let (decided, _) = self.decide(QueryKind::Entity, it, items);
        let mut promoted = 0;
        for (c, answer) in decided {
            let provenance = match answer {
                Some(Answer::No) => continue,
                Some(Answer::Yes) => MentionProvenance::User,
                _ => MentionProvenance::Bootstrap,
            };
            for mut m in found[&c.key].1.clone() {
                let list = self.mentions.entry(m.doc_id.clone()).or_default();
                if list.iter().any(|o| o.overlaps(&m)) {
                    continue;
                }
                m.provenance = provenance;
                list.push(m.clone());
                sort_mentions(list);
                self.state.promoted_mentions.push(m);
                promoted += 1;
            }
        }
        promoted
    }

    fn relation_stage(&mut self, it: usize) -> Result<(StageCounts, usize), PatternError> {
        let rel = self.relation;
        let known = self.known_keys();
        let patterns: Vec<Pattern> = self.state.patterns().cloned().collect();
        let occurrences = match_corpus(&patterns, self.docs, &self.mentions)?;

        struct Nomination<'o> {
            supporters: BTreeMap<&'o PatternId, u64>,
            occurrences: Vec<&'o Occurrence>,
        }
        let mut nominated: BTreeMap<RelationKey, Nomination> = BTreeMap::new();
        for (id, os) in &occurrences {
            let f = distinct_known(os, &known);
            for o in os {
                let key = o.relation_key();
                if known.contains(&key) {
                    continue;
                }
                let n = nominated.entry(key).or_insert_with(|| Nomination { supporters: BTreeMap::new(), occurrences: Vec::new() });
                n.supporters.insert(id, f);
                n.occurrences.push(o);
            }
        }
        for n in nominated.values_mut() {
            n.occurrences.sort();
            n.occurrences.dedup();
        }

        let mut conflicts = 0;
        let mut conflict_sides: Vec<(RelationKey, f64, f64)> = Vec::new();
        let mut conflict_items = Vec::new();
        let mut items = Vec::new();
        for (key, n) in &nominated {
            let f: Vec<u64> = n.supporters.values().copied().collect();
            let Ok(score) = score_relation(&f) else { continue };
            let pair = (key.subject.clone(), key.object.clone());
            if let Some(rival) = self.rival.relation {
                if self.rival.seeds.contains(&pair) {
                    conflicts += 1;
                    self.state.conflicts.push(ConflictRecord {
                        iteration: it,
                        subject: key.subject.clone(),
                        object: key.object.clone(),
                        chosen: rival,
                        reason: ConflictReason::RivalSeed,
                    });
                    continue;
                }
                if let Some(&rival_score) = self.rival.scores.get(&pair) {
                    let conservative = RelationKey::new(RelationKind::NotVersionOf, &key.subject, &key.object);
                    conflict_items.push(Candidate {
                        id: conflict_sides.len(),
                        key: format!("conf:{}", conservative.candidate_key()),
                        score: score.max(rival_score),
                        payload: format!("({}, ?, {})", key.subject, key.object),
                        competing: vec![rel.name().to_string(), rival.name().to_string()],
                        context: self.occurrence_context(n.occurrences.iter().copied()),
                    });
                    conflict_sides.push((key.clone(), score, rival_score));
                    continue;
                }
            }
            items.push(Candidate {
                id: key.clone(),
                key: key.candidate_key(),
                score,
                payload: key.to_string(),
                competing: Vec::new(),
                context: self.occurrence_context(n.occurrences.iter().copied()),
            });
        }

        if !conflict_items.is_empty() {
            let rival = self.rival.relation.expect("conflicts need a rival");
            let (decided, _) = self.decide(QueryKind::Conflict, it, conflict_items);
            for (c, answer) in decided {
                let (key, score, rival_score) = conflict_sides[c.id].clone();
                let first = nominated[&key].occurrences[0];
                let doc = self.by_id[first.doc_id.as_str()];
                let sentence: &Sentence = &doc.sentences[first.sentence_index];
                let (l, r) = if first.subject.first() < first.object.first() {
                    (&first.subject, &first.object)
                } else {
                    (&first.object, &first.subject)
                };
                let between = &sentence.tokens[l.last() + 1..r.first()];
                let (chosen, reason) = resolve_conflict(
                    ConflictSide { relation: rel, score },
                    ConflictSide { relation: rival, score: rival_score },
                    between,
                    &self.config.conflict_cues,
                    answer,
                );
                conflicts += 1;
                self.state.conflicts.push(ConflictRecord {
                    iteration: it,
                    subject: key.subject.clone(),
                    object: key.object.clone(),
                    chosen,
                    reason,
                });
                if chosen == rel {
                    items.push(Candidate {
                        key: key.candidate_key(),
                        payload: key.to_string(),
                        competing: Vec::new(),
                        context: c.context,
                        id: key,
                        score,
                    });
                }
            }
            items.sort_by(|a, b| a.id.cmp(&b.id));
        }

        let nominated_count = items.len();
        let (decided, queried) = self.decide(QueryKind::Relation, it, items);
        self.record_scores(&decided);
        let ranked: Vec<(Scored<RelationKey>, Option<Answer>)> =
            decided.iter().map(|(c, a)| (Scored::new(c.id.clone(), c.score), *a)).collect();
        let accepted = accept_with_answers(&ranked, self.config.accept_fraction);
        let by_key: BTreeMap<&RelationKey, &(Candidate<RelationKey>, Option<Answer>)> =
            decided.iter().map(|d| (&d.0.id, d)).collect();
        let mut p = self.progress();
        for key in &accepted {
            let (c, a) = by_key[key];
            let first = nominated[key].occurrences[0];
            let provenance = if *a == Some(Answer::Yes) { RelationProvenance::User } else { RelationProvenance::Bootstrap };
            self.state.known_relations.insert(
                c.key.clone(),
                KnownRelation {
                    instance: RelationInstance::new(rel, &first.subject.canonical, &first.object.canonical, provenance),
                    score: Some(a.map_or(c.score, |a| apply_oracle_override(c.score, a))),
                    iteration: it,
                },
            );
            p.accepted_relations.push(c.key.clone());
        }
        self.publish(Some(p));
        Ok((StageCounts { nominated: nominated_count, queried, accepted: accepted.len() }, conflicts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn cues() -> Vec<String> {
        super::super::default_conflict_cues()
    }

    fn is(score: f64) -> ConflictSide {
        ConflictSide { relation: RelationKind::IsVersionOf, score }
    }

    fn not(score: f64) -> ConflictSide {
        ConflictSide { relation: RelationKind::NotVersionOf, score }
    }

    fn between(text: &str) -> Vec<Token> {
        tokenize(text).remove(0).tokens
    }

    #[test]
    fn conflict_oracle_wins() {
        let got = resolve_conflict(is(0.9), not(0.1), &between("of"), &cues(), Some(Answer::Yes));
        assert_eq!(got, (RelationKind::NotVersionOf, ConflictReason::Oracle));
        let got = resolve_conflict(is(0.1), not(0.9), &between("not"), &cues(), Some(Answer::No));
        assert_eq!(got, (RelationKind::IsVersionOf, ConflictReason::Oracle));
    }

    #[test]
    fn conflict_cue_rule() {
        let got = resolve_conflict(is(0.9), not(0.1), &between("is not affected, only"), &cues(), None);
        assert_eq!(got, (RelationKind::NotVersionOf, ConflictReason::Cue("not".into())));
        let got = resolve_conflict(not(0.1), is(0.9), &between("versions PRIOR to"), &cues(), Some(Answer::DontKnow));
        assert_eq!(got.0, RelationKind::NotVersionOf);
    }

    #[test]
    fn conflict_score_rule() {
        assert_eq!(resolve_conflict(is(0.9), not(0.4), &between("of"), &cues(), None), (RelationKind::IsVersionOf, ConflictReason::Score));
        assert_eq!(resolve_conflict(is(0.4), not(0.9), &between("of"), &cues(), None), (RelationKind::NotVersionOf, ConflictReason::Score));
        assert_eq!(resolve_conflict(is(0.5), not(0.5), &[], &cues(), None), (RelationKind::NotVersionOf, ConflictReason::Tie));
    }

    #[test]
    fn reason_json() {
        assert_eq!(serde_json::to_string(&ConflictReason::Cue("not".into())).unwrap(), r#"{"rule":"cue","cue":"not"}"#);
        assert_eq!(serde_json::to_string(&ConflictReason::Tie).unwrap(), r#"{"rule":"tie"}"#);
    }
}
