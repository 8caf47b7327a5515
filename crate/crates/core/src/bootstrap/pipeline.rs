use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{bootstrap_relation, BootstrapConfig, BootstrapState};
use crate::corpus::Document;
use crate::entity::{tag_document, EntityMention, EntityType, Gazetteers};
use crate::oracle::{Oracle, RunSnapshot};
use crate::pattern::{Pattern, PatternError};
use crate::relation::{RelationInstance, RelationKind, RelationProvenance, RelationRecord};
use crate::relevance::{filter_corpus, RelevanceModel};

/// On-disk seed (and gold, and extraction) file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SeedFile {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub patterns: Vec<Pattern>,
    #[serde(default)]
    pub relations: Vec<RelationRecord>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Seeds {
    pub patterns: Vec<Pattern>,
    pub relations: Vec<RelationInstance>,
}

impl Seeds {
    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty() && self.relations.is_empty()
    }
}

/// Seeds grouped by relation type.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeedSet {
    pub by_relation: BTreeMap<RelationKind, Seeds>,
}

impl SeedSet {
    pub fn get(&self, relation: RelationKind) -> Option<&Seeds> {
        self.by_relation.get(&relation)
    }

    pub fn add(&mut self, file: SeedFile) {
        for p in file.patterns {
            let p = p.normalized();
            let seeds = self.by_relation.entry(p.relation).or_default();
            if !seeds.patterns.iter().any(|q| q.id() == p.id()) {
                seeds.patterns.push(p);
            }
        }
        for r in file.relations {
            let r = r.into_instance(RelationProvenance::Seed);
            let seeds = self.by_relation.entry(r.relation).or_default();
            if !seeds.relations.iter().any(|q| q.key() == r.key()) {
                seeds.relations.push(r);
            }
        }
    }

    pub fn pattern_count(&self, relation: RelationKind) -> usize {
        self.get(relation).map_or(0, |s| s.patterns.len())
    }
}

#[derive(Debug, Error)]
pub enum SeedError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{path}: patterns[{index}]: {source}")]
    InvalidPattern { path: PathBuf, index: usize, source: PatternError },
    #[error("{0}: no seed files found")]
    Empty(PathBuf),
}

fn parse_seed_file(path: &Path, content: &str, window_cap: usize) -> Result<SeedFile, SeedError> {
    let file: SeedFile = serde_json::from_str(content).map_err(|e| SeedError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    for (index, p) in file.patterns.iter().enumerate() {
        p.validate(window_cap).map_err(|source| SeedError::InvalidPattern { path: path.to_path_buf(), index, source })?;
    }
    Ok(file)
}

/// Reads one seed file, or every `.json` file of a directory in name order.
pub fn load_seeds(path: &Path, window_cap: usize) -> Result<SeedSet, SeedError> {
    let io = |p: &Path| {
        let p = p.to_path_buf();
        move |source| SeedError::Io { path: p, source }
    };
    let files: Vec<PathBuf> = if path.is_dir() {
        let mut v: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(io(path))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
            .collect();
        v.sort();
        v
    } else {
        vec![path.to_path_buf()]
    };
    if files.is_empty() {
        return Err(SeedError::Empty(path.to_path_buf()));
    }
    let mut set = SeedSet::default();
    for f in files {
        let content = std::fs::read_to_string(&f).map_err(io(&f))?;
        set.add(parse_seed_file(&f, &content, window_cap)?);
    }
    Ok(set)
}

fn canonical_entity(gazetteers: &Gazetteers, ty: EntityType, surface: &str) -> String {
    match ty {
        EntityType::CveId | EntityType::MsId => surface.to_uppercase(),
        _ => gazetteers.canonicalize(ty, surface).unwrap_or(surface).to_string(),
    }
}

/// Rewrites seed relation entities to their gazetteer canonical forms, so
/// "IE" and "Internet Explorer" seeds are the same instance.
pub fn canonicalize_seeds(seeds: &SeedSet, gazetteers: &Gazetteers) -> SeedSet {
    let mut out = seeds.clone();
    for (relation, s) in out.by_relation.iter_mut() {
        let mut canon: Vec<RelationInstance> = Vec::with_capacity(s.relations.len());
        for r in &s.relations {
            let c = RelationInstance::new(
                *relation,
                canonical_entity(gazetteers, relation.subject_type(), &r.subject),
                canonical_entity(gazetteers, relation.object_type(), &r.object),
                r.provenance,
            );
            if !canon.iter().any(|q| q.key() == c.key()) {
                canon.push(c);
            }
        }
        s.relations = canon;
    }
    out
}

/// A tagged, filtered corpus ready for bootstrapping.
#[derive(Debug, Clone, Default)]
pub struct PreparedCorpus {
    pub documents: Vec<Document>,
    pub mentions: BTreeMap<String, Vec<EntityMention>>,
    pub dropped: Vec<String>,
}

/// Tags every document, drops those the gate rejects, and gives the kept
/// ones trees. Without a model every document is kept.
pub fn prepare_corpus(
    documents: Vec<Document>,
    gazetteers: &Gazetteers,
    relevance: Option<&RelevanceModel>,
    threshold: f64,
) -> PreparedCorpus {
    let mut mentions: BTreeMap<String, Vec<EntityMention>> =
        documents.iter().map(|d| (d.id.clone(), tag_document(d, gazetteers))).collect();
    let (mut kept, dropped) = match relevance {
        Some(model) => {
            let model = RelevanceModel { threshold, ..model.clone() };
            filter_corpus(&model, documents, &mentions)
        }
        None => (documents, Vec::new()),
    };
    for d in &dropped {
        mentions.remove(&d.id);
    }
    for d in &mut kept {
        d.ensure_trees();
    }
    info!("relevance gate kept {} documents, dropped {}", kept.len(), dropped.len());
    PreparedCorpus { documents: kept, mentions, dropped: dropped.into_iter().map(|d| d.id).collect() }
}

#[derive(Debug, Clone, Default)]
pub struct PipelineOutput {
    pub states: BTreeMap<RelationKind, BootstrapState>,
    pub kept: Vec<String>,
    pub dropped: Vec<String>,
    /// Relation types with no seeds.
    pub skipped: Vec<RelationKind>,
}

/// Bootstraps each of `relations` independently over a prepared corpus.
pub fn run_relations(
    corpus: &PreparedCorpus,
    seeds: &SeedSet,
    relations: &[RelationKind],
    config: &BootstrapConfig,
    oracle: &mut dyn Oracle,
) -> Result<PipelineOutput, PatternError> {
    let mut out = PipelineOutput {
        kept: corpus.documents.iter().map(|d| d.id.clone()).collect(),
        dropped: corpus.dropped.clone(),
        ..PipelineOutput::default()
    };
    let mut snapshot = RunSnapshot::default();
    for &relation in relations {
        let Some(s) = seeds.get(relation).filter(|s| !s.is_empty()) else {
            warn!("no seeds for {relation}; skipped");
            out.skipped.push(relation);
            continue;
        };
        let state = BootstrapState::from_seeds(relation, s).expect("seed set is grouped by relation");
        let rival = relation.rival().and_then(|r| seeds.get(r));
        let state =
            bootstrap_relation(state, &corpus.documents, &corpus.mentions, rival, config, oracle, &mut snapshot)?;
        out.states.insert(relation, state);
    }
    snapshot.current_relation = None;
    snapshot.finished = true;
    oracle.publish(&snapshot);
    Ok(out)
}

/// Tag, filter, parse, then bootstrap all eight relation types. Seeds are
/// canonicalized through the gazetteers first.
pub fn run_pipeline(
    documents: Vec<Document>,
    gazetteers: &Gazetteers,
    relevance: Option<&RelevanceModel>,
    seeds: &SeedSet,
    config: &BootstrapConfig,
    oracle: &mut dyn Oracle,
) -> Result<PipelineOutput, PatternError> {
    let corpus = prepare_corpus(documents, gazetteers, relevance, config.relevance_threshold);
    let seeds = canonicalize_seeds(seeds, gazetteers);
    run_relations(&corpus, &seeds, &RelationKind::ALL, config, oracle)
}

/// Every known relation of every state, ordered by relation then key.
pub fn extracted_relations<'a>(states: impl IntoIterator<Item = &'a BootstrapState>) -> Vec<RelationRecord> {
    let mut all: Vec<(RelationKind, String, RelationRecord)> = states
        .into_iter()
        .flat_map(|s| s.known_relations.iter().map(|(k, r)| (r.instance.relation, k.clone(), RelationRecord::from(&r.instance))))
        .collect();
    all.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    all.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
    all.into_iter().map(|(_, _, r)| r).collect()
}
