//! The iteration engine: per relation type, seeds yield patterns, patterns
//! yield relations, and both sets grow until a cycle adds no relation.

mod engine;
mod pipeline;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entity::EntityMention;
use crate::oracle::{Answer, OracleMode};
use crate::pattern::{Pattern, DEFAULT_BETWEEN_CAP, DEFAULT_WINDOW_CAP};
use crate::relation::{RelationInstance, RelationKind};

pub use engine::{bootstrap_relation, resolve_conflict, ConflictReason, ConflictSide};
pub use pipeline::{
    canonicalize_seeds, extracted_relations, load_seeds, prepare_corpus, run_pipeline, run_relations, PipelineOutput,
    PreparedCorpus, SeedError, SeedFile, SeedSet, Seeds,
};

pub const STATE_VERSION: u32 = 1;

pub fn default_conflict_cues() -> Vec<String> {
    ["not", "except", "prior", "earlier", "before", "excluding"].map(String::from).to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub accept_fraction: f64,
    pub query_fraction: f64,
    pub max_iterations: usize,
    pub window_cap: usize,
    pub between_cap: usize,
    pub oracle_mode: String,
    pub relevance_threshold: f64,
    /// Words in the between-span that favor `not_version_of` in a conflict.
    pub conflict_cues: Vec<String>,
    /// Longest token run promoted to a new entity.
    pub max_promoted_tokens: usize,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            accept_fraction: 0.80,
            query_fraction: 0.02,
            max_iterations: 10,
            window_cap: DEFAULT_WINDOW_CAP,
            between_cap: DEFAULT_BETWEEN_CAP,
            oracle_mode: "auto".into(),
            relevance_threshold: 0.5,
            conflict_cues: default_conflict_cues(),
            max_promoted_tokens: 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("invalid {field}: {message}")]
    Invalid { field: &'static str, message: String },
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field, message: String| Err(ConfigError::Invalid { field, message });
        for (field, v) in [("accept_fraction", self.accept_fraction), ("query_fraction", self.query_fraction)] {
            if !(0.0..=1.0).contains(&v) {
                return invalid(field, format!("{v} is outside [0, 1]"));
            }
        }
        for (field, v) in [
            ("max_iterations", self.max_iterations),
            ("window_cap", self.window_cap),
            ("between_cap", self.between_cap),
            ("max_promoted_tokens", self.max_promoted_tokens),
        ] {
            if v < 1 {
                return invalid(field, "must be at least 1".into());
            }
        }
        if !(self.relevance_threshold > 0.0 && self.relevance_threshold < 1.0) {
            return invalid("relevance_threshold", format!("{} is outside (0, 1)", self.relevance_threshold));
        }
        if let Err(e) = self.oracle_mode.parse::<OracleMode>() {
            return invalid("oracle_mode", e);
        }
        Ok(())
    }

    pub fn oracle_mode(&self) -> OracleMode {
        self.oracle_mode.parse().unwrap_or_default()
    }

    pub fn parse(path: &Path, content: &str) -> Result<Self, ConfigError> {
        let config: BootstrapConfig = serde_json::from_str(content).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let content =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(path, &content)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownRelation {
    #[serde(flatten)]
    pub instance: RelationInstance,
    /// Score when accepted; `None` for seeds.
    pub score: Option<f64>,
    pub iteration: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownPattern {
    pub pattern: Pattern,
    pub score: Option<f64>,
    pub iteration: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub nominated: usize,
    pub queried: usize,
    pub accepted: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub patterns: StageCounts,
    pub relations: StageCounts,
    pub promoted: usize,
    pub conflicts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictRecord {
    pub iteration: usize,
    pub subject: String,
    pub object: String,
    pub chosen: RelationKind,
    pub reason: ConflictReason,
}

/// Everything a run of one relation type has learned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapState {
    pub version: u32,
    pub relation: RelationKind,
    pub iteration: usize,
    /// By candidate key.
    pub known_relations: BTreeMap<String, KnownRelation>,
    /// By candidate key.
    pub known_patterns: BTreeMap<String, KnownPattern>,
    pub promoted_mentions: Vec<EntityMention>,
    pub history: Vec<IterationRecord>,
    /// Every answer used so far, by candidate key.
    pub answers: BTreeMap<String, Answer>,
    pub conflicts: Vec<ConflictRecord>,
}

#[derive(Debug, Error)]
pub enum StateError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: state version {found}, expected {STATE_VERSION}")]
    Version { path: PathBuf, found: u64 },
    #[error("seed for {seed} given to a {run} run")]
    WrongRelation { seed: RelationKind, run: RelationKind },
}

impl BootstrapState {
    pub fn new(relation: RelationKind) -> Self {
        BootstrapState {
            version: STATE_VERSION,
            relation,
            iteration: 0,
            known_relations: BTreeMap::new(),
            known_patterns: BTreeMap::new(),
            promoted_mentions: Vec::new(),
            history: Vec::new(),
            answers: BTreeMap::new(),
            conflicts: Vec::new(),
        }
    }

    /// A fresh state holding the seeds.
    pub fn from_seeds(relation: RelationKind, seeds: &Seeds) -> Result<Self, StateError> {
        let mut state = BootstrapState::new(relation);
        for p in &seeds.patterns {
            if p.relation != relation {
                return Err(StateError::WrongRelation { seed: p.relation, run: relation });
            }
            state
                .known_patterns
                .entry(p.id().candidate_key())
                .or_insert_with(|| KnownPattern { pattern: p.clone(), score: None, iteration: 0 });
        }
        for r in &seeds.relations {
            if r.relation != relation {
                return Err(StateError::WrongRelation { seed: r.relation, run: relation });
            }
            state
                .known_relations
                .entry(r.key().candidate_key())
                .or_insert_with(|| KnownRelation { instance: r.clone(), score: None, iteration: 0 });
        }
        Ok(state)
    }

    pub fn relations(&self) -> impl Iterator<Item = &RelationInstance> {
        self.known_relations.values().map(|k| &k.instance)
    }

    pub fn patterns(&self) -> impl Iterator<Item = &Pattern> {
        self.known_patterns.values().map(|k| &k.pattern)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("state serializes");
        s.push('\n');
        s
    }

    pub fn from_json(path: &Path, content: &str) -> Result<Self, StateError> {
        let parse = |e: serde_json::Error| StateError::Parse { path: path.to_path_buf(), message: e.to_string() };
        let value: serde_json::Value = serde_json::from_str(content).map_err(parse)?;
        let found = value.get("version").and_then(serde_json::Value::as_u64).unwrap_or(0);
        if found != u64::from(STATE_VERSION) {
            return Err(StateError::Version { path: path.to_path_buf(), found });
        }
        serde_json::from_value(value).map_err(parse)
    }
}

pub fn export_state(state: &BootstrapState, path: &Path) -> Result<(), StateError> {
    std::fs::write(path, state.to_json()).map_err(|source| StateError::Io { path: path.to_path_buf(), source })
}

pub fn import_state(path: &Path) -> Result<BootstrapState, StateError> {
    let content = std::fs::read_to_string(path).map_err(|source| StateError::Io { path: path.to_path_buf(), source })?;
    BootstrapState::from_json(path, &content)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{Direction, PatternProvenance, PatternVariant, TokenKind};
    use crate::relation::RelationProvenance;

    fn seeded() -> BootstrapState {
        let seeds = Seeds {
            patterns: vec![Pattern::new(
                RelationKind::IsVendorOf,
                Direction::SubjectFirst,
                PatternVariant::FullBetween { kind: TokenKind::Word, tokens: vec!["released".into()] },
                PatternProvenance::Seed,
            )],
            relations: vec![RelationInstance::new(
                RelationKind::IsVendorOf,
                "Microsoft",
                "Internet Explorer",
                RelationProvenance::Seed,
            )],
        };
        BootstrapState::from_seeds(RelationKind::IsVendorOf, &seeds).unwrap()
    }

    #[test]
    fn config_defaults_and_validation() {
        let c = BootstrapConfig::default();
        assert_eq!((c.accept_fraction, c.query_fraction, c.max_iterations), (0.8, 0.02, 10));
        c.validate().unwrap();
        let bad = BootstrapConfig::parse(Path::new("c.json"), r#"{"accept_fraction": 1.5}"#).unwrap_err();
        assert!(matches!(bad, ConfigError::Invalid { field: "accept_fraction", .. }), "{bad}");
        let bad = BootstrapConfig::parse(Path::new("c.json"), r#"{"window_cap": 0}"#).unwrap_err();
        assert!(matches!(bad, ConfigError::Invalid { field: "window_cap", .. }));
        let bad = BootstrapConfig::parse(Path::new("c.json"), r#"{"oracle_mode": "psychic"}"#).unwrap_err();
        assert!(matches!(bad, ConfigError::Invalid { field: "oracle_mode", .. }));
        let bad = BootstrapConfig::parse(Path::new("c.json"), "{\n\"acept\": 1}").unwrap_err();
        assert!(matches!(bad, ConfigError::Parse { line: 2, .. }), "{bad}");
        let ok = BootstrapConfig::parse(Path::new("c.json"), r#"{"query_fraction": 0}"#).unwrap();
        assert_eq!(ok.query_fraction, 0.0);
    }

    #[test]
    fn state_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        let s = seeded();
        export_state(&s, &path).unwrap();
        assert_eq!(import_state(&path).unwrap(), s);
    }

    #[test]
    fn state_version_checked() {
        let mut v: serde_json::Value = serde_json::from_str(&seeded().to_json()).unwrap();
        v["version"] = 2.into();
        let err = BootstrapState::from_json(Path::new("s.json"), &v.to_string()).unwrap_err();
        assert!(matches!(err, StateError::Version { found: 2, .. }));
    }

    #[test]
    fn unknown_relation_rejected() {
        let json = seeded().to_json().replace("is_vendor_of", "is_parent_of");
        assert!(matches!(BootstrapState::from_json(Path::new("s.json"), &json), Err(StateError::Parse { .. })));
    }

    #[test]
    fn seeds_must_match_relation() {
        let s = Seeds {
            patterns: vec![],
            relations: vec![RelationInstance::new(RelationKind::SymbolOf, "a.exe", "b", RelationProvenance::Seed)],
        };
        assert!(BootstrapState::from_seeds(RelationKind::IsVendorOf, &s).is_err());
    }
}
