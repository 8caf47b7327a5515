use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bootstrap::SeedFile;
use crate::corpus::{tokenize, Document};
use crate::entity::{EntityType, Gazetteers};
use crate::pattern::{Direction, Pattern, PatternProvenance, PatternVariant, TokenKind};
use crate::relation::{RelationInstance, RelationKind, RelationProvenance, RelationRecord};

pub const DEFAULT_TEMPLATE_SET: &str = "security-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub num_docs: usize,
    pub relations_per_doc: usize,
    pub noise_sentence_rate: f64,
    pub template_set: String,
    pub rng_seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            num_docs: 20,
            relations_per_doc: 2,
            noise_sentence_rate: 0.0,
            template_set: DEFAULT_TEMPLATE_SET.into(),
            rng_seed: 42,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("noise_sentence_rate {0} is outside [0, 1]")]
    Rate(f64),
    #[error("unknown template set {0:?}")]
    UnknownTemplateSet(String),
    #[error("the {entity_type} gazetteer has {available} entries but the corpus needs {needed} distinct ones")]
    NotEnoughEntities { entity_type: EntityType, needed: usize, available: usize },
    #[error("no {0} gazetteer loaded")]
    MissingGazetteer(EntityType),
}

/// A sentence frame. `{S}` and `{O}` mark the subject and object; `{A}`
/// and `{B}` mark the two entities of a noise frame.
struct Template {
    relation: RelationKind,
    text: &'static str,
}

struct NoiseTemplate {
    types: (EntityType, EntityType),
    text: &'static str,
}

const TEMPLATES: &[Template] = &[
    Template { relation: RelationKind::IsVendorOf, text: "Yesterday {S} released a new build of {O} for enterprise customers." },
    Template { relation: RelationKind::IsVendorOf, text: "According to the advisory, {O} is maintained by {S} engineers." },
    Template { relation: RelationKind::IsVersionOf, text: "Administrators should install version {S} of {O} immediately." },
    Template { relation: RelationKind::IsVersionOf, text: "The patch ships in {O} release {S} and later." },
    Template { relation: RelationKind::CveOfVuln, text: "{S} describes a {O} weakness in the login form." },
    Template { relation: RelationKind::CveOfVuln, text: "Attackers can trigger {O} through the flaw tracked as {S} in the wild." },
    Template { relation: RelationKind::MsOfSw, text: "Bulletin {S} addresses several problems in {O} on all platforms." },
    Template { relation: RelationKind::MsOfSw, text: "Customers running {O} should apply {S} this week." },
    Template { relation: RelationKind::MsOfVuln, text: "Bulletin {S} resolves a {O} issue reported privately." },
    Template { relation: RelationKind::MsOfVuln, text: "The {O} problem is corrected by {S} according to the notes." },
    Template { relation: RelationKind::VulnOfSw, text: "Experts found a {S} vulnerability affecting {O} servers." },
    Template { relation: RelationKind::VulnOfSw, text: "A flaw in {O} allows {S} attacks against users." },
    Template { relation: RelationKind::SymbolOf, text: "The crash occurs in {S} which belongs to {O} according to the trace." },
    Template { relation: RelationKind::SymbolOf, text: "Analysts traced the bug in {O} to the {S} routine." },
    Template { relation: RelationKind::NotVersionOf, text: "Researchers confirmed that {O} builds prior to {S} are unaffected." },
    Template { relation: RelationKind::NotVersionOf, text: "Version {S} never shipped with {O} according to the vendor." },
];

const NOISE: &[NoiseTemplate] = &[
    NoiseTemplate {
        types: (EntityType::SwVendor, EntityType::SwProduct),
        text: "{A} criticized the design of {B} during a keynote.",
    },
    NoiseTemplate {
        types: (EntityType::SwVersion, EntityType::SwProduct),
        text: "A benchmark compared {A} of the old engine with {B} yesterday.",
    },
    NoiseTemplate {
        types: (EntityType::VulnTerm, EntityType::SwProduct),
        text: "Reporters asked whether {A} matters for {B} at all.",
    },
    NoiseTemplate {
        types: (EntityType::CveId, EntityType::VulnTerm),
        text: "{A} was mentioned alongside {B} in a talk.",
    },
    NoiseTemplate {
        types: (EntityType::MsId, EntityType::SwProduct),
        text: "Bulletin {A} was published the same week as {B} news.",
    },
];

fn templates(set: &str) -> Result<(&'static [Template], &'static [NoiseTemplate]), SynthError> {
    match set {
        DEFAULT_TEMPLATE_SET => Ok((TEMPLATES, NOISE)),
        other => Err(SynthError::UnknownTemplateSet(other.to_string())),
    }
}

/// Full-between word patterns, one per relation template, as seeds.
pub fn template_seed_patterns(set: &str) -> Result<Vec<Pattern>, SynthError> {
    let (ts, _) = templates(set)?;
    Ok(ts
        .iter()
        .map(|t| {
            let s = t.text.find("{S}").expect("template has a subject");
            let o = t.text.find("{O}").expect("template has an object");
            let (direction, between) =
                if s < o { (Direction::SubjectFirst, &t.text[s + 3..o]) } else { (Direction::ObjectFirst, &t.text[o + 3..s]) };
            let tokens = tokenize(between).into_iter().flat_map(|s| s.tokens).map(|t| t.text).collect();
            Pattern::new(t.relation, direction, PatternVariant::FullBetween { kind: TokenKind::Word, tokens }, PatternProvenance::Seed)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub documents: Vec<Document>,
    pub gold: Vec<RelationInstance>,
    pub seed_patterns: Vec<Pattern>,
    pub planted_sentences: usize,
    pub noise_sentences: usize,
}

impl SynthCorpus {
    pub fn seed_file(&self) -> SeedFile {
        SeedFile { patterns: self.seed_patterns.clone(), relations: Vec::new() }
    }

    pub fn gold_file(&self) -> SeedFile {
        SeedFile { patterns: Vec::new(), relations: self.gold.iter().map(RelationRecord::from).collect() }
    }
}

/// Noise sentences per document for a given planted count and rate, so
/// that noise / (noise + planted) is as close to `rate` as whole sentences
/// allow. A rate of 1 makes every sentence noise.
pub fn noise_count(relations_per_doc: usize, rate: f64) -> usize {
    if rate >= 1.0 {
        relations_per_doc.max(1)
    } else {
        (relations_per_doc as f64 * rate / (1.0 - rate)).round() as usize
    }
}

/// Draws distinct entities from one pool.
struct Pool {
    entity_type: EntityType,
    items: Vec<String>,
    available: usize,
    needed: usize,
}

impl Pool {
    fn new(entity_type: EntityType, mut items: Vec<String>, rng: &mut ChaCha8Rng) -> Self {
        items.shuffle(rng);
        let available = items.len();
        Pool { entity_type, items, available, needed: 0 }
    }

    fn take(&mut self) -> Option<String> {
        self.needed += 1;
        self.items.pop()
    }
}

struct Generated {
    versions: BTreeSet<String>,
    ids: BTreeSet<String>,
    symbols: BTreeSet<String>,
}

const SYMBOL_STEMS: &[&str] = &["alloc", "parse", "render", "load", "decode", "verify", "handle", "init"];
const SYMBOL_FILES: &[&str] = &["exe", "dll", "sys"];

impl Generated {
    fn version(&mut self, rng: &mut ChaCha8Rng) -> String {
        loop {
            let v = match rng.gen_range(0..3) {
                0 => format!("{}", rng.gen_range(2..30)),
                1 => format!("{}.{}", rng.gen_range(1..20), rng.gen_range(0..10)),
                _ => format!("{}.{}.{:02}", rng.gen_range(1..20), rng.gen_range(0..10), rng.gen_range(0..100)),
            };
            if self.versions.insert(v.clone()) {
                return v;
            }
        }
    }

    fn cve(&mut self, rng: &mut ChaCha8Rng) -> String {
        loop {
            let v = format!("CVE-{}-{:04}", rng.gen_range(2005..2016), rng.gen_range(1..10000));
            if self.ids.insert(v.clone()) {
                return v;
            }
        }
    }

    fn ms(&mut self, rng: &mut ChaCha8Rng) -> String {
        loop {
            let v = format!("MS{:02}-{:03}", rng.gen_range(5..16), rng.gen_range(1..100));
            if self.ids.insert(v.clone()) {
                return v;
            }
        }
    }

    fn symbol(&mut self, rng: &mut ChaCha8Rng) -> String {
        loop {
            let stem = SYMBOL_STEMS.choose(rng).expect("stems");
            let v = if rng.gen_bool(0.5) {
                format!("{stem}{}()", rng.gen_range(0..100))
            } else {
                format!("{stem}{}.{}", rng.gen_range(0..100), SYMBOL_FILES.choose(rng).expect("files"))
            };
            if self.symbols.insert(v.clone()) {
                return v;
            }
        }
    }
}

/// Builds documents with planted relations from the template set, using
/// gazetteer entries for vendors, products and vulnerability terms and
/// generated strings for the regex-typed entities. Each planted relation
/// uses gazetteer entities not used by any other planted relation.
pub fn generate_corpus(spec: &SynthSpec, gazetteers: &Gazetteers) -> Result<SynthCorpus, SynthError> {
    if !(0.0..=1.0).contains(&spec.noise_sentence_rate) {
        return Err(SynthError::Rate(spec.noise_sentence_rate));
    }
    let (relation_templates, noise_templates) = templates(&spec.template_set)?;
    let seed_patterns = template_seed_patterns(&spec.template_set)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut pools = Vec::new();
    for ty in EntityType::GAZETTEER {
        let g = gazetteers.get(ty).ok_or(SynthError::MissingGazetteer(ty))?;
        pools.push(Pool::new(ty, g.canonicals().into_iter().map(String::from).collect(), &mut rng));
    }
    let all: Vec<Vec<String>> = pools.iter().map(|p| p.items.clone()).collect();
    let mut generated = Generated { versions: BTreeSet::new(), ids: BTreeSet::new(), symbols: BTreeSet::new() };

    let noise_per_doc = noise_count(spec.relations_per_doc, spec.noise_sentence_rate);
    let planted_per_doc = if spec.noise_sentence_rate >= 1.0 { 0 } else { spec.relations_per_doc };
    let mut documents = Vec::with_capacity(spec.num_docs);
    let mut gold = Vec::new();
    let mut exhausted = false;
    let (mut planted_sentences, mut noise_sentences) = (0, 0);

    let mut entity = |ty: EntityType, distinct: bool, rng: &mut ChaCha8Rng, exhausted: &mut bool| -> String {
        match ty {
            EntityType::SwVersion => generated.version(rng),
            EntityType::CveId => generated.cve(rng),
            EntityType::MsId => generated.ms(rng),
            EntityType::SwSymbol => generated.symbol(rng),
            _ => {
                let i = EntityType::GAZETTEER.iter().position(|t| *t == ty).expect("gazetteer type");
                if distinct {
                    pools[i].take().unwrap_or_else(|| {
                        *exhausted = true;
                        String::new()
                    })
                } else {
                    all[i].choose(rng).cloned().unwrap_or_default()
                }
            }
        }
    };

    for d in 0..spec.num_docs {
        let mut sentences = Vec::with_capacity(planted_per_doc + noise_per_doc);
        for _ in 0..planted_per_doc {
            let relation = *RelationKind::ALL.choose(&mut rng).expect("relations");
            let options: Vec<&Template> = relation_templates.iter().filter(|t| t.relation == relation).collect();
            let t = options.choose(&mut rng).expect("every relation has templates");
            let s = entity(relation.subject_type(), true, &mut rng, &mut exhausted);
            let o = entity(relation.object_type(), true, &mut rng, &mut exhausted);
            sentences.push(t.text.replace("{S}", &s).replace("{O}", &o));
            gold.push(RelationInstance::new(relation, s, o, RelationProvenance::Seed));
            planted_sentences += 1;
        }
        for _ in 0..noise_per_doc {
            let t = noise_templates.choose(&mut rng).expect("noise templates");
            let a = entity(t.types.0, false, &mut rng, &mut exhausted);
            let b = entity(t.types.1, false, &mut rng, &mut exhausted);
            sentences.push(t.text.replace("{A}", &a).replace("{B}", &b));
            noise_sentences += 1;
        }
        sentences.shuffle(&mut rng);
        let id = format!("synth-{:04}", d + 1);
        documents.push(Document::from_plain_text(id.clone(), format!("synth://{id}"), sentences.join(" ")));
    }
    if exhausted {
        let p = pools.iter().find(|p| p.needed > p.available).expect("an exhausted pool");
        return Err(SynthError::NotEnoughEntities { entity_type: p.entity_type, needed: p.needed, available: p.available });
    }
    Ok(SynthCorpus { documents, gold, seed_patterns, planted_sentences, noise_sentences })
}
