//! Synthetic corpora with planted relations, and precision/recall reports.

mod report;
mod synth;

pub use report::{evaluate, EvalReport, Recall, RelationRow};
pub use synth::{
    generate_corpus, noise_count, template_seed_patterns, SynthCorpus, SynthError, SynthSpec, DEFAULT_TEMPLATE_SET,
};
