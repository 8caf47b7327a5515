//! Semi-supervised relation extraction for security text.
//!
//! The pipeline tags entities with gazetteers and regular expressions
//! ([`entity`]), drops irrelevant documents with a logistic-regression gate
//! ([`relevance`]), then grows relation instances and extraction patterns per
//! relation type ([`bootstrap`]), scoring candidates ([`scoring`]) and asking
//! a human about the most influential ones ([`oracle`]).

pub mod bootstrap;
pub mod corpus;
pub mod entity;
pub mod evalgen;
pub mod oracle;
pub mod pattern;
pub mod relation;
pub mod relevance;
pub mod scoring;
