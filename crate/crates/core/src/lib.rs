//! Construction and evaluation toolkit for a patent-claim definiteness corpus.
//!
//! The pipeline retrieves USPTO office actions, extracts structured
//! indefiniteness rejections with an LLM, assembles a balanced labeled corpus,
//! trains feature-based baselines, runs a tool-using LLM examiner agent, and
//! evaluates predictions with binary, multi-label, and pairwise LLM-as-Judge
//! metrics.
//!
//! Modules map onto pipeline stages:
//! - [`corpus`]: canonical domain types and pure claim/description text ops
//! - [`ingest`]: portal client, document selection, XML conversion, disk cache
//! - [`oa_parser`]: office-action section selection, LLM extraction, fuzzy
//!   recitation matching, label finalization
//! - [`dataset`]: definite-claim sampling, application-level splits, statistics
//! - [`features`]: TF-IDF and handcrafted linguistic features
//! - [`classifiers`]: logistic regression, the examiner agent, ensembling
//! - [`gateway`]: the single chokepoint for all LLM traffic
//! - [`eval`]: threshold balancing, AUROC, judge similarity machinery,
//!   multi-label metrics, calibration analysis

pub mod classifiers;
pub mod corpus;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod gateway;
pub mod ingest;
pub mod oa_parser;

pub use corpus::{
    Claim, IndefinitenessCategory, LabeledClaim, PatentApplication, RejectionReason, Split,
};
pub use error::Error;
