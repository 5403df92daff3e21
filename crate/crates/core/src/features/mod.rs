//! Feature computation for the baseline classifiers: TF-IDF vectors and the
//! handcrafted linguistic feature block.

pub mod readability;
pub mod stem;
pub mod tfidf;

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::{is_independent, Claim};
use crate::error::Result;

pub use tfidf::{fit_tfidf, vectorize, TfidfModel};

const STOPWORDS: &str = include_str!("../assets/stopwords.txt");

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOPWORDS.lines().map(str::trim).collect())
}

/// Lowercase tokens split on non-alphanumeric characters, empties dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Default trigger-word lexicon; config-overridable.
pub fn default_trigger_lexicon() -> Vec<String> {
    [
        "means for",
        "step for",
        "such as",
        "substantially",
        "about",
        "approximately",
        "at least one of",
        "and/or",
        "etc",
        "like",
    ]
    .into_iter()
    .map(str::to_string)
    .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinguisticConfig {
    pub trigger_lexicon: Vec<String>,
}

impl Default for LinguisticConfig {
    fn default() -> LinguisticConfig {
        LinguisticConfig {
            trigger_lexicon: default_trigger_lexicon(),
        }
    }
}

/// Slot names of the dense linguistic block, in the fixed versioned order.
pub fn linguistic_feature_names(config: &LinguisticConfig) -> Vec<String> {
    let mut names: Vec<String> = [
        "char_count",
        "word_count",
        "claim_description_length_ratio",
        "claim_description_word_iou",
        "unique_stem_count",
        "type_token_ratio",
        "stopword_count",
        "flesch_reading_ease",
        "flesch_kincaid_grade",
        "gunning_fog",
        "automated_readability_index",
        "dale_chall",
        "is_independent",
    ]
    .into_iter()
    .map(str::to_string)
    .collect();
    for trigger in &config.trigger_lexicon {
        names.push(format!("trigger:{trigger}"));
    }
    names
}

fn trigger_regex(phrase: &str) -> Regex {
    Regex::new(&format!(r"(?i)\b{}\b", regex::escape(phrase))).expect("trigger phrase pattern")
}

/// The dense linguistic block, slots ordered as in
/// [`linguistic_feature_names`]. Degenerate short texts use guarded
/// denominators; all values are finite.
pub fn linguistic_features(
    claim: &Claim,
    description_paragraphs: &[String],
    config: &LinguisticConfig,
) -> Vec<f64> {
    let text = &claim.text;
    let description = description_paragraphs.join("\n");
    let stats = readability::text_stats(text);
    let tokens = tokenize(text);
    let description_tokens = tokenize(&description);

    let claim_words: HashSet<&String> = tokens.iter().collect();
    let description_words: HashSet<&String> = description_tokens.iter().collect();
    let intersection = claim_words.intersection(&description_words).count() as f64;
    let union = claim_words.union(&description_words).count() as f64;
    let iou = if union == 0.0 { 0.0 } else { intersection / union };

    let unique_stems: HashSet<String> = tokens.iter().map(|t| stem::porter_stem(t)).collect();
    let unique_tokens: HashSet<&String> = tokens.iter().collect();
    let type_token_ratio = if tokens.is_empty() {
        0.0
    } else {
        unique_tokens.len() as f64 / tokens.len() as f64
    };
    let stopword_count = tokens
        .iter()
        .filter(|t| stopwords().contains(t.as_str()))
        .count() as f64;

    let description_chars = description.chars().count().max(1) as f64;

    let mut features = vec![
        text.chars().count() as f64,
        stats.words as f64,
        text.chars().count() as f64 / description_chars,
        iou,
        unique_stems.len() as f64,
        type_token_ratio,
        stopword_count,
        readability::flesch_reading_ease(&stats),
        readability::flesch_kincaid_grade(&stats),
        readability::gunning_fog(&stats),
        readability::automated_readability_index(&stats),
        readability::dale_chall(&stats),
        if is_independent(claim) { 1.0 } else { 0.0 },
    ];
    for trigger in &config.trigger_lexicon {
        features.push(if trigger_regex(trigger).is_match(text) {
            1.0
        } else {
            0.0
        });
    }
    features
}

/// One claim's features: the dense linguistic block plus the sparse TF-IDF
/// block over a shared index space (TF-IDF indices offset by the dense width).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub dense: Vec<f64>,
    /// (offset index, weight) pairs, indices ≥ dense.len().
    pub sparse: Vec<(usize, f64)>,
}

impl FeatureVector {
    /// Total entries as sparse (index, value) pairs.
    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.dense
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, v)| *v != 0.0)
            .chain(self.sparse.iter().copied())
    }
}

/// Which feature blocks to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    TfidfOnly,
    LinguisticOnly,
    All,
}

/// An immutable feature space: fit on the train split, shareable across
/// concurrent vectorization workers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureSpace {
    pub linguistic: LinguisticConfig,
    pub tfidf: Option<TfidfModel>,
    pub feature_set: FeatureSet,
}

impl FeatureSpace {
    /// Fits the space on train-split texts only.
    pub fn fit(
        train_texts: &[String],
        feature_set: FeatureSet,
        max_features: usize,
        linguistic: LinguisticConfig,
    ) -> Result<FeatureSpace> {
        let tfidf = match feature_set {
            FeatureSet::LinguisticOnly => None,
            _ => Some(fit_tfidf(train_texts, max_features)?),
        };
        Ok(FeatureSpace {
            linguistic,
            tfidf,
            feature_set,
        })
    }

    pub fn dense_width(&self) -> usize {
        match self.feature_set {
            FeatureSet::TfidfOnly => 0,
            _ => linguistic_feature_names(&self.linguistic).len(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dense_width() + self.tfidf.as_ref().map(TfidfModel::dimension).unwrap_or(0)
    }

    /// The full feature-name registry, dense slots first.
    pub fn feature_names(&self) -> Vec<String> {
        let mut names = match self.feature_set {
            FeatureSet::TfidfOnly => vec![],
            _ => linguistic_feature_names(&self.linguistic),
        };
        if let Some(model) = &self.tfidf {
            names.extend(model.token_names().into_iter().map(|t| format!("tfidf:{t}")));
        }
        names
    }

    pub fn featurize(&self, claim: &Claim, description_paragraphs: &[String]) -> FeatureVector {
        let dense = match self.feature_set {
            FeatureSet::TfidfOnly => vec![],
            _ => linguistic_features(claim, description_paragraphs, &self.linguistic),
        };
        let offset = dense.len();
        let sparse = self
            .tfidf
            .as_ref()
            .map(|model| {
                vectorize(model, &claim.text)
                    .into_iter()
                    .map(|(i, w)| (i + offset, w))
                    .collect()
            })
            .unwrap_or_default();
        FeatureVector { dense, sparse }
    }
}

/// Writes a sparse triplet file (row, column, value) plus a feature-name
/// registry file next to it.
pub fn export_feature_matrix(
    space: &FeatureSpace,
    vectors: &[FeatureVector],
    matrix_path: &Path,
    registry_path: &Path,
) -> Result<()> {
    let mut matrix = std::io::BufWriter::new(std::fs::File::create(matrix_path)?);
    writeln!(matrix, "row\tcol\tvalue")?;
    for (row, vector) in vectors.iter().enumerate() {
        for (col, value) in vector.entries() {
            writeln!(matrix, "{row}\t{col}\t{value}")?;
        }
    }
    matrix.flush()?;
    let mut registry = std::io::BufWriter::new(std::fs::File::create(registry_path)?);
    for (idx, name) in space.feature_names().iter().enumerate() {
        writeln!(registry, "{idx}\t{name}")?;
    }
    registry.flush()?;
    Ok(())
}
