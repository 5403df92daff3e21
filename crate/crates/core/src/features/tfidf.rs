//! TF-IDF model fitted on the train split only.
//!
//! idf(t) = ln((1+N)/(1+df(t))) + 1, tf is the raw count, and vectors are
//! L2-normalized. The vocabulary keeps the top `max_features` tokens by corpus
//! frequency, ties broken lexicographically.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::tokenize;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TfidfModel {
    pub vocabulary: BTreeMap<String, usize>,
    /// Indexed by vocabulary slot.
    pub document_frequency: Vec<u32>,
    pub corpus_size: usize,
    pub max_features: usize,
}

impl TfidfModel {
    pub fn idf(&self, index: usize) -> f64 {
        let n = self.corpus_size as f64;
        let df = self.document_frequency[index] as f64;
        ((1.0 + n) / (1.0 + df)).ln() + 1.0
    }

    pub fn dimension(&self) -> usize {
        self.vocabulary.len()
    }

    /// Token names ordered by vocabulary index.
    pub fn token_names(&self) -> Vec<String> {
        let mut names = vec![String::new(); self.vocabulary.len()];
        for (token, &idx) in &self.vocabulary {
            names[idx] = token.clone();
        }
        names
    }
}

pub fn fit_tfidf(train_texts: &[String], max_features: usize) -> Result<TfidfModel> {
    if train_texts.is_empty() {
        return Err(Error::EmptyInput("tfidf training texts"));
    }
    let mut corpus_counts: HashMap<String, u64> = HashMap::new();
    let mut doc_freq: HashMap<String, u32> = HashMap::new();
    for text in train_texts {
        let tokens = tokenize(text);
        let unique: HashSet<&String> = tokens.iter().collect();
        for token in &unique {
            *doc_freq.entry((*token).clone()).or_insert(0) += 1;
        }
        for token in tokens {
            *corpus_counts.entry(token).or_insert(0) += 1;
        }
    }
    // top max_features by corpus frequency, ties lexicographic
    let mut ranked: Vec<(String, u64)> = corpus_counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(max_features);
    let mut selected: Vec<String> = ranked.into_iter().map(|(t, _)| t).collect();
    selected.sort();
    let vocabulary: BTreeMap<String, usize> = selected
        .into_iter()
        .enumerate()
        .map(|(i, t)| (t, i))
        .collect();
    let mut document_frequency = vec![0u32; vocabulary.len()];
    for (token, &idx) in &vocabulary {
        document_frequency[idx] = doc_freq[token];
    }
    Ok(TfidfModel {
        vocabulary,
        document_frequency,
        corpus_size: train_texts.len(),
        max_features,
    })
}

/// Sparse L2-normalized TF-IDF vector as (vocabulary index, weight) pairs in
/// ascending index order.
pub fn vectorize(model: &TfidfModel, text: &str) -> Vec<(usize, f64)> {
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for token in tokenize(text) {
        if let Some(&idx) = model.vocabulary.get(&token) {
            *counts.entry(idx).or_insert(0.0) += 1.0;
        }
    }
    let mut vector: Vec<(usize, f64)> = counts
        .into_iter()
        .map(|(idx, tf)| (idx, tf * model.idf(idx)))
        .collect();
    let norm: f64 = vector.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, w) in vector.iter_mut() {
            *w /= norm;
        }
    }
    vector
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_document_idf_is_one() {
        let model = fit_tfidf(&["alpha beta".to_string()], 100).unwrap();
        for idx in 0..model.dimension() {
            assert_abs_diff_eq!(model.idf(idx), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_document_idf_hand_arithmetic() {
        let model = fit_tfidf(&["a b".to_string(), "a".to_string()], 100).unwrap();
        let a = model.vocabulary["a"];
        let b = model.vocabulary["b"];
        assert_abs_diff_eq!(model.idf(a), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(model.idf(b), (3.0f64 / 2.0).ln() + 1.0, epsilon = 1e-12);
    }

    #[test]
    fn vectors_are_unit_norm() {
        let model = fit_tfidf(
            &["claim text here".to_string(), "other claim".to_string()],
            100,
        )
        .unwrap();
        let v = vectorize(&model, "claim text claim");
        let norm: f64 = v.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn max_features_keeps_most_frequent_with_lexicographic_ties() {
        let texts = vec![
            "common common common zeta alpha".to_string(),
            "common zeta".to_string(),
        ];
        let model = fit_tfidf(&texts, 2).unwrap();
        assert!(model.vocabulary.contains_key("common"));
        // zeta (2 occurrences) beats alpha (1); no tie here, but with a tie
        // alpha would win lexicographically
        assert!(model.vocabulary.contains_key("zeta"));
        assert_eq!(model.dimension(), 2);
    }

    #[test]
    fn unknown_tokens_ignored() {
        let model = fit_tfidf(&["alpha beta".to_string()], 100).unwrap();
        let v = vectorize(&model, "gamma delta");
        assert!(v.is_empty());
    }
}
