//! Verbalized likelihood expressions and their numeric probabilities.
//!
//! The table ships as a versioned asset with one median probability per
//! expression, ordered strictly monotone from "almost no chance" to "almost
//! certain". Contents are an approximation of survey medians and are
//! config-overridable.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oa_parser::fuzzy::levenshtein;

const TABLE: &str = include_str!("../assets/verbalized_probabilities.tsv");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceExpression {
    pub phrase: String,
    pub numeric_probability: f64,
}

/// The ordered lexicon, parsed once from the shipped table.
pub fn confidence_lexicon() -> &'static [ConfidenceExpression] {
    static LEXICON: OnceLock<Vec<ConfidenceExpression>> = OnceLock::new();
    LEXICON.get_or_init(|| {
        TABLE
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                let (phrase, prob) = line.split_once('\t').expect("tab-separated table row");
                ConfidenceExpression {
                    phrase: phrase.trim().to_string(),
                    numeric_probability: prob.trim().parse().expect("numeric probability"),
                }
            })
            .collect()
    })
}

/// Looks up an expression's probability. Unknown phrases resolve to the
/// nearest lexicon entry by edit distance, with a warning; never a silent
/// failure.
pub fn map_verbalized_probability(phrase: &str) -> Result<ConfidenceExpression> {
    let normalized = phrase.trim().to_lowercase();
    if normalized.is_empty() {
        return Err(Error::EmptyInput("likelihood phrase"));
    }
    let lexicon = confidence_lexicon();
    if let Some(entry) = lexicon.iter().find(|e| e.phrase == normalized) {
        return Ok(entry.clone());
    }
    let nearest = lexicon
        .iter()
        .min_by_key(|e| levenshtein(&normalized, &e.phrase))
        .expect("lexicon non-empty");
    log::warn!(
        "unknown likelihood phrase {phrase:?}; mapped to nearest entry {:?}",
        nearest.phrase
    );
    Ok(nearest.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        let lexicon = confidence_lexicon();
        let min = lexicon
            .iter()
            .map(|e| e.numeric_probability)
            .fold(f64::MAX, f64::min);
        let max = lexicon
            .iter()
            .map(|e| e.numeric_probability)
            .fold(f64::MIN, f64::max);
        assert_eq!(
            map_verbalized_probability("almost no chance")
                .unwrap()
                .numeric_probability,
            min
        );
        assert_eq!(
            map_verbalized_probability("almost certain")
                .unwrap()
                .numeric_probability,
            max
        );
    }

    #[test]
    fn strictly_monotone() {
        let lexicon = confidence_lexicon();
        for pair in lexicon.windows(2) {
            assert!(
                pair[1].numeric_probability > pair[0].numeric_probability,
                "{} !< {}",
                pair[0].phrase,
                pair[1].phrase
            );
        }
    }

    #[test]
    fn probabilities_in_open_interval() {
        for entry in confidence_lexicon() {
            assert!(entry.numeric_probability > 0.0 && entry.numeric_probability < 1.0);
        }
    }

    #[test]
    fn nearest_match_for_unknown_phrase() {
        let mapped = map_verbalized_probability("allmost certain").unwrap();
        assert_eq!(mapped.phrase, "almost certain");
    }

    #[test]
    fn case_insensitive_lookup() {
        let mapped = map_verbalized_probability("Highly Likely").unwrap();
        assert_eq!(mapped.phrase, "highly likely");
    }
}
