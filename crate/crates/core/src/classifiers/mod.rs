//! Examiner baselines: logistic regression, the tool-using examination
//! agent, and their probability-averaging ensemble.

pub mod agent;
pub mod confidence;
pub mod logistic;

pub use agent::{run_agent, AgentPrediction, PredictedReason, ToolCall};
pub use confidence::{confidence_lexicon, map_verbalized_probability, ConfidenceExpression};
pub use logistic::{predict_proba, train_logistic, LogisticModel, TrainingConfig};

use crate::corpus::IndefinitenessCategory;

/// Arithmetic mean of the two classifiers' probabilities.
pub fn ensemble_average(p_agent: f64, p_logreg: f64) -> f64 {
    (p_agent + p_logreg) / 2.0
}

/// Per-category probability vector, aligned to
/// [`IndefinitenessCategory::FINAL`]: the maximum confidence over the
/// prediction's reasons of that category, 0 if none.
pub fn reason_confidences_to_multilabel(prediction: &AgentPrediction) -> Vec<f64> {
    IndefinitenessCategory::FINAL
        .into_iter()
        .map(|category| {
            prediction
                .reasons
                .iter()
                .filter(|r| r.category == category)
                .map(|r| r.probability)
                .fold(0.0, f64::max)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ensemble_is_arithmetic_mean() {
        assert_eq!(ensemble_average(0.4, 0.6), 0.5);
        assert_eq!(ensemble_average(0.7, 0.7), 0.7);
        assert_eq!(ensemble_average(0.9, 0.1), 0.5);
    }

    fn prediction(reasons: Vec<(IndefinitenessCategory, f64)>) -> AgentPrediction {
        AgentPrediction {
            application_id: "app1".to_string(),
            claim_number: 1,
            claim_likelihood: "likely".to_string(),
            probability: 0.7,
            reasons: reasons
                .into_iter()
                .map(|(category, probability)| PredictedReason {
                    confidence: String::new(),
                    probability,
                    reasoning: String::new(),
                    category,
                    recitations: Vec::new(),
                })
                .collect(),
            tool_trace: Vec::new(),
        }
    }

    #[test]
    fn multilabel_empty_is_zero_vector() {
        let v = reason_confidences_to_multilabel(&prediction(Vec::new()));
        assert_eq!(v, vec![0.0; 7]);
    }

    #[test]
    fn multilabel_takes_per_category_max() {
        let v = reason_confidences_to_multilabel(&prediction(vec![
            (IndefinitenessCategory::AntecedentBasis, 0.3),
            (IndefinitenessCategory::AntecedentBasis, 0.7),
            (IndefinitenessCategory::RelativeTerm, 0.5),
        ]));
        assert_eq!(v[0], 0.7);
        assert_eq!(v[2], 0.5);
        assert_eq!(v.iter().filter(|&&x| x > 0.0).count(), 2);
    }

    #[test]
    fn multilabel_matches_exhaustive_oracle() {
        let mixed = vec![
            (IndefinitenessCategory::UndefinedTerm, 0.2),
            (IndefinitenessCategory::FunctionalClaiming, 0.9),
            (IndefinitenessCategory::UndefinedTerm, 0.8),
            (IndefinitenessCategory::OmissionOfEssentialElements, 0.05),
            (IndefinitenessCategory::FunctionalClaiming, 0.4),
        ];
        let p = prediction(mixed.clone());
        let got = reason_confidences_to_multilabel(&p);
        for (slot, category) in IndefinitenessCategory::FINAL.into_iter().enumerate() {
            let want = mixed
                .iter()
                .filter(|(c, _)| *c == category)
                .map(|&(_, p)| p)
                .fold(0.0, f64::max);
            assert_eq!(got[slot], want);
        }
    }
}
