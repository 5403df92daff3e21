//! Evaluation metrics: threshold-balanced binary classification, AUROC,
//! multi-label F1 with per-category calibrated thresholds, the pairwise
//! LLM-as-Judge similarity machinery, and calibration analysis.
//!
//! All rates are expressed in [0, 100].

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::IndefinitenessCategory;
use crate::error::{Error, Result};
use crate::gateway::{ChatMessage, ChatRequest, Gateway, GradeDistribution};

/// Pairwise judge scores between examiner-cited (rows) and model-cited
/// (columns) reasons for a single claim. Scores in [0, 100].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub n: usize,
    pub m: usize,
    /// Row-major n×m.
    pub scores: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn new(n: usize, m: usize, scores: Vec<f64>) -> Result<SimilarityMatrix> {
        if scores.len() != n * m {
            return Err(Error::DimensionMismatch {
                expected: n * m,
                got: scores.len(),
            });
        }
        if scores.iter().any(|&s| !(0.0..=100.0).contains(&s)) {
            return Err(Error::Invalid("similarity score outside [0,100]".into()));
        }
        Ok(SimilarityMatrix { n, m, scores })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.scores[i * self.m + j]
    }

    /// Max over rows for each column: best examiner match per model reason.
    pub fn column_maxima(&self) -> Vec<f64> {
        (0..self.m)
            .map(|j| (0..self.n).map(|i| self.get(i, j)).fold(f64::MIN, f64::max))
            .collect()
    }

    /// Max over columns for each row: best model match per examiner reason.
    pub fn row_maxima(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.m).map(|j| self.get(i, j)).fold(f64::MIN, f64::max))
            .collect()
    }
}

/// Normalizes a 1..5 grade to [0, 100].
pub fn norm_grade(s: f64) -> f64 {
    100.0 * (s - 1.0) / 4.0
}

/// Probability-weighted mean grade mapped to [0, 100]:
/// sim = norm(Σ i·p_i / Σ p_i), using unnormalized probabilities.
pub fn similarity_from_grades(dist: &GradeDistribution) -> f64 {
    let total: f64 = dist.probabilities.iter().sum();
    let weighted: f64 = dist
        .probabilities
        .iter()
        .enumerate()
        .map(|(idx, p)| (idx as f64 + 1.0) * p)
        .sum();
    norm_grade(weighted / total)
}

/// The judge's verdict on one (examiner reason, model reason) pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub examiner_reason: String,
    pub model_reason: String,
    pub grade_distribution: GradeDistribution,
    pub sim: f64,
    /// The similarities/differences turn preceding the grade.
    pub analysis_text: String,
}

const JUDGE_PROMPT: &str = include_str!("assets/judge_prompt.txt");

/// Runs the two-turn judge protocol over the gateway: an analysis turn, then a
/// grade turn read from top log-probabilities.
pub fn judge_pair(
    examiner_reason: &str,
    model_reason: &str,
    gateway: &Gateway,
    model: &str,
) -> Result<JudgeVerdict> {
    if examiner_reason.trim().is_empty() || model_reason.trim().is_empty() {
        return Err(Error::EmptyInput("judge pair text"));
    }
    let prompt = JUDGE_PROMPT
        .replace("{reason_1}", examiner_reason)
        .replace("{reason_2}", model_reason);
    let mut messages = vec![ChatMessage::user(prompt)];
    let analysis = gateway.complete(&ChatRequest::new(model, messages.clone()))?;
    let analysis_text = analysis.content.clone().unwrap_or_default();
    messages.push(ChatMessage::assistant(analysis_text.clone()));
    messages.push(ChatMessage::user(
        "Now reply with the score as a single number from 1 to 5 and nothing else.".to_string(),
    ));
    let mut grade_request = ChatRequest::new(model, messages);
    grade_request.top_logprobs = Some(20);
    let dist = gateway.grade_distribution(&grade_request)?;
    let sim = similarity_from_grades(&dist);
    Ok(JudgeVerdict {
        examiner_reason: examiner_reason.to_string(),
        model_reason: model_reason.to_string(),
        grade_distribution: dist,
        sim,
        analysis_text,
    })
}

/// Per-claim judge precision/recall in soft and thresholded variants.
/// `None` marks an undefined side (no reasons in that dimension).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeClaimScores {
    pub soft_precision: Option<f64>,
    pub soft_recall: Option<f64>,
    pub soft_f1: Option<f64>,
    pub thresholded_precision: Option<f64>,
    pub thresholded_recall: Option<f64>,
    pub thresholded_f1: Option<f64>,
    /// Per model-cited reason: its best similarity against examiner reasons.
    pub per_model_reason_max: Vec<f64>,
    /// Per examiner-cited reason: its best similarity against model reasons.
    pub per_examiner_reason_max: Vec<f64>,
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Computes the per-claim soft and thresholded judge P/R/F1 from a similarity
/// matrix. Degenerate cases: n=0,m>0 yields P=0 with R undefined; n>0,m=0
/// yields R=0 with P undefined.
pub fn judge_prf(matrix: &SimilarityMatrix, threshold: f64) -> JudgeClaimScores {
    let (n, m) = (matrix.n, matrix.m);
    if n == 0 && m == 0 {
        return JudgeClaimScores {
            soft_precision: None,
            soft_recall: None,
            soft_f1: None,
            thresholded_precision: None,
            thresholded_recall: None,
            thresholded_f1: None,
            per_model_reason_max: vec![],
            per_examiner_reason_max: vec![],
        };
    }
    if n == 0 {
        // model cited reasons where the examiner cited none
        return JudgeClaimScores {
            soft_precision: Some(0.0),
            soft_recall: None,
            soft_f1: None,
            thresholded_precision: Some(0.0),
            thresholded_recall: None,
            thresholded_f1: None,
            per_model_reason_max: vec![0.0; m],
            per_examiner_reason_max: vec![],
        };
    }
    if m == 0 {
        return JudgeClaimScores {
            soft_precision: None,
            soft_recall: Some(0.0),
            soft_f1: None,
            thresholded_precision: None,
            thresholded_recall: Some(0.0),
            thresholded_f1: None,
            per_model_reason_max: vec![],
            per_examiner_reason_max: vec![0.0; n],
        };
    }
    let col_max = matrix.column_maxima();
    let row_max = matrix.row_maxima();
    let soft_p = col_max.iter().sum::<f64>() / m as f64;
    let soft_r = row_max.iter().sum::<f64>() / n as f64;
    let thr_p =
        100.0 * col_max.iter().filter(|&&s| s >= threshold).count() as f64 / m as f64;
    let thr_r =
        100.0 * row_max.iter().filter(|&&s| s >= threshold).count() as f64 / n as f64;
    JudgeClaimScores {
        soft_precision: Some(soft_p),
        soft_recall: Some(soft_r),
        soft_f1: Some(harmonic(soft_p, soft_r)),
        thresholded_precision: Some(thr_p),
        thresholded_recall: Some(thr_r),
        thresholded_f1: Some(harmonic(thr_p, thr_r)),
        per_model_reason_max: col_max,
        per_examiner_reason_max: row_max,
    }
}

/// Macro and micro aggregates for one judge variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeAggregate {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeReport {
    pub soft_macro: JudgeAggregate,
    pub soft_micro: JudgeAggregate,
    pub thresholded_macro: JudgeAggregate,
    pub thresholded_micro: JudgeAggregate,
    pub claims_evaluated: usize,
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

fn aggregate(p: Option<f64>, r: Option<f64>) -> JudgeAggregate {
    let f1 = match (p, r) {
        (Some(p), Some(r)) => Some(harmonic(p, r)),
        _ => None,
    };
    JudgeAggregate {
        precision: p,
        recall: r,
        f1,
    }
}

/// Aggregates per-claim judge results. Macro averages defined per-claim
/// values; micro averages the per-reason maxima (or their ≥threshold
/// indicators) pooled across claims. F1 is recomputed from the aggregated
/// precision and recall.
pub fn aggregate_judge(per_claim: &[JudgeClaimScores], threshold: f64) -> JudgeReport {
    let defined = |f: fn(&JudgeClaimScores) -> Option<f64>| -> Vec<f64> {
        per_claim.iter().filter_map(f).collect()
    };
    let soft_macro_p = mean(&defined(|c| c.soft_precision));
    let soft_macro_r = mean(&defined(|c| c.soft_recall));
    let thr_macro_p = mean(&defined(|c| c.thresholded_precision));
    let thr_macro_r = mean(&defined(|c| c.thresholded_recall));

    let model_maxima: Vec<f64> = per_claim
        .iter()
        .flat_map(|c| c.per_model_reason_max.iter().copied())
        .collect();
    let examiner_maxima: Vec<f64> = per_claim
        .iter()
        .flat_map(|c| c.per_examiner_reason_max.iter().copied())
        .collect();
    let soft_micro_p = mean(&model_maxima);
    let soft_micro_r = mean(&examiner_maxima);
    let indicator = |values: &[f64]| -> Vec<f64> {
        values
            .iter()
            .map(|&s| if s >= threshold { 100.0 } else { 0.0 })
            .collect()
    };
    let thr_micro_p = mean(&indicator(&model_maxima));
    let thr_micro_r = mean(&indicator(&examiner_maxima));

    JudgeReport {
        soft_macro: aggregate(soft_macro_p, soft_macro_r),
        soft_micro: aggregate(soft_micro_p, soft_micro_r),
        thresholded_macro: aggregate(thr_macro_p, thr_macro_r),
        thresholded_micro: aggregate(thr_micro_p, thr_micro_r),
        claims_evaluated: per_claim
            .iter()
            .filter(|c| {
                c.soft_precision.is_some()
                    || c.soft_recall.is_some()
            })
            .count(),
    }
}

/// A balanced decision threshold and what it achieves on the tuning scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalancedThreshold {
    pub threshold: f64,
    pub achieved_fraction: f64,
    /// False when ties made the target fraction unreachable.
    pub exact: bool,
}

/// Finds the smallest observed-score threshold `t` such that
/// fraction(score ≥ t) ≤ `target_fraction`. When ties make the target
/// unreachable exactly, returns the candidate minimizing the deviation from
/// the target, breaking ties toward the larger threshold.
pub fn balance_threshold(scores: &[f64], target_fraction: f64) -> Result<BalancedThreshold> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("validation scores"));
    }
    if !(0.0..1.0).contains(&target_fraction) || target_fraction <= 0.0 {
        return Err(Error::Config(format!(
            "target fraction {target_fraction} outside (0,1)"
        )));
    }
    let n = scores.len() as f64;
    let mut candidates: Vec<f64> = scores.to_vec();
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.dedup();
    candidates.push(f64::INFINITY); // predict-none sentinel
    let fraction = |t: f64| scores.iter().filter(|&&s| s >= t).count() as f64 / n;

    for &t in &candidates {
        let f = fraction(t);
        if f <= target_fraction {
            // the target is "reachable" when some candidate attains a
            // fraction close enough not to be a tie artifact; we report the
            // achieved fraction either way
            return Ok(BalancedThreshold {
                threshold: t,
                achieved_fraction: f,
                exact: f == target_fraction,
            });
        }
    }
    unreachable!("sentinel always satisfies fraction 0");
}

/// Binary precision/recall/F1/accuracy as percentages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Set when no positives were predicted, making precision undefined
    /// (reported as 0).
    pub no_positive_predictions: bool,
}

pub fn binary_metrics(predictions: &[bool], labels: &[bool]) -> Result<BinaryMetrics> {
    if predictions.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: predictions.len(),
        });
    }
    if !labels.iter().any(|&l| l) {
        return Err(Error::Invalid("no positive labels".into()));
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    let mut tn = 0usize;
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let no_positive_predictions = tp + fp == 0;
    let precision = if no_positive_predictions {
        0.0
    } else {
        100.0 * tp as f64 / (tp + fp) as f64
    };
    let recall = 100.0 * tp as f64 / (tp + fn_) as f64;
    let accuracy = 100.0 * (tp + tn) as f64 / predictions.len() as f64;
    Ok(BinaryMetrics {
        precision,
        recall,
        f1: harmonic(precision, recall),
        accuracy,
        no_positive_predictions,
    })
}

/// AUROC in [0, 100] via the rank (Mann-Whitney) formulation with half-credit
/// for score ties; equals the trapezoidal ROC area.
pub fn auroc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    // average ranks with ties sharing their midrank
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    let mut ranks = vec![0.0f64; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = midrank;
        }
        i = j + 1;
    }
    let rank_sum_pos: f64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l)
        .map(|(&r, _)| r)
        .sum();
    let u = rank_sum_pos - pos as f64 * (pos as f64 + 1.0) / 2.0;
    Ok(100.0 * u / (pos as f64 * neg as f64))
}

/// Per-category and pooled multi-label metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultilabelReport {
    pub per_category: BTreeMap<String, CategoryMetrics>,
    pub macro_f1: f64,
    pub micro_f1: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoryMetrics {
    pub threshold: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    /// Set when the category was absent from validation and the threshold
    /// defaulted to 0.5.
    pub defaulted_threshold: bool,
}

/// Per-category scores/labels for a set of claims, plus validation scores and
/// labels used to calibrate each category's threshold to its validation
/// positive rate.
pub struct MultilabelInputs<'a> {
    pub categories: &'a [IndefinitenessCategory],
    /// scores[cat][claim]
    pub scores: &'a BTreeMap<IndefinitenessCategory, Vec<f64>>,
    pub labels: &'a BTreeMap<IndefinitenessCategory, Vec<bool>>,
    pub validation_scores: &'a BTreeMap<IndefinitenessCategory, Vec<f64>>,
    pub validation_labels: &'a BTreeMap<IndefinitenessCategory, Vec<bool>>,
}

pub fn multilabel_metrics(inputs: &MultilabelInputs) -> Result<MultilabelReport> {
    let mut per_category = BTreeMap::new();
    let mut pooled_preds = Vec::new();
    let mut pooled_labels = Vec::new();
    let mut f1_sum = 0.0;
    for &cat in inputs.categories {
        let scores = inputs
            .scores
            .get(&cat)
            .ok_or_else(|| Error::Config(format!("missing scores for {}", cat.identifier())))?;
        let labels = inputs
            .labels
            .get(&cat)
            .ok_or_else(|| Error::Config(format!("missing labels for {}", cat.identifier())))?;
        let val_labels = inputs.validation_labels.get(&cat);
        let val_scores = inputs.validation_scores.get(&cat);
        let positive_rate = val_labels
            .map(|l| l.iter().filter(|&&x| x).count() as f64 / l.len().max(1) as f64)
            .unwrap_or(0.0);
        let (threshold, defaulted) = if positive_rate > 0.0 && val_scores.is_some() {
            (
                balance_threshold(val_scores.unwrap(), positive_rate)?.threshold,
                false,
            )
        } else {
            log::warn!(
                "category {} absent from validation; threshold defaults to 0.5",
                cat.identifier()
            );
            (0.5, true)
        };
        let preds: Vec<bool> = scores.iter().map(|&s| s >= threshold).collect();
        let (precision, recall, f1) = if labels.iter().any(|&l| l) {
            let m = binary_metrics(&preds, labels)?;
            (m.precision, m.recall, m.f1)
        } else {
            (0.0, 0.0, 0.0)
        };
        pooled_preds.extend(preds.iter().copied());
        pooled_labels.extend(labels.iter().copied());
        f1_sum += f1;
        per_category.insert(
            cat.identifier().to_string(),
            CategoryMetrics {
                threshold,
                f1,
                precision,
                recall,
                defaulted_threshold: defaulted,
            },
        );
    }
    let micro_f1 = if pooled_labels.iter().any(|&l| l) {
        binary_metrics(&pooled_preds, &pooled_labels)?.f1
    } else {
        0.0
    };
    Ok(MultilabelReport {
        per_category,
        macro_f1: f1_sum / inputs.categories.len() as f64,
        micro_f1,
    })
}

/// Probability-calibration analysis: 10 equal-width bins over [0,1] with
/// per-bin accuracy and support, plus an optional Pearson correlation between
/// confidences and judge similarities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub bins: Vec<CalibrationBin>,
    pub pearson_rho: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationBin {
    pub lower: f64,
    pub upper: f64,
    pub accuracy: Option<f64>,
    pub fraction: f64,
    pub low_support: bool,
}

pub fn calibration_analysis(
    probabilities: &[f64],
    outcomes: &[bool],
    judge_pairs: Option<&[(f64, f64)]>,
) -> Result<CalibrationReport> {
    if probabilities.len() != outcomes.len() {
        return Err(Error::DimensionMismatch {
            expected: outcomes.len(),
            got: probabilities.len(),
        });
    }
    let n = probabilities.len();
    let mut bins = Vec::with_capacity(10);
    for b in 0..10 {
        let lower = b as f64 / 10.0;
        let upper = (b + 1) as f64 / 10.0;
        let in_bin: Vec<usize> = (0..n)
            .filter(|&i| {
                let p = probabilities[i];
                p >= lower && (p < upper || (b == 9 && p <= upper))
            })
            .collect();
        let fraction = in_bin.len() as f64 / n.max(1) as f64;
        // accuracy: how often the implied hard decision (p >= 0.5) is right
        let accuracy = if in_bin.is_empty() {
            None
        } else {
            let correct = in_bin
                .iter()
                .filter(|&&i| (probabilities[i] >= 0.5) == outcomes[i])
                .count();
            Some(correct as f64 / in_bin.len() as f64)
        };
        bins.push(CalibrationBin {
            lower,
            upper,
            accuracy,
            fraction,
            low_support: fraction < 0.01,
        });
    }
    let pearson_rho = judge_pairs.and_then(pearson);
    Ok(CalibrationReport { bins, pearson_rho })
}

fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for &(x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Uniform random scores per claim and per final category, seeded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomBaseline {
    pub claim_scores: Vec<f64>,
    pub category_scores: BTreeMap<IndefinitenessCategory, Vec<f64>>,
}

pub fn random_baseline(n_claims: usize, seed: u64) -> RandomBaseline {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let claim_scores = (0..n_claims).map(|_| rng.gen::<f64>()).collect();
    let mut category_scores = BTreeMap::new();
    for cat in IndefinitenessCategory::FINAL {
        category_scores.insert(cat, (0..n_claims).map(|_| rng.gen::<f64>()).collect());
    }
    RandomBaseline {
        claim_scores,
        category_scores,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn one_hot(grade: usize) -> GradeDistribution {
        let mut p = [0.0; 5];
        p[grade - 1] = 1.0;
        GradeDistribution { probabilities: p }
    }

    #[test]
    fn norm_endpoints() {
        assert_eq!(norm_grade(1.0), 0.0);
        assert_eq!(norm_grade(5.0), 100.0);
    }

    #[test]
    fn sim_one_hot_and_uniform() {
        assert_abs_diff_eq!(similarity_from_grades(&one_hot(5)), 100.0);
        let uniform = GradeDistribution {
            probabilities: [0.2; 5],
        };
        assert_abs_diff_eq!(similarity_from_grades(&uniform), 50.0);
    }

    #[test]
    fn sim_weighted_mean() {
        // p = {4: 0.6, 5: 0.4} → mean 4.4 → sim 85
        let dist = GradeDistribution {
            probabilities: [0.0, 0.0, 0.0, 0.6, 0.4],
        };
        assert_abs_diff_eq!(similarity_from_grades(&dist), 85.0, epsilon = 1e-12);
    }

    #[test]
    fn sim_unnormalized_distribution() {
        // explicit division by the probability sum
        let dist = GradeDistribution {
            probabilities: [0.0, 0.0, 0.0, 0.3, 0.2],
        };
        assert_abs_diff_eq!(similarity_from_grades(&dist), 85.0, epsilon = 1e-12);
    }

    #[test]
    fn judge_prf_reference_matrix() {
        let m = SimilarityMatrix::new(2, 2, vec![80.0, 60.0, 70.0, 90.0]).unwrap();
        let s = judge_prf(&m, 75.0);
        assert_abs_diff_eq!(s.soft_precision.unwrap(), 85.0);
        assert_abs_diff_eq!(s.soft_recall.unwrap(), 85.0);
        assert_abs_diff_eq!(s.thresholded_precision.unwrap(), 100.0);
        assert_abs_diff_eq!(s.thresholded_recall.unwrap(), 100.0);
    }

    #[test]
    fn judge_prf_single_cell() {
        let m = SimilarityMatrix::new(1, 1, vec![50.0]).unwrap();
        let s = judge_prf(&m, 75.0);
        assert_eq!(s.thresholded_precision, Some(0.0));
        assert_eq!(s.thresholded_recall, Some(0.0));
        assert_eq!(s.soft_precision, Some(50.0));
        assert_eq!(s.soft_recall, Some(50.0));

        let perfect = SimilarityMatrix::new(1, 1, vec![100.0]).unwrap();
        let s = judge_prf(&perfect, 75.0);
        assert_eq!(s.soft_f1, Some(100.0));
        assert_eq!(s.thresholded_f1, Some(100.0));
    }

    #[test]
    fn judge_prf_degenerate() {
        let no_examiner = SimilarityMatrix::new(0, 2, vec![]).unwrap();
        let s = judge_prf(&no_examiner, 75.0);
        assert_eq!(s.soft_precision, Some(0.0));
        assert_eq!(s.soft_recall, None);

        let no_model = SimilarityMatrix::new(2, 0, vec![]).unwrap();
        let s = judge_prf(&no_model, 75.0);
        assert_eq!(s.soft_recall, Some(0.0));
        assert_eq!(s.soft_precision, None);
    }

    #[test]
    fn aggregate_macro_vs_micro() {
        // two claims with per-claim soft P 80 and 60, reason counts 1 and 3
        let a = JudgeClaimScores {
            soft_precision: Some(80.0),
            soft_recall: Some(80.0),
            soft_f1: Some(80.0),
            thresholded_precision: Some(100.0),
            thresholded_recall: Some(100.0),
            thresholded_f1: Some(100.0),
            per_model_reason_max: vec![80.0],
            per_examiner_reason_max: vec![80.0],
        };
        let b = JudgeClaimScores {
            soft_precision: Some(60.0),
            soft_recall: Some(60.0),
            soft_f1: Some(60.0),
            thresholded_precision: Some(0.0),
            thresholded_recall: Some(0.0),
            thresholded_f1: Some(0.0),
            per_model_reason_max: vec![60.0, 60.0, 60.0],
            per_examiner_reason_max: vec![60.0, 60.0, 60.0],
        };
        let report = aggregate_judge(&[a, b], 75.0);
        assert_abs_diff_eq!(report.soft_macro.precision.unwrap(), 70.0);
        assert_abs_diff_eq!(report.soft_micro.precision.unwrap(), 65.0);
    }

    #[test]
    fn aggregate_single_claim_macro_equals_micro() {
        let c = JudgeClaimScores {
            soft_precision: Some(70.0),
            soft_recall: Some(90.0),
            soft_f1: Some(harmonic(70.0, 90.0)),
            thresholded_precision: Some(50.0),
            thresholded_recall: Some(100.0),
            thresholded_f1: Some(harmonic(50.0, 100.0)),
            per_model_reason_max: vec![80.0, 60.0],
            per_examiner_reason_max: vec![90.0],
        };
        let report = aggregate_judge(&[c], 75.0);
        assert_abs_diff_eq!(
            report.soft_macro.precision.unwrap(),
            report.soft_micro.precision.unwrap()
        );
        assert_abs_diff_eq!(
            report.soft_macro.recall.unwrap(),
            report.soft_micro.recall.unwrap()
        );
    }

    #[test]
    fn threshold_sweep_example() {
        let scores = [0.1, 0.4, 0.6, 0.9];
        let t = balance_threshold(&scores, 0.5).unwrap();
        assert_eq!(t.threshold, 0.6);
        assert_eq!(t.achieved_fraction, 0.5);
        assert!(t.exact);
    }

    #[test]
    fn threshold_tied_scores() {
        let scores = [0.7; 8];
        let t = balance_threshold(&scores, 0.5).unwrap();
        // achieved fraction is 0 or 1; the smallest candidate at or under the
        // target is the predict-none sentinel
        assert_eq!(t.achieved_fraction, 0.0);
        assert!(!t.exact);
    }

    #[test]
    fn threshold_antisymmetric() {
        let scores = [0.1, 0.2, 0.8, 0.9];
        let t = balance_threshold(&scores, 0.5).unwrap();
        assert_eq!(t.achieved_fraction, 0.5);
    }

    #[test]
    fn binary_perfect() {
        let labels = [true, false, true, false];
        let m = binary_metrics(&labels, &labels).unwrap();
        assert_eq!(
            (m.precision, m.recall, m.f1, m.accuracy),
            (100.0, 100.0, 100.0, 100.0)
        );
    }

    #[test]
    fn binary_all_positive_on_balanced() {
        let labels: Vec<bool> = (0..100).map(|i| i % 2 == 0).collect();
        let preds = vec![true; 100];
        let m = binary_metrics(&preds, &labels).unwrap();
        assert_abs_diff_eq!(m.f1, 200.0 / 3.0, epsilon = 0.01);
    }

    #[test]
    fn binary_confusion_arithmetic() {
        // TP=2, FP=1, FN=1, TN=6
        let preds = [true, true, true, false, false, false, false, false, false, false];
        let labels = [true, true, false, true, false, false, false, false, false, false];
        let m = binary_metrics(&preds, &labels).unwrap();
        assert_abs_diff_eq!(m.precision, 200.0 / 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(m.recall, 200.0 / 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(m.f1, 200.0 / 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(m.accuracy, 80.0, epsilon = 1e-9);
    }

    #[test]
    fn binary_no_positive_predictions_flagged() {
        let preds = [false, false];
        let labels = [true, false];
        let m = binary_metrics(&preds, &labels).unwrap();
        assert!(m.no_positive_predictions);
        assert_eq!(m.precision, 0.0);
    }

    #[test]
    fn auroc_perfect_and_ties() {
        let labels = [false, false, true, true];
        assert_abs_diff_eq!(auroc(&[0.1, 0.2, 0.8, 0.9], &labels).unwrap(), 100.0);
        assert_abs_diff_eq!(auroc(&[0.5, 0.5, 0.5, 0.5], &labels).unwrap(), 50.0);
    }

    #[test]
    fn auroc_matches_pairwise_oracle() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = 50;
            let scores: Vec<f64> = (0..n).map(|_| (rng.gen::<f64>() * 10.0).round() / 10.0).collect();
            let labels: Vec<bool> = (0..n).map(|_| rng.gen::<bool>()).collect();
            if !labels.iter().any(|&l| l) || labels.iter().all(|&l| l) {
                continue;
            }
            let got = auroc(&scores, &labels).unwrap();
            // brute force: concordant + half credit for ties over all pos/neg pairs
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if labels[i] && !labels[j] {
                        den += 1.0;
                        if scores[i] > scores[j] {
                            num += 1.0;
                        } else if scores[i] == scores[j] {
                            num += 0.5;
                        }
                    }
                }
            }
            assert_abs_diff_eq!(got, 100.0 * num / den, epsilon = 1e-9);
        }
    }

    #[test]
    fn auroc_monotone_invariant() {
        let scores = [0.2, 0.5, 0.1, 0.9, 0.5];
        let labels = [false, true, false, true, false];
        let base = auroc(&scores, &labels).unwrap();
        let transformed: Vec<f64> = scores.iter().map(|&s| (3.0 * s).exp()).collect();
        assert_abs_diff_eq!(auroc(&transformed, &labels).unwrap(), base, epsilon = 1e-9);
    }

    #[test]
    fn auroc_single_class_errors() {
        assert!(auroc(&[0.1, 0.2], &[true, true]).is_err());
    }

    #[test]
    fn multilabel_perfect() {
        let cats = [
            IndefinitenessCategory::AntecedentBasis,
            IndefinitenessCategory::UndefinedTerm,
        ];
        let mut scores = BTreeMap::new();
        let mut labels = BTreeMap::new();
        let mut vscores = BTreeMap::new();
        let mut vlabels = BTreeMap::new();
        for cat in cats {
            scores.insert(cat, vec![0.9, 0.1, 0.9, 0.1]);
            labels.insert(cat, vec![true, false, true, false]);
            vscores.insert(cat, vec![0.9, 0.1]);
            vlabels.insert(cat, vec![true, false]);
        }
        let report = multilabel_metrics(&MultilabelInputs {
            categories: &cats,
            scores: &scores,
            labels: &labels,
            validation_scores: &vscores,
            validation_labels: &vlabels,
        })
        .unwrap();
        assert_abs_diff_eq!(report.macro_f1, 100.0);
        assert_abs_diff_eq!(report.micro_f1, 100.0);
    }

    #[test]
    fn multilabel_micro_pooled_confusion() {
        let cats = [
            IndefinitenessCategory::AntecedentBasis,
            IndefinitenessCategory::UndefinedTerm,
        ];
        let mut scores = BTreeMap::new();
        let mut labels = BTreeMap::new();
        let mut vscores = BTreeMap::new();
        let mut vlabels = BTreeMap::new();
        // cat A: preds (0.9,0.9,0.1) vs labels (T,F,T); cat B: (0.9,0.1,0.1) vs (F,F,T)
        scores.insert(cats[0], vec![0.9, 0.9, 0.1]);
        labels.insert(cats[0], vec![true, false, true]);
        scores.insert(cats[1], vec![0.9, 0.1, 0.1]);
        labels.insert(cats[1], vec![false, false, true]);
        for cat in cats {
            vscores.insert(cat, vec![0.9, 0.1]);
            vlabels.insert(cat, vec![true, false]);
        }
        let report = multilabel_metrics(&MultilabelInputs {
            categories: &cats,
            scores: &scores,
            labels: &labels,
            validation_scores: &vscores,
            validation_labels: &vlabels,
        })
        .unwrap();
        // pooled: TP=1, FP=2, FN=2, TN=1 → P=1/3, R=1/3, F1=1/3
        assert_abs_diff_eq!(report.micro_f1, 100.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn calibration_identical_vectors_rho_one() {
        let pairs: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, i as f64)).collect();
        let report = calibration_analysis(&[0.2, 0.8], &[false, true], Some(&pairs)).unwrap();
        assert_abs_diff_eq!(report.pearson_rho.unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn calibration_rho_absent_for_degenerate() {
        let report = calibration_analysis(&[0.2], &[false], Some(&[(1.0, 1.0)])).unwrap();
        assert!(report.pearson_rho.is_none());
        let constant: Vec<(f64, f64)> = vec![(1.0, 2.0), (1.0, 3.0)];
        let report = calibration_analysis(&[0.2], &[false], Some(&constant)).unwrap();
        assert!(report.pearson_rho.is_none());
    }

    #[test]
    fn calibration_bins_sum_to_one() {
        let probs: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        let outcomes: Vec<bool> = probs.iter().map(|&p| p >= 0.5).collect();
        let report = calibration_analysis(&probs, &outcomes, None).unwrap();
        let total: f64 = report.bins.iter().map(|b| b.fraction).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn random_baseline_deterministic() {
        let a = random_baseline(100, 42);
        let b = random_baseline(100, 42);
        assert_eq!(a.claim_scores, b.claim_scores);
        assert_eq!(a.category_scores, b.category_scores);
        assert_eq!(a.category_scores.len(), 7);
    }

    #[test]
    fn thresholded_implies_soft_bound() {
        // P≥75 = 1 ⇒ soft P ≥ 75
        let m = SimilarityMatrix::new(2, 3, vec![80.0, 75.0, 90.0, 10.0, 20.0, 30.0]).unwrap();
        let s = judge_prf(&m, 75.0);
        if s.thresholded_precision == Some(100.0) {
            assert!(s.soft_precision.unwrap() >= 75.0);
        }
    }
}
