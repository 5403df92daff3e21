//! Judge orchestration, metric reports, and the manual-review export.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use claimscope::dataset::read_manifest;
use claimscope::eval::{
    aggregate_judge, auroc, balance_threshold, binary_metrics, calibration_analysis, judge_pair,
    judge_prf, random_baseline, BinaryMetrics, CalibrationReport, JudgeReport, JudgeVerdict,
    MultilabelInputs, MultilabelReport, SimilarityMatrix,
};
use claimscope::{Error, IndefinitenessCategory, LabeledClaim, Split};

use crate::stages::{read_jsonl, write_jsonl, PredictionRecord};
use crate::{CliError, Context};

// ---------------------------------------------------------------- judge

/// One judged reason pair, keyed by claim and matrix position.
#[derive(Debug, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub application_id: String,
    pub claim_number: u32,
    /// Examiner-reason row index.
    pub i: usize,
    /// Model-reason column index.
    pub j: usize,
    pub verdict: JudgeVerdict,
}

/// The per-claim similarity matrix reconstructed at evaluation time.
#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub application_id: String,
    pub claim_number: u32,
    pub n: usize,
    pub m: usize,
    pub scores: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct JudgeRunSummary {
    pub claims_judged: usize,
    pub pairs_judged: usize,
    pub failed_pairs: usize,
    pub claims_excluded: usize,
}

fn corpus_rows(ctx: &Context, split: Split) -> Result<Vec<LabeledClaim>, CliError> {
    ctx.paths.require(&ctx.paths.corpus(), "build")?;
    let manifest = read_manifest(&ctx.paths.corpus())?;
    Ok(manifest.rows.into_iter().filter(|r| r.split == split).collect())
}

fn load_predictions(ctx: &Context, split: Split) -> Result<Vec<PredictionRecord>, CliError> {
    let path = ctx.paths.predictions(split.name());
    ctx.paths.require(&path, "predict")?;
    read_jsonl(&path)
}

pub fn judge(ctx: &Context, split: Split) -> Result<(), CliError> {
    let rows = corpus_rows(ctx, split)?;
    let predictions = load_predictions(ctx, split)?;
    if predictions.iter().all(|p| p.agent.is_none()) {
        return Err(CliError::Prerequisite(format!(
            "predictions for `{}` carry no agent output; run `predict --method agent`",
            split.name()
        )));
    }
    let by_key: BTreeMap<(&str, u32), &LabeledClaim> = rows
        .iter()
        .map(|r| ((r.application_id(), r.claim.number), r))
        .collect();
    let gateway = ctx.gateway()?;
    let model = &ctx.config.llm.judge_model;

    struct ClaimOutcome {
        verdicts: Vec<VerdictRecord>,
        matrix: Option<MatrixRecord>,
        failed_pairs: usize,
    }

    let outcomes: Vec<Option<ClaimOutcome>> = predictions
        .par_iter()
        .map(|prediction| {
            let agent = prediction.agent.as_ref()?;
            let row = by_key
                .get(&(prediction.application_id.as_str(), prediction.claim_number))
                .copied()?;
            let examiner: Vec<String> =
                row.reasons.iter().map(|r| r.evaluation_text()).collect();
            let predicted: Vec<&str> =
                agent.reasons.iter().map(|r| r.reasoning.as_str()).collect();
            let (n, m) = (examiner.len(), predicted.len());
            if n == 0 && m == 0 {
                // definite claim matched by an empty prediction: no pairs
                return None;
            }
            let mut scores = Vec::with_capacity(n * m);
            let mut verdicts = Vec::new();
            let mut failed = 0usize;
            for (i, reason) in examiner.iter().enumerate() {
                for (j, model_reason) in predicted.iter().enumerate() {
                    match judge_pair(reason, model_reason, &gateway, model) {
                        Ok(verdict) => {
                            scores.push(verdict.sim);
                            verdicts.push(VerdictRecord {
                                application_id: prediction.application_id.clone(),
                                claim_number: prediction.claim_number,
                                i,
                                j,
                                verdict,
                            });
                        }
                        Err(e) => {
                            log::warn!(
                                "judge failure on {} claim {} pair ({i},{j}): {e}",
                                prediction.application_id,
                                prediction.claim_number
                            );
                            failed += 1;
                        }
                    }
                }
            }
            // any failed pair invalidates the claim's matrix
            let matrix = (failed == 0).then(|| MatrixRecord {
                application_id: prediction.application_id.clone(),
                claim_number: prediction.claim_number,
                n,
                m,
                scores,
            });
            Some(ClaimOutcome { verdicts, matrix, failed_pairs: failed })
        })
        .collect();

    let mut verdicts = Vec::new();
    let mut matrices = Vec::new();
    let mut summary = JudgeRunSummary {
        claims_judged: 0,
        pairs_judged: 0,
        failed_pairs: 0,
        claims_excluded: 0,
    };
    for outcome in outcomes.into_iter().flatten() {
        summary.pairs_judged += outcome.verdicts.len();
        summary.failed_pairs += outcome.failed_pairs;
        if let Some(matrix) = outcome.matrix {
            summary.claims_judged += 1;
            matrices.push(matrix);
        } else {
            summary.claims_excluded += 1;
        }
        verdicts.extend(outcome.verdicts);
    }
    let key = |a: &String, c: u32, i: usize, j: usize| (a.clone(), c, i, j);
    verdicts.sort_by_key(|v| key(&v.application_id, v.claim_number, v.i, v.j));
    matrices.sort_by_key(|m| (m.application_id.clone(), m.claim_number));

    std::fs::create_dir_all(ctx.paths.judge_dir())?;
    write_jsonl(&ctx.paths.judge_verdicts(split.name()), &verdicts)?;
    write_jsonl(&ctx.paths.judge_matrices(split.name()), &matrices)?;
    std::fs::write(
        ctx.paths.judge_dir().join(format!("summary_{}.json", split.name())),
        serde_json::to_string_pretty(&summary)?,
    )?;
    println!(
        "judged {} claims ({} pairs, {} failed, {} claims excluded)",
        summary.claims_judged, summary.pairs_judged, summary.failed_pairs, summary.claims_excluded
    );
    Ok(())
}

// ---------------------------------------------------------------- evaluate

#[derive(Debug, Serialize)]
pub struct BinaryBlock {
    pub method: String,
    pub threshold: f64,
    pub metrics: BinaryMetrics,
    pub auroc: f64,
    pub pct_predicted_indefinite: f64,
}

#[derive(Debug, Serialize)]
pub struct EvaluationReport {
    pub split: String,
    pub binary: Vec<BinaryBlock>,
    pub multilabel_logreg: Option<MultilabelReport>,
    pub multilabel_agent: Option<MultilabelReport>,
    pub judge: Option<JudgeReport>,
    pub judge_threshold: f64,
    pub calibration: Option<CalibrationReport>,
    pub random_baseline_auroc: f64,
}

fn score_column(
    records: &[PredictionRecord],
    extract: impl Fn(&PredictionRecord) -> Option<f64>,
) -> Option<Vec<f64>> {
    records.iter().map(|r| extract(r)).collect()
}

fn binary_block(
    method: &str,
    eval_scores: &[f64],
    labels: &[bool],
    validation_scores: &[f64],
) -> Result<BinaryBlock, Error> {
    let balanced = balance_threshold(validation_scores, 0.5)?;
    let predictions: Vec<bool> =
        eval_scores.iter().map(|&s| s >= balanced.threshold).collect();
    let metrics = binary_metrics(&predictions, labels)?;
    let predicted = predictions.iter().filter(|&&p| p).count();
    Ok(BinaryBlock {
        method: method.to_string(),
        threshold: balanced.threshold,
        metrics,
        auroc: auroc(eval_scores, labels)?,
        pct_predicted_indefinite: 100.0 * predicted as f64 / eval_scores.len() as f64,
    })
}

type CategoryColumns = (
    BTreeMap<IndefinitenessCategory, Vec<f64>>,
    BTreeMap<IndefinitenessCategory, Vec<bool>>,
);

fn category_columns(
    rows: &[LabeledClaim],
    records: &[PredictionRecord],
    extract: impl Fn(&PredictionRecord) -> Option<&BTreeMap<String, f64>>,
) -> Option<CategoryColumns> {
    let by_key: BTreeMap<(&str, u32), &LabeledClaim> = rows
        .iter()
        .map(|r| ((r.application_id(), r.claim.number), r))
        .collect();
    let mut scores: BTreeMap<IndefinitenessCategory, Vec<f64>> = BTreeMap::new();
    let mut labels: BTreeMap<IndefinitenessCategory, Vec<bool>> = BTreeMap::new();
    for record in records {
        let map = extract(record)?;
        let row = by_key.get(&(record.application_id.as_str(), record.claim_number))?;
        for category in IndefinitenessCategory::FINAL {
            scores
                .entry(category)
                .or_default()
                .push(map.get(category.identifier()).copied().unwrap_or(0.0));
            labels
                .entry(category)
                .or_default()
                .push(row.reasons.iter().any(|r| r.category == category));
        }
    }
    Some((scores, labels))
}

fn multilabel_block(
    eval_rows: &[LabeledClaim],
    eval_records: &[PredictionRecord],
    validation_rows: &[LabeledClaim],
    validation_records: &[PredictionRecord],
    extract: impl Fn(&PredictionRecord) -> Option<&BTreeMap<String, f64>> + Copy,
) -> Result<Option<MultilabelReport>, Error> {
    let Some((scores, labels)) = category_columns(eval_rows, eval_records, extract) else {
        return Ok(None);
    };
    let Some((val_scores, val_labels)) =
        category_columns(validation_rows, validation_records, extract)
    else {
        return Ok(None);
    };
    let categories: Vec<IndefinitenessCategory> = IndefinitenessCategory::FINAL.to_vec();
    multilabel_metrics_guarded(&MultilabelInputs {
        categories: &categories,
        scores: &scores,
        labels: &labels,
        validation_scores: &val_scores,
        validation_labels: &val_labels,
    })
}

/// Multi-label metrics, tolerating fixtures where every eval label of a
/// category is negative (reported as absent rather than failing the run).
fn multilabel_metrics_guarded(
    inputs: &MultilabelInputs,
) -> Result<Option<MultilabelReport>, Error> {
    match claimscope::eval::multilabel_metrics(inputs) {
        Ok(report) => Ok(Some(report)),
        Err(Error::Invalid(_)) | Err(Error::SingleClass) | Err(Error::EmptyInput(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn judge_block(
    ctx: &Context,
    split: Split,
    records: &[PredictionRecord],
) -> Result<(Option<JudgeReport>, Vec<(f64, f64)>), CliError> {
    let path = ctx.paths.judge_matrices(split.name());
    if !path.exists() {
        return Ok((None, Vec::new()));
    }
    let matrices: Vec<MatrixRecord> = read_jsonl(&path)?;
    let threshold = ctx.config.judge.threshold;
    let mut per_claim = Vec::new();
    let mut confidence_pairs = Vec::new();
    let by_key: BTreeMap<(&str, u32), &PredictionRecord> = records
        .iter()
        .map(|r| ((r.application_id.as_str(), r.claim_number), r))
        .collect();
    for record in &matrices {
        let matrix = SimilarityMatrix::new(record.n, record.m, record.scores.clone())?;
        // pair each model reason's verbalized probability with its best
        // judge similarity, for the confidence/judge correlation
        if record.n > 0 {
            if let Some(prediction) =
                by_key.get(&(record.application_id.as_str(), record.claim_number))
            {
                if let Some(agent) = &prediction.agent {
                    for (j, sim) in matrix.column_maxima().into_iter().enumerate() {
                        if let Some(reason) = agent.reasons.get(j) {
                            confidence_pairs.push((reason.probability, sim));
                        }
                    }
                }
            }
        }
        per_claim.push(judge_prf(&matrix, threshold));
    }
    if per_claim.is_empty() {
        return Ok((None, Vec::new()));
    }
    Ok((Some(aggregate_judge(&per_claim, threshold)), confidence_pairs))
}

fn render_text_report(report: &EvaluationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "evaluation report: split {}", report.split);
    let _ = writeln!(out, "\nbinary classification (threshold balanced on validation)");
    let _ = writeln!(
        out,
        "{:<10} {:>10} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "method", "threshold", "P", "R", "F1", "Acc", "AUROC", "%indef"
    );
    for block in &report.binary {
        let m = &block.metrics;
        let _ = writeln!(
            out,
            "{:<10} {:>10.4} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>8.2}",
            block.method,
            block.threshold,
            m.precision,
            m.recall,
            m.f1,
            m.accuracy,
            block.auroc,
            block.pct_predicted_indefinite
        );
    }
    let _ = writeln!(
        out,
        "random-baseline AUROC (reference): {:.2}",
        report.random_baseline_auroc
    );
    for (name, ml) in [
        ("logreg", &report.multilabel_logreg),
        ("agent", &report.multilabel_agent),
    ] {
        if let Some(ml) = ml {
            let _ = writeln!(out, "\nmulti-label ({name})");
            let _ = writeln!(
                out,
                "{:<34} {:>10} {:>8} {:>8} {:>8}",
                "category", "threshold", "P", "R", "F1"
            );
            for (category, metrics) in &ml.per_category {
                let flag = if metrics.defaulted_threshold { "*" } else { "" };
                let _ = writeln!(
                    out,
                    "{:<34} {:>9.4}{flag} {:>8.2} {:>8.2} {:>8.2}",
                    category, metrics.threshold, metrics.precision, metrics.recall, metrics.f1
                );
            }
            let _ = writeln!(out, "macro F1 {:.2}  micro F1 {:.2}", ml.macro_f1, ml.micro_f1);
        }
    }
    if let Some(judge) = &report.judge {
        let fmt = |v: Option<f64>| match v {
            Some(v) => format!("{v:.2}"),
            None => "-".to_string(),
        };
        let _ = writeln!(
            out,
            "\njudge (threshold {:.0}, {} claims)",
            report.judge_threshold, judge.claims_evaluated
        );
        let _ = writeln!(out, "{:<18} {:>8} {:>8} {:>8}", "aggregate", "P", "R", "F1");
        for (name, agg) in [
            ("soft macro", &judge.soft_macro),
            ("soft micro", &judge.soft_micro),
            ("thresholded macro", &judge.thresholded_macro),
            ("thresholded micro", &judge.thresholded_micro),
        ] {
            let _ = writeln!(
                out,
                "{:<18} {:>8} {:>8} {:>8}",
                name,
                fmt(agg.precision),
                fmt(agg.recall),
                fmt(agg.f1)
            );
        }
    }
    if let Some(calibration) = &report.calibration {
        let _ = writeln!(out, "\ncalibration (agent probabilities)");
        let _ = writeln!(out, "{:<12} {:>10} {:>10}", "bin", "accuracy", "fraction");
        for bin in &calibration.bins {
            let accuracy = match bin.accuracy {
                Some(a) => format!("{a:.3}"),
                None => "-".to_string(),
            };
            let flag = if bin.low_support { "*" } else { "" };
            let _ = writeln!(
                out,
                "[{:.1},{:.1}) {:>12} {:>9.3}{flag}",
                bin.lower, bin.upper, accuracy, bin.fraction
            );
        }
        match calibration.pearson_rho {
            Some(rho) => {
                let _ = writeln!(out, "confidence/judge pearson rho: {rho:.3}");
            }
            None => {
                let _ = writeln!(out, "confidence/judge pearson rho: undefined");
            }
        }
    }
    out
}

pub fn evaluate(ctx: &Context, split: Split) -> Result<(), CliError> {
    let eval_rows = corpus_rows(ctx, split)?;
    let eval_records = load_predictions(ctx, split)?;
    let (validation_rows, validation_records) = if split == Split::Validation {
        (eval_rows.clone(), eval_records.clone())
    } else {
        (corpus_rows(ctx, Split::Validation)?, load_predictions(ctx, Split::Validation)?)
    };
    let labels: Vec<bool> = eval_records.iter().map(|r| r.label).collect();

    let mut binary = Vec::new();
    type Extract = fn(&PredictionRecord) -> Option<f64>;
    let columns: [(&str, Extract); 4] = [
        ("logreg", |r| Some(r.p_logreg)),
        ("tfidf", |r| Some(r.p_tfidf)),
        ("agent", |r| r.p_agent),
        ("ensemble", |r| r.p_ensemble),
    ];
    for (method, extract) in columns {
        let (Some(scores), Some(val_scores)) = (
            score_column(&eval_records, extract),
            score_column(&validation_records, extract),
        ) else {
            continue;
        };
        binary.push(binary_block(method, &scores, &labels, &val_scores)?);
    }
    if binary.is_empty() {
        return Err(CliError::Prerequisite(
            "no complete score column in predictions; rerun predict".into(),
        ));
    }

    let multilabel_logreg = multilabel_block(
        &eval_rows,
        &eval_records,
        &validation_rows,
        &validation_records,
        |r| Some(&r.category_scores),
    )?;
    let multilabel_agent = multilabel_block(
        &eval_rows,
        &eval_records,
        &validation_rows,
        &validation_records,
        |r| r.agent_category_scores.as_ref(),
    )?;

    let (judge, confidence_pairs) = judge_block(ctx, split, &eval_records)?;

    let calibration = match score_column(&eval_records, |r| r.p_agent) {
        Some(probabilities) => Some(calibration_analysis(
            &probabilities,
            &labels,
            (!confidence_pairs.is_empty()).then_some(confidence_pairs.as_slice()),
        )?),
        None => None,
    };

    let baseline = random_baseline(eval_records.len(), ctx.config.dataset.seed);
    let report = EvaluationReport {
        split: split.name().to_string(),
        binary,
        multilabel_logreg,
        multilabel_agent,
        judge,
        judge_threshold: ctx.config.judge.threshold,
        calibration,
        random_baseline_auroc: auroc(&baseline.claim_scores, &labels)?,
    };

    let reports_dir = ctx.paths.reports_dir();
    std::fs::create_dir_all(&reports_dir)?;
    std::fs::write(
        reports_dir.join(format!("report_{}.json", split.name())),
        serde_json::to_string_pretty(&report)?,
    )?;
    let text = render_text_report(&report);
    std::fs::write(reports_dir.join(format!("report_{}.txt", split.name())), &text)?;
    print!("{text}");
    Ok(())
}

// ---------------------------------------------------------------- sample-audit

#[derive(Debug, Serialize)]
struct AuditRecord {
    application_id: String,
    claim_number: u32,
    label: bool,
    split: String,
    claim_text: String,
    reasons: Vec<String>,
    office_action_text: String,
}

pub fn sample_audit(ctx: &Context, count: usize) -> Result<(), CliError> {
    ctx.paths.require(&ctx.paths.corpus(), "build")?;
    let manifest = read_manifest(&ctx.paths.corpus())?;
    let mut rows: Vec<&LabeledClaim> = manifest.rows.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.dataset.seed);
    rows.shuffle(&mut rng);
    rows.truncate(count);
    rows.sort_by_key(|r| (r.application_id().to_string(), r.claim.number));

    let portal = ctx.portal();
    let mut records = Vec::with_capacity(rows.len());
    for row in rows {
        // warm cache: this never touches the network after `fetch`
        let bundle = portal.fetch_document_bundle(row.application_id())?;
        records.push(AuditRecord {
            application_id: row.application_id().to_string(),
            claim_number: row.claim.number,
            label: row.label,
            split: row.split.name().to_string(),
            claim_text: row.claim.text.clone(),
            reasons: row.reasons.iter().map(|r| r.evaluation_text()).collect(),
            office_action_text: bundle.first_office_action.full_text.clone(),
        });
    }
    std::fs::create_dir_all(ctx.paths.audit_dir())?;
    write_jsonl(&ctx.paths.audit_dir().join("sample.jsonl"), &records)?;
    println!("exported {} rows for manual review", records.len());
    Ok(())
}
