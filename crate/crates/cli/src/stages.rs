//! Pipeline stages: fetch, parse, build, train, predict.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use claimscope::classifiers::{
    predict_proba, reason_confidences_to_multilabel, run_agent, train_logistic, AgentPrediction,
    LogisticModel, TrainingConfig,
};
use claimscope::dataset::{
    average_indefinite_per_application, collect_indefinite_claims, compute_statistics,
    read_manifest, sample_definite_claims, split_dataset, write_manifest, write_statistics_tables,
};
use claimscope::features::{FeatureSet, FeatureSpace, FeatureVector, LinguisticConfig};
use claimscope::ingest::{append_skip, SkipRecord};
use claimscope::oa_parser::{extract_rejections, finalize_labels, select_112_sections};
use claimscope::{Error, IndefinitenessCategory, LabeledClaim, PatentApplication, Split};

use crate::{CliError, Context};

pub fn write_lines(path: &Path, lines: impl IntoIterator<Item = String>) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for line in lines {
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut items = Vec::new();
    for line in file.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        items.push(serde_json::from_str(&line)?);
    }
    Ok(items)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CliError> {
    let mut lines = Vec::with_capacity(items.len());
    for item in items {
        lines.push(serde_json::to_string(item)?);
    }
    write_lines(path, lines)
}

// ---------------------------------------------------------------- fetch

pub fn fetch(ctx: &Context) -> Result<(), CliError> {
    let portal = ctx.portal();
    let p = &ctx.config.portal;
    let ids =
        portal.search_seed_applications(&p.cpc_prefix, p.min_filing_date, p.require_rejection)?;
    log::info!("seed search returned {} applications", ids.len());

    let results: Vec<(String, Result<(), Error>)> = ids
        .par_iter()
        .map(|id| (id.clone(), portal.fetch_document_bundle(id).map(|_| ())))
        .collect();

    let mut kept = Vec::new();
    let mut skipped = 0usize;
    for (id, result) in results {
        match result {
            Ok(()) => kept.push(id),
            Err(e @ (Error::MissingDocument { .. } | Error::Invalid(_) | Error::Xml { .. })) => {
                skipped += 1;
                append_skip(
                    &ctx.paths.skips(),
                    &SkipRecord {
                        application_id: id,
                        reason: e.to_string(),
                    },
                )?;
            }
            Err(e) => return Err(e.into()),
        }
    }
    kept.sort();
    write_lines(&ctx.paths.applications_list(), kept.iter().cloned())?;
    println!("fetched {} bundles ({} skipped)", kept.len(), skipped);
    Ok(())
}

// ---------------------------------------------------------------- parse

fn read_id_list(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path)?;
    Ok(text.lines().map(str::to_string).filter(|l| !l.is_empty()).collect())
}

pub fn parse(ctx: &Context) -> Result<(), CliError> {
    ctx.paths.require(&ctx.paths.applications_list(), "fetch")?;
    let ids = read_id_list(&ctx.paths.applications_list())?;
    let portal = ctx.portal();
    let gateway = ctx.gateway()?;
    let model = &ctx.config.llm.extraction_model;
    let retries = ctx.config.agent.extraction_retries;
    let threshold = ctx.config.dataset.match_threshold;

    let results: Vec<Result<(PatentApplication, Vec<LabeledClaim>, bool), Error>> = ids
        .par_iter()
        .map(|id| {
            let bundle = portal.fetch_document_bundle(id)?;
            let sections = select_112_sections(&bundle.first_office_action);
            let record =
                extract_rejections(&sections, &gateway, model, retries).map_err(|e| match e {
                    Error::ExtractionFailure { reason, .. } => Error::ExtractionFailure {
                        application_id: id.clone(),
                        reason,
                    },
                    other => other,
                })?;
            let rows = finalize_labels(&record, &bundle.application, threshold);
            let clean = !bundle.first_office_action.full_text.contains("112(b)");
            Ok((bundle.application, rows, clean))
        })
        .collect();

    let mut applications = Vec::new();
    let mut indefinite = Vec::new();
    let mut clean_ids = Vec::new();
    for result in results {
        let (application, rows, clean) = result?;
        if clean {
            clean_ids.push(application.application_id.clone());
        }
        indefinite.extend(rows);
        applications.push(application);
    }
    applications.sort_by(|a, b| a.application_id.cmp(&b.application_id));
    indefinite.sort_by(|a, b| {
        (a.application_id(), a.claim.number).cmp(&(b.application_id(), b.claim.number))
    });
    clean_ids.sort();

    write_jsonl(&ctx.paths.parsed_applications(), &applications)?;
    write_jsonl(&ctx.paths.parsed_indefinite(), &indefinite)?;
    write_lines(&ctx.paths.clean_applications(), clean_ids.iter().cloned())?;
    println!(
        "parsed {} applications: {} indefinite claims, {} clean applications",
        applications.len(),
        indefinite.len(),
        clean_ids.len()
    );
    Ok(())
}

// ---------------------------------------------------------------- build

pub fn build(ctx: &Context) -> Result<(), CliError> {
    ctx.paths.require(&ctx.paths.parsed_applications(), "parse")?;
    let applications: Vec<PatentApplication> = read_jsonl(&ctx.paths.parsed_applications())?;
    let indefinite_rows: Vec<LabeledClaim> = read_jsonl(&ctx.paths.parsed_indefinite())?;
    let clean_ids: BTreeSet<String> = read_id_list(&ctx.paths.clean_applications())?
        .into_iter()
        .collect();

    let mut per_app: BTreeMap<String, Vec<LabeledClaim>> = BTreeMap::new();
    for row in indefinite_rows {
        per_app.entry(row.application_id().to_string()).or_default().push(row);
    }
    let grouped: Vec<Vec<LabeledClaim>> = per_app.into_values().collect();
    let indefinite = collect_indefinite_claims(&grouped);
    if indefinite.is_empty() {
        return Err(CliError::Prerequisite(
            "parse produced no indefinite claims; nothing to build".into(),
        ));
    }
    let avg = average_indefinite_per_application(&indefinite);
    let clean_apps: Vec<PatentApplication> = applications
        .iter()
        .filter(|a| clean_ids.contains(&a.application_id))
        .cloned()
        .collect();
    let seed = ctx.config.dataset.seed;
    let definite = sample_definite_claims(&clean_apps, indefinite.len(), avg, seed)?;

    let mut rows = indefinite;
    rows.extend(definite);
    let mut manifest = split_dataset(rows, ctx.config.split_fractions(), seed)?;
    manifest
        .creation_config
        .insert("cpc_prefix".into(), ctx.config.portal.cpc_prefix.clone());
    manifest.creation_config.insert(
        "min_filing_date".into(),
        ctx.config.portal.min_filing_date.to_string(),
    );
    manifest.creation_config.insert(
        "match_threshold".into(),
        ctx.config.dataset.match_threshold.to_string(),
    );
    manifest.validate(avg)?;
    write_manifest(&ctx.paths.corpus(), &manifest)?;

    let filing_years: BTreeMap<String, i32> = applications
        .iter()
        .map(|a| {
            use chrono::Datelike;
            (a.application_id.clone(), a.filing_date.year())
        })
        .collect();
    let stats = compute_statistics(&manifest, &filing_years)?;
    let stats_dir = ctx.paths.stats_dir();
    std::fs::create_dir_all(&stats_dir)?;
    write_statistics_tables(&stats, &stats_dir)?;
    std::fs::write(
        stats_dir.join("statistics.json"),
        serde_json::to_string_pretty(&stats)?,
    )?;
    println!(
        "built corpus: {} rows, splits {:?}",
        manifest.rows.len(),
        manifest.split_counts
    );
    Ok(())
}

// ---------------------------------------------------------------- train

/// A feature space plus its trained binary and per-category heads, persisted
/// as one JSON document per variant.
#[derive(Debug, Serialize, Deserialize)]
pub struct TrainedVariant {
    pub space: FeatureSpace,
    pub binary: LogisticModel,
    /// Per-category heads; categories absent from the train split are
    /// omitted.
    pub categories: BTreeMap<IndefinitenessCategory, LogisticModel>,
}

fn description_map(
    applications: &[PatentApplication],
) -> BTreeMap<String, Vec<String>> {
    applications
        .iter()
        .map(|a| (a.application_id.clone(), a.description_paragraphs.clone()))
        .collect()
}

fn featurize_rows(
    space: &FeatureSpace,
    rows: &[LabeledClaim],
    descriptions: &BTreeMap<String, Vec<String>>,
) -> Vec<FeatureVector> {
    static EMPTY: Vec<String> = Vec::new();
    rows.par_iter()
        .map(|row| {
            let paragraphs = descriptions.get(row.application_id()).unwrap_or(&EMPTY);
            space.featurize(&row.claim, paragraphs)
        })
        .collect()
}

fn has_category(row: &LabeledClaim, category: IndefinitenessCategory) -> bool {
    row.reasons.iter().any(|r| r.category == category)
}

fn train_variant(
    ctx: &Context,
    feature_set: FeatureSet,
    train_rows: &[LabeledClaim],
    descriptions: &BTreeMap<String, Vec<String>>,
) -> Result<TrainedVariant, CliError> {
    let texts: Vec<String> = train_rows.iter().map(|r| r.claim.text.clone()).collect();
    let mut linguistic = LinguisticConfig::default();
    if !ctx.config.features.trigger_lexicon.is_empty() {
        linguistic.trigger_lexicon = ctx.config.features.trigger_lexicon.clone();
    }
    let space = FeatureSpace::fit(
        &texts,
        feature_set,
        ctx.config.features.max_features,
        linguistic,
    )?;
    let features = featurize_rows(&space, train_rows, descriptions);
    let labels: Vec<bool> = train_rows.iter().map(|r| r.label).collect();
    let train_config = TrainingConfig {
        seed: ctx.config.dataset.seed,
        ..TrainingConfig::default()
    };
    let binary = train_logistic(&features, &labels, space.dimension(), train_config.clone())?;

    let mut categories = BTreeMap::new();
    for category in IndefinitenessCategory::FINAL {
        let cat_labels: Vec<bool> =
            train_rows.iter().map(|r| has_category(r, category)).collect();
        match train_logistic(&features, &cat_labels, space.dimension(), train_config.clone()) {
            Ok(model) => {
                categories.insert(category, model);
            }
            Err(Error::SingleClass) => {
                log::warn!(
                    "category {} single-class in train split; head skipped",
                    category.identifier()
                );
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(TrainedVariant { space, binary, categories })
}

pub fn train(ctx: &Context) -> Result<(), CliError> {
    ctx.paths.require(&ctx.paths.corpus(), "build")?;
    ctx.paths.require(&ctx.paths.parsed_applications(), "parse")?;
    let manifest = read_manifest(&ctx.paths.corpus())?;
    let applications: Vec<PatentApplication> = read_jsonl(&ctx.paths.parsed_applications())?;
    let descriptions = description_map(&applications);
    let train_rows: Vec<LabeledClaim> = manifest
        .rows
        .iter()
        .filter(|r| r.split == Split::Train)
        .cloned()
        .collect();
    if train_rows.is_empty() {
        return Err(CliError::Prerequisite("train split is empty; rerun build".into()));
    }

    let models_dir = ctx.paths.models_dir();
    std::fs::create_dir_all(&models_dir)?;
    for (name, feature_set) in [("all", FeatureSet::All), ("tfidf", FeatureSet::TfidfOnly)] {
        let variant = train_variant(ctx, feature_set, &train_rows, &descriptions)?;
        std::fs::write(
            models_dir.join(format!("{name}.json")),
            serde_json::to_string(&variant)?,
        )?;
        println!(
            "trained `{name}` variant: {} features, {} category heads, final loss {:.6}",
            variant.space.dimension(),
            variant.categories.len(),
            variant.binary.loss_history.last().copied().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

// ---------------------------------------------------------------- predict

/// One scored claim; line format of `predictions/{split}.jsonl`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub application_id: String,
    pub claim_number: u32,
    pub label: bool,
    /// Binary probability from the full feature set.
    pub p_logreg: f64,
    /// Binary probability from the TF-IDF-only variant.
    pub p_tfidf: f64,
    /// Per-category probabilities from the full-feature heads.
    pub category_scores: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_agent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_ensemble: Option<f64>,
    /// Per-category maxima of agent reason probabilities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_category_scores: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<AgentPrediction>,
}

pub fn load_variant(ctx: &Context, name: &str) -> Result<TrainedVariant, CliError> {
    let path = ctx.paths.models_dir().join(format!("{name}.json"));
    ctx.paths.require(&path, "train")?;
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

pub fn predict(ctx: &Context, split: Split, method: &str) -> Result<(), CliError> {
    if !matches!(method, "logreg" | "agent" | "ensemble") {
        return Err(CliError::Config(format!(
            "unknown method `{method}` (logreg|agent|ensemble)"
        )));
    }
    ctx.paths.require(&ctx.paths.corpus(), "build")?;
    let manifest = read_manifest(&ctx.paths.corpus())?;
    let applications: Vec<PatentApplication> = read_jsonl(&ctx.paths.parsed_applications())?;
    let descriptions = description_map(&applications);
    let app_index: BTreeMap<&str, &PatentApplication> = applications
        .iter()
        .map(|a| (a.application_id.as_str(), a))
        .collect();
    let all = load_variant(ctx, "all")?;
    let tfidf = load_variant(ctx, "tfidf")?;

    let rows: Vec<&LabeledClaim> =
        manifest.rows.iter().filter(|r| r.split == split).collect();
    if rows.is_empty() {
        return Err(CliError::Prerequisite(format!(
            "split `{}` has no rows; rerun build",
            split.name()
        )));
    }

    let want_agent = method != "logreg";
    let gateway = if want_agent { Some(ctx.gateway()?) } else { None };
    let mut records: Vec<PredictionRecord> = rows
        .par_iter()
        .map(|row| -> Result<PredictionRecord, Error> {
            static EMPTY: Vec<String> = Vec::new();
            let paragraphs = descriptions.get(row.application_id()).unwrap_or(&EMPTY);
            let fv_all = all.space.featurize(&row.claim, paragraphs);
            let fv_tfidf = tfidf.space.featurize(&row.claim, paragraphs);
            let mut category_scores = BTreeMap::new();
            for (category, model) in &all.categories {
                category_scores
                    .insert(category.identifier().to_string(), predict_proba(model, &fv_all)?);
            }
            let mut record = PredictionRecord {
                application_id: row.application_id().to_string(),
                claim_number: row.claim.number,
                label: row.label,
                p_logreg: predict_proba(&all.binary, &fv_all)?,
                p_tfidf: predict_proba(&tfidf.binary, &fv_tfidf)?,
                category_scores,
                p_agent: None,
                p_ensemble: None,
                agent_category_scores: None,
                agent: None,
            };
            if let Some(gateway) = &gateway {
                let application =
                    app_index.get(row.application_id()).copied().ok_or_else(|| {
                        Error::Invalid(format!(
                            "application {} missing from parse output",
                            row.application_id()
                        ))
                    })?;
                let prediction = run_agent(
                    &row.claim,
                    application,
                    gateway,
                    &ctx.config.llm.agent_model,
                    ctx.config.agent.max_tool_calls,
                )?;
                record.p_agent = Some(prediction.probability);
                let per_category = reason_confidences_to_multilabel(&prediction);
                record.agent_category_scores = Some(
                    IndefinitenessCategory::FINAL
                        .iter()
                        .zip(per_category)
                        .map(|(c, p)| (c.identifier().to_string(), p))
                        .collect(),
                );
                record.p_ensemble =
                    Some(claimscope::classifiers::ensemble_average(
                        prediction.probability,
                        record.p_logreg,
                    ));
                record.agent = Some(prediction);
            }
            Ok(record)
        })
        .collect::<Result<_, _>>()?;
    records.sort_by(|a, b| {
        (&a.application_id, a.claim_number).cmp(&(&b.application_id, b.claim_number))
    });
    write_jsonl(&ctx.paths.predictions(split.name()), &records)?;
    println!(
        "predicted {} rows of `{}` with method `{}`",
        records.len(),
        split.name(),
        method
    );
    Ok(())
}
