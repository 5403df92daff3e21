//! Corpus assembly: indefinite-claim collection, balanced definite-claim
//! sampling, application-level splitting, and summary statistics.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{feature_segment_count, LabeledClaim, PatentApplication, Split};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub rows: Vec<LabeledClaim>,
    pub seed: u64,
    pub creation_config: BTreeMap<String, String>,
    /// claims per split, keyed by split name
    pub split_counts: BTreeMap<String, usize>,
}

impl DatasetManifest {
    /// Checks the structural invariants: one split per application and label
    /// balance within one claim-per-application average.
    pub fn validate(&self, avg_indefinite_per_app: f64) -> Result<()> {
        let mut app_split: BTreeMap<&str, Split> = BTreeMap::new();
        for row in &self.rows {
            let id = row.application_id();
            if let Some(prev) = app_split.insert(id, row.split) {
                if prev != row.split {
                    return Err(Error::Invalid(format!("application {id} spans two splits")));
                }
            }
        }
        let definite = self.rows.iter().filter(|r| !r.label).count() as i64;
        let indefinite = self.rows.len() as i64 - definite;
        let tolerance = avg_indefinite_per_app.ceil() as i64;
        if (definite - indefinite).abs() > tolerance {
            return Err(Error::Invalid(format!(
                "label imbalance {definite} definite vs {indefinite} indefinite exceeds {tolerance}"
            )));
        }
        Ok(())
    }
}

/// Flattens per-application extraction outputs into a deterministically
/// ordered list (application_id, then claim number).
pub fn collect_indefinite_claims(per_application: &[Vec<LabeledClaim>]) -> Vec<LabeledClaim> {
    let mut rows: Vec<LabeledClaim> = per_application.iter().flatten().cloned().collect();
    rows.sort_by(|a, b| {
        (a.application_id(), a.claim.number).cmp(&(b.application_id(), b.claim.number))
    });
    rows
}

/// Average indefinite claims per application among applications contributing
/// at least one indefinite claim.
pub fn average_indefinite_per_application(rows: &[LabeledClaim]) -> f64 {
    let mut per_app: BTreeMap<&str, usize> = BTreeMap::new();
    for row in rows.iter().filter(|r| r.label) {
        *per_app.entry(row.application_id()).or_default() += 1;
    }
    if per_app.is_empty() {
        return 0.0;
    }
    per_app.values().sum::<usize>() as f64 / per_app.len() as f64
}

/// Samples definite claims from applications whose office action never
/// raised indefiniteness.
///
/// Applications are visited in seeded-random order. Each visit draws
/// floor(`avg_per_app`) claims while the running definite-claims-per-app
/// ratio is at or above `avg_per_app`, otherwise ceil, uniformly without
/// replacement within the application; the final draw truncates to hit
/// `target_count` exactly.
pub fn sample_definite_claims(
    clean_applications: &[PatentApplication],
    target_count: usize,
    avg_per_app: f64,
    seed: u64,
) -> Result<Vec<LabeledClaim>> {
    if target_count == 0 {
        return Ok(Vec::new());
    }
    if avg_per_app <= 0.0 {
        return Err(Error::Config("avg_per_app must be positive".to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..clean_applications.len()).collect();
    order.shuffle(&mut rng);

    let mut rows = Vec::new();
    let mut apps_used = 0usize;
    for app_idx in order {
        if rows.len() >= target_count {
            break;
        }
        let app = &clean_applications[app_idx];
        let ratio_at_or_above = apps_used == 0
            || rows.len() as f64 / apps_used as f64 >= avg_per_app;
        let draw = if ratio_at_or_above {
            avg_per_app.floor() as usize
        } else {
            avg_per_app.ceil() as usize
        };
        let draw = draw.min(app.claims.len()).min(target_count - rows.len());
        let mut claim_order: Vec<usize> = (0..app.claims.len()).collect();
        claim_order.shuffle(&mut rng);
        for &ci in claim_order.iter().take(draw) {
            rows.push(LabeledClaim {
                claim: app.claims[ci].clone(),
                label: false,
                reasons: Vec::new(),
                split: Split::Train, // placeholder; assigned by the splitter
            });
        }
        apps_used += 1;
    }
    if rows.len() < target_count {
        return Err(Error::InsufficientClaims { needed: target_count, available: rows.len() });
    }
    Ok(rows)
}

fn largest_remainder_targets(total: usize, fractions: [f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = fractions.iter().map(|f| f * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut leftover = total - counts.iter().sum::<usize>();
    let mut by_remainder: Vec<usize> = (0..3).collect();
    by_remainder.sort_by(|&a, &b| {
        (exact[b] - exact[b].floor())
            .partial_cmp(&(exact[a] - exact[a].floor()))
            .unwrap()
            .then(a.cmp(&b))
    });
    for &i in &by_remainder {
        if leftover == 0 {
            break;
        }
        counts[i] += 1;
        leftover -= 1;
    }
    [counts[0], counts[1], counts[2]]
}

/// Assigns applications to train/test/validation, shuffling with `seed` and
/// hitting the application-count fractions via largest remainder. All claims
/// inherit their application's split.
pub fn split_dataset(
    rows: Vec<LabeledClaim>,
    fractions: [f64; 3],
    seed: u64,
) -> Result<DatasetManifest> {
    if (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Config("split fractions must sum to 1".to_string()));
    }
    let app_ids: BTreeSet<String> =
        rows.iter().map(|r| r.application_id().to_string()).collect();
    if app_ids.len() < 3 {
        return Err(Error::TooFewApplications(app_ids.len()));
    }
    let mut shuffled: Vec<String> = app_ids.into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    let targets = largest_remainder_targets(shuffled.len(), fractions);

    let mut assignment: BTreeMap<String, Split> = BTreeMap::new();
    let mut cursor = 0usize;
    for (split, count) in Split::ALL.into_iter().zip(targets) {
        for id in &shuffled[cursor..cursor + count] {
            assignment.insert(id.clone(), split);
        }
        cursor += count;
    }

    let mut rows = rows;
    for row in rows.iter_mut() {
        row.split = assignment[row.application_id()];
    }
    rows.sort_by(|a, b| {
        (a.application_id(), a.claim.number, a.label)
            .cmp(&(b.application_id(), b.claim.number, b.label))
    });
    let mut split_counts = BTreeMap::new();
    for row in &rows {
        *split_counts.entry(row.split.name().to_string()).or_insert(0usize) += 1;
    }
    Ok(DatasetManifest { rows, seed, creation_config: BTreeMap::new(), split_counts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub split: String,
    pub claims_total: usize,
    pub claims_definite: usize,
    pub claims_indefinite: usize,
    pub pct_indefinite: f64,
    pub independent_claims: usize,
    pub dependent_claims: usize,
    pub applications_total: usize,
    pub applications_definite: usize,
    pub applications_indefinite: usize,
    /// reason instances per category identifier
    pub reason_counts: BTreeMap<String, usize>,
}

/// One label × independence aggregate row; `None` means the group is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimGroupStats {
    pub label: bool,
    pub independent: bool,
    pub count: usize,
    pub pct_samples: f64,
    pub mean_parents: Option<f64>,
    pub mean_characters: Option<f64>,
    pub mean_words: Option<f64>,
    pub mean_feature_segments: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearCount {
    pub year: i32,
    pub definite: usize,
    pub indefinite: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStatistics {
    /// one row per split plus a "total" row
    pub per_split: Vec<SplitStats>,
    pub claim_groups: Vec<ClaimGroupStats>,
    pub per_year: Vec<YearCount>,
}

fn split_stats<'a>(name: &str, rows: impl Iterator<Item = &'a LabeledClaim>) -> SplitStats {
    let mut stats = SplitStats {
        split: name.to_string(),
        claims_total: 0,
        claims_definite: 0,
        claims_indefinite: 0,
        pct_indefinite: 0.0,
        independent_claims: 0,
        dependent_claims: 0,
        applications_total: 0,
        applications_definite: 0,
        applications_indefinite: 0,
        reason_counts: BTreeMap::new(),
    };
    let mut apps: BTreeSet<&str> = BTreeSet::new();
    let mut apps_definite: BTreeSet<&str> = BTreeSet::new();
    let mut apps_indefinite: BTreeSet<&str> = BTreeSet::new();
    for row in rows {
        stats.claims_total += 1;
        if row.label {
            stats.claims_indefinite += 1;
            apps_indefinite.insert(row.application_id());
        } else {
            stats.claims_definite += 1;
            apps_definite.insert(row.application_id());
        }
        if row.claim.parent_numbers.is_empty() {
            stats.independent_claims += 1;
        } else {
            stats.dependent_claims += 1;
        }
        apps.insert(row.application_id());
        for reason in &row.reasons {
            *stats.reason_counts.entry(reason.category.identifier().to_string()).or_default() += 1;
        }
    }
    stats.applications_total = apps.len();
    stats.applications_definite = apps_definite.len();
    stats.applications_indefinite = apps_indefinite.len();
    if stats.claims_total > 0 {
        stats.pct_indefinite = 100.0 * stats.claims_indefinite as f64 / stats.claims_total as f64;
    }
    stats
}

fn group_stats(rows: &[LabeledClaim], total: usize, label: bool, independent: bool) -> ClaimGroupStats {
    let members: Vec<&LabeledClaim> = rows
        .iter()
        .filter(|r| r.label == label && r.claim.parent_numbers.is_empty() == independent)
        .collect();
    let count = members.len();
    let mean = |f: &dyn Fn(&LabeledClaim) -> f64| -> Option<f64> {
        (count > 0).then(|| members.iter().map(|r| f(r)).sum::<f64>() / count as f64)
    };
    ClaimGroupStats {
        label,
        independent,
        count,
        pct_samples: if total > 0 { 100.0 * count as f64 / total as f64 } else { 0.0 },
        mean_parents: mean(&|r| r.claim.parent_numbers.len() as f64),
        mean_characters: mean(&|r| r.claim.text.chars().count() as f64),
        mean_words: mean(&|r| r.claim.text.split_whitespace().count() as f64),
        mean_feature_segments: mean(&|r| feature_segment_count(&r.claim.text) as f64),
    }
}

/// Summary statistics over a manifest. `filing_years` maps application_id to
/// filing year; applications absent from the map are left out of the
/// per-year table.
pub fn compute_statistics(
    manifest: &DatasetManifest,
    filing_years: &BTreeMap<String, i32>,
) -> Result<CorpusStatistics> {
    if manifest.rows.is_empty() {
        return Err(Error::EmptyInput("manifest has no rows"));
    }
    let rows = &manifest.rows;
    let mut per_split: Vec<SplitStats> = Split::ALL
        .into_iter()
        .map(|s| split_stats(s.name(), rows.iter().filter(move |r| r.split == s)))
        .collect();
    per_split.push(split_stats("total", rows.iter()));

    let total = rows.len();
    let claim_groups = vec![
        group_stats(rows, total, false, true),
        group_stats(rows, total, false, false),
        group_stats(rows, total, true, true),
        group_stats(rows, total, true, false),
    ];

    let mut per_year: BTreeMap<i32, YearCount> = BTreeMap::new();
    for row in rows {
        let Some(&year) = filing_years.get(row.application_id()) else { continue };
        let entry = per_year
            .entry(year)
            .or_insert(YearCount { year, definite: 0, indefinite: 0 });
        if row.label {
            entry.indefinite += 1;
        } else {
            entry.definite += 1;
        }
    }
    Ok(CorpusStatistics {
        per_split,
        claim_groups,
        per_year: per_year.into_values().collect(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ManifestHeader {
    seed: u64,
    creation_config: BTreeMap<String, String>,
    split_counts: BTreeMap<String, usize>,
    row_count: usize,
}

/// Writes the manifest as a header line followed by one labeled-claim record
/// per line.
pub fn write_manifest(path: &Path, manifest: &DatasetManifest) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header = ManifestHeader {
        seed: manifest.seed,
        creation_config: manifest.creation_config.clone(),
        split_counts: manifest.split_counts.clone(),
        row_count: manifest.rows.len(),
    };
    writeln!(out, "{}", serde_json::to_string(&header)?)?;
    for row in &manifest.rows {
        writeln!(out, "{}", serde_json::to_string(row)?)?;
    }
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<DatasetManifest> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut lines = file.lines();
    let header_line = lines
        .next()
        .ok_or(Error::EmptyInput("manifest file"))??;
    let header: ManifestHeader = serde_json::from_str(&header_line)?;
    let mut rows = Vec::with_capacity(header.row_count);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(&line)?);
    }
    if rows.len() != header.row_count {
        return Err(Error::Invalid(format!(
            "manifest declares {} rows but contains {}",
            header.row_count,
            rows.len()
        )));
    }
    Ok(DatasetManifest {
        rows,
        seed: header.seed,
        creation_config: header.creation_config,
        split_counts: header.split_counts,
    })
}

/// Reads only the labeled-claim rows of a corpus file, tolerating a missing
/// header line (released-corpus layout is rows only).
pub fn read_corpus_rows(path: &Path) -> Result<Vec<LabeledClaim>> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut rows = Vec::new();
    for line in file.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Ok(row) = serde_json::from_str::<LabeledClaim>(trimmed) {
            rows.push(row);
        } else if rows.is_empty() && serde_json::from_str::<ManifestHeader>(trimmed).is_ok() {
            continue; // manifest header
        } else {
            return Err(Error::Invalid("unparseable corpus line".to_string()));
        }
    }
    Ok(rows)
}

/// Emits the statistics as tab-separated tables, one file per table.
pub fn write_statistics_tables(stats: &CorpusStatistics, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut split_table = String::from(
        "split\tclaims_total\tclaims_definite\tclaims_indefinite\tpct_indefinite\t\
         independent_claims\tdependent_claims\tapplications_total\tapplications_definite\t\
         applications_indefinite\treason_counts\n",
    );
    for row in &stats.per_split {
        split_table.push_str(&format!(
            "{}\t{}\t{}\t{}\t{:.2}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            row.split,
            row.claims_total,
            row.claims_definite,
            row.claims_indefinite,
            row.pct_indefinite,
            row.independent_claims,
            row.dependent_claims,
            row.applications_total,
            row.applications_definite,
            row.applications_indefinite,
            serde_json::to_string(&row.reason_counts)?,
        ));
    }
    std::fs::write(dir.join("split_stats.tsv"), split_table)?;

    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".to_string());
    let mut group_table = String::from(
        "label\tindependent\tcount\tpct_samples\tmean_parents\tmean_characters\tmean_words\t\
         mean_feature_segments\n",
    );
    for row in &stats.claim_groups {
        group_table.push_str(&format!(
            "{}\t{}\t{}\t{:.2}\t{}\t{}\t{}\t{}\n",
            if row.label { "indefinite" } else { "definite" },
            if row.independent { "independent" } else { "dependent" },
            row.count,
            row.pct_samples,
            fmt(row.mean_parents),
            fmt(row.mean_characters),
            fmt(row.mean_words),
            fmt(row.mean_feature_segments),
        ));
    }
    std::fs::write(dir.join("claim_groups.tsv"), group_table)?;

    let mut year_table = String::from("year\tdefinite\tindefinite\n");
    for row in &stats.per_year {
        year_table.push_str(&format!("{}\t{}\t{}\n", row.year, row.definite, row.indefinite));
    }
    std::fs::write(dir.join("per_year.tsv"), year_table)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Claim, IndefinitenessCategory, RejectionReason};

    fn labeled(app: &str, number: u32, label: bool, text: &str) -> LabeledClaim {
        let mut reasons = Vec::new();
        if label {
            reasons.push(RejectionReason {
                reason_text: "reason".to_string(),
                reason_context: None,
                claims: vec![number],
                category: IndefinitenessCategory::UndefinedTerm,
                raw_category: None,
                recitations: Vec::new(),
                recitation_spans: Vec::new(),
            });
        }
        LabeledClaim {
            claim: Claim::from_text(number, text, app),
            label,
            reasons,
            split: Split::Train,
        }
    }

    fn app(id: &str, n_claims: usize) -> PatentApplication {
        PatentApplication {
            application_id: id.to_string(),
            filing_date: chrono::NaiveDate::from_ymd_opt(2016, 1, 1).unwrap(),
            cpc_codes: Vec::new(),
            claims: (1..=n_claims as u32)
                .map(|n| Claim::from_text(n, &format!("A widget number {n}."), id))
                .collect(),
            description_paragraphs: vec!["desc".to_string()],
            office_action_refs: Vec::new(),
        }
    }

    #[test]
    fn collect_sorts_across_applications() {
        let rows = collect_indefinite_claims(&[
            vec![labeled("b", 2, true, "x"), labeled("b", 1, true, "x")],
            vec![labeled("a", 3, true, "x"), labeled("a", 1, true, "x")],
            vec![labeled("a", 2, true, "x"), labeled("b", 3, true, "x")],
        ]);
        let order: Vec<(&str, u32)> =
            rows.iter().map(|r| (r.application_id(), r.claim.number)).collect();
        assert_eq!(order, vec![("a", 1), ("a", 2), ("a", 3), ("b", 1), ("b", 2), ("b", 3)]);
    }

    #[test]
    fn sample_target_zero_is_empty() {
        assert!(sample_definite_claims(&[app("a", 5)], 0, 2.5, 7).unwrap().is_empty());
    }

    #[test]
    fn sample_rounding_rule_reference_simulation() {
        let apps: Vec<PatentApplication> =
            (0..4).map(|i| app(&format!("app{i}"), 10)).collect();
        let rows = sample_definite_claims(&apps, 10, 2.5, 11).unwrap();
        assert_eq!(rows.len(), 10);
        let mut per_app: BTreeMap<&str, usize> = BTreeMap::new();
        for row in &rows {
            *per_app.entry(row.application_id()).or_default() += 1;
        }
        let mut draws: Vec<usize> = per_app.values().copied().collect();
        draws.sort_unstable();
        // ratio tracking alternates floor/ceil of 2.5
        assert_eq!(draws, vec![2, 2, 3, 3]);
        assert!(rows.iter().all(|r| !r.label && r.reasons.is_empty()));
    }

    #[test]
    fn sample_shortfall_errors() {
        let err = sample_definite_claims(&[app("a", 2)], 10, 2.5, 0).unwrap_err();
        match err {
            Error::InsufficientClaims { needed, available } => {
                assert_eq!(needed, 10);
                assert_eq!(available, 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn sample_deterministic_given_seed() {
        let apps: Vec<PatentApplication> = (0..6).map(|i| app(&format!("a{i}"), 8)).collect();
        let a = sample_definite_claims(&apps, 12, 2.0, 3).unwrap();
        let b = sample_definite_claims(&apps, 12, 2.0, 3).unwrap();
        assert_eq!(a, b);
    }

    fn ten_app_rows() -> Vec<LabeledClaim> {
        (0..10)
            .flat_map(|i| {
                let id = format!("app{i}");
                let _ = i;
                vec![labeled(&id, 1, true, "A widget."), labeled(&id, 2, false, "A gadget.")]
            })
            .collect()
    }

    #[test]
    fn split_exact_divisibility() {
        let manifest = split_dataset(ten_app_rows(), [0.6, 0.3, 0.1], 5).unwrap();
        let mut apps_per_split: BTreeMap<Split, BTreeSet<&str>> = BTreeMap::new();
        for row in &manifest.rows {
            apps_per_split.entry(row.split).or_default().insert(row.application_id());
        }
        assert_eq!(apps_per_split[&Split::Train].len(), 6);
        assert_eq!(apps_per_split[&Split::Test].len(), 3);
        assert_eq!(apps_per_split[&Split::Validation].len(), 1);
    }

    #[test]
    fn split_deterministic_and_leakage_free() {
        let a = split_dataset(ten_app_rows(), [0.6, 0.3, 0.1], 5).unwrap();
        let b = split_dataset(ten_app_rows(), [0.6, 0.3, 0.1], 5).unwrap();
        assert_eq!(a, b);
        for manifest in [&a, &split_dataset(ten_app_rows(), [0.6, 0.3, 0.1], 6).unwrap()] {
            manifest.validate(1.0).unwrap();
        }
    }

    #[test]
    fn split_too_few_applications() {
        let rows = vec![labeled("a", 1, true, "x"), labeled("b", 1, false, "y")];
        assert!(matches!(
            split_dataset(rows, [0.6, 0.3, 0.1], 0),
            Err(Error::TooFewApplications(2))
        ));
    }

    #[test]
    fn statistics_hand_oracle() {
        let mut rows = vec![
            labeled("a", 1, true, "A widget; a part, wherein it spins."),
            labeled("a", 2, false, "The widget of claim 1, further comprising a lid."),
            labeled("b", 1, true, "A gadget."),
            labeled("b", 2, false, "The gadget of claim 1, wherein blue."),
        ];
        for row in rows.iter_mut() {
            row.split = Split::Train;
        }
        let manifest = DatasetManifest {
            rows,
            seed: 0,
            creation_config: BTreeMap::new(),
            split_counts: BTreeMap::from([("train".to_string(), 4)]),
        };
        let years = BTreeMap::from([("a".to_string(), 2016), ("b".to_string(), 2017)]);
        let stats = compute_statistics(&manifest, &years).unwrap();
        let total = stats.per_split.iter().find(|s| s.split == "total").unwrap();
        assert_eq!(total.claims_total, 4);
        assert_eq!(total.claims_indefinite, 2);
        assert_eq!(total.pct_indefinite, 50.0);
        assert_eq!(total.independent_claims, 2);
        assert_eq!(total.applications_total, 2);
        assert_eq!(total.reason_counts["undefined_term"], 2);
        // indefinite independents are claims a1 and b1: 35 and 9 chars, 7 and 2 words
        let group = stats
            .claim_groups
            .iter()
            .find(|g| g.label && g.independent)
            .unwrap();
        assert_eq!(group.count, 2);
        assert!((group.mean_characters.unwrap() - 22.0).abs() < 1e-9);
        assert!((group.mean_words.unwrap() - 4.5).abs() < 1e-9);
        assert_eq!(stats.per_year.len(), 2);
        assert_eq!(stats.per_year[0].year, 2016);
        assert_eq!(stats.per_year[0].indefinite, 1);
    }

    #[test]
    fn statistics_single_definite_claim() {
        let manifest = DatasetManifest {
            rows: vec![labeled("a", 1, false, "A widget.")],
            seed: 0,
            creation_config: BTreeMap::new(),
            split_counts: BTreeMap::new(),
        };
        let stats = compute_statistics(&manifest, &BTreeMap::new()).unwrap();
        let total = stats.per_split.iter().find(|s| s.split == "total").unwrap();
        assert_eq!(total.pct_indefinite, 0.0);
        for group in stats.claim_groups.iter().filter(|g| g.label) {
            assert_eq!(group.count, 0);
            assert!(group.mean_characters.is_none());
        }
    }

    #[test]
    fn manifest_round_trip() {
        let manifest = split_dataset(ten_app_rows(), [0.6, 0.3, 0.1], 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        write_manifest(&path, &manifest).unwrap();
        let back = read_manifest(&path).unwrap();
        assert_eq!(manifest, back);
        let rows_only = read_corpus_rows(&path).unwrap();
        assert_eq!(rows_only, manifest.rows);
    }
}
