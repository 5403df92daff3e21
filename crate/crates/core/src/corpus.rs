//! Canonical domain types and pure text-structure operations shared by all
//! pipeline stages.
//!
//! Types here are immutable value objects after construction and safe to share
//! across concurrent workers. All operations are pure functions.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One patent claim as filed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub number: u32,
    pub text: String,
    /// Claim numbers this claim refers back to; empty means independent.
    pub parent_numbers: Vec<u32>,
    pub application_id: String,
}

impl Claim {
    /// Builds a claim, deriving parents from the claim text. References to the
    /// claim's own number are dropped.
    pub fn from_text(number: u32, text: &str, application_id: &str) -> Claim {
        let mut parents = parse_claim_dependencies(text);
        if references_preceding_claims(text) {
            parents.extend(1..number);
            parents.sort_unstable();
            parents.dedup();
        }
        parents.retain(|&p| p != number);
        Claim {
            number,
            text: text.to_string(),
            parent_numbers: parents,
            application_id: application_id.to_string(),
        }
    }
}

/// True iff the claim refers back to no other claim.
pub fn is_independent(claim: &Claim) -> bool {
    claim.parent_numbers.is_empty()
}

/// A patent application with its claims, description, and provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatentApplication {
    pub application_id: String,
    pub filing_date: chrono::NaiveDate,
    pub cpc_codes: Vec<String>,
    pub claims: Vec<Claim>,
    pub description_paragraphs: Vec<String>,
    /// Storage keys of the office-action documents backing this application.
    pub office_action_refs: Vec<String>,
}

impl PatentApplication {
    pub fn claim(&self, number: u32) -> Option<&Claim> {
        self.claims.iter().find(|c| c.number == number)
    }
}

/// The indefiniteness category taxonomy. `Dependence` and `Other` are
/// parse-only categories; they never appear in a final dataset row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndefinitenessCategory {
    AntecedentBasis,
    UndefinedTerm,
    RelativeTerm,
    ExemplaryPhrasing,
    FunctionalClaiming,
    ContradictingLimitations,
    OmissionOfEssentialElements,
    Dependence,
    Other,
}

impl IndefinitenessCategory {
    /// All nine taxonomy values, in canonical order.
    pub const ALL: [IndefinitenessCategory; 9] = [
        IndefinitenessCategory::AntecedentBasis,
        IndefinitenessCategory::UndefinedTerm,
        IndefinitenessCategory::RelativeTerm,
        IndefinitenessCategory::ExemplaryPhrasing,
        IndefinitenessCategory::FunctionalClaiming,
        IndefinitenessCategory::ContradictingLimitations,
        IndefinitenessCategory::OmissionOfEssentialElements,
        IndefinitenessCategory::Dependence,
        IndefinitenessCategory::Other,
    ];

    /// The seven categories that may appear in a final dataset row.
    pub const FINAL: [IndefinitenessCategory; 7] = [
        IndefinitenessCategory::AntecedentBasis,
        IndefinitenessCategory::UndefinedTerm,
        IndefinitenessCategory::RelativeTerm,
        IndefinitenessCategory::ExemplaryPhrasing,
        IndefinitenessCategory::FunctionalClaiming,
        IndefinitenessCategory::ContradictingLimitations,
        IndefinitenessCategory::OmissionOfEssentialElements,
    ];

    pub fn identifier(self) -> &'static str {
        match self {
            IndefinitenessCategory::AntecedentBasis => "antecedent_basis",
            IndefinitenessCategory::UndefinedTerm => "undefined_term",
            IndefinitenessCategory::RelativeTerm => "relative_term",
            IndefinitenessCategory::ExemplaryPhrasing => "exemplary_phrasing",
            IndefinitenessCategory::FunctionalClaiming => "functional_claiming",
            IndefinitenessCategory::ContradictingLimitations => "contradicting_limitations",
            IndefinitenessCategory::OmissionOfEssentialElements => "omission_of_essential_elements",
            IndefinitenessCategory::Dependence => "dependence",
            IndefinitenessCategory::Other => "other",
        }
    }

    /// True for categories used only during office-action parsing.
    pub fn is_parse_only(self) -> bool {
        matches!(
            self,
            IndefinitenessCategory::Dependence | IndefinitenessCategory::Other
        )
    }
}

/// A character span (Unicode-scalar offsets) locating one recitation inside a
/// claim's text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecitationSpan {
    pub claim_number: u32,
    pub start: usize,
    pub end: usize,
    pub match_score: f64,
}

/// One examiner-cited reason for indefiniteness: the annotation unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionReason {
    /// Verbatim examiner text.
    pub reason_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason_context: Option<String>,
    /// Claim numbers this reason applies to.
    pub claims: Vec<u32>,
    pub category: IndefinitenessCategory,
    /// The category string as extracted, kept for audit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_category: Option<String>,
    pub recitations: Vec<String>,
    pub recitation_spans: Vec<RecitationSpan>,
}

impl RejectionReason {
    /// The text a judge evaluates: reasoning plus its context when present.
    pub fn evaluation_text(&self) -> String {
        match &self.reason_context {
            Some(ctx) if !ctx.trim().is_empty() => format!("{} {}", self.reason_text, ctx),
            _ => self.reason_text.clone(),
        }
    }
}

/// Dataset split assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    Validation,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Test, Split::Validation];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
            Split::Validation => "validation",
        }
    }
}

/// One dataset row: a claim with its binary label and examiner reasons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "CorpusRecord", into = "CorpusRecord")]
pub struct LabeledClaim {
    pub claim: Claim,
    /// true = indefinite.
    pub label: bool,
    pub reasons: Vec<RejectionReason>,
    pub split: Split,
}

impl LabeledClaim {
    pub fn application_id(&self) -> &str {
        &self.claim.application_id
    }

    /// Checks the row-level invariants.
    pub fn validate(&self) -> Result<()> {
        if self.label && self.reasons.is_empty() {
            return Err(Error::Invalid(format!(
                "indefinite claim {} of {} has no reasons",
                self.claim.number, self.claim.application_id
            )));
        }
        if !self.label && !self.reasons.is_empty() {
            return Err(Error::Invalid(format!(
                "definite claim {} of {} carries reasons",
                self.claim.number, self.claim.application_id
            )));
        }
        for reason in &self.reasons {
            if !reason.claims.contains(&self.claim.number) {
                return Err(Error::Invalid(format!(
                    "reason on claim {} of {} does not list the claim",
                    self.claim.number, self.claim.application_id
                )));
            }
            if reason.reason_text.trim().is_empty() {
                return Err(Error::Invalid("empty reason_text".into()));
            }
            if reason.category.is_parse_only() {
                return Err(Error::Invalid(format!(
                    "parse-only category {} in final row",
                    reason.category.identifier()
                )));
            }
        }
        Ok(())
    }
}

/// The line-delimited persistence layout for one dataset row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub application_id: String,
    pub claim_number: u32,
    pub claim_text: String,
    pub parent_numbers: Vec<u32>,
    pub label: bool,
    pub reasons: Vec<RejectionReason>,
    pub split: Split,
}

impl From<LabeledClaim> for CorpusRecord {
    fn from(row: LabeledClaim) -> CorpusRecord {
        CorpusRecord {
            application_id: row.claim.application_id,
            claim_number: row.claim.number,
            claim_text: row.claim.text,
            parent_numbers: row.claim.parent_numbers,
            label: row.label,
            reasons: row.reasons,
            split: row.split,
        }
    }
}

impl From<CorpusRecord> for LabeledClaim {
    fn from(rec: CorpusRecord) -> LabeledClaim {
        LabeledClaim {
            claim: Claim {
                number: rec.claim_number,
                text: rec.claim_text,
                parent_numbers: rec.parent_numbers,
                application_id: rec.application_id,
            },
            label: rec.label,
            reasons: rec.reasons,
            split: rec.split,
        }
    }
}

fn dependency_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?i)\bclaims?\s+(\d+(?:\s*(?:-|–|to|through)\s*\d+)?(?:(?:\s*,\s*(?:or\s+|and\s+)?|\s+(?:or|and)\s+)\d+(?:\s*(?:-|–|to|through)\s*\d+)?)*)",
        )
        .expect("dependency pattern")
    })
}

fn preceding_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)\bany\s+(?:one\s+)?(?:of\s+the\s+)?preceding\s+claims?\b")
            .expect("preceding pattern")
    })
}

/// Extracts claim numbers referenced by `claim_text` via the USPTO drafting
/// patterns "claim N", "claims N-M", and "claims N, M, or K". Deduplicated,
/// ascending; empty when no reference exists. Unparseable numbers are skipped.
pub fn parse_claim_dependencies(claim_text: &str) -> Vec<u32> {
    let mut found = Vec::new();
    for caps in dependency_regex().captures_iter(claim_text) {
        let list = &caps[1];
        for item in list.split(|c: char| c == ',' || c.is_whitespace()) {
            let item = item.trim();
            if item.is_empty() || item.eq_ignore_ascii_case("or") || item.eq_ignore_ascii_case("and")
            {
                continue;
            }
            parse_dependency_item(item, &mut found);
        }
        // ranges written with spaces around the dash arrive as "N - M" after
        // the whitespace split above; re-scan the raw list for those
        for range in Regex::new(r"(?i)(\d+)\s*(?:-|–|to|through)\s*(\d+)")
            .unwrap()
            .captures_iter(list)
        {
            if let (Ok(lo), Ok(hi)) = (range[1].parse::<u32>(), range[2].parse::<u32>()) {
                if lo <= hi && lo >= 1 {
                    found.extend(lo..=hi);
                }
            }
        }
    }
    found.retain(|&n| n >= 1);
    found.sort_unstable();
    found.dedup();
    found
}

fn parse_dependency_item(item: &str, out: &mut Vec<u32>) {
    if let Some((lo, hi)) = item.split_once(|c| c == '-' || c == '–') {
        match (lo.trim().parse::<u32>(), hi.trim().parse::<u32>()) {
            (Ok(lo), Ok(hi)) if lo <= hi => out.extend(lo..=hi),
            _ => log::debug!("skipping unparseable claim range {item:?}"),
        }
    } else if let Ok(n) = item.parse::<u32>() {
        out.push(n);
    } else if !item.chars().any(|c| c.is_ascii_digit()) {
        // words like "to"/"through" standing alone between numbers
    } else {
        log::debug!("skipping unparseable claim reference {item:?}");
    }
}

/// True when the claim text refers back with "any preceding claim" style
/// language, which resolves to all lower-numbered claims.
pub fn references_preceding_claims(claim_text: &str) -> bool {
    preceding_regex().is_match(claim_text)
}

/// Splits a description into paragraphs on blank-line boundaries and numbered
/// markers of the form "[0001]". Paragraphs are trimmed and non-empty.
pub fn segment_description_paragraphs(description_text: &str) -> Result<Vec<String>> {
    if description_text.trim().is_empty() {
        return Err(Error::EmptyInput("description text"));
    }
    static BLANK: OnceLock<Regex> = OnceLock::new();
    static MARKER: OnceLock<Regex> = OnceLock::new();
    let blank = BLANK.get_or_init(|| Regex::new(r"\n\s*\n").unwrap());
    let marker = MARKER.get_or_init(|| Regex::new(r"\[\d{3,5}\]").unwrap());
    let mut out = Vec::new();
    for block in blank.split(description_text) {
        for piece in marker.split(block) {
            let piece = piece.trim();
            if !piece.is_empty() {
                out.push(piece.to_string());
            }
        }
    }
    Ok(out)
}

/// Approximate count of claim "features": segments delimited by semicolons and
/// "wherein" clauses. Not an authoritative definition; used for reporting only.
pub fn feature_segment_count(claim_text: &str) -> usize {
    static WHEREIN: OnceLock<Regex> = OnceLock::new();
    let wherein = WHEREIN.get_or_init(|| Regex::new(r"(?i)\bwherein\b").unwrap());
    claim_text
        .split(';')
        .flat_map(|part| wherein.split(part))
        .filter(|seg| !seg.trim().is_empty())
        .count()
}
