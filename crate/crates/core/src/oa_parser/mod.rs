//! Office-action parsing: §112 section selection, LLM-backed extraction of
//! rejection reasons, claim-range expansion, category normalization, and
//! conversion into labeled indefinite claims.

pub mod fuzzy;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{
    IndefinitenessCategory, LabeledClaim, PatentApplication, RecitationSpan, RejectionReason, Split,
};
use crate::error::{Error, Result};
use crate::gateway::{ChatMessage, ChatRequest, Gateway};
use crate::ingest::{OaSection, OfficeActionDocument};

pub const PARSING_PROMPT: &str = include_str!("../assets/parsing_prompt.txt");
pub const CATEGORY_DESCRIPTIONS: &str = include_str!("../assets/category_descriptions.txt");

/// JSON schema the extraction model must follow.
pub const EXTRACTION_SCHEMA: &str = r#"{
  "type": "object",
  "properties": {
    "rejectedClaims": {
      "type": "array",
      "items": {"type": ["integer", "string"]}
    },
    "rejectionReasons": {
      "type": "array",
      "items": {
        "type": "object",
        "properties": {
          "reasonText": {"type": "string"},
          "reasonContext": {"type": "string"},
          "claims": {"type": "array", "items": {"type": ["integer", "string"]}},
          "reasonCategory": {"type": "string"},
          "claimRecitations": {"type": "array", "items": {"type": "string"}}
        },
        "required": ["reasonText", "claims", "reasonCategory", "claimRecitations"]
      }
    }
  },
  "required": ["rejectedClaims", "rejectionReasons"]
}"#;

/// A claim reference as the extraction model emits it: either a bare number
/// or an inclusive range string like "3-5".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClaimRef {
    Number(i64),
    Range(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RawReason {
    pub reason_text: String,
    #[serde(default)]
    pub reason_context: Option<String>,
    pub claims: Vec<ClaimRef>,
    pub reason_category: String,
    pub claim_recitations: Vec<String>,
}

/// The extraction record, field names exactly as the prompt schema states
/// them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RawRejectionRecord {
    pub rejected_claims: Vec<ClaimRef>,
    pub rejection_reasons: Vec<RawReason>,
}

impl RawRejectionRecord {
    pub fn empty() -> Self {
        RawRejectionRecord { rejected_claims: Vec::new(), rejection_reasons: Vec::new() }
    }
}

/// Sections whose heading contains "112", order preserved. An empty result
/// means the office action raises no §112 rejection.
pub fn select_112_sections(office_action: &OfficeActionDocument) -> Vec<&OaSection> {
    office_action.sections.iter().filter(|s| s.heading.contains("112")).collect()
}

/// Expands integer-or-range claim references into a deduplicated ascending
/// list. Malformed entries are skipped and reported in the second element.
pub fn expand_claim_ranges(entries: &[ClaimRef]) -> (Vec<u32>, Vec<String>) {
    let mut numbers = Vec::new();
    let mut errors = Vec::new();
    for entry in entries {
        match entry {
            ClaimRef::Number(n) => {
                if *n >= 1 && *n <= u32::MAX as i64 {
                    numbers.push(*n as u32);
                } else {
                    errors.push(format!("claim number out of range: {n}"));
                }
            }
            ClaimRef::Range(s) => match parse_range(s) {
                Ok((lo, hi)) => numbers.extend(lo..=hi),
                Err(msg) => errors.push(msg),
            },
        }
    }
    numbers.sort_unstable();
    numbers.dedup();
    (numbers, errors)
}

fn parse_range(s: &str) -> std::result::Result<(u32, u32), String> {
    let s = s.trim();
    // bare number serialized as a string is still a valid reference
    if let Ok(n) = s.parse::<u32>() {
        if n >= 1 {
            return Ok((n, n));
        }
        return Err(format!("claim number out of range: {s:?}"));
    }
    let (lo, hi) = s.split_once('-').ok_or_else(|| format!("malformed range: {s:?}"))?;
    let lo: u32 = lo.trim().parse().map_err(|_| format!("malformed range: {s:?}"))?;
    let hi: u32 = hi.trim().parse().map_err(|_| format!("malformed range: {s:?}"))?;
    if lo == 0 || lo > hi {
        return Err(format!("malformed range: {s:?}"));
    }
    Ok((lo, hi))
}

/// Maps a free-form category string onto the canonical inventory after
/// case-folding and space/underscore normalization. Unrecognized values fall
/// back to `Other` with a warning.
pub fn normalize_category(raw_category: &str) -> IndefinitenessCategory {
    let folded: String = raw_category
        .trim()
        .to_lowercase()
        .chars()
        .map(|c| if c == ' ' || c == '-' { '_' } else { c })
        .collect();
    for cat in IndefinitenessCategory::ALL {
        if folded == cat.identifier() {
            return cat;
        }
    }
    log::warn!("unrecognized rejection category {raw_category:?}, treating as other");
    IndefinitenessCategory::Other
}

fn strip_code_fences(content: &str) -> &str {
    let trimmed = content.trim();
    let Some(rest) = trimmed.strip_prefix("```") else {
        return trimmed;
    };
    let rest = rest.strip_prefix("json").unwrap_or(rest);
    rest.trim().strip_suffix("```").unwrap_or(rest).trim()
}

/// Parses a model reply into a [`RawRejectionRecord`], tolerating a code
/// fence around the JSON.
pub fn parse_extraction_reply(content: &str) -> Result<RawRejectionRecord> {
    serde_json::from_str(strip_code_fences(content))
        .map_err(|e| Error::Protocol(format!("extraction reply does not match schema: {e}")))
}

/// Builds the extraction system prompt from the shipped template.
pub fn extraction_system_prompt() -> String {
    PARSING_PROMPT
        .replace("{schema}", EXTRACTION_SCHEMA)
        .replace("{rejection_categories}", CATEGORY_DESCRIPTIONS.trim_end())
}

/// Runs the extraction call over the selected §112 sections. Replies failing
/// schema validation are retried up to `max_retries` additional calls with
/// the invalid reply echoed back; persistent failure surfaces as an
/// extraction-failure error so the application can be flagged and excluded.
pub fn extract_rejections(
    sections: &[&OaSection],
    gateway: &Gateway,
    model: &str,
    max_retries: u32,
) -> Result<RawRejectionRecord> {
    if sections.is_empty() {
        return Ok(RawRejectionRecord::empty());
    }
    let body = sections
        .iter()
        .map(|s| format!("{}\n\n{}", s.heading, s.text))
        .collect::<Vec<_>>()
        .join("\n\n");
    let mut messages = vec![
        ChatMessage::system(extraction_system_prompt()),
        ChatMessage::assistant("Understood. Send the office action document."),
        ChatMessage::user(body),
    ];
    let mut last_error = None;
    for _attempt in 0..=max_retries {
        let reply = gateway.complete(&ChatRequest::new(model, messages.clone()))?;
        let content = reply.content.clone().unwrap_or_default();
        match parse_extraction_reply(&content) {
            Ok(record) => return Ok(record),
            Err(e) => {
                log::warn!("extraction reply rejected: {e}");
                messages.push(ChatMessage::assistant(content));
                messages.push(ChatMessage::user(
                    "That reply was not valid JSON matching the schema. Respond with only the \
                     JSON object.",
                ));
                last_error = Some(e);
            }
        }
    }
    Err(Error::ExtractionFailure {
        application_id: String::new(),
        reason: format!(
            "schema-invalid output after {} attempts: {}",
            max_retries + 1,
            last_error.map(|e| e.to_string()).unwrap_or_default()
        ),
    })
}

/// Turns an extraction record into indefinite [`LabeledClaim`] rows.
///
/// Parse-only reasons (dependence, other) are dropped; a claim whose only
/// reasons were dropped produces no row at all. Recitations are located in
/// each claim's text via fuzzy matching; misses keep the recitation but emit
/// no span.
pub fn finalize_labels(
    record: &RawRejectionRecord,
    application: &PatentApplication,
    match_threshold: f64,
) -> Vec<LabeledClaim> {
    let mut per_claim: BTreeMap<u32, Vec<RejectionReason>> = BTreeMap::new();
    for raw in &record.rejection_reasons {
        let category = normalize_category(&raw.reason_category);
        if category.is_parse_only() {
            continue;
        }
        let (claim_numbers, errors) = expand_claim_ranges(&raw.claims);
        for err in errors {
            log::warn!("{}: {err}", application.application_id);
        }
        for number in claim_numbers {
            let Some(claim) = application.claim(number) else {
                log::warn!(
                    "{}: reason references nonexistent claim {number}, skipping",
                    application.application_id
                );
                continue;
            };
            let mut spans = Vec::new();
            for recitation in &raw.claim_recitations {
                match fuzzy::fuzzy_match_recitation(recitation, &claim.text, match_threshold) {
                    Some(m) => spans.push(RecitationSpan {
                        claim_number: number,
                        start: m.start,
                        end: m.end,
                        match_score: m.score,
                    }),
                    None => log::debug!(
                        "{}: recitation not found in claim {number}: {recitation:?}",
                        application.application_id
                    ),
                }
            }
            per_claim.entry(number).or_default().push(RejectionReason {
                reason_text: raw.reason_text.clone(),
                reason_context: raw.reason_context.clone().filter(|c| !c.trim().is_empty()),
                claims: Vec::new(),
                category,
                raw_category: Some(raw.reason_category.clone()),
                recitations: raw.claim_recitations.clone(),
                recitation_spans: spans,
            });
        }
    }
    // record the reason's full claim set on every clone
    for (_, reasons) in per_claim.iter_mut() {
        for reason in reasons.iter_mut() {
            reason.claims = per_claim_numbers(record, reason);
        }
    }
    per_claim
        .into_iter()
        .map(|(number, reasons)| LabeledClaim {
            claim: application.claim(number).expect("claim verified above").clone(),
            label: true,
            reasons,
            split: Split::Train, // placeholder; assigned by the splitter
        })
        .collect()
}

fn per_claim_numbers(record: &RawRejectionRecord, reason: &RejectionReason) -> Vec<u32> {
    for raw in &record.rejection_reasons {
        if raw.reason_text == reason.reason_text {
            return expand_claim_ranges(&raw.claims).0;
        }
    }
    Vec::new()
}
