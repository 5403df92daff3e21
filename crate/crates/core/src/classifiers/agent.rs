//! Zero-shot tool-using examination agent: prompts the model with a claim,
//! serves `get_claim`/`search_description` tool calls against the
//! application, and parses the final verdict with verbalized confidences.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::confidence::{confidence_lexicon, map_verbalized_probability};
use crate::corpus::{Claim, IndefinitenessCategory, PatentApplication};
use crate::error::{Error, Result};
use crate::features::{fit_tfidf, vectorize, TfidfModel};
use crate::gateway::{ChatMessage, ChatRequest, Gateway, ToolDefinition};
use crate::oa_parser::normalize_category;

pub const EXAMINATION_PROMPT: &str = include_str!("../assets/examination_prompt.txt");

/// Shape of the model's final verdict; mirrors the office-action annotation
/// format plus confidence fields.
pub const AGENT_OUTPUT_SCHEMA: &str = r#"{
  "likelihood": "<likelihood phrase>",
  "reasons": [
    {
      "confidence": "<likelihood phrase>",
      "reasoning": "<why this causes indefiniteness>",
      "category": "<category identifier>",
      "recitations": ["<verbatim claim excerpt>"]
    }
  ]
}"#;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolCall {
    pub tool_name: String,
    pub arguments: String,
    pub response_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedReason {
    pub confidence: String,
    pub probability: f64,
    pub reasoning: String,
    pub category: IndefinitenessCategory,
    pub recitations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentPrediction {
    pub application_id: String,
    pub claim_number: u32,
    pub claim_likelihood: String,
    pub probability: f64,
    pub reasons: Vec<PredictedReason>,
    pub tool_trace: Vec<ToolCall>,
}

#[derive(Debug, Deserialize)]
struct RawVerdict {
    likelihood: String,
    #[serde(default)]
    reasons: Vec<RawReason>,
}

#[derive(Debug, Deserialize)]
struct RawReason {
    confidence: String,
    #[serde(default)]
    reasoning: String,
    category: String,
    #[serde(default)]
    recitations: Vec<String>,
}

fn strip_code_fences(content: &str) -> &str {
    let trimmed = content.trim();
    let Some(rest) = trimmed.strip_prefix("```") else {
        return trimmed;
    };
    let rest = rest.strip_prefix("json").unwrap_or(rest);
    rest.trim().strip_suffix("```").unwrap_or(rest).trim()
}

/// Parses and validates a final verdict reply.
pub fn parse_verdict(content: &str) -> Result<(String, f64, Vec<PredictedReason>)> {
    let raw: RawVerdict = serde_json::from_str(strip_code_fences(content))
        .map_err(|e| Error::Protocol(format!("verdict does not match schema: {e}")))?;
    let likelihood = map_verbalized_probability(&raw.likelihood)?;
    let mut reasons = Vec::with_capacity(raw.reasons.len());
    for r in raw.reasons {
        let confidence = map_verbalized_probability(&r.confidence)?;
        reasons.push(PredictedReason {
            confidence: confidence.phrase.clone(),
            probability: confidence.numeric_probability,
            reasoning: r.reasoning,
            category: normalize_category(&r.category),
            recitations: r.recitations,
        });
    }
    Ok((likelihood.phrase.clone(), likelihood.numeric_probability, reasons))
}

fn final_category_block() -> String {
    crate::oa_parser::CATEGORY_DESCRIPTIONS
        .lines()
        .filter(|line| {
            !IndefinitenessCategory::ALL
                .iter()
                .filter(|c| c.is_parse_only())
                .any(|c| line.starts_with(&format!("- {}:", c.identifier())))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Builds the examination prompt for one claim.
pub fn examination_prompt(claim: &Claim) -> String {
    let phrases = confidence_lexicon()
        .iter()
        .map(|e| format!("- {}", e.phrase))
        .collect::<Vec<_>>()
        .join("\n");
    EXAMINATION_PROMPT
        .replace("{indefiniteness_categories}", &final_category_block())
        .replace("{output_schema}", AGENT_OUTPUT_SCHEMA)
        .replace("{likelihood_phrases}", &phrases)
        .replace("{claim}", &format!("Claim {}: {}", claim.number, claim.text))
}

fn tool_definitions() -> Vec<ToolDefinition> {
    vec![
        ToolDefinition {
            name: "get_claim".to_string(),
            description: "Returns a claim of this application given its claim number.".to_string(),
            parameters: json!({
                "type": "object",
                "properties": {"claim_number": {"type": "integer"}},
                "required": ["claim_number"]
            }),
        },
        ToolDefinition {
            name: "search_description".to_string(),
            description: "Searches the application's description and returns the most relevant \
                          paragraphs. Use one term per query."
                .to_string(),
            parameters: json!({
                "type": "object",
                "properties": {"query": {"type": "string"}},
                "required": ["query"]
            }),
        },
    ]
}

/// TF-IDF index over an application's description paragraphs.
pub struct DescriptionIndex {
    model: TfidfModel,
    vectors: Vec<Vec<(usize, f64)>>,
    paragraphs: Vec<String>,
}

impl DescriptionIndex {
    pub fn build(paragraphs: &[String]) -> Result<DescriptionIndex> {
        let model = fit_tfidf(paragraphs, 20_000)?;
        let vectors = paragraphs.iter().map(|p| vectorize(&model, p)).collect();
        DescriptionIndex::from_parts(model, vectors, paragraphs.to_vec())
    }

    fn from_parts(
        model: TfidfModel,
        vectors: Vec<Vec<(usize, f64)>>,
        paragraphs: Vec<String>,
    ) -> Result<DescriptionIndex> {
        Ok(DescriptionIndex { model, vectors, paragraphs })
    }

    /// Top-k paragraphs by cosine similarity; ties by paragraph order.
    pub fn search(&self, query: &str, k: usize) -> Vec<(usize, f64)> {
        let qv = vectorize(&self.model, query);
        let mut scored: Vec<(usize, f64)> = self
            .vectors
            .iter()
            .enumerate()
            .map(|(i, pv)| (i, sparse_dot(&qv, pv)))
            .filter(|(_, s)| *s > 0.0)
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        scored.truncate(k);
        scored
    }

    pub fn paragraph(&self, index: usize) -> &str {
        &self.paragraphs[index]
    }
}

fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let mut total = 0.0;
    let mut bi = 0usize;
    for &(idx, av) in a {
        while bi < b.len() && b[bi].0 < idx {
            bi += 1;
        }
        if bi < b.len() && b[bi].0 == idx {
            total += av * b[bi].1;
        }
    }
    total
}

fn execute_tool(
    name: &str,
    arguments: &str,
    application: &PatentApplication,
    index: &DescriptionIndex,
) -> String {
    let args: Value = match serde_json::from_str(arguments) {
        Ok(v) => v,
        Err(e) => return format!("Tool error: arguments are not valid JSON ({e})."),
    };
    match name {
        "get_claim" => {
            let Some(number) = args.get("claim_number").and_then(Value::as_u64) else {
                return "Tool error: missing integer argument 'claim_number'.".to_string();
            };
            match application.claim(number as u32) {
                Some(claim) => format!("Claim {}: {}", claim.number, claim.text),
                None => format!("No claim {number} exists in this application."),
            }
        }
        "search_description" => {
            let Some(query) = args.get("query").and_then(Value::as_str) else {
                return "Tool error: missing string argument 'query'.".to_string();
            };
            let hits = index.search(query, 5);
            if hits.is_empty() {
                return "No matching description paragraphs.".to_string();
            }
            hits.iter()
                .map(|&(i, _)| format!("[{:04}] {}", i + 1, index.paragraph(i)))
                .collect::<Vec<_>>()
                .join("\n\n")
        }
        other => format!("Tool error: unknown tool {other:?}."),
    }
}

const SCHEMA_RETRIES: u32 = 2;

/// Runs the examination loop for one claim. Terminates within
/// `max_tool_calls` tool executions plus schema retries; once the budget is
/// exhausted the request is re-issued without tool definitions so the model
/// must answer.
pub fn run_agent(
    claim: &Claim,
    application: &PatentApplication,
    gateway: &Gateway,
    model: &str,
    max_tool_calls: usize,
) -> Result<AgentPrediction> {
    let index = DescriptionIndex::build(&application.description_paragraphs)?;
    let mut messages = vec![ChatMessage::system(examination_prompt(claim))];
    let mut tool_trace: Vec<ToolCall> = Vec::new();
    let mut schema_failures = 0u32;

    loop {
        let mut request = ChatRequest::new(model, messages.clone());
        if tool_trace.len() < max_tool_calls {
            request.tools = tool_definitions();
        }
        let reply = gateway.complete(&request)?;

        if !reply.tool_calls.is_empty() && tool_trace.len() < max_tool_calls {
            let mut assistant = ChatMessage::assistant(reply.content.clone().unwrap_or_default());
            assistant.tool_calls = reply.tool_calls.clone();
            messages.push(assistant);
            for call in &reply.tool_calls {
                let response_text = if tool_trace.len() < max_tool_calls {
                    execute_tool(&call.name, &call.arguments, application, &index)
                } else {
                    "Tool budget exhausted; reply with your final verdict.".to_string()
                };
                tool_trace.push(ToolCall {
                    tool_name: call.name.clone(),
                    arguments: call.arguments.clone(),
                    response_text: response_text.clone(),
                });
                messages.push(ChatMessage::tool(call.id.clone(), response_text));
            }
            continue;
        }

        let content = reply.content.clone().unwrap_or_default();
        match parse_verdict(&content) {
            Ok((claim_likelihood, probability, reasons)) => {
                return Ok(AgentPrediction {
                    application_id: application.application_id.clone(),
                    claim_number: claim.number,
                    claim_likelihood,
                    probability,
                    reasons,
                    tool_trace,
                });
            }
            Err(e) if schema_failures < SCHEMA_RETRIES => {
                log::warn!(
                    "{} claim {}: verdict rejected ({e}), retrying",
                    application.application_id,
                    claim.number
                );
                schema_failures += 1;
                messages.push(ChatMessage::assistant(content));
                messages.push(ChatMessage::user(
                    "That reply was not a valid verdict. Reply with only the JSON verdict in the \
                     required schema.",
                ));
            }
            Err(e) => {
                return Err(Error::ExtractionFailure {
                    application_id: application.application_id.clone(),
                    reason: format!(
                        "claim {}: verdict failed schema validation after {} retries: {e}",
                        claim.number, SCHEMA_RETRIES
                    ),
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prompt_fills_all_placeholders() {
        let claim = Claim::from_text(1, "A widget comprising a part.", "app1");
        let p = examination_prompt(&claim);
        for placeholder in
            ["{indefiniteness_categories}", "{output_schema}", "{likelihood_phrases}", "{claim}"]
        {
            assert!(!p.contains(placeholder), "unfilled {placeholder}");
        }
        assert!(p.contains("A widget comprising a part."));
        assert!(p.contains("almost no chance"));
        assert!(p.contains("antecedent_basis"));
        // parse-only categories never offered to the examiner
        assert!(!p.contains("- dependence:"));
        assert!(!p.contains("- other:"));
    }

    #[test]
    fn verdict_parses_with_phrase_mapping() {
        let content = r#"{"likelihood": "likely", "reasons": [
            {"confidence": "highly likely", "reasoning": "no antecedent",
             "category": "antecedent basis", "recitations": ["the part"]}]}"#;
        let (phrase, p, reasons) = parse_verdict(content).unwrap();
        assert_eq!(phrase, "likely");
        assert!((p - 0.70).abs() < 1e-12);
        assert_eq!(reasons.len(), 1);
        assert_eq!(reasons[0].category, IndefinitenessCategory::AntecedentBasis);
        assert!((reasons[0].probability - 0.90).abs() < 1e-12);
    }

    #[test]
    fn verdict_rejects_malformed_json() {
        assert!(parse_verdict("I think the claim is fine.").is_err());
        assert!(parse_verdict(r#"{"reasons": []}"#).is_err());
    }

    #[test]
    fn description_search_ranks_by_overlap() {
        let paragraphs = vec![
            "The turbine blade rotates at high speed.".to_string(),
            "A cooling fluid passes through the channel.".to_string(),
            "The blade root attaches the turbine blade to the disk.".to_string(),
        ];
        let index = DescriptionIndex::build(&paragraphs).unwrap();
        let hits = index.search("turbine blade", 5);
        assert!(!hits.is_empty());
        assert!(hits.iter().all(|&(i, _)| i != 1));
        let miss = index.search("zymurgy", 5);
        assert!(miss.is_empty());
    }

    #[test]
    fn tool_execution_handles_missing_claim() {
        let application = PatentApplication {
            application_id: "app1".to_string(),
            filing_date: chrono::NaiveDate::from_ymd_opt(2016, 1, 1).unwrap(),
            cpc_codes: Vec::new(),
            claims: vec![Claim::from_text(1, "A widget.", "app1")],
            description_paragraphs: vec!["A widget has a part.".to_string()],
            office_action_refs: Vec::new(),
        };
        let index = DescriptionIndex::build(&application.description_paragraphs).unwrap();
        let found = execute_tool("get_claim", r#"{"claim_number": 1}"#, &application, &index);
        assert_eq!(found, "Claim 1: A widget.");
        let missing = execute_tool("get_claim", r#"{"claim_number": 9}"#, &application, &index);
        assert!(missing.contains("No claim 9"));
        let bad = execute_tool("get_claim", "not json", &application, &index);
        assert!(bad.starts_with("Tool error"));
    }
}
