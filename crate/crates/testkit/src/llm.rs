//! Chat-completions response builders and deterministic mock model
//! behaviors.

use std::collections::VecDeque;
use std::sync::Mutex;

use serde_json::{json, Value};

use crate::server::{Request, Response};

/// Plain assistant text reply.
pub fn content_response(content: &str) -> Value {
    json!({
        "choices": [{ "message": { "role": "assistant", "content": content } }]
    })
}

/// Assistant reply requesting tool calls.
pub fn tool_call_response(calls: &[(&str, &str, &str)]) -> Value {
    let tool_calls: Vec<Value> = calls
        .iter()
        .map(|(id, name, arguments)| {
            json!({
                "id": id,
                "type": "function",
                "function": { "name": name, "arguments": arguments }
            })
        })
        .collect();
    json!({
        "choices": [{ "message": { "role": "assistant", "content": null, "tool_calls": tool_calls } }]
    })
}

/// Grade reply exposing top log-probabilities over the five grade tokens.
/// `probabilities` need not be normalized; zero entries are omitted.
pub fn grade_response(probabilities: [f64; 5]) -> Value {
    let top: Vec<Value> = probabilities
        .iter()
        .enumerate()
        .filter(|(_, p)| **p > 0.0)
        .map(|(i, p)| json!({ "token": (i + 1).to_string(), "logprob": p.ln() }))
        .collect();
    json!({
        "choices": [{
            "message": { "role": "assistant", "content": "3" },
            "logprobs": { "content": [{ "token": "3", "top_logprobs": top }] }
        }]
    })
}

/// Serves a fixed queue of response bodies in order; extra requests get the
/// last response again. For single-threaded scripted tests.
pub struct ScriptedLlm {
    responses: Mutex<VecDeque<Value>>,
    last: Mutex<Option<Value>>,
}

impl ScriptedLlm {
    pub fn new(responses: Vec<Value>) -> ScriptedLlm {
        ScriptedLlm { responses: Mutex::new(responses.into()), last: Mutex::new(None) }
    }

    pub fn handle(&self, _request: &Request) -> Response {
        let next = self.responses.lock().unwrap().pop_front();
        match next {
            Some(body) => {
                *self.last.lock().unwrap() = Some(body.clone());
                Response::json(&body)
            }
            None => match self.last.lock().unwrap().clone() {
                Some(body) => Response::json(&body),
                None => Response::status(500),
            },
        }
    }
}

fn fnv1a(data: &str) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in data.as_bytes() {
        hash ^= *byte as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Pulls all user-message contents out of a chat-completions request body.
fn user_contents(body: &Value) -> Vec<String> {
    body.get("messages")
        .and_then(Value::as_array)
        .map(|msgs| {
            msgs.iter()
                .filter(|m| m.get("role").and_then(Value::as_str) == Some("user"))
                .filter_map(|m| m.get("content").and_then(Value::as_str))
                .map(str::to_string)
                .collect()
        })
        .unwrap_or_default()
}

fn system_content(body: &Value) -> String {
    body.get("messages")
        .and_then(Value::as_array)
        .and_then(|msgs| {
            msgs.iter()
                .find(|m| m.get("role").and_then(Value::as_str) == Some("system"))
                .and_then(|m| m.get("content").and_then(Value::as_str))
                .map(str::to_string)
        })
        .unwrap_or_default()
}

fn has_tool_message(body: &Value) -> bool {
    body.get("messages")
        .and_then(Value::as_array)
        .map(|msgs| msgs.iter().any(|m| m.get("role").and_then(Value::as_str) == Some("tool")))
        .unwrap_or(false)
}

/// Marker a fixture embeds in office-action text to script the extraction
/// model's reply: everything between `EXTRACT>>>` and `<<<END` is returned
/// verbatim.
pub const EXTRACT_MARKER_START: &str = "EXTRACT>>>";
pub const EXTRACT_MARKER_END: &str = "<<<END";

const LIKELIHOOD_PHRASES: [&str; 11] = [
    "almost no chance",
    "highly unlikely",
    "chances are slight",
    "unlikely",
    "probably not",
    "about even",
    "better than even",
    "likely",
    "very good chance",
    "highly likely",
    "almost certain",
];

/// A fully deterministic mock model suitable for concurrent end-to-end runs:
/// the reply is a pure function of the request body.
///
/// - grade requests (logprobs asked) → distribution seeded by a hash of the
///   conversation
/// - extraction requests → fixture-embedded `EXTRACT>>>…<<<END` payload, or
///   an empty record when no marker is present
/// - examination requests → one `get_claim` call when the claim text
///   contains "parent", then a verdict whose likelihood is hash-seeded and
///   whose reasons flag the token "substantially"
pub fn auto_llm(request: &Request) -> Response {
    let body: Value = match serde_json::from_str(&request.body) {
        Ok(v) => v,
        Err(_) => return Response::status(500),
    };

    if body.get("logprobs").and_then(Value::as_bool) == Some(true) {
        let h = fnv1a(&body["messages"].to_string());
        let mut probabilities = [0.0f64; 5];
        for (i, slot) in probabilities.iter_mut().enumerate() {
            *slot = 0.05 + ((h >> (8 * i)) & 0xff) as f64 / 255.0;
        }
        return Response::json(&grade_response(probabilities));
    }

    let users = user_contents(&body);
    let joined = users.join("\n");
    let system = system_content(&body);

    if let Some(start) = joined.find(EXTRACT_MARKER_START) {
        let after = &joined[start + EXTRACT_MARKER_START.len()..];
        let payload = after.split(EXTRACT_MARKER_END).next().unwrap_or("").trim();
        return Response::json(&content_response(payload));
    }
    if system.contains("rejectedClaims") {
        return Response::json(&content_response(
            r#"{"rejectedClaims": [], "rejectionReasons": []}"#,
        ));
    }

    if system.contains("Examine this patent claim") {
        let claim_line = system
            .lines()
            .rev()
            .find(|l| l.trim_start().starts_with("Claim "))
            .unwrap_or("")
            .to_string();
        if claim_line.contains("parent") && !has_tool_message(&body) {
            return Response::json(&tool_call_response(&[(
                "call_1",
                "get_claim",
                r#"{"claim_number": 1}"#,
            )]));
        }
        let h = fnv1a(&claim_line);
        let likelihood = LIKELIHOOD_PHRASES[(h % 11) as usize];
        let reasons = if claim_line.contains("substantially") {
            json!([{
                "confidence": LIKELIHOOD_PHRASES[5 + (h % 6) as usize],
                "reasoning": "relative term without a point of comparison",
                "category": "relative_term",
                "recitations": ["substantially"]
            }])
        } else {
            json!([])
        };
        let verdict = json!({ "likelihood": likelihood, "reasons": reasons });
        return Response::json(&content_response(&verdict.to_string()));
    }

    // judge analysis turn or anything else: plain text
    Response::json(&content_response("Analysis: the two reasons are compared."))
}
