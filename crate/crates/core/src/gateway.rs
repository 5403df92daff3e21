//! Single chokepoint for all LLM traffic: chat completion, tool-call rounds,
//! grade-token probability retrieval, deterministic on-disk caching, retry,
//! and a bound on in-flight requests.
//!
//! Wire protocol: OpenAI-compatible chat completions, which serves local
//! inference servers and hosted APIs alike.

use std::fs;
use std::path::PathBuf;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tool_calls: Vec<ToolCallRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_call_id: Option<String>,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> ChatMessage {
        ChatMessage::plain("system", content)
    }
    pub fn user(content: impl Into<String>) -> ChatMessage {
        ChatMessage::plain("user", content)
    }
    pub fn assistant(content: impl Into<String>) -> ChatMessage {
        ChatMessage::plain("assistant", content)
    }
    pub fn tool(tool_call_id: impl Into<String>, content: impl Into<String>) -> ChatMessage {
        ChatMessage {
            role: "tool".into(),
            content: Some(content.into()),
            tool_calls: vec![],
            tool_call_id: Some(tool_call_id.into()),
        }
    }
    fn plain(role: &str, content: impl Into<String>) -> ChatMessage {
        ChatMessage {
            role: role.into(),
            content: Some(content.into()),
            tool_calls: vec![],
            tool_call_id: None,
        }
    }
}

/// A tool call requested by the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolCallRequest {
    pub id: String,
    pub name: String,
    /// JSON-encoded arguments as sent by the model.
    pub arguments: String,
}

/// A function tool offered to the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolDefinition {
    pub name: String,
    pub description: String,
    pub parameters: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tools: Vec<ToolDefinition>,
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_logprobs: Option<u32>,
}

impl ChatRequest {
    pub fn new(model: &str, messages: Vec<ChatMessage>) -> ChatRequest {
        ChatRequest {
            model: model.to_string(),
            messages,
            tools: vec![],
            temperature: 0.0,
            top_logprobs: None,
        }
    }

    /// Content digest of the full request; the cache address.
    pub fn cache_key(&self) -> String {
        let canonical = serde_json::to_string(self).expect("request serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex_string(&hasher.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// The assistant's reply: text and/or tool calls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssistantMessage {
    pub content: Option<String>,
    pub tool_calls: Vec<ToolCallRequest>,
}

/// Unnormalized probabilities over the grade tokens "1".."5".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeDistribution {
    pub probabilities: [f64; 5],
}

impl GradeDistribution {
    pub fn validate(&self) -> Result<()> {
        if self.probabilities.iter().any(|&p| p < 0.0) {
            return Err(Error::Protocol("negative grade probability".into()));
        }
        if self.probabilities.iter().all(|&p| p == 0.0) {
            return Err(Error::GradeExtraction);
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GatewayConfig {
    /// Base URL of the chat-completions endpoint, e.g. "http://host:8000/v1".
    pub endpoint: String,
    /// Environment variable holding the API key; unset means no auth header.
    pub api_key_env: Option<String>,
    pub max_in_flight: usize,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    /// Content-addressed response cache; `None` disables caching.
    pub cache_dir: Option<PathBuf>,
}

impl Default for GatewayConfig {
    fn default() -> GatewayConfig {
        GatewayConfig {
            endpoint: "http://localhost:8000/v1".into(),
            api_key_env: None,
            max_in_flight: 4,
            max_retries: 3,
            backoff_base_ms: 250,
            cache_dir: None,
        }
    }
}

/// Counting semaphore bounding in-flight HTTP requests.
struct Semaphore {
    permits: Mutex<usize>,
    cv: Condvar,
}

impl Semaphore {
    fn new(permits: usize) -> Semaphore {
        Semaphore {
            permits: Mutex::new(permits),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> SemaphoreGuard<'_> {
        let mut permits = self.permits.lock().unwrap();
        while *permits == 0 {
            permits = self.cv.wait(permits).unwrap();
        }
        *permits -= 1;
        SemaphoreGuard { sem: self }
    }
}

struct SemaphoreGuard<'a> {
    sem: &'a Semaphore,
}

impl Drop for SemaphoreGuard<'_> {
    fn drop(&mut self) {
        *self.sem.permits.lock().unwrap() += 1;
        self.sem.cv.notify_one();
    }
}

pub struct Gateway {
    config: GatewayConfig,
    client: reqwest::blocking::Client,
    semaphore: Semaphore,
}

impl Gateway {
    pub fn new(config: GatewayConfig) -> Result<Gateway> {
        if let Some(dir) = &config.cache_dir {
            fs::create_dir_all(dir)?;
        }
        let permits = config.max_in_flight.max(1);
        Ok(Gateway {
            config,
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(300))
                .build()
                .map_err(|e| Error::Transport(e.to_string()))?,
            semaphore: Semaphore::new(permits),
        })
    }

    /// Completes a chat request, consulting the cache first. Cache writes are
    /// atomic (write-temp-then-rename).
    pub fn complete(&self, request: &ChatRequest) -> Result<AssistantMessage> {
        let body = self.raw_response(request)?;
        parse_assistant_message(&body)
    }

    /// Extracts the unnormalized grade probabilities for the tokens "1".."5"
    /// from the top log-probabilities of the first generated token. Bare and
    /// single-leading-space token renderings are summed; missing grades get
    /// probability 0.
    pub fn grade_distribution(&self, request: &ChatRequest) -> Result<GradeDistribution> {
        if request.top_logprobs.is_none() {
            return Err(Error::Config(
                "grade request must ask for top log-probabilities".into(),
            ));
        }
        let body = self.raw_response(request)?;
        parse_grade_distribution(&body)
    }

    fn raw_response(&self, request: &ChatRequest) -> Result<Value> {
        let key = request.cache_key();
        if let Some(dir) = &self.config.cache_dir {
            let path = dir.join(format!("{key}.json"));
            if path.exists() {
                let text = fs::read_to_string(&path)?;
                return Ok(serde_json::from_str(&text)?);
            }
        }
        let body = self.perform_request(request)?;
        if let Some(dir) = &self.config.cache_dir {
            let path = dir.join(format!("{key}.json"));
            let tmp = dir.join(format!("{key}.json.tmp"));
            fs::write(&tmp, serde_json::to_string(&body)?)?;
            fs::rename(&tmp, &path)?;
        }
        Ok(body)
    }

    fn perform_request(&self, request: &ChatRequest) -> Result<Value> {
        let _guard = self.semaphore.acquire();
        let url = format!("{}/chat/completions", self.config.endpoint.trim_end_matches('/'));
        let payload = wire_payload(request);
        let api_key = self
            .config
            .api_key_env
            .as_ref()
            .and_then(|var| std::env::var(var).ok());

        let mut last_error = Error::Transport("no attempts made".into());
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                let delay = self.config.backoff_base_ms * (1u64 << (attempt - 1));
                if delay > 0 {
                    std::thread::sleep(Duration::from_millis(delay));
                }
            }
            let mut builder = self.client.post(&url).json(&payload);
            if let Some(key) = &api_key {
                builder = builder.bearer_auth(key);
            }
            match builder.send() {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        return resp
                            .json::<Value>()
                            .map_err(|e| Error::Protocol(e.to_string()));
                    }
                    let retryable = status.as_u16() == 429 || status.is_server_error();
                    let message = resp.text().unwrap_or_default();
                    last_error = Error::Remote {
                        status: status.as_u16(),
                        message,
                    };
                    if !retryable {
                        return Err(last_error);
                    }
                    log::warn!("llm call attempt {} failed with status {status}", attempt + 1);
                }
                Err(e) => {
                    last_error = Error::Transport(e.to_string());
                    log::warn!("llm call attempt {} transport error: {e}", attempt + 1);
                }
            }
        }
        Err(last_error)
    }
}

fn wire_payload(request: &ChatRequest) -> Value {
    let messages: Vec<Value> = request
        .messages
        .iter()
        .map(|m| {
            let mut obj = serde_json::json!({ "role": m.role });
            if let Some(content) = &m.content {
                obj["content"] = Value::String(content.clone());
            }
            if !m.tool_calls.is_empty() {
                obj["tool_calls"] = Value::Array(
                    m.tool_calls
                        .iter()
                        .map(|tc| {
                            serde_json::json!({
                                "id": tc.id,
                                "type": "function",
                                "function": { "name": tc.name, "arguments": tc.arguments }
                            })
                        })
                        .collect(),
                );
            }
            if let Some(id) = &m.tool_call_id {
                obj["tool_call_id"] = Value::String(id.clone());
            }
            obj
        })
        .collect();
    let mut payload = serde_json::json!({
        "model": request.model,
        "messages": messages,
        "temperature": request.temperature,
    });
    if !request.tools.is_empty() {
        payload["tools"] = Value::Array(
            request
                .tools
                .iter()
                .map(|t| {
                    serde_json::json!({
                        "type": "function",
                        "function": {
                            "name": t.name,
                            "description": t.description,
                            "parameters": t.parameters,
                        }
                    })
                })
                .collect(),
        );
    }
    if let Some(k) = request.top_logprobs {
        payload["logprobs"] = Value::Bool(true);
        payload["top_logprobs"] = Value::from(k);
    }
    payload
}

/// Parses the assistant message out of a chat-completions response body.
pub fn parse_assistant_message(body: &Value) -> Result<AssistantMessage> {
    let message = body
        .pointer("/choices/0/message")
        .ok_or_else(|| Error::Protocol("response missing choices[0].message".into()))?;
    let content = message
        .get("content")
        .and_then(Value::as_str)
        .map(str::to_string);
    let tool_calls = message
        .get("tool_calls")
        .and_then(Value::as_array)
        .map(|calls| {
            calls
                .iter()
                .filter_map(|tc| {
                    Some(ToolCallRequest {
                        id: tc.get("id")?.as_str()?.to_string(),
                        name: tc.pointer("/function/name")?.as_str()?.to_string(),
                        arguments: tc.pointer("/function/arguments")?.as_str()?.to_string(),
                    })
                })
                .collect()
        })
        .unwrap_or_default();
    Ok(AssistantMessage {
        content,
        tool_calls,
    })
}

/// Pulls the grade probabilities from the first generated token's
/// top-logprobs list.
pub fn parse_grade_distribution(body: &Value) -> Result<GradeDistribution> {
    let top = body
        .pointer("/choices/0/logprobs/content/0/top_logprobs")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Protocol("response missing top_logprobs".into()))?;
    let mut probabilities = [0.0f64; 5];
    for entry in top {
        let token = entry.get("token").and_then(Value::as_str).unwrap_or("");
        let logprob = entry.get("logprob").and_then(Value::as_f64);
        let trimmed = token.strip_prefix(' ').unwrap_or(token);
        if trimmed.len() == 1 {
            if let Some(digit) = trimmed.chars().next().unwrap().to_digit(10) {
                if (1..=5).contains(&digit) {
                    if let Some(lp) = logprob {
                        probabilities[digit as usize - 1] += lp.exp();
                    }
                }
            }
        }
    }
    let dist = GradeDistribution { probabilities };
    dist.validate()?;
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cache_key_is_content_deterministic() {
        let a = ChatRequest::new("m", vec![ChatMessage::user("hello")]);
        let b = ChatRequest::new("m", vec![ChatMessage::user("hello")]);
        let c = ChatRequest::new("m", vec![ChatMessage::user("other")]);
        assert_eq!(a.cache_key(), b.cache_key());
        assert_ne!(a.cache_key(), c.cache_key());
    }

    fn logprob_body(entries: &[(&str, f64)]) -> Value {
        let top: Vec<Value> = entries
            .iter()
            .map(|(tok, p)| serde_json::json!({ "token": tok, "logprob": p.ln() }))
            .collect();
        serde_json::json!({
            "choices": [{
                "message": { "content": "4" },
                "logprobs": { "content": [{ "token": entries[0].0, "top_logprobs": top }] }
            }]
        })
    }

    #[test]
    fn grade_exponentiation() {
        let body = logprob_body(&[("4", 0.6), ("5", 0.4)]);
        let dist = parse_grade_distribution(&body).unwrap();
        assert_abs_diff_eq!(dist.probabilities[3], 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(dist.probabilities[4], 0.4, epsilon = 1e-12);
        assert_eq!(dist.probabilities[0], 0.0);
    }

    #[test]
    fn grade_one_hot() {
        let body = logprob_body(&[("3", 1.0)]);
        let dist = parse_grade_distribution(&body).unwrap();
        assert_abs_diff_eq!(dist.probabilities[2], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn grade_elementwise_exp_oracle() {
        let probs = [0.1, 0.2, 0.3, 0.25, 0.15];
        let entries: Vec<(String, f64)> = (1..=5).map(|g| (g.to_string(), probs[g - 1])).collect();
        let refs: Vec<(&str, f64)> = entries.iter().map(|(s, p)| (s.as_str(), *p)).collect();
        let dist = parse_grade_distribution(&logprob_body(&refs)).unwrap();
        for g in 0..5 {
            assert_abs_diff_eq!(dist.probabilities[g], probs[g], epsilon = 1e-12);
        }
    }

    #[test]
    fn leading_space_variants_are_summed() {
        let body = logprob_body(&[("4", 0.3), (" 4", 0.2), ("5", 0.1)]);
        let dist = parse_grade_distribution(&body).unwrap();
        assert_abs_diff_eq!(dist.probabilities[3], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn no_grade_tokens_is_a_failure() {
        let body = logprob_body(&[("yes", 0.9), ("no", 0.1)]);
        assert!(matches!(
            parse_grade_distribution(&body),
            Err(Error::GradeExtraction)
        ));
    }

    #[test]
    fn assistant_message_with_tool_calls() {
        let body = serde_json::json!({
            "choices": [{
                "message": {
                    "content": null,
                    "tool_calls": [{
                        "id": "call_1",
                        "type": "function",
                        "function": { "name": "get_claim", "arguments": "{\"claim_number\":1}" }
                    }]
                }
            }]
        });
        let msg = parse_assistant_message(&body).unwrap();
        assert_eq!(msg.tool_calls.len(), 1);
        assert_eq!(msg.tool_calls[0].name, "get_claim");
    }
}
