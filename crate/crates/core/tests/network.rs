//! Integration tests for the network-facing paths, served by the in-process
//! mock servers.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use claimscope::classifiers::agent::run_agent;
use claimscope::eval::judge_pair;
use claimscope::gateway::{ChatMessage, ChatRequest, Gateway, GatewayConfig};
use claimscope::ingest::{PortalClient, PortalConfig};
use claimscope::oa_parser::{extract_rejections, finalize_labels, select_112_sections};
use claimscope::IndefinitenessCategory;
use claimscope_testkit::{
    auto_llm, content_response, grade_response, portal_handler, standard_fixture, tool_call_response,
    MockServer, Response, ScriptedLlm,
};

fn gateway_for(server: &MockServer, cache_dir: Option<std::path::PathBuf>) -> Gateway {
    let config = GatewayConfig {
        endpoint: server.url(),
        cache_dir,
        backoff_base_ms: 1,
        ..GatewayConfig::default()
    };
    Gateway::new(config).unwrap()
}

#[test]
fn gateway_completes_and_caches() {
    let server = MockServer::start(|_req| Response::json(&content_response("hello there")));
    let cache = tempfile::tempdir().unwrap();
    let gateway = gateway_for(&server, Some(cache.path().to_path_buf()));
    let request = ChatRequest::new("test-model", vec![ChatMessage::user("hi")]);

    let first = gateway.complete(&request).unwrap();
    assert_eq!(first.content.as_deref(), Some("hello there"));
    assert_eq!(server.request_count(), 1);

    let second = gateway.complete(&request).unwrap();
    assert_eq!(first.content, second.content);
    assert_eq!(server.request_count(), 1, "cache hit must not touch the network");
}

#[test]
fn gateway_retries_on_server_error() {
    let hits = Arc::new(AtomicUsize::new(0));
    let hits_in = hits.clone();
    let server = MockServer::start(move |_req| {
        if hits_in.fetch_add(1, Ordering::SeqCst) < 2 {
            Response::status(500)
        } else {
            Response::json(&content_response("recovered"))
        }
    });
    let gateway = gateway_for(&server, None);
    let reply = gateway
        .complete(&ChatRequest::new("m", vec![ChatMessage::user("x")]))
        .unwrap();
    assert_eq!(reply.content.as_deref(), Some("recovered"));
    assert_eq!(hits.load(Ordering::SeqCst), 3);
}

fn fixture_bundle(
    fixture: Vec<claimscope_testkit::FixtureApplication>,
    id: &str,
) -> (claimscope::ingest::DocumentBundle, MockServer, tempfile::TempDir) {
    let server = MockServer::start(portal_handler(fixture));
    let cache = tempfile::tempdir().unwrap();
    let client = PortalClient::new(PortalConfig::new(server.url(), cache.path()));
    let bundle = client.fetch_document_bundle(id).unwrap();
    (bundle, server, cache)
}

#[test]
fn extraction_retry_is_counted_and_recovers() {
    let record = r#"{"rejectedClaims": [2], "rejectionReasons": [
        {"reasonText": "The term 'substantially fast' is relative.", "reasonContext": "",
         "claims": [2], "reasonCategory": "relative_term",
         "claimRecitations": ["substantially fast"]}]}"#;
    let script = ScriptedLlm::new(vec![
        content_response("sorry, here is prose instead of json"),
        content_response(r#"{"wrong": "shape"}"#),
        content_response(record),
    ]);
    let server = MockServer::start(move |req| script.handle(req));
    let gateway = gateway_for(&server, None);

    let (bundle, _portal, _cache) = fixture_bundle(standard_fixture(2), "app0000");
    let sections = select_112_sections(&bundle.first_office_action);
    assert_eq!(sections.len(), 1);
    let parsed = extract_rejections(&sections, &gateway, "m", 3).unwrap();
    assert_eq!(parsed.rejection_reasons.len(), 1);
    assert_eq!(server.request_count(), 3, "two invalid replies then the valid one");
}

#[test]
fn extraction_gives_up_after_retry_budget() {
    let server = MockServer::start(|_req| Response::json(&content_response("still not json")));
    let gateway = gateway_for(&server, None);
    let (bundle, _portal, _cache) = fixture_bundle(standard_fixture(2), "app0000");
    let sections = select_112_sections(&bundle.first_office_action);
    let err = extract_rejections(&sections, &gateway, "m", 1).unwrap_err();
    assert!(matches!(err, claimscope::Error::ExtractionFailure { .. }));
    assert_eq!(server.request_count(), 2);
}

#[test]
fn agent_immediate_verdict_has_empty_trace() {
    let verdict = r#"{"likelihood": "unlikely", "reasons": []}"#;
    let script = ScriptedLlm::new(vec![content_response(verdict)]);
    let server = MockServer::start(move |req| script.handle(req));
    let gateway = gateway_for(&server, None);
    let (bundle, _portal, _cache) = fixture_bundle(standard_fixture(2), "app0001");

    let prediction =
        run_agent(&bundle.application.claims[0], &bundle.application, &gateway, "m", 10).unwrap();
    assert!(prediction.tool_trace.is_empty());
    assert_eq!(prediction.claim_likelihood, "unlikely");
    assert!((prediction.probability - 0.20).abs() < 1e-12);
}

#[test]
fn agent_scripted_tool_call_recorded() {
    let script = ScriptedLlm::new(vec![
        tool_call_response(&[("call_1", "get_claim", r#"{"claim_number": 1}"#)]),
        content_response(
            r#"{"likelihood": "likely", "reasons": [
                {"confidence": "highly likely", "reasoning": "relative term",
                 "category": "relative_term", "recitations": ["substantially fast"]}]}"#,
        ),
    ]);
    let server = MockServer::start(move |req| script.handle(req));
    let gateway = gateway_for(&server, None);
    let (bundle, _portal, _cache) = fixture_bundle(standard_fixture(2), "app0001");

    let prediction =
        run_agent(&bundle.application.claims[1], &bundle.application, &gateway, "m", 10).unwrap();
    assert_eq!(prediction.tool_trace.len(), 1);
    assert_eq!(prediction.tool_trace[0].tool_name, "get_claim");
    assert!(prediction.tool_trace[0].response_text.contains(&bundle.application.claims[0].text));
    assert_eq!(prediction.reasons.len(), 1);
    assert_eq!(prediction.reasons[0].category, IndefinitenessCategory::RelativeTerm);
}

#[test]
fn agent_terminates_within_tool_budget() {
    // a model that calls tools forever: the loop must cut it off
    let server = MockServer::start(|req| {
        let body: serde_json::Value = serde_json::from_str(&req.body).unwrap();
        let has_tools = body.get("tools").is_some();
        if has_tools {
            Response::json(&tool_call_response(&[(
                "call_x",
                "search_description",
                r#"{"query": "processor"}"#,
            )]))
        } else {
            Response::json(&content_response(r#"{"likelihood": "about even", "reasons": []}"#))
        }
    });
    let gateway = gateway_for(&server, None);
    let (bundle, _portal, _cache) = fixture_bundle(standard_fixture(2), "app0001");
    let prediction =
        run_agent(&bundle.application.claims[0], &bundle.application, &gateway, "m", 3).unwrap();
    assert_eq!(prediction.tool_trace.len(), 3);
    assert_eq!(prediction.claim_likelihood, "about even");
}

#[test]
fn judge_pair_grades_through_logprobs() {
    let server = MockServer::start(|req| {
        let body: serde_json::Value = serde_json::from_str(&req.body).unwrap();
        if body.get("logprobs").and_then(serde_json::Value::as_bool) == Some(true) {
            // mass on grades 4 and 5, 1:3 ratio
            Response::json(&grade_response([0.0, 0.0, 0.0, 0.2, 0.6]))
        } else {
            Response::json(&content_response("Both reasons address the same relative term."))
        }
    });
    let gateway = gateway_for(&server, None);
    let verdict = judge_pair(
        "The term 'substantially' is relative.",
        "'substantially fast' lacks a comparison point.",
        &gateway,
        "judge-model",
    )
    .unwrap();
    // expected grade = (4*0.2 + 5*0.6) / 0.8 = 4.75 → norm 93.75
    assert!((verdict.sim - 93.75).abs() < 1e-9);
    assert!(!verdict.analysis_text.is_empty());
}

#[test]
fn portal_search_filters_by_filing_date() {
    let mut fixture = standard_fixture(3);
    fixture[0].filing_date = "2012-05-01".to_string();
    fixture[1].filing_date = "2013-12-31".to_string();
    let server = MockServer::start(portal_handler(fixture));
    let cache = tempfile::tempdir().unwrap();
    let client = PortalClient::new(PortalConfig::new(server.url(), cache.path()));
    let ids = client
        .search_seed_applications("G06F40", "2014-01-01".parse().unwrap(), true)
        .unwrap();
    assert_eq!(ids, vec!["app0002".to_string()]);
}

#[test]
fn bundle_fetch_is_idempotent_and_cached() {
    let server = MockServer::start(portal_handler(standard_fixture(1)));
    let cache = tempfile::tempdir().unwrap();
    let client = PortalClient::new(PortalConfig::new(server.url(), cache.path()));

    let first = client.fetch_document_bundle("app0000").unwrap();
    let after_first = server.request_count();
    assert!(after_first > 0);
    let second = client.fetch_document_bundle("app0000").unwrap();
    assert_eq!(first, second);
    assert_eq!(server.request_count(), after_first, "warm cache performs zero requests");

    assert_eq!(first.application.claims.len(), 5);
    assert_eq!(first.first_office_action.mail_date.to_string(), "2015-06-01");
    first.validate().unwrap();
}

#[test]
fn missing_document_is_reported() {
    let server = MockServer::start(|req| {
        if req.path == "/api/applications/app-x" {
            Response::json(&serde_json::json!({
                "applicationId": "app-x", "filingDate": "2016-01-01", "cpcCodes": ["G06F40/20"]
            }))
        } else if req.path == "/api/applications/app-x/documents" {
            // no claims document
            Response::json(&serde_json::json!({ "documents": [
                { "documentId": "d1", "documentType": "CTNF", "date": "2017-01-01" },
                { "documentId": "d2", "documentType": "SPEC", "date": "2016-01-01" },
            ]}))
        } else {
            Response::status(404)
        }
    });
    let cache = tempfile::tempdir().unwrap();
    let client = PortalClient::new(PortalConfig::new(server.url(), cache.path()));
    let err = client.fetch_document_bundle("app-x").unwrap_err();
    assert!(matches!(err, claimscope::Error::MissingDocument { .. }));
}

#[test]
fn end_to_end_extraction_over_fixture() {
    let llm = MockServer::start(auto_llm);
    let gateway = gateway_for(&llm, None);
    let (bundle, _portal, _cache) = fixture_bundle(standard_fixture(2), "app0000");

    let sections = select_112_sections(&bundle.first_office_action);
    let record = extract_rejections(&sections, &gateway, "m", 2).unwrap();
    let rows = finalize_labels(&record, &bundle.application, 0.8);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].claim.number, 2);
    assert_eq!(rows[0].reasons[0].category, IndefinitenessCategory::RelativeTerm);
    assert_eq!(rows[1].claim.number, 3);
    assert_eq!(rows[1].reasons[0].category, IndefinitenessCategory::AntecedentBasis);
    // recitations located in the claim text
    let span = &rows[0].reasons[0].recitation_spans[0];
    let chars: Vec<char> = rows[0].claim.text.chars().collect();
    let matched: String = chars[span.start..span.end].iter().collect();
    assert_eq!(matched.to_lowercase(), "substantially fast");
}
