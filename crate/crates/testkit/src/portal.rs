//! In-memory patent-portal fixture served over the mock HTTP server.

use serde_json::{json, Value};

use crate::llm::{EXTRACT_MARKER_END, EXTRACT_MARKER_START};
use crate::server::{Request, Response};

#[derive(Debug, Clone)]
pub struct FixtureApplication {
    pub application_id: String,
    /// ISO date
    pub filing_date: String,
    pub cpc_codes: Vec<String>,
    pub claims: Vec<String>,
    pub description_paragraphs: Vec<String>,
    pub oa_mail_date: String,
    /// (heading, body) pairs
    pub oa_sections: Vec<(String, String)>,
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl FixtureApplication {
    pub fn claims_xml(&self) -> String {
        let mut out = String::from("<claims>");
        for (i, text) in self.claims.iter().enumerate() {
            out.push_str(&format!(
                "<claim num=\"{}\"><claim-text>{}</claim-text></claim>",
                i + 1,
                xml_escape(text)
            ));
        }
        out.push_str("</claims>");
        out
    }

    pub fn spec_xml(&self) -> String {
        let mut out = String::from("<doc><heading>Description</heading>");
        for (i, para) in self.description_paragraphs.iter().enumerate() {
            out.push_str(&format!("<p>[{:04}] {}</p>", i + 1, xml_escape(para)));
        }
        out.push_str("</doc>");
        out
    }

    pub fn oa_xml(&self) -> String {
        let mut out = String::from("<doc>");
        for (heading, body) in &self.oa_sections {
            out.push_str(&format!(
                "<heading>{}</heading><p>{}</p>",
                xml_escape(heading),
                xml_escape(body)
            ));
        }
        out.push_str("</doc>");
        out
    }

    fn meta(&self) -> Value {
        json!({
            "applicationId": self.application_id,
            "filingDate": self.filing_date,
            "cpcCodes": self.cpc_codes,
        })
    }

    fn documents(&self) -> Value {
        json!({ "documents": [
            { "documentId": format!("{}-clm", self.application_id),
              "documentType": "CLM", "date": self.filing_date },
            { "documentId": format!("{}-spec", self.application_id),
              "documentType": "SPEC", "date": self.filing_date },
            { "documentId": format!("{}-oa1", self.application_id),
              "documentType": "CTNF", "date": self.oa_mail_date },
        ]})
    }
}

/// A deterministic synthetic portal: even-indexed applications receive a
/// §112(b) rejection (with an embedded extraction script), odd-indexed ones
/// are clean. Filing years cycle 2014-2023.
pub fn standard_fixture(n_apps: usize) -> Vec<FixtureApplication> {
    (0..n_apps)
        .map(|i| {
            let application_id = format!("app{i:04}");
            let year = 2014 + (i % 10) as i32;
            let indefinite = i % 2 == 0;
            let claims = vec![
                format!(
                    "A system for processing text stream {i}, comprising: a processor; and a \
                     memory coupled to the processor."
                ),
                "The system of claim 1, wherein the processor is substantially fast.".to_string(),
                "The system of claim 1, wherein the widget is coupled to the memory.".to_string(),
                "The system of claim 2, further comprising a display.".to_string(),
                format!(
                    "A method of processing a parent text stream {i}, comprising receiving an \
                     input and emitting an output."
                ),
            ];
            let description_paragraphs = vec![
                format!("The present disclosure relates to text processing system {i}."),
                "The processor executes instructions stored in the memory.".to_string(),
                "In some embodiments the display shows the emitted output.".to_string(),
            ];
            let oa_sections = if indefinite {
                let record = json!({
                    "rejectedClaims": ["2-3"],
                    "rejectionReasons": [
                        {
                            "reasonText": "The term 'substantially fast' in claim 2 is a relative \
                                           term which renders the claim indefinite.",
                            "reasonContext": "",
                            "claims": [2],
                            "reasonCategory": "relative_term",
                            "claimRecitations": ["substantially fast"]
                        },
                        {
                            "reasonText": "There is insufficient antecedent basis for 'the widget' \
                                           in claim 3.",
                            "reasonContext": "",
                            "claims": [3],
                            "reasonCategory": "antecedent_basis",
                            "claimRecitations": ["the widget"]
                        }
                    ]
                });
                vec![
                    (
                        "Claim Rejections - 35 USC § 112".to_string(),
                        format!(
                            "Claims 2-3 are rejected under 35 U.S.C. 112(b) as being indefinite. \
                             {EXTRACT_MARKER_START}{record}{EXTRACT_MARKER_END}"
                        ),
                    ),
                    (
                        "Claim Rejections - 35 USC § 103".to_string(),
                        "Claims 1 and 5 are rejected over the prior art.".to_string(),
                    ),
                ]
            } else {
                vec![(
                    "Claim Rejections - 35 USC § 103".to_string(),
                    "Claims 1-5 are rejected over the prior art of record.".to_string(),
                )]
            };
            FixtureApplication {
                application_id,
                filing_date: format!("{year}-03-15"),
                cpc_codes: vec!["G06F40/20".to_string()],
                claims,
                description_paragraphs,
                oa_mail_date: format!("{}-06-01", year + 1),
                oa_sections,
            }
        })
        .collect()
}

/// HTTP handler implementing the portal JSON API over a fixture.
pub fn portal_handler(apps: Vec<FixtureApplication>) -> impl Fn(&Request) -> Response {
    move |request: &Request| {
        let path = request.path.as_str();
        if path == "/api/applications" {
            let prefix = request.query.get("cpcPrefix").cloned().unwrap_or_default();
            let min_date = request.query.get("minFilingDate").cloned().unwrap_or_default();
            let matches: Vec<Value> = apps
                .iter()
                .filter(|a| a.cpc_codes.iter().any(|c| c.starts_with(&prefix)))
                .filter(|a| a.filing_date.as_str() >= min_date.as_str())
                .map(|a| a.meta())
                .collect();
            return Response::json(&json!({ "applications": matches }));
        }
        if let Some(rest) = path.strip_prefix("/api/applications/") {
            if let Some(id) = rest.strip_suffix("/documents") {
                return match apps.iter().find(|a| a.application_id == id) {
                    Some(app) => Response::json(&app.documents()),
                    None => Response::status(404),
                };
            }
            return match apps.iter().find(|a| a.application_id == rest) {
                Some(app) => Response::json(&app.meta()),
                None => Response::status(404),
            };
        }
        if let Some(rest) = path.strip_prefix("/api/documents/") {
            let Some(doc_id) = rest.strip_suffix(".xml") else {
                return Response::status(404);
            };
            for app in &apps {
                let id = &app.application_id;
                if doc_id == format!("{id}-clm") {
                    return Response::xml(app.claims_xml());
                }
                if doc_id == format!("{id}-spec") {
                    return Response::xml(app.spec_xml());
                }
                if doc_id == format!("{id}-oa1") {
                    return Response::xml(app.oa_xml());
                }
            }
            return Response::status(404);
        }
        Response::status(404)
    }
}
