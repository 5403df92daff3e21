//! Patent-office data portal client: seed application search, document
//! download with disk caching, first-office-action selection, and XML → text
//! conversion.
//!
//! The portal wire format is a small JSON API:
//!
//! - `GET {base}/api/applications?cpcPrefix=P&minFilingDate=D&requireRejection=B`
//!   → `{"applications": [{"applicationId", "filingDate", "cpcCodes"}]}`
//! - `GET {base}/api/applications/{id}` → one application object as above
//! - `GET {base}/api/applications/{id}/documents`
//!   → `{"documents": [{"documentId", "documentType", "date"}]}` where
//!   `documentType` is one of `CTNF`/`CTFR` (non-final/final rejection),
//!   `CLM` (claims), `SPEC` (specification)
//! - `GET {base}/api/documents/{documentId}.xml` → document XML

mod xml;

use std::fs;
use std::path::PathBuf;
use std::time::Duration;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::{segment_description_paragraphs, Claim, PatentApplication};
use crate::error::{Error, Result};

pub use xml::{convert_xml_to_text, parse_claims_xml};

/// One heading-delimited section of a converted document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OaSection {
    pub heading: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfficeActionDocument {
    pub document_id: String,
    pub application_id: String,
    pub mail_date: NaiveDate,
    pub full_text: String,
    pub sections: Vec<OaSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentBundle {
    pub application: PatentApplication,
    pub first_office_action: OfficeActionDocument,
    pub claims_doc_date: NaiveDate,
    pub spec_doc_date: NaiveDate,
}

impl DocumentBundle {
    pub fn validate(&self) -> Result<()> {
        if self.claims_doc_date > self.first_office_action.mail_date
            || self.spec_doc_date > self.first_office_action.mail_date
        {
            return Err(Error::Invalid(format!(
                "{}: claim/spec document dated after the first office action",
                self.application.application_id
            )));
        }
        Ok(())
    }
}

/// Why an application was dropped during ingestion; persisted as one JSON
/// line per skip.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkipRecord {
    pub application_id: String,
    pub reason: String,
}

pub fn append_skip(path: &std::path::Path, record: &SkipRecord) -> Result<()> {
    use std::io::Write;
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut file = fs::OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(file, "{}", serde_json::to_string(record)?)?;
    Ok(())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ApplicationMeta {
    pub application_id: String,
    pub filing_date: NaiveDate,
    #[serde(default)]
    pub cpc_codes: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
struct SearchResponse {
    applications: Vec<ApplicationMeta>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DocumentMeta {
    pub document_id: String,
    pub document_type: String,
    pub date: NaiveDate,
}

#[derive(Debug, Clone, Deserialize)]
struct DocumentsResponse {
    documents: Vec<DocumentMeta>,
}

/// The chronologically first office action (`CTNF`/`CTFR`); same-day ties
/// break by document ID.
pub fn select_first_office_action(documents: &[DocumentMeta]) -> Option<&DocumentMeta> {
    documents
        .iter()
        .filter(|d| d.document_type == "CTNF" || d.document_type == "CTFR")
        .min_by(|a, b| (a.date, &a.document_id).cmp(&(b.date, &b.document_id)))
}

/// The latest document of `doc_type` dated on or before `cutoff`.
pub fn select_latest_on_or_before<'a>(
    documents: &'a [DocumentMeta],
    doc_type: &str,
    cutoff: NaiveDate,
) -> Option<&'a DocumentMeta> {
    documents
        .iter()
        .filter(|d| d.document_type == doc_type && d.date <= cutoff)
        .max_by(|a, b| (a.date, &a.document_id).cmp(&(b.date, &b.document_id)))
}

#[derive(Debug, Clone)]
pub struct PortalConfig {
    pub base_url: String,
    pub api_key_env: Option<String>,
    pub cache_dir: PathBuf,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
}

impl PortalConfig {
    pub fn new(base_url: impl Into<String>, cache_dir: impl Into<PathBuf>) -> Self {
        PortalConfig {
            base_url: base_url.into(),
            api_key_env: None,
            cache_dir: cache_dir.into(),
            max_retries: 3,
            backoff_base_ms: 250,
        }
    }
}

pub struct PortalClient {
    config: PortalConfig,
    http: reqwest::blocking::Client,
}

impl PortalClient {
    pub fn new(config: PortalConfig) -> Self {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .expect("http client construction cannot fail with static options");
        PortalClient { config, http }
    }

    fn get(&self, path: &str, query: &[(&str, String)]) -> Result<reqwest::blocking::Response> {
        let url = format!("{}{}", self.config.base_url.trim_end_matches('/'), path);
        let mut last_err: Option<Error> = None;
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                let delay = self.config.backoff_base_ms * (1 << (attempt - 1));
                std::thread::sleep(Duration::from_millis(delay));
            }
            let mut req = self.http.get(&url).query(query);
            if let Some(env) = &self.config.api_key_env {
                if let Ok(key) = std::env::var(env) {
                    req = req.header("X-API-KEY", key);
                }
            }
            match req.send() {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        return Ok(resp);
                    }
                    let remote = Error::Remote {
                        status: status.as_u16(),
                        message: resp.text().unwrap_or_default(),
                    };
                    if status.as_u16() == 429 || status.is_server_error() {
                        last_err = Some(remote);
                        continue;
                    }
                    return Err(remote);
                }
                Err(e) => last_err = Some(Error::Transport(e.to_string())),
            }
        }
        Err(last_err.unwrap_or_else(|| Error::Transport("request failed".to_string())))
    }

    /// Application IDs matching the CPC prefix, filed on/after
    /// `min_filing_date`, sorted ascending for reproducibility.
    pub fn search_seed_applications(
        &self,
        cpc_prefix: &str,
        min_filing_date: NaiveDate,
        require_rejection: bool,
    ) -> Result<Vec<String>> {
        if cpc_prefix.is_empty() {
            return Err(Error::Config("cpc_prefix must be non-empty".to_string()));
        }
        let resp: SearchResponse = self
            .get(
                "/api/applications",
                &[
                    ("cpcPrefix", cpc_prefix.to_string()),
                    ("minFilingDate", min_filing_date.to_string()),
                    ("requireRejection", require_rejection.to_string()),
                ],
            )?
            .json()
            .map_err(|e| Error::Protocol(format!("search response: {e}")))?;
        let mut ids: Vec<String> = resp
            .applications
            .into_iter()
            .filter(|a| a.filing_date >= min_filing_date)
            .map(|a| a.application_id)
            .collect();
        ids.sort();
        ids.dedup();
        Ok(ids)
    }

    fn application_meta(&self, application_id: &str) -> Result<ApplicationMeta> {
        self.get(&format!("/api/applications/{application_id}"), &[])?
            .json()
            .map_err(|e| Error::Protocol(format!("application metadata: {e}")))
    }

    fn documents(&self, application_id: &str) -> Result<Vec<DocumentMeta>> {
        let resp: DocumentsResponse = self
            .get(&format!("/api/applications/{application_id}/documents"), &[])?
            .json()
            .map_err(|e| Error::Protocol(format!("document listing: {e}")))?;
        Ok(resp.documents)
    }

    fn document_xml(&self, application_id: &str, document_id: &str) -> Result<Vec<u8>> {
        // raw XML is cached next to the normalized bundle for replayability
        let raw_path = self
            .config
            .cache_dir
            .join(application_id)
            .join(format!("{document_id}.xml"));
        if let Ok(bytes) = fs::read(&raw_path) {
            return Ok(bytes);
        }
        let bytes = self
            .get(&format!("/api/documents/{document_id}.xml"), &[])?
            .bytes()
            .map_err(|e| Error::Transport(e.to_string()))?
            .to_vec();
        atomic_write(&raw_path, &bytes)?;
        Ok(bytes)
    }

    fn bundle_cache_path(&self, application_id: &str) -> PathBuf {
        self.config.cache_dir.join(application_id).join("bundle.json")
    }

    /// Downloads and assembles the application's document bundle. The result
    /// is cached on disk; a warm cache performs zero network requests.
    pub fn fetch_document_bundle(&self, application_id: &str) -> Result<DocumentBundle> {
        let cache_path = self.bundle_cache_path(application_id);
        if let Ok(text) = fs::read_to_string(&cache_path) {
            let bundle: DocumentBundle = serde_json::from_str(&text)?;
            return Ok(bundle);
        }

        let meta = self.application_meta(application_id)?;
        let documents = self.documents(application_id)?;
        let missing = |what: &str| Error::MissingDocument {
            application_id: application_id.to_string(),
            missing: what.to_string(),
        };

        let oa_meta = select_first_office_action(&documents).ok_or_else(|| missing("office action"))?;
        let claims_meta = select_latest_on_or_before(&documents, "CLM", oa_meta.date)
            .ok_or_else(|| missing("claims document"))?;
        let spec_meta = select_latest_on_or_before(&documents, "SPEC", oa_meta.date)
            .ok_or_else(|| missing("specification document"))?;

        let oa_xml = self.document_xml(application_id, &oa_meta.document_id)?;
        let (oa_text, oa_sections) = convert_xml_to_text(&oa_xml)?;
        let claims_xml = self.document_xml(application_id, &claims_meta.document_id)?;
        let claims = parse_claims_xml(&claims_xml)?
            .into_iter()
            .map(|(number, text)| Claim::from_text(number, &text, application_id))
            .collect::<Vec<_>>();
        if claims.is_empty() {
            return Err(missing("claims document"));
        }
        let spec_xml = self.document_xml(application_id, &spec_meta.document_id)?;
        let (spec_text, _) = convert_xml_to_text(&spec_xml)?;
        let description_paragraphs = segment_description_paragraphs(&spec_text)?;

        let application = PatentApplication {
            application_id: application_id.to_string(),
            filing_date: meta.filing_date,
            cpc_codes: meta.cpc_codes,
            claims,
            description_paragraphs,
            office_action_refs: documents
                .iter()
                .filter(|d| d.document_type == "CTNF" || d.document_type == "CTFR")
                .map(|d| d.document_id.clone())
                .collect(),
        };
        let bundle = DocumentBundle {
            application,
            first_office_action: OfficeActionDocument {
                document_id: oa_meta.document_id.clone(),
                application_id: application_id.to_string(),
                mail_date: oa_meta.date,
                full_text: oa_text,
                sections: oa_sections,
            },
            claims_doc_date: claims_meta.date,
            spec_doc_date: spec_meta.date,
        };
        bundle.validate()?;
        atomic_write(&cache_path, serde_json::to_string_pretty(&bundle)?.as_bytes())?;
        Ok(bundle)
    }
}

fn atomic_write(path: &std::path::Path, bytes: &[u8]) -> Result<()> {
    let parent = path.parent().ok_or_else(|| Error::Invalid("cache path has no parent".into()))?;
    fs::create_dir_all(parent)?;
    let tmp = parent.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("cache"),
        std::process::id()
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn doc(id: &str, ty: &str, date: &str) -> DocumentMeta {
        DocumentMeta { document_id: id.to_string(), document_type: ty.to_string(), date: d(date) }
    }

    #[test]
    fn first_office_action_is_earliest() {
        let docs = vec![doc("b", "CTNF", "2020-02-01"), doc("a", "CTNF", "2019-05-01")];
        assert_eq!(select_first_office_action(&docs).unwrap().document_id, "a");
    }

    #[test]
    fn same_day_office_actions_tie_break_by_id() {
        let docs = vec![doc("z2", "CTFR", "2019-05-01"), doc("z1", "CTNF", "2019-05-01")];
        assert_eq!(select_first_office_action(&docs).unwrap().document_id, "z1");
    }

    #[test]
    fn latest_claims_before_office_action() {
        let docs = vec![doc("c1", "CLM", "2018-01-01"), doc("c2", "CLM", "2019-06-01")];
        let picked = select_latest_on_or_before(&docs, "CLM", d("2019-05-01")).unwrap();
        assert_eq!(picked.date, d("2018-01-01"));
    }

    #[test]
    fn no_office_action_yields_none() {
        let docs = vec![doc("c1", "CLM", "2018-01-01")];
        assert!(select_first_office_action(&docs).is_none());
    }

    #[test]
    fn bundle_date_invariant_enforced() {
        let oa = OfficeActionDocument {
            document_id: "o".into(),
            application_id: "a".into(),
            mail_date: d("2019-05-01"),
            full_text: String::new(),
            sections: Vec::new(),
        };
        let app = PatentApplication {
            application_id: "a".into(),
            filing_date: d("2015-01-01"),
            cpc_codes: Vec::new(),
            claims: vec![Claim::from_text(1, "A widget.", "a")],
            description_paragraphs: vec!["text".into()],
            office_action_refs: Vec::new(),
        };
        let good = DocumentBundle {
            application: app.clone(),
            first_office_action: oa.clone(),
            claims_doc_date: d("2019-05-01"),
            spec_doc_date: d("2018-01-01"),
        };
        assert!(good.validate().is_ok());
        let bad = DocumentBundle { claims_doc_date: d("2019-06-01"), ..good };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn skip_log_appends_json_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("skips.jsonl");
        for i in 0..2 {
            append_skip(
                &path,
                &SkipRecord { application_id: format!("app{i}"), reason: "missing".into() },
            )
            .unwrap();
        }
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        let first: SkipRecord = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first.application_id, "app0");
    }
}
