//! XML → Markdown/section conversion for portal documents.

use quick_xml::events::Event;
use quick_xml::Reader;

use super::OaSection;
use crate::error::{Error, Result};

fn xml_error(reader: &Reader<&[u8]>, message: impl ToString) -> Error {
    Error::Xml { offset: reader.buffer_position(), message: message.to_string() }
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Converts a portal XML document into Markdown text plus heading-delimited
/// sections. `<heading>` starts a section, `<p>` adds a paragraph, bold and
/// italics render as Markdown; underline has no Markdown equivalent and is
/// dropped with a warning. Paragraphs before the first heading land in a
/// section with an empty heading.
pub fn convert_xml_to_text(xml: &[u8]) -> Result<(String, Vec<OaSection>)> {
    let mut reader = Reader::from_reader(xml);
    let mut buf = Vec::new();
    let mut sections: Vec<OaSection> = Vec::new();
    let mut markdown: Vec<String> = Vec::new();
    let mut in_heading = false;
    let mut heading_buf = String::new();
    let mut text_buf = String::new();
    let mut underline_warned = false;
    let mut depth = 0usize;

    loop {
        match reader.read_event_into(&mut buf) {
            Ok(Event::Start(e)) => {
                depth += 1;
                match e.name().as_ref() {
                b"heading" => {
                    in_heading = true;
                    heading_buf.clear();
                }
                b"p" | b"claim-text" => text_buf.clear(),
                b"b" => text_buf.push_str("**"),
                b"i" => text_buf.push('*'),
                b"u" => {
                    if !underline_warned {
                        log::warn!("underline markup has no Markdown rendering; formatting dropped");
                        underline_warned = true;
                    }
                }
                _ => {}
                }
            }
            Ok(Event::End(e)) => {
                depth = depth.saturating_sub(1);
                match e.name().as_ref() {
                b"heading" => {
                    in_heading = false;
                    let heading = collapse_whitespace(&heading_buf);
                    markdown.push(format!("# {heading}"));
                    sections.push(OaSection { heading, text: String::new() });
                }
                b"p" | b"claim-text" => {
                    let para = collapse_whitespace(&text_buf);
                    if !para.is_empty() {
                        markdown.push(para.clone());
                        if sections.is_empty() {
                            sections.push(OaSection { heading: String::new(), text: String::new() });
                        }
                        let section = sections.last_mut().expect("section just ensured");
                        if !section.text.is_empty() {
                            section.text.push_str("\n\n");
                        }
                        section.text.push_str(&para);
                    }
                    text_buf.clear();
                }
                b"b" => text_buf.push_str("**"),
                b"i" => text_buf.push('*'),
                _ => {}
                }
            }
            Ok(Event::Text(t)) => {
                let text = t.unescape().map_err(|e| xml_error(&reader, e))?;
                if in_heading {
                    heading_buf.push_str(&text);
                } else {
                    text_buf.push_str(&text);
                }
            }
            Ok(Event::Eof) => {
                if depth > 0 {
                    return Err(xml_error(&reader, format!("{depth} unclosed elements at end of input")));
                }
                break;
            }
            Ok(_) => {}
            Err(e) => return Err(xml_error(&reader, e)),
        }
        buf.clear();
    }
    Ok((markdown.join("\n\n"), sections))
}

/// Extracts `(claim number, claim text)` pairs from a claims document. Claim
/// elements carry a `num`/`number` attribute; all descendant text joins with
/// single spaces.
pub fn parse_claims_xml(xml: &[u8]) -> Result<Vec<(u32, String)>> {
    let mut reader = Reader::from_reader(xml);
    let mut buf = Vec::new();
    let mut claims = Vec::new();
    let mut current: Option<(u32, String)> = None;
    let mut depth = 0usize;

    loop {
        match reader.read_event_into(&mut buf) {
            Ok(Event::Start(e)) => {
                depth += 1;
                if e.name().as_ref() != b"claim" {
                    buf.clear();
                    continue;
                }
                let mut number = None;
                for attr in e.attributes() {
                    let attr = attr.map_err(|e| xml_error(&reader, e))?;
                    if matches!(attr.key.as_ref(), b"num" | b"number") {
                        let value = String::from_utf8_lossy(&attr.value).into_owned();
                        number = Some(
                            value
                                .trim_start_matches('0')
                                .parse::<u32>()
                                .map_err(|_| xml_error(&reader, format!("bad claim number {value:?}")))?,
                        );
                    }
                }
                let number =
                    number.ok_or_else(|| xml_error(&reader, "claim element without number"))?;
                current = Some((number, String::new()));
            }
            Ok(Event::End(e)) => {
                depth = depth.saturating_sub(1);
                if e.name().as_ref() == b"claim" {
                    if let Some((number, text)) = current.take() {
                        claims.push((number, text.trim().to_string()));
                    }
                }
            }
            Ok(Event::Text(t)) => {
                if let Some((_, text)) = current.as_mut() {
                    let piece = t.unescape().map_err(|e| xml_error(&reader, e))?;
                    let piece = piece.trim();
                    if piece.is_empty() {
                        buf.clear();
                        continue;
                    }
                    if !text.is_empty() && !text.ends_with(' ') {
                        text.push(' ');
                    }
                    text.push_str(piece);
                }
            }
            Ok(Event::Eof) => {
                if depth > 0 {
                    return Err(xml_error(&reader, format!("{depth} unclosed elements at end of input")));
                }
                break;
            }
            Ok(_) => {}
            Err(e) => return Err(xml_error(&reader, e)),
        }
        buf.clear();
    }
    claims.sort_by_key(|(n, _)| *n);
    Ok(claims)
}
