//! Parser for the supported XML subset.
//!
//! Supported: elements, attributes, character data, CDATA sections, the five
//! named character entities and decimal/hex character references. Comments
//! and processing instructions (including the XML declaration) are skipped.
//! DOCTYPE declarations and unknown entity references are refused rather
//! than resolved. Whitespace-only text between elements is dropped.
//!
//! The full subset is written up in `docs/xml-subset.md`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::doc::{Document, DocumentBuilder, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("malformed XML at line {line}, column {column}: {reason}")]
    MalformedXml {
        /// Byte offset into the input.
        position: usize,
        line: u32,
        column: u32,
        reason: String,
    },
    #[error("unsupported construct at line {line}, column {column}: {construct}")]
    UnsupportedConstruct {
        position: usize,
        line: u32,
        column: u32,
        construct: String,
    },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::MalformedXml { position, .. } => *position,
            ParseError::UnsupportedConstruct { position, .. } => *position,
        }
    }
}

/// Parses a UTF-8 byte sequence (optionally BOM-prefixed) into a [`Document`].
pub fn parse_document(bytes: &[u8], doc_id: u32) -> Result<Document, ParseError> {
    let text = match core::str::from_utf8(bytes) {
        Ok(t) => t,
        Err(e) => {
            let pos = e.valid_up_to();
            let (line, column) = line_col(&bytes[..pos]);
            return Err(ParseError::MalformedXml {
                position: pos,
                line,
                column,
                reason: "input is not valid UTF-8".to_string(),
            });
        }
    };
    Parser::new(text).run(doc_id)
}

fn line_col(prefix: &[u8]) -> (u32, u32) {
    let mut line = 1u32;
    let mut column = 1u32;
    for &b in prefix {
        if b == b'\n' {
            line += 1;
            column = 1;
        } else {
            column += 1;
        }
    }
    (line, column)
}

struct Parser<'a> {
    input: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Self {
        Parser {
            input,
            bytes: input.as_bytes(),
            pos: 0,
        }
    }

    fn malformed(&self, at: usize, reason: impl Into<String>) -> ParseError {
        let (line, column) = line_col(&self.bytes[..at]);
        ParseError::MalformedXml {
            position: at,
            line,
            column,
            reason: reason.into(),
        }
    }

    fn unsupported(&self, at: usize, construct: impl Into<String>) -> ParseError {
        let (line, column) = line_col(&self.bytes[..at]);
        ParseError::UnsupportedConstruct {
            position: at,
            line,
            column,
            construct: construct.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn starts_with(&self, s: &str) -> bool {
        self.bytes[self.pos..].starts_with(s.as_bytes())
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.pos += 1;
        }
    }

    fn run(mut self, doc_id: u32) -> Result<Document, ParseError> {
        let mut builder = DocumentBuilder::new();
        if self.starts_with("\u{feff}") {
            self.pos += 3;
        }
        self.skip_misc()?;
        if self.peek() != Some(b'<') {
            return Err(self.malformed(self.pos, "expected root element"));
        }
        self.parse_element(&mut builder, None)?;
        // Only comments, PIs and whitespace may follow the root.
        self.skip_misc()?;
        if self.pos != self.input.len() {
            return Err(self.malformed(self.pos, "content after root element"));
        }
        builder
            .finish(doc_id)
            .map_err(|e| self.malformed(0, e.to_string()))
    }

    /// Skips whitespace, comments and processing instructions; these are the
    /// only things allowed around the root element.
    fn skip_misc(&mut self) -> Result<(), ParseError> {
        loop {
            self.skip_ws();
            if self.starts_with("<!--") {
                self.skip_comment()?;
            } else if self.starts_with("<?") {
                self.skip_pi()?;
            } else if self.starts_with("<!DOCTYPE") || self.starts_with("<!doctype") {
                return Err(self.unsupported(self.pos, "DOCTYPE declaration".to_string()));
            } else {
                return Ok(());
            }
        }
    }

    fn skip_comment(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        self.pos += 4; // <!--
        match self.input[self.pos..].find("-->") {
            Some(rel) => {
                self.pos += rel + 3;
                Ok(())
            }
            None => Err(self.malformed(start, "unterminated comment")),
        }
    }

    fn skip_pi(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        self.pos += 2; // <?
        match self.input[self.pos..].find("?>") {
            Some(rel) => {
                self.pos += rel + 2;
                Ok(())
            }
            None => Err(self.malformed(start, "unterminated processing instruction")),
        }
    }

    fn parse_name(&mut self) -> Result<&'a str, ParseError> {
        let start = self.pos;
        let rest = &self.input[self.pos..];
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if is_name_start(c) => {}
            _ => return Err(self.malformed(start, "expected a name")),
        }
        let end = chars
            .find(|&(_, c)| !is_name_char(c))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        self.pos = start + end;
        Ok(&rest[..end])
    }

    /// Parses one element (the cursor sits on its `<`). Returns its node id.
    fn parse_element(
        &mut self,
        builder: &mut DocumentBuilder,
        parent: Option<NodeId>,
    ) -> Result<NodeId, ParseError> {
        let open_at = self.pos;
        self.pos += 1; // <
        let name = self.parse_name()?;
        let id = builder.element(parent, name);
        let mut seen_attrs: Vec<&str> = Vec::new();

        // Attributes.
        loop {
            let before = self.pos;
            self.skip_ws();
            match self.peek() {
                Some(b'>') => {
                    self.pos += 1;
                    break;
                }
                Some(b'/') => {
                    if !self.starts_with("/>") {
                        return Err(self.malformed(self.pos, "expected '/>'"));
                    }
                    self.pos += 2;
                    return Ok(id);
                }
                Some(_) if self.pos > before => {
                    let attr_at = self.pos;
                    let attr_name = self.parse_name()?;
                    self.skip_ws();
                    if self.peek() != Some(b'=') {
                        return Err(self.malformed(self.pos, "expected '=' after attribute name"));
                    }
                    self.pos += 1;
                    self.skip_ws();
                    let value = self.parse_attr_value()?;
                    if seen_attrs.contains(&attr_name) {
                        return Err(self.malformed(
                            attr_at,
                            format!("duplicate attribute '{attr_name}'"),
                        ));
                    }
                    seen_attrs.push(attr_name);
                    builder.attribute(id, attr_name, value);
                }
                Some(_) => {
                    return Err(self.malformed(self.pos, "expected whitespace before attribute"))
                }
                None => return Err(self.malformed(open_at, "unterminated start tag")),
            }
        }

        // Content until the matching close tag.
        let mut pending_text = String::new();
        loop {
            match self.peek() {
                None => {
                    return Err(self.malformed(open_at, format!("unclosed element '{name}'")));
                }
                Some(b'<') => {
                    if self.starts_with("</") {
                        flush_text(builder, id, &mut pending_text);
                        let close_at = self.pos;
                        self.pos += 2;
                        let close_name = self.parse_name()?;
                        if close_name != name {
                            return Err(self.malformed(
                                close_at,
                                format!("closing tag '{close_name}' does not match '{name}'"),
                            ));
                        }
                        self.skip_ws();
                        if self.peek() != Some(b'>') {
                            return Err(self.malformed(self.pos, "expected '>' in closing tag"));
                        }
                        self.pos += 1;
                        return Ok(id);
                    } else if self.starts_with("<!--") {
                        self.skip_comment()?;
                    } else if self.starts_with("<?") {
                        self.skip_pi()?;
                    } else if self.starts_with("<![CDATA[") {
                        let start = self.pos;
                        self.pos += 9;
                        match self.input[self.pos..].find("]]>") {
                            Some(rel) => {
                                pending_text.push_str(&self.input[self.pos..self.pos + rel]);
                                self.pos += rel + 3;
                            }
                            None => {
                                return Err(self.malformed(start, "unterminated CDATA section"))
                            }
                        }
                    } else if self.starts_with("<!DOCTYPE") || self.starts_with("<!doctype") {
                        return Err(self.unsupported(self.pos, "DOCTYPE declaration"));
                    } else if self.starts_with("<!") {
                        return Err(self.unsupported(self.pos, "markup declaration"));
                    } else {
                        flush_text(builder, id, &mut pending_text);
                        self.parse_element(builder, Some(id))?;
                    }
                }
                Some(_) => {
                    self.parse_char_data(&mut pending_text)?;
                }
            }
        }
    }

    /// Accumulates character data up to the next `<`, resolving entities.
    fn parse_char_data(&mut self, out: &mut String) -> Result<(), ParseError> {
        while let Some(b) = self.peek() {
            match b {
                b'<' => break,
                b'&' => {
                    let ch = self.parse_entity()?;
                    out.push(ch);
                }
                _ => {
                    let ch = self.input[self.pos..].chars().next().unwrap();
                    out.push(ch);
                    self.pos += ch.len_utf8();
                }
            }
        }
        Ok(())
    }

    fn parse_attr_value(&mut self) -> Result<String, ParseError> {
        let quote = match self.peek() {
            Some(q @ (b'"' | b'\'')) => q,
            _ => return Err(self.malformed(self.pos, "expected quoted attribute value")),
        };
        let start = self.pos;
        self.pos += 1;
        let mut value = String::new();
        loop {
            match self.peek() {
                None => return Err(self.malformed(start, "unterminated attribute value")),
                Some(q) if q == quote => {
                    self.pos += 1;
                    return Ok(value);
                }
                Some(b'<') => {
                    return Err(self.malformed(self.pos, "'<' not allowed in attribute value"))
                }
                Some(b'&') => {
                    let ch = self.parse_entity()?;
                    value.push(ch);
                }
                Some(_) => {
                    let ch = self.input[self.pos..].chars().next().unwrap();
                    value.push(ch);
                    self.pos += ch.len_utf8();
                }
            }
        }
    }

    /// Resolves `&...;` at the cursor to one character.
    fn parse_entity(&mut self) -> Result<char, ParseError> {
        let start = self.pos;
        let rest = &self.input[self.pos..];
        let semi = match rest.find(';') {
            Some(i) if i <= 12 => i,
            _ => return Err(self.malformed(start, "unterminated entity reference")),
        };
        let body = &rest[1..semi];
        self.pos += semi + 1;
        match body {
            "amp" => Ok('&'),
            "lt" => Ok('<'),
            "gt" => Ok('>'),
            "quot" => Ok('"'),
            "apos" => Ok('\''),
            _ if body.starts_with("#x") || body.starts_with("#X") => {
                u32::from_str_radix(&body[2..], 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| self.malformed(start, "invalid character reference"))
            }
            _ if body.starts_with('#') => body[1..]
                .parse::<u32>()
                .ok()
                .and_then(char::from_u32)
                .ok_or_else(|| self.malformed(start, "invalid character reference")),
            _ => Err(self.unsupported(
                start,
                format!("entity reference '&{body};' (only built-in entities are resolved)"),
            )),
        }
    }
}

/// Emits accumulated character data as a `#text` child unless it is pure
/// whitespace, which is treated as insignificant between elements.
fn flush_text(builder: &mut DocumentBuilder, parent: NodeId, pending: &mut String) {
    if !pending.is_empty() {
        if !pending.chars().all(|c| c.is_ascii_whitespace()) {
            builder.text(parent, core::mem::take(pending));
        } else {
            pending.clear();
        }
    }
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == ':'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | ':' | '-' | '.')
}
