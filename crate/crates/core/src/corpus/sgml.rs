//! A small lexer for the SGML-like record layout used by document and topic
//! files: flat records whose children are leaf elements holding text.

use crate::error::{Error, Location, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Element {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub offset: usize,
}

impl Element {
    pub fn attr(&self, names: &[&str]) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| names.iter().any(|n| k.eq_ignore_ascii_case(n)))
            .map(|(_, v)| v.as_str())
    }
}

/// One top-level record: the outer element and its leaf children in order.
#[derive(Debug, Clone)]
pub(crate) struct Record {
    pub element: Element,
    pub children: Vec<(Element, String)>,
}

enum Token<'a> {
    Open(Element),
    Close { name: &'a str, offset: usize },
    Text { text: &'a str, offset: usize },
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            location: Location::at(offset).line(line_of(self.src, offset)),
            message: message.into(),
        }
    }

    fn next_token(&mut self) -> Result<Option<Token<'a>>> {
        let rest = &self.src[self.pos..];
        if rest.is_empty() {
            return Ok(None);
        }
        let start = self.pos;
        if !rest.starts_with('<') {
            let len = rest.find('<').unwrap_or(rest.len());
            self.pos += len;
            return Ok(Some(Token::Text {
                text: &rest[..len],
                offset: start,
            }));
        }
        let Some(end) = rest.find('>') else {
            return Err(self.err(start, "unterminated tag"));
        };
        let inner = &rest[1..end];
        self.pos += end + 1;
        if let Some(name) = inner.strip_prefix('/') {
            let name = name.trim();
            if name.is_empty() {
                return Err(self.err(start, "empty closing tag"));
            }
            return Ok(Some(Token::Close {
                name,
                offset: start,
            }));
        }
        let element = parse_open_tag(inner, start).map_err(|m| self.err(start, m))?;
        Ok(Some(Token::Open(element)))
    }
}

fn parse_open_tag(inner: &str, offset: usize) -> std::result::Result<Element, String> {
    let inner = inner.trim();
    let name_end = inner
        .find(|c: char| c.is_whitespace())
        .unwrap_or(inner.len());
    let name = &inner[..name_end];
    if name.is_empty() || name.contains(['<', '=', '"']) {
        return Err(format!("malformed tag <{inner}>"));
    }
    let mut attrs = Vec::new();
    let mut rest = inner[name_end..].trim_start();
    while !rest.is_empty() {
        let eq = rest
            .find('=')
            .ok_or_else(|| format!("attribute without value in <{inner}>"))?;
        let key = rest[..eq].trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(format!("malformed attribute in <{inner}>"));
        }
        let after = rest[eq + 1..].trim_start();
        let (value, remaining) = match after.chars().next() {
            Some(q @ ('"' | '\'')) => {
                let close = after[1..]
                    .find(q)
                    .ok_or_else(|| format!("unterminated attribute value in <{inner}>"))?;
                (&after[1..1 + close], &after[close + 2..])
            }
            Some(_) => {
                let end = after.find(char::is_whitespace).unwrap_or(after.len());
                (&after[..end], &after[end..])
            }
            None => return Err(format!("attribute without value in <{inner}>")),
        };
        attrs.push((key.to_string(), unescape(value)));
        rest = remaining.trim_start();
    }
    Ok(Element {
        name: name.to_string(),
        attrs,
        offset,
    })
}

fn line_of(src: &str, offset: usize) -> usize {
    src.as_bytes()[..offset.min(src.len())]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
        + 1
}

/// Parses a stream of top-level `<RECORD ...> <CHILD>text</CHILD> ... </RECORD>`
/// elements. Text between records must be whitespace.
pub(crate) fn parse_records(src: &str, record_tag: &str) -> Result<Vec<Record>> {
    let mut lexer = Lexer { src, pos: 0 };
    let mut records = Vec::new();
    let mut current: Option<Record> = None;
    let mut open_child: Option<(Element, usize)> = None;

    while let Some(token) = lexer.next_token()? {
        let record_index = records.len();
        let with_record = |e: Error| match e {
            Error::Parse { location, message } => Error::Parse {
                location: location.record(record_index),
                message,
            },
            other => other,
        };
        match token {
            Token::Text { text, offset } => match (&current, &open_child) {
                (_, Some(_)) => {}
                (Some(_), None) | (None, None) => {
                    if !text.trim().is_empty() {
                        let what = if current.is_some() {
                            "text outside of a field"
                        } else {
                            "text outside of a record"
                        };
                        return Err(with_record(lexer.err(offset, what)));
                    }
                }
            },
            Token::Open(element) => {
                if let Some((child, _)) = &open_child {
                    return Err(with_record(lexer.err(
                        element.offset,
                        format!("<{}> nested inside <{}>", element.name, child.name),
                    )));
                }
                match &current {
                    None => {
                        if !element.name.eq_ignore_ascii_case(record_tag) {
                            return Err(with_record(lexer.err(
                                element.offset,
                                format!("expected <{record_tag}>, found <{}>", element.name),
                            )));
                        }
                        current = Some(Record {
                            element,
                            children: Vec::new(),
                        });
                    }
                    Some(_) => {
                        let body_start = lexer.pos;
                        open_child = Some((element, body_start));
                    }
                }
            }
            Token::Close { name, offset } => {
                if let Some((child, body_start)) = open_child.take() {
                    if !name.eq_ignore_ascii_case(&child.name) {
                        return Err(with_record(
                            lexer.err(offset, format!("</{name}> does not close <{}>", child.name)),
                        ));
                    }
                    let body = unescape(&src[body_start..offset]);
                    current
                        .as_mut()
                        .expect("child implies open record")
                        .children
                        .push((child, body));
                } else if let Some(record) = current.take() {
                    if !name.eq_ignore_ascii_case(&record.element.name) {
                        return Err(with_record(lexer.err(
                            offset,
                            format!("</{name}> does not close <{}>", record.element.name),
                        )));
                    }
                    records.push(record);
                } else {
                    return Err(with_record(
                        lexer.err(offset, format!("unexpected </{name}>")),
                    ));
                }
            }
        }
    }

    let record_index = records.len();
    if let Some((child, _)) = open_child {
        return Err(Error::Parse {
            location: Location::at(child.offset)
                .line(line_of(src, child.offset))
                .record(record_index),
            message: format!("unclosed <{}>", child.name),
        });
    }
    if let Some(record) = current {
        return Err(Error::Parse {
            location: Location::at(record.element.offset)
                .line(line_of(src, record.element.offset))
                .record(record_index),
            message: format!("unclosed <{}>", record.element.name),
        });
    }
    Ok(records)
}

pub(crate) fn unescape(s: &str) -> String {
    if !s.contains('&') {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        rest = &rest[amp..];
        let replaced = [
            ("&lt;", '<'),
            ("&gt;", '>'),
            ("&amp;", '&'),
            ("&quot;", '"'),
            ("&apos;", '\''),
        ]
        .iter()
        .find(|(ent, _)| rest.starts_with(ent));
        match replaced {
            Some((ent, ch)) => {
                out.push(*ch);
                rest = &rest[ent.len()..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '&' => out.push_str("&amp;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}
