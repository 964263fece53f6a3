//! Attribute-relation file format reader (dense subset: `@relation`,
//! `@attribute` with numeric or nominal types, `@data`).

use super::table::{Cells, RawColumn, RawTable};
use crate::error::{Error, Result};

enum AttrType {
    Numeric,
    Nominal(Vec<String>),
    /// `string` attributes; the domain grows as values are seen.
    Text,
}

struct Attribute {
    name: String,
    kind: AttrType,
}

fn header_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        row: 0,
        column: format!("header line {line}"),
        message: message.into(),
    }
}

/// Splits on `sep` outside quotes, trims, strips one level of quoting.
fn split_values(s: &str, sep: char) -> std::result::Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quote: Option<char> = None;
    let mut was_quoted = false;
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        match quote {
            Some(q) if c == q => quote = None,
            Some(_) if c == '\\' => {
                if let Some(n) = chars.next() {
                    cur.push(n);
                }
            }
            Some(_) => cur.push(c),
            None if c == '\'' || c == '"' => {
                quote = Some(c);
                was_quoted = true;
                cur.clear();
            }
            None if was_quoted && c.is_whitespace() => {}
            None if c == sep => {
                out.push(finish(&mut cur, &mut was_quoted));
            }
            None => cur.push(c),
        }
    }
    if quote.is_some() {
        return Err("unterminated quote".into());
    }
    out.push(finish(&mut cur, &mut was_quoted));
    Ok(out)
}

fn finish(cur: &mut String, was_quoted: &mut bool) -> String {
    let v = if *was_quoted {
        cur.clone()
    } else {
        cur.trim().to_owned()
    };
    cur.clear();
    *was_quoted = false;
    v
}

/// Splits `@attribute <name> <type>` into name and the type text.
fn attribute_parts(rest: &str) -> Option<(String, &str)> {
    let rest = rest.trim_start();
    let first = rest.chars().next()?;
    if first == '\'' || first == '"' {
        let end = rest[1..].find(first)? + 1;
        Some((rest[1..end].to_owned(), rest[end + 1..].trim()))
    } else {
        let end = rest.find(char::is_whitespace)?;
        Some((rest[..end].to_owned(), rest[end..].trim()))
    }
}

pub(crate) fn parse(text: &str) -> Result<RawTable> {
    let mut attrs: Vec<Attribute> = Vec::new();
    let mut lines = text.lines().enumerate();
    let mut in_data = false;
    for (lineno, line) in lines.by_ref() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        if lower.starts_with("@relation") {
            continue;
        }
        if lower.starts_with("@attribute") {
            let (name, ty) = attribute_parts(&line["@attribute".len()..])
                .ok_or_else(|| header_error(lineno + 1, "malformed @attribute line"))?;
            let ty_lower = ty.to_ascii_lowercase();
            let kind = if ty.starts_with('{') {
                let inner = ty
                    .strip_prefix('{')
                    .and_then(|t| t.trim_end().strip_suffix('}'))
                    .ok_or_else(|| header_error(lineno + 1, "unterminated nominal domain"))?;
                let domain =
                    split_values(inner, ',').map_err(|m| header_error(lineno + 1, m))?;
                AttrType::Nominal(domain)
            } else if matches!(ty_lower.as_str(), "numeric" | "real" | "integer") {
                AttrType::Numeric
            } else if ty_lower == "string" {
                AttrType::Text
            } else {
                return Err(header_error(
                    lineno + 1,
                    format!("unsupported attribute type `{ty}` for `{name}`"),
                ));
            };
            attrs.push(Attribute { name, kind });
            continue;
        }
        if lower.starts_with("@data") {
            in_data = true;
            break;
        }
        return Err(header_error(lineno + 1, format!("unexpected line `{line}`")));
    }
    if !in_data {
        return Err(header_error(0, "no @data section"));
    }
    if attrs.is_empty() {
        return Err(header_error(0, "no @attribute declarations"));
    }

    let mut columns: Vec<RawColumn> = attrs
        .iter()
        .map(|a| RawColumn {
            name: a.name.clone(),
            cells: match &a.kind {
                AttrType::Numeric => Cells::Numeric(Vec::new()),
                AttrType::Nominal(d) => Cells::Nominal {
                    domain: d.clone(),
                    codes: Vec::new(),
                },
                AttrType::Text => Cells::Nominal {
                    domain: Vec::new(),
                    codes: Vec::new(),
                },
            },
        })
        .collect();

    let mut row = 0usize;
    for (_, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        row += 1;
        if line.starts_with('{') {
            return Err(Error::Parse {
                row,
                column: String::new(),
                message: "sparse ARFF rows are not supported".into(),
            });
        }
        let values = split_values(line, ',').map_err(|m| Error::Parse {
            row,
            column: String::new(),
            message: m,
        })?;
        if values.len() != columns.len() {
            return Err(Error::Parse {
                row,
                column: String::new(),
                message: format!("expected {} values, found {}", columns.len(), values.len()),
            });
        }
        for ((col, attr), value) in columns.iter_mut().zip(&attrs).zip(values) {
            let missing = value == "?";
            match &mut col.cells {
                Cells::Numeric(v) => {
                    if missing {
                        v.push(None);
                    } else {
                        let x = value
                            .parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| Error::Parse {
                                row,
                                column: col.name.clone(),
                                message: format!("`{value}` is not a finite number"),
                            })?;
                        v.push(Some(x));
                    }
                }
                Cells::Nominal { domain, codes } => {
                    if missing {
                        codes.push(None);
                        continue;
                    }
                    let code = match domain.iter().position(|d| *d == value) {
                        Some(k) => k,
                        None if matches!(attr.kind, AttrType::Text) => {
                            domain.push(value);
                            domain.len() - 1
                        }
                        None => {
                            return Err(Error::Parse {
                                row,
                                column: col.name.clone(),
                                message: format!("`{value}` is not in the declared domain"),
                            })
                        }
                    };
                    codes.push(Some(code));
                }
            }
        }
    }
    Ok(RawTable {
        columns,
        n_rows: row,
    })
}
