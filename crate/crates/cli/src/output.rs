//! CSV and JSON rendering of command results.
//!
//! CSV reals use 17 significant digits in scientific notation, so every
//! value round-trips exactly. Nested objects flatten to dotted columns.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// The JSON document every command emits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<R, S = ()> {
    pub command: String,
    pub seed: u64,
    pub samples: usize,
    pub rows: Vec<R>,
    #[serde(default = "Option::default", skip_serializing_if = "Option::is_none")]
    pub summary: Option<S>,
}

pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) if !n.is_f64() => u.to_string(),
            (_, Some(i)) if !n.is_f64() => i.to_string(),
            _ => format_real(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => quote(s),
        other => quote(&other.to_string()),
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        _ => out.push((prefix.to_string(), v.clone())),
    }
}

/// Renders rows as CSV. Columns are the union of flattened keys in order of
/// first appearance; `header_hint` supplies them when `rows` is empty.
pub fn csv_table(rows: &[Value], header_hint: Option<&Value>, footer: Option<&Value>) -> String {
    let flat: Vec<Vec<(String, Value)>> = rows
        .iter()
        .map(|r| {
            let mut f = Vec::new();
            flatten("", r, &mut f);
            f
        })
        .collect();
    let mut columns: Vec<String> = Vec::new();
    let mut add = |f: &[(String, Value)]| {
        for (k, _) in f {
            if !columns.contains(k) {
                columns.push(k.clone());
            }
        }
    };
    if flat.is_empty() {
        if let Some(h) = header_hint {
            let mut f = Vec::new();
            flatten("", h, &mut f);
            add(&f);
        }
    }
    for f in &flat {
        add(f);
    }
    let mut s = columns
        .iter()
        .map(|c| quote(c))
        .collect::<Vec<_>>()
        .join(",");
    s.push('\n');
    for f in &flat {
        let line: Vec<String> = columns
            .iter()
            .map(|c| {
                f.iter()
                    .find(|(k, _)| k == c)
                    .map(|(_, v)| cell(v))
                    .unwrap_or_default()
            })
            .collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    if let Some(Value::Object(m)) = footer {
        let mut f = Vec::new();
        flatten("", &Value::Object(m.clone()), &mut f);
        for (k, v) in f {
            s.push_str(&format!("# {k}={}\n", cell(&v)));
        }
    }
    s
}

/// Renders an envelope in the requested format.
pub fn render<R: Serialize, S: Serialize>(
    format: Format,
    envelope: &Envelope<R, S>,
    header_hint: Option<&R>,
) -> serde_json::Result<String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(envelope)?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let rows = envelope
                .rows
                .iter()
                .map(serde_json::to_value)
                .collect::<serde_json::Result<Vec<_>>>()?;
            let hint = header_hint.map(serde_json::to_value).transpose()?;
            let mut footer = Map::new();
            footer.insert("command".into(), Value::String(envelope.command.clone()));
            footer.insert("seed".into(), envelope.seed.into());
            footer.insert("samples".into(), envelope.samples.into());
            if let Some(sm) = &envelope.summary {
                footer.insert("summary".into(), serde_json::to_value(sm)?);
            }
            Ok(csv_table(
                &rows,
                hint.as_ref(),
                Some(&Value::Object(footer)),
            ))
        }
    }
}
