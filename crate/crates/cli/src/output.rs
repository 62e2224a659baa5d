//! Report rendering: pretty JSON with sorted keys, or CSV with a header row.

use serde_json::Value;

use crate::args::Format;

/// Version stamped into every report.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub body: Value,
    pub code: i32,
    pub default_format: Format,
    /// Human-readable remarks sent to standard error.
    pub notes: Vec<String>,
}

pub fn to_json(body: &Value) -> String {
    let mut s = serde_json::to_string_pretty(body).expect("reports serialize");
    s.push('\n');
    s
}

fn cell(v: &Value) -> String {
    let raw = match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        Value::Array(items) => {
            let joined = items.iter().map(cell).collect::<Vec<_>>().join(";");
            out.push((prefix.to_string(), joined));
        }
        other => out.push((prefix.to_string(), cell(other))),
    }
}

/// Tables (`columns` plus `rows`) render one line per row; any other report
/// renders as `field,value` pairs with dotted paths.
pub fn to_csv(body: &Value) -> String {
    let mut s = String::new();
    if let (Some(Value::Array(cols)), Some(Value::Array(rows))) =
        (body.get("columns"), body.get("rows"))
    {
        let names: Vec<&str> = cols.iter().filter_map(Value::as_str).collect();
        s.push_str(&names.join(","));
        s.push('\n');
        for row in rows {
            let line: Vec<String> = names
                .iter()
                .map(|c| cell(row.get(*c).unwrap_or(&Value::Null)))
                .collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        return s;
    }
    let mut pairs = Vec::new();
    flatten("", body, &mut pairs);
    s.push_str("field,value\n");
    for (k, v) in pairs {
        s.push_str(&format!("{k},{v}\n"));
    }
    s
}
