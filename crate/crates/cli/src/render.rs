//! Text, CSV and JSON-lines output.

use serde_json::{json, Value};

use shannon_core::dyadic::Dyadic;
use shannon_core::interval::Enclosure;

use crate::config::Format;

pub const DIGITS: usize = 12;

/// Exact endpoints plus an outward-rounded decimal rendering.
pub fn enclosure(e: &Enclosure) -> Value {
    let (a, b) = e.decimal_bounds(DIGITS);
    json!({
        "lo": e.lo().to_string(),
        "hi": e.hi().to_string(),
        "lo_decimal": a,
        "hi_decimal": b,
    })
}

pub fn enclosure_text(e: &Enclosure) -> String {
    let (a, b) = e.decimal_bounds(DIGITS);
    format!("{e}\n  ~ [{a}, {b}]")
}

pub fn dyadic(d: &Dyadic) -> Value {
    json!({
        "value": d.to_string(),
        "decimal": Enclosure::point(d.clone()).decimal_bounds(DIGITS).0,
    })
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::String(s) => out.push((prefix.into(), s.clone())),
        Value::Null => out.push((prefix.into(), String::new())),
        other => out.push((prefix.into(), other.to_string())),
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One CSV row per record, columns from the first record.
pub fn csv(records: &[Value]) -> String {
    let rows: Vec<Vec<(String, String)>> = records
        .iter()
        .map(|r| {
            let mut v = Vec::new();
            flatten("", r, &mut v);
            v
        })
        .collect();
    let Some(first) = rows.first() else {
        return String::new();
    };
    let mut s: String = first.iter().map(|(k, _)| csv_cell(k)).collect::<Vec<_>>().join(",");
    s.push('\n');
    for r in &rows {
        let cells: Vec<String> = first
            .iter()
            .map(|(k, _)| r.iter().find(|(x, _)| x == k).map_or(String::new(), |(_, v)| csv_cell(v)))
            .collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn jsonl(records: &[Value]) -> String {
    records.iter().map(|r| format!("{r}\n")).collect()
}

/// Renders `records` in the configured format; `text` is used for text.
pub fn emit(format: Format, text: &str, records: &[Value]) -> String {
    match format {
        Format::Text => {
            let mut t = text.to_string();
            if !t.ends_with('\n') {
                t.push('\n');
            }
            t
        }
        Format::Csv => csv(records),
        Format::JsonLines => jsonl(records),
    }
}
