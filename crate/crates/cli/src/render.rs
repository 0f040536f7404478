//! Human-readable tables over the JSON responses.

use serde_json::{Map, Value};

fn cell(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            items.iter().map(cell).collect::<Vec<_>>().join(",")
        }
        other => other.to_string(),
    }
}

fn table(rows: &[Value], preferred: &[&str]) -> String {
    let mut columns: Vec<String> = preferred
        .iter()
        .filter(|c| rows.iter().any(|r| r.get(**c).is_some()))
        .map(|c| c.to_string())
        .collect();
    for row in rows {
        if let Value::Object(m) = row {
            for k in m.keys() {
                if !columns.contains(k) {
                    columns.push(k.clone());
                }
            }
        }
    }
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| columns.iter().map(|c| r.get(c).map(cell).unwrap_or_default()).collect())
        .collect();
    let widths: Vec<usize> = columns
        .iter()
        .enumerate()
        .map(|(i, c)| {
            cells
                .iter()
                .map(|r| r[i].chars().count())
                .chain([c.len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |values: Vec<&str>| {
        let padded: Vec<String> = values
            .iter()
            .zip(&widths)
            .map(|(v, w)| format!("{v:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(columns.iter().map(String::as_str).collect());
    for r in &cells {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

const PREFERRED: &[&str] = &["rank", "trust", "candidate", "state", "author", "created_at", "post_id", "line"];

fn object(m: &Map<String, Value>) -> String {
    let mut pairs = Vec::new();
    let mut nested = Vec::new();
    for (k, v) in m {
        match v {
            Value::Array(items) if items.iter().any(Value::is_object) => nested.push((k, items)),
            Value::Object(inner) => {
                for (ik, iv) in inner {
                    pairs.push((format!("{k}.{ik}"), cell(iv)));
                }
            }
            _ => pairs.push((k.clone(), cell(v))),
        }
    }
    let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out: String = pairs
        .iter()
        .map(|(k, v)| format!("{k:<width$}  {v}").trim_end().to_string() + "\n")
        .collect();
    for (k, items) in nested {
        out.push_str(&format!("\n{k}:\n"));
        out.push_str(&table(items, PREFERRED));
    }
    out
}

pub fn render(body: &str) -> String {
    match serde_json::from_str::<Value>(body) {
        Ok(Value::Object(m)) => object(&m),
        Ok(Value::Array(items)) => table(&items, PREFERRED),
        Ok(other) => format!("{}\n", cell(&other)),
        Err(_) => format!("{body}\n"),
    }
}
