//! JSON with fixed-precision floats, and small CSV helpers.

use std::fmt::Write as _;

use serde_json::Value;

/// Every float is written with 17 significant digits so that values
/// round-trip exactly and repeated runs compare byte for byte.
pub fn float(v: f64) -> String {
    // fold −0 into 0 so that equal values print equally
    let v = if v == 0.0 { 0.0 } else { v };
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        // JSON has no non-finite numbers
        "null".into()
    }
}

pub fn to_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&float(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
            } else if items.iter().all(|i| matches!(i, Value::Number(_) | Value::Bool(_) | Value::Null)) {
                // numeric rows stay on one line
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, indent);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (k, item) in items.iter().enumerate() {
                    pad(out, indent + 1);
                    write_value(out, item, indent + 1);
                    if k + 1 < items.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                pad(out, indent);
                out.push(']');
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                pad(out, indent + 1);
                let _ = write!(out, "{}: ", Value::String(key.clone()));
                write_value(out, item, indent + 1);
                if k + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// Writes a header and rows through the `csv` crate.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(float(0.5), "5.0000000000000000e-1");
        assert_eq!(float(f64::NAN), "null");
        let s = to_json(&json!({ "a": 0.1, "b": [1, 2.0], "c": "x" }));
        assert!(s.contains("\"a\": 1.0000000000000001e-1"));
        assert!(s.contains("[1, 2.0000000000000000e0]"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }

    #[test]
    fn csv_quotes_commas() {
        let s = to_csv(&["a", "b"], &[vec!["1".into(), "x, y".into()]]).unwrap();
        assert_eq!(s, "a,b\n1,\"x, y\"\n");
    }
}
