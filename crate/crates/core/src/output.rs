//! Deterministic JSON text with 17 significant digits for every float.

use std::fmt::Write;

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

/// Float as `d.dddddddddddddddde±x`, which parses back to the same bits.
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        return "0.0000000000000000e0".into();
    }
    format!("{v:.16e}")
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n("  ", n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => write!(out, "{u}").unwrap(),
            (_, Some(i), _) => write!(out, "{i}").unwrap(),
            (_, _, Some(f)) => out.push_str(&format_float(f)),
            _ => out.push_str("null"),
        },
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.iter().all(|x| !x.is_array() && !x.is_object()) => {
            out.push('[');
            for (k, x) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_value(out, x, indent);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, x) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, x, indent + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (k, (key, x)) in map.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(out, x, indent + 1);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Pretty JSON with keys sorted and floats in [`format_float`] form.
pub fn to_json(value: &impl Serialize) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 7.5, 1e-300, -2.5e17, f64::MAX, 5e-324] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_float(7.5), "7.5000000000000000e0");
    }

    #[test]
    fn layout() {
        let s = to_json(&json!({"b": [1.5, 2], "a": true, "c": {"m": 4}, "d": [[1.0], []]})).unwrap();
        assert_eq!(
            s,
            "{\n  \"a\": true,\n  \"b\": [1.5000000000000000e0, 2],\n  \"c\": {\n    \"m\": 4\n  },\n  \"d\": [\n    [1.0000000000000000e0],\n    []\n  ]\n}\n"
        );
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"][0], json!(1.5));
    }
}
