//! Number formatting and artifact serialization.
//!
//! Every float leaving the tool is rounded to 12 significant digits
//! (round-half-even on the exact binary value) before it is written.

use anyhow::Result;
use serde::Serialize;
use serde_json::Value;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to 12 significant digits; negative zero becomes zero.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let s = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    s.parse::<f64>().map(|v| v + 0.0).unwrap_or(x)
}

/// Rounds every float inside a JSON tree. Integers are left alone.
pub fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Value> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    Ok(v)
}

pub fn render_json(value: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Serializes rows as CSV with a header taken from the row type.
pub fn render_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_twelve_digits() {
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(2.0 * std::f64::consts::PI / 3.0), 2.09439510239);
        assert_eq!(round_sig(-0.5000000000000001), -0.5);
        assert_eq!(round_sig(-0.0).to_bits(), 0.0f64.to_bits());
        assert_eq!(round_sig(1e-17), 1e-17);
        assert_eq!(round_sig(123456789012345.0), 123456789012000.0);
    }

    #[test]
    fn ties_round_to_even() {
        // 13-digit integers are exact, so these are true ties
        assert_eq!(round_sig(1_000_000_000_005.0), 1_000_000_000_000.0);
        assert_eq!(round_sig(1_000_000_000_015.0), 1_000_000_000_020.0);
        assert_eq!(round_sig(-1_000_000_000_025.0), -1_000_000_000_020.0);
    }

    #[test]
    fn json_floats_are_rounded() {
        let mut v = serde_json::json!({"a": [1.0 / 3.0, 2], "b": {"c": -0.0}});
        round_value(&mut v);
        assert_eq!(v["a"][0].as_f64(), Some(0.333333333333));
        assert_eq!(v["a"][1].as_u64(), Some(2));
        assert_eq!(v["b"]["c"].as_f64(), Some(0.0));
    }
}
