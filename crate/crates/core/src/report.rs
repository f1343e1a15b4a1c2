//! Output formatting helpers.

use serde_json::Value;

/// Rounds to `digits` significant digits.
pub fn round_sig(x: f64, digits: u32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let text = format!("{:.*e}", digits.saturating_sub(1) as usize, x);
    text.parse().unwrap_or(x)
}

/// Rounds every float in a JSON tree in place; integers are left alone.
pub fn round_floats(v: &mut Value, digits: u32) {
    match v {
        Value::Number(num) if num.is_f64() => {
            if let Some(rounded) = num.as_f64().map(|x| round_sig(x, digits)).and_then(serde_json::Number::from_f64) {
                *num = rounded;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|x| round_floats(x, digits)),
        Value::Object(map) => map.values_mut().for_each(|x| round_floats(x, digits)),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn significant_digits() {
        assert_eq!(round_sig(0.1 + 0.2, 12), 0.3);
        assert_eq!(round_sig(123456.789, 3), 123000.0);
        assert_eq!(round_sig(-2.0 / 3.0, 4), -0.6667);
    }

    #[test]
    fn json_tree() {
        let mut v = json!({"a": [1.0 / 3.0, 7], "b": {"c": 2.0 / 3.0}});
        round_floats(&mut v, 3);
        assert_eq!(v, json!({"a": [0.333, 7], "b": {"c": 0.667}}));
    }
}
