//! Seventeen significant digits for every printed float.

use serde_json::{Number, Value};

/// `x` in scientific notation with 17 significant digits; `NaN`, `inf` and
/// `-inf` for the non-finite values.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        let text = format!("{x:.16e}");
        // explicit exponent sign, matching what JSON output shows
        match text.split_once('e') {
            Some((mantissa, exp)) if !exp.starts_with('-') => format!("{mantissa}e+{exp}"),
            _ => text,
        }
    }
}

/// Rewrites every non-integer number in `v` with [`fmt17`]. Non-finite values
/// are already `null` by the time they reach a [`Value`].
pub fn json_17(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            let text = n.to_string();
            if text.contains(['.', 'e', 'E']) {
                let x: f64 = text.parse().expect("serde_json number");
                Value::Number(fmt17(x).parse::<Number>().expect("finite float"))
            } else {
                Value::Number(n)
            }
        }
        Value::Array(items) => Value::Array(items.into_iter().map(json_17).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, json_17(v))).collect()),
        other => other,
    }
}
