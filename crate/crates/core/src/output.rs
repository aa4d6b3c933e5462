//! Number formatting shared by reports and the CLI.

use crate::arith::Rational;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

/// What a result was computed from; empirical and predicted results must match before comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub functions: Vec<String>,
    pub system: String,
    pub sides: Vec<f64>,
}

/// Serializes non-finite floats as `"inf"`, `"-inf"` or `"nan"`.
pub fn f64_or_inf<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

pub fn rational_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Rounds every float in a JSON tree to 12 significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round12(n.as_f64().expect("f64"));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
        assert_eq!(round12(2.0f64.sqrt() * 1e20), 1.41421356237e20);
        assert_eq!(rational_string(&Rational::new(2, 6)), "1/3");
        let v = round_json(serde_json::json!({"a": [0.1 + 0.2, 3], "b": "x"}));
        assert_eq!(v.to_string(), r#"{"a":[0.3,3],"b":"x"}"#);
    }

    #[test]
    fn infinite_values() {
        #[derive(serde::Serialize)]
        struct W(#[serde(serialize_with = "f64_or_inf")] f64);
        assert_eq!(serde_json::to_string(&W(f64::INFINITY)).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&W(1.5)).unwrap(), "1.5");
    }
}
