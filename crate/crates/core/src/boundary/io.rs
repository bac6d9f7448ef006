//! JSON boundary files.
//!
//! ```json
//! { "coeff_x": [[re, im], ...], "coeff_y": [[re, im], ...],
//!   "k_min": -K, "param_kind": "general", "meta": { "width_estimate": 0.3 } }
//! ```

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use super::{FourierCurve, ParamKind};
use crate::error::{Error, Result};

fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidBoundary { field: field.into(), reason: reason.into() }
}

fn read_coeffs(obj: &Map<String, Value>, field: &str) -> Result<Vec<Complex64>> {
    let arr = obj
        .get(field)
        .ok_or_else(|| invalid(field, "missing"))?
        .as_array()
        .ok_or_else(|| invalid(field, "expected an array of [re, im] pairs"))?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| {
            let pair = v.as_array().filter(|p| p.len() == 2);
            let (re, im) = pair
                .and_then(|p| Some((p[0].as_f64()?, p[1].as_f64()?)))
                .ok_or_else(|| invalid(field, format!("entry {i} is not a numeric [re, im] pair")))?;
            Ok(Complex64::new(re, im))
        })
        .collect()
}

impl FourierCurve {
    pub fn from_json_value(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| invalid("<root>", "expected a JSON object"))?;
        let cx = read_coeffs(obj, "coeff_x")?;
        let cy = read_coeffs(obj, "coeff_y")?;
        if cx.len() != cy.len() {
            return Err(invalid("coeff_y", format!("length {} differs from coeff_x length {}", cy.len(), cx.len())));
        }
        if cx.len() % 2 == 0 {
            return Err(invalid("coeff_x", "length must be odd (k = -K..=K)"));
        }
        let k = (cx.len() / 2) as i64;
        let k_min = obj
            .get("k_min")
            .ok_or_else(|| invalid("k_min", "missing"))?
            .as_i64()
            .ok_or_else(|| invalid("k_min", "expected an integer"))?;
        if k_min != -k {
            return Err(invalid("k_min", format!("expected {} for {} coefficients", -k, cx.len())));
        }
        let param = match obj.get("param_kind").and_then(Value::as_str) {
            Some("general") => ParamKind::General,
            Some("arclength_unit") => ParamKind::ArclengthUnit,
            Some(other) => return Err(invalid("param_kind", format!("unknown value {other:?}"))),
            None => return Err(invalid("param_kind", "missing or not a string")),
        };
        let width = match obj.get("meta") {
            None | Some(Value::Null) => None,
            Some(Value::Object(m)) => match m.get("width_estimate") {
                None | Some(Value::Null) => None,
                Some(w) => Some(w.as_f64().ok_or_else(|| invalid("meta.width_estimate", "expected a number"))?),
            },
            Some(_) => return Err(invalid("meta", "expected an object")),
        };
        let mut curve = FourierCurve::from_coeffs(cx, cy, param)?;
        curve.width_estimate = width;
        Ok(curve)
    }

    pub fn to_json_value(&self) -> Value {
        let pairs = |c: &[Complex64]| c.iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>();
        json!({
            "coeff_x": pairs(&self.cx),
            "coeff_y": pairs(&self.cy),
            "k_min": -(self.k_max as i64),
            "param_kind": self.param,
            "meta": { "width_estimate": self.width_estimate },
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("boundary serialises") + "\n"
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let v: Value = serde_json::from_str(&text)?;
        FourierCurve::from_json_value(&v)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn round_trip_is_byte_identical() {
        let dir = std::env::temp_dir().join(format!("boundary-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("e.json");
        let c = presets::ellipse(1.1, 0.9).unwrap().with_width_estimate();
        c.save(&path).unwrap();
        let first = fs::read(&path).unwrap();
        let back = FourierCurve::load(&path).unwrap();
        assert_eq!(back, c);
        back.save(&path).unwrap();
        assert_eq!(fs::read(&path).unwrap(), first);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn rejects_malformed_fields() {
        let good = presets::circle().to_json_value();
        let mut v = good.clone();
        v["coeff_x"][0] = json!([0.0, 0.5]);
        match FourierCurve::from_json_value(&v) {
            Err(Error::InvalidBoundary { field, .. }) => assert_eq!(field, "coeff_x"),
            other => panic!("unexpected {other:?}"),
        }
        let mut v = good.clone();
        v["param_kind"] = json!("polar");
        assert!(matches!(FourierCurve::from_json_value(&v), Err(Error::InvalidBoundary { field, .. }) if field == "param_kind"));
        let mut v = good.clone();
        v.as_object_mut().unwrap().remove("coeff_y");
        assert!(matches!(FourierCurve::from_json_value(&v), Err(Error::InvalidBoundary { field, .. }) if field == "coeff_y"));
        let mut v = good;
        v["k_min"] = json!(-7);
        assert!(matches!(FourierCurve::from_json_value(&v), Err(Error::InvalidBoundary { field, .. }) if field == "k_min"));
    }
}
