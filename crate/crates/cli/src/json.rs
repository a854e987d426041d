//! Parameter files and number formatting.
//!
//! A parameter file is a JSON object in one of three shapes:
//!
//! * IF parameters: `{"p": 1.5, "b": -1, "c": 2, "q": 0.7, "x0": 0}`, where
//!   `p` may be the string `"inf"`;
//! * a named law in its native parameters:
//!   `{"model": "Weibull", "alpha": 1.5, "sigma": 2}`;
//! * a fit report, whose `params` member holds IF parameters.

use std::path::Path;

use ifdist::{IfParams, ModelKind, NamedModel};
use serde_json::value::RawValue;
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

pub fn read_params(path: &Path) -> Result<IfParams<f64>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_params(&text)
}

pub fn parse_params(text: &str) -> Result<IfParams<f64>> {
    let value: Value = serde_json::from_str(text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| CliError::Invalid("parameter file must hold a JSON object".into()))?;
    if let Some(inner) = obj.get("params").and_then(Value::as_object) {
        return if_params(inner);
    }
    match obj.get("model") {
        Some(name) => {
            let name = name
                .as_str()
                .ok_or_else(|| CliError::Invalid("`model` must be a string".into()))?;
            let kind = ModelKind::lookup(name)?;
            if kind == ModelKind::If {
                return if_params(obj);
            }
            let pairs = obj
                .iter()
                .filter(|(k, _)| k.as_str() != "model")
                .map(|(k, v)| Ok((k.as_str(), number(k, v)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(NamedModel::from_pairs(kind, pairs)?.resolve()?)
        }
        None => if_params(obj),
    }
}

fn if_params(obj: &Map<String, Value>) -> Result<IfParams<f64>> {
    let get = |name: &str| {
        let v = obj
            .get(name)
            .ok_or_else(|| CliError::Invalid(format!("missing parameter `{name}`")))?;
        number(name, v)
    };
    if let Some(extra) = obj
        .keys()
        .find(|k| !matches!(k.as_str(), "p" | "b" | "c" | "q" | "x0" | "model"))
    {
        return Err(CliError::Invalid(format!("unknown parameter `{extra}`")));
    }
    Ok(IfParams::new(
        get("p")?,
        get("b")?,
        get("c")?,
        get("q")?,
        get("x0")?,
    )?)
}

fn number(name: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| CliError::Invalid(format!("`{name}` is out of range"))),
        Value::String(s) if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity") => {
            Ok(f64::INFINITY)
        }
        _ => Err(CliError::Invalid(format!(
            "`{name}` must be a number, got {v}"
        ))),
    }
}

/// A JSON number with 17 significant digits; `±∞` become `"inf"` and
/// `"-inf"`, NaN becomes `null`.
pub fn num(v: f64) -> Box<RawValue> {
    let text = if v.is_nan() {
        "null".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "\"inf\"" } else { "\"-inf\"" }.to_string()
    } else {
        format!("{v:.16e}")
    };
    RawValue::from_string(text).expect("formatted number is valid JSON")
}

/// IF parameters as a JSON object.
#[derive(Debug, serde::Serialize)]
pub struct ParamsJson {
    pub p: Box<RawValue>,
    pub b: Box<RawValue>,
    pub c: Box<RawValue>,
    pub q: Box<RawValue>,
    pub x0: Box<RawValue>,
}

impl From<&IfParams<f64>> for ParamsJson {
    fn from(p: &IfParams<f64>) -> Self {
        Self {
            p: num(p.p()),
            b: num(p.b()),
            c: num(p.c()),
            q: num(p.q()),
            x0: num(p.x0()),
        }
    }
}

/// `v` with `digits` significant digits, in the style of C's `%g`.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
