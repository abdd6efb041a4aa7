//! JSON encoding of point samples. Numbers are written as strings so exact
//! values survive a round trip.

use std::io::{Read, Write};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use super::{BoxRegion, PointSample, SampleMode};
use crate::error::{Error, Result};
use crate::exact_arith::{parse_rational, QuadExt, Rational};

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// A quadratic literal: a rational string or `{"a": .., "b": .., "disc": D}`.
pub fn quad_from_json(v: &Value) -> Result<QuadExt> {
    match v {
        Value::String(s) => Ok(QuadExt::rational(parse_rational(s)?)),
        Value::Number(n) => Ok(QuadExt::rational(parse_rational(&n.to_string())?)),
        Value::Object(o) => {
            let part = |k: &str| -> Result<Rational> {
                match o.get(k) {
                    None => Ok(Rational::zero()),
                    Some(Value::String(s)) => parse_rational(s),
                    Some(Value::Number(n)) => parse_rational(&n.to_string()),
                    Some(other) => Err(perr(format!("bad quadratic part {other}"))),
                }
            };
            let disc = match o.get("disc") {
                Some(Value::Number(n)) => n.as_u64(),
                Some(Value::String(s)) => s.parse().ok(),
                _ => None,
            }
            .ok_or_else(|| perr("quadratic literal needs a positive integer disc"))?;
            QuadExt::new(part("a")?, part("b")?, disc).map_err(|e| perr(e.to_string()))
        }
        other => Err(perr(format!("expected a number literal, found {other}"))),
    }
}

pub fn quad_to_json(q: &QuadExt) -> Value {
    if q.is_rational() {
        Value::String(q.a().to_string())
    } else {
        json!({"a": q.a().to_string(), "b": q.b().to_string(), "disc": q.disc()})
    }
}

/// A real number given as a JSON number or a decimal string.
pub fn f64_from_json(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| perr("number out of range")),
        Value::String(s) => s
            .trim()
            .parse::<f64>()
            .map_err(|_| perr(format!("not a number: {s:?}"))),
        other => Err(perr(format!("expected a number, found {other}"))),
    }
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn f64_to_json(x: f64) -> Value {
    Value::String(format!("{x:?}"))
}

fn i64_from_json(v: &Value) -> Result<i64> {
    match v {
        Value::Number(n) => n.as_i64().ok_or_else(|| perr(format!("not an integer: {n}"))),
        Value::String(s) => {
            let b: BigInt = s
                .trim()
                .parse()
                .map_err(|_| perr(format!("not an integer: {s:?}")))?;
            b.to_i64().ok_or_else(|| perr(format!("integer out of range: {s}")))
        }
        other => Err(perr(format!("expected an integer, found {other}"))),
    }
}

pub(crate) fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| perr(format!("`{what}` must be an array")))
}

pub(crate) fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| perr(format!("missing field `{key}`")))
}

pub(crate) fn f64_vec(v: &Value, what: &str) -> Result<Vec<f64>> {
    array(v, what)?.iter().map(f64_from_json).collect()
}

pub(crate) fn f64_rows(v: &Value, what: &str) -> Result<Vec<Vec<f64>>> {
    array(v, what)?.iter().map(|r| f64_vec(r, what)).collect()
}

pub(crate) fn f64_vec_to_json(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| f64_to_json(x)).collect())
}

pub fn region_from_json(v: &Value) -> Result<BoxRegion> {
    BoxRegion::new(f64_vec(field(v, "lo")?, "lo")?, f64_vec(field(v, "hi")?, "hi")?)
}

pub fn region_to_json(r: &BoxRegion) -> Value {
    json!({"lo": f64_vec_to_json(r.lo()), "hi": f64_vec_to_json(r.hi())})
}

pub fn sample_from_json(v: &Value) -> Result<PointSample> {
    let dim = field(v, "dim")?
        .as_u64()
        .filter(|&d| d > 0)
        .ok_or_else(|| perr("`dim` must be a positive integer"))? as usize;
    let region = region_from_json(field(v, "box")?).map_err(|e| match e {
        Error::Validation(m) => perr(m),
        other => other,
    })?;
    if region.dim() != dim {
        return Err(perr(format!("box has dimension {}, expected {dim}", region.dim())));
    }
    let points = array(field(v, "points")?, "points")?;
    match field(v, "mode")?.as_str() {
        Some("exact") => {
            let generators = array(field(v, "generators")?, "generators")?
                .iter()
                .map(|g| array(g, "generator")?.iter().map(quad_from_json).collect())
                .collect::<Result<Vec<Vec<QuadExt>>>>()?;
            let coords = points
                .iter()
                .map(|p| array(p, "point")?.iter().map(i64_from_json).collect())
                .collect::<Result<Vec<Vec<i64>>>>()?;
            PointSample::exact(generators, coords, region)
        }
        Some("numeric") => {
            let pts = points
                .iter()
                .map(|p| f64_vec(p, "point"))
                .collect::<Result<Vec<_>>>()?;
            PointSample::numeric(pts, region)
        }
        _ => Err(perr("`mode` must be \"exact\" or \"numeric\"")),
    }
}

pub fn sample_to_json(s: &PointSample) -> Value {
    let mut out = json!({
        "dim": s.dim(),
        "mode": match s.mode() { SampleMode::Exact => "exact", SampleMode::Numeric => "numeric" },
    });
    match (s.generators(), s.coords()) {
        (Some(g), Some(c)) => {
            out["generators"] = Value::Array(
                g.iter()
                    .map(|v| Value::Array(v.iter().map(quad_to_json).collect()))
                    .collect(),
            );
            out["points"] = Value::Array(
                c.iter()
                    .map(|p| Value::Array(p.iter().map(|x| Value::String(x.to_string())).collect()))
                    .collect(),
            );
        }
        _ => {
            out["points"] = Value::Array(s.positions().iter().map(|p| f64_vec_to_json(p)).collect());
        }
    }
    out["box"] = region_to_json(s.region());
    out
}

pub fn load_sample<R: Read>(mut source: R) -> Result<PointSample> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| perr(format!("reading sample: {e}")))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| perr(e.to_string()))?;
    sample_from_json(&v)
}

pub fn write_sample<W: Write>(s: &PointSample, mut sink: W) -> Result<()> {
    let text = serde_json::to_string_pretty(&sample_to_json(s)).expect("JSON values serialize");
    sink.write_all(text.as_bytes())
        .and_then(|_| sink.write_all(b"\n"))
        .map_err(|e| Error::InvalidArgument(format!("writing sample: {e}")))
}

/// Parses `lo:hi[,lo:hi...]` into a box.
pub fn parse_region(spec: &str) -> Result<BoxRegion> {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for part in spec.split(',') {
        let (a, b) = part
            .split_once(':')
            .ok_or_else(|| perr(format!("box component {part:?} is not lo:hi")))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| perr(format!("bad box bound {x:?}")))
        };
        lo.push(parse(a)?);
        hi.push(parse(b)?);
    }
    BoxRegion::new(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_file_loads_with_embedded_positions() {
        let text = r#"{"dim": 1, "mode": "exact",
            "generators": [["1"], [{"a": "1/2", "b": "1/2", "disc": 5}]],
            "points": [["0","0"],["1","0"],["1","1"]],
            "box": {"lo": ["0"], "hi": ["3"]}}"#;
        let s = load_sample(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 3);
        assert!((s.positions()[2][0] - 2.618_033_988_749_895).abs() < 1e-15);
        let back = sample_from_json(&sample_to_json(&s)).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn numeric_file_and_errors() {
        let text = r#"{"dim":1,"mode":"numeric","points":[["0.0"],["1.0"],["2.618"]],
            "box":{"lo":["0"],"hi":["3"]}}"#;
        let s = load_sample(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(sample_from_json(&sample_to_json(&s)).unwrap(), s);

        let dup = text.replace("\"2.618\"", "\"1.0\"");
        assert!(matches!(load_sample(dup.as_bytes()), Err(Error::Validation(_))));
        assert!(matches!(load_sample("{".as_bytes()), Err(Error::Parse(_))));
        let outside = text.replace("\"2.618\"", "\"7\"");
        assert!(matches!(load_sample(outside.as_bytes()), Err(Error::Validation(_))));
    }

    #[test]
    fn regions_parse() {
        let r = parse_region("0:50,-1:2.5").unwrap();
        assert_eq!(r.lo(), &[0.0, -1.0]);
        assert_eq!(r.hi(), &[50.0, 2.5]);
        assert!(parse_region("3:1").is_err());
        assert!(parse_region("x").is_err());
    }
}
