//! Window files: `{"n", "shape": "box"|"ball"|"polytope"|"hull", ...}`.

use serde_json::{json, Value};

use super::{Shape, Window};
use crate::error::{Error, Result};
use crate::pointsets::io::{array, f64_from_json, f64_rows, field, quad_from_json, quad_to_json};
use crate::scalar::Scalar;

fn scalar_to_json<T: Scalar>(x: &T) -> Value {
    if T::EXACT {
        quad_to_json(&x.to_quad())
    } else {
        json!(x.as_f64())
    }
}

fn scalar_from_json<T: Scalar>(v: &Value) -> Result<T> {
    match v {
        Value::Number(_) => Ok(T::lift_f64(f64_from_json(v)?)),
        _ => Ok(T::from_quad(&quad_from_json(v)?)),
    }
}

fn vec_to_json<T: Scalar>(v: &[T]) -> Value {
    Value::Array(v.iter().map(scalar_to_json).collect())
}

fn vec_from_json<T: Scalar>(v: &Value, what: &str) -> Result<Vec<T>> {
    array(v, what)?.iter().map(scalar_from_json).collect()
}

pub fn window_to_json<T: Scalar>(w: &Window<T>) -> Value {
    match w.shape() {
        Shape::Box { lo, hi } => json!({"n": w.dim(), "shape": "box", "lo": vec_to_json(lo), "hi": vec_to_json(hi)}),
        Shape::Ball { center, radius } => json!({
            "n": w.dim(), "shape": "ball",
            "center": vec_to_json(center), "radius": scalar_to_json(radius),
        }),
        Shape::Polytope { half_spaces } => json!({
            "n": w.dim(), "shape": "polytope",
            "half_spaces": half_spaces
                .iter()
                .map(|(a, b)| json!({"a": vec_to_json(a), "b": scalar_to_json(b)}))
                .collect::<Vec<_>>(),
        }),
        Shape::Hull { vertices, inflation } => json!({
            "n": w.dim(), "shape": "hull", "vertices": vertices, "inflation": inflation,
        }),
    }
}

pub fn window_from_json<T: Scalar>(v: &Value) -> Result<Window<T>> {
    let shape = field(v, "shape")?
        .as_str()
        .ok_or_else(|| Error::Parse("`shape` must be a string".into()))?;
    let w = match shape {
        "box" => Window::boxed(vec_from_json(field(v, "lo")?, "lo")?, vec_from_json(field(v, "hi")?, "hi")?)?,
        "ball" => Window::ball(
            vec_from_json(field(v, "center")?, "center")?,
            scalar_from_json(field(v, "radius")?)?,
        )?,
        "polytope" => {
            let hs = array(field(v, "half_spaces")?, "half_spaces")?
                .iter()
                .map(|h| Ok((vec_from_json(field(h, "a")?, "a")?, scalar_from_json(field(h, "b")?)?)))
                .collect::<Result<Vec<_>>>()?;
            Window::polytope(hs)?
        }
        "hull" => Window::hull(
            &f64_rows(field(v, "vertices")?, "vertices")?,
            f64_from_json(field(v, "inflation")?)?,
        )?,
        other => return Err(Error::Parse(format!("unknown window shape {other:?}"))),
    };
    if let Some(n) = v.get("n").and_then(Value::as_u64) {
        if n as usize != w.dim() {
            return Err(Error::DimensionMismatch {
                expected: n as usize,
                found: w.dim(),
            });
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::QuadExt;

    #[test]
    fn exact_box_round_trips() {
        let w = Window::interval(QuadExt::int(-1), QuadExt::golden() - QuadExt::int(1)).unwrap();
        let v = window_to_json(&w);
        let back: Window<QuadExt> = window_from_json(&serde_json::from_str(&v.to_string()).unwrap()).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn float_shapes_round_trip() {
        let shapes = vec![
            Window::ball(vec![0.1, -0.2], 0.3).unwrap(),
            Window::polytope(vec![(vec![1.0], 0.5), (vec![-1.0], 0.25)]).unwrap(),
            Window::<f64>::hull(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], 1e-9).unwrap(),
        ];
        for w in shapes {
            let text = window_to_json(&w).to_string();
            let back: Window<f64> = window_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
            assert_eq!(back, w);
        }
        assert!(window_from_json::<f64>(&json!({"shape": "blob"})).is_err());
    }
}
