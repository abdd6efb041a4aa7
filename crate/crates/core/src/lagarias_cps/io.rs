//! JSON form of a scheme: `{"d", "n", "lifted_basis", "covolume"}`, plus the
//! kernel basis and exact generator data when present.

use serde_json::{json, Value};

use super::{EuclideanCps, ExactLattice};
use crate::error::{Error, Result};
use crate::exact_arith::QuadExt;
use crate::linalg::Mat;
use crate::pointsets::io::{array, f64_rows, field, quad_from_json, quad_to_json};

fn quad_rows_to_json(rows: &[Vec<QuadExt>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| Value::Array(r.iter().map(quad_to_json).collect()))
            .collect(),
    )
}

fn quad_rows(v: &Value, what: &str) -> Result<Vec<Vec<QuadExt>>> {
    array(v, what)?
        .iter()
        .map(|r| array(r, what)?.iter().map(quad_from_json).collect())
        .collect()
}

pub fn cps_to_json(c: &EuclideanCps<f64>) -> Value {
    let mut v = json!({
        "d": c.d(),
        "n": c.n(),
        "lifted_basis": c.lifted_basis(),
        "covolume": c.covolume(),
    });
    if let Some(k) = c.kernel_basis() {
        v["kernel_basis"] = json!((0..k.cols()).map(|j| k.col(j)).collect::<Vec<_>>());
    }
    if let Some(e) = c.exact_lattice() {
        v["exact_generators"] = quad_rows_to_json(&e.generators);
        if let Some(st) = &e.star {
            v["exact_star"] = quad_rows_to_json(st);
        }
    }
    v
}

pub fn cps_from_json(v: &Value) -> Result<EuclideanCps<f64>> {
    let as_usize = |key: &str| -> Result<usize> {
        field(v, key)?
            .as_u64()
            .map(|x| x as usize)
            .ok_or_else(|| Error::Parse(format!("`{key}` must be a nonnegative integer")))
    };
    let (d, n) = (as_usize("d")?, as_usize("n")?);
    let lifted = f64_rows(field(v, "lifted_basis")?, "lifted_basis")?;
    if lifted.len() != d + n || lifted.iter().any(|r| r.len() != d + n) {
        return Err(Error::Parse(format!(
            "`lifted_basis` must hold {} vectors of length {}",
            d + n,
            d + n
        )));
    }
    let gens: Vec<Vec<f64>> = lifted.iter().map(|r| r[..d].to_vec()).collect();
    let star: Vec<Vec<f64>> = lifted.iter().map(|r| r[d..].to_vec()).collect();
    let exact_gens = v.get("exact_generators").map(|g| quad_rows(g, "exact_generators")).transpose()?;
    let exact_star = v.get("exact_star").map(|g| quad_rows(g, "exact_star")).transpose()?;
    let mut c = match (exact_gens, exact_star) {
        (Some(g), Some(s)) => EuclideanCps::exact(g, s)?,
        (g, _) => {
            let mut c = EuclideanCps::from_lifted(gens, star)?;
            c.exact = g.map(|generators| ExactLattice {
                generators,
                star: None,
            });
            c
        }
    };
    if let Some(k) = v.get("kernel_basis") {
        let cols = f64_rows(k, "kernel_basis")?;
        if cols.len() != n || cols.iter().any(|col| col.len() != d + n) {
            return Err(Error::Parse("`kernel_basis` has the wrong shape".into()));
        }
        c.kernel = Some(if n == 0 { Mat::zeros(d, 0) } else { Mat::from_cols(&cols) });
    }
    if let Some(cov) = v.get("covolume").and_then(Value::as_f64) {
        if (cov - c.covolume()).abs() > 1e-9 * (1.0 + cov.abs()) {
            return Err(Error::Parse(format!(
                "stated covolume {cov} disagrees with the basis ({})",
                c.covolume()
            )));
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_keeps_exact_data() {
        let tau = QuadExt::golden();
        let conj = QuadExt::int(1) - tau.clone();
        let c = EuclideanCps::<f64>::exact(
            vec![vec![QuadExt::int(1)], vec![tau]],
            vec![vec![QuadExt::int(1)], vec![conj]],
        )
        .unwrap();
        let v = cps_to_json(&c);
        assert_eq!(v["d"], 1);
        assert_eq!(v["lifted_basis"].as_array().unwrap().len(), 2);
        let back = cps_from_json(&serde_json::from_str(&v.to_string()).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn plain_numeric_scheme() {
        let v = json!({"d": 1, "n": 1, "lifted_basis": [[1.0, 1.0], [1.5, -0.5]], "covolume": 2.0});
        let c = cps_from_json(&v).unwrap();
        assert_eq!(c.star(&[0, 1]), vec![-0.5]);
        let bad = json!({"d": 1, "n": 1, "lifted_basis": [[1.0, 1.0]], "covolume": 2.0});
        assert!(cps_from_json(&bad).is_err());
    }
}
