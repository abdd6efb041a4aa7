//! The address system as a linear flow on the torus `R^s / Z^s`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_arith::{relation_candidates, DEFAULT_SCALE};
use crate::linalg::Mat;
use crate::scalar::Real;

/// Samples per orbit are capped here regardless of the horizon.
const MAX_ORBIT_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Minimality {
    Minimal,
    NonMinimal { witness: Vec<i64> },
}

impl Minimality {
    pub fn is_minimal(&self) -> bool {
        matches!(self, Minimality::Minimal)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Minimality::Minimal => "minimal",
            Minimality::NonMinimal { .. } => "non_minimal",
        }
    }
}

/// Searches for a nonzero `m ∈ Z^s` with `‖Aᵀm‖ ≤ tol · max_j ‖A_j‖`.
///
/// Among all reduced candidates passing the tolerance the one with the
/// smallest residual is reported.
pub fn minimality_check<T: Real>(a: &Mat<T>, tol: f64) -> Result<Minimality> {
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    if a.rows() <= a.cols() {
        // Full column rank with s = d: Aᵀ is injective.
        return Ok(Minimality::Minimal);
    }
    let rows: Vec<Vec<f64>> = (0..a.rows())
        .map(|i| a.row(i).iter().map(|x| x.to_f64().unwrap()).collect())
        .collect();
    let best = relation_candidates(&rows, DEFAULT_SCALE)?
        .into_iter()
        .filter(|r| r.relative_residual <= tol)
        .min_by(|x, y| x.relative_residual.total_cmp(&y.relative_residual));
    Ok(match best {
        Some(r) => Minimality::NonMinimal { witness: r.coeffs },
        None => Minimality::Minimal,
    })
}

/// A point of `R^s / Z^s`, stored with every component in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint<T> {
    w: Vec<T>,
}

impl<T: Real> TorusPoint<T> {
    pub fn new(w: Vec<T>) -> Self {
        TorusPoint {
            w: w.into_iter().map(wrap).collect(),
        }
    }

    pub fn zero(s: usize) -> Self {
        TorusPoint { w: vec![T::zero(); s] }
    }

    pub fn coords(&self) -> &[T] {
        &self.w
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }
}

fn wrap<T: Real>(x: T) -> T {
    let y = x - x.floor();
    // x slightly below an integer can round up to exactly 1.
    if y >= T::one() {
        T::zero()
    } else {
        y
    }
}

/// `w0 + A·t mod Z^s`.
pub fn address_flow<T: Real>(w0: &TorusPoint<T>, a: &Mat<T>, t: &[T]) -> Result<TorusPoint<T>> {
    if t.len() != a.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.cols(),
            found: t.len(),
        });
    }
    if w0.dim() != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: w0.dim(),
        });
    }
    let at = a.mul_vec(t);
    Ok(TorusPoint::new(
        w0.w.iter().zip(at).map(|(&x, y)| x + y).collect(),
    ))
}

/// Largest relative deviation `max_b |N_b / (N / B) − 1|` of a `bins^s`
/// histogram of the orbit `A·t mod Z^s`, with `t` on a grid over `[0, T]^d`.
///
/// The grid pitch is a quarter of a bin width divided by the fastest speed,
/// so consecutive samples never skip a bin.
pub fn equidistribution_discrepancy<T: Real>(a: &Mat<T>, horizon: f64, bins: usize) -> Result<f64> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument("horizon must be positive".into()));
    }
    if bins < 2 {
        return Err(Error::InvalidArgument("bins must be at least 2".into()));
    }
    let (s, d) = (a.rows(), a.cols());
    let total_bins = bins
        .checked_pow(s as u32)
        .filter(|&b| b <= 1 << 24)
        .ok_or_else(|| Error::InvalidArgument("too many histogram bins".into()))?;
    let af: Vec<Vec<f64>> = (0..s)
        .map(|i| a.row(i).iter().map(|x| x.to_f64().unwrap()).collect())
        .collect();
    let speed = af.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    if speed == 0.0 {
        return Ok(total_bins as f64 - 1.0);
    }
    let mut h = 1.0 / (4.0 * bins as f64 * speed);
    let mut per_axis = (horizon / h).floor().max(1.0) as usize;
    let cap = (MAX_ORBIT_SAMPLES as f64).powf(1.0 / d as f64).floor() as usize;
    if per_axis > cap {
        per_axis = cap;
        h = horizon / per_axis as f64;
    }
    let total = per_axis.pow(d as u32);
    let histogram = (0..total)
        .into_par_iter()
        .fold(
            || vec![0u64; total_bins],
            |mut acc, mut flat| {
                let mut t = vec![0.0; d];
                for x in t.iter_mut() {
                    *x = ((flat % per_axis) as f64 + 0.5) * h;
                    flat /= per_axis;
                }
                let mut bin = 0usize;
                for row in &af {
                    let v: f64 = row.iter().zip(&t).map(|(p, q)| p * q).sum();
                    let frac = v - v.floor();
                    let k = ((frac * bins as f64) as usize).min(bins - 1);
                    bin = bin * bins + k;
                }
                acc[bin] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; total_bins],
            |mut x, y| {
                x.iter_mut().zip(y).for_each(|(p, q)| *p += q);
                x
            },
        );
    let expected = total as f64 / total_bins as f64;
    Ok(histogram
        .iter()
        .map(|&c| (c as f64 / expected - 1.0).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> Mat<f64> {
        Mat::from_rows(&v.iter().map(|&x| vec![x]).collect::<Vec<_>>())
    }

    fn fib() -> Mat<f64> {
        let r5 = 5f64.sqrt();
        col(&[(5.0 - r5) / 10.0, r5 / 5.0])
    }

    #[test]
    fn fibonacci_is_minimal() {
        assert_eq!(minimality_check(&fib(), 1e-6).unwrap(), Minimality::Minimal);
        // Rounded entries are still far from any short relation.
        assert_eq!(
            minimality_check(&col(&[0.276393, 0.447214]), 1e-6).unwrap(),
            Minimality::Minimal
        );
    }

    #[test]
    fn brute_force_confirms_no_short_relation() {
        let a = fib();
        let mut best = f64::INFINITY;
        for p in -10_000i64..=10_000 {
            // Only q near −p·a₀/a₁ can give a small residual.
            let q0 = (-(p as f64) * a[(0, 0)] / a[(1, 0)]).round() as i64;
            for q in q0 - 1..=q0 + 1 {
                if (p, q) != (0, 0) && q.abs() <= 10_000 {
                    best = best.min((p as f64 * a[(0, 0)] + q as f64 * a[(1, 0)]).abs());
                }
            }
        }
        assert!(best > 1e-5, "{best}");
    }

    #[test]
    fn rational_rows_give_a_witness() {
        let r = minimality_check(&col(&[0.5, 1.0 / 3.0]), 1e-6).unwrap();
        assert_eq!(r, Minimality::NonMinimal { witness: vec![2, -3] });
        let r = minimality_check(&col(&[0.5, 0.3333333333]), 1e-6).unwrap();
        assert_eq!(r, Minimality::NonMinimal { witness: vec![2, -3] });
    }

    #[test]
    fn square_identity_is_minimal() {
        let id = Mat::<f64>::identity(2);
        assert!(minimality_check(&id, 1e-6).unwrap().is_minimal());
    }

    #[test]
    fn flow_basics() {
        let a = fib();
        let w = TorusPoint::zero(2);
        assert_eq!(address_flow(&w, &a, &[0.0]).unwrap(), w);
        let one = address_flow(&w, &a, &[1.0]).unwrap();
        assert!((one.coords()[0] - 0.276393).abs() < 1e-6);
        assert!((one.coords()[1] - 0.447214).abs() < 1e-6);
        let far = address_flow(&w, &a, &[10.0]).unwrap();
        assert!(far.coords().iter().all(|&x| (0.0..1.0).contains(&x)));
        assert!(address_flow(&w, &a, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn discrepancy_separates_minimal_and_periodic() {
        assert!(equidistribution_discrepancy(&fib(), 1e4, 8).unwrap() < 0.05);
        assert!(equidistribution_discrepancy(&col(&[0.5, 1.0 / 3.0]), 1e4, 8).unwrap() > 0.2);
        let id = Mat::<f64>::identity(1);
        assert!(equidistribution_discrepancy(&id, 1e3, 8).unwrap() < 0.01);
        assert!(equidistribution_discrepancy(&id, 0.0, 8).is_err());
        assert!(equidistribution_discrepancy(&id, 1.0, 1).is_err());
    }
}
