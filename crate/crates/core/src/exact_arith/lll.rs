//! Integral LLL reduction and integer-relation detection.
//!
//! The reduction works entirely in integers (Cohen, Algorithm 2.6.7) with the
//! Lovász constant 99/100.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_SCALE: u64 = 10_000_000_000;
pub const DEFAULT_TOL: f64 = 1e-6;

const DELTA_NUM: i64 = 99;
const DELTA_DEN: i64 = 100;

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Nearest integer to `num/den` for `den > 0`, ties rounded up.
fn round_div(num: &BigInt, den: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    (num * &two + den).div_floor(&(den * &two))
}

/// LLL-reduces the rows of `basis`, which must be linearly independent.
pub fn lll_reduce(basis: &[Vec<BigInt>]) -> Result<Vec<Vec<BigInt>>> {
    let n = basis.len();
    let mut b = basis.to_vec();
    if n <= 1 {
        return Ok(b);
    }
    // d[i + 1] is the Gram determinant of the first i + 1 rows; d[0] = 1.
    let mut d = vec![BigInt::zero(); n + 1];
    let mut lam = vec![vec![BigInt::zero(); n]; n];
    d[0] = BigInt::from(1);
    d[1] = dot(&b[0], &b[0]);
    if d[1].is_zero() {
        return Err(Error::InvalidArgument("LLL basis is dependent".into()));
    }
    let mut k = 1;
    let mut kmax = 0;
    while k < n {
        if k > kmax {
            kmax = k;
            for j in 0..=k {
                let mut u = dot(&b[k], &b[j]);
                for i in 0..j {
                    u = (&d[i + 1] * &u - &lam[k][i] * &lam[j][i]) / &d[i];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    if u.is_zero() {
                        return Err(Error::InvalidArgument("LLL basis is dependent".into()));
                    }
                    d[k + 1] = u;
                }
            }
        }
        reduce(&mut b, &mut lam, &d, k, k - 1);
        let (num, den) = (BigInt::from(DELTA_NUM), BigInt::from(DELTA_DEN));
        let lhs = &d[k + 1] * &d[k - 1] * &den;
        let rhs = &d[k] * &d[k] * &num - &lam[k][k - 1] * &lam[k][k - 1] * &den;
        if lhs < rhs {
            swap(&mut b, &mut lam, &mut d, k, kmax);
            k = k.saturating_sub(1).max(1);
        } else {
            for l in (0..k.saturating_sub(1)).rev() {
                reduce(&mut b, &mut lam, &d, k, l);
            }
            k += 1;
        }
    }
    Ok(b)
}

fn reduce(b: &mut [Vec<BigInt>], lam: &mut [Vec<BigInt>], d: &[BigInt], k: usize, l: usize) {
    let two_lam: BigInt = &lam[k][l] * BigInt::from(2);
    if two_lam.abs() <= d[l + 1] {
        return;
    }
    let q = round_div(&lam[k][l], &d[l + 1]);
    let bl = b[l].clone();
    for (x, y) in b[k].iter_mut().zip(&bl) {
        *x -= &q * y;
    }
    lam[k][l] -= &q * &d[l + 1];
    for i in 0..l {
        let v = &q * &lam[l][i];
        lam[k][i] -= v;
    }
}

fn swap(b: &mut [Vec<BigInt>], lam: &mut [Vec<BigInt>], d: &mut [BigInt], k: usize, kmax: usize) {
    b.swap(k, k - 1);
    for j in 0..k - 1 {
        let t = lam[k][j].clone();
        lam[k][j] = lam[k - 1][j].clone();
        lam[k - 1][j] = t;
    }
    let l = lam[k][k - 1].clone();
    let big_b = (&d[k - 1] * &d[k + 1] + &l * &l) / &d[k];
    for i in k + 1..=kmax {
        let t = lam[i][k].clone();
        lam[i][k] = (&d[k + 1] * &lam[i][k - 1] - &l * &t) / &d[k];
        lam[i][k - 1] = (&big_b * &t + &l * &lam[i][k]) / &d[k + 1];
    }
    d[k] = big_b;
}

/// A candidate integer relation and its residual relative to `max ‖v_i‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub coeffs: Vec<i64>,
    pub relative_residual: f64,
}

/// Every nonzero short vector of the reduced augmented lattice, with its residual.
///
/// Sign is normalised so the first nonzero coefficient is positive. Rows whose
/// coefficients overflow `i64` are dropped; they never pass a residual test.
pub fn relation_candidates<T: Scalar>(v: &[Vec<T>], scale: u64) -> Result<Vec<Relation>> {
    let Some(first) = v.first() else {
        return Ok(Vec::new());
    };
    let m = first.len();
    if let Some(bad) = v.iter().find(|x| x.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: bad.len(),
        });
    }
    let vf: Vec<Vec<f64>> = v.iter().map(|x| crate::scalar::to_f64_vec(x)).collect();
    let k = vf.len();
    let scale = scale as f64;
    let mut basis = Vec::with_capacity(k);
    for (i, x) in vf.iter().enumerate() {
        let mut row = vec![BigInt::zero(); k + m];
        row[i] = BigInt::from(1);
        for (j, &c) in x.iter().enumerate() {
            row[k + j] = BigInt::from_f64((c * scale).round()).ok_or_else(|| {
                Error::InvalidArgument(format!("non-finite value {c} in relation input"))
            })?;
        }
        basis.push(row);
    }
    let reduced = lll_reduce(&basis)?;
    let max_norm = vf
        .iter()
        .map(|x| crate::scalar::norm_f64(x))
        .fold(0.0, f64::max);
    let mut out: Vec<Relation> = Vec::new();
    for row in reduced {
        let Some(mut coeffs) = row[..k].iter().map(ToPrimitive::to_i64).collect::<Option<Vec<_>>>()
        else {
            continue;
        };
        let Some(lead) = coeffs.iter().find(|&&c| c != 0).copied() else {
            continue;
        };
        if lead < 0 {
            coeffs.iter_mut().for_each(|c| *c = -*c);
        }
        let residual: f64 = (0..m)
            .map(|j| {
                let s: f64 = coeffs.iter().zip(&vf).map(|(&c, x)| c as f64 * x[j]).sum();
                s * s
            })
            .sum::<f64>()
            .sqrt();
        let relative_residual = if max_norm > 0.0 {
            residual / max_norm
        } else {
            0.0
        };
        if !out.iter().any(|r| r.coeffs == coeffs) {
            out.push(Relation {
                coeffs,
                relative_residual,
            });
        }
    }
    Ok(out)
}

/// Integer vectors `m` with `‖Σ m_i v_i‖ ≤ tol · max ‖v_i‖`, found by lattice reduction
/// of the vectors scaled by `scale` and augmented with an identity block.
pub fn lll_relations<T: Scalar>(v: &[Vec<T>], tol: f64, scale: u64) -> Result<Vec<Vec<i64>>> {
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    Ok(relation_candidates(v, scale)?
        .into_iter()
        .filter(|r| r.relative_residual <= tol)
        .map(|r| r.coeffs)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(r: &[&[i64]]) -> Vec<Vec<BigInt>> {
        r.iter()
            .map(|x| x.iter().map(|&c| BigInt::from(c)).collect())
            .collect()
    }

    #[test]
    fn reduces_a_skewed_basis() {
        let b = rows(&[&[1, 0, 0], &[4, 1, 0], &[9, 7, 1]]);
        let r = lll_reduce(&b).unwrap();
        for v in &r {
            assert_eq!(dot(v, v), BigInt::from(1));
        }
    }

    #[test]
    fn classic_knuth_example() {
        // Reduces to (0,1,0), (1,0,1), (-1,0,2); covolume 3 is preserved.
        let b = rows(&[&[1, 1, 1], &[-1, 0, 2], &[3, 5, 6]]);
        let r = lll_reduce(&b).unwrap();
        let norms: Vec<BigInt> = r.iter().map(|v| dot(v, v)).collect();
        assert_eq!(norms, vec![1.into(), 2.into(), 5.into()]);
        let m = crate::exact_arith::IntMatrix::from_big_rows(r).unwrap();
        assert_eq!(m.det().unwrap().abs(), BigInt::from(3));
    }

    #[test]
    fn rejects_dependent_rows() {
        let b = rows(&[&[1, 2], &[2, 4]]);
        assert!(lll_reduce(&b).is_err());
    }

    #[test]
    fn relation_examples() {
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(lll_relations(&id, DEFAULT_TOL, DEFAULT_SCALE).unwrap().is_empty());

        let halves = vec![vec![0.5], vec![1.0 / 3.0]];
        let rel = lll_relations(&halves, DEFAULT_TOL, DEFAULT_SCALE).unwrap();
        assert!(rel.contains(&vec![2, -3]), "{rel:?}");

        let irr = vec![vec![1.0], vec![5f64.sqrt()]];
        assert!(lll_relations(&irr, 1e-9, DEFAULT_SCALE).unwrap().is_empty());
    }

    #[test]
    fn mismatched_dimensions() {
        let v = vec![vec![1.0], vec![1.0, 2.0]];
        assert!(matches!(
            lll_relations(&v, 1e-6, DEFAULT_SCALE),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
