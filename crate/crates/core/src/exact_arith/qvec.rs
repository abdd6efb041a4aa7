//! Integer models of finitely generated subgroups of `Q(√D)^d`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::matrix::{hnf, solve_in_row_lattice, IntMatrix};
use super::quad::{QuadExt, Rational};
use crate::error::{Error, Result};

/// Maps `Q(√D)^d` into `Z^{2d}` by `a + b√D ↦ (L·a, L·b)` for a common
/// denominator `L`, which turns subgroup questions into integer lattice ones.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadLattice {
    disc: u64,
    dim: usize,
    scale: BigInt,
}

impl QuadLattice {
    /// The coarsest scale making every entry of `vectors` integral.
    pub fn for_vectors(vectors: &[Vec<QuadExt>]) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        let mut disc = 0u64;
        let mut scale = BigInt::one();
        for v in vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            for x in v {
                if x.disc() != 0 {
                    if disc != 0 && disc != x.disc() {
                        return Err(Error::Validation(format!(
                            "entries from Q(√{disc}) and Q(√{}) cannot be mixed",
                            x.disc()
                        )));
                    }
                    disc = x.disc();
                }
                scale = scale.lcm(x.a().denom()).lcm(x.b().denom());
            }
        }
        Ok(QuadLattice { disc, dim, scale })
    }

    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    /// Integer image, or `None` when `v` is not integral at this scale or lies in another field.
    pub fn to_int(&self, v: &[QuadExt]) -> Option<Vec<BigInt>> {
        if v.len() != self.dim {
            return None;
        }
        let mut out = Vec::with_capacity(2 * self.dim);
        for x in v {
            if x.disc() != 0 && x.disc() != self.disc {
                return None;
            }
            for part in [x.a(), x.b()] {
                let y = part * Rational::from_integer(self.scale.clone());
                if !y.is_integer() {
                    return None;
                }
                out.push(y.to_integer());
            }
        }
        Some(out)
    }

    pub fn from_int(&self, v: &[BigInt]) -> Vec<QuadExt> {
        v.chunks(2)
            .map(|ab| {
                let a = Rational::new(ab[0].clone(), self.scale.clone());
                let b = Rational::new(ab[1].clone(), self.scale.clone());
                if b.is_zero() {
                    QuadExt::rational(a)
                } else {
                    QuadExt::new(a, b, self.disc).expect("disc is square-free")
                }
            })
            .collect()
    }
}

/// Integer `x` with `Σ x_j g_j = target`, if one exists.
pub fn integer_coordinates(gens: &[Vec<QuadExt>], target: &[QuadExt]) -> Option<Vec<i64>> {
    let mut all = gens.to_vec();
    all.push(target.to_vec());
    let lat = QuadLattice::for_vectors(&all).ok()?;
    let rows: Vec<Vec<BigInt>> = gens.iter().map(|g| lat.to_int(g)).collect::<Option<_>>()?;
    let t = lat.to_int(target)?;
    let m = IntMatrix::from_big_rows(rows).ok()?;
    let (h, u) = hnf(&m);
    let rank = (0..h.rows()).filter(|&i| !h.is_zero_row(i)).count();
    if rank == 0 {
        return t.iter().all(Zero::is_zero).then(|| vec![0; gens.len()]);
    }
    let basis = IntMatrix::from_big_rows((0..rank).map(|i| h.row_vec(i)).collect()).ok()?;
    let y = solve_in_row_lattice(&basis, &t)?;
    (0..gens.len())
        .map(|j| {
            let s: BigInt = (0..rank).map(|i| &y[i] * &u[(i, j)]).sum();
            s.to_i64()
        })
        .collect()
}
