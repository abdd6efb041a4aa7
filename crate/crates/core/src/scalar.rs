//! Scalar abstractions shared by the geometric modules.
//!
//! [`Scalar`] covers ordered fields: `f32`, `f64` and the exact [`QuadExt`].
//! [`Real`] adds the transcendental operations needed for least squares and
//! orthonormal bases, and is implemented for the float types only.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{Float, FromPrimitive, One, Zero};

use crate::exact_arith::QuadExt;

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// True when arithmetic is exact (no rounding).
    const EXACT: bool;

    /// Rounded to the nearest `f64`.
    fn as_f64(&self) -> f64;

    /// Exact for `QuadExt`, nearest value otherwise.
    fn from_quad(q: &QuadExt) -> Self;

    /// Floats convert to the dyadic rational they denote.
    fn to_quad(&self) -> QuadExt;

    /// Exact for floats; for `QuadExt` the dyadic rational equal to `x`.
    fn lift_f64(x: f64) -> Self;

    fn of_int(n: i64) -> Self;

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

/// Scalars with square roots and the rest of the `Float` toolbox.
pub trait Real: Scalar + Float + FromPrimitive {
    /// Machine epsilon as `f64`, used to scale tolerances.
    fn eps_f64() -> f64 {
        <Self as Float>::epsilon().as_f64()
    }
}

impl<T: Scalar + Float + FromPrimitive> Real for T {}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;
            fn as_f64(&self) -> f64 {
                *self as f64
            }
            fn from_quad(q: &QuadExt) -> Self {
                q.to_f64() as $t
            }
            fn to_quad(&self) -> QuadExt {
                QuadExt::from_f64(*self as f64)
            }
            fn lift_f64(x: f64) -> Self {
                x as $t
            }
            fn of_int(n: i64) -> Self {
                n as $t
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for QuadExt {
    const EXACT: bool = true;
    fn as_f64(&self) -> f64 {
        self.to_f64()
    }
    fn from_quad(q: &QuadExt) -> Self {
        q.clone()
    }
    fn to_quad(&self) -> QuadExt {
        self.clone()
    }
    fn lift_f64(x: f64) -> Self {
        QuadExt::from_f64(x)
    }
    fn of_int(n: i64) -> Self {
        QuadExt::int(n)
    }
}

/// `Σ c_j · v_j` for integer coefficients and scalar vectors of equal length.
pub fn combine<T: Scalar>(coeffs: &[i64], vectors: &[Vec<T>]) -> Vec<T> {
    let dim = vectors.first().map_or(0, Vec::len);
    let mut out = vec![T::zero(); dim];
    for (c, v) in coeffs.iter().zip(vectors) {
        if *c == 0 {
            continue;
        }
        let c = T::of_int(*c);
        for (o, x) in out.iter_mut().zip(v) {
            *o = o.clone() + c.clone() * x.clone();
        }
    }
    out
}

pub fn to_f64_vec<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(Scalar::as_f64).collect()
}

pub fn norm_f64(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
