//! Constrained least-squares fit of the linear map `ℓ` and its deviation profile.

use super::AddressedSample;
use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, symmetric_eigen, Mat};
use crate::scalar::Real;

pub const DEFAULT_WINDOW_RATIO: f64 = 0.1;

/// Number of dyadic radii `R_max / 2^k` in a deviation profile.
const PROFILE_LEVELS: usize = 9;

/// The matrix `A` of `ℓ`, the sup deviation `C = max ‖φ(t) − A·t‖` and the
/// running maximum `C(R)` over `‖t‖ ≤ R`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearApprox<T> {
    a: Mat<T>,
    kernel: Mat<T>,
    c: T,
    profile: Vec<(T, T)>,
    /// `(‖t‖, running max deviation)` sorted by norm.
    running: Vec<(T, T)>,
}

impl<T: Real> LinearApprox<T> {
    /// `s × d` matrix of `ℓ`.
    pub fn matrix(&self) -> &Mat<T> {
        &self.a
    }

    /// `s × n` matrix whose orthonormal columns span the kernel of the embedding.
    pub fn kernel(&self) -> &Mat<T> {
        &self.kernel
    }

    pub fn c(&self) -> T {
        self.c
    }

    /// `(R, C(R))` pairs with `R` increasing.
    pub fn profile(&self) -> &[(T, T)] {
        &self.profile
    }

    /// Largest deviation over sample points with `‖t‖ ≤ r`.
    pub fn deviation_at(&self, r: T) -> T {
        let k = self.running.partition_point(|(n, _)| *n <= r);
        if k == 0 {
            T::zero()
        } else {
            self.running[k - 1].1
        }
    }

    /// `A·t`.
    pub fn apply(&self, t: &[T]) -> Vec<T> {
        self.a.mul_vec(t)
    }
}

fn lift<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("finite value")
}

/// Orthonormal basis (as columns) of the kernel of `u ↦ Vᵀu` for the `s × d`
/// generator matrix `V`: eigenvectors of `VVᵀ` with the `s − d` smallest
/// eigenvalues, orthonormalised with the first significant entry positive.
pub fn embedding_kernel<T: Real>(v: &Mat<T>) -> Result<Mat<T>> {
    let (s, d) = (v.rows(), v.cols());
    if s <= d {
        return Ok(Mat::zeros(s, 0));
    }
    let (_, vecs) = symmetric_eigen(&v.mul(&v.transpose()));
    let cols: Vec<Vec<T>> = (0..s - d).map(|j| vecs.col(j)).collect();
    Ok(Mat::from_cols(&orthonormalize(&cols)?))
}

/// Fits `A = A₀ + K·M` minimising `Σ ‖φ(t) − A·t‖²` under `embed(A·t) = t`.
///
/// `A₀ = V(VᵀV)⁻¹` is the least-norm section of the embedding `u ↦ Vᵀu`,
/// `K` spans its kernel and `M` solves the unconstrained problem
/// `min Σ ‖Kᵀφ(t) − M·t‖²`, which decouples because `KᵀA₀ = 0`.
pub fn fit_linear_map<T: Real>(a: &AddressedSample) -> Result<LinearApprox<T>> {
    let basis = a.basis();
    let (s, d) = (basis.s(), basis.d());
    let v: Mat<T> = Mat::from_rows(
        &basis
            .vectors()
            .iter()
            .map(|r| r.iter().map(|&x| lift(x)).collect())
            .collect::<Vec<_>>(),
    );
    let vtv_inv = v.transpose().mul(&v).inverse().ok_or(Error::DegenerateSpan)?;
    let a0 = v.mul(&vtv_inv);
    let n = s - d;
    let kernel = embedding_kernel(&v)?;

    let ts: Vec<Vec<T>> = a
        .points()
        .iter()
        .map(|p| p.iter().map(|&x| lift(x)).collect())
        .collect();
    let phis: Vec<Vec<T>> = a
        .coords()
        .iter()
        .map(|c| c.iter().map(|&x| T::from_i64(x).unwrap()).collect())
        .collect();

    let mut tt = Mat::zeros(d, d);
    let mut yt = Mat::zeros(n, d);
    let kt = kernel.transpose();
    for (t, phi) in ts.iter().zip(&phis) {
        let y = kt.mul_vec(phi);
        for i in 0..d {
            for j in 0..d {
                tt[(i, j)] = tt[(i, j)] + t[i] * t[j];
            }
        }
        for i in 0..n {
            for j in 0..d {
                yt[(i, j)] = yt[(i, j)] + y[i] * t[j];
            }
        }
    }
    let tt_inv = tt.inverse().ok_or(Error::DegenerateSpan)?;
    let m = yt.mul(&tt_inv);
    let a_mat = if n == 0 { a0 } else { a0.add(&kernel.mul(&m)) };
    Ok(assemble(a_mat, kernel, &ts, &phis))
}

/// Builds the approximation record (sup deviation, running maximum, dyadic
/// profile) for a given matrix.
pub(super) fn assemble<T: Real>(a_mat: Mat<T>, kernel: Mat<T>, ts: &[Vec<T>], phis: &[Vec<T>]) -> LinearApprox<T> {
    let mut devs: Vec<(T, T)> = ts
        .iter()
        .zip(phis)
        .map(|(t, phi)| {
            let at = a_mat.mul_vec(t);
            let dev = phi
                .iter()
                .zip(&at)
                .fold(T::zero(), |acc, (p, q)| acc + (*p - *q) * (*p - *q))
                .sqrt();
            let norm = t.iter().fold(T::zero(), |acc, x| acc + *x * *x).sqrt();
            (norm, dev)
        })
        .collect();
    devs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut best = T::zero();
    for e in devs.iter_mut() {
        best = best.max(e.1);
        e.1 = best;
    }
    let r_max = devs.last().map_or(T::zero(), |e| e.0);
    let mut approx = LinearApprox {
        a: a_mat,
        kernel,
        c: best,
        profile: Vec::new(),
        running: devs,
    };
    let two = lift::<T>(2.0);
    let mut r = r_max;
    let mut profile = Vec::new();
    for _ in 0..PROFILE_LEVELS {
        if r <= T::zero() {
            break;
        }
        profile.push((r, approx.deviation_at(r)));
        r = r / two;
    }
    profile.reverse();
    approx.profile = profile;
    approx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeyerVerdict {
    MeyerPlausible,
    Rejected,
}

impl MeyerVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            MeyerVerdict::MeyerPlausible => "meyer_plausible",
            MeyerVerdict::Rejected => "rejected",
        }
    }
}

/// Plateau test on the profile: plausible iff `C(R_max) ≤ (1 + ratio)·C(R_max/2)`.
pub fn meyer_test<T: Real>(l: &LinearApprox<T>, window_ratio: f64) -> Result<MeyerVerdict> {
    let p = l.profile();
    if p.len() < 4 {
        return Err(Error::InsufficientProfile(p.len()));
    }
    if !(window_ratio > 0.0 && window_ratio < 1.0) {
        return Err(Error::InvalidArgument("window_ratio must lie in (0, 1)".into()));
    }
    let full = p[p.len() - 1].1;
    let half = p[p.len() - 2].1;
    Ok(if full <= lift::<T>(1.0 + window_ratio) * half {
        MeyerVerdict::MeyerPlausible
    } else {
        MeyerVerdict::Rejected
    })
}

/// `ℓ(t) − φ(t)` at the translated sample point `t`.
pub fn cocycle_value<T: Real>(
    a: &AddressedSample,
    l: &LinearApprox<T>,
    t: &[f64],
) -> Result<Vec<T>> {
    if t.len() != a.d() {
        return Err(Error::DimensionMismatch {
            expected: a.d(),
            found: t.len(),
        });
    }
    let i = a.find(t).ok_or(Error::PointNotInSample)?;
    let tv: Vec<T> = a.points()[i].iter().map(|&x| lift(x)).collect();
    Ok(l
        .apply(&tv)
        .into_iter()
        .zip(&a.coords()[i])
        .map(|(x, &c)| x - T::from_i64(c).unwrap())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::address::difference_group_basis;
    use crate::exact_arith::QuadExt;
    use crate::pointsets::{substitution_generate, BoxRegion, PointSample};

    fn fib_patch(iterations: u32) -> PointSample {
        substitution_generate("fibonacci", iterations).unwrap()
    }

    #[test]
    fn integers_fit_exactly() {
        let s = PointSample::exact(
            vec![vec![QuadExt::int(1)]],
            (0..=20).map(|k| vec![k]).collect(),
            BoxRegion::interval(0.0, 20.0).unwrap(),
        )
        .unwrap();
        let a = difference_group_basis(&s, 1e-6).unwrap();
        let l = fit_linear_map::<f64>(&a).unwrap();
        assert!((l.matrix()[(0, 0)] - 1.0).abs() < 1e-14);
        assert!(l.c() < 1e-12);
        assert_eq!(meyer_test(&l, 0.1).unwrap(), MeyerVerdict::MeyerPlausible);
        assert_eq!(cocycle_value(&a, &l, &[0.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn fibonacci_fit_approaches_the_ideal_map() {
        let s = fib_patch(13);
        let a = difference_group_basis(&s, 1e-6).unwrap();
        assert_eq!(a.basis().vectors(), &[vec![1.0], vec![QuadExt::golden().to_f64()]]);
        let l = fit_linear_map::<f64>(&a).unwrap();
        let r5 = 5f64.sqrt();
        assert!((l.matrix()[(0, 0)] - (5.0 - r5) / 10.0).abs() < 1e-4);
        assert!((l.matrix()[(1, 0)] - r5 / 5.0).abs() < 1e-4);
        assert!(l.c() < 2.0);
        assert_eq!(meyer_test(&l, 0.1).unwrap(), MeyerVerdict::MeyerPlausible);
        let p = l.profile();
        assert!(p.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));

        // Constraint embed(A·t) = t at arbitrary t.
        for t in [-3.7, 0.1, 250.0] {
            let u = l.apply(&[t]);
            assert!((a.basis().embed(&u)[0] - t).abs() < 1e-10);
        }
    }

    #[test]
    fn single_precision_fit_runs() {
        let a = difference_group_basis(&fib_patch(10), 1e-6).unwrap();
        let l = fit_linear_map::<f32>(&a).unwrap();
        assert!((l.matrix()[(1, 0)] - 0.447_214).abs() < 1e-2);
    }

    #[test]
    fn cocycle_is_additive() {
        let a = difference_group_basis(&fib_patch(10), 1e-6).unwrap();
        let l = fit_linear_map::<f64>(&a).unwrap();
        let tau = QuadExt::golden().to_f64();
        let (x, y) = (1.0, tau);
        if let (Ok(u), Ok(v), Ok(w)) = (
            cocycle_value(&a, &l, &[x]),
            cocycle_value(&a, &l, &[y]),
            cocycle_value(&a, &l, &[x + y]),
        ) {
            for k in 0..2 {
                assert!((u[k] + v[k] - w[k]).abs() < 1e-9);
            }
        }
        assert_eq!(cocycle_value(&a, &l, &[0.123]), Err(Error::PointNotInSample));
    }

    #[test]
    fn short_profiles_are_rejected() {
        let s = PointSample::exact(
            vec![vec![QuadExt::int(1)]],
            vec![vec![0], vec![1]],
            BoxRegion::interval(0.0, 1.0).unwrap(),
        )
        .unwrap();
        let a = difference_group_basis(&s, 1e-6).unwrap();
        let mut l = fit_linear_map::<f64>(&a).unwrap();
        l.profile.truncate(3);
        assert_eq!(meyer_test(&l, 0.1), Err(Error::InsufficientProfile(3)));
    }
}
