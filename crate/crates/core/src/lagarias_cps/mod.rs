//! Euclidean cut-and-project schemes: the lifted lattice built from an address
//! map and its linear approximation, the star map, and lattice enumeration.

mod flow;
mod io;

use crate::address::{embedding_kernel, AddressedSample};
use crate::error::{Error, Result};
use crate::exact_arith::{integer_coordinates, QuadExt};
use crate::linalg::Mat;
use crate::scalar::{combine, Real, Scalar};
use crate::spatial::NearestIndex;

pub use flow::{
    address_flow, equidistribution_discrepancy, minimality_check, Minimality, TorusPoint,
};
pub use io::{cps_from_json, cps_to_json};

/// Lattices whose covolume falls below this are rejected.
pub const MIN_COVOLUME: f64 = 1e-12;

/// Candidate budget for [`EuclideanCps::enumerate`].
pub const MAX_CANDIDATES: f64 = 1e8;

/// Exact generator data for schemes over `Q(√D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactLattice {
    pub generators: Vec<Vec<QuadExt>>,
    /// Exact star vectors, when the internal coordinates are exact too.
    pub star: Option<Vec<Vec<QuadExt>>>,
}

/// A lattice `L̃ ⊂ R^d × R^n` spanned by `ṽ_j = (v_j, v_j*)`, `j = 1..s`.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanCps<T> {
    d: usize,
    n: usize,
    generators: Mat<T>,
    star: Mat<T>,
    kernel: Option<Mat<T>>,
    psi: Mat<T>,
    psi_inv: Mat<T>,
    covolume: T,
    exact: Option<ExactLattice>,
}

impl<T: Real> EuclideanCps<T> {
    /// Scheme from physical generators `v_j` and star vectors `v_j*`.
    pub fn from_lifted(generators: Vec<Vec<T>>, star: Vec<Vec<T>>) -> Result<Self> {
        let s = generators.len();
        if s == 0 || star.len() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                found: star.len(),
            });
        }
        let d = generators[0].len();
        let n = star[0].len();
        if d + n != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                found: d + n,
            });
        }
        if let Some(bad) = generators.iter().find(|g| g.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.len(),
            });
        }
        if let Some(bad) = star.iter().find(|g| g.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        let lifted: Vec<Vec<T>> = generators
            .iter()
            .zip(&star)
            .map(|(g, h)| g.iter().chain(h).copied().collect())
            .collect();
        let psi = Mat::from_cols(&lifted);
        let covolume = psi.det().abs();
        if covolume.as_f64() < MIN_COVOLUME {
            return Err(Error::SingularLattice(covolume.as_f64()));
        }
        let psi_inv = psi.inverse().ok_or(Error::SingularLattice(covolume.as_f64()))?;
        Ok(EuclideanCps {
            d,
            n,
            generators: Mat::from_rows(&generators),
            star: if n == 0 { Mat::zeros(s, 0) } else { Mat::from_rows(&star) },
            kernel: None,
            psi,
            psi_inv,
            covolume,
            exact: None,
        })
    }

    /// Scheme over `Q(√D)` with exact physical and internal generators.
    pub fn exact(generators: Vec<Vec<QuadExt>>, star: Vec<Vec<QuadExt>>) -> Result<Self> {
        let conv = |v: &Vec<Vec<QuadExt>>| -> Vec<Vec<T>> {
            v.iter()
                .map(|r| r.iter().map(|x| T::from_f64(x.to_f64()).unwrap()).collect())
                .collect()
        };
        let mut cps = EuclideanCps::from_lifted(conv(&generators), conv(&star))?;
        cps.exact = Some(ExactLattice {
            generators,
            star: Some(star),
        });
        Ok(cps)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.d + self.n
    }

    /// `s × d`, row `j` is `v_j`.
    pub fn generators(&self) -> &Mat<T> {
        &self.generators
    }

    /// `s × n`, row `j` is `v_j*`.
    pub fn star_vectors(&self) -> &Mat<T> {
        &self.star
    }

    /// Orthonormal kernel basis used to coordinatise the internal space, when
    /// the scheme came from [`build_cps`].
    pub fn kernel_basis(&self) -> Option<&Mat<T>> {
        self.kernel.as_ref()
    }

    /// The `s × s` matrix sending `e_j` to `ṽ_j`.
    pub fn psi(&self) -> &Mat<T> {
        &self.psi
    }

    pub fn psi_inverse(&self) -> &Mat<T> {
        &self.psi_inv
    }

    pub fn covolume(&self) -> T {
        self.covolume
    }

    pub fn exact_lattice(&self) -> Option<&ExactLattice> {
        self.exact.as_ref()
    }

    /// True when both projections of lattice points can be evaluated exactly.
    pub fn is_exact(&self) -> bool {
        self.exact.as_ref().is_some_and(|e| e.star.is_some())
    }

    pub fn lifted_basis(&self) -> Vec<Vec<T>> {
        (0..self.s()).map(|j| self.psi.col(j)).collect()
    }

    /// `p₁(ψ·m) = Σ m_j v_j`.
    pub fn physical(&self, m: &[i64]) -> Vec<T> {
        combine_rows(&self.generators, m)
    }

    /// `p₂(ψ·m) = Σ m_j v_j*`.
    pub fn star(&self, m: &[i64]) -> Vec<T> {
        combine_rows(&self.star, m)
    }

    /// Physical projection in an exact scalar type when exact generators exist,
    /// otherwise the rounded value lifted into `S`.
    pub fn physical_as<S: Scalar>(&self, m: &[i64]) -> Vec<S> {
        match &self.exact {
            Some(e) => {
                let g: Vec<Vec<S>> = e.generators.iter().map(|r| r.iter().map(S::from_quad).collect()).collect();
                combine(m, &g)
            }
            None => self.physical(m).iter().map(|x| S::lift_f64(x.as_f64())).collect(),
        }
    }

    /// Star image in `S`, exact when exact star vectors exist.
    pub fn star_as<S: Scalar>(&self, m: &[i64]) -> Vec<S> {
        match self.exact.as_ref().and_then(|e| e.star.as_ref()) {
            Some(st) => {
                let g: Vec<Vec<S>> = st.iter().map(|r| r.iter().map(S::from_quad).collect()).collect();
                combine(m, &g)
            }
            None => self.star(m).iter().map(|x| S::lift_f64(x.as_f64())).collect(),
        }
    }

    /// The ideal linear map: `ℓ(t)` is the unique `u` with `ψ·u = (t, 0)`, so
    /// `A` is the first `d` columns of `ψ⁻¹`.
    pub fn ideal_linear_map(&self) -> Mat<T> {
        let rows: Vec<Vec<T>> = (0..self.s())
            .map(|i| (0..self.d).map(|j| self.psi_inv[(i, j)]).collect())
            .collect();
        Mat::from_rows(&rows)
    }

    /// Star vectors of an arbitrary basis of the group, for exact schemes:
    /// each `b_k` is written in the scheme's generators and mapped linearly.
    pub fn exact_star_of(&self, x: &[QuadExt]) -> Option<Vec<QuadExt>> {
        let e = self.exact.as_ref()?;
        let st = e.star.as_ref()?;
        let m = integer_coordinates(&e.generators, x)?;
        Some(combine(&m, st))
    }

    /// Checks that no two distinct lattice points among roughly `10^4` of
    /// smallest height share a physical projection within `1e-9`.
    pub fn physical_injective(&self) -> bool {
        let s = self.s();
        let mut h = 1i64;
        while ((2 * (h + 1) + 1) as f64).powi(s as i32) <= 1e4 {
            h += 1;
        }
        let coords = box_coords(s, h);
        let pts: Vec<Vec<f64>> = coords
            .iter()
            .map(|m| self.physical(m).iter().map(|x| x.as_f64()).collect())
            .collect();
        let idx = NearestIndex::new(pts.clone(), 1e-3);
        pts.iter().enumerate().all(|(i, p)| {
            idx.within(p, 1e-9).into_iter().all(|j| j == i)
        })
    }

    /// Coordinates `m` whose lifted point `ψ·m` lies in `phys × internal`,
    /// both given as `(lo, hi)` boxes. The search is an over-approximation
    /// through `ψ⁻¹`, pruned level by level; callers filter exactly.
    pub fn enumerate(
        &self,
        phys: (&[f64], &[f64]),
        internal: (&[f64], &[f64]),
    ) -> Result<Vec<Vec<i64>>> {
        let s = self.s();
        let lo: Vec<f64> = phys.0.iter().chain(internal.0).copied().collect();
        let hi: Vec<f64> = phys.1.iter().chain(internal.1).copied().collect();
        if lo.len() != s || hi.len() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                found: lo.len(),
            });
        }
        let pinv: Vec<Vec<f64>> = self.psi_inv.to_rows().iter().map(|r| r.iter().map(|x| x.as_f64()).collect()).collect();
        let mut ranges = Vec::with_capacity(s);
        let mut count = 1.0f64;
        for row in &pinv {
            let (mut a, mut b) = (0.0, 0.0);
            for ((r, l), h) in row.iter().zip(&lo).zip(&hi) {
                a += (r * l).min(r * h);
                b += (r * l).max(r * h);
            }
            let slack = 1e-9 * (1.0 + a.abs().max(b.abs()));
            let (a, b) = ((a - slack).ceil(), (b + slack).floor());
            if a > b {
                return Ok(Vec::new());
            }
            count *= b - a + 1.0;
            ranges.push((a as i64, b as i64));
        }
        if count > MAX_CANDIDATES {
            return Err(Error::UnboundedEnumeration(count));
        }
        let lifted: Vec<Vec<f64>> = self
            .lifted_basis()
            .iter()
            .map(|v| v.iter().map(|x| x.as_f64()).collect())
            .collect();
        // suffix[k] bounds Σ_{j ≥ k} m_j ṽ_j coordinatewise.
        let mut suffix = vec![(vec![0.0; s], vec![0.0; s]); s + 1];
        for k in (0..s).rev() {
            let (mut a, mut b) = suffix[k + 1].clone();
            for i in 0..s {
                let x = lifted[k][i] * ranges[k].0 as f64;
                let y = lifted[k][i] * ranges[k].1 as f64;
                a[i] += x.min(y);
                b[i] += x.max(y);
            }
            suffix[k] = (a, b);
        }
        let mut out = Vec::new();
        let mut m = vec![0i64; s];
        let ctx = Enum {
            lifted: &lifted,
            ranges: &ranges,
            suffix: &suffix,
            lo: &lo,
            hi: &hi,
        };
        ctx.recurse(0, &mut m, &vec![0.0; s], &mut out);
        Ok(out)
    }
}

struct Enum<'a> {
    lifted: &'a [Vec<f64>],
    ranges: &'a [(i64, i64)],
    suffix: &'a [(Vec<f64>, Vec<f64>)],
    lo: &'a [f64],
    hi: &'a [f64],
}

impl Enum<'_> {
    fn recurse(&self, k: usize, m: &mut Vec<i64>, partial: &[f64], out: &mut Vec<Vec<i64>>) {
        let s = self.lifted.len();
        if k == s {
            out.push(m.clone());
            return;
        }
        let (rest_lo, rest_hi) = &self.suffix[k + 1];
        let (mut a, mut b) = (self.ranges[k].0 as f64, self.ranges[k].1 as f64);
        for i in 0..s {
            let v = self.lifted[k][i];
            let lo = self.lo[i] - partial[i] - rest_hi[i];
            let hi = self.hi[i] - partial[i] - rest_lo[i];
            let slack = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
            if v.abs() < 1e-300 {
                if lo > slack || hi < -slack {
                    return;
                }
                continue;
            }
            let (x, y) = ((lo - slack) / v, (hi + slack) / v);
            a = a.max(x.min(y).ceil());
            b = b.min(x.max(y).floor());
        }
        let mut next = partial.to_vec();
        let mut j = a as i64;
        while (j as f64) <= b {
            m[k] = j;
            for i in 0..s {
                next[i] = partial[i] + j as f64 * self.lifted[k][i];
            }
            self.recurse(k + 1, m, &next, out);
            j += 1;
        }
        m[k] = 0;
    }
}

fn combine_rows<T: Real>(mat: &Mat<T>, m: &[i64]) -> Vec<T> {
    let mut out = vec![T::zero(); mat.cols()];
    for (j, &c) in m.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let c = T::from_i64(c).unwrap();
        for (i, o) in out.iter_mut().enumerate() {
            *o = *o + c * mat[(j, i)];
        }
    }
    out
}

/// All integer vectors in `[-h, h]^s`.
fn box_coords(s: usize, h: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..s {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-h..=h).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Builds the scheme for an addressed sample and a linear map `A` satisfying
/// `embed(A·t) = t`: `v_j*` are the kernel coordinates of `w_j = A·v_j − e_j`.
pub fn build_cps<T: Real>(a: &AddressedSample, ell: &Mat<T>) -> Result<EuclideanCps<T>> {
    let basis = a.basis();
    let (s, d) = (basis.s(), basis.d());
    if s <= d {
        return Err(Error::RankNotExceedingD { s, d });
    }
    if ell.rows() != s || ell.cols() != d {
        return Err(Error::DimensionMismatch {
            expected: s,
            found: ell.rows(),
        });
    }
    let v: Mat<T> = Mat::from_rows(
        &basis
            .vectors()
            .iter()
            .map(|r| r.iter().map(|&x| T::from_f64(x).unwrap()).collect())
            .collect::<Vec<_>>(),
    );
    let kernel = embedding_kernel(&v)?;
    let kt = kernel.transpose();
    let vt = v.transpose();
    let scale = v.max_abs().max(T::one());
    let tol = T::from_f64(1e-10).unwrap() * scale;
    let mut star = Vec::with_capacity(s);
    for j in 0..s {
        let mut w = ell.mul_vec(&v.row(j));
        w[j] = w[j] - T::one();
        let drift = vt.mul_vec(&w).iter().fold(T::zero(), |m, x| m.max(x.abs()));
        if drift > tol {
            return Err(Error::InvalidArgument(format!(
                "linear map violates embed(A·t) = t by {:e}",
                drift.as_f64()
            )));
        }
        star.push(kt.mul_vec(&w));
    }
    let mut cps = EuclideanCps::from_lifted(v.to_rows(), star)?;
    cps.kernel = Some(kernel);
    cps.exact = basis.exact_vectors().map(|g| ExactLattice {
        generators: g.to_vec(),
        star: None,
    });
    Ok(cps)
}

/// `star_map(C, m) = Σ m_j v_j*`.
pub fn star_map<T: Real>(c: &EuclideanCps<T>, coords: &[i64]) -> Result<Vec<T>> {
    if coords.len() != c.s() {
        return Err(Error::DimensionMismatch {
            expected: c.s(),
            found: coords.len(),
        });
    }
    Ok(c.star(coords))
}

/// Ideal `ℓ` for an addressed sample of an exact scheme, in the sample's own
/// basis: the basis vectors are lifted with their exact star images.
pub fn ideal_map_for<T: Real>(truth: &EuclideanCps<T>, a: &AddressedSample) -> Result<Mat<T>> {
    let gens = a
        .basis()
        .exact_vectors()
        .ok_or_else(|| Error::InvalidArgument("ideal map needs an exact basis".into()))?;
    let star = gens
        .iter()
        .map(|g| {
            truth.exact_star_of(g).ok_or_else(|| {
                Error::InvalidArgument("basis vector is not in the scheme's group".into())
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EuclideanCps::<T>::exact(gens.to_vec(), star)?.ideal_linear_map())
}

/// Largest distance from a point of the cube `[-1/2, 1/2]^n` to the nearest star
/// image of a lattice point of height at most `height`.
pub fn star_net_radius<T: Real>(c: &EuclideanCps<T>, height: i64) -> Result<f64> {
    let s = c.s();
    let n = c.n();
    if n == 0 || height < 1 {
        return Err(Error::InvalidArgument("need n ≥ 1 and height ≥ 1".into()));
    }
    if ((2 * height + 1) as f64).powi(s as i32) > 4e6 {
        return Err(Error::InvalidArgument("height too large for enumeration".into()));
    }
    let imgs: Vec<Vec<f64>> = box_coords(s, height)
        .iter()
        .map(|m| c.star(m).iter().map(|x| x.as_f64()).collect())
        .filter(|y: &Vec<f64>| y.iter().all(|v| v.abs() <= 1.0))
        .collect();
    if imgs.is_empty() {
        return Ok(f64::INFINITY);
    }
    let steps = match n {
        1 => 4096,
        2 => 128,
        _ => 16,
    };
    let idx = NearestIndex::new(imgs, 1.0 / steps as f64 * 4.0);
    let total = (steps + 1usize).pow(n as u32);
    let mut worst = 0.0f64;
    for mut flat in 0..total {
        let mut q = vec![0.0; n];
        for x in q.iter_mut() {
            *x = -0.5 + (flat % (steps + 1)) as f64 / steps as f64;
            flat /= steps + 1;
        }
        worst = worst.max(idx.nearest(&q).map_or(f64::INFINITY, |(_, dd)| dd));
    }
    Ok(worst)
}
