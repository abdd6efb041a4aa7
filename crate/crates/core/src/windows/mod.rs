//! Windows in the internal space: shapes, membership, distances, estimation
//! from star images, boundary-measure reports and parameter recovery.

mod estimate;
mod hull;
pub(crate) use hull::convex_hull;
mod io;
mod recover;

use crate::error::{Error, Result};
use crate::scalar::{to_f64_vec, Scalar};

pub use estimate::{
    boundary_measure_report, minimal_window_estimate, regularity_verdict, RegularityReport,
    RegularityVerdict, WindowEstimate,
};
pub use io::{window_from_json, window_to_json};
pub use recover::{nonsingular_shift, recover_parameter, Recovery, DEFAULT_CLEARANCE, DEFAULT_PITCH};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Closed,
    Interior,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape<T> {
    Box { lo: Vec<T>, hi: Vec<T> },
    Ball { center: Vec<T>, radius: T },
    /// `{y : a·y ≤ b}` for every `(a, b)`.
    Polytope { half_spaces: Vec<(Vec<T>, T)> },
    /// Points within `inflation` of the convex hull of `vertices`.
    Hull { vertices: Vec<Vec<f64>>, inflation: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Window<T> {
    n: usize,
    shape: Shape<T>,
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

impl<T: Scalar> Window<T> {
    pub fn boxed(lo: Vec<T>, hi: Vec<T>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::Validation("window box has lo > hi".into()));
        }
        Ok(Window {
            n: lo.len(),
            shape: Shape::Box { lo, hi },
        })
    }

    pub fn interval(lo: T, hi: T) -> Result<Self> {
        Window::boxed(vec![lo], vec![hi])
    }

    pub fn ball(center: Vec<T>, radius: T) -> Result<Self> {
        if radius < T::zero() {
            return Err(Error::Validation("negative ball radius".into()));
        }
        Ok(Window {
            n: center.len(),
            shape: Shape::Ball { center, radius },
        })
    }

    /// Bounded intersection of half-spaces `a·y ≤ b`.
    pub fn polytope(half_spaces: Vec<(Vec<T>, T)>) -> Result<Self> {
        let n = half_spaces.first().map_or(0, |h| h.0.len());
        for (a, _) in &half_spaces {
            check_dim(n, a.len())?;
        }
        let w = Window {
            n,
            shape: Shape::Polytope { half_spaces },
        };
        if n == 0 || w.polytope_vertices().is_empty() {
            return Err(Error::Validation("polytope is empty or unbounded".into()));
        }
        Ok(w)
    }

    /// Convex hull of `points` inflated by `inflation`; `n ≤ 2`.
    pub fn hull(points: &[Vec<f64>], inflation: f64) -> Result<Self> {
        if !(inflation >= 0.0 && inflation.is_finite()) {
            return Err(Error::Validation("inflation must be a nonnegative real".into()));
        }
        let vertices = hull::convex_hull(points)?;
        Ok(Window {
            n: vertices[0].len(),
            shape: Shape::Hull { vertices, inflation },
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> &Shape<T> {
        &self.shape
    }

    /// Closed or interior membership. Exact for exact scalars except on hulls,
    /// which are always evaluated in `f64`.
    pub fn contains(&self, x: &[T], mode: Mode) -> Result<bool> {
        check_dim(self.n, x.len())?;
        let strict = mode == Mode::Interior;
        let le = |a: &T, b: &T| if strict { a < b } else { a <= b };
        Ok(match &self.shape {
            Shape::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (a, b))| le(a, v) && le(v, b)),
            Shape::Ball { center, radius } => {
                let d2 = x
                    .iter()
                    .zip(center)
                    .fold(T::zero(), |acc, (a, c)| {
                        let t = a.clone() - c.clone();
                        acc + t.clone() * t
                    });
                le(&d2, &(radius.clone() * radius.clone()))
            }
            Shape::Polytope { half_spaces } => half_spaces.iter().all(|(a, b)| {
                let v = a
                    .iter()
                    .zip(x)
                    .fold(T::zero(), |acc, (p, q)| acc + p.clone() * q.clone());
                le(&v, b)
            }),
            Shape::Hull { vertices, inflation } => {
                let sd = hull::hull_signed_distance(vertices, &to_f64_vec(x));
                if strict {
                    sd < *inflation
                } else {
                    sd <= *inflation
                }
            }
        })
    }

    /// `f64` closed membership through the signed distance.
    pub fn contains_f64(&self, x: &[f64]) -> bool {
        self.signed_distance(x) <= 0.0
    }

    /// Negative inside, positive outside. Exact Euclidean distance for boxes,
    /// balls and hulls; for polytopes the largest normalised facet excess,
    /// which is exact inside and a lower bound outside.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Box { lo, hi } => {
                let mut outside = 0.0;
                let mut inside = f64::NEG_INFINITY;
                for ((v, a), b) in x.iter().zip(lo).zip(hi) {
                    let e = (a.as_f64() - v).max(v - b.as_f64());
                    outside += e.max(0.0).powi(2);
                    inside = inside.max(e);
                }
                if outside > 0.0 {
                    outside.sqrt()
                } else {
                    inside
                }
            }
            Shape::Ball { center, radius } => {
                let d: f64 = x
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a - c.as_f64()).powi(2))
                    .sum::<f64>()
                    .sqrt();
                d - radius.as_f64()
            }
            Shape::Polytope { half_spaces } => half_spaces
                .iter()
                .map(|(a, b)| {
                    let af = to_f64_vec(a);
                    let norm = af.iter().map(|v| v * v).sum::<f64>().sqrt();
                    (af.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() - b.as_f64()) / norm
                })
                .fold(f64::NEG_INFINITY, f64::max),
            Shape::Hull { vertices, inflation } => hull::hull_signed_distance(vertices, x) - inflation,
        }
    }

    /// Vertices of a polytope, found by intersecting `n`-subsets of facets.
    fn polytope_vertices(&self) -> Vec<Vec<f64>> {
        let Shape::Polytope { half_spaces } = &self.shape else {
            return Vec::new();
        };
        let n = self.n;
        let hs: Vec<(Vec<f64>, f64)> = half_spaces
            .iter()
            .map(|(a, b)| (to_f64_vec(a), b.as_f64()))
            .collect();
        let mut out: Vec<Vec<f64>> = Vec::new();
        let mut idx: Vec<usize> = (0..n).collect();
        if hs.len() < n {
            return out;
        }
        loop {
            let rows: Vec<Vec<f64>> = idx.iter().map(|&i| hs[i].0.clone()).collect();
            let m = crate::linalg::Mat::from_rows(&rows);
            if let Some(inv) = m.inverse() {
                let b: Vec<f64> = idx.iter().map(|&i| hs[i].1).collect();
                let v = inv.mul_vec(&b);
                let feasible = hs.iter().all(|(a, c)| {
                    a.iter().zip(&v).map(|(p, q)| p * q).sum::<f64>() <= c + 1e-9 * (1.0 + c.abs())
                });
                if feasible && !out.iter().any(|u| crate::spatial::dist(u, &v) < 1e-12) {
                    out.push(v);
                }
            }
            // Next n-subset in lexicographic order.
            let mut k = n;
            while k > 0 && idx[k - 1] == hs.len() - n + k - 1 {
                k -= 1;
            }
            if k == 0 {
                break;
            }
            idx[k - 1] += 1;
            for j in k..n {
                idx[j] = idx[j - 1] + 1;
            }
        }
        // A bounded polytope has at least n + 1 vertices.
        if out.len() <= n {
            out.clear();
        }
        out
    }

    /// `max_{y ∈ W} u·y`.
    pub fn support(&self, u: &[f64]) -> f64 {
        let unorm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        match &self.shape {
            Shape::Box { lo, hi } => u
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(c, (a, b))| (c * a.as_f64()).max(c * b.as_f64()))
                .sum(),
            Shape::Ball { center, radius } => {
                u.iter().zip(center).map(|(c, x)| c * x.as_f64()).sum::<f64>() + radius.as_f64() * unorm
            }
            Shape::Polytope { .. } => max_dot(&self.polytope_vertices(), u),
            Shape::Hull { vertices, inflation } => max_dot(vertices, u) + inflation * unorm,
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = Vec::with_capacity(self.n);
        let mut hi = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut e = vec![0.0; self.n];
            e[i] = 1.0;
            hi.push(self.support(&e));
            e[i] = -1.0;
            lo.push(-self.support(&e));
        }
        (lo, hi)
    }

    /// Lebesgue measure; hulls are measured without their inflation collar.
    pub fn volume(&self) -> f64 {
        match &self.shape {
            Shape::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b.as_f64() - a.as_f64()).product(),
            Shape::Ball { radius, .. } => {
                let r = radius.as_f64();
                match self.n {
                    1 => 2.0 * r,
                    2 => std::f64::consts::PI * r * r,
                    3 => 4.0 / 3.0 * std::f64::consts::PI * r.powi(3),
                    n => unit_ball_volume(n) * r.powi(n as i32),
                }
            }
            Shape::Polytope { .. } => {
                let v = self.polytope_vertices();
                match self.n {
                    1 | 2 => hull::convex_hull(&v).map_or(0.0, |h| hull::hull_volume(&h)),
                    _ => f64::NAN,
                }
            }
            Shape::Hull { vertices, .. } => hull::hull_volume(vertices),
        }
    }

    /// True when the window has no interior points.
    pub fn interior_is_empty(&self) -> bool {
        match &self.shape {
            Shape::Box { lo, hi } => lo.iter().zip(hi).any(|(a, b)| a >= b),
            Shape::Ball { radius, .. } => *radius <= T::zero(),
            Shape::Polytope { .. } => {
                // Chebyshev-style probe: the vertex centroid is interior iff
                // the polytope is full-dimensional.
                let v = self.polytope_vertices();
                let c: Vec<f64> = (0..self.n)
                    .map(|i| v.iter().map(|p| p[i]).sum::<f64>() / v.len() as f64)
                    .collect();
                v.is_empty() || self.signed_distance(&c) > -1e-12
            }
            Shape::Hull { vertices, inflation } => *inflation <= 0.0 && hull::is_degenerate(vertices),
        }
    }

    /// A point of the window: the box or ball center, vertex centroid otherwise.
    pub fn centroid(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| (a.as_f64() + b.as_f64()) / 2.0).collect(),
            Shape::Ball { center, .. } => to_f64_vec(center),
            Shape::Polytope { .. } => vertex_centroid(&self.polytope_vertices(), self.n),
            Shape::Hull { vertices, .. } => vertex_centroid(vertices, self.n),
        }
    }

    /// Points tracing the boundary: endpoints in 1D, a closed polygon in 2D.
    pub fn outline(&self, segments: usize) -> Result<Vec<Vec<f64>>> {
        match self.n {
            1 => {
                let (lo, hi) = self.bounding_box();
                Ok(vec![lo, hi])
            }
            2 => {
                let dirs = directions(2, segments.max(8));
                let pts: Vec<Vec<f64>> = match &self.shape {
                    Shape::Polytope { .. } => hull::convex_hull(&self.polytope_vertices())?,
                    Shape::Box { lo, hi } => {
                        let (lo, hi) = (to_f64_vec(lo), to_f64_vec(hi));
                        vec![vec![lo[0], lo[1]], vec![hi[0], lo[1]], vec![hi[0], hi[1]], vec![lo[0], hi[1]]]
                    }
                    Shape::Hull { vertices, inflation } if *inflation == 0.0 => vertices.clone(),
                    _ => {
                        // Boundary point in direction u: the support point of the
                        // smooth parts, sampled radially from the centroid.
                        let c = self.centroid();
                        dirs.iter().map(|u| radial_boundary(self, &c, u)).collect()
                    }
                };
                Ok(pts)
            }
            n => Err(Error::UnsupportedDimension(n)),
        }
    }

    /// Window in `f64`, exact scalars rounded.
    pub fn to_f64(&self) -> Window<f64> {
        let v = |x: &[T]| to_f64_vec(x);
        let shape = match &self.shape {
            Shape::Box { lo, hi } => Shape::Box { lo: v(lo), hi: v(hi) },
            Shape::Ball { center, radius } => Shape::Ball {
                center: v(center),
                radius: radius.as_f64(),
            },
            Shape::Polytope { half_spaces } => Shape::Polytope {
                half_spaces: half_spaces.iter().map(|(a, b)| (v(a), b.as_f64())).collect(),
            },
            Shape::Hull { vertices, inflation } => Shape::Hull {
                vertices: vertices.clone(),
                inflation: *inflation,
            },
        };
        Window { n: self.n, shape }
    }
}

fn max_dot(points: &[Vec<f64>], u: &[f64]) -> f64 {
    points
        .iter()
        .map(|p| p.iter().zip(u).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

fn vertex_centroid(points: &[Vec<f64>], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| points.iter().map(|p| p[i]).sum::<f64>() / points.len().max(1) as f64)
        .collect()
}

fn unit_ball_volume(n: usize) -> f64 {
    // V_n = V_{n−2} · 2π / n.
    let (mut a, mut b) = (1.0, 2.0);
    for k in 2..=n {
        let next = a * 2.0 * std::f64::consts::PI / k as f64;
        a = b;
        b = next;
    }
    if n == 0 {
        1.0
    } else {
        b
    }
}

/// Bisection along the ray `c + r·u` for the boundary of a window with `c` inside.
fn radial_boundary<T: Scalar>(w: &Window<T>, c: &[f64], u: &[f64]) -> Vec<f64> {
    let at = |r: f64| -> Vec<f64> { c.iter().zip(u).map(|(a, b)| a + r * b).collect() };
    let (mut lo, mut hi) = (0.0, 1.0);
    while w.signed_distance(&at(hi)) <= 0.0 && hi < 1e12 {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if w.signed_distance(&at(mid)) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(lo)
}

/// Unit directions: `±1` in 1D, `k` equally spaced angles in 2D, a spherical
/// Fibonacci lattice otherwise.
pub fn directions(n: usize, k: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..k)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
            (0..k)
                .map(|_| loop {
                    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if r > 1e-3 && r <= 1.0 {
                        break v.iter().map(|x| x / r).collect();
                    }
                })
                .collect()
        }
    }
}

/// Hausdorff distance between convex windows, `max_u |h_A(u) − h_B(u)|`
/// over 720 directions in the plane, exactly in 1D.
pub fn hausdorff<S: Scalar, T: Scalar>(a: &Window<S>, b: &Window<T>) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    let k = if a.dim() == 2 { 720 } else { 4000 };
    Ok(directions(a.dim(), k)
        .iter()
        .map(|u| (a.support(u) - b.support(u)).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::QuadExt;

    fn fib_window() -> Window<QuadExt> {
        Window::interval(QuadExt::int(-1), QuadExt::golden() - QuadExt::int(1)).unwrap()
    }

    fn octagon() -> Window<QuadExt> {
        let h = QuadExt::from_parts(1, 2, 1, 2, 2).unwrap();
        let r = QuadExt::from_parts(0, 1, 1, 2, 2).unwrap();
        let normals = [
            vec![QuadExt::int(1), QuadExt::int(0)],
            vec![r.clone(), r.clone()],
            vec![QuadExt::int(0), QuadExt::int(1)],
            vec![-r.clone(), r],
        ];
        let mut hs = Vec::new();
        for u in normals {
            hs.push((u.clone(), h.clone()));
            hs.push((u.iter().map(|x| -x.clone()).collect(), h.clone()));
        }
        Window::polytope(hs).unwrap()
    }

    #[test]
    fn interval_membership() {
        let w = fib_window();
        assert!(w.contains(&[QuadExt::int(0)], Mode::Closed).unwrap());
        let edge = QuadExt::golden() - QuadExt::int(1);
        assert!(w.contains(&[edge.clone()], Mode::Closed).unwrap());
        assert!(!w.contains(&[edge], Mode::Interior).unwrap());
        assert!(matches!(
            w.contains(&[QuadExt::int(0), QuadExt::int(0)], Mode::Closed),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn unit_vector_on_the_circle() {
        let b = Window::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(b.contains(&[0.6, 0.8], Mode::Closed).unwrap());
        let exact = Window::ball(vec![QuadExt::int(0); 2], QuadExt::int(1)).unwrap();
        let p = [QuadExt::frac(3, 5), QuadExt::frac(4, 5)];
        assert!(exact.contains(&p, Mode::Closed).unwrap());
        assert!(!exact.contains(&p, Mode::Interior).unwrap());
    }

    #[test]
    fn octagon_geometry() {
        let w = octagon();
        let r2 = 2f64.sqrt();
        // Side 1, so area 2(1 + √2).
        assert!((w.volume() - 2.0 * (1.0 + r2)).abs() < 1e-12);
        assert!((w.support(&[1.0, 0.0]) - (1.0 + r2) / 2.0).abs() < 1e-12);
        assert_eq!(w.outline(8).unwrap().len(), 8);
        assert!(!w.interior_is_empty());
        assert!(hausdorff(&w, &w).unwrap() < 1e-12);
        let b = Window::ball(vec![0.0, 0.0], (1.0 + r2) / 2.0).unwrap();
        // Circumradius minus inradius.
        let circ = (4.0 + 2.0 * r2).sqrt() / 2.0;
        assert!((hausdorff(&w, &b).unwrap() - (circ - (1.0 + r2) / 2.0)).abs() < 1e-4);
    }

    #[test]
    fn hull_windows() {
        let w = Window::<f64>::hull(&[vec![0.0], vec![1.0], vec![0.25]], 0.0).unwrap();
        assert!(w.contains(&[1.0], Mode::Closed).unwrap());
        assert!(!w.contains(&[1.0], Mode::Interior).unwrap());
        assert!(hausdorff(&w, &Window::interval(0.0, 1.0).unwrap()).unwrap() < 1e-15);
        let dot = Window::<f64>::hull(&[vec![0.0, 0.0]], 0.1).unwrap();
        assert!((hausdorff(&dot, &Window::ball(vec![0.0, 0.0], 0.1).unwrap()).unwrap()) < 1e-12);
        assert!(!dot.interior_is_empty());
        assert!(Window::<f64>::hull(&[vec![0.0, 0.0]], 0.0).unwrap().interior_is_empty());
    }

    #[test]
    fn signed_distances() {
        let b = Window::boxed(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap();
        assert!((b.signed_distance(&[1.0, 0.5]) + 0.5).abs() < 1e-15);
        assert!((b.signed_distance(&[3.0, 2.0]) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(b.bounding_box(), (vec![0.0, 0.0], vec![2.0, 1.0]));
        let ball = Window::ball(vec![0.0, 0.0], 1.0).unwrap();
        let ring = ball.outline(64).unwrap();
        assert!(ring.iter().all(|p| (p[0].hypot(p[1]) - 1.0).abs() < 1e-9));
    }

    #[test]
    fn bad_shapes_are_rejected() {
        assert!(Window::interval(1.0, 0.0).is_err());
        assert!(Window::ball(vec![0.0], -1.0).is_err());
        assert!(Window::polytope(vec![(vec![1.0], 1.0)]).is_err());
    }
}
