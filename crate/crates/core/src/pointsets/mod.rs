//! Finite Delone samples, their difference sets, Delone radii and the finite
//! local complexity heuristic.

pub mod io;
mod substitution;

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact_arith::QuadExt;
use crate::scalar::{combine, Scalar};
use crate::spatial::{dist, NearestIndex};

pub use io::{load_sample, parse_region, sample_from_json, sample_to_json, write_sample};
pub use substitution::{substitution_generate, SubstitutionRule};

/// Default number of shortest differences kept by [`difference_set`].
pub const DEFAULT_DIFFERENCE_CAP: usize = 1_000_000;

/// Axis-aligned box `[lo, hi]` in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::Validation("box bounds must be nonempty and of equal length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
            return Err(Error::Validation(format!("invalid box {lo:?}..{hi:?}")));
        }
        Ok(BoxRegion { lo, hi })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        BoxRegion::new(vec![lo], vec![hi])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| a <= v && v <= b)
    }

    /// Exact membership for a point with quadratic coordinates.
    pub fn contains_exact(&self, x: &[QuadExt]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| {
                *v >= QuadExt::from_f64(*a) && *v <= QuadExt::from_f64(*b)
            })
    }

    /// The box shrunk by `r` on every side (collapsing to the center when too small).
    pub fn eroded(&self, r: f64) -> BoxRegion {
        let (lo, hi) = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| {
                if b - a >= 2.0 * r {
                    (a + r, b - r)
                } else {
                    let m = 0.5 * (a + b);
                    (m, m)
                }
            })
            .unzip();
        BoxRegion { lo, hi }
    }

    pub fn translated(&self, by: &[f64]) -> BoxRegion {
        BoxRegion {
            lo: self.lo.iter().zip(by).map(|(a, t)| a + t).collect(),
            hi: self.hi.iter().zip(by).map(|(a, t)| a + t).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    Exact,
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Exact {
        generators: Vec<Vec<QuadExt>>,
        coords: Vec<Vec<i64>>,
    },
    Numeric,
}

/// A finite patch of a Delone set.
///
/// In exact mode each point is an integer tuple against declared generators in
/// `Q(√D)^d`; in numeric mode points are plain real tuples. Real positions are
/// cached for both.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSample {
    dim: usize,
    repr: Repr,
    positions: Vec<Vec<f64>>,
    region: BoxRegion,
}

impl PointSample {
    pub fn exact(
        generators: Vec<Vec<QuadExt>>,
        coords: Vec<Vec<i64>>,
        region: BoxRegion,
    ) -> Result<Self> {
        let dim = region.dim();
        if let Some(g) = generators.iter().find(|g| g.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: g.len(),
            });
        }
        let s = generators.len();
        if s == 0 {
            return Err(Error::Validation("exact sample needs generators".into()));
        }
        if let Some(c) = coords.iter().find(|c| c.len() != s) {
            return Err(Error::DimensionMismatch {
                expected: s,
                found: c.len(),
            });
        }
        let exact: Vec<Vec<QuadExt>> = coords.par_iter().map(|c| combine(c, &generators)).collect();
        let mut seen = HashSet::with_capacity(exact.len());
        for (c, x) in coords.iter().zip(&exact) {
            if !seen.insert(x) {
                return Err(Error::Validation(format!("duplicate point {c:?}")));
            }
            if !region.contains_exact(x) {
                return Err(Error::Validation(format!("point {c:?} lies outside the box")));
            }
        }
        let positions = exact
            .iter()
            .map(|x| x.iter().map(QuadExt::to_f64).collect())
            .collect();
        Ok(PointSample {
            dim,
            repr: Repr::Exact { generators, coords },
            positions,
            region,
        })
    }

    pub fn numeric(points: Vec<Vec<f64>>, region: BoxRegion) -> Result<Self> {
        let dim = region.dim();
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
        let mut seen = HashSet::with_capacity(points.len());
        for p in &points {
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!("non-finite point {p:?}")));
            }
            let key: Vec<u64> = p.iter().map(|x| (x + 0.0).to_bits()).collect();
            if !seen.insert(key) {
                return Err(Error::Validation(format!("duplicate point {p:?}")));
            }
            if !region.contains(p) {
                return Err(Error::Validation(format!("point {p:?} lies outside the box")));
            }
        }
        Ok(PointSample {
            dim,
            repr: Repr::Numeric,
            positions: points,
            region,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn mode(&self) -> SampleMode {
        match self.repr {
            Repr::Exact { .. } => SampleMode::Exact,
            Repr::Numeric => SampleMode::Numeric,
        }
    }

    pub fn region(&self) -> &BoxRegion {
        &self.region
    }

    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }

    pub fn generators(&self) -> Option<&[Vec<QuadExt>]> {
        match &self.repr {
            Repr::Exact { generators, .. } => Some(generators),
            Repr::Numeric => None,
        }
    }

    pub fn coords(&self) -> Option<&[Vec<i64>]> {
        match &self.repr {
            Repr::Exact { coords, .. } => Some(coords),
            Repr::Numeric => None,
        }
    }

    /// Exact position of point `i` (exact mode only).
    pub fn exact_position(&self, i: usize) -> Option<Vec<QuadExt>> {
        match &self.repr {
            Repr::Exact { generators, coords } => Some(combine(&coords[i], generators)),
            Repr::Numeric => None,
        }
    }

    /// Index of the point closest to the box center (ties to the lower index).
    pub fn central_index(&self) -> Option<usize> {
        let c = self.region.center();
        self.positions
            .iter()
            .enumerate()
            .min_by(|(i, a), (j, b)| {
                dist(a, &c)
                    .partial_cmp(&dist(b, &c))
                    .unwrap()
                    .then(i.cmp(j))
            })
            .map(|(i, _)| i)
    }

    /// Same points with a different bounding box.
    pub fn with_region(&self, region: BoxRegion) -> Result<Self> {
        match &self.repr {
            Repr::Exact { generators, coords } => {
                PointSample::exact(generators.clone(), coords.clone(), region)
            }
            Repr::Numeric => PointSample::numeric(self.positions.clone(), region),
        }
    }

    /// Points whose positions lie in `region`, keeping the sample's mode.
    pub fn restricted(&self, region: BoxRegion) -> Result<Self> {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| match &self.repr {
                Repr::Exact { .. } => region.contains_exact(&self.exact_position(i).unwrap()),
                Repr::Numeric => region.contains(&self.positions[i]),
            })
            .collect();
        match &self.repr {
            Repr::Exact { generators, coords } => PointSample::exact(
                generators.clone(),
                keep.iter().map(|&i| coords[i].clone()).collect(),
                region,
            ),
            Repr::Numeric => PointSample::numeric(
                keep.iter().map(|&i| self.positions[i].clone()).collect(),
                region,
            ),
        }
    }
}

/// One element of `Λ − Λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Difference {
    /// Integer coordinates against the sample's generators (exact mode).
    pub coords: Option<Vec<i64>>,
    pub vector: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.partial_cmp(y).unwrap())
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// All pairwise differences `x − y`, deduplicated, truncated to the `cap` shortest.
///
/// Numeric differences closer than a few ulps of the sample scale are merged;
/// exact differences are compared exactly.
pub fn difference_set(s: &PointSample, cap: usize) -> Result<Vec<Difference>> {
    if s.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            have: s.len(),
        });
    }
    let n = s.len();
    let pos = s.positions();
    let mut diffs: Vec<Difference> = match &s.repr {
        Repr::Exact { generators, coords } => {
            let rows: Vec<Vec<Vec<i64>>> = (0..n)
                .into_par_iter()
                .map(|i| {
                    (0..n)
                        .map(|j| coords[i].iter().zip(&coords[j]).map(|(a, b)| a - b).collect())
                        .collect()
                })
                .collect();
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for c in rows.into_iter().flatten() {
                if seen.insert(c.clone()) {
                    out.push(c);
                }
            }
            // Distinct coordinates can embed to the same point when generators are dependent.
            let mut exact_seen = HashSet::new();
            out.into_iter()
                .filter_map(|c| {
                    let x = combine(&c, generators);
                    exact_seen.insert(x.clone()).then(|| Difference {
                        vector: x.iter().map(QuadExt::to_f64).collect(),
                        coords: Some(c),
                    })
                })
                .collect()
        }
        Repr::Numeric => {
            let rows: Vec<Vec<Vec<f64>>> = (0..n)
                .into_par_iter()
                .map(|i| {
                    (0..n)
                        .map(|j| pos[i].iter().zip(&pos[j]).map(|(a, b)| a - b).collect())
                        .collect()
                })
                .collect();
            let mut all: Vec<Vec<f64>> = rows.into_iter().flatten().collect();
            all.sort_by(|a, b| lex_cmp(a, b));
            let scale = pos.iter().map(|p| norm(p)).fold(1.0, f64::max);
            let tol = 64.0 * f64::EPSILON * scale;
            merge_close(all, tol)
                .into_iter()
                .map(|vector| Difference {
                    coords: None,
                    vector,
                })
                .collect()
        }
    };
    diffs.sort_by(|a, b| {
        norm(&a.vector)
            .partial_cmp(&norm(&b.vector))
            .unwrap()
            .then_with(|| lex_cmp(&a.vector, &b.vector))
    });
    diffs.truncate(cap);
    Ok(diffs)
}

/// Merges lexicographically sorted vectors lying within `tol` of a kept vector.
fn merge_close(sorted: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let mut kept: Vec<Vec<f64>> = Vec::new();
    let mut window_start = 0;
    for v in sorted {
        while window_start < kept.len() && kept[window_start][0] < v[0] - tol {
            window_start += 1;
        }
        let dup = kept[window_start..]
            .iter()
            .any(|k| k.iter().zip(&v).all(|(a, b)| (a - b).abs() <= tol));
        if !dup {
            kept.push(v);
        }
    }
    kept
}

/// Packing radius `r` and covering radius estimate `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeloneRadii {
    pub packing: f64,
    pub covering: f64,
}

/// `r` is half the minimal pairwise distance; `R` the largest distance from a
/// grid point (pitch `r/2`) of the eroded box to its nearest sample point.
pub fn delone_radii(s: &PointSample) -> Result<DeloneRadii> {
    if s.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            have: s.len(),
        });
    }
    let pos = s.positions();
    let min_dist = min_pairwise_distance(pos);
    let r = 0.5 * min_dist;
    let index = NearestIndex::new(pos.to_vec(), min_dist.max(1e-12));
    let mut big_r = covering_on(&s.region, &index, r);
    for _ in 0..4 {
        let next = covering_on(&s.region.eroded(big_r), &index, r);
        if (next - big_r).abs() <= 1e-12 * big_r.max(1.0) {
            break;
        }
        big_r = next;
    }
    Ok(DeloneRadii {
        packing: r,
        covering: big_r.max(r),
    })
}

fn min_pairwise_distance(pos: &[Vec<f64>]) -> f64 {
    if pos[0].len() == 1 {
        let mut xs: Vec<f64> = pos.iter().map(|p| p[0]).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        return xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    }
    (0..pos.len())
        .into_par_iter()
        .map(|i| {
            (i + 1..pos.len())
                .map(|j| dist(&pos[i], &pos[j]))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

const MAX_GRID_POINTS: f64 = 2e6;

fn covering_on(region: &BoxRegion, index: &NearestIndex, r: f64) -> f64 {
    let d = region.dim();
    let mut pitch = 0.5 * r;
    let extent: Vec<f64> = region.lo.iter().zip(&region.hi).map(|(a, b)| b - a).collect();
    let count = |p: f64| extent.iter().map(|e| (e / p).floor() + 1.0).product::<f64>();
    while count(pitch) > MAX_GRID_POINTS {
        pitch *= 1.5;
    }
    let steps: Vec<usize> = extent.iter().map(|e| (e / pitch).floor() as usize + 1).collect();
    let total: usize = steps.iter().product();
    (0..total)
        .into_par_iter()
        .map(|mut flat| {
            let mut q = vec![0.0; d];
            for k in 0..d {
                q[k] = region.lo[k] + (flat % steps[k]) as f64 * pitch;
                flat /= steps[k];
            }
            index.nearest(&q).map_or(0.0, |(_, dd)| dd)
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlcVerdict {
    Plausible,
    /// Two distinct differences closer than the tolerance.
    Violated { first: Vec<f64>, second: Vec<f64> },
}

/// Flags a sample whose difference set has two distinct elements within `tol`.
/// A finite sample can never certify finite local complexity.
pub fn flc_check(s: &PointSample, tol: f64) -> Result<FlcVerdict> {
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let mut diffs: Vec<Vec<f64>> = difference_set(s, usize::MAX)?
        .into_iter()
        .map(|d| d.vector)
        .collect();
    diffs.sort_by(|a, b| lex_cmp(a, b));
    let mut start = 0;
    for i in 0..diffs.len() {
        while diffs[start][0] < diffs[i][0] - tol {
            start += 1;
        }
        for j in start..i {
            if diffs[j].iter().zip(&diffs[i]).all(|(a, b)| (a - b).abs() <= tol) {
                return Ok(FlcVerdict::Violated {
                    first: diffs[j].clone(),
                    second: diffs[i].clone(),
                });
            }
        }
    }
    Ok(FlcVerdict::Plausible)
}

/// Converts a real vector into exact form when every entry is a dyadic rational.
pub fn exact_vector<T: Scalar>(v: &[T]) -> Vec<QuadExt> {
    v.iter().map(Scalar::to_quad).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64], lo: f64, hi: f64) -> PointSample {
        PointSample::numeric(
            xs.iter().map(|&x| vec![x]).collect(),
            BoxRegion::interval(lo, hi).unwrap(),
        )
        .unwrap()
    }

    fn golden_gens() -> Vec<Vec<QuadExt>> {
        vec![vec![QuadExt::int(1)], vec![QuadExt::golden()]]
    }

    #[test]
    fn exact_sample_embeds_positions() {
        let s = PointSample::exact(
            golden_gens(),
            vec![vec![0, 0], vec![1, 0], vec![1, 1]],
            BoxRegion::interval(0.0, 3.0).unwrap(),
        )
        .unwrap();
        let tau = QuadExt::golden().to_f64();
        assert_eq!(s.positions(), &[vec![0.0], vec![1.0], vec![1.0 + tau]]);
        assert_eq!(s.exact_position(2).unwrap()[0], QuadExt::int(1) + QuadExt::golden());
    }

    #[test]
    fn duplicates_and_outside_points_are_rejected() {
        let r = BoxRegion::interval(0.0, 3.0).unwrap();
        assert!(matches!(
            PointSample::exact(golden_gens(), vec![vec![1, 0], vec![1, 0]], r.clone()),
            Err(Error::Validation(_))
        ));
        // 2 + 0·τ and 0 + ... are distinct; 3 + τ is outside [0, 3].
        assert!(PointSample::exact(golden_gens(), vec![vec![3, 1]], r.clone()).is_err());
        assert!(PointSample::numeric(vec![vec![1.0], vec![1.0]], r).is_err());
    }

    #[test]
    fn differences_of_small_sets() {
        let s = line(&[0.0, 1.0], 0.0, 1.0);
        let d: Vec<f64> = difference_set(&s, 100).unwrap().iter().map(|d| d.vector[0]).collect();
        assert_eq!(d, vec![0.0, -1.0, 1.0]);
        let s = line(&[0.0, 1.0, 2.5], 0.0, 3.0);
        let d: Vec<f64> = difference_set(&s, 100).unwrap().iter().map(|d| d.vector[0]).collect();
        assert_eq!(d, vec![0.0, -1.0, 1.0, -1.5, 1.5, -2.5, 2.5]);
        let d = difference_set(&s, 3).unwrap();
        assert_eq!(d.len(), 3);
        assert!(matches!(
            difference_set(&line(&[1.0], 0.0, 2.0), 10),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn nearly_equal_float_differences_merge() {
        let s = line(&[0.1, 0.3, 0.0, 0.2], 0.0, 1.0);
        let d = difference_set(&s, 100).unwrap();
        // {0, ±0.1, ±0.2, ±0.3}
        assert_eq!(d.len(), 7);
    }

    #[test]
    fn radii_of_lattice_and_pairs() {
        let z: Vec<f64> = (0..=10).map(f64::from).collect();
        let rad = delone_radii(&line(&z, 0.0, 10.0)).unwrap();
        assert_eq!(rad.packing, 0.5);
        assert!((rad.covering - 0.5).abs() < 1e-12);
        let rad = delone_radii(&line(&[0.0, 3.0], 0.0, 3.0)).unwrap();
        assert_eq!(rad.packing, 1.5);
    }

    #[test]
    fn flc_examples() {
        assert_eq!(flc_check(&line(&[0.0, 1.0, 2.0], 0.0, 2.0), 1e-9).unwrap(), FlcVerdict::Plausible);
        let v = flc_check(&line(&[0.0, 1.0, 2.0 + 1e-12], 0.0, 3.0), 1e-9).unwrap();
        assert!(matches!(v, FlcVerdict::Violated { .. }));
    }

    #[test]
    fn central_point_and_restriction() {
        let s = line(&[0.0, 1.0, 2.0, 3.0, 4.0], 0.0, 4.0);
        assert_eq!(s.central_index(), Some(2));
        let r = s.restricted(BoxRegion::interval(0.5, 3.0).unwrap()).unwrap();
        assert_eq!(r.len(), 3);
    }
}
