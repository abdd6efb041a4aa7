//! Cut-and-project generation of (inter-)model sets, fibers of the torus
//! parametrisation, density, and the reconstruction round trip.

mod fixtures;
mod meyer;
mod roundtrip;

use std::collections::HashSet;

use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact_arith::QuadExt;
use crate::lagarias_cps::EuclideanCps;
use crate::pointsets::{BoxRegion, PointSample, SampleMode};
use crate::scalar::{to_f64_vec, Scalar};
use crate::spatial::NearestIndex;
use crate::windows::{Mode, Window};

pub use fixtures::{fixture_sample, fixture_spec, sqrt_drift_sample, Fixture, SQRT_DRIFT_N};
pub use meyer::{meyer_offset_estimate, MeyerOffsets};
pub use roundtrip::{roundtrip_sample, roundtrip_verify, symmetric_difference, RoundTripOptions, RoundTripReport};

/// Inflation of the window's bounding box when enumerating candidates.
const ENUMERATION_SLACK: f64 = 1e-9;

/// A scheme, a window and a shift `(t, w)`, cut on a physical box.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSetSpec<T> {
    pub cps: EuclideanCps<f64>,
    pub window: Window<T>,
    pub t: Vec<T>,
    pub w: Vec<T>,
    pub region: BoxRegion,
}

impl<T: Scalar> ModelSetSpec<T> {
    /// Zero shift.
    pub fn new(cps: EuclideanCps<f64>, window: Window<T>, region: BoxRegion) -> Result<Self> {
        if window.dim() != cps.n() {
            return Err(Error::DimensionMismatch {
                expected: cps.n(),
                found: window.dim(),
            });
        }
        if region.dim() != cps.d() {
            return Err(Error::DimensionMismatch {
                expected: cps.d(),
                found: region.dim(),
            });
        }
        let (d, n) = (cps.d(), cps.n());
        Ok(ModelSetSpec {
            cps,
            window,
            t: vec![T::zero(); d],
            w: vec![T::zero(); n],
            region,
        })
    }

    pub fn with_shift(mut self, t: Vec<T>, w: Vec<T>) -> Result<Self> {
        if t.len() != self.cps.d() || w.len() != self.cps.n() {
            return Err(Error::DimensionMismatch {
                expected: self.cps.d() + self.cps.n(),
                found: t.len() + w.len(),
            });
        }
        self.t = t;
        self.w = w;
        Ok(self)
    }

    pub fn with_region(mut self, region: BoxRegion) -> Result<Self> {
        if region.dim() != self.cps.d() {
            return Err(Error::DimensionMismatch {
                expected: self.cps.d(),
                found: region.dim(),
            });
        }
        self.region = region;
        Ok(self)
    }

    /// Lattice coordinates of the generated points, in output order.
    pub fn cut(&self, mode: Mode) -> Result<Vec<Vec<i64>>> {
        let cps = &self.cps;
        let tf = to_f64_vec(&self.t);
        let wf = to_f64_vec(&self.w);
        let plo: Vec<f64> = self.region.lo().iter().zip(&tf).map(|(a, t)| a + t - ENUMERATION_SLACK * (1.0 + a.abs())).collect();
        let phi: Vec<f64> = self.region.hi().iter().zip(&tf).map(|(a, t)| a + t + ENUMERATION_SLACK * (1.0 + a.abs())).collect();
        let (wlo, whi) = self.window.bounding_box();
        let ilo: Vec<f64> = wlo.iter().zip(&wf).map(|(a, w)| a + w - ENUMERATION_SLACK * (1.0 + a.abs())).collect();
        let ihi: Vec<f64> = whi.iter().zip(&wf).map(|(a, w)| a + w + ENUMERATION_SLACK * (1.0 + a.abs())).collect();
        let candidates = cps.enumerate((&plo, &phi), (&ilo, &ihi))?;
        let exact = cps.exact_lattice().is_some();
        let t_exact: Vec<QuadExt> = self.t.iter().map(Scalar::to_quad).collect();
        let mut kept: Vec<(Vec<f64>, Vec<i64>)> = candidates
            .into_par_iter()
            .filter_map(|m| {
                let inside_box = if exact {
                    let p: Vec<QuadExt> = cps
                        .physical_as::<QuadExt>(&m)
                        .into_iter()
                        .zip(&t_exact)
                        .map(|(x, t)| x - t.clone())
                        .collect();
                    self.region.contains_exact(&p)
                } else {
                    let p: Vec<f64> = cps.physical(&m).iter().zip(&tf).map(|(x, t)| x - t).collect();
                    self.region.contains(&p)
                };
                if !inside_box {
                    return None;
                }
                let y: Vec<T> = cps
                    .star_as::<T>(&m)
                    .into_iter()
                    .zip(&self.w)
                    .map(|(s, w)| s - w.clone())
                    .collect();
                match self.window.contains(&y, mode) {
                    Ok(true) => {
                        let p: Vec<f64> = cps.physical(&m).iter().zip(&tf).map(|(x, t)| x - t).collect();
                        Some((p, m))
                    }
                    _ => None,
                }
            })
            .collect();
        kept.sort_by(|a, b| {
            a.0.iter()
                .zip(&b.0)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.1.cmp(&b.1))
        });
        Ok(kept.into_iter().map(|(_, m)| m).collect())
    }
}

/// `⋏(w + W) − t` (closed) or `⋏(w + int W) − t` (interior) on the box.
///
/// The sample is exact when the scheme has exact generators; a nonzero `t`
/// then becomes one more generator `−t` with coordinate 1.
pub fn generate<T: Scalar>(spec: &ModelSetSpec<T>, mode: Mode) -> Result<PointSample> {
    let ms = spec.cut(mode)?;
    let cps = &spec.cps;
    match cps.exact_lattice() {
        Some(e) => {
            let t: Vec<QuadExt> = spec.t.iter().map(Scalar::to_quad).collect();
            if t.iter().all(Zero::is_zero) {
                PointSample::exact(e.generators.clone(), ms, spec.region.clone())
            } else {
                let mut gens = e.generators.clone();
                gens.push(t.iter().map(|x| -x.clone()).collect());
                let coords = ms
                    .into_iter()
                    .map(|mut m| {
                        m.push(1);
                        m
                    })
                    .collect();
                PointSample::exact(gens, coords, spec.region.clone())
            }
        }
        None => {
            let tf = to_f64_vec(&spec.t);
            let pts = ms
                .iter()
                .map(|m| cps.physical(m).iter().zip(&tf).map(|(x, t)| x - t).collect())
                .collect();
            PointSample::numeric(pts, spec.region.clone())
        }
    }
}

/// Exact positions of an exact sample, as a set.
pub(crate) fn exact_point_set(s: &PointSample) -> Option<HashSet<Vec<QuadExt>>> {
    (s.mode() == SampleMode::Exact).then(|| (0..s.len()).map(|i| s.exact_position(i).unwrap()).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sandwich {
    InsideSandwich,
    /// First point breaking an inclusion: a lower-set point missing from the
    /// sample, or a sample point outside the upper set.
    Violated { witness: Vec<f64> },
}

/// Tolerance for matching points when either side is numeric.
const MATCH_TOL: f64 = 1e-9;

/// Checks `⋏(w + int W) − t ⊆ S ⊆ ⋏(w + W) − t` on the spec's box.
pub fn intermodel_check<T: Scalar>(spec: &ModelSetSpec<T>, s: &PointSample) -> Result<Sandwich> {
    if s.dim() != spec.cps.d() {
        return Err(Error::DimensionMismatch {
            expected: spec.cps.d(),
            found: s.dim(),
        });
    }
    let s = s.restricted(spec.region.clone())?;
    let lower = generate(spec, Mode::Interior)?;
    let upper = generate(spec, Mode::Closed)?;
    let exact_lower = lower.mode() == SampleMode::Exact;
    if let (true, Some(ss), Some(su)) = (exact_lower, exact_point_set(&s), exact_point_set(&upper)) {
        for i in 0..lower.len() {
            if !ss.contains(&lower.exact_position(i).unwrap()) {
                return Ok(Sandwich::Violated {
                    witness: lower.positions()[i].clone(),
                });
            }
        }
        for i in 0..s.len() {
            if !su.contains(&s.exact_position(i).unwrap()) {
                return Ok(Sandwich::Violated {
                    witness: s.positions()[i].clone(),
                });
            }
        }
        return Ok(Sandwich::InsideSandwich);
    }
    let missing = |from: &PointSample, into: &PointSample| -> Option<Vec<f64>> {
        let idx = NearestIndex::new(into.positions().to_vec(), 1.0);
        from.positions()
            .iter()
            .find(|p| idx.nearest(p).map_or(true, |(_, d)| d > MATCH_TOL))
            .cloned()
    };
    if let Some(w) = missing(&lower, &s).or_else(|| missing(&s, &upper)) {
        return Ok(Sandwich::Violated { witness: w });
    }
    Ok(Sandwich::InsideSandwich)
}

/// `|S| / vol(box)`.
pub fn density_estimate(s: &PointSample) -> Result<f64> {
    if s.len() < 10 {
        return Err(Error::TooFewPoints {
            needed: 10,
            have: s.len(),
        });
    }
    Ok(s.len() as f64 / s.region().volume())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fiber {
    pub lower: PointSample,
    pub upper: PointSample,
    /// True when the interior and closed cuts differ.
    pub singular: bool,
}

/// Both cuts at the torus point `(t, w)`.
pub fn fiber_points<T: Scalar>(spec: &ModelSetSpec<T>, t: Vec<T>, w: Vec<T>) -> Result<Fiber> {
    let spec = spec.clone().with_shift(t, w)?;
    let lower = generate(&spec, Mode::Interior)?;
    let upper = generate(&spec, Mode::Closed)?;
    let singular = lower.len() != upper.len();
    Ok(Fiber {
        lower,
        upper,
        singular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::windows::Window;

    fn fib(region: BoxRegion) -> ModelSetSpec<QuadExt> {
        fixture_spec(Fixture::Fibonacci, region).unwrap()
    }

    #[test]
    fn fibonacci_patch_matches_a_direct_filter() {
        let s = generate(&fib(BoxRegion::interval(0.0, 50.0).unwrap()), Mode::Closed).unwrap();
        let tau = QuadExt::golden().to_f64();
        let mut brute = Vec::new();
        for a in -100i64..=100 {
            for b in -100i64..=100 {
                let x = QuadExt::int(a) + QuadExt::int(b) * QuadExt::golden();
                let y = QuadExt::int(a) + QuadExt::int(b) * (QuadExt::int(1) - QuadExt::golden());
                let inside = x >= QuadExt::int(0) && x <= QuadExt::int(50);
                if inside && y >= QuadExt::int(-1) && y <= QuadExt::golden() - QuadExt::int(1) {
                    brute.push(vec![a, b]);
                }
            }
        }
        let mut got = s.coords().unwrap().to_vec();
        got.sort();
        brute.sort();
        assert_eq!(got, brute);
        let p = s.positions();
        for w in p.windows(2) {
            let g = w[1][0] - w[0][0];
            assert!((g - 1.0).abs() < 1e-12 || (g - tau).abs() < 1e-12, "{g}");
        }
    }

    #[test]
    fn empty_window_and_trivial_scheme() {
        let spec = fib(BoxRegion::interval(0.0, 50.0).unwrap());
        let dot = ModelSetSpec {
            window: Window::ball(vec![QuadExt::int(0)], QuadExt::int(0)).unwrap(),
            ..spec
        };
        assert!(generate(&dot, Mode::Interior).unwrap().is_empty());
        let z2 = EuclideanCps::<f64>::exact(
            vec![vec![QuadExt::int(1), QuadExt::int(0)], vec![QuadExt::int(0), QuadExt::int(1)]],
            vec![vec![], vec![]],
        );
        // Zero-dimensional internal space.
        let z2 = z2.unwrap();
        let w = Window::<f64>::boxed(vec![], vec![]).unwrap();
        let spec = ModelSetSpec::new(z2, w, BoxRegion::new(vec![0.0, 0.0], vec![3.0, 2.0]).unwrap()).unwrap();
        assert_eq!(generate(&spec, Mode::Closed).unwrap().len(), 12);
    }

    #[test]
    fn sandwich_checks() {
        let spec = fib(BoxRegion::interval(0.0, 100.0).unwrap());
        let s = generate(&spec, Mode::Closed).unwrap();
        assert_eq!(intermodel_check(&spec, &s).unwrap(), Sandwich::InsideSandwich);
        let lower = generate(&spec, Mode::Interior).unwrap();
        assert_eq!(intermodel_check(&spec, &lower).unwrap(), Sandwich::InsideSandwich);
        let mut pts = s.positions().to_vec();
        pts.push(vec![0.5]);
        let bad = PointSample::numeric(pts, s.region().clone()).unwrap();
        assert_eq!(intermodel_check(&spec, &bad).unwrap(), Sandwich::Violated { witness: vec![0.5] });
    }

    #[test]
    fn density_of_integers_and_fibonacci() {
        let z = PointSample::numeric((0..=100).map(|k| vec![k as f64]).collect(), BoxRegion::interval(0.0, 100.0).unwrap()).unwrap();
        assert!((density_estimate(&z).unwrap() - 1.01).abs() < 1e-12);
        let s = generate(&fib(BoxRegion::interval(0.0, 2000.0).unwrap()), Mode::Closed).unwrap();
        let expect = QuadExt::golden().to_f64() / 5f64.sqrt();
        assert!((density_estimate(&s).unwrap() / expect - 1.0).abs() < 0.01);
        let empty = PointSample::numeric(vec![], BoxRegion::interval(0.0, 1.0).unwrap()).unwrap();
        assert!(matches!(density_estimate(&empty), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn boundary_hit_is_singular() {
        // Upper-edge hits γ come paired with lower-edge hits at γ + τ − 1, so
        // the box stops between them.
        let spec = fib(BoxRegion::interval(0.0, 3.0).unwrap());
        // γ = 1 + τ has star 2 − τ; w = (2 − τ) − (τ − 1) puts it on the upper edge.
        let tau = QuadExt::golden();
        let w = QuadExt::int(2) - tau.clone() - (tau - QuadExt::int(1));
        let f = fiber_points(&spec, vec![QuadExt::int(0)], vec![w]).unwrap();
        assert!(f.singular);
        let lo = exact_point_set(&f.lower).unwrap();
        let hi = exact_point_set(&f.upper).unwrap();
        let diff: Vec<_> = hi.difference(&lo).collect();
        assert_eq!(diff, vec![&vec![QuadExt::int(1) + QuadExt::golden()]]);
        let g = fiber_points(&spec, vec![QuadExt::int(0)], vec![QuadExt::frac(1, 7)]).unwrap();
        assert!(!g.singular);
    }
}
