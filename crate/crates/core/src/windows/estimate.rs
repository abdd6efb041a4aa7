//! Window estimates from star images and box-counting boundary reports.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{hull, Window};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spatial::NearestIndex;

/// Grid resolution per axis for the non-convexity probe.
const PROBE_STEPS: usize = 200;
/// Fraction of uncovered probe points above which the warning is raised.
const NONCONVEX_FRACTION: f64 = 0.005;

#[derive(Debug, Clone, PartialEq)]
pub struct WindowEstimate {
    pub window: Window<f64>,
    /// Set when a noticeable part of the hull is far from every star image,
    /// which suggests the true window is not convex.
    pub nonconvex_warning: bool,
}

/// Convex hull of the star images, inflated by `inflation`.
pub fn minimal_window_estimate(images: &[Vec<f64>], inflation: f64) -> Result<WindowEstimate> {
    let window = Window::hull(images, inflation)?;
    if let super::Shape::Hull { vertices, .. } = window.shape() {
        if inflation == 0.0 && hull::is_degenerate(vertices) {
            return Err(Error::DegenerateHull);
        }
    }
    let nonconvex_warning = nonconvexity_probe(&window, images);
    Ok(WindowEstimate {
        window,
        nonconvex_warning,
    })
}

fn nonconvexity_probe(window: &Window<f64>, images: &[Vec<f64>]) -> bool {
    let n = window.dim();
    if images.len() < 3 || window.volume() <= 0.0 {
        return false;
    }
    let (lo, hi) = window.bounding_box();
    let extent = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    let index = NearestIndex::new(images.to_vec(), extent / (images.len() as f64).powf(1.0 / n as f64));
    let mut spacing: Vec<f64> = (0..images.len())
        .into_par_iter()
        .map(|i| {
            index
                .within(&images[i], extent)
                .into_iter()
                .filter(|&j| j != i)
                .map(|j| crate::spatial::dist(&images[i], &images[j]))
                .fold(f64::INFINITY, f64::min)
        })
        .filter(|d| d.is_finite() && *d > 0.0)
        .collect();
    if spacing.is_empty() {
        return false;
    }
    spacing.sort_by(f64::total_cmp);
    let reach = 3.0 * spacing[spacing.len() / 2];
    let steps = if n == 1 { PROBE_STEPS * PROBE_STEPS } else { PROBE_STEPS };
    let total = steps.pow(n as u32);
    let (inside, far) = (0..total)
        .into_par_iter()
        .map(|mut flat| {
            let q: Vec<f64> = (0..n)
                .map(|i| {
                    let k = flat % steps;
                    flat /= steps;
                    lo[i] + (k as f64 + 0.5) / steps as f64 * (hi[i] - lo[i])
                })
                .collect();
            if window.signed_distance(&q) > 0.0 {
                return (0usize, 0usize);
            }
            let covered = index.nearest(&q).is_some_and(|(_, d)| d <= reach);
            (1, usize::from(!covered))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    inside > 0 && far as f64 > NONCONVEX_FRACTION * inside as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularityVerdict {
    RegularPlausible,
    IrregularPlausible,
}

impl RegularityVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            RegularityVerdict::RegularPlausible => "regular_plausible",
            RegularityVerdict::IrregularPlausible => "irregular_plausible",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    /// `(h, count · h^n)` with `h` strictly decreasing.
    pub boundary_measure_estimates: Vec<(f64, f64)>,
    pub verdict: RegularityVerdict,
}

/// Regular when every step from `h_i` to `h_{i+1}` shrinks the estimate by
/// at least `1.5^{log₂(h_i / h_{i+1})}`, i.e. 1.5 per halving.
pub fn regularity_verdict(estimates: &[(f64, f64)]) -> Result<RegularityVerdict> {
    if estimates.len() < 3 {
        return Err(Error::InvalidArgument("need at least three scales".into()));
    }
    if estimates.windows(2).any(|w| !(w[0].0 > w[1].0) || w[1].0 <= 0.0) {
        return Err(Error::InvalidArgument("scales must be positive and strictly decreasing".into()));
    }
    let ok = estimates.windows(2).all(|w| {
        let need = 1.5f64.powf((w[0].0 / w[1].0).log2());
        w[1].1 * need <= w[0].1 * (1.0 + 1e-12)
    });
    Ok(if ok {
        RegularityVerdict::RegularPlausible
    } else {
        RegularityVerdict::IrregularPlausible
    })
}

/// Counts grid cells of pitch `h` whose corners and center are not all on
/// the same side of the boundary; the grid is offset by `h/2` from the
/// bounding box.
pub fn boundary_measure_report<T: Scalar>(w: &Window<T>, scales: &[f64]) -> Result<RegularityReport> {
    if scales.len() < 3 {
        return Err(Error::InvalidArgument("need at least three scales".into()));
    }
    if scales.windows(2).any(|p| !(p[0] > p[1])) || scales.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::InvalidArgument("scales must be positive and strictly decreasing".into()));
    }
    let n = w.dim();
    if n == 0 || n > 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    let (lo, hi) = w.bounding_box();
    let mut estimates = Vec::with_capacity(scales.len());
    for &h in scales {
        let origin: Vec<f64> = lo.iter().map(|a| a - h / 2.0).collect();
        let counts: Vec<usize> = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| ((b - a) / h).floor() as usize + 2)
            .collect();
        let total: usize = counts.iter().product();
        if total > 50_000_000 {
            return Err(Error::InvalidArgument(format!("scale {h} needs {total} cells")));
        }
        let corners = 1usize << n;
        let boundary: usize = (0..total)
            .into_par_iter()
            .filter(|&flat| {
                let mut cell = vec![0usize; n];
                let mut f = flat;
                for (c, k) in cell.iter_mut().zip(&counts) {
                    *c = f % k;
                    f /= k;
                }
                let base: Vec<f64> = (0..n).map(|i| origin[i] + cell[i] as f64 * h).collect();
                let center: Vec<f64> = base.iter().map(|b| b + h / 2.0).collect();
                let first = w.contains_f64(&center);
                (0..corners).any(|mask| {
                    let p: Vec<f64> = (0..n)
                        .map(|i| base[i] + if mask >> i & 1 == 1 { h } else { 0.0 })
                        .collect();
                    w.contains_f64(&p) != first
                })
            })
            .count();
        estimates.push((h, boundary as f64 * h.powi(n as i32)));
    }
    let verdict = regularity_verdict(&estimates)?;
    Ok(RegularityReport {
        boundary_measure_estimates: estimates,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::windows::hausdorff;

    #[test]
    fn interval_is_regular() {
        let w = Window::interval(0.0, 1.0).unwrap();
        let r = boundary_measure_report(&w, &[0.1, 0.05, 0.025]).unwrap();
        assert_eq!(r.verdict, RegularityVerdict::RegularPlausible);
        for (h, e) in &r.boundary_measure_estimates {
            assert!((e - 2.0 * h).abs() < 1e-12, "{h} {e}");
        }
    }

    #[test]
    fn disk_estimates_track_the_perimeter() {
        let w = Window::ball(vec![0.0, 0.0], 1.0).unwrap();
        let scales = [0.1, 0.05, 0.025, 0.0125];
        let r = boundary_measure_report(&w, &scales).unwrap();
        assert_eq!(r.verdict, RegularityVerdict::RegularPlausible);
        // Cells meeting a curve of length L number about (4/π)·L/h on average.
        for (h, e) in &r.boundary_measure_estimates {
            let ratio = e / (2.0 * std::f64::consts::PI * h);
            assert!((1.0..1.6).contains(&ratio), "{h}: {ratio}");
        }
    }

    #[test]
    fn plateau_is_irregular() {
        let est = [(0.1, 0.5), (0.05, 0.45), (0.025, 0.44)];
        assert_eq!(regularity_verdict(&est).unwrap(), RegularityVerdict::IrregularPlausible);
        assert!(regularity_verdict(&est[..2]).is_err());
        assert!(regularity_verdict(&[(0.1, 1.0), (0.2, 0.5), (0.05, 0.1)]).is_err());
    }

    #[test]
    fn estimates_from_images() {
        let imgs: Vec<Vec<f64>> = (0..1000).map(|k| vec![(k as f64 * 0.618_033_988_75).fract()]).collect();
        let e = minimal_window_estimate(&imgs, 0.0).unwrap();
        assert!(hausdorff(&e.window, &Window::interval(0.0, 1.0).unwrap()).unwrap() < 0.01);
        assert!(!e.nonconvex_warning);
        let one = minimal_window_estimate(&[vec![0.5, 0.5], vec![0.5, 0.5]], 0.1).unwrap();
        let ball = Window::ball(vec![0.5, 0.5], 0.1).unwrap();
        assert!(hausdorff(&one.window, &ball).unwrap() < 1e-12);
        assert_eq!(minimal_window_estimate(&[vec![0.5, 0.5]], 0.0), Err(Error::DegenerateHull));
    }

    #[test]
    fn annulus_images_raise_the_warning() {
        let mut imgs = Vec::new();
        for i in 0..60 {
            for j in 0..60 {
                let p = vec![i as f64 / 59.0 * 2.0 - 1.0, j as f64 / 59.0 * 2.0 - 1.0];
                if p[0].hypot(p[1]) > 0.7 && p[0].hypot(p[1]) <= 1.0 {
                    imgs.push(p);
                }
            }
        }
        assert!(minimal_window_estimate(&imgs, 0.0).unwrap().nonconvex_warning);
    }
}
