//! Non-singular shifts and recovery of the internal parameter of a sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::Window;
use crate::address::AddressedSample;
use crate::error::{Error, Result};
use crate::lagarias_cps::EuclideanCps;
use crate::pointsets::BoxRegion;
use crate::scalar::{Real, Scalar};

pub const DEFAULT_CLEARANCE: f64 = 1e-6;
pub const DEFAULT_PITCH: f64 = 1e-4;

/// Refinement stops adding cells beyond this many per level.
const MAX_CELLS: usize = 20_000_000;

fn star_f64<T: Real>(cps: &EuclideanCps<T>, m: &[i64]) -> Vec<f64> {
    cps.star(m).iter().map(|x| x.to_f64().unwrap()).collect()
}

/// A uniformly random `w ∈ [0,1)^n` for which the boundary of `w + W` keeps
/// distance at least `clearance` from the star image of every lattice point
/// whose physical projection lies in `region`.
pub fn nonsingular_shift<T: Real, S: Scalar>(
    cps: &EuclideanCps<T>,
    window: &Window<S>,
    region: &BoxRegion,
    trials: usize,
    seed: u64,
    clearance: f64,
) -> Result<Vec<f64>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if window.dim() != cps.n() {
        return Err(Error::DimensionMismatch {
            expected: cps.n(),
            found: window.dim(),
        });
    }
    if window.interior_is_empty() {
        return Err(Error::NoNonSingularFound(trials));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (wlo, whi) = window.bounding_box();
    for _ in 0..trials {
        let w: Vec<f64> = (0..cps.n()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let lo: Vec<f64> = wlo.iter().zip(&w).map(|(a, s)| a + s - 2.0 * clearance).collect();
        let hi: Vec<f64> = whi.iter().zip(&w).map(|(a, s)| a + s + 2.0 * clearance).collect();
        let candidates = cps.enumerate((region.lo(), region.hi()), (&lo, &hi))?;
        let clear = candidates.par_iter().all(|m| {
            let phys: Vec<f64> = cps.physical(m).iter().map(|x| x.to_f64().unwrap()).collect();
            if !region.contains(&phys) {
                return true;
            }
            let y: Vec<f64> = star_f64(cps, m).iter().zip(&w).map(|(a, s)| a - s).collect();
            window.signed_distance(&y).abs() >= clearance
        });
        if clear {
            return Ok(w);
        }
    }
    Err(Error::NoNonSingularFound(trials))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    /// Centroid of the surviving cells.
    pub w: Vec<f64>,
    /// Diagonal of the bounding box of the surviving cells.
    pub diameter: f64,
    pub cells: usize,
    pub pitch: f64,
}

/// Estimates `w` from `⋂_γ (s(γ) − W)` over the sample points `γ`.
///
/// The region is covered by a grid with 0 at a cell center, refined by a
/// factor of 3 until the pitch is at most `pitch`. Coarse levels keep every
/// cell that could meet the region; the last level keeps cells whose center
/// lies in it, or the conservative cells if no center does.
pub fn recover_parameter<T: Real, S: Scalar>(
    cps: &EuclideanCps<T>,
    window: &Window<S>,
    a: &AddressedSample,
    pitch: f64,
) -> Result<Recovery> {
    if !(pitch > 0.0) {
        return Err(Error::InvalidArgument("pitch must be positive".into()));
    }
    let n = cps.n();
    if window.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: window.dim(),
        });
    }
    if let Some(bad) = a.coords().iter().find(|c| c.len() != cps.s()) {
        return Err(Error::DimensionMismatch {
            expected: cps.s(),
            found: bad.len(),
        });
    }
    let images: Vec<Vec<f64>> = a.coords().iter().map(|m| star_f64(cps, m)).collect();
    let (wlo, whi) = window.bounding_box();
    let mut lo = vec![f64::NEG_INFINITY; n];
    let mut hi = vec![f64::INFINITY; n];
    for y in &images {
        for i in 0..n {
            lo[i] = lo[i].max(y[i] - whi[i]);
            hi[i] = hi[i].min(y[i] - wlo[i]);
        }
    }
    let slack = 1e-9;
    if lo.iter().zip(&hi).any(|(a, b)| a > &(b + slack)) {
        return Err(Error::EmptyIntersection);
    }
    let extent = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    let mut h = pitch;
    let mut levels = 0;
    while h * 4.0 < extent {
        h *= 3.0;
        levels += 1;
    }
    let mut cells: Vec<Vec<i64>> = grid(&lo, &hi, h);
    let mut active: Vec<usize> = (0..images.len()).collect();
    let outside = |c: &[i64], h: f64, act: &[usize], reach: f64| -> bool {
        let center: Vec<f64> = c.iter().map(|&k| k as f64 * h).collect();
        act.iter().any(|&g| {
            let y: Vec<f64> = images[g].iter().zip(&center).map(|(s, x)| s - x).collect();
            window.signed_distance(&y) > reach
        })
    };
    let root_n = (n as f64).sqrt();
    loop {
        let reach = h / 2.0 * root_n + slack;
        let survivors: Vec<Vec<i64>> = cells
            .par_iter()
            .filter(|c| !outside(c, h, &active, reach))
            .cloned()
            .collect();
        if survivors.is_empty() {
            return Err(Error::EmptyIntersection);
        }
        if levels == 0 {
            let exact: Vec<Vec<i64>> = survivors
                .par_iter()
                .filter(|c| !outside(c, h, &active, slack))
                .cloned()
                .collect();
            let kept = if exact.is_empty() { survivors } else { exact };
            return Ok(summarise(&kept, h, n));
        }
        active = prune(&images, &active, window, &survivors, h);
        let children = 3usize.pow(n as u32);
        if survivors.len().saturating_mul(children) > MAX_CELLS {
            return Err(Error::InvalidArgument(format!(
                "recovery region needs more than {MAX_CELLS} cells at pitch {}",
                h / 3.0
            )));
        }
        cells = survivors
            .iter()
            .flat_map(|c| {
                (0..children).map(move |mut f| {
                    c.iter()
                        .map(|&k| {
                            let o = (f % 3) as i64 - 1;
                            f /= 3;
                            3 * k + o
                        })
                        .collect()
                })
            })
            .collect();
        h /= 3.0;
        levels -= 1;
    }
}

/// Cells `k·h` (per axis) whose span meets `[lo, hi]`.
fn grid(lo: &[f64], hi: &[f64], h: f64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for (a, b) in lo.iter().zip(hi) {
        let (k0, k1) = ((a / h).round() as i64 - 1, (b / h).round() as i64 + 1);
        out = out
            .into_iter()
            .flat_map(|v| {
                (k0..=k1).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    out
}

/// Drops images whose translate `s − W` contains every corner of the
/// survivors' bounding box; by convexity they cannot cut any finer cell.
fn prune<S: Scalar>(
    images: &[Vec<f64>],
    active: &[usize],
    window: &Window<S>,
    cells: &[Vec<i64>],
    h: f64,
) -> Vec<usize> {
    let n = window.dim();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for c in cells {
        for i in 0..n {
            lo[i] = lo[i].min((c[i] as f64 - 0.5) * h);
            hi[i] = hi[i].max((c[i] as f64 + 0.5) * h);
        }
    }
    let corners: Vec<Vec<f64>> = (0..1usize << n)
        .map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }).collect())
        .collect();
    active
        .iter()
        .copied()
        .filter(|&g| {
            !corners.iter().all(|x| {
                let y: Vec<f64> = images[g].iter().zip(x).map(|(s, v)| s - v).collect();
                window.signed_distance(&y) < 0.0
            })
        })
        .collect()
}

fn summarise(cells: &[Vec<i64>], h: f64, n: usize) -> Recovery {
    let mut w = vec![0.0; n];
    let mut kmin = vec![i64::MAX; n];
    let mut kmax = vec![i64::MIN; n];
    for c in cells {
        for i in 0..n {
            w[i] += c[i] as f64 * h;
            kmin[i] = kmin[i].min(c[i]);
            kmax[i] = kmax[i].max(c[i]);
        }
    }
    w.iter_mut().for_each(|x| *x /= cells.len() as f64);
    let diameter = (0..n)
        .map(|i| ((kmax[i] - kmin[i] + 1) as f64 * h).powi(2))
        .sum::<f64>()
        .sqrt();
    Recovery {
        w,
        diameter,
        cells: cells.len(),
        pitch: h,
    }
}
