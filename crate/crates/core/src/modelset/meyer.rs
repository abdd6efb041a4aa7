//! Finite offset sets `F` with `Λ − Λ ⊆ Λ + F`, estimated on a patch.

use std::collections::HashSet;

use crate::error::Result;
use crate::pointsets::{delone_radii, difference_set, PointSample, DEFAULT_DIFFERENCE_CAP};
use crate::spatial::NearestIndex;

#[derive(Debug, Clone, PartialEq)]
pub struct MeyerOffsets {
    /// Distinct offsets `x − y − p` with `p` the sample point nearest to `x − y`.
    pub offsets: Vec<Vec<f64>>,
    /// Largest offset norm.
    pub radius: f64,
    /// Differences that were tested (those well inside the box).
    pub tested: usize,
}

/// Collects `d − nearest(d)` over the differences `d` lying at least twice the
/// covering radius inside the sample's box. Exact samples compare offsets by
/// their integer coordinates.
pub fn meyer_offset_estimate(s: &PointSample) -> Result<MeyerOffsets> {
    let margin = 2.0 * delone_radii(s)?.covering;
    let inner = s.region().eroded(margin);
    let diffs = difference_set(s, DEFAULT_DIFFERENCE_CAP)?;
    let index = NearestIndex::new(s.positions().to_vec(), margin.max(1e-6));
    let coords = s.coords();
    let mut seen_exact: HashSet<Vec<i64>> = HashSet::new();
    let mut seen_num: HashSet<Vec<i64>> = HashSet::new();
    let mut offsets = Vec::new();
    let mut tested = 0;
    for d in diffs.iter().filter(|d| inner.contains(&d.vector)) {
        let Some((j, _)) = index.nearest(&d.vector) else {
            continue;
        };
        tested += 1;
        let f: Vec<f64> = d.vector.iter().zip(&s.positions()[j]).map(|(a, b)| a - b).collect();
        let fresh = match (&d.coords, coords) {
            (Some(dc), Some(c)) => seen_exact.insert(dc.iter().zip(&c[j]).map(|(a, b)| a - b).collect()),
            _ => seen_num.insert(f.iter().map(|x| (x * 1e9).round() as i64).collect()),
        };
        if fresh {
            offsets.push(f);
        }
    }
    offsets.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let radius = offsets
        .iter()
        .map(|f| f.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    Ok(MeyerOffsets {
        offsets,
        radius,
        tested,
    })
}
