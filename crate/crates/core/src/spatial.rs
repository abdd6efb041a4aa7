//! Bucketed nearest-neighbour lookup for low-dimensional point clouds.

use std::collections::HashMap;

/// Uniform-grid index over points in `R^d`.
pub struct NearestIndex {
    points: Vec<Vec<f64>>,
    cell: f64,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl NearestIndex {
    /// `cell` should be on the order of the typical spacing.
    pub fn new(points: Vec<Vec<f64>>, cell: f64) -> Self {
        let d = points.first().map_or(0, Vec::len);
        let cell = if cell.is_finite() && cell > 0.0 { cell } else { 1.0 };
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            for k in 0..d {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
            buckets.entry(key(p, cell)).or_default().push(i);
        }
        NearestIndex {
            points,
            cell,
            buckets,
            lo,
            hi,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    /// Index and distance of the nearest stored point.
    pub fn nearest(&self, q: &[f64]) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let d = q.len();
        let center = key(q, self.cell);
        // Rings of cells are searched outward until the best hit is provably nearest.
        let max_ring = (0..d)
            .map(|k| {
                let span = (self.hi[k] - q[k]).abs().max((q[k] - self.lo[k]).abs());
                (span / self.cell).ceil() as i64 + 1
            })
            .max()
            .unwrap_or(0);
        let mut best: Option<(usize, f64)> = None;
        for ring in 0..=max_ring {
            for_each_shell(&center, ring, &mut |cell| {
                if let Some(ids) = self.buckets.get(cell) {
                    for &i in ids {
                        let dist = dist(&self.points[i], q);
                        if best.map_or(true, |(_, b)| dist < b) {
                            best = Some((i, dist));
                        }
                    }
                }
            });
            if let Some((_, b)) = best {
                if b <= ring as f64 * self.cell {
                    break;
                }
            }
        }
        best
    }

    /// Every stored point within `radius` of `q`.
    pub fn within(&self, q: &[f64], radius: f64) -> Vec<usize> {
        let reach = (radius / self.cell).ceil() as i64;
        let center = key(q, self.cell);
        let mut out = Vec::new();
        for ring in 0..=reach {
            for_each_shell(&center, ring, &mut |cell| {
                if let Some(ids) = self.buckets.get(cell) {
                    out.extend(ids.iter().copied().filter(|&i| dist(&self.points[i], q) <= radius));
                }
            });
        }
        out.sort_unstable();
        out
    }
}

fn key(p: &[f64], cell: f64) -> Vec<i64> {
    p.iter().map(|x| (x / cell).floor() as i64).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Visits cells at Chebyshev distance exactly `ring` from `center`.
fn for_each_shell(center: &[i64], ring: i64, f: &mut dyn FnMut(&Vec<i64>)) {
    let d = center.len();
    let mut offs = vec![-ring; d];
    loop {
        if offs.iter().any(|o| o.abs() == ring) || ring == 0 {
            let cell: Vec<i64> = center.iter().zip(&offs).map(|(c, o)| c + o).collect();
            f(&cell);
        }
        let mut k = 0;
        loop {
            if k == d {
                return;
            }
            offs[k] += 1;
            if offs[k] <= ring {
                break;
            }
            offs[k] = -ring;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agrees_with_brute_force() {
        let pts: Vec<Vec<f64>> = (0..200)
            .map(|i| {
                let x = (i as f64 * 0.618_033_988_75).fract() * 10.0;
                let y = (i as f64 * 0.414_213_562_37).fract() * 7.0;
                vec![x, y]
            })
            .collect();
        let idx = NearestIndex::new(pts.clone(), 0.5);
        for q in [vec![0.0, 0.0], vec![5.5, 3.3], vec![20.0, -4.0], vec![9.99, 6.9]] {
            let brute = pts.iter().map(|p| dist(p, &q)).fold(f64::INFINITY, f64::min);
            let (_, got) = idx.nearest(&q).unwrap();
            assert!((got - brute).abs() < 1e-12);
            let near = idx.within(&q, 1.5);
            let brute_near = pts.iter().filter(|p| dist(p, &q) <= 1.5).count();
            assert_eq!(near.len(), brute_near);
        }
    }
}
