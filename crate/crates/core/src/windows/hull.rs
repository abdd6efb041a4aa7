//! Convex hulls in dimensions one and two, with signed distances.

use crate::error::{Error, Result};

/// Hull vertices: `[min, max]` in 1D, a counter-clockwise polygon in 2D. A
/// degenerate 2D hull is a segment (two vertices) or a single point.
pub(crate) fn convex_hull(points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = points.first().map_or(0, Vec::len);
    if points.is_empty() {
        return Err(Error::DegenerateHull);
    }
    if let Some(bad) = points.iter().find(|p| p.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    match n {
        1 => {
            let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            Ok(if lo == hi { vec![vec![lo]] } else { vec![vec![lo], vec![hi]] })
        }
        2 => Ok(monotone_chain(points)),
        other => Err(Error::UnsupportedDimension(other)),
    }
}

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn monotone_chain(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut p: Vec<Vec<f64>> = points.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut lower: Vec<Vec<f64>> = Vec::new();
    for q in &p {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], q) <= 0.0 {
            lower.pop();
        }
        lower.push(q.clone());
    }
    let mut upper: Vec<Vec<f64>> = Vec::new();
    for q in p.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], q) <= 0.0 {
            upper.pop();
        }
        upper.push(q.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn segment_distance(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((x[0] - a[0]) * dx + (x[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    ((x[0] - a[0] - t * dx).powi(2) + (x[1] - a[1] - t * dy).powi(2)).sqrt()
}

/// Negative inside, zero on the boundary, Euclidean distance outside.
pub(crate) fn hull_signed_distance(vertices: &[Vec<f64>], x: &[f64]) -> f64 {
    match (x.len(), vertices.len()) {
        (1, 1) => (x[0] - vertices[0][0]).abs(),
        (1, _) => (vertices[0][0] - x[0]).max(x[0] - vertices[1][0]),
        (_, 1) => ((x[0] - vertices[0][0]).powi(2) + (x[1] - vertices[0][1]).powi(2)).sqrt(),
        (_, 2) => segment_distance(x, &vertices[0], &vertices[1]),
        (_, k) => {
            let mut dist = f64::INFINITY;
            let mut inside = true;
            for i in 0..k {
                let (a, b) = (&vertices[i], &vertices[(i + 1) % k]);
                dist = dist.min(segment_distance(x, a, b));
                if cross(a, b, x) < 0.0 {
                    inside = false;
                }
            }
            if inside {
                -dist
            } else {
                dist
            }
        }
    }
}

/// True when the hull has an empty interior.
pub(crate) fn is_degenerate(vertices: &[Vec<f64>]) -> bool {
    match vertices.first().map_or(0, Vec::len) {
        1 => vertices.len() < 2,
        _ => vertices.len() < 3,
    }
}

/// Area (2D) or length (1D) of the hull.
pub(crate) fn hull_volume(vertices: &[Vec<f64>]) -> f64 {
    if is_degenerate(vertices) {
        return 0.0;
    }
    if vertices[0].len() == 1 {
        return vertices[1][0] - vertices[0][0];
    }
    let k = vertices.len();
    (0..k)
        .map(|i| {
            let (a, b) = (&vertices[i], &vertices[(i + 1) % k]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        / 2.0
}
