//! Minimal-width refinement of a fitted linear map.
//!
//! With `A = A₀ + K·M`, the internal images `y_i − M·t_i` (`y_i = Kᵀφ(t_i)`)
//! form a cloud whose widths along a fixed set of directions are convex in `M`.
//! Minimising their sum is a linear program; a least-squares `M` leaves a shear
//! that grows linearly with `‖t‖`, while the minimal-width `M` is pinned by the
//! extreme points alone.

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};

use super::fit::assemble;
use super::{AddressedSample, LinearApprox};
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Directions per half-turn in a 2-dimensional internal space.
const PLANE_DIRECTIONS: usize = 16;
/// Extreme points per direction and side added in each cutting-plane round.
const BATCH: usize = 12;
const MAX_ROUNDS: usize = 60;

/// Width directions in `R^n`: the axes, plus (for `n = 2`) a fan over the
/// half-turn and (for `n ≥ 3`) the normalised pairwise sums and differences.
fn width_directions(n: usize) -> Vec<Vec<f64>> {
    if n == 2 {
        return (0..PLANE_DIRECTIONS)
            .map(|k| {
                let a = std::f64::consts::PI * k as f64 / PLANE_DIRECTIONS as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
    }
    let mut out: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in i + 1..n {
            for sign in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[i] = h;
                e[j] = sign * h;
                out.push(e);
            }
        }
    }
    out
}

/// Values `u_k·(y_i − M·t_i)` for every direction `k` and point `i`.
fn projections(dirs: &[Vec<f64>], ys: &[Vec<f64>], ts: &[Vec<f64>], m: &Mat<f64>) -> Vec<Vec<f64>> {
    dirs.iter()
        .map(|u| {
            ys.iter()
                .zip(ts)
                .map(|(y, t)| {
                    let mt = m.mul_vec(t);
                    u.iter().zip(y.iter().zip(&mt)).map(|(a, (b, c))| a * (b - c)).sum()
                })
                .collect()
        })
        .collect()
}

fn extreme_indices(v: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let k = k.min(idx.len());
    let mut out: Vec<usize> = idx[..k].to_vec();
    out.extend_from_slice(&idx[idx.len() - k..]);
    out
}

fn total_width(p: &[Vec<f64>]) -> f64 {
    p.iter()
        .map(|v| {
            let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
            hi - lo
        })
        .sum()
}

/// A lattice point (coordinates relative to the base point) whose internal
/// image `g = Kᵀm − M·Vᵀm` must sit beyond every sample image along `normal`:
/// `normal·g ≥ normal·g_i + margin` for all sample points `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Separation {
    pub coords: Vec<i64>,
    pub normal: Vec<f64>,
}

/// Cost of one unit of separation slack relative to one unit of width.
const SLACK_WEIGHT: f64 = 1e4;

/// Replaces the internal part `M` of `l` by the matrix minimising the summed
/// widths of the internal image cloud. Returns `l` unchanged when `s = d`.
pub fn refine_linear_map(a: &AddressedSample, l: &LinearApprox<f64>) -> Result<LinearApprox<f64>> {
    Ok(refine_with_separations(a, l, &[], 0.0)?.0)
}

/// Minimal-width refinement with separation constraints. Separations are soft:
/// each may fall short by a slack that is charged heavily in the objective.
/// Returns the refined map and the largest slack used (0 when every
/// separation holds).
pub fn refine_with_separations(
    a: &AddressedSample,
    l: &LinearApprox<f64>,
    seps: &[Separation],
    margin: f64,
) -> Result<(LinearApprox<f64>, f64)> {
    let kernel = l.kernel().clone();
    let (n, d) = (kernel.cols(), a.d());
    if n == 0 || a.len() <= d {
        return Ok((l.clone(), 0.0));
    }
    let kt = kernel.transpose();
    let ts: Vec<Vec<f64>> = a.points().to_vec();
    let phis: Vec<Vec<f64>> = a
        .coords()
        .iter()
        .map(|c| c.iter().map(|&x| x as f64).collect())
        .collect();
    let ys: Vec<Vec<f64>> = phis.iter().map(|p| kt.mul_vec(p)).collect();
    let sep_y: Vec<Vec<f64>> = seps
        .iter()
        .map(|z| kt.mul_vec(&z.coords.iter().map(|&x| x as f64).collect::<Vec<_>>()))
        .collect();
    let sep_t: Vec<Vec<f64>> = seps
        .iter()
        .map(|z| a.basis().embed(&z.coords.iter().map(|&x| x as f64).collect::<Vec<_>>()))
        .collect();
    let m0 = kt.mul(l.matrix());
    let mut dirs = width_directions(n);
    let n_width = dirs.len();
    dirs.extend(seps.iter().map(|z| z.normal.clone()));
    let start = projections(&dirs, &ys, &ts, &m0);
    let scale = start
        .iter()
        .flatten()
        .fold(1.0f64, |acc, x| acc.max(x.abs()));
    let eps = 1e-12 * scale;

    // Width directions watch both sides; separation directions only the top.
    let mut active: Vec<Vec<bool>> = vec![vec![false; ts.len()]; dirs.len()];
    for (k, v) in start.iter().enumerate() {
        let ext = extreme_indices(v, BATCH);
        let keep = if k < n_width { &ext[..] } else { &ext[ext.len() / 2..] };
        for &i in keep {
            active[k][i] = true;
        }
    }

    let mut m = m0.clone();
    let mut worst_slack = 0.0f64;
    for _ in 0..MAX_ROUNDS {
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        // M is searched as M₀ + Δ with Δ boxed, which keeps early rounds bounded.
        let delta: Vec<Vec<Variable>> = (0..n)
            .map(|_| (0..d).map(|_| lp.add_var(0.0, (-1.0, 1.0))).collect())
            .collect();
        let bounds: Vec<(Variable, Variable)> = (0..n_width)
            .map(|_| {
                (
                    lp.add_var(-1.0, (f64::NEG_INFINITY, f64::INFINITY)),
                    lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY)),
                )
            })
            .collect();
        let slacks: Vec<Variable> = seps.iter().map(|_| lp.add_var(SLACK_WEIGHT, (0.0, f64::INFINITY))).collect();
        // Coefficients of Δ in −u·Δ·t.
        let coeffs = |u: &[f64], t: &[f64]| -> Vec<(Variable, f64)> {
            let mut row = Vec::with_capacity(n * d + 1);
            for r in 0..n {
                for j in 0..d {
                    row.push((delta[r][j], -u[r] * t[j]));
                }
            }
            row
        };
        for (k, u) in dirs.iter().enumerate() {
            for i in (0..ts.len()).filter(|&i| active[k][i]) {
                // u·g_i = start + coeffs·Δ
                let base = start[k][i];
                if k < n_width {
                    let mut upper = coeffs(u, &ts[i]);
                    upper.push((bounds[k].1, -1.0));
                    lp.add_constraint(upper, ComparisonOp::Le, -base);
                    let mut lower = coeffs(u, &ts[i]);
                    lower.push((bounds[k].0, -1.0));
                    lp.add_constraint(lower, ComparisonOp::Ge, -base);
                } else {
                    let z = k - n_width;
                    let diff: Vec<f64> = sep_t[z].iter().zip(&ts[i]).map(|(p, q)| p - q).collect();
                    let gz: f64 = u
                        .iter()
                        .zip(sep_y[z].iter().zip(m0.mul_vec(&sep_t[z])))
                        .map(|(a, (y, mt))| a * (y - mt))
                        .sum();
                    let mut row = coeffs(u, &diff);
                    row.push((slacks[z], 1.0));
                    lp.add_constraint(row, ComparisonOp::Ge, margin + base - gz);
                }
            }
        }
        let sol = lp
            .solve()
            .map_err(|e| Error::Validation(format!("width refinement failed: {e}")))?;
        worst_slack = slacks.iter().map(|&v| sol[v]).fold(0.0, f64::max);
        let mut next = m0.clone();
        for r in 0..n {
            for j in 0..d {
                next[(r, j)] += sol[delta[r][j]];
            }
        }
        m = next;
        let p = projections(&dirs, &ys, &ts, &m);
        let mut added = false;
        for (k, v) in p.iter().enumerate() {
            let (lo, hi) = if k < n_width {
                (sol[bounds[k].0], sol[bounds[k].1])
            } else {
                let z = k - n_width;
                let u = &dirs[k];
                let gz: f64 = u
                    .iter()
                    .zip(sep_y[z].iter().zip(m.mul_vec(&sep_t[z])))
                    .map(|(a, (y, mt))| a * (y - mt))
                    .sum();
                (f64::NEG_INFINITY, gz - margin + sol[slacks[z]])
            };
            let mut over: Vec<(f64, usize)> = Vec::new();
            let mut under: Vec<(f64, usize)> = Vec::new();
            for (i, &x) in v.iter().enumerate() {
                if active[k][i] {
                    continue;
                }
                if x > hi + eps {
                    over.push((x - hi, i));
                } else if x < lo - eps {
                    under.push((lo - x, i));
                }
            }
            for list in [&mut over, &mut under] {
                list.sort_by(|a, b| b.0.total_cmp(&a.0));
                for &(_, i) in list.iter().take(BATCH) {
                    active[k][i] = true;
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }

    if seps.is_empty() && total_width(&projections(&dirs, &ys, &ts, &m)) > total_width(&start) {
        return Ok((l.clone(), 0.0));
    }
    let a0 = l.matrix().add(&kernel.mul(&m0).scaled(-1.0));
    let a_mat = a0.add(&kernel.mul(&m));
    Ok((assemble(a_mat, kernel, &ts, &phis), worst_slack))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::address::{difference_group_basis, fit_linear_map};
    use crate::modelset::{fixture_spec, generate, Fixture};
    use crate::pointsets::BoxRegion;
    use crate::windows::Mode;

    fn max_err(x: &Mat<f64>, y: &Mat<f64>) -> f64 {
        x.add(&y.scaled(-1.0)).max_abs()
    }

    fn octagonal_patch() -> AddressedSample {
        let spec = fixture_spec(Fixture::AmmannBeenker, BoxRegion::new(vec![0.0, 0.0], vec![15.0, 15.0]).unwrap()).unwrap();
        difference_group_basis(&generate(&spec, Mode::Closed).unwrap(), 1e-9).unwrap()
    }

    fn width_of(a: &AddressedSample, l: &LinearApprox<f64>) -> f64 {
        let kt = l.kernel().transpose();
        let ys: Vec<Vec<f64>> = a
            .coords()
            .iter()
            .map(|c| kt.mul_vec(&c.iter().map(|&x| x as f64).collect::<Vec<_>>()))
            .collect();
        total_width(&projections(&width_directions(2), &ys, a.points(), &kt.mul(l.matrix())))
    }

    #[test]
    fn refinement_narrows_the_cloud_and_keeps_the_embedding() {
        let a = octagonal_patch();
        let ls = fit_linear_map::<f64>(&a).unwrap();
        let refined = refine_linear_map(&a, &ls).unwrap();
        assert!(width_of(&a, &refined) <= width_of(&a, &ls) + 1e-9);
        let v = Mat::from_rows(a.basis().vectors());
        let id = v.transpose().mul(refined.matrix());
        assert!(max_err(&id, &Mat::identity(2)) < 1e-9);
    }

    #[test]
    fn a_sample_point_cannot_be_separated_from_itself() {
        let a = octagonal_patch();
        let ls = fit_linear_map::<f64>(&a).unwrap();
        let sep = Separation {
            coords: a.coords()[0].clone(),
            normal: vec![1.0, 0.0],
        };
        let (_, slack) = refine_with_separations(&a, &ls, &[sep], 1e-7).unwrap();
        assert!(slack >= 1e-7 * 0.999, "{slack}");
    }

    #[test]
    fn directions_are_unit() {
        for n in 1..5 {
            for u in width_directions(n) {
                assert!((u.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}
