//! Difference-group bases, the address map, linear approximation of the
//! address map, and the Meyer verdict built on its deviation profile.

mod fit;
mod refine;
mod report;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::exact_arith::{
    integer_coordinates, relation_candidates, row_lattice_basis, solve_in_row_lattice, IntMatrix,
    QuadExt, QuadLattice, DEFAULT_SCALE,
};
use crate::pointsets::{PointSample, SampleMode};
use crate::scalar::combine;

pub use fit::{
    cocycle_value, embedding_kernel, fit_linear_map, meyer_test, LinearApprox, MeyerVerdict, DEFAULT_WINDOW_RATIO,
};
pub use refine::{refine_linear_map, refine_with_separations, Separation};
pub use report::AnalysisReport;

/// Default membership tolerance for numeric group discovery.
pub const DEFAULT_GROUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Declared,
    Discovered,
}

/// Generators `v_1..v_s` of `⟨Λ − Λ⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorBasis {
    vectors: Vec<Vec<f64>>,
    exact: Option<Vec<Vec<QuadExt>>>,
    provenance: Provenance,
}

impl GeneratorBasis {
    pub fn exact(vectors: Vec<Vec<QuadExt>>, provenance: Provenance) -> Self {
        GeneratorBasis {
            vectors: vectors
                .iter()
                .map(|v| v.iter().map(QuadExt::to_f64).collect())
                .collect(),
            exact: Some(vectors),
            provenance,
        }
    }

    pub fn numeric(vectors: Vec<Vec<f64>>, provenance: Provenance) -> Self {
        GeneratorBasis {
            vectors,
            exact: None,
            provenance,
        }
    }

    pub fn s(&self) -> usize {
        self.vectors.len()
    }

    pub fn d(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn exact_vectors(&self) -> Option<&[Vec<QuadExt>]> {
        self.exact.as_deref()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// `Σ u_j v_j`.
    pub fn embed(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d()];
        for (c, v) in u.iter().zip(&self.vectors) {
            for (o, x) in out.iter_mut().zip(v) {
                *o += c * x;
            }
        }
        out
    }
}

/// A sample translated so its base point is 0, with address coordinates `φ(t)`
/// for every point.
#[derive(Debug, Clone, PartialEq)]
pub struct AddressedSample {
    sample: PointSample,
    basis: GeneratorBasis,
    base: usize,
    base_coords: Option<Vec<i64>>,
    coords: Vec<Vec<i64>>,
    points: Vec<Vec<f64>>,
}

impl AddressedSample {
    pub fn sample(&self) -> &PointSample {
        &self.sample
    }

    pub fn basis(&self) -> &GeneratorBasis {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn d(&self) -> usize {
        self.sample.dim()
    }

    /// Index of the base point in the underlying sample.
    pub fn base_index(&self) -> usize {
        self.base
    }

    /// Address of the base point itself, when it lies in the difference group.
    pub fn base_coords(&self) -> Option<&[i64]> {
        self.base_coords.as_deref()
    }

    /// `φ(t)` for the translated points `t = x − x_base`.
    pub fn coords(&self) -> &[Vec<i64>] {
        &self.coords
    }

    /// Translated positions `t = x − x_base`.
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Address of the untranslated point `x_i`, when the base point is addressable.
    pub fn absolute_coords(&self, i: usize) -> Option<Vec<i64>> {
        let b = self.base_coords.as_ref()?;
        Some(self.coords[i].iter().zip(b).map(|(x, y)| x + y).collect())
    }

    /// Index of the translated point `t`, matched within `1e-9`.
    pub fn find(&self, t: &[f64]) -> Option<usize> {
        self.points.iter().position(|p| {
            p.len() == t.len() && p.iter().zip(t).all(|(a, b)| (a - b).abs() <= 1e-9)
        })
    }

    /// The same sample readdressed in the basis `v' = U·v` for a unimodular `U`.
    pub fn change_basis(&self, u: &[Vec<i64>]) -> Result<AddressedSample> {
        let s = self.basis.s();
        if u.len() != s || u.iter().any(|r| r.len() != s) {
            return Err(Error::DimensionMismatch {
                expected: s,
                found: u.len(),
            });
        }
        let um = IntMatrix::from_rows(u);
        let det = um.det()?;
        if det != BigInt::from(1) && det != BigInt::from(-1) {
            return Err(Error::InvalidArgument("basis change must be unimodular".into()));
        }
        // The HNF of a unimodular matrix is the identity, so its transform is U⁻¹.
        let (_, inv) = crate::exact_arith::hnf(&um);
        let inv: Vec<Vec<i64>> = (0..s)
            .map(|i| inv.row_i64(i).expect("small inverse"))
            .collect();
        // φ' = U^{-T} φ
        let re = |c: &[i64]| -> Vec<i64> {
            (0..s).map(|k| (0..s).map(|j| inv[j][k] * c[j]).sum()).collect()
        };
        let basis = match &self.basis.exact {
            Some(ex) => GeneratorBasis::exact(
                u.iter().map(|row| combine(row, ex)).collect(),
                self.basis.provenance,
            ),
            None => GeneratorBasis::numeric(
                u.iter().map(|row| combine(row, &self.basis.vectors)).collect(),
                self.basis.provenance,
            ),
        };
        Ok(AddressedSample {
            sample: self.sample.clone(),
            basis,
            base: self.base,
            base_coords: self.base_coords.as_deref().map(re),
            coords: self.coords.iter().map(|c| re(c)).collect(),
            points: self.points.clone(),
        })
    }
}

/// Rank `s` of the difference group and whether it exceeds `d`.
pub fn rank(a: &AddressedSample) -> (usize, bool) {
    let s = a.basis.s();
    (s, s > a.d())
}

fn to_i64(v: &[BigInt]) -> Result<Vec<i64>> {
    v.iter()
        .map(|x| {
            x.to_i64()
                .ok_or_else(|| Error::InvalidArgument("address coordinate overflows i64".into()))
        })
        .collect()
}

/// Computes a basis of `⟨Λ − Λ⟩` and addresses every point relative to the
/// point nearest the box center.
pub fn difference_group_basis(s: &PointSample, tol: f64) -> Result<AddressedSample> {
    if s.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            have: s.len(),
        });
    }
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let base = s.central_index().expect("nonempty sample");
    let points = relative_positions(s, base);
    let (basis, coords, base_coords) = match s.mode() {
        SampleMode::Exact => exact_basis(s, base)?,
        SampleMode::Numeric => numeric_basis(&points, tol)?,
    };
    Ok(AddressedSample {
        sample: s.clone(),
        basis,
        base,
        base_coords,
        coords,
        points,
    })
}

/// `x_i − x_base`, computed exactly before rounding in exact mode.
fn relative_positions(s: &PointSample, base: usize) -> Vec<Vec<f64>> {
    match s.exact_position(base) {
        Some(x0) => (0..s.len())
            .map(|i| {
                let x = s.exact_position(i).unwrap();
                x.iter().zip(&x0).map(|(a, b)| (a - b).to_f64()).collect()
            })
            .collect(),
        None => {
            let x0 = &s.positions()[base];
            s.positions()
                .iter()
                .map(|p| p.iter().zip(x0).map(|(a, b)| a - b).collect())
                .collect()
        }
    }
}

/// Addresses an exact sample directly in its declared generators, which must
/// be independent over `Z`.
pub fn address_declared(s: &PointSample) -> Result<AddressedSample> {
    let (Some(gens), Some(coords)) = (s.generators(), s.coords()) else {
        return Err(Error::InvalidArgument("declared addressing needs an exact sample".into()));
    };
    if s.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, have: 0 });
    }
    let lat = QuadLattice::for_vectors(gens)?;
    let rows: Vec<Vec<BigInt>> = gens.iter().map(|g| lat.to_int(g).unwrap()).collect();
    if IntMatrix::from_big_rows(rows)?.rank() != gens.len() {
        return Err(Error::Validation("declared generators are dependent".into()));
    }
    let base = s.central_index().expect("nonempty sample");
    let b = coords[base].clone();
    Ok(AddressedSample {
        sample: s.clone(),
        basis: GeneratorBasis::exact(gens.to_vec(), Provenance::Declared),
        base,
        coords: coords
            .iter()
            .map(|c| c.iter().zip(&b).map(|(x, y)| x - y).collect())
            .collect(),
        base_coords: Some(b),
        points: relative_positions(s, base),
    })
}

type BasisParts = (GeneratorBasis, Vec<Vec<i64>>, Option<Vec<i64>>);

fn exact_basis(s: &PointSample, base: usize) -> Result<BasisParts> {
    let gens = s.generators().expect("exact sample");
    let coords = s.coords().expect("exact sample");
    let s0 = gens.len();
    let lat = QuadLattice::for_vectors(gens)?;
    let gen_rows: Vec<Vec<BigInt>> = gens
        .iter()
        .map(|g| lat.to_int(g).expect("generators are integral at their own scale"))
        .collect();
    let independent = IntMatrix::from_big_rows(gen_rows)?.rank() == s0;

    let (new_gens, rows, h): (Vec<Vec<QuadExt>>, Vec<Vec<BigInt>>, IntMatrix) = if independent {
        let rows: Vec<Vec<BigInt>> = coords
            .iter()
            .map(|c| c.iter().zip(&coords[base]).map(|(a, b)| BigInt::from(a - b)).collect())
            .collect();
        let h = row_lattice_basis(&rows, s0);
        let new_gens = (0..h.rows())
            .map(|k| {
                let row = h.row_i64(k).expect("HNF rows of small coordinates");
                combine(&row, gens)
            })
            .collect();
        (new_gens, rows, h)
    } else {
        // Declared generators are dependent: work with the positions themselves.
        let x0 = s.exact_position(base).unwrap();
        let rows: Vec<Vec<BigInt>> = (0..s.len())
            .map(|i| {
                let x = s.exact_position(i).unwrap();
                let rel: Vec<QuadExt> = x.iter().zip(&x0).map(|(a, b)| a - b).collect();
                lat.to_int(&rel).expect("differences stay integral")
            })
            .collect();
        let h = row_lattice_basis(&rows, 2 * s.dim());
        let new_gens = (0..h.rows()).map(|k| lat.from_int(h.row(k))).collect();
        (new_gens, rows, h)
    };
    if h.rows() == 1 && h.is_zero_row(0) {
        return Err(Error::DegenerateSpan);
    }
    let coords = rows
        .iter()
        .map(|r| to_i64(&solve_in_row_lattice(&h, r).expect("row lies in its own lattice")))
        .collect::<Result<Vec<_>>>()?;
    let base_coords = integer_coordinates(&new_gens, &s.exact_position(base).unwrap());
    Ok((
        GeneratorBasis::exact(new_gens, Provenance::Discovered),
        coords,
        base_coords,
    ))
}

enum Membership {
    /// `x = Σ c_i g_i`.
    Member(Vec<i64>),
    /// `Σ m_i g_i + k·x = 0` with `|k| > 1`.
    Divisible(Vec<i64>, i64),
    Independent,
}

fn membership(gens: &[Vec<f64>], x: &[f64], tol: f64) -> Result<Membership> {
    if gens.is_empty() {
        return Ok(Membership::Independent);
    }
    let mut vs = gens.to_vec();
    vs.push(x.to_vec());
    let k = gens.len();
    let best = relation_candidates(&vs, DEFAULT_SCALE)?
        .into_iter()
        .filter(|r| r.coeffs[k] != 0)
        .min_by(|a, b| a.relative_residual.partial_cmp(&b.relative_residual).unwrap());
    let Some(rel) = best else {
        return Ok(Membership::Independent);
    };
    if rel.relative_residual > 10.0 * tol {
        return Ok(Membership::Independent);
    }
    if rel.relative_residual >= tol {
        return Err(Error::RelationAmbiguity {
            residual: rel.relative_residual,
        });
    }
    let last = rel.coeffs[k];
    if last.abs() == 1 {
        Ok(Membership::Member(rel.coeffs[..k].iter().map(|c| -c * last).collect()))
    } else {
        Ok(Membership::Divisible(rel.coeffs[..k].to_vec(), last))
    }
}

/// Basis of `⟨G, x⟩` when `Σ m_i g_i + k·x = 0`.
fn enlarge(gens: &[Vec<f64>], m: &[i64], k: i64) -> Vec<Vec<f64>> {
    let n = gens.len();
    // In coordinates over G scaled by |k|: rows k·e_i and the image of x, which is −m.
    let mut rows: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| BigInt::from(if i == j { k.abs() } else { 0 })).collect())
        .collect();
    let sign = k.signum();
    rows.push(m.iter().map(|&c| BigInt::from(-c * sign)).collect());
    let h = row_lattice_basis(&rows, n);
    (0..h.rows())
        .map(|r| {
            let row: Vec<f64> = h.row(r).iter().map(|x| x.to_f64().unwrap() / k.abs() as f64).collect();
            let mut out = vec![0.0; gens[0].len()];
            for (c, g) in row.iter().zip(gens) {
                for (o, y) in out.iter_mut().zip(g) {
                    *o += c * y;
                }
            }
            out
        })
        .collect()
}

fn numeric_basis(points: &[Vec<f64>], tol: f64) -> Result<BasisParts> {
    // Short differences near the base point first, so generators come out short.
    let mut order: Vec<usize> = (0..points.len()).collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    order.sort_by(|&a, &b| norm(&points[a]).partial_cmp(&norm(&points[b])).unwrap());
    let near: Vec<&Vec<f64>> = order.iter().take(48).map(|&i| &points[i]).collect();
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    for (i, p) in near.iter().enumerate() {
        for q in &near[..i] {
            candidates.push(p.iter().zip(q.iter()).map(|(a, b)| a - b).collect());
        }
    }
    candidates.sort_by(|a, b| norm(a).partial_cmp(&norm(b)).unwrap());
    candidates.extend(order.iter().map(|&i| points[i].clone()));

    let scale = points.iter().map(|p| norm(p).sqrt()).fold(1.0, f64::max);
    let mut gens: Vec<Vec<f64>> = Vec::new();
    for x in &candidates {
        if norm(x).sqrt() <= 64.0 * f64::EPSILON * scale {
            continue;
        }
        match membership(&gens, x, tol)? {
            Membership::Member(_) => {}
            Membership::Divisible(m, k) => gens = enlarge(&gens, &m, k),
            Membership::Independent => gens.push(x.clone()),
        }
    }
    let coords = points
        .iter()
        .map(|p| {
            if norm(p) == 0.0 {
                return Ok(vec![0; gens.len()]);
            }
            match membership(&gens, p, tol)? {
                Membership::Member(c) => Ok(c),
                _ => Err(Error::RelationAmbiguity { residual: f64::NAN }),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((
        GeneratorBasis::numeric(gens, Provenance::Discovered),
        coords,
        None,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointsets::{substitution_generate, BoxRegion};

    fn integers(n: i64) -> PointSample {
        PointSample::exact(
            vec![vec![QuadExt::int(1)]],
            (0..=n).map(|k| vec![k]).collect(),
            BoxRegion::interval(0.0, n as f64).unwrap(),
        )
        .unwrap()
    }

    fn check_reconstruction(a: &AddressedSample, tol: f64) {
        for (c, t) in a.coords().iter().zip(a.points()) {
            let u: Vec<f64> = c.iter().map(|&x| x as f64).collect();
            let e = a.basis().embed(&u);
            for (x, y) in e.iter().zip(t) {
                assert!((x - y).abs() <= tol, "{c:?} -> {e:?} vs {t:?}");
            }
        }
    }

    #[test]
    fn integers_have_rank_one() {
        let a = difference_group_basis(&integers(20), 1e-6).unwrap();
        assert_eq!(rank(&a), (1, false));
        assert_eq!(a.basis().vectors(), &[vec![1.0]]);
        let i = a.base_index();
        assert_eq!(a.base_coords(), Some(&[i as i64][..]));
        check_reconstruction(&a, 0.0);
    }

    #[test]
    fn fibonacci_has_rank_two() {
        let s = substitution_generate("fibonacci", 10).unwrap();
        let a = difference_group_basis(&s, 1e-6).unwrap();
        assert_eq!(rank(&a), (2, true));
        check_reconstruction(&a, 1e-9);
    }

    #[test]
    fn numeric_mode_discovers_the_same_rank() {
        let s = substitution_generate("fibonacci", 9).unwrap();
        let numeric = PointSample::numeric(s.positions().to_vec(), s.region().clone()).unwrap();
        let a = difference_group_basis(&numeric, DEFAULT_GROUP_TOL).unwrap();
        assert_eq!(a.basis().s(), 2);
        check_reconstruction(&a, 1e-8);
        let z = PointSample::numeric((0..=20).map(|k| vec![k as f64]).collect(), BoxRegion::interval(0.0, 20.0).unwrap()).unwrap();
        let a = difference_group_basis(&z, DEFAULT_GROUP_TOL).unwrap();
        assert_eq!(a.basis().s(), 1);
        assert!((a.basis().vectors()[0][0].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn numeric_divisible_step_refines_the_group() {
        // 0, 2, 3: the generator 2 must be replaced by 1 once 3 arrives.
        let s = PointSample::numeric(vec![vec![0.0], vec![2.0], vec![3.0], vec![7.0]], BoxRegion::interval(0.0, 7.0).unwrap()).unwrap();
        let a = difference_group_basis(&s, 1e-6).unwrap();
        assert_eq!(a.basis().s(), 1);
        check_reconstruction(&a, 1e-12);
    }

    #[test]
    fn dependent_declared_generators() {
        let s = PointSample::exact(
            vec![vec![QuadExt::int(2)], vec![QuadExt::int(3)]],
            vec![vec![0, 0], vec![2, -1], vec![0, 1], vec![1, 1]],
            BoxRegion::interval(0.0, 5.0).unwrap(),
        )
        .unwrap();
        let a = difference_group_basis(&s, 1e-6).unwrap();
        assert_eq!(a.basis().s(), 1);
        check_reconstruction(&a, 0.0);
    }

    #[test]
    fn unimodular_change_keeps_addresses_consistent() {
        let s = substitution_generate("fibonacci", 8).unwrap();
        let a = difference_group_basis(&s, 1e-6).unwrap();
        let b = a.change_basis(&[vec![2, 1], vec![1, 1]]).unwrap();
        check_reconstruction(&b, 1e-9);
        assert!(a.change_basis(&[vec![2, 0], vec![0, 1]]).is_err());
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            difference_group_basis(&integers(0), 1e-6),
            Err(Error::TooFewPoints { .. })
        ));
    }
}
