//! Built-in ground-truth schemes and the non-Meyer drift sample.

use std::str::FromStr;

use num_integer::Roots;

use super::{generate, ModelSetSpec};
use crate::error::{Error, Result};
use crate::exact_arith::QuadExt;
use crate::lagarias_cps::EuclideanCps;
use crate::pointsets::{BoxRegion, PointSample};
use crate::windows::{Mode, Window};

/// Largest `a` in the default drift sample.
pub const SQRT_DRIFT_N: i64 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    Fibonacci,
    Silver,
    AmmannBeenker,
    SqrtDrift,
}

impl FromStr for Fixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fibonacci" => Ok(Fixture::Fibonacci),
            "silver" => Ok(Fixture::Silver),
            "ammann_beenker" => Ok(Fixture::AmmannBeenker),
            "sqrt_drift" => Ok(Fixture::SqrtDrift),
            other => Err(Error::UnknownRule(other.to_string())),
        }
    }
}

impl Fixture {
    pub fn name(self) -> &'static str {
        match self {
            Fixture::Fibonacci => "fibonacci",
            Fixture::Silver => "silver",
            Fixture::AmmannBeenker => "ammann_beenker",
            Fixture::SqrtDrift => "sqrt_drift",
        }
    }

    pub fn is_model_set(self) -> bool {
        self != Fixture::SqrtDrift
    }
}

fn q(n: i64) -> QuadExt {
    QuadExt::int(n)
}

/// Generators `{1, λ}` with star map `a + bλ ↦ a + bλ'` and an interval window.
fn quadratic_line(lambda: QuadExt, window: (QuadExt, QuadExt)) -> Result<(EuclideanCps<f64>, Window<QuadExt>)> {
    let conj = lambda.conjugate();
    let cps = EuclideanCps::exact(vec![vec![q(1)], vec![lambda]], vec![vec![q(1)], vec![conj]])?;
    Ok((cps, Window::interval(window.0, window.1)?))
}

fn ammann_beenker() -> Result<(EuclideanCps<f64>, Window<QuadExt>)> {
    let r = QuadExt::from_parts(0, 1, 1, 2, 2)?;
    let gens = vec![
        vec![q(1), q(0)],
        vec![r.clone(), r.clone()],
        vec![q(0), q(1)],
        vec![-r.clone(), r.clone()],
    ];
    let star: Vec<Vec<QuadExt>> = gens
        .iter()
        .map(|g| g.iter().map(QuadExt::conjugate).collect())
        .collect();
    let cps = EuclideanCps::exact(gens, star)?;
    // Regular octagon of side 1: |u_k · y| ≤ (1 + √2)/2 for u_k at angles kπ/4.
    let inradius = QuadExt::from_parts(1, 2, 1, 2, 2)?;
    let normals = [
        vec![q(1), q(0)],
        vec![r.clone(), r.clone()],
        vec![q(0), q(1)],
        vec![-r.clone(), r],
    ];
    let mut hs = Vec::with_capacity(8);
    for u in normals {
        hs.push((u.iter().map(|x| -x.clone()).collect(), inradius.clone()));
        hs.push((u, inradius.clone()));
    }
    Ok((cps, Window::polytope(hs)?))
}

/// Ground-truth spec with zero shift on `region`.
pub fn fixture_spec(f: Fixture, region: BoxRegion) -> Result<ModelSetSpec<QuadExt>> {
    let (cps, window) = match f {
        Fixture::Fibonacci => {
            let tau = QuadExt::golden();
            quadratic_line(tau.clone(), (q(-1), tau - q(1)))?
        }
        Fixture::Silver => {
            let rt2 = QuadExt::sqrt(2)?;
            quadratic_line(QuadExt::silver(), (q(-1), rt2 - q(1)))?
        }
        Fixture::AmmannBeenker => ammann_beenker()?,
        Fixture::SqrtDrift => {
            return Err(Error::InvalidArgument("sqrt_drift is a sample, not a model set".into()))
        }
    };
    ModelSetSpec::new(cps, window, region)
}

/// `{a + τ⌊√a⌋ : 0 ≤ a ≤ n}` over the generators `{1, τ}`.
pub fn sqrt_drift_sample(n: i64) -> Result<PointSample> {
    if n < 1 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let coords: Vec<Vec<i64>> = (0..=n).map(|a| vec![a, a.sqrt()]).collect();
    let hi = n as f64 + QuadExt::golden().to_f64() * (n as f64).sqrt() + 1.0;
    PointSample::exact(
        vec![vec![q(1)], vec![QuadExt::golden()]],
        coords,
        BoxRegion::interval(0.0, hi.ceil())?,
    )
}

/// The fixture's points in `region`: the closed cut at zero shift, or the
/// drift points falling in the box.
pub fn fixture_sample(f: Fixture, region: BoxRegion) -> Result<PointSample> {
    match f {
        Fixture::SqrtDrift => {
            if region.dim() != 1 {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    found: region.dim(),
                });
            }
            let n = region.hi()[0].max(1.0).ceil() as i64;
            sqrt_drift_sample(n)?.restricted(region)
        }
        _ => generate(&fixture_spec(f, region)?, Mode::Closed),
    }
}
