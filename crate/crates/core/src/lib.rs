//! Cut-and-project model sets: exact quadratic arithmetic, Delone samples,
//! address maps and their linear approximation, Lagarias schemes, windows,
//! and the reconstruction round trip.
//!
//! Numeric types are generic over [`Real`] (floating) or [`Scalar`] (floating
//! or exact); the aliases below fix the common instantiations.

pub mod address;
pub mod error;
pub mod exact_arith;
pub mod lagarias_cps;
pub mod linalg;
pub mod modelset;
pub mod pointsets;
pub mod scalar;
pub mod spatial;
pub mod windows;

pub use error::{Error, Result};
pub use exact_arith::{QuadExt, Rational};
pub use scalar::{Real, Scalar};

pub type Cps64 = lagarias_cps::EuclideanCps<f64>;
pub type LinearApprox64 = address::LinearApprox<f64>;
pub type TorusPoint64 = lagarias_cps::TorusPoint<f64>;
pub type Mat64 = linalg::Mat<f64>;
pub type Window64 = windows::Window<f64>;
pub type ExactWindow = windows::Window<QuadExt>;
pub type ModelSetSpec64 = modelset::ModelSetSpec<f64>;
pub type ExactModelSetSpec = modelset::ModelSetSpec<QuadExt>;
