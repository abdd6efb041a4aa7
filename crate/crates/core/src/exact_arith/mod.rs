//! Exact integer, rational and quadratic-field arithmetic, lattice normal forms,
//! and integer-relation detection.

mod lll;
mod matrix;
mod quad;
mod qvec;

pub use lll::{
    lll_reduce, lll_relations, relation_candidates, Relation, DEFAULT_SCALE, DEFAULT_TOL,
};
pub use matrix::{
    hnf, hnf_pivots, integer_kernel, row_lattice_basis, solve_in_row_lattice, IntMatrix,
};
pub use qvec::{integer_coordinates, QuadLattice};
pub use quad::{is_square_free, parse_rational, QuadExt, Rational};
