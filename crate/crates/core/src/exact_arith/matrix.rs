//! Dense arbitrary-precision integer matrices, Hermite normal form and integer kernels.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Validation("matrix must be nonempty".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(IntMatrix { rows, cols, data })
    }

    /// Builds from rows of machine integers. Panics on ragged or empty input.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        assert!(
            rows.iter().all(|r| r.as_ref().len() == cols),
            "ragged rows"
        );
        let data = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().map(|&x| BigInt::from(x)))
            .collect();
        IntMatrix::new(rows.len(), cols, data).expect("nonempty rows")
    }

    pub fn from_big_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Validation("ragged rows".into()));
        }
        let n = rows.len();
        IntMatrix::new(n, cols, rows.into_iter().flatten().collect())
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vec(&self, i: usize) -> Vec<BigInt> {
        self.row(i).to_vec()
    }

    pub fn row_i64(&self, i: usize) -> Option<Vec<i64>> {
        self.row(i).iter().map(ToPrimitive::to_i64).collect()
    }

    pub fn is_zero_row(&self, i: usize) -> bool {
        self.row(i).iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, rhs: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = IntMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * &rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// `M·x` for a column vector `x`.
    pub fn apply(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<BigInt> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: self.cols,
            });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(i) => {
                        a.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                    a[(i, j)] = v;
                }
            }
            prev = a[(k, k)].clone();
        }
        Ok(sign * &a[(n - 1, n - 1)])
    }

    pub fn rank(&self) -> usize {
        let (h, _) = hnf(self);
        (0..h.rows).filter(|&i| !h.is_zero_row(i)).count()
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    /// row_i ← row_i − q·row_j
    fn sub_row(&mut self, i: usize, j: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let v = &self[(j, c)] * q;
            self[(i, c)] -= v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for c in 0..self.cols {
            let v = -&self[(i, c)];
            self[(i, c)] = v;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(ToString::to_string).collect())
            .collect();
        write!(f, "{rows:?}")
    }
}

/// Row Hermite normal form: returns `(H, U)` with `H = U·M`, `U` unimodular.
///
/// `H` is an upper staircase; every pivot is positive and the entries above a
/// pivot lie in `[0, pivot)`. Zero rows come last.
pub fn hnf(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let mut h = m.clone();
    let mut u = IntMatrix::identity(m.rows);
    let mut p = 0;
    for col in 0..h.cols {
        if p == h.rows {
            break;
        }
        loop {
            let pick = (p..h.rows)
                .filter(|&i| !h[(i, col)].is_zero())
                .min_by(|&i, &j| h[(i, col)].abs().cmp(&h[(j, col)].abs()));
            let Some(i) = pick else { break };
            h.swap_rows(i, p);
            u.swap_rows(i, p);
            let mut done = true;
            for i in p + 1..h.rows {
                if h[(i, col)].is_zero() {
                    continue;
                }
                let q = h[(i, col)].div_floor(&h[(p, col)]);
                h.sub_row(i, p, &q);
                u.sub_row(i, p, &q);
                if !h[(i, col)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(p, col)].is_zero() {
            continue;
        }
        if h[(p, col)].is_negative() {
            h.negate_row(p);
            u.negate_row(p);
        }
        for i in 0..p {
            let q = h[(i, col)].div_floor(&h[(p, col)]);
            h.sub_row(i, p, &q);
            u.sub_row(i, p, &q);
        }
        p += 1;
    }
    (h, u)
}

/// HNF basis (zero rows dropped) of the row lattice of `rows`, built one row at
/// a time so tall inputs never need a square transform.
pub fn row_lattice_basis(rows: &[Vec<BigInt>], cols: usize) -> IntMatrix {
    let mut basis: Vec<Vec<BigInt>> = Vec::new();
    for r in rows {
        assert_eq!(r.len(), cols);
        if r.iter().all(Zero::is_zero) {
            continue;
        }
        if !basis.is_empty() {
            let b = IntMatrix::from_big_rows(basis.clone()).expect("rows share a length");
            if solve_in_row_lattice(&b, r).is_some() {
                continue;
            }
        }
        basis.push(r.clone());
        let (h, _) = hnf(&IntMatrix::from_big_rows(basis).expect("rows share a length"));
        basis = (0..h.rows)
            .filter(|&i| !h.is_zero_row(i))
            .map(|i| h.row_vec(i))
            .collect();
    }
    if basis.is_empty() {
        return IntMatrix::zeros(1, cols);
    }
    IntMatrix::from_big_rows(basis).expect("rows share a length")
}

/// Pivot columns of a matrix already in row Hermite normal form.
pub fn hnf_pivots(h: &IntMatrix) -> Vec<usize> {
    (0..h.rows)
        .filter_map(|i| h.row(i).iter().position(|x| !x.is_zero()))
        .collect()
}

/// A basis of `{x ∈ Z^cols : M·x = 0}` in Hermite normal form; empty iff the kernel is trivial.
pub fn integer_kernel(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    let (h, u) = hnf(&m.transpose());
    let rank = (0..h.rows).filter(|&i| !h.is_zero_row(i)).count();
    if rank == m.cols {
        return Vec::new();
    }
    let rows: Vec<Vec<BigInt>> = (rank..m.cols).map(|i| u.row_vec(i)).collect();
    let basis = IntMatrix::from_big_rows(rows).expect("kernel rows share a length");
    let (canon, _) = hnf(&basis);
    (0..canon.rows)
        .filter(|&i| !canon.is_zero_row(i))
        .map(|i| canon.row_vec(i))
        .collect()
}

/// Solves `x·B = y` for an integer row vector `x`, with `B` in row HNF (zero rows dropped).
/// Returns `None` when `y` is not in the row lattice of `B`.
pub fn solve_in_row_lattice(b: &IntMatrix, y: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(y.len(), b.cols);
    let pivots = hnf_pivots(b);
    let mut rest = y.to_vec();
    let mut x = vec![BigInt::zero(); b.rows];
    for (i, &pc) in pivots.iter().enumerate() {
        let (q, r) = rest[pc].div_rem(&b[(i, pc)]);
        if !r.is_zero() {
            return None;
        }
        for c in 0..b.cols {
            rest[c] -= &q * &b[(i, c)];
        }
        x[i] = q;
    }
    rest.iter().all(Zero::is_zero).then_some(x)
}
