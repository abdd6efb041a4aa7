//! Small dense matrices over a [`Real`] scalar.
//!
//! Dimensions here are tiny (a handful of rows), so everything is row-major
//! `Vec` storage with straightforward O(n³) algorithms.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[Vec<T>]) -> Self {
        Mat::from_rows(cols).transpose()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in product");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.cols, x.len(), "shape mismatch in product");
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(T::zero(), |acc, j| acc + self[(i, j)] * x[j])
            })
            .collect()
    }

    pub fn add(&self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect(),
        }
    }

    pub fn scaled(&self, k: T) -> Mat<T> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| *a * k).collect(),
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Gauss–Jordan inverse with partial pivoting; `None` when singular to working precision.
    pub fn inverse(&self) -> Option<Mat<T>> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let scale = self.max_abs();
        if scale == T::zero() {
            return None;
        }
        let tiny = scale * T::epsilon() * T::from_usize(16 * n.max(1)).unwrap();
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        for c in 0..n {
            let p = (c..n)
                .max_by(|&i, &j| a[(i, c)].abs().partial_cmp(&a[(j, c)].abs()).unwrap())
                .unwrap();
            if a[(p, c)].abs() <= tiny {
                return None;
            }
            a.swap_rows(p, c);
            inv.swap_rows(p, c);
            let piv = a[(c, c)];
            for j in 0..n {
                a[(c, j)] = a[(c, j)] / piv;
                inv[(c, j)] = inv[(c, j)] / piv;
            }
            for i in 0..n {
                if i == c {
                    continue;
                }
                let f = a[(i, c)];
                if f == T::zero() {
                    continue;
                }
                for j in 0..n {
                    a[(i, j)] = a[(i, j)] - f * a[(c, j)];
                    inv[(i, j)] = inv[(i, j)] - f * inv[(c, j)];
                }
            }
        }
        Some(inv)
    }

    /// Determinant by partial-pivot elimination.
    pub fn det(&self) -> T {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one();
        for c in 0..n {
            let p = (c..n)
                .max_by(|&i, &j| a[(i, c)].abs().partial_cmp(&a[(j, c)].abs()).unwrap())
                .unwrap();
            if a[(p, c)] == T::zero() {
                return T::zero();
            }
            if p != c {
                a.swap_rows(p, c);
                det = -det;
            }
            det = det * a[(c, c)];
            for i in c + 1..n {
                let f = a[(i, c)] / a[(c, c)];
                for j in c..n {
                    a[(i, j)] = a[(i, j)] - f * a[(c, j)];
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching unit eigenvectors
/// as the columns of the second matrix.
pub fn symmetric_eigen<T: Real>(m: &Mat<T>) -> (Vec<T>, Mat<T>) {
    let n = m.rows();
    assert_eq!(n, m.cols());
    let mut a = m.clone();
    let mut v = Mat::identity(n);
    let two = T::one() + T::one();
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .fold(T::zero(), |s, (i, j)| s + a[(i, j)] * a[(i, j)]);
        let diag: T = (0..n).fold(T::zero(), |s, i| s + a[(i, i)] * a[(i, i)]);
        if off <= T::epsilon() * T::epsilon() * (diag + off) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)] == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (two * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vecs = Mat::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vecs[(k, new)] = v[(k, old)];
        }
    }
    (values, vecs)
}

/// Singular values of `m`, ascending.
pub fn singular_values<T: Real>(m: &Mat<T>) -> Vec<T> {
    let (vals, _) = symmetric_eigen(&m.transpose().mul(m));
    vals.into_iter().map(|x| x.max(T::zero()).sqrt()).collect()
}

/// Modified Gram–Schmidt; each output vector has its first component of
/// magnitude above `1e-9` made positive.
pub fn orthonormalize<T: Real>(vectors: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let mut out: Vec<Vec<T>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for u in &out {
            let p = dot(&w, u);
            for (x, y) in w.iter_mut().zip(u) {
                *x = *x - p * *y;
            }
        }
        let nrm = dot(&w, &w).sqrt();
        if nrm <= T::epsilon() * T::from_f64(1e3).unwrap() {
            return Err(Error::DegenerateSpan);
        }
        w.iter_mut().for_each(|x| *x = *x / nrm);
        let thresh = T::from_f64(1e-9).unwrap();
        if let Some(lead) = w.iter().find(|x| x.abs() > thresh).copied() {
            if lead < T::zero() {
                w.iter_mut().for_each(|x| *x = -*x);
            }
        }
        out.push(w);
    }
    Ok(out)
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + *x * *y)
}

pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_det() {
        let m = Mat::from_rows(&[vec![4.0, 7.0], vec![2.0, 6.0]]);
        let inv = m.inverse().unwrap();
        let id = m.mul(&inv);
        assert!((id[(0, 0)] - 1.0f64).abs() < 1e-14 && id[(0, 1)].abs() < 1e-14);
        assert!((m.det() - 10.0).abs() < 1e-12);
        let sing = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(sing.inverse().is_none());
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        let m = Mat::from_rows(&[
            vec![2.0, 1.0, 0.0],
            vec![1.0, 2.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ]);
        let (vals, vecs) = symmetric_eigen(&m);
        let expect = [2.0 - 2f64.sqrt(), 2.0, 2.0 + 2f64.sqrt()];
        for (v, e) in vals.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12);
        }
        for j in 0..3 {
            let x = vecs.col(j);
            let mx = m.mul_vec(&x);
            for k in 0..3 {
                assert!((mx[k] - vals[j] * x[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gram_schmidt_is_orthonormal_and_signed() {
        let q = orthonormalize(&[vec![-1.0f32, 1.0, 0.0], vec![1.0, 1.0, 1.0]]).unwrap();
        assert!(q[0][0] > 0.0);
        assert!(dot(&q[0], &q[1]).abs() < 1e-6);
        assert!((norm(&q[1]) - 1.0).abs() < 1e-6);
        assert!(orthonormalize(&[vec![1.0, 0.0], vec![2.0, 0.0]]).is_err());
    }
}
