//! Dense LU with partial pivoting on the coefficient space.
//!
//! Systems here are `(2K+1)²`, assembled from multiplication operators on
//! trigonometric polynomials.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    /// Builds the matrix from its columns.
    pub fn from_columns(columns: &[Vec<T>]) -> Self {
        let n = columns.len();
        let mut m = Self::zeros(n);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), n, "column {j} has wrong length");
            for (i, &v) in col.iter().enumerate() {
                m.data[i * n + j] = v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n).map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(&a, &b)| a * b).sum()).collect()
    }

    pub fn lu(mut self) -> Result<Lu<T>> {
        let n = self.n;
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let tiny = scale * T::epsilon() * T::from_usize_lossy(n.max(1));
        for col in 0..n {
            let (pivot_row, pivot) = (col..n)
                .map(|r| (r, self.data[r * n + col].abs()))
                .fold((col, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot > tiny) {
                return Err(Error::Singular { column: col, pivot: pivot.as_f64() });
            }
            if pivot_row != col {
                for j in 0..n {
                    self.data.swap(col * n + j, pivot_row * n + j);
                }
                perm.swap(col, pivot_row);
            }
            let (upper, lower) = self.data.split_at_mut((col + 1) * n);
            let pivot_row = &upper[col * n..];
            let diag = pivot_row[col];
            for row in lower.chunks_exact_mut(n) {
                let factor = row[col] / diag;
                row[col] = factor;
                if factor.is_zero() {
                    continue;
                }
                for (dst, &src) in row[col + 1..].iter_mut().zip(&pivot_row[col + 1..]) {
                    *dst = *dst - factor * src;
                }
            }
        }
        Ok(Lu { n, data: self.data, perm })
    }
}

/// Packed LU factors with the row permutation.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    n: usize,
    data: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let n = self.n;
        assert_eq!(rhs.len(), n);
        let mut x: Vec<T> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc = acc - self.data[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc = acc - self.data[i * n + j] * x[j];
            }
            x[i] = acc / self.data[i * n + i];
        }
        x
    }
}
