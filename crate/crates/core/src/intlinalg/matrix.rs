use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use super::LinalgError;

/// Dense integer matrix, row-major, with 64-bit entries.
///
/// Arithmetic is always checked. Algorithms that need headroom (HNF, SNF,
/// determinants) run on a 128-bit working copy and narrow on the way out.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<i64>,
}

impl IntMatrix {
    /// Builds a matrix from row-major entries.
    ///
    /// Panics if `entries.len() != rows * cols`.
    pub fn new(rows: usize, cols: usize, entries: Vec<i64>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count does not match shape");
        Self { rows, cols, entries }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn diagonal(d: &[i64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn scalar(n: usize, k: i64) -> Self {
        Self::diagonal(&vec![k; n])
    }

    /// Builds a matrix from a list of rows. All rows must have equal length.
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[Vec<i64>]) -> Self {
        let rows = cols.first().map_or(0, Vec::len);
        assert!(cols.iter().all(|c| c.len() == rows), "ragged columns");
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, &x) in c.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<i64>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Horizontal concatenation `(self | other)`.
    pub fn hstack(&self, other: &IntMatrix) -> Self {
        assert_eq!(self.rows, other.rows, "hstack needs equal row counts");
        let cols = self.cols + other.cols;
        let mut out = Self::zeros(self.rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
            for j in 0..other.cols {
                out[(i, self.cols + j)] = other[(i, j)];
            }
        }
        out
    }

    /// The first `count` rows.
    pub fn top_rows(&self, count: usize) -> Self {
        assert!(count <= self.rows);
        Self::new(count, self.cols, self.entries[..count * self.cols].to_vec())
    }

    /// Selects a subset of columns, in the given order.
    pub fn select_cols(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, cols.len());
        for (jj, &j) in cols.iter().enumerate() {
            for i in 0..self.rows {
                out[(i, jj)] = self[(i, j)];
            }
        }
        out
    }

    pub fn checked_mul(&self, rhs: &IntMatrix) -> Result<IntMatrix, LinalgError> {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc: i128 = 0;
                for k in 0..self.cols {
                    acc += i128::from(self[(i, k)]) * i128::from(rhs[(k, j)]);
                }
                out[(i, j)] = narrow(acc)?;
            }
        }
        Ok(out)
    }

    pub fn checked_mul_vec(&self, v: &[i64]) -> Result<Vec<i64>, LinalgError> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let acc: i128 = (0..self.cols)
                    .map(|k| i128::from(self[(i, k)]) * i128::from(v[k]))
                    .sum();
                narrow(acc)
            })
            .collect()
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<i64, LinalgError> {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Ok(1);
        }
        let mut a = WideMatrix::from(self);
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n {
            if a[(k, k)] == 0 {
                let Some(p) = (k + 1..n).find(|&i| a[(i, k)] != 0) else {
                    return Ok(0);
                };
                a.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = checked_sub(
                        checked_mul(a[(i, j)], a[(k, k)])?,
                        checked_mul(a[(i, k)], a[(k, j)])?,
                    )?;
                    a[(i, j)] = num / prev;
                }
                a[(i, k)] = 0;
            }
            prev = a[(k, k)];
        }
        narrow(sign * a[(n - 1, n - 1)])
    }

    pub fn is_unimodular(&self) -> bool {
        self.is_square() && matches!(self.determinant(), Ok(1) | Ok(-1))
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = i64;
    fn index(&self, (i, j): (usize, usize)) -> &i64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.entries[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

pub(crate) fn narrow(x: i128) -> Result<i64, LinalgError> {
    i64::try_from(x).map_err(|_| LinalgError::Overflow)
}

pub(crate) fn checked_mul(a: i128, b: i128) -> Result<i128, LinalgError> {
    a.checked_mul(b).ok_or(LinalgError::Overflow)
}

pub(crate) fn checked_sub(a: i128, b: i128) -> Result<i128, LinalgError> {
    a.checked_sub(b).ok_or(LinalgError::Overflow)
}

pub(crate) fn checked_add(a: i128, b: i128) -> Result<i128, LinalgError> {
    a.checked_add(b).ok_or(LinalgError::Overflow)
}

/// 128-bit working copy used inside the normal-form algorithms.
#[derive(Clone, Debug)]
pub(crate) struct WideMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<i128>,
}

impl WideMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        Self { rows: n, cols: n, data }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    pub fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            self[(i, j)] = -self[(i, j)];
        }
    }

    pub fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            self[(i, j)] = -self[(i, j)];
        }
    }

    /// `col[dst] -= q * col[src]`
    pub fn col_axpy(&mut self, dst: usize, src: usize, q: i128) -> Result<(), LinalgError> {
        if q == 0 {
            return Ok(());
        }
        for i in 0..self.rows {
            let v = checked_sub(self[(i, dst)], checked_mul(q, self[(i, src)])?)?;
            self[(i, dst)] = v;
        }
        Ok(())
    }

    /// `row[dst] -= q * row[src]`
    pub fn row_axpy(&mut self, dst: usize, src: usize, q: i128) -> Result<(), LinalgError> {
        if q == 0 {
            return Ok(());
        }
        for j in 0..self.cols {
            let v = checked_sub(self[(dst, j)], checked_mul(q, self[(src, j)])?)?;
            self[(dst, j)] = v;
        }
        Ok(())
    }

    pub fn to_int(&self) -> Result<IntMatrix, LinalgError> {
        let entries = self.data.iter().map(|&x| narrow(x)).collect::<Result<_, _>>()?;
        Ok(IntMatrix::new(self.rows, self.cols, entries))
    }
}

impl From<&IntMatrix> for WideMatrix {
    fn from(m: &IntMatrix) -> Self {
        Self {
            rows: m.rows,
            cols: m.cols,
            data: m.entries.iter().map(|&x| i128::from(x)).collect(),
        }
    }
}

impl Index<(usize, usize)> for WideMatrix {
    type Output = i128;
    fn index(&self, (i, j): (usize, usize)) -> &i128 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for WideMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i128 {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_small_cases() {
        assert_eq!(IntMatrix::identity(3).determinant().unwrap(), 1);
        let a = IntMatrix::from_rows(&[vec![2, 1], vec![0, 3]]);
        assert_eq!(a.determinant().unwrap(), 6);
        let b = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(b.determinant().unwrap(), -1);
        let c = IntMatrix::from_rows(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]);
        assert_eq!(c.determinant().unwrap(), 0);
        let d = IntMatrix::from_rows(&[vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]]);
        assert_eq!(d.determinant().unwrap(), 4);
    }

    #[test]
    fn checked_mul_reports_overflow() {
        let big = IntMatrix::diagonal(&[i64::MAX, 1]);
        let two = IntMatrix::scalar(2, 2);
        assert_eq!(big.checked_mul(&two), Err(LinalgError::Overflow));
    }

    #[test]
    fn from_cols_and_transpose_agree() {
        let a = IntMatrix::from_cols(&[vec![1, 2], vec![3, 4], vec![5, 6]]);
        assert_eq!(a.rows(), 2);
        assert_eq!(a.row(0), &[1, 3, 5]);
        assert_eq!(a.transpose(), IntMatrix::from_rows(&[vec![1, 2], vec![3, 4], vec![5, 6]]));
    }
}
