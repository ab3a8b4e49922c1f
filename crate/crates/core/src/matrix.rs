//! Dense row-major matrices over [`Rational`].

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self {
            rows: nrows,
            cols: ncols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Convenience constructor for small integer literals; panics on ragged input.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| rational::int(x)).collect())
                .collect(),
        )
        .expect("ragged literal")
    }

    pub fn diagonal(entries: &[Rational]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    /// `e_{row,col}` of the given shape (0-based).
    pub fn unit(rows: usize, cols: usize, row: usize, col: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m[(row, col)] = Rational::one();
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch(format!(
                "adding {:?} and {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "multiplying {:?} by {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Columns selected in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, columns.len());
        for (dst, &src) in columns.iter().enumerate() {
            for i in 0..self.rows {
                out[(i, dst)] = self[(i, src)].clone();
            }
        }
        out
    }

    pub fn from_columns(columns: &[Vec<Rational>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch("columns of unequal length".into()));
        }
        let mut out = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                out[(i, j)] = x.clone();
            }
        }
        Ok(out)
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| rational::to_f64(&self[(i, j)]))
    }

    /// Row-major nested vectors of `num/den` strings.
    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(rational::format_rational).collect())
            .collect()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    /// Panics on non-conforming shapes; use [`Matrix::checked_mul`] otherwise.
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.checked_mul(rhs).expect("non-conforming matrix product")
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{:?}", self.to_string_rows())
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.to_string_rows().into_iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_string_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = Vec::<Vec<serde_json::Value>>::deserialize(d)?;
        let rows = raw
            .iter()
            .map(|r| {
                r.iter()
                    .map(rational::serde_str::from_json)
                    .collect::<std::result::Result<Vec<_>, _>>()
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        Matrix::from_rows(rows).map_err(D::Error::custom)
    }
}

/// Row-wise vectorization: entry `(i, j)` lands at coordinate `i * cols + j`.
pub fn vectorize_rowwise(x: &Matrix) -> Vec<Rational> {
    x.entries().to_vec()
}

/// Inverse of [`vectorize_rowwise`].
pub fn unvectorize_rowwise(v: &[Rational], rows: usize, cols: usize) -> Result<Matrix> {
    Matrix::from_vec(rows, cols, v.to_vec())
}

/// Kronecker product `(a_ij * b)` of two square matrices.
pub fn kron_product(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if !a.is_square() || !b.is_square() {
        return Err(Error::DimensionMismatch("kron_product expects square factors".into()));
    }
    let (m, n) = (a.rows(), b.rows());
    let mut out = Matrix::zeros(m * n, m * n);
    for i in 0..m {
        for j in 0..m {
            let aij = &a[(i, j)];
            if aij.is_zero() {
                continue;
            }
            for k in 0..n {
                for l in 0..n {
                    out[(i * n + k, j * n + l)] = aij * &b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// Gauss-Jordan inverse over the rationals.
pub fn invert_exact(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "cannot invert a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let mut work = a.clone();
    let mut inv = Matrix::identity(n);
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !work[(r, col)].is_zero())
            .ok_or(Error::SingularMatrix)?;
        if pivot != col {
            for j in 0..n {
                work.data.swap(pivot * n + j, col * n + j);
                inv.data.swap(pivot * n + j, col * n + j);
            }
        }
        let p = work[(col, col)].recip();
        for j in 0..n {
            work[(col, j)] *= &p;
            inv[(col, j)] *= &p;
        }
        for r in 0..n {
            if r == col || work[(r, col)].is_zero() {
                continue;
            }
            let f = work[(r, col)].clone();
            for j in 0..n {
                let w = &work[(col, j)] * &f;
                work[(r, j)] -= w;
                let v = &inv[(col, j)] * &f;
                inv[(r, j)] -= v;
            }
        }
    }
    Ok(inv)
}

/// True iff every row and every column holds exactly one nonzero entry.
pub fn is_generalized_permutation(a: &Matrix) -> bool {
    if !a.is_square() {
        return false;
    }
    let n = a.rows();
    let mut col_counts = vec![0usize; n];
    for i in 0..n {
        let mut row_count = 0;
        for (j, x) in a.row(i).iter().enumerate() {
            if !x.is_zero() {
                row_count += 1;
                col_counts[j] += 1;
            }
        }
        if row_count != 1 {
            return false;
        }
    }
    col_counts.iter().all(|&c| c == 1)
}
