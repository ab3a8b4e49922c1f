//! Triplet-form sparse matrices over [`Rational`].

use std::fmt::Write as _;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::{self, Rational};

/// Sparse matrix stored as `(row, col, value)` triplets sorted row-major,
/// with no explicit zeros and no duplicate positions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseRationalMatrix {
    rows: usize,
    cols: usize,
    triplets: Vec<Triplet>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triplet {
    pub row: usize,
    pub col: usize,
    #[serde(with = "rational::serde_str")]
    pub value: Rational,
}

impl SparseRationalMatrix {
    /// Builds from arbitrary triplets: sorts, sums duplicates and drops zeros.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Rational)>,
    ) -> Result<Self> {
        let mut raw: Vec<(usize, usize, Rational)> = triplets.into_iter().collect();
        if let Some(&(r, c, _)) = raw.iter().find(|(r, c, _)| *r >= rows || *c >= cols) {
            return Err(Error::DimensionMismatch(format!(
                "entry ({r},{c}) outside a {rows}x{cols} matrix"
            )));
        }
        raw.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<Triplet> = Vec::with_capacity(raw.len());
        for (row, col, value) in raw {
            match merged.last_mut() {
                Some(last) if last.row == row && last.col == col => last.value += value,
                _ => merged.push(Triplet { row, col, value }),
            }
        }
        merged.retain(|t| !t.value.is_zero());
        Ok(Self {
            rows,
            cols,
            triplets: merged,
        })
    }

    /// Rows given as already sorted `(col, value)` lists with nonzero values.
    pub(crate) fn from_sorted_rows(rows: usize, cols: usize, row_entries: Vec<Vec<(usize, Rational)>>) -> Self {
        debug_assert_eq!(row_entries.len(), rows);
        let triplets = row_entries
            .into_iter()
            .enumerate()
            .flat_map(|(row, entries)| {
                entries.into_iter().map(move |(col, value)| Triplet { row, col, value })
            })
            .collect::<Vec<_>>();
        debug_assert!(triplets.windows(2).all(|w| (w[0].row, w[0].col) < (w[1].row, w[1].col)));
        debug_assert!(triplets.iter().all(|t| !t.value.is_zero() && t.col < cols));
        Self { rows, cols, triplets }
    }

    pub fn from_dense(m: &Matrix) -> Self {
        let triplets = (0..m.rows())
            .flat_map(|i| (0..m.cols()).map(move |j| (i, j)))
            .filter(|&(i, j)| !m[(i, j)].is_zero())
            .map(|(row, col)| Triplet {
                row,
                col,
                value: m[(row, col)].clone(),
            })
            .collect();
        Self {
            rows: m.rows(),
            cols: m.cols(),
            triplets,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_dense(&Matrix::identity(n))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    pub fn triplets(&self) -> &[Triplet] {
        &self.triplets
    }

    pub fn get(&self, row: usize, col: usize) -> Rational {
        self.triplets
            .binary_search_by_key(&(row, col), |t| (t.row, t.col))
            .map(|i| self.triplets[i].value.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    /// Stored entry count per row.
    pub fn row_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.rows];
        for t in &self.triplets {
            counts[t.row] += 1;
        }
        counts
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for t in &self.triplets {
            m[(t.row, t.col)] = t.value.clone();
        }
        m
    }

    pub fn to_f64_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.rows, self.cols);
        for t in &self.triplets {
            m[(t.row, t.col)] = rational::to_f64(&t.value);
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let triplets = self.triplets.iter().map(|t| (t.col, t.row, t.value.clone()));
        Self::from_triplets(self.cols, self.rows, triplets).expect("indices stay in range")
    }

    /// Keeps the given columns, renumbered in the order listed.
    pub fn select_columns(&self, columns: &[usize]) -> Self {
        let mut new_index = vec![None; self.cols];
        for (dst, &src) in columns.iter().enumerate() {
            new_index[src] = Some(dst);
        }
        let triplets = self
            .triplets
            .iter()
            .filter_map(|t| new_index[t.col].map(|c| (t.row, c, t.value.clone())));
        Self::from_triplets(self.rows, columns.len(), triplets).expect("indices stay in range")
    }

    /// Coordinate text with 1-based indices and `num/den` entries.
    pub fn to_matrix_market(&self) -> String {
        let mut out = String::from("%%MatrixMarket matrix coordinate rational general\n");
        let _ = writeln!(out, "{} {} {}", self.rows, self.cols, self.nnz());
        for t in &self.triplets {
            let _ = writeln!(out, "{} {} {}/{}", t.row + 1, t.col + 1, t.value.numer(), t.value.denom());
        }
        out
    }

    pub fn from_matrix_market(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('%'));
        let parse_err = |line: usize, message: String| Error::Parse {
            line: line + 1,
            column: 1,
            message,
        };
        let (hl, header) = lines.next().ok_or_else(|| parse_err(0, "missing size line".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(hl, format!("bad size line: {e}")))?;
        let [rows, cols, nnz] = dims[..] else {
            return Err(parse_err(hl, "size line needs three integers".into()));
        };
        let mut triplets = Vec::with_capacity(nnz);
        for (ln, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [r, c, v] = fields[..] else {
                return Err(parse_err(ln, "expected `row col value`".into()));
            };
            let r: usize = r.parse().map_err(|e| parse_err(ln, format!("{e}")))?;
            let c: usize = c.parse().map_err(|e| parse_err(ln, format!("{e}")))?;
            if r == 0 || c == 0 {
                return Err(parse_err(ln, "indices are 1-based".into()));
            }
            triplets.push((r - 1, c - 1, rational::parse_rational(v)?));
        }
        if triplets.len() != nnz {
            return Err(Error::Shape(format!("declared {nnz} entries, found {}", triplets.len())));
        }
        Self::from_triplets(rows, cols, triplets)
    }
}
