use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::{RankCertificate, RankResult};
use crate::rational;
use crate::sparse::SparseRationalMatrix;

/// Rows with denominators cleared row by row; scaling a row keeps the rank.
fn integer_rows(a: &SparseRationalMatrix) -> Vec<Vec<BigInt>> {
    let mut rows = vec![vec![BigInt::zero(); a.cols()]; a.rows()];
    let triplets = a.triplets();
    let mut start = 0;
    while start < triplets.len() {
        let row = triplets[start].row;
        let end = start + triplets[start..].iter().take_while(|t| t.row == row).count();
        let chunk = &triplets[start..end];
        let den = rational::common_denominator(chunk.iter().map(|t| &t.value));
        for t in chunk {
            rows[row][t.col] = (&t.value * &den).to_integer();
        }
        start = end;
    }
    rows
}

/// Fraction-free (Bareiss) row echelon reduction; returns the pivot columns.
///
/// After each step every remaining entry is a minor of the input, so the
/// division by the previous pivot is exact.
fn bareiss_pivots(mut rows: Vec<Vec<BigInt>>, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        // smallest nonzero pivot keeps intermediate products short
        let Some(pivot) = (r..rows.len())
            .filter(|&i| !rows[i][c].is_zero())
            .min_by_key(|&i| rows[i][c].magnitude().bits())
        else {
            continue;
        };
        rows.swap(r, pivot);
        let (head, rest) = rows.split_at_mut(r + 1);
        let pivot_row = &head[r];
        let p = &pivot_row[c];
        rest.par_iter_mut().for_each(|row| {
            let f = std::mem::take(&mut row[c]);
            for j in c + 1..cols {
                let mut x = p * &row[j];
                if !f.is_zero() && !pivot_row[j].is_zero() {
                    x -= &f * &pivot_row[j];
                }
                if !x.is_zero() {
                    debug_assert!(x.is_multiple_of(&prev));
                    x /= &prev;
                }
                row[j] = x;
            }
        });
        prev = p.clone();
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Exact rank over the rationals.
pub fn rank_exact(a: &SparseRationalMatrix) -> RankResult {
    let pivots = bareiss_pivots(integer_rows(a), a.cols());
    RankResult {
        rank: pivots.len(),
        rows: a.rows(),
        cols: a.cols(),
        certificate: RankCertificate::Exact {
            pivot_columns: pivots,
        },
    }
}

/// Greedy leftmost maximal independent column subset: a column is kept iff
/// it is not in the span of the columns before it.
pub fn column_basis(a: &SparseRationalMatrix) -> Vec<usize> {
    bareiss_pivots(integer_rows(a), a.cols())
}
