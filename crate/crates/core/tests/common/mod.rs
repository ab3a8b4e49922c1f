//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use brent_core::algorithm::{Algorithm, MatMulFormat, Role, TriadTerm};
use brent_core::matrix::Matrix;
use brent_core::rational::{frac, int, to_f64, Rational};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Variables in Jacobian column order: all u entries term by term, then v, then w.
pub fn flatten_f64(q: &Algorithm) -> Vec<f64> {
    let mut x = Vec::new();
    for role in Role::ALL {
        for t in q.terms() {
            x.extend(t.factor(role).entries().iter().map(to_f64));
        }
    }
    x
}

/// Residual of the Brent equations straight from the definition.
pub fn residual_f64(f: MatMulFormat, r: usize, x: &[f64]) -> Vec<f64> {
    let (m, n, p) = (f.m, f.n, f.p);
    let (su, sv, sw) = (m * n, n * p, p * m);
    let u = |l: usize, i: usize, j: usize| x[l * su + i * n + j];
    let v = |l: usize, i: usize, j: usize| x[r * su + l * sv + i * p + j];
    let w = |l: usize, i: usize, j: usize| x[r * (su + sv) + l * sw + i * m + j];
    let mut out = Vec::with_capacity(su * sv * sw);
    for i1 in 0..m {
        for i2 in 0..n {
            for j1 in 0..n {
                for j2 in 0..p {
                    for k1 in 0..p {
                        for k2 in 0..m {
                            let s: f64 = (0..r).map(|l| u(l, i1, i2) * v(l, j1, j2) * w(l, k1, k2)).sum();
                            let target = (i2 == j1 && j2 == k1 && k2 == i1) as u8 as f64;
                            out.push(s - target);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Central differences, column by column; row-major `equations x variables`.
pub fn finite_difference_jacobian(q: &Algorithm, h: f64) -> Vec<Vec<f64>> {
    let x0 = flatten_f64(q);
    let eqs = residual_f64(q.format(), q.len(), &x0).len();
    let mut jac = vec![vec![0.0; x0.len()]; eqs];
    for c in 0..x0.len() {
        let mut plus = x0.clone();
        let mut minus = x0.clone();
        plus[c] += h;
        minus[c] -= h;
        let fp = residual_f64(q.format(), q.len(), &plus);
        let fm = residual_f64(q.format(), q.len(), &minus);
        for e in 0..eqs {
            jac[e][c] = (fp[e] - fm[e]) / (2.0 * h);
        }
    }
    jac
}

pub fn random_rational(rng: &mut impl Rng) -> Rational {
    frac(rng.gen_range(-9..=9), rng.gen_range(1..=7))
}

pub fn random_algorithm(f: MatMulFormat, r: usize, rng: &mut impl Rng) -> Algorithm {
    let mut mat = |rows, cols| {
        Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| random_rational(rng)).collect()).unwrap()
    };
    let terms = (0..r)
        .map(|_| TriadTerm::new(mat(f.m, f.n), mat(f.n, f.p), mat(f.p, f.m)))
        .collect();
    Algorithm::new(f, terms).unwrap()
}

/// Determinant by the Leibniz expansion.
pub fn det_leibniz(cols: &[&Vec<Rational>]) -> Rational {
    let n = cols.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = Rational::zero();
    permute(&mut perm, 0, &mut |p| {
        let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
        let mut term = Rational::one();
        for (c, &row) in p.iter().enumerate() {
            term *= &cols[c][row];
            if term.is_zero() {
                return;
            }
        }
        if inversions % 2 == 1 {
            total -= term;
        } else {
            total += term;
        }
    });
    total
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = k_subsets(n - 1, k);
    for mut s in k_subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Tries every ordered choice of `rows * cols` vectorized factors for an
/// invertible basis matrix of the form `diag(U1, U2)` with `U1` of size `cols`.
pub fn weak_d_brute_force(factors: &[Vec<Rational>], rows: usize, cols: usize) -> bool {
    let side = rows * cols;
    for subset in k_subsets(factors.len(), side) {
        let mut order = subset.clone();
        let mut found = false;
        permute(&mut order, 0, &mut |ord| {
            if found {
                return;
            }
            let basis: Vec<&Vec<Rational>> = ord.iter().map(|&i| &factors[i]).collect();
            let block_diagonal = basis.iter().enumerate().all(|(c, col)| {
                col.iter()
                    .enumerate()
                    .all(|(row, x)| x.is_zero() || (row < cols) == (c < cols))
            });
            if block_diagonal && !det_leibniz(&basis).is_zero() {
                found = true;
            }
        });
        if found {
            return true;
        }
    }
    false
}

/// Rank at most one iff every 2x2 minor vanishes.
pub fn rank_at_most_one_by_minors(a: &Matrix) -> bool {
    let (rows, cols) = a.shape();
    for i in 0..rows {
        for k in i + 1..rows {
            for j in 0..cols {
                for l in j + 1..cols {
                    if &a[(i, j)] * &a[(k, l)] != &a[(i, l)] * &a[(k, j)] {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// The `m² x n²` rearrangement of a matrix of `m x m` blocks of size `n`, written out directly.
pub fn rearrange(a: &Matrix, m: usize, n: usize) -> Matrix {
    let mut rows = Vec::new();
    for bi in 0..m {
        for bj in 0..m {
            let mut row = Vec::new();
            for k in 0..n {
                for l in 0..n {
                    row.push(a[(bi * n + k, bj * n + l)].clone());
                }
            }
            rows.push(row);
        }
    }
    Matrix::from_rows(rows).unwrap()
}

/// `X · Y` with `X = [I; G]` and `Y = [I H]` up to row and column shuffles,
/// then random rational row scales. Both factors have full rank `rank`, and
/// their smallest singular values are at least one.
pub fn matrix_with_rank(rows: usize, cols: usize, rank: usize, rng: &mut impl Rng) -> Matrix {
    use rand::seq::SliceRandom;
    let mut row_order: Vec<usize> = (0..rows).collect();
    let mut col_order: Vec<usize> = (0..cols).collect();
    row_order.shuffle(rng);
    col_order.shuffle(rng);
    let mut x = Matrix::zeros(rows, rank);
    for (i, &ri) in row_order.iter().enumerate() {
        for d in 0..rank {
            x[(ri, d)] = if i < rank { int((i == d) as i64) } else { int(rng.gen_range(-2..=2)) };
        }
    }
    let mut y = Matrix::zeros(rank, cols);
    for (j, &cj) in col_order.iter().enumerate() {
        for d in 0..rank {
            y[(d, cj)] = if j < rank { int((j == d) as i64) } else { int(rng.gen_range(-2..=2)) };
        }
    }
    let mut a = if rank == 0 { Matrix::zeros(rows, cols) } else { &x * &y };
    for i in 0..rows {
        let s = frac(rng.gen_range(1..=5) * if rng.gen_bool(0.5) { 1 } else { -1 }, rng.gen_range(1..=4));
        for j in 0..cols {
            let v = &a[(i, j)] * &s;
            a[(i, j)] = v;
        }
    }
    a
}

/// Tiny factor families biased towards first-row-only and first-row-free factors.
pub fn tiny_factor_family(seed: u64, r: usize) -> Algorithm {
    let mut g = ChaCha8Rng::seed_from_u64(seed);
    let f = MatMulFormat::new(2, 2, 2).unwrap();
    let factor = |g: &mut ChaCha8Rng| {
        let shape = g.gen_range(0..5);
        let data = (0..4)
            .map(|i| {
                let allowed = match shape {
                    0 | 1 => i < 2,
                    2 | 3 => i >= 2,
                    _ => true,
                };
                if allowed && g.gen_bool(0.7) {
                    int(g.gen_range(-2..=2))
                } else {
                    int(0)
                }
            })
            .collect();
        Matrix::from_vec(2, 2, data).unwrap()
    };
    let terms = (0..r)
        .map(|_| TriadTerm::new(factor(&mut g), factor(&mut g), factor(&mut g)))
        .collect();
    Algorithm::new(f, terms).unwrap()
}
