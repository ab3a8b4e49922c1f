//! The Brent system `B(m,n,p;r)`: residuals and the exact Jacobian.
//!
//! Equations are indexed by `(i1, i2, j1, j2, k1, k2)` ranked lexicographically
//! with ranges `m, n, n, p, p, m` and the last coordinate fastest. Variables are
//! laid out as all `u` entries (term-major, entries row-major), then all `v`,
//! then all `w`.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithm::{Algorithm, MatMulFormat, Role};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::sparse::SparseRationalMatrix;

/// Zero-based equation coordinates `(i1, i2, j1, j2, k1, k2)`.
pub type EquationTuple = [usize; 6];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variable {
    pub role: Role,
    pub term: usize,
    pub row: usize,
    pub col: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrentSystem {
    pub format: MatMulFormat,
    pub r: usize,
}

impl BrentSystem {
    pub fn new(format: MatMulFormat, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::Value("r must be positive".into()));
        }
        Ok(Self { format, r })
    }

    pub fn for_algorithm(q: &Algorithm) -> Self {
        Self {
            format: q.format(),
            r: q.len(),
        }
    }

    /// `(mnp)^2`
    pub fn equation_count(&self) -> usize {
        let MatMulFormat { m, n, p } = self.format;
        (m * n * p).pow(2)
    }

    /// `k = (mn + np + pm) r`
    pub fn variable_count(&self) -> usize {
        self.format.vars_per_term() * self.r
    }

    fn equation_ranges(&self) -> [usize; 6] {
        let MatMulFormat { m, n, p } = self.format;
        [m, n, n, p, p, m]
    }

    pub fn equation_index(&self, tuple: EquationTuple) -> usize {
        let ranges = self.equation_ranges();
        tuple.iter().zip(ranges).fold(0, |acc, (&x, range)| {
            debug_assert!(x < range);
            acc * range + x
        })
    }

    pub fn equation_tuple(&self, mut index: usize) -> EquationTuple {
        let ranges = self.equation_ranges();
        let mut tuple = [0; 6];
        for slot in (0..6).rev() {
            tuple[slot] = index % ranges[slot];
            index /= ranges[slot];
        }
        tuple
    }

    /// Right-hand side `δ(i2,j1) δ(j2,k1) δ(k2,i1)`.
    pub fn rhs(tuple: EquationTuple) -> bool {
        let [i1, i2, j1, j2, k1, k2] = tuple;
        i2 == j1 && j2 == k1 && k2 == i1
    }

    fn role_offset(&self, role: Role) -> usize {
        let f = self.format;
        match role {
            Role::U => 0,
            Role::V => f.factor_len(Role::U) * self.r,
            Role::W => (f.factor_len(Role::U) + f.factor_len(Role::V)) * self.r,
        }
    }

    pub fn variable_index(&self, var: Variable) -> usize {
        let (_, cols) = self.format.shape(var.role);
        let len = self.format.factor_len(var.role);
        self.role_offset(var.role) + var.term * len + var.row * cols + var.col
    }

    pub fn variable(&self, index: usize) -> Variable {
        assert!(index < self.variable_count(), "variable index out of range");
        let role = Role::ALL
            .into_iter()
            .rev()
            .find(|&r| index >= self.role_offset(r))
            .expect("offset of U is zero");
        let local = index - self.role_offset(role);
        let (_, cols) = self.format.shape(role);
        let len = self.format.factor_len(role);
        Variable {
            role,
            term: local / len,
            row: (local % len) / cols,
            col: local % cols,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualVector {
    #[serde(with = "rational::serde_str_vec")]
    pub values: Vec<Rational>,
}

impl ResidualVector {
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    pub fn nonzero_count(&self) -> usize {
        self.values.iter().filter(|v| !v.is_zero()).count()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn nonzeros(entries: &[Rational], cols: usize) -> Vec<(usize, usize, &Rational)> {
    entries
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(idx, x)| (idx / cols, idx % cols, x))
        .collect()
}

/// Left-minus-right of every Brent equation at `q`, exactly.
pub fn residual(q: &Algorithm) -> ResidualVector {
    let system = BrentSystem::for_algorithm(q);
    let MatMulFormat { m, n, p } = q.format();
    let mut values = vec![Rational::zero(); system.equation_count()];
    for term in q.terms() {
        let us = nonzeros(term.u.entries(), n);
        let vs = nonzeros(term.v.entries(), p);
        let ws = nonzeros(term.w.entries(), m);
        for &(i1, i2, a) in &us {
            for &(j1, j2, b) in &vs {
                let ab = a * b;
                for &(k1, k2, c) in &ws {
                    values[system.equation_index([i1, i2, j1, j2, k1, k2])] += &ab * c;
                }
            }
        }
    }
    for i in 0..m {
        for j in 0..n {
            for k in 0..p {
                values[system.equation_index([i, j, j, k, k, i])] -= Rational::one();
            }
        }
    }
    ResidualVector { values }
}

/// True iff every Brent equation holds exactly at `q`.
pub fn is_solution(q: &Algorithm) -> bool {
    residual(q).is_zero()
}

/// Exact Jacobian of the Brent system at `q`, one row per equation.
///
/// Row `(i1,i2,j1,j2,k1,k2)` has, for each term `l`, the entries
/// `v[j1,j2] w[k1,k2]` at `u_l[i1,i2]`, `u[i1,i2] w[k1,k2]` at `v_l[j1,j2]` and
/// `u[i1,i2] v[j1,j2]` at `w_l[k1,k2]`.
pub fn jacobian(q: &Algorithm) -> SparseRationalMatrix {
    let system = BrentSystem::for_algorithm(q);
    let rows: Vec<Vec<(usize, Rational)>> = (0..system.equation_count())
        .into_par_iter()
        .map(|e| {
            let [i1, i2, j1, j2, k1, k2] = system.equation_tuple(e);
            let mut entries = Vec::new();
            let coords = [(Role::U, i1, i2), (Role::V, j1, j2), (Role::W, k1, k2)];
            for (slot, &(role, row, col)) in coords.iter().enumerate() {
                for (l, term) in q.terms().iter().enumerate() {
                    let mut value = Rational::one();
                    for (other, &(orole, orow, ocol)) in coords.iter().enumerate() {
                        if other != slot {
                            value *= &term.factor(orole)[(orow, ocol)];
                        }
                    }
                    if !value.is_zero() {
                        let col_index = system.variable_index(Variable { role, term: l, row, col });
                        entries.push((col_index, value));
                    }
                }
            }
            entries
        })
        .collect();
    SparseRationalMatrix::from_sorted_rows(system.equation_count(), system.variable_count(), rows)
}
