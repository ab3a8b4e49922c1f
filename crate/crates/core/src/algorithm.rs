//! Decompositions of the matrix multiplication tensor.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// The triple `(m, n, p)` of `<m,n,p>`: an `m x n` times `n x p` product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MatMulFormat {
    pub m: usize,
    pub n: usize,
    pub p: usize,
}

impl MatMulFormat {
    pub fn new(m: usize, n: usize, p: usize) -> Result<Self> {
        if m == 0 || n == 0 || p == 0 {
            return Err(Error::Value(format!("format ({m},{n},{p}) has a zero dimension")));
        }
        Ok(Self { m, n, p })
    }

    /// Shape of the factor matrix for `role`: U is m x n, V is n x p, W is p x m.
    pub fn shape(&self, role: Role) -> (usize, usize) {
        match role {
            Role::U => (self.m, self.n),
            Role::V => (self.n, self.p),
            Role::W => (self.p, self.m),
        }
    }

    pub fn factor_len(&self, role: Role) -> usize {
        let (r, c) = self.shape(role);
        r * c
    }

    /// Variables per term: `mn + np + pm`.
    pub fn vars_per_term(&self) -> usize {
        self.m * self.n + self.n * self.p + self.p * self.m
    }
}

impl fmt::Display for MatMulFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{},{}>", self.m, self.n, self.p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    U,
    V,
    W,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::U, Role::V, Role::W];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::U => "U",
            Role::V => "V",
            Role::W => "W",
        };
        f.write_str(s)
    }
}

/// One decomposable term `u ⊗ v ⊗ w`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TriadTerm {
    pub u: Matrix,
    pub v: Matrix,
    pub w: Matrix,
}

impl TriadTerm {
    pub fn new(u: Matrix, v: Matrix, w: Matrix) -> Self {
        Self { u, v, w }
    }

    pub fn factor(&self, role: Role) -> &Matrix {
        match role {
            Role::U => &self.u,
            Role::V => &self.v,
            Role::W => &self.w,
        }
    }

    pub fn factor_mut(&mut self, role: Role) -> &mut Matrix {
        match role {
            Role::U => &mut self.u,
            Role::V => &mut self.v,
            Role::W => &mut self.w,
        }
    }

    fn check(&self, format: &MatMulFormat, index: usize) -> Result<()> {
        for role in Role::ALL {
            let want = format.shape(role);
            let got = self.factor(role).shape();
            if want != got {
                return Err(Error::Shape(format!(
                    "term {} factor {role} is {}x{}, expected {}x{} for {format}",
                    index + 1,
                    got.0,
                    got.1,
                    want.0,
                    want.1
                )));
            }
        }
        Ok(())
    }
}

/// An algorithm of length `r` for `<m,n,p>`, i.e. a point of the Brent variety
/// when its terms sum to the tensor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Algorithm {
    format: MatMulFormat,
    terms: Vec<TriadTerm>,
}

impl Algorithm {
    pub fn new(format: MatMulFormat, terms: Vec<TriadTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Value("an algorithm needs at least one term".into()));
        }
        for (i, t) in terms.iter().enumerate() {
            t.check(&format, i)?;
        }
        Ok(Self { format, terms })
    }

    /// `r` terms whose factors are all zero.
    pub fn zero(format: MatMulFormat, r: usize) -> Result<Self> {
        let term = TriadTerm::new(
            Matrix::zeros(format.m, format.n),
            Matrix::zeros(format.n, format.p),
            Matrix::zeros(format.p, format.m),
        );
        Self::new(format, vec![term; r])
    }

    pub fn format(&self) -> MatMulFormat {
        self.format
    }

    pub fn terms(&self) -> &[TriadTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn factors(&self, role: Role) -> impl Iterator<Item = &Matrix> + '_ {
        self.terms.iter().map(move |t| t.factor(role))
    }

    /// Replace term `index`; the new term must conform to the format.
    pub fn with_term(&self, index: usize, term: TriadTerm) -> Result<Self> {
        term.check(&self.format, index)?;
        let mut terms = self.terms.clone();
        terms[index] = term;
        Ok(Self {
            format: self.format,
            terms,
        })
    }

    pub fn into_terms(self) -> Vec<TriadTerm> {
        self.terms
    }

    /// Number of nonzero entries over all factors.
    pub fn support_size(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|t| Role::ALL.map(|r| t.factor(r).entries().iter().filter(|x| !x.is_zero()).count()))
            .sum()
    }
}

/// The `mnp` terms `e_ij ⊗ e_jk ⊗ e_ki`, in lexicographic `(i, j, k)` order.
pub fn natural_algorithm(format: MatMulFormat) -> Algorithm {
    let MatMulFormat { m, n, p } = format;
    let mut terms = Vec::with_capacity(m * n * p);
    for i in 0..m {
        for j in 0..n {
            for k in 0..p {
                terms.push(TriadTerm::new(
                    Matrix::unit(m, n, i, j),
                    Matrix::unit(n, p, j, k),
                    Matrix::unit(p, m, k, i),
                ));
            }
        }
    }
    Algorithm { format, terms }
}

/// Strassen's seven-product scheme for `<2,2,2>`.
///
/// `u` and `v` hold the coefficients of `A` and `B` in each product; `w` is the
/// transpose of the product's contribution to `C = AB`.
pub fn builtin_strassen() -> Algorithm {
    #[rustfmt::skip]
    const TERMS: [[[i64; 4]; 3]; 7] = [
        // (A11 + A22)(B11 + B22) -> C11, C22
        [[1, 0, 0, 1], [1, 0, 0, 1], [1, 0, 0, 1]],
        // (A21 + A22) B11 -> C21, -C22
        [[0, 0, 1, 1], [1, 0, 0, 0], [0, 1, 0, -1]],
        // A11 (B12 - B22) -> C12, C22
        [[1, 0, 0, 0], [0, 1, 0, -1], [0, 0, 1, 1]],
        // A22 (B21 - B11) -> C11, C21
        [[0, 0, 0, 1], [-1, 0, 1, 0], [1, 1, 0, 0]],
        // (A11 + A12) B22 -> -C11, C12
        [[1, 1, 0, 0], [0, 0, 0, 1], [-1, 0, 1, 0]],
        // (A21 - A11)(B11 + B12) -> C22
        [[-1, 0, 1, 0], [1, 1, 0, 0], [0, 0, 0, 1]],
        // (A12 - A22)(B21 + B22) -> C11
        [[0, 1, 0, -1], [0, 0, 1, 1], [1, 0, 0, 0]],
    ];
    let block = |e: &[i64; 4]| Matrix::from_i64(&[&e[0..2], &e[2..4]]);
    let terms = TERMS
        .iter()
        .map(|[u, v, w]| TriadTerm::new(block(u), block(v), block(w)))
        .collect();
    Algorithm {
        format: MatMulFormat { m: 2, n: 2, p: 2 },
        terms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn natural_smallest() {
        let a = natural_algorithm(MatMulFormat::new(1, 1, 1).unwrap());
        assert_eq!(a.len(), 1);
        assert_eq!(a.terms()[0].u, Matrix::identity(1));
        assert_eq!(a.terms()[0].v, Matrix::identity(1));
        assert_eq!(a.terms()[0].w, Matrix::identity(1));
    }

    #[test]
    fn natural_222_term_order() {
        let a = natural_algorithm(MatMulFormat::new(2, 2, 2).unwrap());
        assert_eq!(a.len(), 8);
        // (i,j,k) = (1,2,1) is index (0*2 + 1)*2 + 0 = 2
        let t = &a.terms()[2];
        assert_eq!(t.u, Matrix::unit(2, 2, 0, 1));
        assert_eq!(t.v, Matrix::unit(2, 2, 1, 0));
        assert_eq!(t.w, Matrix::unit(2, 2, 0, 0));
    }

    #[test]
    fn natural_333_single_nonzero_per_factor() {
        let a = natural_algorithm(MatMulFormat::new(3, 3, 3).unwrap());
        assert_eq!(a.len(), 27);
        for t in a.terms() {
            for role in Role::ALL {
                let nz: Vec<_> = t.factor(role).entries().iter().filter(|x| !x.is_zero()).collect();
                assert_eq!(nz.len(), 1);
                assert!(nz[0].is_one());
            }
        }
    }

    #[test]
    fn strassen_shape_and_entries() {
        let s = builtin_strassen();
        assert_eq!(s.len(), 7);
        assert_eq!(s.format(), MatMulFormat::new(2, 2, 2).unwrap());
        for t in s.terms() {
            for role in Role::ALL {
                for x in t.factor(role).entries() {
                    assert!(x.is_zero() || x.numer().magnitude().is_one() && x.denom().is_one());
                }
            }
        }
    }

    #[test]
    fn rejects_nonconforming_terms() {
        let f = MatMulFormat::new(2, 3, 4).unwrap();
        let bad = TriadTerm::new(Matrix::zeros(3, 2), Matrix::zeros(3, 4), Matrix::zeros(4, 2));
        assert!(matches!(Algorithm::new(f, vec![bad]), Err(Error::Shape(_))));
        assert!(Algorithm::new(f, vec![]).is_err());
        assert!(MatMulFormat::new(0, 1, 1).is_err());
    }
}
