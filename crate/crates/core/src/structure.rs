//! Basis matrices of factor families, Kronecker factorization, the D-property
//! and weak D-property checks, and the local-dimension bound report.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algorithm::{Algorithm, MatMulFormat, Role};
use crate::brent::BrentSystem;
use crate::error::{Error, Result};
use crate::matrix::{invert_exact, kron_product, vectorize_rowwise, Matrix};
use crate::rank::{column_basis, rank_exact, RankMethodKind, RankResult};
use crate::rational::Rational;
use crate::sparse::SparseRationalMatrix;

/// Square matrix whose columns are vectorized factors of one role.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisMatrix {
    pub role: Role,
    pub matrix: Matrix,
    /// Term index of each column.
    pub source_terms: Vec<usize>,
}

/// All vectorized factors of `role` as columns, in term order.
pub fn factor_columns(q: &Algorithm, role: Role) -> Matrix {
    let cols: Vec<Vec<Rational>> = q.factors(role).map(vectorize_rowwise).collect();
    Matrix::from_columns(&cols).expect("factors of one role share a shape")
}

fn rank_of_columns(cols: &[Vec<Rational>], len: usize) -> usize {
    if cols.is_empty() {
        return 0;
    }
    let m = Matrix::from_columns(cols).expect("uniform columns");
    debug_assert_eq!(m.rows(), len);
    rank_exact(&SparseRationalMatrix::from_dense(&m)).rank
}

/// Greedy leftmost basis of the role's factors, in term order.
pub fn basis_matrix(q: &Algorithm, role: Role) -> Result<BasisMatrix> {
    let all = factor_columns(q, role);
    let side = q.format().factor_len(role);
    let source_terms = column_basis(&SparseRationalMatrix::from_dense(&all));
    if source_terms.len() < side {
        return Err(Error::DeficientSpan(role));
    }
    Ok(BasisMatrix {
        role,
        matrix: all.select_columns(&source_terms),
        source_terms,
    })
}

/// The `m² x n²` rearrangement whose row `(i, j)` is block `(i, j)` of `a`
/// vectorized row-wise; `a = A ⊗ B` iff it has rank at most one.
pub fn kron_rearrangement(a: &Matrix, m: usize, n: usize) -> Result<Matrix> {
    if a.shape() != (m * n, m * n) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix does not split into {m}x{m} blocks of size {n}",
            a.rows(),
            a.cols()
        )));
    }
    let mut r = Matrix::zeros(m * m, n * n);
    for bi in 0..m {
        for bj in 0..m {
            for k in 0..n {
                for l in 0..n {
                    r[(bi * m + bj, k * n + l)] = a[(bi * n + k, bj * n + l)].clone();
                }
            }
        }
    }
    Ok(r)
}

/// Splits `a` (side `mn`) as `A ⊗ B` with `A` `m x m` and `B` `n x n`.
///
/// `B` is the first nonzero block of `a` as it stands, which fixes the scalar
/// freedom `(λA, λ⁻¹B)`. Returns `None` when no such factorization exists.
pub fn kron_factorize(a: &Matrix, m: usize, n: usize) -> Result<Option<(Matrix, Matrix)>> {
    let r = kron_rearrangement(a, m, n)?;
    let Some(lead) = (0..m * m).find(|&row| r.row(row).iter().any(|x| !x.is_zero())) else {
        return Ok(None);
    };
    let b = Matrix::from_vec(n, n, r.row(lead).to_vec())?;
    let pos = b.entries().iter().position(|x| !x.is_zero()).expect("lead block is nonzero");
    let pivot = b.entries()[pos].clone();
    let mut a_factor = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            a_factor[(i, j)] = &r[(i * m + j, pos)] / &pivot;
        }
    }
    if kron_product(&a_factor, &b)? == *a {
        Ok(Some((a_factor, b)))
    } else {
        Ok(None)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContainmentMode {
    Literal,
    UpToScalar,
}

/// Whether every unit matrix of the role's shape occurs among its factors.
pub fn unit_basis_containment(q: &Algorithm, role: Role, mode: ContainmentMode) -> bool {
    let (rows, cols) = q.format().shape(role);
    let mut found = vec![false; rows * cols];
    for x in q.factors(role) {
        let mut nz = x.entries().iter().enumerate().filter(|(_, v)| !v.is_zero());
        if let (Some((pos, v)), None) = (nz.next(), nz.next()) {
            if mode == ContainmentMode::UpToScalar || v.is_one() {
                found[pos] = true;
            }
        }
    }
    found.into_iter().all(|f| f)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DStatus {
    ProvenYes,
    ProvenNoForCanonicalBasis,
    Unknown,
}

/// `(a, b)` with `{e_ij} ⊆ {a x b⁻¹}` over the role's factors `x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DWitness {
    pub a: Matrix,
    pub b: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DPropertyVerdict {
    pub role: Role,
    pub status: DStatus,
    pub witness: Option<DWitness>,
    /// Which step of the procedure settled the verdict.
    pub reason: String,
    /// Rank of the Kronecker rearrangement for each basis ordering tried.
    pub rearrangement_ranks: Vec<usize>,
}

/// Checks `{e_ij} ⊆ {a x b⁻¹}` exactly.
pub fn verify_witness(q: &Algorithm, role: Role, witness: &DWitness) -> bool {
    let (rows, cols) = q.format().shape(role);
    if witness.a.shape() != (rows, rows) || witness.b.shape() != (cols, cols) {
        return false;
    }
    let Ok(b_inv) = invert_exact(&witness.b) else {
        return false;
    };
    if invert_exact(&witness.a).is_err() {
        return false;
    }
    let mut found = vec![false; rows * cols];
    for x in q.factors(role) {
        let y = &(&witness.a * x) * &b_inv;
        let mut nz = y.entries().iter().enumerate().filter(|(_, v)| !v.is_zero());
        if let (Some((pos, v)), None) = (nz.next(), nz.next()) {
            if v.is_one() {
                found[pos] = true;
            }
        }
    }
    found.into_iter().all(|f| f)
}

const DIAGONAL_SEARCH_LIMIT: usize = 4096;

/// Looks for diagonal `a = diag(x)`, `b = diag(y)` mapping scaled unit factors
/// `c e_ij` onto `e_ij`, which needs `c = y_j / x_i` for a choice of `c` per cell.
fn diagonal_witness(q: &Algorithm, role: Role) -> Option<DWitness> {
    let (rows, cols) = q.format().shape(role);
    let mut scalars: Vec<BTreeSet<Rational>> = vec![BTreeSet::new(); rows * cols];
    for x in q.factors(role) {
        let mut nz = x.entries().iter().enumerate().filter(|(_, v)| !v.is_zero());
        if let (Some((pos, v)), None) = (nz.next(), nz.next()) {
            scalars[pos].insert(v.clone());
        }
    }
    if scalars.iter().any(BTreeSet::is_empty) {
        return None;
    }
    let first_row: Vec<Vec<Rational>> = (0..cols).map(|j| scalars[j].iter().cloned().collect()).collect();
    let mut choice = vec![0usize; cols];
    for _ in 0..DIAGONAL_SEARCH_LIMIT {
        // x_0 = 1, so y_j is the scalar chosen for cell (0, j)
        let y: Vec<Rational> = (0..cols).map(|j| first_row[j][choice[j]].clone()).collect();
        let mut x = vec![Rational::one()];
        for i in 1..rows {
            let fits = scalars[i * cols].iter().map(|c| &y[0] / c).find(|xi| {
                (0..cols).all(|j| scalars[i * cols + j].contains(&(&y[j] / xi)))
            });
            match fits {
                Some(xi) => x.push(xi),
                None => break,
            }
        }
        if x.len() == rows {
            return Some(DWitness {
                a: Matrix::diagonal(&x),
                b: Matrix::diagonal(&y),
            });
        }
        // advance the mixed-radix counter over first-row choices
        let mut j = 0;
        loop {
            if j == cols {
                return None;
            }
            choice[j] += 1;
            if choice[j] < first_row[j].len() {
                break;
            }
            choice[j] = 0;
            j += 1;
        }
    }
    None
}

fn support_signature(x: &Matrix, by_rows: bool) -> Vec<bool> {
    let (rows, cols) = x.shape();
    if by_rows {
        (0..rows).map(|i| x.row(i).iter().any(|v| !v.is_zero())).collect()
    } else {
        (0..cols).map(|j| (0..rows).any(|i| !x[(i, j)].is_zero())).collect()
    }
}

/// Column orderings of the greedy basis tried for a Kronecker split: term
/// order, by row-support then column-support signature, by column-support
/// then row-support signature, and by leading vectorized coordinate.
fn basis_orderings(q: &Algorithm, role: Role, basis: &BasisMatrix) -> Vec<Vec<usize>> {
    let factor = |t: usize| q.terms()[t].factor(role);
    let term_order = basis.source_terms.clone();
    let mut by_rows = term_order.clone();
    by_rows.sort_by_key(|&t| {
        let f = factor(t);
        // reversed flags so that support in earlier rows sorts first
        let rs: Vec<bool> = support_signature(f, true).into_iter().map(|b| !b).collect();
        let cs: Vec<bool> = support_signature(f, false).into_iter().map(|b| !b).collect();
        (rs, cs, t)
    });
    let mut by_cols = term_order.clone();
    by_cols.sort_by_key(|&t| {
        let f = factor(t);
        let rs: Vec<bool> = support_signature(f, true).into_iter().map(|b| !b).collect();
        let cs: Vec<bool> = support_signature(f, false).into_iter().map(|b| !b).collect();
        (cs, rs, t)
    });
    let mut by_lead = term_order.clone();
    by_lead.sort_by_key(|&t| (factor(t).entries().iter().position(|v| !v.is_zero()), t));
    let mut out: Vec<Vec<usize>> = Vec::new();
    for ord in [term_order, by_rows, by_cols, by_lead] {
        if !out.contains(&ord) {
            out.push(ord);
        }
    }
    out
}

/// Sound three-state D-property decision for one factor family.
///
/// `ProvenYes` always carries a witness that has been verified exactly.
pub fn d_property_check(q: &Algorithm, role: Role) -> Result<DPropertyVerdict> {
    let basis = basis_matrix(q, role)?;
    let (rows, cols) = q.format().shape(role);
    let yes = |witness: DWitness, reason: &str, ranks: Vec<usize>| DPropertyVerdict {
        role,
        status: DStatus::ProvenYes,
        witness: Some(witness),
        reason: reason.to_string(),
        rearrangement_ranks: ranks,
    };

    if unit_basis_containment(q, role, ContainmentMode::Literal) {
        let w = DWitness {
            a: Matrix::identity(rows),
            b: Matrix::identity(cols),
        };
        debug_assert!(verify_witness(q, role, &w));
        return Ok(yes(w, "factors contain every unit matrix", Vec::new()));
    }
    if unit_basis_containment(q, role, ContainmentMode::UpToScalar) {
        if let Some(w) = diagonal_witness(q, role) {
            if verify_witness(q, role, &w) {
                return Ok(yes(w, "scaled unit matrices normalized by a diagonal witness", Vec::new()));
            }
        }
    }

    let mut ranks = Vec::new();
    let mut factorable_but_unverified = false;
    for (attempt, order) in basis_orderings(q, role, &basis).into_iter().enumerate() {
        let cols_m: Vec<Vec<Rational>> = order
            .iter()
            .map(|&t| vectorize_rowwise(q.terms()[t].factor(role)))
            .collect();
        let u = Matrix::from_columns(&cols_m)?;
        let rearranged = kron_rearrangement(&u, rows, cols)?;
        ranks.push(rank_exact(&SparseRationalMatrix::from_dense(&rearranged)).rank);
        if let Some((um, un)) = kron_factorize(&u, rows, cols)? {
            let w = DWitness {
                a: invert_exact(&um)?,
                b: un.transpose(),
            };
            if verify_witness(q, role, &w) {
                let reason = format!("basis splits as a Kronecker product (ordering {attempt})");
                return Ok(yes(w, &reason, ranks));
            }
            factorable_but_unverified = true;
        }
    }
    let (status, reason) = if factorable_but_unverified || ranks.iter().any(|&r| r <= 1) {
        (DStatus::Unknown, "a Kronecker split was found but its witness failed")
    } else {
        (
            DStatus::ProvenNoForCanonicalBasis,
            "rearrangement rank exceeds one for every basis ordering tried",
        )
    };
    Ok(DPropertyVerdict {
        role,
        status,
        witness: None,
        reason: reason.to_string(),
        rearrangement_ranks: ranks,
    })
}

/// Algorithm-level status: two of three roles decide.
pub fn aggregate_d_status(roles: &[DStatus]) -> DStatus {
    let count = |s: DStatus| roles.iter().filter(|&&r| r == s).count();
    if count(DStatus::ProvenYes) >= 2 {
        DStatus::ProvenYes
    } else if count(DStatus::ProvenNoForCanonicalBasis) >= 2 {
        DStatus::ProvenNoForCanonicalBasis
    } else {
        DStatus::Unknown
    }
}

/// Weak D-property of one factor family.
///
/// With `S1` the factors supported in their first row only and `S2` those whose
/// first row vanishes, a block-diagonal basis exists iff `S1` spans the
/// first-row coordinates and `S2` spans the rest.
pub fn weak_d_check(q: &Algorithm, role: Role) -> bool {
    let (rows, cols) = q.format().shape(role);
    let side = rows * cols;
    let mut first_row_only = Vec::new();
    let mut first_row_zero = Vec::new();
    for x in q.factors(role) {
        let v = vectorize_rowwise(x);
        let head_zero = v[..cols].iter().all(Zero::is_zero);
        let tail_zero = v[cols..].iter().all(Zero::is_zero);
        if tail_zero {
            first_row_only.push(v.clone());
        }
        if head_zero {
            first_row_zero.push(v);
        }
    }
    rank_of_columns(&first_row_only, side) == cols && rank_of_columns(&first_row_zero, side) == side - cols
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertySummary {
    /// One entry per role; `None` when the role's factors do not span.
    pub d_roles: Vec<Option<DPropertyVerdict>>,
    pub d_property: DStatus,
    pub weak_d_roles: [bool; 3],
    pub weak_d: bool,
    pub unit_containment: [bool; 3],
}

pub fn analyze_properties(q: &Algorithm) -> PropertySummary {
    let d_roles: Vec<Option<DPropertyVerdict>> =
        Role::ALL.iter().map(|&r| d_property_check(q, r).ok()).collect();
    let statuses: Vec<DStatus> = d_roles
        .iter()
        .map(|v| v.as_ref().map_or(DStatus::Unknown, |v| v.status))
        .collect();
    let weak_d_roles = Role::ALL.map(|r| weak_d_check(q, r));
    PropertySummary {
        d_property: aggregate_d_status(&statuses),
        d_roles,
        weak_d: weak_d_roles.iter().all(|&b| b),
        weak_d_roles,
        unit_containment: Role::ALL.map(|r| unit_basis_containment(q, r, ContainmentMode::Literal)),
    }
}

/// `m² + n² + p² - m - n - p - 3`
pub fn lower_bound(format: MatMulFormat) -> i64 {
    let MatMulFormat { m, n, p } = format;
    let (m, n, p) = (m as i64, n as i64, p as i64);
    m * m + n * n + p * p - m - n - p - 3
}

/// `l + 2r`
pub fn lower_bound_prime(format: MatMulFormat, r: usize) -> i64 {
    lower_bound(format) + 2 * r as i64
}

/// `m² + n² + p² + 2r - 3`, valid when the stabilizer is finite.
pub fn lower_bound_dprime(format: MatMulFormat, r: usize) -> i64 {
    let MatMulFormat { m, n, p } = format;
    (m * m + n * n + p * p + 2 * r) as i64 - 3
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundFlags {
    pub d_property: DStatus,
    pub weak_d: bool,
    /// `l` (and `l′`) hold when the D or weak D-property is established.
    pub lower_bound_valid: bool,
    /// `l″` additionally needs a finite stabilizer, which is never decided here.
    pub l_dprime_conditional: bool,
    /// `u < l″`: the finite-stabilizer premise cannot hold for this point, or
    /// the rank is wrong. Flagged for manual review.
    pub anomaly: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub format: MatMulFormat,
    pub r: usize,
    pub k: usize,
    pub rank: usize,
    pub rank_method: RankMethodKind,
    pub u: i64,
    pub l: i64,
    pub l_prime: i64,
    pub l_dprime: i64,
    pub g: i64,
    pub g_prime: i64,
    pub g_dprime: i64,
    pub flags: BoundFlags,
}

/// Upper bound `u = k - rank`, the three lower bounds and their gaps.
pub fn bound_report(q: &Algorithm, rank: &RankResult) -> BoundReport {
    bound_report_with(q, rank, &analyze_properties(q))
}

pub fn bound_report_with(q: &Algorithm, rank: &RankResult, props: &PropertySummary) -> BoundReport {
    let format = q.format();
    let r = q.len();
    let k = BrentSystem::for_algorithm(q).variable_count();
    let u = k as i64 - rank.rank as i64;
    let l = lower_bound(format);
    let l_prime = lower_bound_prime(format, r);
    let l_dprime = lower_bound_dprime(format, r);
    BoundReport {
        format,
        r,
        k,
        rank: rank.rank,
        rank_method: rank.method(),
        u,
        l,
        l_prime,
        l_dprime,
        g: u - l,
        g_prime: u - l_prime,
        g_dprime: u - l_dprime,
        flags: BoundFlags {
            d_property: props.d_property,
            weak_d: props.weak_d,
            lower_bound_valid: props.d_property == DStatus::ProvenYes || props.weak_d,
            l_dprime_conditional: true,
            anomaly: u < l_dprime,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::{builtin_strassen, natural_algorithm, TriadTerm};
    use crate::brent::jacobian;
    use crate::rank::{rank_exact, RankCertificate};
    use crate::rational::int;

    fn fmt(m: usize, n: usize, p: usize) -> MatMulFormat {
        MatMulFormat::new(m, n, p).unwrap()
    }

    fn with_u_factors(us: Vec<Matrix>) -> Algorithm {
        let (m, n) = us[0].shape();
        let f = fmt(m, n, 1);
        let terms = us
            .into_iter()
            .map(|u| TriadTerm::new(u, Matrix::identity(n).select_columns(&[0]), Matrix::zeros(1, m)))
            .collect();
        Algorithm::new(f, terms).unwrap()
    }

    #[test]
    fn natural_basis_is_identity() {
        let q = natural_algorithm(fmt(2, 2, 2));
        let b = basis_matrix(&q, Role::U).unwrap();
        assert_eq!(b.matrix, Matrix::identity(4));
        assert_eq!(b.source_terms, vec![0, 2, 4, 6]);
        for (m, n, p) in [(2, 3, 4), (3, 1, 2)] {
            let q = natural_algorithm(fmt(m, n, p));
            for role in Role::ALL {
                assert!(crate::matrix::is_generalized_permutation(&basis_matrix(&q, role).unwrap().matrix));
            }
        }
    }

    #[test]
    fn deficient_span() {
        let q = with_u_factors(vec![
            Matrix::from_i64(&[&[1, 0], &[0, 0]]),
            Matrix::from_i64(&[&[1, 1], &[0, 0]]),
            Matrix::from_i64(&[&[0, 3], &[0, 0]]),
        ]);
        assert!(matches!(basis_matrix(&q, Role::U), Err(Error::DeficientSpan(Role::U))));
        assert!(matches!(d_property_check(&q, Role::U), Err(Error::DeficientSpan(Role::U))));
    }

    #[test]
    fn kron_factorize_examples() {
        let (a, b) = kron_factorize(&Matrix::identity(6), 2, 3).unwrap().unwrap();
        assert_eq!((a, b), (Matrix::identity(2), Matrix::identity(3)));

        let a = Matrix::from_i64(&[&[2, 1, 0], &[0, 1, -1], &[1, 0, 3]]);
        let b = Matrix::from_i64(&[&[0, 5], &[-2, 1]]);
        let k = kron_product(&a, &b).unwrap();
        let (a2, b2) = kron_factorize(&k, 3, 2).unwrap().unwrap();
        assert_eq!(kron_product(&a2, &b2).unwrap(), k);
        // B is the first nonzero block, here 2·b
        assert_eq!(b2, b.scale(&int(2)));

        let cycle = Matrix::from_i64(&[&[0, 0, 0, 1], &[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0]]);
        assert_eq!(kron_factorize(&cycle, 2, 2).unwrap(), None);
        assert_eq!(kron_factorize(&Matrix::zeros(4, 4), 2, 2).unwrap(), None);
        assert!(kron_factorize(&Matrix::identity(5), 2, 2).is_err());
    }

    #[test]
    fn containment_modes() {
        let q = natural_algorithm(fmt(3, 3, 3));
        assert!(unit_basis_containment(&q, Role::U, ContainmentMode::Literal));
        assert!(!unit_basis_containment(&builtin_strassen(), Role::U, ContainmentMode::Literal));
        let scaled = with_u_factors(vec![
            Matrix::from_i64(&[&[2, 0], &[0, 0]]),
            Matrix::unit(2, 2, 0, 1),
            Matrix::unit(2, 2, 1, 0),
            Matrix::unit(2, 2, 1, 1),
        ]);
        assert!(!unit_basis_containment(&scaled, Role::U, ContainmentMode::Literal));
        assert!(unit_basis_containment(&scaled, Role::U, ContainmentMode::UpToScalar));
    }

    #[test]
    fn natural_has_d_property() {
        for (m, n, p) in [(2, 2, 2), (1, 2, 3), (3, 3, 2)] {
            let q = natural_algorithm(fmt(m, n, p));
            let props = analyze_properties(&q);
            assert_eq!(props.d_property, DStatus::ProvenYes);
            for v in props.d_roles.iter().flatten() {
                assert!(verify_witness(&q, v.role, v.witness.as_ref().unwrap()));
            }
        }
    }

    #[test]
    fn diagonal_witness_needs_rank_one_scalars() {
        // scalars [[2,1],[1,1]]: no diagonal a, b normalizes all four
        let bad = with_u_factors(vec![
            Matrix::from_i64(&[&[2, 0], &[0, 0]]),
            Matrix::unit(2, 2, 0, 1),
            Matrix::unit(2, 2, 1, 0),
            Matrix::unit(2, 2, 1, 1),
        ]);
        let v = d_property_check(&bad, Role::U).unwrap();
        assert_ne!(v.status, DStatus::ProvenYes);
        // scalars [[2,6],[1,3]] are rank one
        let good = with_u_factors(vec![
            Matrix::from_i64(&[&[2, 0], &[0, 0]]),
            Matrix::from_i64(&[&[0, 6], &[0, 0]]),
            Matrix::from_i64(&[&[0, 0], &[1, 0]]),
            Matrix::from_i64(&[&[0, 0], &[0, 3]]),
        ]);
        let v = d_property_check(&good, Role::U).unwrap();
        assert_eq!(v.status, DStatus::ProvenYes);
        assert!(verify_witness(&good, Role::U, v.witness.as_ref().unwrap()));
    }

    #[test]
    fn kronecker_basis_gives_witness() {
        // factors R^{-1}(columns of A ⊗ B) for invertible A, B
        let a = Matrix::from_i64(&[&[1, 2], &[0, 1]]);
        let b = Matrix::from_i64(&[&[1, 0], &[1, 1]]);
        let k = kron_product(&a, &b).unwrap();
        let us = (0..4)
            .map(|j| Matrix::from_vec(2, 2, k.column(j)).unwrap())
            .collect();
        let q = with_u_factors(us);
        let v = d_property_check(&q, Role::U).unwrap();
        assert_eq!(v.status, DStatus::ProvenYes);
        assert!(verify_witness(&q, Role::U, v.witness.as_ref().unwrap()));
    }

    #[test]
    fn rank_two_factor_blocks_d_property() {
        // e11 + e22 has rank two, so no a·x·b⁻¹ maps it to a unit matrix
        let q = with_u_factors(vec![
            Matrix::from_i64(&[&[1, 0], &[0, 1]]),
            Matrix::unit(2, 2, 0, 1),
            Matrix::unit(2, 2, 1, 0),
            Matrix::unit(2, 2, 1, 1),
        ]);
        let v = d_property_check(&q, Role::U).unwrap();
        assert_eq!(v.status, DStatus::ProvenNoForCanonicalBasis);
        assert!(v.witness.is_none());
        assert!(v.rearrangement_ranks.iter().all(|&r| r > 1));
    }

    #[test]
    fn weak_d_examples() {
        for (m, n, p) in [(2, 2, 2), (2, 3, 4), (3, 3, 3)] {
            let q = natural_algorithm(fmt(m, n, p));
            assert!(Role::ALL.iter().all(|&r| weak_d_check(&q, r)));
        }
        let s = builtin_strassen();
        // e11 and e11+e12 cover the first row, e22 and e21+e22 the second
        assert!(Role::ALL.iter().all(|&r| weak_d_check(&s, r)));
        let q = with_u_factors(vec![
            Matrix::from_i64(&[&[1, 0], &[0, 1]]),
            Matrix::unit(2, 2, 0, 1),
            Matrix::unit(2, 2, 1, 0),
            Matrix::unit(2, 2, 1, 1),
        ]);
        assert!(!weak_d_check(&q, Role::U));
    }

    #[test]
    fn strassen_bounds() {
        let s = builtin_strassen();
        let rank = rank_exact(&jacobian(&s));
        let rep = bound_report(&s, &rank);
        assert_eq!((rep.k, rep.rank, rep.u), (84, 61, 23));
        assert_eq!((rep.l, rep.l_prime, rep.l_dprime), (3, 17, 23));
        assert_eq!((rep.g, rep.g_prime, rep.g_dprime), (20, 6, 0));
        assert!(!rep.flags.anomaly);
    }

    #[test]
    fn bound_formulas_333() {
        let f = fmt(3, 3, 3);
        assert_eq!(lower_bound(f), 15);
        assert_eq!(lower_bound_prime(f, 23), 61);
        assert_eq!(lower_bound_dprime(f, 23), 70);
        // smallest rank observed over the 3x3 corpus
        let q = Algorithm::zero(f, 23).unwrap();
        let rank = RankResult {
            rank: 526,
            rows: 729,
            cols: 621,
            certificate: RankCertificate::Exact { pivot_columns: vec![] },
        };
        let rep = bound_report(&q, &rank);
        assert_eq!((rep.k, rep.u, rep.l_dprime), (621, 95, 70));
        assert!(!rep.flags.lower_bound_valid);
    }

    proptest::proptest! {
        #[test]
        fn bound_ordering(m in 1usize..=6, n in 1usize..=6, p in 1usize..=6, r in 1usize..=400, rank in 0usize..=4000) {
            let f = fmt(m, n, p);
            let (l, l1, l2) = (lower_bound(f), lower_bound_prime(f, r), lower_bound_dprime(f, r));
            proptest::prop_assert!(l <= l1 && l1 <= l2);
            let k = BrentSystem::new(f, r).unwrap().variable_count();
            let rank = rank.min(k);
            let u = k as i64 - rank as i64;
            proptest::prop_assert!(u - l >= u - l1 && u - l1 >= u - l2);
        }
    }
}
