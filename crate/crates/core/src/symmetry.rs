//! Isotropy-group elements acting on algorithms.
//!
//! A [`GroupElement`] is one of: a sandwich `T(a,b,c)` sending each term to
//! `(a u b⁻¹, b v c⁻¹, c w a⁻¹)`; a per-term rescaling `(λ u, μ v, (λμ)⁻¹ w)`;
//! a permutation of the terms; or a triad symmetry that permutes the three
//! factor roles and changes the format accordingly.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithm::{Algorithm, MatMulFormat, TriadTerm};
use crate::brent::{is_solution, jacobian};
use crate::error::{Error, Result};
use crate::matrix::{invert_exact, is_generalized_permutation, Matrix};
use crate::rank::{compute_rank, RankMethod};
use crate::rational::{self, frac, int, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalePair {
    #[serde(with = "rational::serde_str")]
    pub lambda: Rational,
    #[serde(with = "rational::serde_str")]
    pub mu: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupElement {
    Sandwich {
        a: Matrix,
        b: Matrix,
        c: Matrix,
    },
    TermScale {
        scales: Vec<ScalePair>,
    },
    /// Term `i` moves to position `sigma[i]` (0-based).
    TermPermutation {
        sigma: Vec<usize>,
    },
    /// `transpose` (if set) is applied first, then `rotations` cyclic shifts.
    TriadSymmetry {
        rotations: u8,
        transpose: bool,
    },
}

impl GroupElement {
    /// Checks that the sandwich matrices are square and invertible.
    pub fn sandwich(a: Matrix, b: Matrix, c: Matrix) -> Result<Self> {
        for x in [&a, &b, &c] {
            invert_exact(x)?;
        }
        Ok(Self::Sandwich { a, b, c })
    }

    pub fn term_scale(pairs: Vec<(Rational, Rational)>) -> Result<Self> {
        if pairs.iter().any(|(l, m)| l.is_zero() || m.is_zero()) {
            return Err(Error::Value("term scale factors must be nonzero".into()));
        }
        Ok(Self::TermScale {
            scales: pairs.into_iter().map(|(lambda, mu)| ScalePair { lambda, mu }).collect(),
        })
    }

    pub fn term_permutation(sigma: Vec<usize>) -> Result<Self> {
        check_permutation(&sigma)?;
        Ok(Self::TermPermutation { sigma })
    }

    /// `(u, v, w) -> (v, w, u)`, format `(m,n,p) -> (n,p,m)`.
    pub fn cyclic() -> Self {
        Self::TriadSymmetry {
            rotations: 1,
            transpose: false,
        }
    }

    /// `(u, v, w) -> (vᵀ, uᵀ, wᵀ)`, format `(m,n,p) -> (p,n,m)`.
    pub fn transpose() -> Self {
        Self::TriadSymmetry {
            rotations: 0,
            transpose: true,
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Self::Sandwich { .. } => "sandwich",
            Self::TermScale { .. } => "term_scale",
            Self::TermPermutation { .. } => "term_permutation",
            Self::TriadSymmetry { .. } => "triad_symmetry",
        }
    }
}

fn check_permutation(sigma: &[usize]) -> Result<()> {
    let mut seen = vec![false; sigma.len()];
    for &s in sigma {
        if s >= sigma.len() || std::mem::replace(&mut seen[s], true) {
            return Err(Error::Value(format!("{sigma:?} is not a permutation")));
        }
    }
    Ok(())
}

fn expect_square(x: &Matrix, size: usize, name: &str) -> Result<()> {
    if x.shape() != (size, size) {
        return Err(Error::DimensionMismatch(format!(
            "sandwich factor {name} is {}x{}, expected {size}x{size}",
            x.rows(),
            x.cols()
        )));
    }
    Ok(())
}

fn cyclic_once(format: MatMulFormat, terms: Vec<TriadTerm>) -> (MatMulFormat, Vec<TriadTerm>) {
    let format = MatMulFormat {
        m: format.n,
        n: format.p,
        p: format.m,
    };
    let terms = terms.into_iter().map(|t| TriadTerm::new(t.v, t.w, t.u)).collect();
    (format, terms)
}

fn transpose_once(format: MatMulFormat, terms: Vec<TriadTerm>) -> (MatMulFormat, Vec<TriadTerm>) {
    let format = MatMulFormat {
        m: format.p,
        n: format.n,
        p: format.m,
    };
    let terms = terms
        .into_iter()
        .map(|t| TriadTerm::new(t.v.transpose(), t.u.transpose(), t.w.transpose()))
        .collect();
    (format, terms)
}

/// Applies `g` to every term of `q`.
pub fn apply_element(g: &GroupElement, q: &Algorithm) -> Result<Algorithm> {
    let format = q.format();
    let r = q.len();
    match g {
        GroupElement::Sandwich { a, b, c } => {
            expect_square(a, format.m, "a")?;
            expect_square(b, format.n, "b")?;
            expect_square(c, format.p, "c")?;
            let (ai, bi, ci) = (invert_exact(a)?, invert_exact(b)?, invert_exact(c)?);
            let terms = q
                .terms()
                .iter()
                .map(|t| TriadTerm::new(&(a * &t.u) * &bi, &(b * &t.v) * &ci, &(c * &t.w) * &ai))
                .collect();
            Algorithm::new(format, terms)
        }
        GroupElement::TermScale { scales } => {
            if scales.len() != r {
                return Err(Error::DimensionMismatch(format!(
                    "{} scale pairs for {r} terms",
                    scales.len()
                )));
            }
            let terms = q
                .terms()
                .iter()
                .zip(scales)
                .map(|(t, s)| {
                    if s.lambda.is_zero() || s.mu.is_zero() {
                        return Err(Error::Value("term scale factors must be nonzero".into()));
                    }
                    let inv = (&s.lambda * &s.mu).recip();
                    Ok(TriadTerm::new(t.u.scale(&s.lambda), t.v.scale(&s.mu), t.w.scale(&inv)))
                })
                .collect::<Result<Vec<_>>>()?;
            Algorithm::new(format, terms)
        }
        GroupElement::TermPermutation { sigma } => {
            if sigma.len() != r {
                return Err(Error::DimensionMismatch(format!(
                    "permutation of {} for {r} terms",
                    sigma.len()
                )));
            }
            check_permutation(sigma)?;
            let mut terms: Vec<Option<TriadTerm>> = vec![None; r];
            for (i, t) in q.terms().iter().enumerate() {
                terms[sigma[i]] = Some(t.clone());
            }
            Algorithm::new(format, terms.into_iter().map(Option::unwrap).collect())
        }
        GroupElement::TriadSymmetry { rotations, transpose } => {
            let (mut format, mut terms) = (format, q.terms().to_vec());
            if *transpose {
                (format, terms) = transpose_once(format, terms);
            }
            for _ in 0..rotations % 3 {
                (format, terms) = cyclic_once(format, terms);
            }
            Algorithm::new(format, terms)
        }
    }
}

/// `compose(g, h)` acts as `g` after `h`. Only elements of the same variant compose.
pub fn compose(g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
    use GroupElement::*;
    match (g, h) {
        (Sandwich { a, b, c }, Sandwich { a: a2, b: b2, c: c2 }) => Ok(Sandwich {
            a: a.checked_mul(a2)?,
            b: b.checked_mul(b2)?,
            c: c.checked_mul(c2)?,
        }),
        (TermScale { scales: s1 }, TermScale { scales: s2 }) => {
            if s1.len() != s2.len() {
                return Err(Error::DimensionMismatch("term scales of different lengths".into()));
            }
            let scales = s1
                .iter()
                .zip(s2)
                .map(|(x, y)| ScalePair {
                    lambda: &x.lambda * &y.lambda,
                    mu: &x.mu * &y.mu,
                })
                .collect();
            Ok(TermScale { scales })
        }
        (TermPermutation { sigma: s1 }, TermPermutation { sigma: s2 }) => {
            if s1.len() != s2.len() {
                return Err(Error::DimensionMismatch("permutations of different lengths".into()));
            }
            Ok(TermPermutation {
                sigma: s2.iter().map(|&i| s1[i]).collect(),
            })
        }
        (
            TriadSymmetry { rotations: r1, transpose: t1 },
            TriadSymmetry { rotations: r2, transpose: t2 },
        ) => {
            // transpose conjugates the cyclic shift to its inverse
            let r2 = if *t1 { (3 - r2 % 3) % 3 } else { r2 % 3 };
            Ok(TriadSymmetry {
                rotations: (r1 % 3 + r2) % 3,
                transpose: t1 ^ t2,
            })
        }
        _ => Err(Error::VariantMismatch(g.variant_name(), h.variant_name())),
    }
}

pub fn invert(g: &GroupElement) -> Result<GroupElement> {
    use GroupElement::*;
    Ok(match g {
        Sandwich { a, b, c } => Sandwich {
            a: invert_exact(a)?,
            b: invert_exact(b)?,
            c: invert_exact(c)?,
        },
        TermScale { scales } => {
            if scales.iter().any(|s| s.lambda.is_zero() || s.mu.is_zero()) {
                return Err(Error::Value("term scale factors must be nonzero".into()));
            }
            TermScale {
                scales: scales
                    .iter()
                    .map(|s| ScalePair {
                        lambda: s.lambda.recip(),
                        mu: s.mu.recip(),
                    })
                    .collect(),
            }
        }
        TermPermutation { sigma } => {
            check_permutation(sigma)?;
            let mut inv = vec![0; sigma.len()];
            for (i, &s) in sigma.iter().enumerate() {
                inv[s] = i;
            }
            TermPermutation { sigma: inv }
        }
        TriadSymmetry { rotations, transpose } => TriadSymmetry {
            // reflections are involutions
            rotations: if *transpose { rotations % 3 } else { (3 - rotations % 3) % 3 },
            transpose: *transpose,
        },
    })
}

/// How two terms are compared when testing whether an algorithm is fixed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermEquality {
    /// Factor matrices must match entry for entry.
    #[default]
    Raw,
    /// Terms match when `u ⊗ v ⊗ w` is the same tensor.
    Tensor,
}

type TermKey = (Matrix, Matrix, Matrix);

fn first_nonzero(x: &Matrix) -> Option<&Rational> {
    x.entries().iter().find(|e| !e.is_zero())
}

/// Representative of a term up to `(λu, μv, (λμ)⁻¹w)`: `u` and `v` are scaled
/// so their first nonzero entry is one.
fn tensor_key(t: &TriadTerm) -> TermKey {
    match (first_nonzero(&t.u), first_nonzero(&t.v), first_nonzero(&t.w)) {
        (Some(a), Some(b), Some(_)) => {
            let (ai, bi) = (a.recip(), b.recip());
            let w_scale = a * b;
            (t.u.scale(&ai), t.v.scale(&bi), t.w.scale(&w_scale))
        }
        _ => (
            Matrix::zeros(t.u.rows(), t.u.cols()),
            Matrix::zeros(t.v.rows(), t.v.cols()),
            Matrix::zeros(t.w.rows(), t.w.cols()),
        ),
    }
}

fn term_multiset(q: &Algorithm, mode: TermEquality) -> Vec<TermKey> {
    let mut keys: Vec<TermKey> = q
        .terms()
        .iter()
        .map(|t| match mode {
            TermEquality::Raw => (t.u.clone(), t.v.clone(), t.w.clone()),
            TermEquality::Tensor => tensor_key(t),
        })
        .collect();
    keys.sort();
    keys
}

/// Multiset equality of the terms of two algorithms, ignoring term order.
pub fn same_terms(a: &Algorithm, b: &Algorithm, mode: TermEquality) -> bool {
    a.format() == b.format() && a.len() == b.len() && term_multiset(a, mode) == term_multiset(b, mode)
}

/// True iff `g(q) = q` as a multiset of terms.
pub fn fixes_algorithm(g: &GroupElement, q: &Algorithm, mode: TermEquality) -> Result<bool> {
    let image = apply_element(g, q)?;
    Ok(same_terms(&image, q, mode))
}

pub fn random_invertible(size: usize, rng: &mut impl Rng) -> Matrix {
    loop {
        let data = (0..size * size).map(|_| int(rng.gen_range(-3..=3))).collect();
        let m = Matrix::from_vec(size, size, data).expect("square");
        if invert_exact(&m).is_ok() {
            return m;
        }
    }
}

pub fn random_nonzero_rational(rng: &mut impl Rng) -> Rational {
    let num = rng.gen_range(1..=5) * if rng.gen_bool(0.5) { 1 } else { -1 };
    frac(num, rng.gen_range(1..=5))
}

/// `P · D` with a uniform permutation `P` and nonzero diagonal `D`.
pub fn random_generalized_permutation(size: usize, rng: &mut impl Rng) -> Matrix {
    let mut perm: Vec<usize> = (0..size).collect();
    perm.shuffle(rng);
    let mut m = Matrix::zeros(size, size);
    for (col, &row) in perm.iter().enumerate() {
        m[(row, col)] = random_nonzero_rational(rng);
    }
    debug_assert!(is_generalized_permutation(&m));
    m
}

pub fn random_sandwich(format: MatMulFormat, rng: &mut impl Rng) -> GroupElement {
    GroupElement::Sandwich {
        a: random_invertible(format.m, rng),
        b: random_invertible(format.n, rng),
        c: random_invertible(format.p, rng),
    }
}

pub fn random_term_scale(r: usize, rng: &mut impl Rng) -> GroupElement {
    GroupElement::TermScale {
        scales: (0..r)
            .map(|_| ScalePair {
                lambda: random_nonzero_rational(rng),
                mu: random_nonzero_rational(rng),
            })
            .collect(),
    }
}

pub fn random_term_permutation(r: usize, rng: &mut impl Rng) -> GroupElement {
    let mut sigma: Vec<usize> = (0..r).collect();
    sigma.shuffle(rng);
    GroupElement::TermPermutation { sigma }
}

pub fn random_triad_symmetry(rng: &mut impl Rng) -> GroupElement {
    GroupElement::TriadSymmetry {
        rotations: rng.gen_range(0..3),
        transpose: rng.gen_bool(0.5),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSample {
    pub element: GroupElement,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitExperimentReport {
    pub base_rank: usize,
    pub samples: Vec<OrbitSample>,
    pub all_equal: bool,
}

/// Jacobian rank of `q` against the ranks of random sandwich images of `q`.
///
/// Sample `i` draws from a ChaCha stream `i` under `seed`, so results do not
/// depend on scheduling.
pub fn orbit_rank_experiment(
    q: &Algorithm,
    samples: usize,
    seed: u64,
    method: &RankMethod,
) -> Result<OrbitExperimentReport> {
    if !is_solution(q) {
        return Err(Error::NotASolution);
    }
    let base_rank = compute_rank(&jacobian(q), method)?.rank;
    let samples = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            let element = random_sandwich(q.format(), &mut rng);
            let image = apply_element(&element, q)?;
            let rank = compute_rank(&jacobian(&image), method)?.rank;
            Ok(OrbitSample { element, rank })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_equal = samples.iter().all(|s| s.rank == base_rank);
    Ok(OrbitExperimentReport {
        base_rank,
        samples,
        all_equal,
    })
}

/// Identity sandwich for a format.
pub fn identity_sandwich(format: MatMulFormat) -> GroupElement {
    GroupElement::Sandwich {
        a: Matrix::identity(format.m),
        b: Matrix::identity(format.n),
        c: Matrix::identity(format.p),
    }
}
