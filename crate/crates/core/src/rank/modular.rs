use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{RankCertificate, RankResult};
use crate::error::{Error, Result};
use crate::sparse::SparseRationalMatrix;

pub const DEFAULT_PRIME_COUNT: usize = 3;

/// Primes are drawn from `[2^30, 2^31)` so products fit in a `u64`.
const PRIME_LOW: u64 = 1 << 30;
const PRIME_HIGH: u64 = 1 << 31;
const DRAWS_PER_PRIME: usize = 32;

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn random_prime(rng: &mut ChaCha8Rng) -> u64 {
    loop {
        let candidate = rng.gen_range(PRIME_LOW..PRIME_HIGH) | 1;
        if is_prime_u64(candidate) {
            return candidate;
        }
    }
}

fn residue(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p)).to_u64().expect("residue below p")
}

fn divides_some_denominator(a: &SparseRationalMatrix, p: u64) -> bool {
    let big = BigInt::from(p);
    a.triplets()
        .iter()
        .any(|t| t.value.denom().is_multiple_of(&big))
}

/// Rank of `a` reduced modulo the prime `p`, which must not divide any denominator.
fn rank_mod_p(a: &SparseRationalMatrix, p: u64) -> usize {
    debug_assert!(p < 1 << 32);
    let (rows, cols) = (a.rows(), a.cols());
    let mut m = vec![0u32; rows * cols];
    for t in a.triplets() {
        let num = residue(t.value.numer(), p);
        let den = residue(t.value.denom(), p);
        let inv = pow_mod(den, p - 2, p);
        m[t.row * cols + t.col] = mul_mod(num, inv, p) as u32;
    }
    let mut rank = 0;
    let mut nonzero_cols = Vec::with_capacity(cols);
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot) = (rank..rows).find(|&i| m[i * cols + c] != 0) else {
            continue;
        };
        if pivot != rank {
            for j in c..cols {
                m.swap(pivot * cols + j, rank * cols + j);
            }
        }
        let inv = pow_mod(m[rank * cols + c] as u64, p - 2, p);
        nonzero_cols.clear();
        for j in c + 1..cols {
            let x = m[rank * cols + j];
            if x != 0 {
                let scaled = mul_mod(x as u64, inv, p);
                m[rank * cols + j] = scaled as u32;
                nonzero_cols.push(j);
            }
        }
        m[rank * cols + c] = 1;
        let (head, tail) = m.split_at_mut((rank + 1) * cols);
        let pivot_row = &head[rank * cols..];
        for row in tail.chunks_exact_mut(cols) {
            let f = row[c] as u64;
            if f == 0 {
                continue;
            }
            let neg = p - f;
            for &j in &nonzero_cols {
                row[j] = ((row[j] as u64 + neg * pivot_row[j] as u64) % p) as u32;
            }
            row[c] = 0;
        }
        rank += 1;
    }
    rank
}

/// Rank modulo each listed prime; reported rank is the maximum. Primes that
/// divide a denominator are skipped, and if all of them do the call fails.
pub fn rank_modulo_primes(a: &SparseRationalMatrix, primes: &[u64]) -> Result<RankResult> {
    let usable: Vec<u64> = primes
        .iter()
        .copied()
        .filter(|&p| !divides_some_denominator(a, p))
        .collect();
    if usable.is_empty() {
        return Err(Error::DenominatorClash);
    }
    if let Some(&p) = usable.iter().find(|&&p| !is_prime_u64(p) || p >= 1 << 32) {
        return Err(Error::Value(format!("{p} is not a prime below 2^32")));
    }
    let ranks: Vec<usize> = usable.par_iter().map(|&p| rank_mod_p(a, p)).collect();
    Ok(RankResult {
        rank: ranks.iter().copied().max().unwrap_or(0),
        rows: a.rows(),
        cols: a.cols(),
        certificate: RankCertificate::Modular {
            primes: usable,
            ranks,
        },
    })
}

/// Rank over the rationals from `prime_count` random primes seeded by `seed`.
///
/// Each modular rank is a lower bound on the exact rank, so the maximum is too;
/// it falls short only if every prime divides one particular nonzero minor.
pub fn rank_modular(a: &SparseRationalMatrix, prime_count: usize, seed: u64) -> Result<RankResult> {
    if prime_count == 0 {
        return Err(Error::Value("prime_count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut primes = Vec::with_capacity(prime_count);
    for _ in 0..prime_count {
        let good = (0..DRAWS_PER_PRIME)
            .map(|_| random_prime(&mut rng))
            .find(|&p| !divides_some_denominator(a, p) && !primes.contains(&p));
        if let Some(p) = good {
            primes.push(p);
        }
    }
    if primes.is_empty() {
        return Err(Error::DenominatorClash);
    }
    rank_modulo_primes(a, &primes)
}
