//! Matrix rank three ways: exact fraction-free elimination, multi-prime modular
//! elimination and floating-point SVD.

mod exact;
mod modular;
mod numeric;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sparse::SparseRationalMatrix;

pub use exact::{column_basis, rank_exact};
pub use modular::{is_prime_u64, rank_modular, rank_modulo_primes, DEFAULT_PRIME_COUNT};
pub use numeric::{rank_numeric, TolerancePolicy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMethodKind {
    Exact,
    Modular,
    Numeric,
}

impl std::fmt::Display for RankMethodKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::Modular => "modular",
            Self::Numeric => "numeric",
        })
    }
}

/// Method-specific evidence for a rank.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum RankCertificate {
    Exact {
        pivot_columns: Vec<usize>,
    },
    Modular {
        primes: Vec<u64>,
        ranks: Vec<usize>,
    },
    Numeric {
        spectrum: Vec<f64>,
        tolerance: f64,
        /// `σ_rank / σ_{rank+1}`; absent when either side does not exist.
        gap_ratio: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankResult {
    pub rank: usize,
    pub rows: usize,
    pub cols: usize,
    pub certificate: RankCertificate,
}

impl RankResult {
    pub fn method(&self) -> RankMethodKind {
        match self.certificate {
            RankCertificate::Exact { .. } => RankMethodKind::Exact,
            RankCertificate::Modular { .. } => RankMethodKind::Modular,
            RankCertificate::Numeric { .. } => RankMethodKind::Numeric,
        }
    }
}

/// Rank method together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum RankMethod {
    Exact,
    Modular { primes: usize, seed: u64 },
    Numeric { tolerance: TolerancePolicy },
}

impl Default for RankMethod {
    fn default() -> Self {
        RankMethod::Modular {
            primes: DEFAULT_PRIME_COUNT,
            seed: 0,
        }
    }
}

impl RankMethod {
    pub fn kind(&self) -> RankMethodKind {
        match self {
            RankMethod::Exact => RankMethodKind::Exact,
            RankMethod::Modular { .. } => RankMethodKind::Modular,
            RankMethod::Numeric { .. } => RankMethodKind::Numeric,
        }
    }
}

pub fn compute_rank(a: &SparseRationalMatrix, method: &RankMethod) -> Result<RankResult> {
    match *method {
        RankMethod::Exact => Ok(rank_exact(a)),
        RankMethod::Modular { primes, seed } => rank_modular(a, primes, seed),
        RankMethod::Numeric { tolerance } => Ok(rank_numeric(a, tolerance)),
    }
}
