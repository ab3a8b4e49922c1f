//! Exact analysis of fast matrix multiplication algorithms as points of the
//! Brent equations: residuals, sparse Jacobians, certified ranks, symmetry
//! actions, structural properties of the factor families and dimension bounds.

pub mod algorithm;
pub mod batch;
pub mod brent;
pub mod error;
pub mod io;
pub mod matrix;
pub mod rank;
pub mod rational;
pub mod sparse;
pub mod structure;
pub mod symmetry;

pub use algorithm::{builtin_strassen, natural_algorithm, Algorithm, MatMulFormat, Role, TriadTerm};
pub use batch::{batch_analyze, histogram_report, BatchOptions, BatchReport, CorpusReference, ReportFormat};
pub use brent::{is_solution, jacobian, residual, BrentSystem, ResidualVector};
pub use error::{Error, Result};
pub use io::{parse_algorithm, read_algorithm, to_json, to_text, write_algorithm, FileFormat};
pub use matrix::Matrix;
pub use rank::{compute_rank, RankCertificate, RankMethod, RankMethodKind, RankResult, TolerancePolicy};
pub use rational::Rational;
pub use sparse::SparseRationalMatrix;
pub use structure::{
    analyze_properties, bound_report, d_property_check, kron_factorize, unit_basis_containment, weak_d_check,
    BoundReport, ContainmentMode, DPropertyVerdict, DStatus, PropertySummary,
};
pub use symmetry::{apply_element, compose, invert, GroupElement, TermEquality};
