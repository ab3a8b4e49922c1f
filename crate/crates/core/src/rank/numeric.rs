use serde::{Deserialize, Serialize};

use super::{RankCertificate, RankResult};
use crate::sparse::SparseRationalMatrix;

/// Threshold below which singular values count as zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "lowercase")]
pub enum TolerancePolicy {
    /// `σ_max · max(rows, cols) · ε`
    #[default]
    Auto,
    Fixed(f64),
}

impl TolerancePolicy {
    pub fn resolve(&self, sigma_max: f64, rows: usize, cols: usize) -> f64 {
        match *self {
            TolerancePolicy::Auto => sigma_max * rows.max(cols) as f64 * f64::EPSILON,
            TolerancePolicy::Fixed(t) => t,
        }
    }
}

/// Singular-value rank of the floating image of `a`, with the full spectrum
/// in the certificate.
pub fn rank_numeric(a: &SparseRationalMatrix, tol: TolerancePolicy) -> RankResult {
    let (rows, cols) = (a.rows(), a.cols());
    let mut spectrum: Vec<f64> = if rows == 0 || cols == 0 {
        Vec::new()
    } else {
        a.to_f64_dense().singular_values().iter().copied().collect()
    };
    spectrum.sort_by(|x, y| y.total_cmp(x));
    let sigma_max = spectrum.first().copied().unwrap_or(0.0);
    let tolerance = tol.resolve(sigma_max, rows, cols);
    let rank = spectrum.iter().filter(|&&s| s > tolerance).count();
    let gap_ratio = match rank {
        0 => None,
        r if r == spectrum.len() => None,
        r if spectrum[r] == 0.0 => Some(f64::INFINITY),
        r => Some(spectrum[r - 1] / spectrum[r]),
    };
    RankResult {
        rank,
        rows,
        cols,
        certificate: RankCertificate::Numeric {
            spectrum,
            tolerance,
            gap_ratio,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    #[test]
    fn identity_spectrum() {
        let r = rank_numeric(&SparseRationalMatrix::identity(5), TolerancePolicy::Auto);
        assert_eq!(r.rank, 5);
        let RankCertificate::Numeric { spectrum, gap_ratio, .. } = r.certificate else {
            panic!("wrong certificate");
        };
        assert!(spectrum.iter().all(|&s| (s - 1.0).abs() < 1e-12));
        assert_eq!(gap_ratio, None);
    }

    #[test]
    fn fixed_tolerance() {
        let m = SparseRationalMatrix::from_dense(&Matrix::from_i64(&[&[10, 0], &[0, 1]]));
        assert_eq!(rank_numeric(&m, TolerancePolicy::Fixed(2.0)).rank, 1);
        assert_eq!(rank_numeric(&m, TolerancePolicy::Fixed(0.5)).rank, 2);
        let empty = SparseRationalMatrix::from_dense(&Matrix::zeros(0, 3));
        assert_eq!(rank_numeric(&empty, TolerancePolicy::Auto).rank, 0);
    }
}
