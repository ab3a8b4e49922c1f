//! Benchmark inputs shared by the criterion targets.

use brent_core::{natural_algorithm, parse_algorithm, Algorithm, FileFormat, MatMulFormat};

pub const LADERMAN: &str = include_str!("../../core/tests/data/laderman.txt");

pub fn laderman() -> Algorithm {
    parse_algorithm(LADERMAN, Some(FileFormat::Text)).expect("fixture parses")
}

pub fn natural(m: usize, n: usize, p: usize) -> Algorithm {
    natural_algorithm(MatMulFormat::new(m, n, p).expect("positive dimensions"))
}
