//! Corpus sweeps: per-file analysis, rank histograms and reference comparison.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithm::MatMulFormat;
use crate::brent::{is_solution, jacobian};
use crate::error::{Error, Result};
use crate::io::read_algorithm;
use crate::rank::{compute_rank, rank_numeric, RankCertificate, RankMethod, RankResult, TolerancePolicy};
use crate::structure::{analyze_properties, bound_report_with, BoundReport, PropertySummary};

const ALGORITHM_EXTENSIONS: [&str; 3] = ["json", "txt", "alg"];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BatchOptions {
    pub method: RankMethod,
    /// Worker threads; 0 lets the pool choose.
    pub jobs: usize,
    /// Analyze only a deterministic sample of this many files.
    pub sample: Option<usize>,
    pub sample_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub filename: String,
    pub format: Option<MatMulFormat>,
    pub r: Option<usize>,
    pub is_solution: bool,
    pub rank: Option<RankResult>,
    pub bounds: Option<BoundReport>,
    pub properties: Option<PropertySummary>,
    pub error: Option<String>,
}

impl FileRecord {
    fn failed(filename: String, error: &Error) -> Self {
        Self {
            filename,
            format: None,
            r: None,
            is_solution: false,
            rank: None,
            bounds: None,
            properties: None,
            error: Some(error.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub k: usize,
    pub rank: usize,
    pub u: i64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub options: BatchOptions,
    pub files: Vec<FileRecord>,
    pub parsed: usize,
    pub solutions: usize,
    pub errors: usize,
    /// Verified solutions per `(k, rank)`, ascending.
    pub histogram: Vec<HistogramRow>,
    pub weak_d_count: usize,
}

impl BatchReport {
    pub fn from_records(options: BatchOptions, files: Vec<FileRecord>) -> Self {
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut weak_d_count = 0;
        for f in files.iter().filter(|f| f.is_solution) {
            if let Some(b) = &f.bounds {
                *counts.entry((b.rank, b.k)).or_default() += 1;
            }
            if f.properties.as_ref().is_some_and(|p| p.weak_d) {
                weak_d_count += 1;
            }
        }
        let histogram = counts
            .into_iter()
            .map(|((rank, k), count)| HistogramRow {
                k,
                rank,
                u: k as i64 - rank as i64,
                count,
            })
            .collect();
        Self {
            options,
            parsed: files.iter().filter(|f| f.format.is_some()).count(),
            solutions: files.iter().filter(|f| f.is_solution).count(),
            errors: files.iter().filter(|f| f.error.is_some()).count(),
            files,
            histogram,
            weak_d_count,
        }
    }

    pub fn histogram_map(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for row in &self.histogram {
            *out.entry(row.rank).or_default() += row.count;
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Algorithm files in `dir`, sorted by file name.
pub fn list_algorithm_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| ALGORITHM_EXTENSIONS.contains(&e))
        })
        .collect();
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// `count` files chosen by `seed`, kept in file-name order.
pub fn deterministic_sample(files: &[PathBuf], count: usize, seed: u64) -> Vec<PathBuf> {
    if count >= files.len() {
        return files.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, files.len(), count).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| files[i].clone()).collect()
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// parse, verify, Jacobian, rank, bounds and structural properties.
pub fn analyze_file(path: &Path, method: &RankMethod) -> FileRecord {
    let filename = file_name(path);
    let q = match read_algorithm(path) {
        Ok(q) => q,
        Err(e) => return FileRecord::failed(filename, &e),
    };
    let mut record = FileRecord {
        filename,
        format: Some(q.format()),
        r: Some(q.len()),
        is_solution: is_solution(&q),
        rank: None,
        bounds: None,
        properties: None,
        error: None,
    };
    if !record.is_solution {
        return record;
    }
    match compute_rank(&jacobian(&q), method) {
        Ok(rank) => {
            let props = analyze_properties(&q);
            record.bounds = Some(bound_report_with(&q, &rank, &props));
            record.properties = Some(props);
            record.rank = Some(rank);
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

pub fn batch_analyze(dir: &Path, options: &BatchOptions) -> Result<BatchReport> {
    let mut files = list_algorithm_files(dir)?;
    if let Some(n) = options.sample {
        files = deterministic_sample(&files, n, options.sample_seed);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| Error::Value(format!("cannot start worker pool: {e}")))?;
    let records = pool.install(|| {
        files
            .par_iter()
            .map(|p| analyze_file(p, &options.method))
            .collect::<Vec<_>>()
    });
    Ok(BatchReport::from_records(options.clone(), records))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Table,
}

/// One row per observed rank with `u = k - rank`. A `k` column is added only
/// when the report mixes formats.
pub fn histogram_report(report: &BatchReport, format: ReportFormat) -> String {
    let mixed = report
        .histogram
        .windows(2)
        .any(|w| w[0].k != w[1].k);
    match format {
        ReportFormat::Json => {
            let rows: Vec<serde_json::Value> = report
                .histogram
                .iter()
                .map(|r| {
                    if mixed {
                        serde_json::json!({"k": r.k, "rank": r.rank, "u": r.u, "count": r.count})
                    } else {
                        serde_json::json!({"rank": r.rank, "u": r.u, "count": r.count})
                    }
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&rows).expect("rows serialize");
            s.push('\n');
            s
        }
        ReportFormat::Csv => {
            let mut s = String::from(if mixed { "k,rank,u,count\n" } else { "rank,u,count\n" });
            for r in &report.histogram {
                if mixed {
                    let _ = write!(s, "{},", r.k);
                }
                let _ = writeln!(s, "{},{},{}", r.rank, r.u, r.count);
            }
            s
        }
        ReportFormat::Table => {
            let mut s = String::new();
            if mixed {
                let _ = write!(s, "{:>6} ", "k");
            }
            let _ = writeln!(s, "{:>6} {:>6} {:>8}", "rank", "u", "count");
            for r in &report.histogram {
                if mixed {
                    let _ = write!(s, "{:>6} ", r.k);
                }
                let _ = writeln!(s, "{:>6} {:>6} {:>8}", r.rank, r.u, r.count);
            }
            s
        }
    }
}

/// Published statistics for a corpus sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusReference {
    pub name: String,
    pub total: usize,
    /// Exact rank histogram, when known.
    pub histogram: Option<BTreeMap<usize, usize>>,
    pub rank_range: (usize, usize),
    /// `(rank, count)` pairs known to hold.
    pub pinned_counts: Vec<(usize, usize)>,
    pub weak_d_count: usize,
}

impl CorpusReference {
    /// 17376 solutions of length 23 for 3x3 matrices.
    pub fn corpus_333() -> Self {
        let counts = [
            5, 25, 79, 256, 624, 1421, 2250, 3069, 3486, 2870, 1709, 858, 387, 159, 73, 68, 25, 7, 2, 3,
        ];
        Self {
            name: "<3,3,3>".into(),
            total: 17376,
            histogram: Some((526..).zip(counts).collect()),
            rank_range: (526, 545),
            pinned_counts: Vec::new(),
            weak_d_count: 8664,
        }
    }

    /// 14236 solutions of length 49 for 4x4 matrices.
    pub fn corpus_444() -> Self {
        Self {
            name: "<4,4,4>".into(),
            total: 14236,
            histogram: None,
            rank_range: (2144, 2201),
            pinned_counts: vec![(2155, 13530)],
            weak_d_count: 14204,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankCrossCheck {
    pub filename: String,
    pub modular_rank: Option<usize>,
    pub modular_primes: Vec<u64>,
    pub numeric_rank: Option<usize>,
    pub numeric_tolerance: Option<f64>,
    pub gap_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiscrepancyKind {
    Total { expected: usize, observed: usize },
    RankOutOfRange { rank: usize, range: (usize, usize) },
    HistogramCount { rank: usize, expected: usize, observed: usize },
    WeakDCount { expected: usize, observed: usize },
    FileFailed { message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub corpus: String,
    #[serde(flatten)]
    pub kind: DiscrepancyKind,
    pub cross_checks: Vec<RankCrossCheck>,
}

/// Numeric ranks are dense SVDs; at most this many files are cross-checked per record.
pub const CROSS_CHECK_LIMIT: usize = 4;

/// Recomputes a file's Jacobian rank modularly and numerically.
pub fn cross_check_file(path: &Path, primes: usize, seed: u64) -> RankCrossCheck {
    let mut out = RankCrossCheck {
        filename: file_name(path),
        modular_rank: None,
        modular_primes: Vec::new(),
        numeric_rank: None,
        numeric_tolerance: None,
        gap_ratio: None,
    };
    let Ok(q) = read_algorithm(path) else {
        return out;
    };
    let j = jacobian(&q);
    if let Ok(m) = compute_rank(&j, &RankMethod::Modular { primes, seed }) {
        out.modular_rank = Some(m.rank);
        if let RankCertificate::Modular { primes, .. } = m.certificate {
            out.modular_primes = primes;
        }
    }
    let n = rank_numeric(&j, TolerancePolicy::Auto);
    out.numeric_rank = Some(n.rank);
    if let RankCertificate::Numeric { tolerance, gap_ratio, .. } = n.certificate {
        out.numeric_tolerance = Some(tolerance);
        out.gap_ratio = gap_ratio;
    }
    out
}

/// Compares a sweep over `dir` with published statistics.
///
/// A sampled report is only checked file by file (rank range and failures);
/// totals, histogram counts and the weak-D census need the full sweep.
pub fn compare_with_reference(dir: &Path, report: &BatchReport, reference: &CorpusReference) -> Vec<Discrepancy> {
    let (primes, seed) = match report.options.method {
        RankMethod::Modular { primes, seed } => (primes, seed),
        _ => (crate::rank::DEFAULT_PRIME_COUNT, 0),
    };
    let check = |names: &[&str]| -> Vec<RankCrossCheck> {
        names
            .iter()
            .take(CROSS_CHECK_LIMIT)
            .map(|n| cross_check_file(&dir.join(n), primes, seed))
            .collect()
    };
    let record = |kind: DiscrepancyKind, files: &[&str]| Discrepancy {
        corpus: reference.name.clone(),
        kind,
        cross_checks: check(files),
    };

    let mut out = Vec::new();
    for f in &report.files {
        if let Some(msg) = &f.error {
            out.push(record(DiscrepancyKind::FileFailed { message: msg.clone() }, &[]));
        } else if !f.is_solution {
            out.push(Discrepancy {
                corpus: reference.name.clone(),
                kind: DiscrepancyKind::FileFailed {
                    message: format!("{} is not a solution", f.filename),
                },
                cross_checks: Vec::new(),
            });
        } else if let Some(rank) = f.rank.as_ref().map(|r| r.rank) {
            let (lo, hi) = reference.rank_range;
            if rank < lo || rank > hi {
                out.push(record(
                    DiscrepancyKind::RankOutOfRange {
                        rank,
                        range: reference.rank_range,
                    },
                    &[f.filename.as_str()],
                ));
            }
        }
    }
    if report.options.sample.is_some() {
        return out;
    }

    if report.solutions != reference.total {
        out.push(record(
            DiscrepancyKind::Total {
                expected: reference.total,
                observed: report.solutions,
            },
            &[],
        ));
    }
    let observed = report.histogram_map();
    let files_at = |rank: usize| -> Vec<&str> {
        report
            .files
            .iter()
            .filter(|f| f.rank.as_ref().is_some_and(|r| r.rank == rank))
            .map(|f| f.filename.as_str())
            .collect()
    };
    let mut expected_counts: BTreeMap<usize, usize> = reference.pinned_counts.iter().copied().collect();
    if let Some(h) = &reference.histogram {
        expected_counts.extend(h.iter().map(|(&k, &v)| (k, v)));
        for &rank in observed.keys().filter(|r| !h.contains_key(r)) {
            expected_counts.insert(rank, 0);
        }
    }
    for (&rank, &expected) in &expected_counts {
        let got = observed.get(&rank).copied().unwrap_or(0);
        if got != expected {
            out.push(record(
                DiscrepancyKind::HistogramCount {
                    rank,
                    expected,
                    observed: got,
                },
                &files_at(rank),
            ));
        }
    }
    if report.weak_d_count != reference.weak_d_count {
        out.push(record(
            DiscrepancyKind::WeakDCount {
                expected: reference.weak_d_count,
                observed: report.weak_d_count,
            },
            &[],
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::{builtin_strassen, natural_algorithm};
    use crate::io::write_algorithm;

    fn corpus() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        write_algorithm(dir.path().join("strassen.json"), &builtin_strassen()).unwrap();
        dir
    }

    #[test]
    fn strassen_only() {
        let dir = corpus();
        let report = batch_analyze(dir.path(), &BatchOptions::default()).unwrap();
        assert_eq!(report.histogram_map(), BTreeMap::from([(61, 1)]));
        assert_eq!(report.weak_d_count, 1);
        let csv = histogram_report(&report, ReportFormat::Csv);
        assert_eq!(csv, "rank,u,count\n61,23,1\n");
    }

    #[test]
    fn empty_report_has_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let report = batch_analyze(dir.path(), &BatchOptions::default()).unwrap();
        assert_eq!(histogram_report(&report, ReportFormat::Csv), "rank,u,count\n");
        assert_eq!(histogram_report(&report, ReportFormat::Json), "[]\n");
        assert_eq!(histogram_report(&report, ReportFormat::Table).lines().count(), 1);
    }

    #[test]
    fn errors_are_recorded_and_order_is_by_name() {
        let dir = corpus();
        fs::write(dir.path().join("a_broken.txt"), "2 2 2 1\n1 0 0\n").unwrap();
        let mut not_solution = natural_algorithm(MatMulFormat::new(2, 2, 2).unwrap());
        let mut t = not_solution.terms()[0].clone();
        t.u = t.u.scale(&crate::rational::int(2));
        not_solution = not_solution.with_term(0, t).unwrap();
        write_algorithm(dir.path().join("b_wrong.txt"), &not_solution).unwrap();
        write_algorithm(dir.path().join("c_natural.json"), &natural_algorithm(MatMulFormat::new(2, 2, 2).unwrap())).unwrap();
        fs::write(dir.path().join("notes.md"), "ignored").unwrap();

        let report = batch_analyze(dir.path(), &BatchOptions::default()).unwrap();
        let names: Vec<&str> = report.files.iter().map(|f| f.filename.as_str()).collect();
        assert_eq!(names, ["a_broken.txt", "b_wrong.txt", "c_natural.json", "strassen.json"]);
        assert_eq!((report.parsed, report.solutions, report.errors), (3, 2, 1));
        assert_eq!(report.histogram_map(), BTreeMap::from([(56, 1), (61, 1)]));
        assert_eq!(report.histogram_map().values().sum::<usize>(), report.solutions);
    }

    #[test]
    fn deterministic_across_jobs() {
        let dir = corpus();
        for i in 0..5 {
            write_algorithm(dir.path().join(format!("n{i}.json")), &natural_algorithm(MatMulFormat::new(1 + i % 2, 2, 2).unwrap())).unwrap();
        }
        let run = |jobs| {
            let opts = BatchOptions { jobs, ..BatchOptions::default() };
            batch_analyze(dir.path(), &opts).unwrap().files
        };
        let a = serde_json::to_string(&run(1)).unwrap();
        assert_eq!(a, serde_json::to_string(&run(4)).unwrap());
        assert_eq!(a, serde_json::to_string(&run(1)).unwrap());
    }

    #[test]
    fn mixed_formats_add_k_column() {
        let dir = corpus();
        write_algorithm(dir.path().join("nat.json"), &natural_algorithm(MatMulFormat::new(1, 2, 2).unwrap())).unwrap();
        let report = batch_analyze(dir.path(), &BatchOptions::default()).unwrap();
        assert!(histogram_report(&report, ReportFormat::Csv).starts_with("k,rank,u,count\n"));
    }

    #[test]
    fn sampling_is_deterministic() {
        let files: Vec<PathBuf> = (0..100).map(|i| PathBuf::from(format!("{i:03}.json"))).collect();
        let a = deterministic_sample(&files, 10, 7);
        assert_eq!(a, deterministic_sample(&files, 10, 7));
        assert_eq!(a.len(), 10);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(deterministic_sample(&files, 200, 7).len(), 100);
    }

    #[test]
    fn reference_comparison_flags_deviations() {
        let dir = corpus();
        let report = batch_analyze(dir.path(), &BatchOptions::default()).unwrap();
        let reference = CorpusReference {
            name: "toy".into(),
            total: 1,
            histogram: Some(BTreeMap::from([(60, 1)])),
            rank_range: (60, 60),
            pinned_counts: vec![],
            weak_d_count: 1,
        };
        let found = compare_with_reference(dir.path(), &report, &reference);
        assert!(found.iter().any(|d| matches!(d.kind, DiscrepancyKind::RankOutOfRange { rank: 61, .. })));
        let hist = found
            .iter()
            .find(|d| matches!(d.kind, DiscrepancyKind::HistogramCount { rank: 61, expected: 0, observed: 1 }))
            .unwrap();
        assert_eq!(hist.cross_checks[0].modular_rank, Some(61));
        assert_eq!(hist.cross_checks[0].numeric_rank, Some(61));
        let ok = CorpusReference {
            histogram: Some(BTreeMap::from([(61, 1)])),
            rank_range: (61, 61),
            ..reference
        };
        assert!(compare_with_reference(dir.path(), &report, &ok).is_empty());
        let text = serde_json::to_string(&found).unwrap();
        assert!(text.contains("\"kind\":\"histogram_count\""));
    }

    #[test]
    fn reference_tables() {
        let r = CorpusReference::corpus_333();
        let h = r.histogram.as_ref().unwrap();
        assert_eq!(h.values().sum::<usize>(), r.total);
        assert_eq!((*h.keys().next().unwrap(), *h.keys().last().unwrap()), (526, 545));
        // u runs from 621 - 526 = 95 down to 76
        assert_eq!((621 - 526, 621 - 545), (95, 76));
    }
}
