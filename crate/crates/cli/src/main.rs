use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use brent_core::algorithm::{builtin_strassen, natural_algorithm};
use brent_core::batch::{compare_with_reference, CorpusReference};
use brent_core::rank::{RankCertificate, DEFAULT_PRIME_COUNT};
use brent_core::symmetry::{
    apply_element, orbit_rank_experiment, random_sandwich, random_term_permutation, random_term_scale,
};
use brent_core::{
    analyze_properties, batch_analyze, bound_report, compute_rank, histogram_report, is_solution, jacobian,
    read_algorithm, residual, to_json, to_text, Algorithm, BatchOptions, BatchReport, Error, GroupElement,
    MatMulFormat, RankMethod, ReportFormat, Role, TolerancePolicy,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "brent", version, about = "Verify and analyze matrix multiplication algorithms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a file solves the Brent equations exactly
    Verify { file: PathBuf },
    /// Rank of the Jacobian at the algorithm
    Rank {
        file: PathBuf,
        #[command(flatten)]
        rank: RankArgs,
        #[arg(long)]
        json: bool,
    },
    /// Local-dimension bounds from the Jacobian rank
    Bounds {
        file: PathBuf,
        #[command(flatten)]
        rank: RankArgs,
        #[arg(long)]
        json: bool,
    },
    /// D-property, weak D-property and unit-matrix containment per factor role
    Props {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Apply a random or fixed group element and print the image
    Transform {
        file: PathBuf,
        #[arg(long, value_enum)]
        action: Action,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the Jacobian rank with ranks at random sandwich images
    Orbit {
        file: PathBuf,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        /// Seeds both the sampled elements and the prime draws
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Method::Modular)]
        method: Method,
        #[arg(long, default_value_t = DEFAULT_PRIME_COUNT)]
        primes: usize,
        #[arg(long, default_value = "auto", value_parser = parse_tol)]
        tol: TolerancePolicy,
    },
    /// Analyze every algorithm file in a directory
    Batch {
        dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[command(flatten)]
        rank: RankArgs,
        /// Analyze a deterministic sample of this many files
        #[arg(long)]
        sample: Option<usize>,
        /// Compare with published corpus statistics
        #[arg(long, value_enum)]
        reference: Option<Reference>,
        /// Where to write discrepancy records (JSON)
        #[arg(long)]
        discrepancies: Option<PathBuf>,
    },
    /// Render the rank histogram of a batch report
    Report {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Rendering::Table)]
        format: Rendering,
    },
    /// Print a built-in algorithm
    Emit {
        #[arg(value_enum)]
        which: Builtin,
        #[arg(long, default_value = "2,2,2", value_parser = parse_dims)]
        dims: (usize, usize, usize),
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Write the exact Jacobian as a MatrixMarket file
    Jacobian {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RankArgs {
    #[arg(long, value_enum, default_value_t = Method::Modular)]
    method: Method,
    #[arg(long, default_value_t = DEFAULT_PRIME_COUNT)]
    primes: usize,
    /// `auto` or a fixed singular-value threshold
    #[arg(long, default_value = "auto", value_parser = parse_tol)]
    tol: TolerancePolicy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl RankArgs {
    fn method(&self) -> RankMethod {
        match self.method {
            Method::Exact => RankMethod::Exact,
            Method::Modular => RankMethod::Modular {
                primes: self.primes,
                seed: self.seed,
            },
            Method::Numeric => RankMethod::Numeric { tolerance: self.tol },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    Modular,
    Numeric,
}

#[derive(Clone, Copy, ValueEnum)]
enum Action {
    Sandwich,
    Scale,
    Permute,
    Cyclic,
    Transpose,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rendering {
    Csv,
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    Strassen,
    Natural,
}

#[derive(Clone, Copy, ValueEnum)]
enum Reference {
    #[value(name = "333")]
    C333,
    #[value(name = "444")]
    C444,
}

fn parse_tol(s: &str) -> Result<TolerancePolicy, String> {
    if s == "auto" {
        return Ok(TolerancePolicy::Auto);
    }
    match s.parse::<f64>() {
        Ok(t) if t >= 0.0 && t.is_finite() => Ok(TolerancePolicy::Fixed(t)),
        _ => Err(format!("expected `auto` or a non-negative number, got {s:?}")),
    }
}

fn parse_dims(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("bad dimension {p:?}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [m, n, p] => Ok((m, n, p)),
        _ => Err("expected m,n,p".into()),
    }
}

enum Failure {
    Verification(String),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn load_solution(path: &Path) -> Result<Algorithm, Failure> {
    let q = read_algorithm(path)?;
    if !is_solution(&q) {
        return Err(Failure::Verification(format!(
            "{} is not a solution of the Brent equations",
            path.display()
        )));
    }
    Ok(q)
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn describe_certificate(c: &RankCertificate) -> String {
    match c {
        RankCertificate::Exact { pivot_columns } => format!("{} pivot columns", pivot_columns.len()),
        RankCertificate::Modular { primes, ranks } => {
            let pairs: Vec<String> = primes.iter().zip(ranks).map(|(p, r)| format!("{r} mod {p}")).collect();
            pairs.join(", ")
        }
        RankCertificate::Numeric { tolerance, gap_ratio, .. } => match gap_ratio {
            Some(g) => format!("tolerance {tolerance:.3e}, gap ratio {g:.3e}"),
            None => format!("tolerance {tolerance:.3e}"),
        },
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Verify { file } => {
            let q = read_algorithm(&file)?;
            let res = residual(&q);
            println!("format {} length {}", q.format(), q.len());
            println!("nonzero residuals {}/{}", res.nonzero_count(), res.len());
            if res.is_zero() {
                println!("solution: yes");
                Ok(())
            } else {
                println!("solution: no");
                Err(Failure::Verification("residual is not zero".into()))
            }
        }
        Command::Rank { file, rank, json } => {
            let q = read_algorithm(&file)?;
            let result = compute_rank(&jacobian(&q), &rank.method())?;
            if json {
                print_json(&result);
            } else {
                println!("jacobian {}x{}", result.rows, result.cols);
                println!("rank {} ({})", result.rank, result.method());
                println!("certificate: {}", describe_certificate(&result.certificate));
            }
            Ok(())
        }
        Command::Bounds { file, rank, json } => {
            let q = load_solution(&file)?;
            let result = compute_rank(&jacobian(&q), &rank.method())?;
            let rep = bound_report(&q, &result);
            if json {
                print_json(&rep);
            } else {
                println!("format {} length {}", rep.format, rep.r);
                println!("k={} rank={} ({})", rep.k, rep.rank, rep.rank_method);
                println!("u={}", rep.u);
                println!("l={} l'={} l''={}", rep.l, rep.l_prime, rep.l_dprime);
                println!("g={} g'={} g''={}", rep.g, rep.g_prime, rep.g_dprime);
                println!(
                    "d_property={:?} weak_d={} l_valid={} anomaly={}",
                    rep.flags.d_property, rep.flags.weak_d, rep.flags.lower_bound_valid, rep.flags.anomaly
                );
            }
            Ok(())
        }
        Command::Props { file, json } => {
            let q = read_algorithm(&file)?;
            let props = analyze_properties(&q);
            if json {
                print_json(&props);
            } else {
                for (i, role) in Role::ALL.into_iter().enumerate() {
                    let d = props.d_roles[i]
                        .as_ref()
                        .map_or("deficient span".to_string(), |v| format!("{:?} ({})", v.status, v.reason));
                    println!(
                        "{role}: D={d} weak_d={} units={}",
                        props.weak_d_roles[i], props.unit_containment[i]
                    );
                }
                println!("algorithm: D={:?} weak_d={}", props.d_property, props.weak_d);
            }
            Ok(())
        }
        Command::Transform {
            file,
            action,
            seed,
            format,
            out,
        } => {
            let q = read_algorithm(&file)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = match action {
                Action::Sandwich => random_sandwich(q.format(), &mut rng),
                Action::Scale => random_term_scale(q.len(), &mut rng),
                Action::Permute => random_term_permutation(q.len(), &mut rng),
                Action::Cyclic => GroupElement::cyclic(),
                Action::Transpose => GroupElement::transpose(),
            };
            let image = apply_element(&g, &q)?;
            let text = match format {
                OutputFormat::Json => to_json(&image),
                OutputFormat::Text => to_text(&image),
            };
            match out {
                Some(path) => fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Orbit {
            file,
            samples,
            seed,
            method,
            primes,
            tol,
        } => {
            let q = load_solution(&file)?;
            let rank = RankArgs {
                method,
                primes,
                tol,
                seed,
            };
            let rep = orbit_rank_experiment(&q, samples, seed, &rank.method())?;
            println!("base rank {}", rep.base_rank);
            for (i, s) in rep.samples.iter().enumerate() {
                println!("sample {i}: rank {}", s.rank);
            }
            println!("all equal: {}", rep.all_equal);
            Ok(())
        }
        Command::Batch {
            dir,
            out,
            jobs,
            rank,
            sample,
            reference,
            discrepancies,
        } => {
            let options = BatchOptions {
                method: rank.method(),
                jobs,
                sample,
                sample_seed: rank.seed,
            };
            let report = batch_analyze(&dir, &options)?;
            fs::write(&out, report.to_json())?;
            println!(
                "{} files, {} parsed, {} solutions, {} errors, weak D {}",
                report.files.len(),
                report.parsed,
                report.solutions,
                report.errors,
                report.weak_d_count
            );
            if let Some(which) = reference {
                let reference = match which {
                    Reference::C333 => CorpusReference::corpus_333(),
                    Reference::C444 => CorpusReference::corpus_444(),
                };
                let found = compare_with_reference(&dir, &report, &reference);
                let text = serde_json::to_string_pretty(&found).expect("serializable");
                match discrepancies {
                    Some(path) => fs::write(path, &text)?,
                    None => println!("{text}"),
                }
                if !found.is_empty() {
                    return Err(Failure::Verification(format!(
                        "{} discrepancies against {}",
                        found.len(),
                        reference.name
                    )));
                }
            }
            Ok(())
        }
        Command::Report { path, format } => {
            let report = BatchReport::from_json(&fs::read_to_string(path)?)?;
            let format = match format {
                Rendering::Csv => ReportFormat::Csv,
                Rendering::Json => ReportFormat::Json,
                Rendering::Table => ReportFormat::Table,
            };
            print!("{}", histogram_report(&report, format));
            Ok(())
        }
        Command::Emit { which, dims, format } => {
            let q = match which {
                Builtin::Strassen => builtin_strassen(),
                Builtin::Natural => natural_algorithm(MatMulFormat::new(dims.0, dims.1, dims.2)?),
            };
            match format {
                OutputFormat::Json => print!("{}", to_json(&q)),
                OutputFormat::Text => print!("{}", to_text(&q)),
            }
            Ok(())
        }
        Command::Jacobian { file, out } => {
            let q = read_algorithm(&file)?;
            let j = jacobian(&q);
            fs::write(&out, j.to_matrix_market())?;
            println!("wrote {}x{} with {} nonzeros", j.rows(), j.cols(), j.nnz());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn arguments_are_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn tolerance_and_dims() {
        assert_eq!(parse_tol("auto"), Ok(TolerancePolicy::Auto));
        assert_eq!(parse_tol("1e-9"), Ok(TolerancePolicy::Fixed(1e-9)));
        assert!(parse_tol("-1").is_err());
        assert_eq!(parse_dims("2,3,4"), Ok((2, 3, 4)));
        assert!(parse_dims("2,3").is_err());
    }
}
