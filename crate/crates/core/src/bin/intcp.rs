use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use intcp::cli::{parse_mat2, parse_matrix_text, run_scan, OutputFormat, ScanConfig, ScanError};
use intcp::exact_matrix::MAX_ENTRY;
use intcp::oracle::{exact_cp_rank, upper_bound_report, DEFAULT_BUDGET};
use intcp::rank1::factor_rank1;
use intcp::squares::decompose;
use intcp::{verify, Error, Factorization, Mat2};

const EXIT_VALIDATION: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "intcp",
    version,
    about = "Integer cp-factorizations of 2x2 doubly nonnegative matrices"
)]
struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Subcommand)]
enum Command {
    /// Factor [[a, b], [b, c]] with at most 11 columns.
    Factor {
        #[arg(long, allow_negative_numbers = true)]
        a: i64,
        #[arg(long, allow_negative_numbers = true)]
        b: i64,
        #[arg(long, allow_negative_numbers = true)]
        c: i64,
        /// Re-check the reconstruction and fail if it does not hold.
        #[arg(long)]
        verify: bool,
    },
    /// Integer cp-rank report (template bound, or exact with --exact).
    Rank {
        #[arg(long, allow_negative_numbers = true)]
        a: i64,
        #[arg(long, allow_negative_numbers = true)]
        b: i64,
        #[arg(long, allow_negative_numbers = true)]
        c: i64,
        #[arg(long)]
        exact: bool,
        /// Node budget for the exact search.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Minimal sum-of-squares decomposition of x.
    Squares { x: u64 },
    /// Factor a rank-1 symmetric matrix read from a file.
    Rank1 {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Map template bounds (and optionally exact ranks) over a ≤ c ≤ N.
    Scan {
        #[arg(long = "max-diag")]
        max_diag: u64,
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Inconclusive { .. } => EXIT_INCONCLUSIVE,
            _ => EXIT_VALIDATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ScanError> for Failure {
    fn from(e: ScanError) -> Self {
        match e {
            ScanError::Matrix(e) => e.into(),
            ScanError::Io { .. } => Failure {
                code: EXIT_IO,
                message: e.to_string(),
            },
            _ => Failure {
                code: EXIT_VALIDATION,
                message: e.to_string(),
            },
        }
    }
}

#[derive(Serialize)]
struct FactorOutput<'a> {
    a: u64,
    b: u64,
    c: u64,
    count: usize,
    #[serde(flatten)]
    factorization: &'a Factorization,
    verified: Option<bool>,
}

#[derive(Serialize)]
struct SquaresOutput {
    x: u64,
    count: usize,
    parts: Vec<u64>,
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string(value).expect("output serializes")
    );
}

fn print_columns(f: &Factorization) {
    for col in f.columns() {
        let entries: Vec<String> = col.entries().iter().map(u64::to_string).collect();
        println!("  ({})", entries.join(", "));
    }
}

fn factor_cmd(m: Mat2, check: bool, json: bool) -> Result<(), Failure> {
    let f = intcp::cp2::factor(&m)?;
    let verified = if check { Some(verify(&m, &f)?) } else { None };
    if json {
        print_json(&FactorOutput {
            a: m.a(),
            b: m.b(),
            c: m.c(),
            count: f.len(),
            factorization: &f,
            verified,
        });
    } else {
        println!("A = {m}");
        println!("{} columns ({})", f.len(), f.method());
        print_columns(&f);
        if let Some(ok) = verified {
            println!("verified: {ok}");
        }
    }
    if verified == Some(false) {
        return Err(Failure {
            code: EXIT_VALIDATION,
            message: "reconstruction check failed".into(),
        });
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Factor { a, b, c, verify } => factor_cmd(parse_mat2(a, b, c)?, verify, cli.json),
        Command::Rank {
            a,
            b,
            c,
            exact,
            budget,
        } => {
            let m = parse_mat2(a, b, c)?;
            let report = if exact {
                exact_cp_rank(&m, budget)?
            } else {
                upper_bound_report(&m)?
            };
            print_json(&report);
            Ok(())
        }
        Command::Squares { x } => {
            if x > MAX_ENTRY {
                return Err(Error::OutOfRange {
                    value: x,
                    max: MAX_ENTRY,
                }
                .into());
            }
            let d = decompose(x);
            print_json(&SquaresOutput {
                x,
                count: d.count(),
                parts: d.parts,
            });
            Ok(())
        }
        Command::Rank1 { matrix } => {
            let text = std::fs::read_to_string(&matrix).map_err(|e| Failure {
                code: EXIT_IO,
                message: format!("{}: {e}", matrix.display()),
            })?;
            let m = parse_matrix_text(&text)?;
            let f = factor_rank1(&m)?;
            #[derive(Serialize)]
            struct Out<'a> {
                count: usize,
                #[serde(flatten)]
                factorization: &'a Factorization,
            }
            print_json(&Out {
                count: f.len(),
                factorization: &f,
            });
            Ok(())
        }
        Command::Scan {
            max_diag,
            exact,
            output,
            format,
            workers,
            budget,
        } => {
            let cfg = ScanConfig {
                max_diag,
                exact,
                output_path: output,
                format: match format {
                    Format::Csv => OutputFormat::Csv,
                    Format::Jsonl => OutputFormat::Jsonl,
                },
                parallelism: workers,
                budget,
            };
            let summary = run_scan(&cfg)?;
            if cli.json {
                print_json(&summary);
            } else {
                let kind = if exact {
                    "exact rank"
                } else {
                    "template bound"
                };
                println!(
                    "{} rows written to {}",
                    summary.rows,
                    cfg.output_path.display()
                );
                println!("max {kind}: {}", summary.max_rank);
                for (rank, n) in &summary.histogram {
                    println!("  {rank:>2}: {n}");
                }
                for (a, b, c) in &summary.witnesses {
                    if a == c {
                        println!("witness ({a},{b},{c})");
                    } else {
                        println!("witness ({a},{b},{c}) and its transpose ({c},{b},{a})");
                    }
                }
                if summary.inconclusive > 0 {
                    println!("inconclusive rows: {}", summary.inconclusive);
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
