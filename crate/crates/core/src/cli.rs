//! Matrix input parsing and the batch scan harness behind the `intcp` binary.
//!
//! A scan enumerates every doubly nonnegative `(a, b, c)` with
//! `a ≤ c ≤ N` and `0 ≤ b ≤ ⌊√(a·c)⌋` (the swap `a ↔ c` preserves cp-rank),
//! records the template bound and optionally the exact rank, and writes one
//! row per instance in `(a, c, b)` order regardless of worker count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cp2::{self, COLUMN_BOUND};
use crate::error::Error;
use crate::exact_matrix::{Mat2, MatN};
use crate::oracle::{exact_cp_rank_with, OracleConfig};

/// Fixed CSV header of scan output.
pub const CSV_HEADER: &str = "a,b,c,upper,exact,template,nodes";

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("invalid scan configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Matrix(#[from] Error),

    #[error("audit failure at ({a},{b},{c}): {reason}")]
    Audit {
        a: u64,
        b: u64,
        c: u64,
        reason: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub max_diag: u64,
    pub exact: bool,
    pub output_path: PathBuf,
    pub format: OutputFormat,
    pub parallelism: usize,
    pub budget: u64,
}

/// Result of the exact search for one row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exact {
    NotRun,
    Rank(u32),
    Inconclusive,
}

impl Exact {
    pub fn rank(&self) -> Option<u32> {
        match self {
            Exact::Rank(r) => Some(*r),
            _ => None,
        }
    }

    fn csv_field(&self) -> String {
        match self {
            Exact::NotRun => String::new(),
            Exact::Rank(r) => r.to_string(),
            Exact::Inconclusive => "inconclusive".into(),
        }
    }

    fn parse_field(s: &str) -> Option<Exact> {
        match s {
            "" => Some(Exact::NotRun),
            "inconclusive" => Some(Exact::Inconclusive),
            _ => s.parse().ok().map(Exact::Rank),
        }
    }
}

impl Serialize for Exact {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Exact::NotRun => s.serialize_none(),
            Exact::Rank(r) => s.serialize_u32(*r),
            Exact::Inconclusive => s.serialize_str("inconclusive"),
        }
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Rank(u32),
            Tag(String),
        }
        match Option::<Raw>::deserialize(d)? {
            None => Ok(Exact::NotRun),
            Some(Raw::Rank(r)) => Ok(Exact::Rank(r)),
            Some(Raw::Tag(t)) => Exact::parse_field(&t)
                .ok_or_else(|| serde::de::Error::custom(format!("bad exact field {t:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRow {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub upper: u32,
    pub exact: Exact,
    pub template: String,
    pub nodes: Option<u64>,
}

impl ScanRow {
    pub fn to_csv(&self) -> String {
        let nodes = self.nodes.map(|n| n.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.a,
            self.b,
            self.c,
            self.upper,
            self.exact.csv_field(),
            self.template,
            nodes
        )
    }

    pub fn from_csv(line: &str) -> Result<ScanRow, Error> {
        let bad = || Error::Parse(format!("malformed scan row {line:?}"));
        let fields: Vec<&str> = line.split(',').collect();
        let [a, b, c, upper, exact, template, nodes] = fields[..] else {
            return Err(bad());
        };
        let nodes = if nodes.is_empty() {
            None
        } else {
            Some(nodes.parse().map_err(|_| bad())?)
        };
        Ok(ScanRow {
            a: a.parse().map_err(|_| bad())?,
            b: b.parse().map_err(|_| bad())?,
            c: c.parse().map_err(|_| bad())?,
            upper: upper.parse().map_err(|_| bad())?,
            exact: Exact::parse_field(exact).ok_or_else(bad)?,
            template: template.to_string(),
            nodes,
        })
    }

    pub fn to_jsonl(&self) -> String {
        serde_json::to_string(self).expect("scan rows serialize")
    }

    pub fn from_jsonl(line: &str) -> Result<ScanRow, Error> {
        serde_json::from_str(line).map_err(|e| Error::Parse(e.to_string()))
    }

    fn audit(&self) -> Result<(), ScanError> {
        let fail = |reason: String| ScanError::Audit {
            a: self.a,
            b: self.b,
            c: self.c,
            reason,
        };
        if self.upper > COLUMN_BOUND {
            return Err(fail(format!(
                "upper bound {} exceeds {COLUMN_BOUND}",
                self.upper
            )));
        }
        if let Exact::Rank(r) = self.exact {
            if r > self.upper {
                return Err(fail(format!(
                    "exact rank {r} exceeds upper bound {}",
                    self.upper
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ScanSummary {
    pub rows: usize,
    /// Largest exact rank if the scan was exact, otherwise the largest bound.
    pub max_rank: u32,
    pub histogram: BTreeMap<u32, usize>,
    /// Every instance attaining `max_rank`, with `a ≤ c`.
    pub witnesses: Vec<(u64, u64, u64)>,
    pub inconclusive: usize,
}

/// Every doubly nonnegative instance of the grid in `(a, c, b)` order.
pub fn grid(max_diag: u64) -> Vec<(u64, u64)> {
    (0..=max_diag)
        .flat_map(|a| (a..=max_diag).map(move |c| (a, c)))
        .collect()
}

fn scan_pair(a: u64, c: u64, exact: bool, oracle: &OracleConfig) -> Result<Vec<ScanRow>, Error> {
    (0..=(a * c).isqrt())
        .map(|b| {
            let m = Mat2::from_entries(a, b, c)?;
            let f = cp2::factor(&m)?;
            let (exact, nodes) = if exact {
                match exact_cp_rank_with(&m, oracle) {
                    Ok(r) => (Exact::Rank(r.rank), Some(r.nodes_explored)),
                    Err(Error::Inconclusive { nodes, .. }) => (Exact::Inconclusive, Some(nodes)),
                    Err(e) => return Err(e),
                }
            } else {
                (Exact::NotRun, None)
            };
            Ok(ScanRow {
                a,
                b,
                c,
                upper: f.len() as u32,
                exact,
                template: f.method().to_string(),
                nodes,
            })
        })
        .collect()
}

/// Computes every row of the scan; output order is independent of the
/// worker count.
pub fn scan_rows(cfg: &ScanConfig) -> Result<Vec<ScanRow>, ScanError> {
    if cfg.max_diag < 1 {
        return Err(ScanError::Config("max_diag must be at least 1".into()));
    }
    let oracle = OracleConfig {
        budget: cfg.budget,
        max_diag: cfg.max_diag.max(crate::oracle::DEFAULT_MAX_DIAG),
        dnn_prune: true,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism.max(1))
        .build()
        .map_err(|e| ScanError::Config(e.to_string()))?;
    let pairs = grid(cfg.max_diag);
    let chunks: Vec<Vec<ScanRow>> = pool.install(|| {
        pairs
            .par_iter()
            .map(|&(a, c)| scan_pair(a, c, cfg.exact, &oracle))
            .collect::<Result<_, Error>>()
    })?;
    Ok(chunks.into_iter().flatten().collect())
}

pub fn summarize(rows: &[ScanRow], exact: bool) -> ScanSummary {
    let mut summary = ScanSummary {
        rows: rows.len(),
        ..Default::default()
    };
    for row in rows {
        let rank = if exact {
            row.exact.rank()
        } else {
            Some(row.upper)
        };
        let Some(rank) = rank else {
            summary.inconclusive += 1;
            continue;
        };
        *summary.histogram.entry(rank).or_default() += 1;
        if rank > summary.max_rank {
            summary.max_rank = rank;
            summary.witnesses.clear();
        }
        if rank == summary.max_rank {
            summary.witnesses.push((row.a, row.b, row.c));
        }
    }
    summary
}

/// Serializes rows after auditing each one.
pub fn write_rows<W: Write>(
    out: &mut W,
    rows: &[ScanRow],
    format: OutputFormat,
) -> Result<(), ScanError> {
    let mut buf = String::new();
    if format == OutputFormat::Csv {
        buf.push_str(CSV_HEADER);
        buf.push('\n');
    }
    for row in rows {
        row.audit()?;
        let line = match format {
            OutputFormat::Csv => row.to_csv(),
            OutputFormat::Jsonl => row.to_jsonl(),
        };
        writeln!(buf, "{line}").expect("writing to a String");
    }
    out.write_all(buf.as_bytes())
        .map_err(|source| ScanError::Io {
            path: PathBuf::new(),
            source,
        })
}

/// Parses scan output back into rows.
pub fn read_rows(text: &str, format: OutputFormat) -> Result<Vec<ScanRow>, Error> {
    let mut lines = text.lines();
    if format == OutputFormat::Csv {
        match lines.next() {
            Some(CSV_HEADER) => {}
            other => return Err(Error::Parse(format!("unexpected CSV header {other:?}"))),
        }
    }
    lines
        .map(|line| match format {
            OutputFormat::Csv => ScanRow::from_csv(line),
            OutputFormat::Jsonl => ScanRow::from_jsonl(line),
        })
        .collect()
}

/// Path of the run-metadata file written next to the scan output.
pub fn metadata_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

#[derive(Serialize)]
struct Metadata<'a> {
    max_diag: u64,
    exact: bool,
    format: OutputFormat,
    parallelism: usize,
    budget: u64,
    summary: &'a ScanSummary,
    note: &'static str,
}

/// Runs the scan, writes the data file and its metadata sidecar, and
/// returns the summary.
pub fn run_scan(cfg: &ScanConfig) -> Result<ScanSummary, ScanError> {
    let rows = scan_rows(cfg)?;
    let summary = summarize(&rows, cfg.exact);

    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ScanError::Io { path, source }
    };
    let file = File::create(&cfg.output_path).map_err(io_err(&cfg.output_path))?;
    let mut out = BufWriter::new(file);
    match write_rows(&mut out, &rows, cfg.format) {
        Err(ScanError::Io { source, .. }) => return Err(io_err(&cfg.output_path)(source)),
        other => other?,
    }
    out.flush().map_err(io_err(&cfg.output_path))?;

    let meta_path = metadata_path(&cfg.output_path);
    let meta = Metadata {
        max_diag: cfg.max_diag,
        exact: cfg.exact,
        format: cfg.format,
        parallelism: cfg.parallelism,
        budget: cfg.budget,
        summary: &summary,
        note: "instances enumerated with a <= c; each witness implies its transpose",
    };
    let json = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    std::fs::write(&meta_path, json + "\n").map_err(io_err(&meta_path))?;
    Ok(summary)
}

/// Validates `--a/--b/--c` values.
pub fn parse_mat2(a: i64, b: i64, c: i64) -> Result<Mat2, Error> {
    Mat2::new(a, b, c)
}

/// Parses a whitespace-separated square symmetric matrix, one row per line.
pub fn parse_matrix_text(text: &str) -> Result<MatN, Error> {
    let rows = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            line.split_whitespace()
                .map(|tok| {
                    tok.parse::<i64>().map_err(|_| {
                        Error::Parse(format!("line {}: malformed integer {tok:?}", i + 1))
                    })
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    if rows.is_empty() {
        return Err(Error::Parse("empty matrix".into()));
    }
    MatN::new(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_matrix::is_rank1_dnn;

    fn cfg(max_diag: u64, exact: bool) -> ScanConfig {
        ScanConfig {
            max_diag,
            exact,
            output_path: PathBuf::new(),
            format: OutputFormat::Csv,
            parallelism: 2,
            budget: crate::oracle::DEFAULT_BUDGET,
        }
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_mat2(8, 1, 8).unwrap(), Mat2::new(8, 1, 8).unwrap());
        assert_eq!(
            parse_mat2(1, 2, 1).unwrap_err().to_string(),
            "not PSD: 1·1 < 4"
        );
        assert!(matches!(parse_mat2(-1, 0, 1), Err(Error::Negative { .. })));
        let m = parse_matrix_text("4 6\n6 9\n").unwrap();
        assert!(is_rank1_dnn(&m));
        assert!(matches!(
            parse_matrix_text("1 2\n3 4"),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(matches!(
            parse_matrix_text("1 x\n1 4"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(parse_matrix_text(""), Err(Error::Parse(_))));
    }

    #[test]
    fn tiny_exact_grid() {
        let rows = scan_rows(&cfg(1, true)).unwrap();
        let keys: Vec<_> = rows.iter().map(|r| (r.a, r.b, r.c)).collect();
        assert_eq!(keys, vec![(0, 0, 0), (0, 0, 1), (1, 0, 1), (1, 1, 1)]);
        let s = summarize(&rows, true);
        assert_eq!(s.max_rank, 2);
        assert_eq!(s.witnesses, vec![(1, 0, 1)]);
    }

    #[test]
    fn small_upper_grid() {
        let rows = scan_rows(&cfg(2, false)).unwrap();
        assert!(rows
            .iter()
            .all(|r| r.upper <= 4 && r.exact == Exact::NotRun && r.nodes.is_none()));
    }

    #[test]
    fn exact_grid_eight() {
        let rows = scan_rows(&cfg(8, true)).unwrap();
        let s = summarize(&rows, true);
        assert_eq!(s.max_rank, 9);
        assert_eq!(s.witnesses, vec![(8, 1, 8)]);
        assert_eq!(s.inconclusive, 0);
    }

    #[test]
    fn rows_round_trip() {
        let mut rows = scan_rows(&cfg(6, true)).unwrap();
        rows.push(ScanRow {
            a: 1,
            b: 0,
            c: 1,
            upper: 2,
            exact: Exact::Inconclusive,
            template: "base".into(),
            nodes: Some(7),
        });
        for format in [OutputFormat::Csv, OutputFormat::Jsonl] {
            let mut out = Vec::new();
            write_rows(&mut out, &rows, format).unwrap();
            let back = read_rows(std::str::from_utf8(&out).unwrap(), format).unwrap();
            assert_eq!(back, rows);
        }
    }

    #[test]
    fn writer_audits_rows() {
        let bad = ScanRow {
            a: 8,
            b: 1,
            c: 8,
            upper: 9,
            exact: Exact::Rank(10),
            template: "base".into(),
            nodes: None,
        };
        assert!(matches!(
            write_rows(
                &mut Vec::new(),
                std::slice::from_ref(&bad),
                OutputFormat::Csv
            ),
            Err(ScanError::Audit { .. })
        ));
        let bad = ScanRow {
            upper: 12,
            exact: Exact::NotRun,
            ..bad
        };
        assert!(matches!(
            write_rows(&mut Vec::new(), &[bad], OutputFormat::Jsonl),
            Err(ScanError::Audit { .. })
        ));
    }

    #[test]
    fn rejects_empty_grid() {
        assert!(matches!(
            scan_rows(&cfg(0, false)),
            Err(ScanError::Config(_))
        ));
    }
}
