//! Points files, partition files and run descriptors.
//!
//! A points file is CSV with one point per row (`x1,x2,...,xd`), or a
//! matrix file whose first row is `matrix,n` followed by `n` rows of `n`
//! distances. Row order defines the default point order.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{MetricError, MetricInstance, MetricKind, PointId, ValidationPolicy};
use crate::mpcsim::{MpcError, Partition};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Metric { path: PathBuf, source: MetricError },
    #[error(transparent)]
    Partition(#[from] MpcError),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    let wrap = |source| IoError::File {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(path).map_err(wrap)?;
    f.write_all(text.as_bytes()).map_err(wrap)
}

fn csv_rows(path: &Path, text: &str) -> Result<Vec<(usize, Vec<String>)>, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| IoError::Parse {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let fields: Vec<String> = record.iter().map(str::to_string).collect();
        if fields.iter().all(String::is_empty) {
            continue;
        }
        rows.push((line, fields));
    }
    Ok(rows)
}

fn parse_floats(path: &Path, line: usize, fields: &[String]) -> Result<Vec<f64>, IoError> {
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>().map_err(|_| IoError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("not a number: {f:?}"),
            })
        })
        .collect()
}

/// Parse points-file contents; `path` is only used in error messages.
pub fn parse_points(
    path: &Path,
    text: &str,
    policy: &ValidationPolicy,
) -> Result<MetricInstance, IoError> {
    let rows = csv_rows(path, text)?;
    let metric_err = |source| IoError::Metric {
        path: path.to_path_buf(),
        source,
    };
    let Some((first_line, first)) = rows.first() else {
        return Err(metric_err(MetricError::Empty));
    };
    if first[0].eq_ignore_ascii_case("matrix") {
        let n = first
            .get(1)
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| IoError::Parse {
                path: path.to_path_buf(),
                line: *first_line,
                message: "matrix header must be `matrix,n`".into(),
            })?;
        let body = &rows[1..];
        if body.len() != n {
            return Err(IoError::Parse {
                path: path.to_path_buf(),
                line: *first_line,
                message: format!("header announces {n} rows, found {}", body.len()),
            });
        }
        let matrix = body
            .iter()
            .map(|(line, fields)| parse_floats(path, *line, fields))
            .collect::<Result<Vec<_>, _>>()?;
        MetricInstance::from_matrix(matrix, policy).map_err(metric_err)
    } else {
        let points = rows
            .iter()
            .map(|(line, fields)| parse_floats(path, *line, fields))
            .collect::<Result<Vec<_>, _>>()?;
        MetricInstance::from_coordinates(points).map_err(metric_err)
    }
}

pub fn read_points(path: &Path, policy: &ValidationPolicy) -> Result<MetricInstance, IoError> {
    parse_points(path, &read_text(path)?, policy)
}

/// Render an instance in the points-file format matching its metric kind.
pub fn format_points(instance: &MetricInstance) -> String {
    let join = |row: &[f64]| row.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
    let mut out = String::new();
    match instance.kind() {
        MetricKind::Euclidean => {
            for p in instance.ids() {
                out.push_str(&join(instance.coordinates(p).expect("euclidean")));
                out.push('\n');
            }
        }
        MetricKind::Matrix => {
            out.push_str(&format!("matrix,{}\n", instance.len()));
            for row in instance.to_matrix() {
                out.push_str(&join(&row));
                out.push('\n');
            }
        }
    }
    out
}

pub fn write_points(path: &Path, instance: &MetricInstance) -> Result<(), IoError> {
    write_text(path, &format_points(instance))
}

/// Partition file: rows of `point,machine` with 1-based machines. Every
/// point of the instance must appear exactly once.
pub fn read_partition(path: &Path, n: usize, machines: usize) -> Result<Partition, IoError> {
    let text = read_text(path)?;
    let parse_err = |line: usize, message: String| IoError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut assignment = vec![0usize; n];
    for (line, fields) in csv_rows(path, &text)? {
        let [p, m] = fields.as_slice() else {
            return Err(parse_err(line, "expected `point,machine`".into()));
        };
        let p: usize = p
            .parse()
            .map_err(|_| parse_err(line, format!("bad point {p:?}")))?;
        let m: usize = m
            .parse()
            .map_err(|_| parse_err(line, format!("bad machine {m:?}")))?;
        if p >= n {
            return Err(parse_err(line, format!("point {p} outside 0..{n}")));
        }
        if assignment[p] != 0 {
            return Err(parse_err(line, format!("point {p} assigned twice")));
        }
        assignment[p] = m;
    }
    if let Some(p) = assignment.iter().position(|&m| m == 0) {
        return Err(parse_err(0, format!("point {} has no machine", PointId(p))));
    }
    Ok(Partition::from_assignment(assignment, machines)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionStrategy {
    #[default]
    RoundRobin,
    Random,
    File,
}

/// JSON description of one `solve` invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDescriptor {
    pub instance: PathBuf,
    pub k: usize,
    #[serde(rename = "L", alias = "machines", default = "one")]
    pub machines: usize,
    #[serde(default)]
    pub memory: Option<usize>,
    #[serde(default)]
    pub partition: PartitionStrategy,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub partition_file: Option<PathBuf>,
    pub algorithm: String,
    #[serde(default)]
    pub compat_literal_alg1: bool,
    #[serde(default)]
    pub compat_literal_select: bool,
}

fn one() -> usize {
    1
}

pub fn read_descriptor(path: &Path) -> Result<RunDescriptor, IoError> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<MetricInstance, IoError> {
        parse_points(Path::new("mem.csv"), text, &ValidationPolicy::default())
    }

    #[test]
    fn coordinates_file() {
        let m = parse("0,0\n3,4\n\n").unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.distance(PointId(0), PointId(1)), 5.0);
    }

    #[test]
    fn matrix_file() {
        let m = parse("matrix,3\n0,1,2\n1,0,1\n2,1,0\n").unwrap();
        assert_eq!(m.kind(), MetricKind::Matrix);
        assert_eq!(m.distance(PointId(0), PointId(2)), 2.0);
    }

    #[test]
    fn matrix_file_errors() {
        assert!(matches!(
            parse("matrix,3\n0,1\n1,0\n"),
            Err(IoError::Parse { .. })
        ));
        assert!(matches!(parse("matrix\n0\n"), Err(IoError::Parse { .. })));
        assert!(matches!(
            parse("matrix,3\n0,1,10\n1,0,1\n10,1,0\n"),
            Err(IoError::Metric {
                source: MetricError::TriangleViolation { .. },
                ..
            })
        ));
        assert!(matches!(
            parse("0,x\n"),
            Err(IoError::Parse { line: 1, .. })
        ));
        assert!(matches!(parse(""), Err(IoError::Metric { .. })));
    }

    #[test]
    fn format_round_trips() {
        for text in ["0.5,1\n2,-3.25\n", "matrix,2\n0,1.5\n1.5,0\n"] {
            let m = parse(text).unwrap();
            assert_eq!(format_points(&m), text);
        }
    }

    #[test]
    fn descriptor_defaults() {
        let d: RunDescriptor =
            serde_json::from_str(r#"{"instance": "a.csv", "k": 2, "algorithm": "alg2"}"#).unwrap();
        assert_eq!(d.machines, 1);
        assert_eq!(d.partition, PartitionStrategy::RoundRobin);
        let d: RunDescriptor = serde_json::from_str(
            r#"{"instance": "a.csv", "k": 2, "L": 3, "partition": "random", "seed": 4, "algorithm": "alg2"}"#,
        )
        .unwrap();
        assert_eq!(
            (d.machines, d.partition, d.seed),
            (3, PartitionStrategy::Random, 4)
        );
    }

    #[test]
    fn partition_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("part.csv");
        fs::write(&path, "0,2\n1,1\n2,2\n").unwrap();
        let p = read_partition(&path, 3, 2).unwrap();
        assert_eq!(
            p.sets(),
            vec![vec![PointId(1)], vec![PointId(0), PointId(2)]]
        );
        fs::write(&path, "0,2\n2,2\n").unwrap();
        assert!(read_partition(&path, 3, 2).is_err());
        fs::write(&path, "0,3\n1,1\n2,2\n").unwrap();
        assert!(read_partition(&path, 3, 2).is_err());
    }
}
