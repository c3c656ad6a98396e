use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::thread;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Handle to a black-box teacher that supplies one soft label per row.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleClient {
    /// Newline-delimited labels, line `i` labelling dataset row `i`.
    AlignedFile { path: PathBuf },
    /// A teacher process speaking the line protocol: the client writes
    /// `n_features=<k>` and then one comma-separated row per line on the
    /// child's stdin, closes it, and reads one number per line from stdout.
    Subprocess { program: String, args: Vec<String> },
}

impl OracleClient {
    pub fn aligned_file(path: impl Into<PathBuf>) -> Self {
        OracleClient::AlignedFile { path: path.into() }
    }

    /// Splits a shell-like command line on whitespace.
    pub fn subprocess(command: &str) -> Result<Self> {
        let mut parts = command.split_whitespace().map(String::from);
        let program = parts
            .next()
            .ok_or_else(|| Error::Config("empty oracle command".into()))?;
        Ok(OracleClient::Subprocess {
            program,
            args: parts.collect(),
        })
    }

    pub fn query(&self, rows: &Dataset) -> Result<Vec<f64>> {
        query_oracle(self, rows)
    }
}

/// Soft labels for every row of `rows`, in row order. Fails without
/// returning partial labels if the teacher answers with the wrong count or
/// a non-finite value.
pub fn query_oracle(client: &OracleClient, rows: &Dataset) -> Result<Vec<f64>> {
    let labels = match client {
        OracleClient::AlignedFile { path } => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_labels(text.lines().filter(|l| !l.trim().is_empty()).map(String::from))?
        }
        OracleClient::Subprocess { program, args } => run_teacher(program, args, rows)?,
    };
    if labels.len() != rows.n_rows() {
        return Err(Error::OracleProtocol {
            row: labels.len().min(rows.n_rows()),
            message: format!("teacher returned {} labels for {} rows", labels.len(), rows.n_rows()),
        });
    }
    Ok(labels)
}

fn parse_labels(lines: impl Iterator<Item = String>) -> Result<Vec<f64>> {
    lines
        .enumerate()
        .map(|(row, line)| {
            let cell = line.trim();
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::OracleData {
                    row,
                    value: cell.to_string(),
                }),
            }
        })
        .collect()
}

fn run_teacher(program: &str, args: &[String], rows: &Dataset) -> Result<Vec<f64>> {
    let mut child = Command::new(program)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|e| Error::io(program, e))?;

    let stdin = child.stdin.take().expect("stdin is piped");
    let payload = rows.clone();
    // Feed rows on a separate thread so a teacher that answers while still
    // reading cannot deadlock on full pipes.
    let writer = thread::spawn(move || -> std::io::Result<()> {
        let mut w = BufWriter::new(stdin);
        writeln!(w, "n_features={}", payload.n_cols())?;
        let cols = payload.columns();
        let mut line = String::new();
        for r in 0..payload.n_rows() {
            line.clear();
            for (i, c) in cols.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&c[r].to_string());
            }
            writeln!(w, "{line}")?;
        }
        w.flush()
    });

    let stdout = child.stdout.take().expect("stdout is piped");
    let mut lines = Vec::with_capacity(rows.n_rows());
    for line in BufReader::new(stdout).lines() {
        lines.push(line.map_err(|e| Error::io(program, e))?);
    }
    let status = child.wait().map_err(|e| Error::io(program, e))?;
    let write_result = writer.join().unwrap_or(Ok(()));

    if !status.success() {
        return Err(Error::OracleProtocol {
            row: lines.len(),
            message: format!("teacher exited with {status}"),
        });
    }
    if let Err(e) = write_result {
        // A teacher that stops reading early shows up as a broken pipe.
        return Err(Error::OracleProtocol {
            row: lines.len(),
            message: format!("could not send rows to teacher: {e}"),
        });
    }
    parse_labels(lines.into_iter())
}
