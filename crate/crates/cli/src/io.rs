//! Plain-text matrix and vector files.
//!
//! Matrix: first line `m n`, then `m` lines of `n` whitespace-separated
//! numbers. Vectors (measurements, signals): a single line of entries.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use onebit_core::{DenseMatrix, SignMeasurement};

pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().context("empty matrix file")?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>().with_context(|| format!("bad dimension {t:?}")))
        .collect::<Result<_>>()?;
    let [m, n] = dims[..] else { bail!("header must be `m n`, got {header:?}") };
    let mut data = Vec::with_capacity(m * n);
    for r in 0..m {
        let line = lines.next().with_context(|| format!("missing matrix row {}", r + 1))?;
        let row = parse_reals(line).with_context(|| format!("matrix row {}", r + 1))?;
        if row.len() != n {
            bail!("matrix row {} has {} entries, expected {n}", r + 1, row.len());
        }
        data.extend(row);
    }
    if let Some(extra) = lines.next() {
        bail!("unexpected trailing line {extra:?}");
    }
    Ok(DenseMatrix::new(m, n, data)?)
}

fn parse_reals(line: &str) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|t| {
            let v: f64 = t.parse().with_context(|| format!("bad number {t:?}"))?;
            if !v.is_finite() {
                bail!("non-finite entry {t:?}");
            }
            Ok(v)
        })
        .collect()
}

pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let line = lines.next().context("empty vector file")?;
    if lines.next().is_some() {
        bail!("vector file must hold a single line");
    }
    parse_reals(line)
}

pub fn parse_measurement(text: &str) -> Result<SignMeasurement> {
    let v = parse_vector(text)?;
    let y = v
        .iter()
        .map(|&e| match e {
            1.0 => Ok(1i8),
            -1.0 => Ok(-1),
            0.0 => Ok(0),
            other => bail!("measurement entry {other} is not in {{-1, 0, 1}}"),
        })
        .collect::<Result<Vec<i8>>>()?;
    Ok(SignMeasurement::new(y)?)
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_matrix(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn read_measurement(path: &Path) -> Result<SignMeasurement> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_measurement(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_vector(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for r in 0..m.rows() {
        let row: Vec<String> = m.row(r).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let m = DenseMatrix::from_rows(&[[2.0, -1.0, 0.0, 2.0], [-1.0, 1.0, 1.0, 0.5]]).unwrap();
        assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("2 2\n1 2\n").is_err());
        assert!(parse_matrix("1 2\n1 x\n").is_err());
        assert!(parse_matrix("1 2\n1 2 3\n").is_err());
        assert!(parse_matrix("1 1\n1\n2\n").is_err());
        assert!(parse_matrix("1 1\nNaN\n").is_err());
        assert!(parse_matrix("1 2 3\n").is_err());
    }

    #[test]
    fn measurements() {
        assert_eq!(parse_measurement("1 -1 0\n").unwrap().y, vec![1, -1, 0]);
        assert!(parse_measurement("1 2").is_err());
        assert!(parse_measurement("1\n1").is_err());
    }
}
