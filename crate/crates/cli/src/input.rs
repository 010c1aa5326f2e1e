//! Inline matrices and vectors: rows separated by `;`, entries by `,`.
//! Entries are real or complex (`1`, `-0.5`, `2+3i`).

use std::str::FromStr;

use fortin_core::linalg::{CMat, CVec};
use fortin_core::problems::Scalar;
use num_complex::Complex64;
use serde_json::Value;

use crate::CliError;

fn parse_entry(what: &str, s: &str) -> Result<Complex64, CliError> {
    let s = s.trim();
    Complex64::from_str(s).map_err(|_| CliError::input(format!("{what}: cannot parse entry {s:?}")))
}

pub fn parse_matrix(what: &str, s: &str) -> Result<CMat, CliError> {
    let rows: Vec<Vec<Complex64>> = s
        .split(';')
        .map(|row| row.split(',').map(|e| parse_entry(what, e)).collect())
        .collect::<Result<_, _>>()?;
    let width = rows[0].len();
    if let Some(i) = rows.iter().position(|r| r.len() != width) {
        return Err(CliError::input(format!(
            "{what}: row {i} has {} entries, expected {width}",
            rows[i].len()
        )));
    }
    Ok(CMat::from_fn(rows.len(), width, |i, j| rows[i][j]))
}

pub fn parse_vector(what: &str, s: &str) -> Result<CVec, CliError> {
    let entries: Vec<Complex64> = s.split(',').map(|e| parse_entry(what, e)).collect::<Result<_, _>>()?;
    Ok(CVec::from_vec(entries))
}

/// A matrix in the problem-file number format.
pub fn matrix_value(m: &CMat) -> Value {
    let rows: Vec<Vec<Scalar>> = m.row_iter().map(|r| r.iter().map(|z| Scalar(*z)).collect()).collect();
    serde_json::to_value(rows).expect("scalars serialize")
}

pub fn vector_value(v: &CVec) -> Value {
    serde_json::to_value(v.iter().map(|z| Scalar(*z)).collect::<Vec<_>>()).expect("scalars serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_real_and_complex_entries() {
        let m = parse_matrix("m", "1, 2+1i; -3,0.5").unwrap();
        assert_eq!(m.shape(), (2, 2));
        assert_eq!(m[(0, 1)], Complex64::new(2.0, 1.0));
        assert_eq!(m[(1, 0)], Complex64::new(-3.0, 0.0));
        assert_eq!(parse_vector("z", "1,-2").unwrap().len(), 2);
    }

    #[test]
    fn rejects_ragged_and_garbage() {
        assert_eq!(parse_matrix("m", "1,2;3").unwrap_err().code, 2);
        assert!(parse_matrix("m", "1,x").is_err());
        assert!(parse_vector("z", "").is_err());
    }

    #[test]
    fn values_use_file_number_format() {
        let v = vector_value(&CVec::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)]));
        assert_eq!(v.to_string(), "[1.0,[0.0,2.0]]");
    }
}
