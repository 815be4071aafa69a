//! JSON matrix exchange format: `{"dim": n, "re": [[..]], "im": [[..]]}`.
//!
//! Rows are stored row-major; `im` may be omitted for real matrices.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::operator::{DensityMatrix, HermitianOperator};
use crate::{CMatrix, Complex64, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let dim = m.nrows();
        let re = (0..dim).map(|i| (0..dim).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..dim).map(|i| (0..dim).map(|j| m[(i, j)].im).collect()).collect();
        Self {
            dim,
            re,
            im: Some(im),
        }
    }

    /// Checks shapes and builds the complex matrix. `context` names the
    /// source in error messages.
    pub fn to_matrix(&self, context: &str) -> Result<CMatrix> {
        let parse_err = |message: String| Error::Parse {
            context: context.to_string(),
            message,
        };
        if self.dim == 0 {
            return Err(parse_err("field `dim` must be >= 1".into()));
        }
        check_rows(&self.re, self.dim, "re").map_err(parse_err)?;
        if let Some(im) = &self.im {
            check_rows(im, self.dim, "im").map_err(parse_err)?;
        }
        Ok(CMatrix::from_fn(self.dim, self.dim, |i, j| {
            let im = self.im.as_ref().map_or(0.0, |m| m[i][j]);
            Complex64::new(self.re[i][j], im)
        }))
    }
}

fn check_rows(rows: &[Vec<f64>], dim: usize, field: &str) -> std::result::Result<(), String> {
    if rows.len() != dim {
        return Err(format!(
            "field `{field}` has {} rows, expected {dim}",
            rows.len()
        ));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(format!(
                "field `{field}` row {i} has {} entries, expected {dim}",
                row.len()
            ));
        }
        if let Some(j) = row.iter().position(|x| !x.is_finite()) {
            return Err(format!("field `{field}` entry [{i}][{j}] is not finite"));
        }
    }
    Ok(())
}

/// Parses a JSON matrix document; serde's line/column diagnostics are
/// forwarded in the error.
pub fn parse_matrix(text: &str, context: &str) -> Result<CMatrix> {
    let doc: MatrixJson = serde_json::from_str(text).map_err(|e| Error::Parse {
        context: context.to_string(),
        message: e.to_string(),
    })?;
    doc.to_matrix(context)
}

pub fn read_matrix(path: &Path) -> Result<CMatrix> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix(&text, &path.display().to_string())
}

pub fn read_hermitian(path: &Path) -> Result<HermitianOperator> {
    HermitianOperator::new(read_matrix(path)?)
}

pub fn read_density(path: &Path) -> Result<DensityMatrix> {
    DensityMatrix::from_matrix(read_matrix(path)?)
}

pub fn write_matrix(path: &Path, m: &CMatrix) -> Result<()> {
    let text = serde_json::to_string_pretty(&MatrixJson::from_matrix(m)).map_err(|e| {
        Error::Parse {
            context: path.display().to_string(),
            message: e.to_string(),
        }
    })?;
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let m = CMatrix::from_fn(2, 2, |i, j| Complex64::new((i + j) as f64, i as f64 - j as f64));
        let doc = MatrixJson::from_matrix(&m);
        let text = serde_json::to_string(&doc).unwrap();
        assert_eq!(parse_matrix(&text, "inline").unwrap(), m);
    }

    #[test]
    fn real_only() {
        let m = parse_matrix(r#"{"dim": 2, "re": [[0.5, 0], [0, 0.5]]}"#, "inline").unwrap();
        assert_eq!(m[(1, 1)], Complex64::new(0.5, 0.0));
    }

    #[test]
    fn diagnostics_name_the_field() {
        let err = parse_matrix(r#"{"dim": 2, "re": [[1, 0], [0]]}"#, "rho.json").unwrap_err();
        let text = err.to_string();
        assert!(text.contains("rho.json") && text.contains("row 1"), "{text}");

        let err = parse_matrix("{\"dim\": 2,\n \"re\": [[1, 0], [0, 1]],\n \"im\": oops}", "x").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn non_hermitian_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        std::fs::write(&path, r#"{"dim": 2, "re": [[1, 1], [0, 1]]}"#).unwrap();
        assert!(matches!(read_hermitian(&path), Err(Error::NotHermitian { .. })));
    }
}
