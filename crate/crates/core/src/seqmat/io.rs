//! Plain-text spreading-matrix files.
//!
//! Line 1: `L N w_c`. Lines 2..=N+1: the `w_c` ascending 1-based row indices
//! of each column. The format is whitespace-tolerant and human-diffable.

use super::{SeqmatError, SpreadingMatrix};
use std::fmt::Write as _;
use std::path::Path;

/// Writes `matrix` in the column-support text format.
///
/// The header records the uniform column weight, so only column-regular
/// matrices are serializable.
pub fn write_matrix(matrix: &SpreadingMatrix, path: &Path) -> Result<(), SeqmatError> {
    let col_weight = matrix.uniform_col_weight().ok_or_else(|| {
        SeqmatError::InvalidMatrix("only column-regular matrices can be serialized".into())
    })?;
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", matrix.rows(), matrix.cols(), col_weight);
    for u in 0..matrix.cols() {
        let line: Vec<String> = matrix
            .col_support(u)
            .iter()
            .map(|&l| (l + 1).to_string())
            .collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    std::fs::write(path, out).map_err(|source| SeqmatError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a matrix written by [`write_matrix`].
pub fn read_matrix(path: &Path) -> Result<SpreadingMatrix, SeqmatError> {
    let text = std::fs::read_to_string(path).map_err(|source| SeqmatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let parse_err = |reason: String| SeqmatError::Parse {
        path: path.display().to_string(),
        reason,
    };

    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| parse_err("empty file".into()))?;
    let fields: Vec<usize> = header
        .split_whitespace()
        .map(|f| f.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| parse_err(format!("bad header {header:?}: {e}")))?;
    let [rows, cols, col_weight] = fields[..] else {
        return Err(parse_err(format!("header {header:?} needs 3 fields")));
    };

    let mut col_support = Vec::with_capacity(cols);
    for (idx, line) in lines.enumerate() {
        let support: Vec<usize> = line
            .split_whitespace()
            .map(|f| f.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| parse_err(format!("column {}: {e}", idx + 1)))?;
        if support.len() != col_weight {
            return Err(parse_err(format!(
                "column {} has {} entries, expected {col_weight}",
                idx + 1,
                support.len()
            )));
        }
        if support.iter().any(|&l| l == 0 || l > rows) {
            return Err(parse_err(format!(
                "column {} has a row index outside 1..={rows}",
                idx + 1
            )));
        }
        col_support.push(support.iter().map(|&l| l - 1).collect());
    }
    if col_support.len() != cols {
        return Err(parse_err(format!(
            "expected {cols} column lines, found {}",
            col_support.len()
        )));
    }
    SpreadingMatrix::from_columns(rows, cols, col_support)
}
