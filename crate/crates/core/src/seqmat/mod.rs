//! Spreading-matrix construction and analysis.
//!
//! Every user owns one column of a binary `L x N` matrix; the column support
//! is the set of time-slots the user repeats its packet on. Matrices are
//! built as regular LDPC parity-check matrices (progressive edge growth) and
//! analysed through their short-cycle census, since length-4 cycles directly
//! degrade the cover decoder.

mod census;
mod io;
mod peg;
mod search;

pub use census::cycle_census;
pub use io::{read_matrix, write_matrix};
pub use peg::construct_peg;
pub use search::construct_with_cycle_profile;

use thiserror::Error;

/// Errors produced by matrix construction and I/O.
#[derive(Debug, Error)]
pub enum SeqmatError {
    /// Construction parameters cannot yield a sparse overloaded matrix.
    #[error("infeasible dimensions: rows={rows}, cols={cols}, col_weight={col_weight} (need 2 <= col_weight < rows < cols)")]
    InfeasibleDimensions {
        rows: usize,
        cols: usize,
        col_weight: usize,
    },
    /// The randomized cycle-profile search ran out of attempts.
    #[error("cycle profile {target:?} not reached after {attempts} swap attempts (best census {best:?})")]
    ProfileUnreachable {
        attempts: usize,
        target: CycleCensus,
        best: CycleCensus,
    },
    /// A column description is inconsistent with the matrix dimensions.
    #[error("invalid matrix data: {0}")]
    InvalidMatrix(String),
    /// Matrix file could not be read or written.
    #[error("matrix file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// Matrix file contents do not follow the expected format.
    #[error("matrix file {path}: {reason}")]
    Parse { path: String, reason: String },
}

/// Binary `L x N` spreading matrix stored by column support.
///
/// Row and column indices are 0-based in memory; the on-disk format is
/// 1-based. Columns are protocol sequences, rows are time-slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpreadingMatrix {
    rows: usize,
    cols: usize,
    col_support: Vec<Vec<usize>>,
}

impl SpreadingMatrix {
    /// Builds a matrix from per-column row supports, validating ranges.
    pub fn from_columns(
        rows: usize,
        cols: usize,
        col_support: Vec<Vec<usize>>,
    ) -> Result<Self, SeqmatError> {
        if rows == 0 || cols == 0 {
            return Err(SeqmatError::InvalidMatrix(
                "matrix dimensions must be positive".into(),
            ));
        }
        if col_support.len() != cols {
            return Err(SeqmatError::InvalidMatrix(format!(
                "expected {} columns, got {}",
                cols,
                col_support.len()
            )));
        }
        let mut col_support = col_support;
        for (u, support) in col_support.iter_mut().enumerate() {
            support.sort_unstable();
            if support.windows(2).any(|w| w[0] == w[1]) {
                return Err(SeqmatError::InvalidMatrix(format!(
                    "column {u} has a repeated row index"
                )));
            }
            if support.last().is_some_and(|&l| l >= rows) {
                return Err(SeqmatError::InvalidMatrix(format!(
                    "column {u} references a row >= {rows}"
                )));
            }
        }
        Ok(Self {
            rows,
            cols,
            col_support,
        })
    }

    /// Number of time-slots `L`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of coexisting users `N`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Ratio `r = L / N`.
    pub fn ratio(&self) -> f64 {
        self.rows as f64 / self.cols as f64
    }

    /// Ascending row indices of column `u`.
    pub fn col_support(&self, u: usize) -> &[usize] {
        &self.col_support[u]
    }

    /// All column supports.
    pub fn col_supports(&self) -> &[Vec<usize>] {
        &self.col_support
    }

    /// True when slot `l` is part of user `u`'s access pattern.
    pub fn entry(&self, l: usize, u: usize) -> bool {
        self.col_support[u].binary_search(&l).is_ok()
    }

    /// Column weight when all columns have the same weight.
    pub fn uniform_col_weight(&self) -> Option<usize> {
        let w = self.col_support.first()?.len();
        self.col_support.iter().all(|s| s.len() == w).then_some(w)
    }

    /// Per-row supports (column indices), derived from the column supports.
    pub fn row_supports(&self) -> Vec<Vec<usize>> {
        let mut rows = vec![Vec::new(); self.rows];
        for (u, support) in self.col_support.iter().enumerate() {
            for &l in support {
                rows[l].push(u);
            }
        }
        rows
    }

    /// Per-row weights.
    pub fn row_weights(&self) -> Vec<usize> {
        let mut weights = vec![0usize; self.rows];
        for support in &self.col_support {
            for &l in support {
                weights[l] += 1;
            }
        }
        weights
    }

    pub(crate) fn col_support_mut(&mut self) -> &mut Vec<Vec<usize>> {
        &mut self.col_support
    }
}

/// Checks column regularity and near-regular row weights.
///
/// True iff `col_weight >= 2`, every column sums to `col_weight`, and every
/// row weight is within 1 of the average `N * col_weight / L`.
pub fn validate_regular(matrix: &SpreadingMatrix, col_weight: usize) -> bool {
    if col_weight < 2 {
        return false;
    }
    if matrix
        .col_supports()
        .iter()
        .any(|s| s.len() != col_weight)
    {
        return false;
    }
    let target = (matrix.cols() * col_weight) as f64 / matrix.rows() as f64;
    matrix
        .row_weights()
        .iter()
        .all(|&w| (w as f64 - target).abs() <= 1.0)
}

/// Counts of short cycles in the Tanner graph of a spreading matrix.
///
/// Cycles longer than 8 are never counted; a girth of `None` means the graph
/// has no cycle of length 8 or shorter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CycleCensus {
    pub count_len4: u64,
    pub count_len6: u64,
    pub count_len8: u64,
    /// Smallest cycle length with a nonzero count, if any is <= 8.
    pub girth: Option<u32>,
}

impl CycleCensus {
    /// Builds a census from raw counts, deriving the girth marker.
    pub fn new(count_len4: u64, count_len6: u64, count_len8: u64) -> Self {
        let girth = if count_len4 > 0 {
            Some(4)
        } else if count_len6 > 0 {
            Some(6)
        } else if count_len8 > 0 {
            Some(8)
        } else {
            None
        };
        Self {
            count_len4,
            count_len6,
            count_len8,
            girth,
        }
    }

    /// Counts as a `[len4, len6, len8]` triple.
    pub fn counts(&self) -> [u64; 3] {
        [self.count_len4, self.count_len6, self.count_len8]
    }

    /// L1 distance between two censuses, used by the profile search.
    pub fn distance(&self, other: &CycleCensus) -> u64 {
        self.counts()
            .iter()
            .zip(other.counts().iter())
            .map(|(&a, &b)| a.abs_diff(b))
            .sum()
    }
}
