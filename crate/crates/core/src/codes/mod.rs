//! Parity-check matrices over GF(2): alist ingestion, syndrome arithmetic and
//! codeword enumeration for small codes.
//!
//! A [`ParityCheckMatrix`] is immutable after construction and safe to share
//! read-only across decode workers. The code dimension `k` is always derived
//! from the GF(2) rank of the matrix, never trusted from file metadata, so
//! overcomplete matrices (more rows than `n - k`) are handled transparently.

mod alist;
pub mod bank;

pub use alist::{parse_alist, parse_alist_named, parse_dense, to_alist};

use std::fmt;
use thiserror::Error;

/// Errors from code construction, parsing and GF(2) arithmetic.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodeError {
    /// Input text violates the alist or dense grammar. Carries the 1-based
    /// line number where parsing failed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// A vector length does not match the matrix dimension it is used with.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    /// Codeword enumeration refused: the block length exceeds the guard.
    #[error("refusing to enumerate codewords for n = {n} (limit {limit})")]
    TooLarge { n: usize, limit: usize },
    /// A matrix failed a structural invariant.
    #[error("invalid matrix: {0}")]
    Invalid(String),
}

/// A vector of bits, each exactly 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitVector(Vec<u8>);

impl BitVector {
    pub fn new(bits: Vec<u8>) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");
        BitVector(bits)
    }

    pub fn zeros(len: usize) -> Self {
        BitVector(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    /// Elementwise XOR. Panics if lengths differ.
    pub fn xor(&self, other: &BitVector) -> BitVector {
        assert_eq!(self.0.len(), other.0.len(), "xor length mismatch");
        BitVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a ^ b)
                .collect(),
        )
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl From<Vec<u8>> for BitVector {
    fn from(bits: Vec<u8>) -> Self {
        BitVector::new(bits)
    }
}

/// A binary m x n parity-check matrix defining a linear block code.
///
/// Stored as per-row and per-column support lists (the nonzero coordinates),
/// which is what every message-passing decoder consumes. Construction
/// validates that every row and column carries at least one nonzero entry
/// and computes the code rate from the GF(2) rank.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityCheckMatrix {
    name: String,
    num_checks: usize,
    num_vars: usize,
    /// Sorted column indices of the ones in each row.
    rows: Vec<Vec<usize>>,
    /// Sorted row indices of the ones in each column.
    cols: Vec<Vec<usize>>,
    rank: usize,
}

impl ParityCheckMatrix {
    /// Builds a matrix from the coordinates of its ones.
    pub fn from_entries(
        name: impl Into<String>,
        num_checks: usize,
        num_vars: usize,
        entries: &[(usize, usize)],
    ) -> Result<Self, CodeError> {
        if num_checks == 0 || num_vars == 0 {
            return Err(CodeError::Invalid("matrix dimensions must be positive".into()));
        }
        let mut rows = vec![Vec::new(); num_checks];
        let mut cols = vec![Vec::new(); num_vars];
        for &(r, c) in entries {
            if r >= num_checks || c >= num_vars {
                return Err(CodeError::Invalid(format!(
                    "entry ({r}, {c}) out of bounds for {num_checks} x {num_vars}"
                )));
            }
            rows[r].push(c);
            cols[c].push(r);
        }
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
        }
        for col in &mut cols {
            col.sort_unstable();
            col.dedup();
        }
        if let Some(r) = rows.iter().position(|r| r.is_empty()) {
            return Err(CodeError::Invalid(format!("row {r} has no nonzero entry")));
        }
        if let Some(c) = cols.iter().position(|c| c.is_empty()) {
            return Err(CodeError::Invalid(format!("column {c} has no nonzero entry")));
        }
        let rank = rank_gf2(num_vars, &rows);
        let k = num_vars - rank;
        if k == 0 || k == num_vars {
            // rate must lie strictly inside (0,1)
            return Err(CodeError::Invalid(format!(
                "degenerate code: n = {num_vars}, rank = {rank}"
            )));
        }
        Ok(ParityCheckMatrix {
            name: name.into(),
            num_checks,
            num_vars,
            rows,
            cols,
            rank,
        })
    }

    /// Builds from a dense row-major 0/1 slice of length `num_checks * num_vars`.
    pub fn from_dense(
        name: impl Into<String>,
        num_checks: usize,
        num_vars: usize,
        data: &[u8],
    ) -> Result<Self, CodeError> {
        if data.len() != num_checks * num_vars {
            return Err(CodeError::Invalid(format!(
                "dense data length {} != {num_checks} * {num_vars}",
                data.len()
            )));
        }
        let entries: Vec<(usize, usize)> = data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, _)| (i / num_vars, i % num_vars))
            .collect();
        Self::from_entries(name, num_checks, num_vars, &entries)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_checks(&self) -> usize {
        self.num_checks
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// GF(2) rank, computed by Gaussian elimination at construction.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Code dimension `k = n - rank`.
    pub fn dimension(&self) -> usize {
        self.num_vars - self.rank
    }

    /// Code rate `k / n`, strictly inside (0, 1).
    pub fn code_rate(&self) -> f64 {
        self.dimension() as f64 / self.num_vars as f64
    }

    /// Sorted column indices of the ones in row `r`.
    pub fn row(&self, r: usize) -> &[usize] {
        &self.rows[r]
    }

    /// Sorted row indices of the ones in column `c`.
    pub fn col(&self, c: usize) -> &[usize] {
        &self.cols[c]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<usize>] {
        &self.cols
    }

    /// Total number of ones (= Tanner graph edges).
    pub fn num_ones(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn max_col_degree(&self) -> usize {
        self.cols.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    pub fn max_row_degree(&self) -> usize {
        self.rows.iter().map(|r| r.len()).max().unwrap_or(0)
    }

    /// Syndrome H v^T over GF(2): component `c` is the XOR of `v` restricted
    /// to row `c`'s support.
    pub fn syndrome(&self, v: &BitVector) -> Result<BitVector, CodeError> {
        if v.len() != self.num_vars {
            return Err(CodeError::LengthMismatch {
                expected: self.num_vars,
                got: v.len(),
            });
        }
        let bits = v.bits();
        let s = self
            .rows
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &c| acc ^ bits[c]))
            .collect();
        Ok(BitVector(s))
    }

    /// True iff `v` has zero syndrome.
    pub fn is_codeword(&self, v: &BitVector) -> Result<bool, CodeError> {
        Ok(self.syndrome(v)?.is_zero())
    }

    /// Enumerates all `2^k` codewords by spanning the GF(2) null space.
    ///
    /// Guarded to `n <= 24` since the output is exponential in `k`.
    pub fn enumerate_codewords(&self) -> Result<Vec<BitVector>, CodeError> {
        const LIMIT: usize = 24;
        if self.num_vars > LIMIT {
            return Err(CodeError::TooLarge {
                n: self.num_vars,
                limit: LIMIT,
            });
        }
        let basis = self.nullspace_basis();
        let k = basis.len();
        let n = self.num_vars;
        let mut words = Vec::with_capacity(1usize << k);
        // Gray-code walk: one basis XOR per step.
        let mut current = vec![0u8; n];
        words.push(BitVector(current.clone()));
        for i in 1..(1usize << k) {
            let flip = i.trailing_zeros() as usize;
            for &c in &basis[flip] {
                current[c] ^= 1;
            }
            words.push(BitVector(current.clone()));
        }
        Ok(words)
    }

    /// Basis of the GF(2) null space, each vector as a support list.
    fn nullspace_basis(&self) -> Vec<Vec<usize>> {
        let n = self.num_vars;
        let words = n.div_ceil(64);
        let mut mat: Vec<Vec<u64>> = self
            .rows
            .iter()
            .map(|row| {
                let mut w = vec![0u64; words];
                for &c in row {
                    w[c / 64] |= 1 << (c % 64);
                }
                w
            })
            .collect();
        // Row-reduce, tracking pivot columns.
        let mut pivot_of_col: Vec<Option<usize>> = vec![None; n];
        let mut pivot_row = 0;
        for col in 0..n {
            let Some(r) = (pivot_row..mat.len())
                .find(|&r| mat[r][col / 64] >> (col % 64) & 1 == 1)
            else {
                continue;
            };
            mat.swap(pivot_row, r);
            for r2 in 0..mat.len() {
                if r2 != pivot_row && mat[r2][col / 64] >> (col % 64) & 1 == 1 {
                    let (a, b) = if r2 < pivot_row {
                        let (lo, hi) = mat.split_at_mut(pivot_row);
                        (&mut lo[r2], &hi[0])
                    } else {
                        let (lo, hi) = mat.split_at_mut(r2);
                        (&mut hi[0], &lo[pivot_row])
                    };
                    for (x, y) in a.iter_mut().zip(b) {
                        *x ^= y;
                    }
                }
            }
            pivot_of_col[col] = Some(pivot_row);
            pivot_row += 1;
        }
        // Free columns generate the null space.
        let mut basis = Vec::new();
        for free in 0..n {
            if pivot_of_col[free].is_some() {
                continue;
            }
            let mut support = vec![free];
            for (col, &p) in pivot_of_col.iter().enumerate() {
                if let Some(pr) = p {
                    if mat[pr][free / 64] >> (free % 64) & 1 == 1 {
                        support.push(col);
                    }
                }
            }
            support.sort_unstable();
            basis.push(support);
        }
        basis
    }
}

/// GF(2) rank of a matrix given as per-row support lists.
fn rank_gf2(num_vars: usize, rows: &[Vec<usize>]) -> usize {
    let words = num_vars.div_ceil(64);
    let mut mat: Vec<Vec<u64>> = rows
        .iter()
        .map(|row| {
            let mut w = vec![0u64; words];
            for &c in row {
                w[c / 64] |= 1 << (c % 64);
            }
            w
        })
        .collect();
    let mut rank = 0;
    for col in 0..num_vars {
        let Some(r) = (rank..mat.len()).find(|&r| mat[r][col / 64] >> (col % 64) & 1 == 1) else {
            continue;
        };
        mat.swap(rank, r);
        for r2 in rank + 1..mat.len() {
            if mat[r2][col / 64] >> (col % 64) & 1 == 1 {
                let (lo, hi) = mat.split_at_mut(r2);
                for (x, y) in hi[0].iter_mut().zip(&lo[rank]) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
        if rank == mat.len() {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn repetition3() -> ParityCheckMatrix {
        ParityCheckMatrix::from_dense("REP(3)", 2, 3, &[1, 1, 0, 0, 1, 1]).unwrap()
    }

    fn hamming74() -> ParityCheckMatrix {
        #[rustfmt::skip]
        let h = [
            1, 0, 0, 1, 1, 0, 1,
            0, 1, 0, 1, 0, 1, 1,
            0, 0, 1, 0, 1, 1, 1,
        ];
        ParityCheckMatrix::from_dense("HAMMING(7,4)", 3, 7, &h).unwrap()
    }

    #[test]
    fn syndrome_of_zero_vector_is_zero() {
        let h = repetition3();
        let s = h.syndrome(&BitVector::zeros(3)).unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn syndrome_of_single_error_repetition() {
        let h = repetition3();
        let s = h.syndrome(&BitVector::new(vec![1, 0, 0])).unwrap();
        assert_eq!(s.bits(), &[1, 0]);
    }

    #[test]
    fn syndrome_rejects_length_mismatch() {
        let h = repetition3();
        let err = h.syndrome(&BitVector::zeros(4)).unwrap_err();
        assert_eq!(err, CodeError::LengthMismatch { expected: 3, got: 4 });
    }

    #[test]
    fn syndrome_is_linear() {
        let h = hamming74();
        let v = BitVector::new(vec![1, 0, 1, 1, 0, 0, 1]);
        let w = BitVector::new(vec![0, 1, 1, 0, 1, 0, 1]);
        let lhs = h.syndrome(&v.xor(&w)).unwrap();
        let rhs = h.syndrome(&v).unwrap().xor(&h.syndrome(&w).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn repetition_codewords() {
        let h = repetition3();
        let words = h.enumerate_codewords().unwrap();
        assert_eq!(words.len(), 2);
        assert!(words.contains(&BitVector::zeros(3)));
        assert!(words.contains(&BitVector::new(vec![1, 1, 1])));
    }

    #[test]
    fn hamming_has_16_codewords_all_valid() {
        let h = hamming74();
        let words = h.enumerate_codewords().unwrap();
        assert_eq!(words.len(), 16);
        for w in &words {
            assert!(h.is_codeword(w).unwrap());
        }
        // Brute-force oracle: count zero-syndrome vectors over all 2^7.
        let mut count = 0;
        for x in 0u32..(1 << 7) {
            let bits: Vec<u8> = (0..7).map(|i| ((x >> i) & 1) as u8).collect();
            if h.syndrome(&BitVector::new(bits)).unwrap().is_zero() {
                count += 1;
            }
        }
        assert_eq!(count, 16);
    }

    #[test]
    fn full_rank_square_identity_is_degenerate() {
        // {00} is the only codeword: rate 0, rejected as degenerate.
        let err = ParityCheckMatrix::from_dense("I2", 2, 2, &[1, 0, 0, 1]).unwrap_err();
        assert!(matches!(err, CodeError::Invalid(_)));
    }

    #[test]
    fn enumerate_refuses_large_n() {
        let entries: Vec<(usize, usize)> = (0..25).map(|c| (0, c)).collect();
        let h = ParityCheckMatrix::from_entries("wide", 1, 25, &entries).unwrap();
        let err = h.enumerate_codewords().unwrap_err();
        assert_eq!(err, CodeError::TooLarge { n: 25, limit: 24 });
    }

    #[test]
    fn rank_of_overcomplete_matrix() {
        // Third row is the sum of the first two: rank 2, k = 1.
        #[rustfmt::skip]
        let h = ParityCheckMatrix::from_dense("over", 3, 3, &[
            1, 1, 0,
            0, 1, 1,
            1, 0, 1,
        ]).unwrap();
        assert_eq!(h.rank(), 2);
        assert_eq!(h.dimension(), 1);
        assert_eq!(h.enumerate_codewords().unwrap().len(), 2);
    }

    #[test]
    fn codeword_count_is_power_of_two() {
        let h = hamming74();
        let count = h.enumerate_codewords().unwrap().len();
        assert!(count.is_power_of_two());
        assert_eq!(count, 1 << h.dimension());
    }

    #[test]
    fn empty_row_rejected() {
        let err = ParityCheckMatrix::from_entries("bad", 2, 2, &[(0, 0), (0, 1)]).unwrap_err();
        assert!(matches!(err, CodeError::Invalid(_)));
    }
}
