//! Reading and writing parity-check matrices in the alist exchange format,
//! plus a plain dense text format for tests.
//!
//! The alist grammar, line by line:
//!
//! ```text
//! n m
//! max_col_deg max_row_deg
//! <n column degrees>
//! <m row degrees>
//! <n lines: 1-based row indices of each column, zero-padded to max_col_deg>
//! <m lines: 1-based column indices of each row, zero-padded to max_row_deg>
//! ```
//!
//! Padding zeros are accepted and skipped, matching the public code-bank
//! files. Parsing cross-checks the column and row lists against each other
//! and against the declared degrees; any disagreement is reported with the
//! offending line number.

use super::{CodeError, ParityCheckMatrix};

struct Lines<'a> {
    iter: std::str::Lines<'a>,
    lineno: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            iter: text.lines(),
            lineno: 0,
        }
    }

    /// Next non-blank line as whitespace-separated usizes.
    fn numbers(&mut self) -> Result<(usize, Vec<usize>), CodeError> {
        loop {
            let line = self.iter.next().ok_or_else(|| CodeError::Parse {
                line: self.lineno + 1,
                msg: "unexpected end of input".into(),
            })?;
            self.lineno += 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut out = Vec::new();
            for tok in line.split_whitespace() {
                let v = tok.parse::<usize>().map_err(|_| CodeError::Parse {
                    line: self.lineno,
                    msg: format!("expected a nonnegative integer, got {tok:?}"),
                })?;
                out.push(v);
            }
            return Ok((self.lineno, out));
        }
    }
}

fn expect_len(
    line: usize,
    what: &str,
    got: usize,
    expected: usize,
) -> Result<(), CodeError> {
    if got != expected {
        return Err(CodeError::Parse {
            line,
            msg: format!("{what}: expected {expected} entries, got {got}"),
        });
    }
    Ok(())
}

/// Parses alist text into a [`ParityCheckMatrix`].
pub fn parse_alist(text: &str) -> Result<ParityCheckMatrix, CodeError> {
    parse_alist_named(text, "alist")
}

/// Like [`parse_alist`] with an explicit code label.
pub fn parse_alist_named(text: &str, name: &str) -> Result<ParityCheckMatrix, CodeError> {
    let mut lines = Lines::new(text);

    let (l, header) = lines.numbers()?;
    expect_len(l, "header", header.len(), 2)?;
    let (n, m) = (header[0], header[1]);
    if n == 0 || m == 0 {
        return Err(CodeError::Parse {
            line: l,
            msg: format!("dimensions must be positive, got n = {n}, m = {m}"),
        });
    }

    let (l, maxdeg) = lines.numbers()?;
    expect_len(l, "max degrees", maxdeg.len(), 2)?;
    let (max_col, max_row) = (maxdeg[0], maxdeg[1]);

    let (l, col_degs) = lines.numbers()?;
    expect_len(l, "column degree list", col_degs.len(), n)?;
    let (l, row_degs) = lines.numbers()?;
    expect_len(l, "row degree list", row_degs.len(), m)?;

    if let Some(d) = col_degs.iter().find(|&&d| d > max_col) {
        return Err(CodeError::Parse {
            line: l - 1,
            msg: format!("column degree {d} exceeds declared maximum {max_col}"),
        });
    }
    if let Some(d) = row_degs.iter().find(|&&d| d > max_row) {
        return Err(CodeError::Parse {
            line: l,
            msg: format!("row degree {d} exceeds declared maximum {max_row}"),
        });
    }

    // Per-column row indices (1-based, zero-padded).
    let mut cols: Vec<Vec<usize>> = Vec::with_capacity(n);
    for c in 0..n {
        let (l, mut idx) = lines.numbers()?;
        idx.retain(|&v| v != 0);
        if idx.len() != col_degs[c] {
            return Err(CodeError::Parse {
                line: l,
                msg: format!(
                    "column {c}: degree list says {} entries, found {}",
                    col_degs[c],
                    idx.len()
                ),
            });
        }
        if let Some(&bad) = idx.iter().find(|&&v| v > m) {
            return Err(CodeError::Parse {
                line: l,
                msg: format!("column {c}: row index {bad} out of range (m = {m})"),
            });
        }
        cols.push(idx.iter().map(|&v| v - 1).collect());
    }

    // Per-row column indices.
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(m);
    for r in 0..m {
        let (l, mut idx) = lines.numbers()?;
        idx.retain(|&v| v != 0);
        if idx.len() != row_degs[r] {
            return Err(CodeError::Parse {
                line: l,
                msg: format!(
                    "row {r}: degree list says {} entries, found {}",
                    row_degs[r],
                    idx.len()
                ),
            });
        }
        if let Some(&bad) = idx.iter().find(|&&v| v > n) {
            return Err(CodeError::Parse {
                line: l,
                msg: format!("row {r}: column index {bad} out of range (n = {n})"),
            });
        }
        rows.push(idx.iter().map(|&v| v - 1).collect());
    }

    // Mutual consistency of the two lists.
    let mut from_cols: Vec<(usize, usize)> = Vec::new();
    for (c, col) in cols.iter().enumerate() {
        for &r in col {
            from_cols.push((r, c));
        }
    }
    let mut from_rows: Vec<(usize, usize)> = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        for &c in row {
            from_rows.push((r, c));
        }
    }
    from_cols.sort_unstable();
    from_rows.sort_unstable();
    if from_cols != from_rows {
        return Err(CodeError::Parse {
            line: lines.lineno,
            msg: "column lists and row lists disagree".into(),
        });
    }

    ParityCheckMatrix::from_entries(name, m, n, &from_cols)
}

/// Serializes to normalized alist text: single spaces, zero padding to the
/// declared maxima, trailing newline. Parsing the output reproduces the
/// matrix, and serializing again is byte-identical.
pub fn to_alist(h: &ParityCheckMatrix) -> String {
    let n = h.num_vars();
    let m = h.num_checks();
    let max_col = h.max_col_degree();
    let max_row = h.max_row_degree();

    let join = |v: &[usize]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut out = String::new();
    out.push_str(&format!("{n} {m}\n"));
    out.push_str(&format!("{max_col} {max_row}\n"));
    let col_degs: Vec<usize> = (0..n).map(|c| h.col(c).len()).collect();
    let row_degs: Vec<usize> = (0..m).map(|r| h.row(r).len()).collect();
    out.push_str(&join(&col_degs));
    out.push('\n');
    out.push_str(&join(&row_degs));
    out.push('\n');
    for c in 0..n {
        let mut entries: Vec<usize> = h.col(c).iter().map(|&r| r + 1).collect();
        entries.resize(max_col, 0);
        out.push_str(&join(&entries));
        out.push('\n');
    }
    for r in 0..m {
        let mut entries: Vec<usize> = h.row(r).iter().map(|&c| c + 1).collect();
        entries.resize(max_row, 0);
        out.push_str(&join(&entries));
        out.push('\n');
    }
    out
}

/// Parses the plain dense text format: a `m n` header line followed by
/// `m` rows of whitespace-separated 0/1 entries.
pub fn parse_dense(text: &str) -> Result<ParityCheckMatrix, CodeError> {
    let mut lines = Lines::new(text);
    let (l, header) = lines.numbers()?;
    expect_len(l, "header", header.len(), 2)?;
    let (m, n) = (header[0], header[1]);
    let mut entries = Vec::new();
    for r in 0..m {
        let (l, row) = lines.numbers()?;
        expect_len(l, "row", row.len(), n)?;
        for (c, &v) in row.iter().enumerate() {
            match v {
                0 => {}
                1 => entries.push((r, c)),
                _ => {
                    return Err(CodeError::Parse {
                        line: l,
                        msg: format!("entries must be 0 or 1, got {v}"),
                    })
                }
            }
        }
    }
    ParityCheckMatrix::from_entries("dense", m, n, &entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    // H = [[1,1,0],[0,1,1]]: n=3, m=2, col degs 1 2 1, row degs 2 2.
    const SMALL: &str = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n";

    #[test]
    fn parses_hand_expanded_small_matrix() {
        let h = parse_alist(SMALL).unwrap();
        assert_eq!(h.num_checks(), 2);
        assert_eq!(h.num_vars(), 3);
        assert_eq!(h.row(0), &[0, 1]);
        assert_eq!(h.row(1), &[1, 2]);
        assert_eq!(h.num_ones(), 4);
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let h = parse_alist(SMALL).unwrap();
        let text = to_alist(&h);
        let h2 = parse_alist(&text).unwrap();
        assert_eq!(to_alist(&h2), text);
        assert_eq!(h2.rows(), h.rows());
    }

    #[test]
    fn out_of_range_column_index_is_an_error() {
        // Column 0 claims row 9 but m = 2.
        let bad = "3 2\n2 2\n1 2 1\n2 2\n9 0\n1 2\n2 0\n1 2\n2 3\n";
        let err = parse_alist(bad).unwrap_err();
        match err {
            CodeError::Parse { line, msg } => {
                assert_eq!(line, 5);
                assert!(msg.contains("out of range"), "{msg}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn degree_disagreement_is_an_error() {
        // Column 1 declares degree 2 but lists one entry.
        let bad = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 0\n2 0\n1 2\n2 3\n";
        let err = parse_alist(bad).unwrap_err();
        assert!(matches!(err, CodeError::Parse { line: 6, .. }), "{err:?}");
    }

    #[test]
    fn inconsistent_lists_are_an_error() {
        // Row lists describe a different matrix than the column lists.
        let bad = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 3\n2 3\n";
        let err = parse_alist(bad).unwrap_err();
        assert!(matches!(err, CodeError::Parse { .. }), "{err:?}");
    }

    #[test]
    fn truncated_input_names_the_line() {
        let bad = "3 2\n2 2\n1 2 1\n";
        let err = parse_alist(bad).unwrap_err();
        assert!(matches!(err, CodeError::Parse { line: 4, .. }), "{err:?}");
    }

    #[test]
    fn dense_format_parses() {
        let h = parse_dense("2 3\n1 1 0\n0 1 1\n").unwrap();
        assert_eq!(h.row(0), &[0, 1]);
        assert_eq!(h.row(1), &[1, 2]);
    }

    #[test]
    fn dense_rejects_non_binary() {
        let err = parse_dense("1 2\n1 2\n").unwrap_err();
        assert!(matches!(err, CodeError::Parse { line: 2, .. }), "{err:?}");
    }
}
