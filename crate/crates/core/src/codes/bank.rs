//! Bundled parity-check matrices.
//!
//! Every matrix is constructed algebraically at call time, so the bank needs
//! no data files and each instance is reproducible. The BCH matrices stack
//! one bit-expanded power-of-alpha block per designed root; the polar matrix
//! takes the frozen rows of the transpose of the polarization transform; the
//! array LDPC matrix stacks circulant shift blocks.
//!
//! Each code is available in two instances: the `Standard` algebraic form
//! described above, and a `Systematic` form obtained by GF(2) row reduction
//! (full rank, identity on the pivot columns). Both define the same code.

use super::ParityCheckMatrix;

/// Which parity-check instance of a bundled code to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatrixForm {
    /// The direct algebraic construction (may be overcomplete).
    #[default]
    Standard,
    /// Row-reduced to full rank with identity on pivot columns.
    Systematic,
}

/// Summary row for `codes list`.
#[derive(Debug, Clone)]
pub struct CodeInfo {
    pub name: &'static str,
    pub num_vars: usize,
    pub dimension: usize,
    pub num_checks: usize,
    pub num_edges: usize,
}

const NAMES: &[&str] = &[
    "REP(3)",
    "HAMMING(7,4)",
    "BCH(15,11)",
    "BCH(15,7)",
    "BCH(31,16)",
    "BCH(63,51)",
    "POLAR(64,48)",
    "LDPC-ARRAY(121,80)",
];

/// Names of all bundled codes.
pub fn names() -> &'static [&'static str] {
    NAMES
}

/// Builds a bundled code by name in its standard form.
pub fn get(name: &str) -> Option<ParityCheckMatrix> {
    get_with_form(name, MatrixForm::Standard)
}

/// Builds a bundled code by name in the requested form.
pub fn get_with_form(name: &str, form: MatrixForm) -> Option<ParityCheckMatrix> {
    let h = match name {
        "REP(3)" => repetition(3),
        "HAMMING(7,4)" => hamming_7_4(),
        "BCH(15,11)" => bch(4, 1, "BCH(15,11)"),
        "BCH(15,7)" => bch(4, 2, "BCH(15,7)"),
        "BCH(31,16)" => bch(5, 3, "BCH(31,16)"),
        "BCH(63,51)" => redundant_cyclic(&bch(6, 2, "BCH(63,51)"), "BCH(63,51)"),
        "POLAR(64,48)" => polar(6, 48, "POLAR(64,48)"),
        "LDPC-ARRAY(121,80)" => array_ldpc(11, 4, "LDPC-ARRAY(121,80)"),
        _ => return None,
    };
    match form {
        MatrixForm::Standard => Some(h),
        MatrixForm::Systematic => Some(systematic(&h)),
    }
}

/// Info rows for every bundled code.
pub fn list() -> Vec<CodeInfo> {
    NAMES
        .iter()
        .map(|&name| {
            let h = get(name).expect("bundled code");
            CodeInfo {
                name,
                num_vars: h.num_vars(),
                dimension: h.dimension(),
                num_checks: h.num_checks(),
                num_edges: h.num_ones(),
            }
        })
        .collect()
}

/// Length-n repetition code: bidiagonal (n-1) x n matrix.
pub fn repetition(n: usize) -> ParityCheckMatrix {
    assert!(n >= 2);
    let entries: Vec<(usize, usize)> = (0..n - 1)
        .flat_map(|r| [(r, r), (r, r + 1)])
        .collect();
    ParityCheckMatrix::from_entries(format!("REP({n})"), n - 1, n, &entries)
        .expect("repetition matrix is valid")
}

/// The classic 3 x 7 single-error-correcting matrix.
pub fn hamming_7_4() -> ParityCheckMatrix {
    #[rustfmt::skip]
    let data = [
        1, 0, 0, 1, 1, 0, 1,
        0, 1, 0, 1, 0, 1, 1,
        0, 0, 1, 0, 1, 1, 1,
    ];
    ParityCheckMatrix::from_dense("HAMMING(7,4)", 3, 7, &data).expect("valid")
}

/// Primitive polynomials for GF(2^m), m = 3..=6, as bit masks including the
/// leading term.
fn primitive_poly(m: usize) -> u32 {
    match m {
        3 => 0b1011,     // x^3 + x + 1
        4 => 0b10011,    // x^4 + x + 1
        5 => 0b100101,   // x^5 + x^2 + 1
        6 => 0b1000011,  // x^6 + x + 1
        _ => panic!("no primitive polynomial table entry for m = {m}"),
    }
}

/// Antilog table: alpha^i for i in 0..2^m-1.
fn gf2m_antilog(m: usize) -> Vec<u32> {
    let poly = primitive_poly(m);
    let order = (1u32 << m) - 1;
    let mut table = Vec::with_capacity(order as usize);
    let mut x = 1u32;
    for _ in 0..order {
        table.push(x);
        x <<= 1;
        if x >> m & 1 == 1 {
            x ^= poly;
        }
    }
    table
}

/// Primitive binary BCH code of length 2^m - 1 correcting t errors.
///
/// The matrix has one m-row block per designed root alpha^i, i = 1, 3, ...,
/// 2t-1; entry (block b, bit r, column j) is bit r of alpha^(i*j).
fn bch(m: usize, t: usize, name: &str) -> ParityCheckMatrix {
    let n = (1usize << m) - 1;
    let alpha = gf2m_antilog(m);
    let mut entries = Vec::new();
    for b in 0..t {
        let i = 2 * b + 1;
        for j in 0..n {
            let elem = alpha[(i * j) % n];
            for r in 0..m {
                if elem >> r & 1 == 1 {
                    entries.push((b * m + r, j));
                }
            }
        }
    }
    ParityCheckMatrix::from_entries(name, t * m, n, &entries).expect("BCH matrix is valid")
}

/// Polar code of length 2^levels. The information set keeps the k most
/// reliable synthetic channels under the erasure-parameter recursion
/// z -> (2z - z^2, z^2) from z = 1/2; the matrix rows are the frozen rows of
/// the transpose of the polarization transform.
fn polar(levels: usize, k: usize, name: &str) -> ParityCheckMatrix {
    let n = 1usize << levels;
    assert!(k < n);
    let mut z = vec![0.5f64];
    for _ in 0..levels {
        let mut next = Vec::with_capacity(z.len() * 2);
        for &zi in &z {
            next.push(2.0 * zi - zi * zi);
            next.push(zi * zi);
        }
        z = next;
    }
    // Freeze the n-k least reliable indices (largest z; ties by index).
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[b].partial_cmp(&z[a]).unwrap().then(a.cmp(&b)));
    let mut frozen: Vec<usize> = order[..n - k].to_vec();
    frozen.sort_unstable();

    // Transform entry [row j][col i] is 1 iff the bits of i are a subset of
    // the bits of j; constraint rows are indexed by the frozen i.
    let mut entries = Vec::new();
    for (f, &i) in frozen.iter().enumerate() {
        for j in 0..n {
            if i & !j == 0 {
                entries.push((f, j));
            }
        }
    }
    ParityCheckMatrix::from_entries(name, n - k, n, &entries).expect("polar matrix is valid")
}

/// Array LDPC code over a prime q with j circulant row blocks: block (a, b)
/// is the a*b-fold cyclic shift, giving column degree exactly j. The stack is
/// overcomplete; the rank is j(q-1) + 1.
fn array_ldpc(q: usize, j: usize, name: &str) -> ParityCheckMatrix {
    let mut entries = Vec::new();
    for a in 0..j {
        for b in 0..q {
            for r in 0..q {
                let c = (r + a * b) % q;
                entries.push((a * q + r, b * q + c));
            }
        }
    }
    ParityCheckMatrix::from_entries(name, j * q, q * q, &entries).expect("array matrix is valid")
}

/// Replaces a cyclic code's matrix with a redundant instance: all cyclic
/// shifts of one minimum-weight dual codeword (the lowest such word whose
/// orbit has full period and full rank).
///
/// Message passing on the direct BCH constructions is weak because every row
/// is dense; the sparsest checks the code admits are its minimum-weight dual
/// words, and one full shift orbit of them measurably outperforms any basis
/// instance while defining the same code. The row space is unchanged (rank
/// is asserted), only redundancy is added.
fn redundant_cyclic(base: &ParityCheckMatrix, name: &str) -> ParityCheckMatrix {
    let n = base.num_vars();
    assert!(n <= 127, "shift-orbit masks use u128");
    let full = (1u128 << n) - 1;
    let row_masks: Vec<u128> = base
        .rows()
        .iter()
        .map(|row| row.iter().fold(0u128, |m, &c| m | 1 << c))
        .collect();
    let rank = base.rank();
    assert!(rank <= 20, "dual enumeration is 2^rank");
    assert_eq!(base.num_checks(), rank, "base rows must be independent");
    // Independent rows span the dual; enumerate it.
    let mut words = Vec::new();
    let mut min_weight = u32::MAX;
    for bits in 1u64..(1 << rank) {
        let mut w = 0u128;
        for (i, &rm) in row_masks.iter().enumerate().take(rank) {
            if bits >> i & 1 == 1 {
                w ^= rm;
            }
        }
        let wt = w.count_ones();
        match wt.cmp(&min_weight) {
            std::cmp::Ordering::Less => {
                min_weight = wt;
                words = vec![w];
            }
            std::cmp::Ordering::Equal => words.push(w),
            std::cmp::Ordering::Greater => {}
        }
    }
    words.sort_unstable();
    let rot = |w: u128| ((w << 1) & full) | (w >> (n - 1));
    for &w in &words {
        let mut orbit = vec![w];
        let mut x = rot(w);
        while x != w {
            orbit.push(x);
            x = rot(x);
        }
        if orbit.len() != n {
            continue;
        }
        let mut entries = Vec::new();
        for (r, &word) in orbit.iter().enumerate() {
            for c in 0..n {
                if word >> c & 1 == 1 {
                    entries.push((r, c));
                }
            }
        }
        let h = ParityCheckMatrix::from_entries(name, n, n, &entries)
            .expect("orbit matrix is valid");
        if h.rank() == rank {
            return h;
        }
    }
    panic!("no full-period full-rank dual orbit found for {name}");
}

/// Row-reduces to a full-rank matrix with identity on the pivot columns.
pub fn systematic(h: &ParityCheckMatrix) -> ParityCheckMatrix {
    let n = h.num_vars();
    let words = n.div_ceil(64);
    let mut mat: Vec<Vec<u64>> = h
        .rows()
        .iter()
        .map(|row| {
            let mut w = vec![0u64; words];
            for &c in row {
                w[c / 64] |= 1 << (c % 64);
            }
            w
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..n {
        let Some(r) = (pivot_row..mat.len()).find(|&r| mat[r][col / 64] >> (col % 64) & 1 == 1)
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
        pivot_row += 1;
    }
    let mut entries = Vec::new();
    for r in 0..pivot_row {
        for c in 0..n {
            if mat[r][c / 64] >> (c % 64) & 1 == 1 {
                entries.push((r, c));
            }
        }
    }
    ParityCheckMatrix::from_entries(format!("{}-sys", h.name()), pivot_row, n, &entries)
        .expect("row reduction preserves validity")
}
