//! Compressed sparse column storage, block partitions and the canonical
//! chain matrix `A = Qᵀ`.
//!
//! The canonical sign convention used everywhere downstream: positive
//! diagonal, nonpositive off-diagonal, every column summing to zero. Under it
//! `eᵀA = 0` and the stationary vector spans the right null space of `A`.

use std::ops::Range;

use crate::error::{Error, Result};

/// Column-sum tolerance relative to the column 1-norm.
pub const COLUMN_SUM_TOL: f64 = 1e-12;

/// A real sparse matrix in compressed sparse column layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Assembles a matrix from raw CSC arrays, checking the layout invariants.
    pub fn from_csc(
        n_rows: usize,
        n_cols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if col_ptr.len() != n_cols + 1 {
            return Err(Error::invalid(format!(
                "column pointer array has length {}, expected {}",
                col_ptr.len(),
                n_cols + 1
            )));
        }
        if col_ptr[0] != 0 || *col_ptr.last().unwrap() != row_idx.len() {
            return Err(Error::invalid("column pointers must start at 0 and end at nnz"));
        }
        if row_idx.len() != values.len() {
            return Err(Error::invalid("row index and value arrays differ in length"));
        }
        for c in 0..n_cols {
            let (start, end) = (col_ptr[c], col_ptr[c + 1]);
            if start > end {
                return Err(Error::invalid(format!("column pointers decrease at column {c}")));
            }
            let rows = &row_idx[start..end];
            if rows.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!(
                    "row indices not strictly increasing in column {c}"
                )));
            }
            if rows.last().is_some_and(|&r| r >= n_rows) {
                return Err(Error::invalid(format!("row index out of range in column {c}")));
            }
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite stored value {v}")));
        }
        Ok(SparseMatrix {
            n_rows,
            n_cols,
            col_ptr,
            row_idx,
            values,
        })
    }

    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(r, c, _) in &entries {
            if r >= n_rows || c >= n_cols {
                return Err(Error::invalid(format!(
                    "entry ({r}, {c}) outside a {n_rows}x{n_cols} matrix"
                )));
            }
        }
        entries.sort_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0usize; n_cols + 1];
        let mut row_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..n_cols {
            col_ptr[c + 1] += col_ptr[c];
        }
        SparseMatrix::from_csc(n_rows, n_cols, col_ptr, row_idx, values)
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::invalid("ragged dense matrix"));
        }
        let triplets = rows.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(move |(j, &v)| (i, j, v))
        });
        SparseMatrix::from_triplets(n_rows, n_cols, triplets)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row indices and values stored in column `c`.
    pub fn column(&self, c: usize) -> (&[usize], &[f64]) {
        let range = self.col_ptr[c]..self.col_ptr[c + 1];
        (&self.row_idx[range.clone()], &self.values[range])
    }

    /// Iterates stored entries as `(row, col, value)` in column-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_cols).flat_map(move |c| {
            let (rows, vals) = self.column(c);
            rows.iter().zip(vals).map(move |(&r, &v)| (r, c, v))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (rows, vals) = self.column(c);
        rows.binary_search(&r).map_or(0.0, |k| vals[k])
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (r, c, v) in self.iter() {
            out[r][c] = v;
        }
        out
    }

    /// Maximum column 1-norm.
    pub fn norm1(&self) -> f64 {
        (0..self.n_cols)
            .map(|c| self.column(c).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols, "vector length mismatch");
        let mut y = vec![0.0; self.n_rows];
        for (c, &xc) in x.iter().enumerate() {
            let (rows, vals) = self.column(c);
            for (&r, &v) in rows.iter().zip(vals) {
                y[r] += v * xc;
            }
        }
        y
    }

    pub fn neg(&self) -> SparseMatrix {
        SparseMatrix {
            values: self.values.iter().map(|v| -v).collect(),
            ..self.clone()
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        SparseMatrix::from_triplets(self.n_cols, self.n_rows, self.iter().map(|(r, c, v)| (c, r, v)))
            .expect("transpose of a valid matrix is valid")
    }
}

/// Ordered block sizes `n₁..nₙ` with their prefix offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    offsets: Vec<usize>,
}

impl BlockPartition {
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::invalid("a partition needs at least one block"));
        }
        if let Some(i) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::invalid(format!("block {i} has size 0")));
        }
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        offsets.push(0);
        for &s in sizes {
            offsets.push(offsets.last().unwrap() + s);
        }
        Ok(BlockPartition { offsets })
    }

    /// Equal blocks of size `ell`; the last block takes the remainder.
    pub fn uniform(n: usize, ell: usize) -> Result<Self> {
        if ell == 0 || ell > n {
            return Err(Error::invalid(format!(
                "block size {ell} must lie in [1, {n}]"
            )));
        }
        let full = (n - 1) / ell;
        let mut sizes = vec![ell; full];
        sizes.push(n - ell * full);
        BlockPartition::from_sizes(&sizes)
    }

    /// Number of blocks.
    pub fn n_blocks(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Total order `N`.
    pub fn order(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn size(&self, block: usize) -> usize {
        self.offsets[block + 1] - self.offsets[block]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn range(&self, block: usize) -> Range<usize> {
        self.offsets[block]..self.offsets[block + 1]
    }

    /// Block containing scalar index `i`.
    pub fn block_of(&self, i: usize) -> usize {
        debug_assert!(i < self.order());
        self.offsets.partition_point(|&o| o <= i) - 1
    }

    /// Splits `v` into one mutable slice per block.
    pub fn split_mut<'a, T>(&self, mut v: &'a mut [T]) -> Vec<&'a mut [T]> {
        assert_eq!(v.len(), self.order());
        let mut out = Vec::with_capacity(self.n_blocks());
        for b in 0..self.n_blocks() {
            let (head, tail) = v.split_at_mut(self.size(b));
            out.push(head);
            v = tail;
        }
        out
    }
}

/// `A = Qᵀ` of an irreducible chain: square, positive diagonal, nonpositive
/// off-diagonal, zero column sums, strongly connected.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalChainMatrix {
    matrix: SparseMatrix,
}

impl CanonicalChainMatrix {
    /// Validates `m` as already canonical, without flipping signs.
    pub fn new(matrix: SparseMatrix) -> Result<Self> {
        if matrix.n_rows() != matrix.n_cols() {
            return Err(Error::invalid(format!(
                "chain matrix must be square, got {}x{}",
                matrix.n_rows(),
                matrix.n_cols()
            )));
        }
        check_column_sums(&matrix)?;
        for (r, c, v) in matrix.iter() {
            if r == c && v < 0.0 {
                return Err(Error::AmbiguousConvention);
            }
            if r != c && v > 0.0 {
                return Err(Error::OffDiagonalSign { row: r, column: c, value: v });
            }
        }
        check_irreducible(&matrix)?;
        Ok(CanonicalChainMatrix { matrix })
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> SparseMatrix {
        self.matrix
    }

    /// Order `N`.
    pub fn order(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }
}

/// Maps either sign convention (`Qᵀ` of a generator, or `I − Pᵀ`-like with
/// positive diagonal) onto the canonical one.
pub fn canonicalize(s: SparseMatrix) -> Result<CanonicalChainMatrix> {
    if s.n_rows() != s.n_cols() {
        return Err(Error::invalid(format!(
            "chain matrix must be square, got {}x{}",
            s.n_rows(),
            s.n_cols()
        )));
    }
    check_column_sums(&s)?;
    let (mut pos, mut neg) = (false, false);
    for (r, c, v) in s.iter() {
        if r == c {
            pos |= v > 0.0;
            neg |= v < 0.0;
        }
    }
    match (pos, neg) {
        (true, true) => Err(Error::AmbiguousConvention),
        (false, true) => CanonicalChainMatrix::new(s.neg()),
        _ => CanonicalChainMatrix::new(s),
    }
}

fn check_column_sums(m: &SparseMatrix) -> Result<()> {
    for c in 0..m.n_cols() {
        let (_, vals) = m.column(c);
        let sum: f64 = vals.iter().sum();
        let norm: f64 = vals.iter().map(|v| v.abs()).sum();
        if sum.abs() > COLUMN_SUM_TOL * norm || !sum.is_finite() {
            return Err(Error::NotAGenerator { column: c, sum, norm });
        }
    }
    Ok(())
}

/// Strong connectivity of the off-diagonal sparsity graph: every state must be
/// reachable from state 0 and reach it back.
fn check_irreducible(m: &SparseMatrix) -> Result<()> {
    let n = m.n_rows();
    if n <= 1 {
        return Ok(());
    }
    // Edge c -> r for each stored off-diagonal (r, c): probability flows from
    // column state c into row state r.
    let forward = reach(n, |c, out: &mut Vec<usize>| {
        let (rows, vals) = m.column(c);
        out.extend(rows.iter().zip(vals).filter(|(&r, &v)| r != c && v != 0.0).map(|(&r, _)| r));
    });
    if let Some(state) = forward.iter().position(|&seen| !seen) {
        return Err(Error::ReducibleChain { state });
    }
    let t = m.transpose();
    let backward = reach(n, |c, out: &mut Vec<usize>| {
        let (rows, vals) = t.column(c);
        out.extend(rows.iter().zip(vals).filter(|(&r, &v)| r != c && v != 0.0).map(|(&r, _)| r));
    });
    if let Some(state) = backward.iter().position(|&seen| !seen) {
        return Err(Error::ReducibleChain { state });
    }
    Ok(())
}

fn reach(n: usize, mut neighbours: impl FnMut(usize, &mut Vec<usize>)) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    let mut buf = Vec::new();
    seen[0] = true;
    while let Some(v) = stack.pop() {
        buf.clear();
        neighbours(v, &mut buf);
        for &w in &buf {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}
