//! Small dense column-major matrices and LU factorization with row pivoting,
//! used for the diagonal blocks of a splitting.

use std::ops::{Index, IndexMut};

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut m = DenseMatrix::zeros(n_rows, n_cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n_cols, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Column-major storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows)
            .map(|i| (0..self.n_cols).map(|j| self[(i, j)]).collect())
            .collect()
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[j * self.n_rows + i]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[j * self.n_rows + i]
    }
}

/// `P A = L U` with unit lower `L`, stored packed in one column-major array.
#[derive(Debug, Clone)]
pub struct LuFactor {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

/// Pivot magnitudes at or below this fraction of the block's max entry count
/// as singular.
const SINGULAR_REL: f64 = 1e-14;

impl LuFactor {
    /// Factorizes a square matrix; `None` if it is numerically singular.
    pub fn new(a: &DenseMatrix) -> Option<Self> {
        assert_eq!(a.n_rows, a.n_cols, "LU needs a square matrix");
        let n = a.n_rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = lu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if n > 0 && (scale == 0.0 || !scale.is_finite()) {
            return None;
        }
        for k in 0..n {
            let col = &lu[k * n..(k + 1) * n];
            let (p, pmax) = (k..n)
                .map(|i| (i, col[i].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= SINGULAR_REL * scale {
                return None;
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    lu.swap(j * n + p, j * n + k);
                }
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                lu[k * n + i] /= pivot;
            }
            let (left, right) = lu.split_at_mut((k + 1) * n);
            let lcol = &left[k * n..];
            for j in 0..n - k - 1 {
                let col = &mut right[j * n..(j + 1) * n];
                let ukj = col[k];
                if ukj != 0.0 {
                    for i in k + 1..n {
                        col[i] -= lcol[i] * ukj;
                    }
                }
            }
        }
        Some(LuFactor { n, lu, perm })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64], scratch: &mut Vec<f64>) {
        let n = self.n;
        assert_eq!(b.len(), n);
        scratch.clear();
        scratch.extend(self.perm.iter().map(|&p| b[p]));
        let y = scratch.as_mut_slice();
        // Column-oriented forward then backward substitution.
        for k in 0..n {
            let yk = y[k];
            if yk != 0.0 {
                let col = &self.lu[k * n..(k + 1) * n];
                for i in k + 1..n {
                    y[i] -= col[i] * yk;
                }
            }
        }
        for k in (0..n).rev() {
            let col = &self.lu[k * n..(k + 1) * n];
            y[k] /= col[k];
            let yk = y[k];
            if yk != 0.0 {
                for i in 0..k {
                    y[i] -= col[i] * yk;
                }
            }
        }
        b.copy_from_slice(y);
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x, &mut Vec::with_capacity(self.n));
        x
    }

    /// Unit lower factor `L`.
    pub fn lower(&self) -> DenseMatrix {
        let n = self.n;
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            l[(j, j)] = 1.0;
            for i in j + 1..n {
                l[(i, j)] = self.lu[j * n + i];
            }
        }
        l
    }

    /// Upper factor `U`.
    pub fn upper(&self) -> DenseMatrix {
        let n = self.n;
        let mut u = DenseMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                u[(i, j)] = self.lu[j * n + i];
            }
        }
        u
    }

    /// Row permutation: row `i` of `P A` is row `perm[i]` of `A`.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }
}
