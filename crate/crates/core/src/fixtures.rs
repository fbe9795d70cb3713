//! Small reference chains with known spectra and stationary vectors.

use crate::sparse::{CanonicalChainMatrix, SparseMatrix};

/// The 4-state reflecting random walk in row-sum-zero form `I − P`:
///
/// ```text
///  1    -1    0    0
/// -1/2   1  -1/2   0
///  0   -1/2   1  -1/2
///  0     0   -1    1
/// ```
pub fn reflecting_walk_rows() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, -1.0, 0.0, 0.0],
        vec![-0.5, 1.0, -0.5, 0.0],
        vec![0.0, -0.5, 1.0, -0.5],
        vec![0.0, 0.0, -1.0, 1.0],
    ]
}

/// Canonical `I − Pᵀ` of the 4-state reflecting walk (transpose of
/// [`reflecting_walk_rows`]). Its stationary vector is `(1, 2, 2, 1)/6`.
pub fn reflecting_walk() -> CanonicalChainMatrix {
    let m = SparseMatrix::from_dense(&reflecting_walk_rows()).unwrap().transpose();
    CanonicalChainMatrix::new(m).unwrap()
}

pub const REFLECTING_WALK_PI: [f64; 4] = [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0];

/// Two-state chain with rate `a` from state 0 to 1 and `b` back; `π = (b, a)/(a+b)`.
pub fn two_state(a: f64, b: f64) -> CanonicalChainMatrix {
    let m = SparseMatrix::from_dense(&[vec![a, -b], vec![-a, b]]).unwrap();
    CanonicalChainMatrix::new(m).unwrap()
}
