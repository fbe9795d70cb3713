//! Stationary distributions of large sparse irreducible Markov chains by
//! block stationary iterations: block Jacobi, block Gauss-Seidel, the
//! processor-block hybrid (JGS) and the two block staircase splittings.
//!
//! The chain is given as the canonical singular M-matrix `A = Qᵀ` (zero
//! column sums). A splitting `A = M − N` is prepared once per partition and
//! then swept repeatedly:
//!
//! ```
//! use staircase::{fixtures, BlockPartition, SolveOptions, SplittingKind, solve_stationary};
//!
//! let a = fixtures::reflecting_walk();
//! let part = BlockPartition::uniform(a.order(), 1).unwrap();
//! let report = solve_stationary(&a, &part, SplittingKind::Stair1, &SolveOptions::default()).unwrap();
//! assert!(report.converged);
//! assert!((report.pi[1] - 1.0 / 3.0).abs() < 1e-8);
//! ```

pub mod bench;
pub mod dense;
pub mod error;
pub mod exec;
pub mod fixtures;
pub mod models;
pub mod mtx;
pub mod solver;
pub mod sparse;
pub mod spectral;
pub mod splitting;

pub use error::{Error, Result};
pub use exec::Executor;
pub use solver::{residual_check, solve_stationary, SolveOptions, SolveReport};
pub use sparse::{canonicalize, BlockPartition, CanonicalChainMatrix, SparseMatrix};
pub use splitting::{PreparedSplitting, SplittingKind};
