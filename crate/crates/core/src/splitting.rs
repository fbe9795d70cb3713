//! Block splittings `A = M − N` and their one-sweep kernels `z = M⁻¹ N x`.
//!
//! `M` is never formed. It is implied by the splitting kind, the block
//! partition and the LU factors of the diagonal blocks `Q_{i,i}`:
//!
//! | kind     | blocks `(i, k)` belonging to `M`                                  |
//! |----------|-------------------------------------------------------------------|
//! | `Bj`     | `k = i`                                                           |
//! | `Bgs`    | `k ≤ i`                                                           |
//! | `Jgs(p)` | `k ≤ i`, both in the same processor group                         |
//! | `Stair1` | `k = i`; plus `k = i ± 1` on odd rows (0-based; 2nd, 4th, ...)    |
//! | `Stair2` | `k = i`; plus `k = i ± 1` on even rows (0-based; 1st, 3rd, ...)   |
//!
//! Off-diagonal products accumulate in ascending block-column order, and
//! within a block in column-major entry order, so every sweep is bitwise
//! reproducible regardless of how tasks are scheduled.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dense::{DenseMatrix, LuFactor};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::sparse::{BlockPartition, CanonicalChainMatrix};

/// Largest order for which dense materialization is allowed by default.
pub const DEFAULT_DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum SplittingKind {
    /// Block Jacobi.
    Bj,
    /// Block Gauss-Seidel.
    Bgs,
    /// Block Jacobi over `p` contiguous processor groups, block Gauss-Seidel
    /// inside each group.
    Jgs(usize),
    /// Stair matrix with the tridiagonal triples on the 2nd, 4th, ... block rows.
    Stair1,
    /// Stair matrix with the tridiagonal triples on the 1st, 3rd, ... block rows.
    Stair2,
}

impl SplittingKind {
    /// Whether block `(i, k)` of `A` is part of `M`, given JGS group ranges.
    fn in_m(self, i: usize, k: usize, groups: &[Range<usize>]) -> bool {
        match self {
            SplittingKind::Bj => k == i,
            SplittingKind::Bgs => k <= i,
            SplittingKind::Jgs(_) => {
                k <= i && groups.iter().any(|g| g.contains(&i) && g.contains(&k))
            }
            SplittingKind::Stair1 => k == i || (i % 2 == 1 && i.abs_diff(k) == 1),
            SplittingKind::Stair2 => k == i || (i % 2 == 0 && i.abs_diff(k) == 1),
        }
    }

    /// Block rows of a stair matrix carrying the `(i−1, i, i+1)` triple.
    fn stair_coupled(self, i: usize) -> bool {
        match self {
            SplittingKind::Stair1 => i % 2 == 1,
            SplittingKind::Stair2 => i % 2 == 0,
            _ => false,
        }
    }
}

impl fmt::Display for SplittingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplittingKind::Bj => f.write_str("bj"),
            SplittingKind::Bgs => f.write_str("bgs"),
            SplittingKind::Jgs(p) => write!(f, "jgs:{p}"),
            SplittingKind::Stair1 => f.write_str("stair1"),
            SplittingKind::Stair2 => f.write_str("stair2"),
        }
    }
}

impl FromStr for SplittingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Ok(match s.as_str() {
            "bj" => SplittingKind::Bj,
            "bgs" => SplittingKind::Bgs,
            "stair1" | "bs" => SplittingKind::Stair1,
            "stair2" => SplittingKind::Stair2,
            _ => match s.strip_prefix("jgs:").map(str::parse::<usize>) {
                Some(Ok(p)) if p >= 1 => SplittingKind::Jgs(p),
                _ => return Err(Error::invalid(format!("unknown splitting `{s}`"))),
            },
        })
    }
}

impl From<SplittingKind> for String {
    fn from(k: SplittingKind) -> String {
        k.to_string()
    }
}

impl TryFrom<String> for SplittingKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Contiguous groups of block rows with near-equal counts, larger groups first.
pub fn processor_groups(n_blocks: usize, procs: usize) -> Result<Vec<Range<usize>>> {
    if procs == 0 || procs > n_blocks {
        return Err(Error::invalid(format!(
            "processor block count {procs} must lie in [1, {n_blocks}]"
        )));
    }
    let (base, extra) = (n_blocks / procs, n_blocks % procs);
    let mut start = 0;
    Ok((0..procs)
        .map(|j| {
            let len = base + usize::from(j < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect())
}

/// Off-diagonal entries of one block row, grouped by column block.
#[derive(Debug, Clone, Default)]
struct BlockRow {
    /// `(column block, entry range)` in ascending column-block order.
    segments: Vec<(usize, Range<usize>)>,
    rows: Vec<u32>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl BlockRow {
    fn push(&mut self, block: usize, row: usize, col: usize, val: f64) {
        let at = self.vals.len();
        match self.segments.last_mut() {
            Some((b, r)) if *b == block => r.end = at + 1,
            _ => self.segments.push((block, at..at + 1)),
        }
        self.rows.push(row as u32);
        self.cols.push(col as u32);
        self.vals.push(val);
    }

    /// `acc -= Σ Q_{i,k} src_k` over the blocks `k` for which `source` yields a vector.
    #[inline]
    fn accumulate<'s>(&self, acc: &mut [f64], source: impl Fn(usize) -> Option<&'s [f64]>) {
        for (k, range) in &self.segments {
            let Some(src) = source(*k) else { continue };
            for t in range.clone() {
                acc[self.rows[t] as usize] -= self.vals[t] * src[self.cols[t] as usize];
            }
        }
    }
}

/// A splitting ready for repeated sweeps; immutable and shareable.
#[derive(Debug, Clone)]
pub struct PreparedSplitting {
    kind: SplittingKind,
    partition: BlockPartition,
    diag: Vec<LuFactor>,
    off: Vec<BlockRow>,
    groups: Vec<Range<usize>>,
    matrix: CanonicalChainMatrix,
}

impl PreparedSplitting {
    /// Extracts and factorizes the diagonal blocks and indexes the off-diagonal
    /// part by block row.
    pub fn prepare(
        a: &CanonicalChainMatrix,
        partition: &BlockPartition,
        kind: SplittingKind,
    ) -> Result<Self> {
        let n = a.order();
        if partition.order() != n {
            return Err(Error::invalid(format!(
                "partition covers {} states but the matrix has {n}",
                partition.order()
            )));
        }
        let nb = partition.n_blocks();
        let groups = match kind {
            SplittingKind::Jgs(p) => processor_groups(nb, p)?,
            _ => vec![0..nb],
        };
        let mut blocks: Vec<DenseMatrix> = (0..nb)
            .map(|b| DenseMatrix::zeros(partition.size(b), partition.size(b)))
            .collect();
        let mut off = vec![BlockRow::default(); nb];
        let m = a.matrix();
        for cb in 0..nb {
            let c0 = partition.offsets()[cb];
            for c in partition.range(cb) {
                let (rows, vals) = m.column(c);
                for (&r, &v) in rows.iter().zip(vals) {
                    let rb = partition.block_of(r);
                    let r0 = partition.offsets()[rb];
                    if rb == cb {
                        blocks[cb][(r - r0, c - c0)] = v;
                    } else {
                        off[rb].push(cb, r - r0, c - c0, v);
                    }
                }
            }
        }
        let diag = blocks
            .iter()
            .enumerate()
            .map(|(b, blk)| LuFactor::new(blk).ok_or(Error::PrepareFailed { block: b }))
            .collect::<Result<Vec<_>>>()?;
        Ok(PreparedSplitting {
            kind,
            partition: partition.clone(),
            diag,
            off,
            groups,
            matrix: a.clone(),
        })
    }

    pub fn kind(&self) -> SplittingKind {
        self.kind
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn matrix(&self) -> &CanonicalChainMatrix {
        &self.matrix
    }

    /// LU factor of diagonal block `Q_{i,i}`.
    pub fn diagonal_factor(&self, i: usize) -> &LuFactor {
        &self.diag[i]
    }

    /// Processor groups as block-row ranges (`m_j .. m_j + r_j`); a single
    /// group covering everything for non-JGS kinds.
    pub fn processor_groups(&self) -> &[Range<usize>] {
        &self.groups
    }

    /// `z = M⁻¹ N x`, not normalized.
    pub fn sweep(&self, exec: &Executor, x: &[f64], z: &mut [f64]) {
        let n = self.partition.order();
        assert_eq!(x.len(), n, "input vector length");
        assert_eq!(z.len(), n, "output vector length");
        match self.kind {
            SplittingKind::Bj => self.sweep_bj(exec, x, z),
            SplittingKind::Bgs => self.sweep_bgs(x, z),
            SplittingKind::Jgs(_) => self.sweep_jgs(exec, x, z),
            SplittingKind::Stair1 | SplittingKind::Stair2 => self.sweep_stair(exec, x, z),
        }
    }

    pub fn sweep_vec(&self, exec: &Executor, x: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; x.len()];
        self.sweep(exec, x, &mut z);
        z
    }

    fn x_block<'x>(&self, x: &'x [f64], k: usize) -> &'x [f64] {
        &x[self.partition.range(k)]
    }

    fn sweep_bj(&self, exec: &Executor, x: &[f64], z: &mut [f64]) {
        let mut tasks: Vec<_> = self.partition.split_mut(z).into_iter().enumerate().collect();
        exec.for_each(&mut tasks, |(i, zi)| {
            let i = *i;
            zi.fill(0.0);
            self.off[i].accumulate(zi, |k| Some(self.x_block(x, k)));
            self.diag[i].solve_in_place(zi, &mut Vec::new());
        });
    }

    fn sweep_bgs(&self, x: &[f64], z: &mut [f64]) {
        self.gauss_seidel_run(0..self.partition.n_blocks(), x, z);
    }

    /// Forward block substitution over `blocks`; `z` holds exactly those blocks.
    /// Blocks before the current one inside the run read `z`, all others read `x`.
    fn gauss_seidel_run(&self, blocks: Range<usize>, x: &[f64], z: &mut [f64]) {
        let base = self.partition.offsets()[blocks.start];
        let first = blocks.start;
        let mut scratch = Vec::new();
        for i in blocks {
            let r = self.partition.range(i);
            let (done, rest) = z.split_at_mut(r.start - base);
            let zi = &mut rest[..r.len()];
            zi.fill(0.0);
            let done: &[f64] = done;
            self.off[i].accumulate(zi, |k| {
                if (first..i).contains(&k) {
                    let rk = self.partition.range(k);
                    Some(&done[rk.start - base..rk.end - base])
                } else {
                    Some(self.x_block(x, k))
                }
            });
            self.diag[i].solve_in_place(zi, &mut scratch);
        }
    }

    fn sweep_jgs(&self, exec: &Executor, x: &[f64], mut z: &mut [f64]) {
        let offsets = self.partition.offsets();
        let mut tasks = Vec::with_capacity(self.groups.len());
        for g in &self.groups {
            let len = offsets[g.end] - offsets[g.start];
            let (head, tail) = z.split_at_mut(len);
            tasks.push((g.clone(), head));
            z = tail;
        }
        exec.for_each(&mut tasks, |(g, zg)| self.gauss_seidel_run(g.clone(), x, zg));
    }

    fn sweep_stair(&self, exec: &Executor, x: &[f64], z: &mut [f64]) {
        let kind = self.kind;
        let nb = self.partition.n_blocks();
        let excluded = |i: usize, k: usize| k == i || (kind.stair_coupled(i) && k.abs_diff(i) == 1);

        // Phase A: right-hand sides from x, all block rows independent.
        let mut tasks: Vec<_> = self.partition.split_mut(z).into_iter().enumerate().collect();
        exec.for_each(&mut tasks, |(i, zi)| {
            let i = *i;
            zi.fill(0.0);
            self.off[i].accumulate(zi, |k| (!excluded(i, k)).then(|| self.x_block(x, k)));
        });

        // Phase B: rows holding only the diagonal block.
        let (mut coupled, mut single): (Vec<_>, Vec<_>) =
            tasks.into_iter().partition(|(i, _)| kind.stair_coupled(*i));
        exec.for_each(&mut single, |(i, zi)| {
            self.diag[*i].solve_in_place(zi, &mut Vec::new());
        });

        // Phase C: coupled rows read their solved neighbours.
        let mut solved: Vec<Option<&[f64]>> = vec![None; nb];
        for (i, zi) in single {
            solved[i] = Some(&*zi);
        }
        exec.for_each(&mut coupled, |(i, zi)| {
            let i = *i;
            self.off[i].accumulate(zi, |k| if k.abs_diff(i) == 1 { solved[k] } else { None });
            self.diag[i].solve_in_place(zi, &mut Vec::new());
        });
    }

    /// Materializes `M` densely (testing and spectral analysis only).
    pub fn dense_m(&self, limit: usize) -> Result<DenseMatrix> {
        let n = self.partition.order();
        if n > limit {
            return Err(Error::DenseLimit { n, limit });
        }
        let mut m = DenseMatrix::zeros(n, n);
        for (r, c, v) in self.matrix.matrix().iter() {
            let (rb, cb) = (self.partition.block_of(r), self.partition.block_of(c));
            if self.kind.in_m(rb, cb, &self.groups) {
                m[(r, c)] = v;
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{reflecting_walk, REFLECTING_WALK_PI};

    const ALL: [SplittingKind; 5] = [
        SplittingKind::Bj,
        SplittingKind::Bgs,
        SplittingKind::Jgs(2),
        SplittingKind::Stair1,
        SplittingKind::Stair2,
    ];

    #[test]
    fn kind_parse_round_trip() {
        for k in ALL {
            assert_eq!(k.to_string().parse::<SplittingKind>().unwrap(), k);
        }
        assert!("jgs:0".parse::<SplittingKind>().is_err());
        assert!("sor".parse::<SplittingKind>().is_err());
    }

    #[test]
    fn processor_groups_near_equal_larger_first() {
        let g = processor_groups(10, 4).unwrap();
        assert_eq!(g, vec![0..3, 3..6, 6..8, 8..10]);
        assert_eq!(processor_groups(5, 5).unwrap().len(), 5);
        assert_eq!(processor_groups(5, 1).unwrap(), vec![0..5]);
        assert!(processor_groups(5, 6).is_err());
        assert!(processor_groups(5, 0).is_err());
    }

    #[test]
    fn reflecting_walk_scalar_factors_are_diagonal() {
        let a = reflecting_walk();
        let part = BlockPartition::uniform(4, 1).unwrap();
        let s = PreparedSplitting::prepare(&a, &part, SplittingKind::Bgs).unwrap();
        for i in 0..4 {
            assert_eq!(s.diagonal_factor(i).upper()[(0, 0)], 1.0);
        }
    }

    #[test]
    fn whole_matrix_block_is_singular() {
        let a = reflecting_walk();
        let part = BlockPartition::uniform(4, 4).unwrap();
        for k in [SplittingKind::Bj, SplittingKind::Bgs, SplittingKind::Stair1] {
            assert!(matches!(
                PreparedSplitting::prepare(&a, &part, k),
                Err(Error::PrepareFailed { block: 0 })
            ));
        }
    }

    #[test]
    fn reflecting_walk_two_blocks_stair1_factors() {
        // Diagonal blocks of the canonical walk: [[1, -1/2], [-1, 1]] and [[1, -1], [-1/2, 1]].
        let a = reflecting_walk();
        let part = BlockPartition::uniform(4, 2).unwrap();
        let s = PreparedSplitting::prepare(&a, &part, SplittingKind::Stair1).unwrap();
        let expected = [[[1.0, -0.5], [-1.0, 1.0]], [[1.0, -1.0], [-0.5, 1.0]]];
        for (b, want) in expected.iter().enumerate() {
            let f = s.diagonal_factor(b);
            let (l, u) = (f.lower(), f.upper());
            for (i, &p) in f.permutation().iter().enumerate() {
                for j in 0..2 {
                    let lu: f64 = (0..2).map(|k| l[(i, k)] * u[(k, j)]).sum();
                    assert!((lu - want[p][j]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn stationary_vector_is_a_fixed_point() {
        let a = reflecting_walk();
        let part = BlockPartition::uniform(4, 1).unwrap();
        for kind in [SplittingKind::Bj, SplittingKind::Bgs, SplittingKind::Stair1, SplittingKind::Stair2, SplittingKind::Jgs(2)] {
            let s = PreparedSplitting::prepare(&a, &part, kind).unwrap();
            let z = s.sweep_vec(&Executor::serial(), &REFLECTING_WALK_PI);
            for (zi, pi) in z.iter().zip(REFLECTING_WALK_PI) {
                assert!((zi - pi).abs() < 1e-15, "{kind}: {z:?}");
            }
        }
    }

    #[test]
    fn dense_m_bgs_is_lower_triangle() {
        let a = reflecting_walk();
        let part = BlockPartition::uniform(4, 1).unwrap();
        let m = PreparedSplitting::prepare(&a, &part, SplittingKind::Bgs)
            .unwrap()
            .dense_m(DEFAULT_DENSE_LIMIT)
            .unwrap();
        let dense = a.matrix().to_dense();
        for i in 0..4 {
            for j in 0..4 {
                let want = if j <= i { dense[i][j] } else { 0.0 };
                assert_eq!(m[(i, j)], want);
            }
        }
    }

    #[test]
    fn dense_m_stair1_pattern() {
        let a = reflecting_walk();
        let part = BlockPartition::uniform(4, 1).unwrap();
        let m = PreparedSplitting::prepare(&a, &part, SplittingKind::Stair1)
            .unwrap()
            .dense_m(DEFAULT_DENSE_LIMIT)
            .unwrap();
        let mut pattern = vec![];
        for i in 0..4 {
            for j in 0..4 {
                if m[(i, j)] != 0.0 {
                    pattern.push((i + 1, j + 1));
                }
            }
        }
        assert_eq!(pattern, vec![(1, 1), (2, 1), (2, 2), (2, 3), (3, 3), (4, 3), (4, 4)]);
    }

    #[test]
    fn dense_m_jgs_degenerate_processor_counts() {
        let a = reflecting_walk();
        let part = BlockPartition::uniform(4, 1).unwrap();
        let dm = |k| {
            PreparedSplitting::prepare(&a, &part, k)
                .unwrap()
                .dense_m(DEFAULT_DENSE_LIMIT)
                .unwrap()
        };
        assert_eq!(dm(SplittingKind::Jgs(1)), dm(SplittingKind::Bgs));
        assert_eq!(dm(SplittingKind::Jgs(4)), dm(SplittingKind::Bj));
    }

    #[test]
    fn dense_limit_refuses() {
        let a = reflecting_walk();
        let part = BlockPartition::uniform(4, 1).unwrap();
        let s = PreparedSplitting::prepare(&a, &part, SplittingKind::Bj).unwrap();
        assert!(matches!(s.dense_m(3), Err(Error::DenseLimit { n: 4, limit: 3 })));
    }

    #[test]
    fn partition_size_mismatch() {
        let a = reflecting_walk();
        let part = BlockPartition::uniform(5, 1).unwrap();
        assert!(matches!(
            PreparedSplitting::prepare(&a, &part, SplittingKind::Bj),
            Err(Error::InvalidArgument(_))
        ));
        let part = BlockPartition::uniform(4, 1).unwrap();
        assert!(PreparedSplitting::prepare(&a, &part, SplittingKind::Jgs(5)).is_err());
    }
}
