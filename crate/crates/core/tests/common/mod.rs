//! Test-side oracles, written without reusing library internals.
#![allow(dead_code)]

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use staircase::{BlockPartition, CanonicalChainMatrix, SparseMatrix, SplittingKind};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random irreducible canonical matrix: a forced cycle through all states plus
/// extra off-diagonal rates with probability `density`.
pub fn random_chain(rng: &mut ChaCha8Rng, n: usize, density: f64) -> CanonicalChainMatrix {
    let mut a = vec![vec![0.0; n]; n];
    for src in 0..n {
        let dst = (src + 1) % n;
        if dst != src {
            a[dst][src] = -(0.1 + rng.random::<f64>());
        }
        for dst in 0..n {
            if dst != src && a[dst][src] == 0.0 && rng.random::<f64>() < density {
                a[dst][src] = -(1.0 - rng.random::<f64>());
            }
        }
    }
    for c in 0..n {
        let out: f64 = (0..n).filter(|&r| r != c).map(|r| -a[r][c]).sum();
        a[c][c] = out;
    }
    CanonicalChainMatrix::new(SparseMatrix::from_dense(&a).unwrap()).unwrap()
}

/// Random block sizes in `[1, max_block]` summing to `n`, with at least two
/// blocks (a single block is the whole singular matrix).
pub fn random_partition(rng: &mut ChaCha8Rng, n: usize, max_block: usize) -> BlockPartition {
    let max_block = max_block.min(n - 1).max(1);
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let s = rng.random_range(1..=max_block.min(left));
        sizes.push(s);
        left -= s;
    }
    BlockPartition::from_sizes(&sizes).unwrap()
}

pub fn random_kind(rng: &mut ChaCha8Rng, n_blocks: usize) -> SplittingKind {
    match rng.random_range(0..5) {
        0 => SplittingKind::Bj,
        1 => SplittingKind::Bgs,
        2 => SplittingKind::Jgs(rng.random_range(1..=n_blocks)),
        3 => SplittingKind::Stair1,
        _ => SplittingKind::Stair2,
    }
}

pub fn all_kinds(rng: &mut ChaCha8Rng, n_blocks: usize) -> [SplittingKind; 5] {
    [
        SplittingKind::Bj,
        SplittingKind::Bgs,
        SplittingKind::Jgs(rng.random_range(1..=n_blocks)),
        SplittingKind::Stair1,
        SplittingKind::Stair2,
    ]
}

pub fn block_index(sizes: &[usize]) -> Vec<usize> {
    sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect()
}

/// Block row groups used by JGS: `p` contiguous runs, the first `nb mod p` one longer.
pub fn group_of(n_blocks: usize, p: usize) -> Vec<usize> {
    let (q, r) = (n_blocks / p, n_blocks % p);
    (0..p).flat_map(|g| std::iter::repeat_n(g, q + usize::from(g < r))).collect()
}

/// Whether block `(i, k)` belongs to `M`, straight from the splitting definitions.
pub fn block_in_m(kind: SplittingKind, n_blocks: usize, i: usize, k: usize) -> bool {
    match kind {
        SplittingKind::Bj => i == k,
        SplittingKind::Bgs => k <= i,
        SplittingKind::Jgs(p) => {
            let g = group_of(n_blocks, p);
            k <= i && g[i] == g[k]
        }
        // 1-based even block rows hold the triple.
        SplittingKind::Stair1 => i == k || ((i + 1) % 2 == 0 && i.abs_diff(k) == 1),
        SplittingKind::Stair2 => i == k || ((i + 1) % 2 == 1 && i.abs_diff(k) == 1),
    }
}

/// Dense `M` built from the dense `A`.
pub fn oracle_m(a: &[Vec<f64>], sizes: &[usize], kind: SplittingKind) -> Vec<Vec<f64>> {
    let blk = block_index(sizes);
    let n = a.len();
    let mut m = vec![vec![0.0; n]; n];
    for r in 0..n {
        for c in 0..n {
            if block_in_m(kind, sizes.len(), blk[r], blk[c]) {
                m[r][c] = a[r][c];
            }
        }
    }
    m
}

pub fn dense_of(a: &CanonicalChainMatrix) -> Vec<Vec<f64>> {
    a.matrix().to_dense()
}

pub fn matvec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(m: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut a: Vec<Vec<f64>> = m.iter().zip(b).map(|(r, &bi)| {
        let mut row = r.clone();
        row.push(bi);
        row
    }).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        let d = a[col][col];
        assert!(d != 0.0, "singular system");
        for r in col + 1..n {
            let f = a[r][col] / d;
            if f != 0.0 {
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][n] - s) / a[r][r];
    }
    x
}

/// One sweep `z = M⁻¹ (M − A) x` computed densely.
pub fn oracle_sweep(a: &[Vec<f64>], sizes: &[usize], kind: SplittingKind, x: &[f64]) -> Vec<f64> {
    let m = oracle_m(a, sizes, kind);
    let n = a.len();
    let nm: Vec<Vec<f64>> = (0..n).map(|r| (0..n).map(|c| m[r][c] - a[r][c]).collect()).collect();
    gauss_solve(&m, &matvec(&nm, x))
}

pub fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|t| t / s).collect()
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Largest distance in a greedy nearest-neighbour matching of two complex multisets.
pub fn multiset_distance(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    let mut order: Vec<usize> = (0..a.len()).collect();
    // Match the largest magnitudes first; they are the best conditioned.
    order.sort_by(|&i, &j| a[j].0.hypot(a[j].1).total_cmp(&a[i].0.hypot(a[i].1)));
    for i in order {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, e)| (j, (e.0 - a[i].0).hypot(e.1 - a[i].1)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Stationary vector of the uniform mutual-exclusion chain: `π(S) ∝ (λ/μ)^|S|`
/// over subsets of at most `r` of `n` processes, in increasing bitmask order.
pub fn mutex_product_form(n: usize, r: usize, lambda: f64, mu: f64) -> Vec<f64> {
    let w: Vec<f64> = (0u32..1 << n)
        .filter(|m| m.count_ones() as usize <= r)
        .map(|m| (lambda / mu).powi(m.count_ones() as i32))
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|t| t / s).collect()
}

/// `tr(Hʲ)` for `j = 1..=count`, from `tr(Hᵃ⁺ᵇ) = Σ (Hᵃ)ᵢₗ (Hᵇ)ₗᵢ` with `a < s`
/// and `b` a multiple of `s ≈ √count`. Zero eigenvalues contribute nothing
/// whatever their Jordan structure, so equal power sums for every `j ≤ N`
/// certify equal spectra even when the eigenvalues themselves are ill-conditioned.
pub fn power_sums(h: &staircase::dense::DenseMatrix, count: usize) -> Vec<f64> {
    use faer::Mat;
    let n = h.n_rows();
    let hm = Mat::from_fn(n, n, |i, j| h[(i, j)]);
    let s = ((count as f64).sqrt().ceil() as usize).max(1);
    let mut small = vec![Mat::<f64>::identity(n, n)];
    for a in 1..s {
        small.push(&small[a - 1] * &hm);
    }
    let step = &small[s - 1] * &hm;
    let mut sums = vec![0.0; count + 1];
    let mut big = Mat::<f64>::identity(n, n);
    let mut b = 0;
    while b <= count {
        for (a, ha) in small.iter().enumerate() {
            let j = a + b;
            if j == 0 || j > count {
                continue;
            }
            let mut t = 0.0;
            for i in 0..n {
                for l in 0..n {
                    t += ha[(i, l)] * big[(l, i)];
                }
            }
            sums[j] = t;
        }
        big = &big * &step;
        b += s;
    }
    sums.remove(0);
    sums
}

/// Normalized null vector of a dense canonical matrix: the last equation is
/// replaced by `eᵀπ = 1`.
pub fn null_vector(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m = a.to_vec();
    m[n - 1] = vec![1.0; n];
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    gauss_solve(&m, &b)
}
