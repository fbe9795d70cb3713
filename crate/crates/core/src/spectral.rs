//! Dense iteration matrices `H = M⁻¹N`, their spectra, the subdominant
//! magnitude `γ`, and the convergence-rate ratios against block Gauss-Seidel.

use faer::linalg::solvers::Solve;
use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::models::{gen_random_block_hessenberg, HessParams};
use crate::sparse::{BlockPartition, CanonicalChainMatrix};
use crate::splitting::{PreparedSplitting, SplittingKind};

/// An eigenvalue must lie this close to 1 to count as the unit eigenvalue.
pub const UNIT_EIGENVALUE_TOL: f64 = 1e-6;
/// Default `tol_one`: magnitudes at or above `1 − tol_one` count as dominant.
pub const DEFAULT_TOL_ONE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl Eigenvalue {
    pub fn new(re: f64, im: f64) -> Self {
        Eigenvalue { re, im }
    }

    pub fn norm(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn dist(&self, other: Eigenvalue) -> f64 {
        (self.re - other.re).hypot(self.im - other.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub eigenvalues: Vec<Eigenvalue>,
    pub gamma: f64,
    pub dominant_count: usize,
}

fn to_faer(m: &DenseMatrix) -> Mat<f64> {
    Mat::from_fn(m.n_rows(), m.n_cols(), |i, j| m[(i, j)])
}

fn from_faer(m: &Mat<f64>) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(m.nrows(), m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out[(i, j)] = m[(i, j)];
        }
    }
    out
}

/// `H = M⁻¹ (M − A)` for the splitting of `a` given by `kind` and `partition`.
pub fn iteration_matrix(
    a: &CanonicalChainMatrix,
    partition: &BlockPartition,
    kind: SplittingKind,
    limit: usize,
) -> Result<DenseMatrix> {
    let n = a.order();
    if n > limit {
        return Err(Error::DenseLimit { n, limit });
    }
    let s = PreparedSplitting::prepare(a, partition, kind)?;
    iteration_matrix_of(&s, limit)
}

pub fn iteration_matrix_of(s: &PreparedSplitting, limit: usize) -> Result<DenseMatrix> {
    let m = to_faer(&s.dense_m(limit)?);
    let mut rhs = m.clone();
    for (r, c, v) in s.matrix().matrix().iter() {
        rhs[(r, c)] -= v;
    }
    let h = m.partial_piv_lu().solve(&rhs);
    if h.col_iter().any(|c| c.iter().any(|v| !v.is_finite())) {
        return Err(Error::NumericFailure("iteration matrix is not finite".into()));
    }
    Ok(from_faer(&h))
}

/// All eigenvalues of a real square matrix.
pub fn eigenvalues(h: &DenseMatrix) -> Result<Vec<Eigenvalue>> {
    if h.n_rows() != h.n_cols() {
        return Err(Error::invalid("eigenvalues need a square matrix"));
    }
    if h.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericFailure("matrix has non-finite entries".into()));
    }
    if h.n_rows() == 0 {
        return Ok(Vec::new());
    }
    let eigs = to_faer(h)
        .eigenvalues()
        .map_err(|e| Error::NumericFailure(format!("eigensolver did not converge: {e:?}")))?;
    Ok(eigs.into_iter().map(|z| Eigenvalue::new(z.re, z.im)).collect())
}

/// Drops the single eigenvalue closest to 1 and returns the largest remaining magnitude.
pub fn subdominant_gamma(eigs: &[Eigenvalue]) -> Result<f64> {
    let one = Eigenvalue::new(1.0, 0.0);
    let (unit, distance) = eigs
        .iter()
        .enumerate()
        .map(|(i, e)| (i, e.dist(one)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::invalid("empty eigenvalue list"))?;
    if distance > UNIT_EIGENVALUE_TOL {
        return Err(Error::NotAStochasticSplitting { distance });
    }
    Ok(eigs
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != unit)
        .map(|(_, e)| e.norm())
        .fold(0.0, f64::max))
}

pub fn spectral_report(h: &DenseMatrix, tol_one: f64) -> Result<SpectralReport> {
    let eigenvalues = eigenvalues(h)?;
    let gamma = subdominant_gamma(&eigenvalues)?;
    let dominant_count = eigenvalues.iter().filter(|e| e.norm() >= 1.0 - tol_one).count();
    Ok(SpectralReport {
        eigenvalues,
        gamma,
        dominant_count,
    })
}

/// `log(1/γ_bgs) / log(1/γ_other)`, infinite when the other method does not converge.
pub fn rate_ratio(gamma_bgs: f64, gamma_other: f64) -> f64 {
    if gamma_other >= 1.0 - DEFAULT_TOL_ONE {
        return f64::INFINITY;
    }
    let num = -gamma_bgs.ln();
    let den = -gamma_other.ln();
    match (num.is_infinite(), den.is_infinite()) {
        (true, true) => 1.0,
        (false, true) => 0.0,
        _ => (num / den).max(0.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRatios {
    pub gamma_bj: f64,
    pub gamma_bgs: f64,
    pub gamma_bs: f64,
    /// `log(1/γ_BGS) / log(1/γ_BJ)`.
    pub rho1: f64,
    /// `log(1/γ_BGS) / log(1/γ_BS)` with `BS` the type-1 staircase.
    pub rho2: f64,
}

pub fn convergence_ratios(
    a: &CanonicalChainMatrix,
    partition: &BlockPartition,
    limit: usize,
) -> Result<ConvergenceRatios> {
    let gamma = |kind| -> Result<f64> {
        let h = iteration_matrix(a, partition, kind, limit)?;
        subdominant_gamma(&eigenvalues(&h)?)
    };
    let gamma_bj = gamma(SplittingKind::Bj)?;
    let gamma_bgs = gamma(SplittingKind::Bgs)?;
    let gamma_bs = gamma(SplittingKind::Stair1)?;
    Ok(ConvergenceRatios {
        gamma_bj,
        gamma_bgs,
        gamma_bs,
        rho1: rate_ratio(gamma_bgs, gamma_bj),
        rho2: rate_ratio(gamma_bgs, gamma_bs),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Config {
    pub trials: usize,
    pub k: usize,
    pub n: usize,
    pub kp: Vec<usize>,
    pub seed: u64,
    pub lower_blocks: usize,
    pub dense_limit: usize,
}

impl Table1Config {
    pub fn new(trials: usize, k: usize, n: usize, kp: Vec<usize>, seed: u64) -> Self {
        Table1Config {
            trials,
            k,
            n,
            kp,
            seed,
            lower_blocks: 4,
            dense_limit: crate::splitting::DEFAULT_DENSE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRatios {
    pub trial: usize,
    pub seed: u64,
    pub kp: usize,
    pub ratios: ConvergenceRatios,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub kp: usize,
    pub max_rho1: f64,
    pub max_rho2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Result {
    pub config: Table1Config,
    pub rows: Vec<Table1Row>,
    pub trials: Vec<TrialRatios>,
}

/// Seed of trial `t` given the experiment seed.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(trial as u64)
}

/// Random block Hessenberg instances, each analysed under every partition block size.
pub fn table1_experiment(cfg: &Table1Config) -> Result<Table1Result> {
    if cfg.trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    if cfg.kp.is_empty() {
        return Err(Error::invalid("need at least one partition block size"));
    }
    let per_trial: Vec<Vec<TrialRatios>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(cfg.seed, trial);
            let a = gen_random_block_hessenberg(&HessParams {
                k: cfg.k,
                n: cfg.n,
                lower_blocks: cfg.lower_blocks,
                density: 1.0,
                seed,
            })?;
            cfg.kp
                .iter()
                .map(|&kp| {
                    let part = BlockPartition::uniform(a.order(), kp)?;
                    Ok(TrialRatios {
                        trial,
                        seed,
                        kp,
                        ratios: convergence_ratios(&a, &part, cfg.dense_limit)?,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let trials: Vec<TrialRatios> = per_trial.into_iter().flatten().collect();
    let rows = cfg
        .kp
        .iter()
        .map(|&kp| {
            let of_kp = || trials.iter().filter(move |t| t.kp == kp);
            Table1Row {
                kp,
                max_rho1: of_kp().map(|t| t.ratios.rho1).fold(f64::NEG_INFINITY, f64::max),
                max_rho2: of_kp().map(|t| t.ratios.rho2).fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();
    Ok(Table1Result {
        config: cfg.clone(),
        rows,
        trials,
    })
}

impl Table1Result {
    /// `kp,k,n,trials,max_rho1,max_rho2`, one row per partition block size.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kp,k,n,trials,max_rho1,max_rho2\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.kp,
                self.config.k,
                self.config.n,
                self.config.trials,
                crate::bench::fmt_sig6(r.max_rho1),
                crate::bench::fmt_sig6(r.max_rho2)
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::reflecting_walk;
    use crate::splitting::DEFAULT_DENSE_LIMIT;

    fn sorted(mut v: Vec<Eigenvalue>) -> Vec<Eigenvalue> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    fn assert_spectrum(got: Vec<Eigenvalue>, want: &[f64], tol: f64) {
        let got = sorted(got);
        let mut want = want.to_vec();
        want.sort_by(f64::total_cmp);
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert!(g.dist(Eigenvalue::new(*w, 0.0)) < tol, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn trivial_spectra() {
        let id = DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        assert_spectrum(eigenvalues(&id).unwrap(), &[1.0, 1.0, 1.0], 1e-14);
        let swap = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_spectrum(eigenvalues(&swap).unwrap(), &[-1.0, 1.0], 1e-14);
    }

    #[test]
    fn reflecting_walk_iteration_spectra() {
        let a = reflecting_walk();
        let part = BlockPartition::uniform(4, 1).unwrap();
        let spec = |k| eigenvalues(&iteration_matrix(&a, &part, k, DEFAULT_DENSE_LIMIT).unwrap()).unwrap();
        assert_spectrum(spec(SplittingKind::Bj), &[-1.0, 1.0, -0.5, 0.5], 1e-10);
        assert_spectrum(spec(SplittingKind::Bgs), &[1.0, 0.25, 0.0, 0.0], 1e-10);
        assert_spectrum(spec(SplittingKind::Stair1), &[1.0, 0.25, 0.0, 0.0], 1e-10);
        assert_spectrum(spec(SplittingKind::Stair2), &[1.0, 0.25, 0.0, 0.0], 1e-10);
    }

    #[test]
    fn gamma_cases() {
        let e = |v: &[f64]| v.iter().map(|&x| Eigenvalue::new(x, 0.0)).collect::<Vec<_>>();
        assert_eq!(subdominant_gamma(&e(&[1.0, 0.25, 0.0, 0.0])).unwrap(), 0.25);
        assert_eq!(subdominant_gamma(&e(&[-1.0, 1.0, -0.5, 0.5])).unwrap(), 1.0);
        assert_eq!(subdominant_gamma(&e(&[1.0])).unwrap(), 0.0);
        assert!(matches!(
            subdominant_gamma(&e(&[0.9, 0.1])),
            Err(Error::NotAStochasticSplitting { .. })
        ));
        assert!(subdominant_gamma(&[]).is_err());
        // Only one unit eigenvalue is removed; a repeated one stays.
        assert_eq!(subdominant_gamma(&e(&[1.0, 1.0, 0.5])).unwrap(), 1.0);
    }

    #[test]
    fn reflecting_walk_ratios() {
        let a = reflecting_walk();
        let part = BlockPartition::uniform(4, 1).unwrap();
        let r = convergence_ratios(&a, &part, DEFAULT_DENSE_LIMIT).unwrap();
        assert_eq!(r.rho1, f64::INFINITY);
        assert!((r.rho2 - 1.0).abs() < 1e-10);
        assert!((r.gamma_bgs - 0.25).abs() < 1e-10);
    }

    #[test]
    fn rate_ratio_edges() {
        assert_eq!(rate_ratio(0.25, 1.0), f64::INFINITY);
        assert_eq!(rate_ratio(0.0, 0.0), 1.0);
        assert_eq!(rate_ratio(0.5, 0.0), 0.0);
        assert_eq!(rate_ratio(0.0, 0.5), f64::INFINITY);
        assert!((rate_ratio(0.25, 0.5) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn dense_limit_refuses() {
        let a = reflecting_walk();
        let part = BlockPartition::uniform(4, 1).unwrap();
        assert!(matches!(
            iteration_matrix(&a, &part, SplittingKind::Bgs, 2),
            Err(Error::DenseLimit { .. })
        ));
    }

    #[test]
    fn small_table_tridiagonal_draw() {
        // k = 1 with one lower block diagonal gives a tridiagonal matrix.
        let mut cfg = Table1Config::new(1, 1, 4, vec![1], 3);
        cfg.lower_blocks = 1;
        let res = table1_experiment(&cfg).unwrap();
        assert_eq!(res.rows.len(), 1);
        assert!((res.rows[0].max_rho2 - 1.0).abs() < 1e-6, "{res:?}");
        assert!(res.to_csv().starts_with("kp,k,n,trials,max_rho1,max_rho2\n1,1,4,1,"));
        assert!(table1_experiment(&Table1Config::new(0, 1, 4, vec![1], 3)).is_err());
    }
}
