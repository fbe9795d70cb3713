mod common;

use faer::{c64, Mat};
use rand::RngExt;

use staircase::dense::DenseMatrix;
use staircase::fixtures::reflecting_walk;
use staircase::spectral::*;
use staircase::splitting::DEFAULT_DENSE_LIMIT;
use staircase::{BlockPartition, SplittingKind};

use common::*;

/// Smallest singular value of `H − λI`, relative to `‖H‖_F`.
fn backward_error(h: &DenseMatrix, l: Eigenvalue) -> f64 {
    let n = h.n_rows();
    let shifted = Mat::from_fn(n, n, |i, j| {
        let d = if i == j { c64::new(l.re, l.im) } else { c64::new(0.0, 0.0) };
        c64::new(h[(i, j)], 0.0) - d
    });
    let s = shifted.singular_values().unwrap();
    let fro = h.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
    s.iter().copied().fold(f64::INFINITY, f64::min) / fro.max(1.0)
}

#[test]
fn eigenvalues_have_small_backward_error() {
    let mut rng = rng(31);
    for _ in 0..5 {
        let rows: Vec<Vec<f64>> = (0..50).map(|_| (0..50).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
        let h = DenseMatrix::from_rows(&rows);
        let eigs = eigenvalues(&h).unwrap();
        assert_eq!(eigs.len(), 50);
        let trace: f64 = (0..50).map(|i| h[(i, i)]).sum();
        let sum_re: f64 = eigs.iter().map(|e| e.re).sum();
        let sum_im: f64 = eigs.iter().map(|e| e.im).sum();
        assert!((trace - sum_re).abs() < 1e-10 && sum_im.abs() < 1e-10);
        for e in eigs {
            assert!(backward_error(&h, e) < 1e-12, "{e:?}");
        }
    }
}

#[test]
fn power_sums_separate_different_spectra() {
    let a = reflecting_walk();
    let part = BlockPartition::uniform(4, 1).unwrap();
    let h = |k| iteration_matrix(&a, &part, k, 16).unwrap();
    let (bgs, bs, bj) = (h(SplittingKind::Bgs), h(SplittingKind::Stair1), h(SplittingKind::Bj));
    assert!(max_abs_diff(&power_sums(&bgs, 4), &power_sums(&bs, 4)) < 1e-14);
    // BJ: 1 + 1/4 + 1/4 + 1 at j = 2 against 1 + 1/16 for BGS.
    let pj = power_sums(&bj, 4);
    assert!((pj[1] - 2.5).abs() < 1e-14, "{pj:?}");
    assert!((power_sums(&bgs, 4)[1] - 1.0625).abs() < 1e-14);
}

#[test]
fn regular_splittings_keep_eigenvalues_in_the_unit_disk() {
    let mut rng = rng(32);
    for _ in 0..6 {
        let n = rng.random_range(4..=80);
        let a = random_chain(&mut rng, n, 0.1);
        let part = random_partition(&mut rng, n, 6);
        for kind in all_kinds(&mut rng, part.n_blocks()) {
            let h = iteration_matrix(&a, &part, kind, DEFAULT_DENSE_LIMIT).unwrap();
            let r = spectral_report(&h, DEFAULT_TOL_ONE).unwrap();
            assert!(r.eigenvalues.iter().all(|e| e.norm() <= 1.0 + 1e-8), "{kind}");
            assert!(r.dominant_count >= 1);
            assert!(r.gamma <= 1.0 + 1e-8);
        }
    }
}

#[test]
fn ratios_on_hessenberg_draws_are_finite() {
    let mut rng = rng(33);
    for t in 0..4 {
        let a = staircase::models::gen_random_block_hessenberg(&staircase::models::HessParams::new(4, 8, t)).unwrap();
        let part = BlockPartition::uniform(a.order(), rng.random_range(2..=8)).unwrap();
        let r = convergence_ratios(&a, &part, DEFAULT_DENSE_LIMIT).unwrap();
        assert!(r.gamma_bgs < 1.0 && r.gamma_bs < 1.0);
        assert!(r.rho2 > 0.0);
    }
}

#[test]
fn table_is_reproducible_and_well_formed() {
    let mut cfg = Table1Config::new(3, 4, 6, vec![2, 4], 11);
    cfg.lower_blocks = 2;
    let a = table1_experiment(&cfg).unwrap();
    let b = table1_experiment(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.trials.len(), 6);
    let csv = a.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "kp,k,n,trials,max_rho1,max_rho2");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("2,4,6,3,"));
    for row in &a.rows {
        let best = a.trials.iter().filter(|t| t.kp == row.kp).map(|t| t.ratios.rho2).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(best, row.max_rho2);
    }
}
