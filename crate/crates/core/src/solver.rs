//! Outer iteration `M x⁽ᵏ⁺¹⁾ = N x⁽ᵏ⁾` followed by normalization `eᵀx = 1`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::sparse::{BlockPartition, CanonicalChainMatrix};
use crate::splitting::{PreparedSplitting, SplittingKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialVector {
    /// `e / N`.
    Uniform,
    /// Any nonnegative vector with positive sum; normalized before use.
    Given(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Stop once `‖x⁽ᵏ⁺¹⁾ − x⁽ᵏ⁾‖₁ ≤ tol`.
    pub tol: f64,
    pub maxit: usize,
    pub workers: usize,
    pub initial: InitialVector,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1.0e-9,
            maxit: 10_000,
            workers: 1,
            initial: InitialVector::Uniform,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.maxit == 0 {
            return Err(Error::invalid("maxit must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::invalid("worker count must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub pi: Vec<f64>,
    pub iterations: usize,
    /// `err_k` for every iteration performed.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Seconds spent in the iteration loop.
    pub iterate_seconds: f64,
    /// Seconds spent preparing the splitting (zero for `solve_prepared`).
    pub prepare_seconds: f64,
}

/// Single-step driver over a prepared splitting; `solve_prepared` loops it.
pub struct StationaryIteration<'a> {
    splitting: &'a PreparedSplitting,
    exec: &'a Executor,
    x: Vec<f64>,
    z: Vec<f64>,
    steps: usize,
}

impl<'a> StationaryIteration<'a> {
    pub fn new(splitting: &'a PreparedSplitting, exec: &'a Executor, initial: &InitialVector) -> Result<Self> {
        let n = splitting.partition().order();
        let x = match initial {
            InitialVector::Uniform => vec![1.0 / n as f64; n],
            InitialVector::Given(v) => {
                if v.len() != n {
                    return Err(Error::invalid(format!("initial vector has length {}, expected {n}", v.len())));
                }
                if v.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
                    return Err(Error::invalid("initial vector must be finite and nonnegative"));
                }
                let s: f64 = v.iter().sum();
                if !(s > 0.0) {
                    return Err(Error::invalid("initial vector must have positive sum"));
                }
                v.iter().map(|t| t / s).collect()
            }
        };
        Ok(StationaryIteration {
            splitting,
            exec,
            x,
            z: vec![0.0; n],
            steps: 0,
        })
    }

    /// Current normalized iterate.
    pub fn current(&self) -> &[f64] {
        &self.x
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Sweeps, normalizes and returns `‖z − x‖₁`.
    pub fn step(&mut self) -> Result<f64> {
        self.steps += 1;
        self.splitting.sweep(self.exec, &self.x, &mut self.z);
        let total: f64 = self.z.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Diverged { iteration: self.steps });
        }
        let inv = 1.0 / total;
        let mut err = 0.0;
        for (zi, xi) in self.z.iter_mut().zip(&self.x) {
            *zi *= inv;
            err += (*zi - xi).abs();
        }
        if !err.is_finite() {
            return Err(Error::Diverged { iteration: self.steps });
        }
        std::mem::swap(&mut self.x, &mut self.z);
        Ok(err)
    }

    pub fn into_vector(self) -> Vec<f64> {
        self.x
    }
}

/// Iterates an already prepared splitting until `err ≤ tol` or `maxit` steps.
pub fn solve_prepared(splitting: &PreparedSplitting, opts: &SolveOptions) -> Result<SolveReport> {
    opts.validate()?;
    let exec = Executor::new(opts.workers)?;
    solve_with(splitting, &exec, opts)
}

/// As [`solve_prepared`] with a caller-owned executor.
pub fn solve_with(splitting: &PreparedSplitting, exec: &Executor, opts: &SolveOptions) -> Result<SolveReport> {
    opts.validate()?;
    let start = Instant::now();
    let mut it = StationaryIteration::new(splitting, exec, &opts.initial)?;
    let mut history = Vec::new();
    let mut converged = false;
    while it.steps() < opts.maxit {
        let err = it.step()?;
        history.push(err);
        if err <= opts.tol {
            converged = true;
            break;
        }
    }
    let iterate_seconds = start.elapsed().as_secs_f64();
    Ok(SolveReport {
        iterations: it.steps(),
        pi: it.into_vector(),
        residual_history: history,
        converged,
        iterate_seconds,
        prepare_seconds: 0.0,
    })
}

pub fn solve_stationary(
    a: &CanonicalChainMatrix,
    partition: &BlockPartition,
    kind: SplittingKind,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    opts.validate()?;
    let start = Instant::now();
    let splitting = PreparedSplitting::prepare(a, partition, kind)?;
    let prepare_seconds = start.elapsed().as_secs_f64();
    let mut report = solve_prepared(&splitting, opts)?;
    report.prepare_seconds = prepare_seconds;
    Ok(report)
}

/// `‖A x‖₁`.
pub fn residual_check(a: &CanonicalChainMatrix, x: &[f64]) -> f64 {
    a.matrix().mul_vec(x).iter().map(|v| v.abs()).sum()
}

/// Writes `iteration,err` lines (1-based iterations) with a header.
pub fn residual_csv(history: &[f64]) -> String {
    let mut out = String::from("iteration,err\n");
    for (k, e) in history.iter().enumerate() {
        out.push_str(&format!("{},{:e}\n", k + 1, e));
    }
    out
}
