//! Benchmark harness: solves over worker counts, speedup `S_p = T_seq / T_par(m)`
//! and efficiency `E = S_p / m`.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::solver::{solve_with, SolveOptions};
use crate::sparse::{BlockPartition, CanonicalChainMatrix};
use crate::splitting::{PreparedSplitting, SplittingKind};

/// A benchmarked method. `JgsPerWorker` uses one processor group per worker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum BenchMethod {
    Fixed(SplittingKind),
    JgsPerWorker,
}

impl BenchMethod {
    pub fn kind_for(self, workers: usize) -> SplittingKind {
        match self {
            BenchMethod::Fixed(k) => k,
            BenchMethod::JgsPerWorker => SplittingKind::Jgs(workers),
        }
    }
}

impl fmt::Display for BenchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchMethod::Fixed(k) => k.fmt(f),
            BenchMethod::JgsPerWorker => f.write_str("jgs"),
        }
    }
}

impl FromStr for BenchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("jgs") {
            Ok(BenchMethod::JgsPerWorker)
        } else {
            s.parse().map(BenchMethod::Fixed)
        }
    }
}

impl From<BenchMethod> for String {
    fn from(m: BenchMethod) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for BenchMethod {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Converged,
    Maxit,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub matrix: String,
    pub method: String,
    pub ell: usize,
    /// Processor groups (JGS only).
    pub p: Option<usize>,
    pub m: usize,
    pub t_seconds: f64,
    pub iterations: usize,
    pub converged: bool,
    pub status: CellStatus,
    pub speedup: f64,
    pub efficiency: f64,
    pub prepare_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub matrix_id: String,
    pub methods: Vec<BenchMethod>,
    pub ell: usize,
    pub workers: Vec<usize>,
    pub solve: SolveOptions,
    /// Runs per cell; the minimum time is kept.
    pub repeats: usize,
}

impl BenchConfig {
    pub fn new(matrix_id: impl Into<String>, methods: Vec<BenchMethod>, ell: usize, workers: Vec<usize>) -> Self {
        BenchConfig {
            matrix_id: matrix_id.into(),
            methods,
            ell,
            workers,
            solve: SolveOptions::default(),
            repeats: 3,
        }
    }
}

/// Per-cell residual history, kept when requested.
#[derive(Debug, Clone, PartialEq)]
pub struct CellHistory {
    pub method: String,
    pub m: usize,
    pub residuals: Vec<f64>,
}

/// Runs every `(method, m)` cell sequentially. `m = 1` is always included.
pub fn run_bench(
    a: &CanonicalChainMatrix,
    cfg: &BenchConfig,
    mut histories: Option<&mut Vec<CellHistory>>,
) -> Result<Vec<BenchRecord>> {
    if cfg.repeats == 0 {
        return Err(Error::invalid("need at least one repeat per cell"));
    }
    if cfg.workers.contains(&0) {
        return Err(Error::invalid("worker counts must be at least 1"));
    }
    let mut workers = cfg.workers.clone();
    if !workers.contains(&1) {
        workers.insert(0, 1);
    }
    workers.sort_unstable();
    workers.dedup();
    let partition = BlockPartition::uniform(a.order(), cfg.ell)?;

    let mut records = Vec::new();
    for &method in &cfg.methods {
        let mut t_seq = None;
        for &m in &workers {
            let kind = method.kind_for(m);
            let prep_start = std::time::Instant::now();
            let splitting = PreparedSplitting::prepare(a, &partition, kind)?;
            let prepare_seconds = prep_start.elapsed().as_secs_f64();
            let exec = Executor::new(m)?;
            let opts = SolveOptions { workers: m, ..cfg.solve.clone() };
            let mut best: Option<(f64, usize, CellStatus, Vec<f64>)> = None;
            for _ in 0..cfg.repeats {
                let (t, iterations, status, hist) = match solve_with(&splitting, &exec, &opts) {
                    Ok(r) => {
                        let status = if r.converged { CellStatus::Converged } else { CellStatus::Maxit };
                        (r.iterate_seconds, r.iterations, status, r.residual_history)
                    }
                    Err(Error::Diverged { iteration }) => (f64::NAN, iteration, CellStatus::Diverged, Vec::new()),
                    Err(e) => return Err(e),
                };
                if best.as_ref().is_none_or(|b| t < b.0 || b.0.is_nan()) {
                    best = Some((t, iterations, status, hist));
                }
            }
            let (t, iterations, status, hist) = best.unwrap();
            if m == 1 {
                t_seq = Some(t);
            }
            let speedup = t_seq.map_or(f64::NAN, |ts| if m == 1 { 1.0 } else { ts / t });
            if let Some(h) = histories.as_deref_mut() {
                h.push(CellHistory { method: method.to_string(), m, residuals: hist });
            }
            records.push(BenchRecord {
                matrix: cfg.matrix_id.clone(),
                method: method.to_string(),
                ell: cfg.ell,
                p: match kind {
                    SplittingKind::Jgs(p) => Some(p),
                    _ => None,
                },
                m,
                t_seconds: t,
                iterations,
                converged: status == CellStatus::Converged,
                status,
                speedup,
                efficiency: speedup / m as f64,
                prepare_seconds,
            });
        }
    }
    Ok(records)
}

/// Formats like C's `%.6g`.
pub fn fmt_sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const CSV_HEADER: &str =
    "matrix,method,ell,p,m,T_seconds,iterations,converged,speedup,efficiency,prepare_seconds";

pub fn records_to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.matrix,
            r.method,
            r.ell,
            r.p.map_or(String::new(), |p| p.to_string()),
            r.m,
            fmt_sig6(r.t_seconds),
            r.iterations,
            r.converged,
            fmt_sig6(r.speedup),
            fmt_sig6(r.efficiency),
            fmt_sig6(r.prepare_seconds),
        ));
    }
    out
}

pub fn emit_csv(records: &[BenchRecord], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, records_to_csv(records))?;
    Ok(())
}

pub fn emit_json(records: &[BenchRecord], path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(records).map_err(|e| Error::invalid(e.to_string()))?;
    fs::write(path, text)?;
    Ok(())
}
