//! Benchmark chain generators: the mutual-exclusion model, random banded
//! block lower Hessenberg singular M-matrices, and nearly completely
//! decomposable (NCD) chains.
//!
//! All generators emit the canonical `A = Qᵀ` (column `j` holds the outflow
//! of state `j`) and are pure functions of their parameters.

use std::collections::BTreeMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{CanonicalChainMatrix, SparseMatrix};

/// Largest process count accepted by the mutex generator (state index table is `2ⁿ`).
pub const MUTEX_MAX_PROCESSES: usize = 26;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutexParams {
    /// Number of processes.
    pub n: usize,
    /// At most `r` processes hold the resource at once.
    pub r: usize,
    /// Per-process rate from sleeping to using.
    pub lambda: Vec<f64>,
    /// Per-process release rate.
    pub mu: Vec<f64>,
}

impl MutexParams {
    /// Uniform default rates `λ = 1`, `μ = 2`.
    pub fn new(n: usize, r: usize) -> Self {
        MutexParams::uniform(n, r, 1.0, 2.0)
    }

    pub fn uniform(n: usize, r: usize, lambda: f64, mu: f64) -> Self {
        MutexParams {
            n,
            r,
            lambda: vec![lambda; n],
            mu: vec![mu; n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_mutex_counts(self.n, self.r)?;
        if self.n > MUTEX_MAX_PROCESSES {
            return Err(Error::invalid(format!(
                "at most {MUTEX_MAX_PROCESSES} processes supported, got {}",
                self.n
            )));
        }
        if self.lambda.len() != self.n || self.mu.len() != self.n {
            return Err(Error::invalid("lambda and mu need one rate per process"));
        }
        if self.lambda.iter().chain(&self.mu).any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid("rates must be positive and finite"));
        }
        Ok(())
    }
}

fn validate_mutex_counts(n: usize, r: usize) -> Result<()> {
    if r == 0 || r > n {
        return Err(Error::invalid(format!("need 1 <= r <= n, got n={n}, r={r}")));
    }
    Ok(())
}

/// `Σ_{k=0}^{r} C(n, k)`.
pub fn mutex_state_count(n: usize, r: usize) -> Result<u128> {
    validate_mutex_counts(n, r)?;
    if n > 127 {
        return Err(Error::invalid("process count too large"));
    }
    let mut binom: u128 = 1;
    let mut total: u128 = 1;
    for k in 1..=r as u128 {
        binom = binom * (n as u128 - k + 1) / k;
        total += binom;
    }
    Ok(total)
}

/// States are subsets of at most `r` processes (bitmasks), ordered by mask value.
pub fn gen_mutex(p: &MutexParams) -> Result<CanonicalChainMatrix> {
    p.validate()?;
    let (n, r) = (p.n, p.r);
    let masks: Vec<u32> = (0u32..1 << n).filter(|m| m.count_ones() as usize <= r).collect();
    let mut index = vec![u32::MAX; 1 << n];
    for (i, &m) in masks.iter().enumerate() {
        index[m as usize] = i as u32;
    }
    let size = masks.len();
    let mut col_ptr = Vec::with_capacity(size + 1);
    let mut row_idx = Vec::new();
    let mut values = Vec::new();
    col_ptr.push(0);
    let mut column: Vec<(usize, f64)> = Vec::with_capacity(n + 1);
    for (j, &s) in masks.iter().enumerate() {
        column.clear();
        let full = s.count_ones() as usize >= r;
        let mut out = 0.0;
        for i in 0..n {
            let bit = 1u32 << i;
            let (dst, rate) = if s & bit != 0 {
                (s & !bit, p.mu[i])
            } else if !full {
                (s | bit, p.lambda[i])
            } else {
                continue;
            };
            column.push((index[dst as usize] as usize, -rate));
            out += rate;
        }
        column.push((j, out));
        column.sort_by_key(|&(row, _)| row);
        for &(row, v) in &column {
            row_idx.push(row);
            values.push(v);
        }
        col_ptr.push(row_idx.len());
    }
    CanonicalChainMatrix::new(SparseMatrix::from_csc(size, size, col_ptr, row_idx, values)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HessParams {
    /// Block size.
    pub k: usize,
    /// Number of blocks.
    pub n: usize,
    /// Nonzero block diagonals below the main one.
    pub lower_blocks: usize,
    /// Probability of keeping an in-band entry.
    pub density: f64,
    pub seed: u64,
}

impl HessParams {
    pub fn new(k: usize, n: usize, seed: u64) -> Self {
        HessParams {
            k,
            n,
            lower_blocks: 4,
            density: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n < 2 {
            return Err(Error::invalid(format!(
                "need k >= 1 and n >= 2, got k={}, n={}",
                self.k, self.n
            )));
        }
        if self.lower_blocks == 0 {
            return Err(Error::invalid("lower block bandwidth must be at least 1"));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::invalid(format!("density must lie in (0, 1], got {}", self.density)));
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.k * self.n
    }
}

/// Random singular M-matrix with block pattern `i − lower_blocks ≤ j ≤ i + 1`
/// (block row `i`, block column `j`) and scalar lower bandwidth
/// `lower_blocks · k`. Off-diagonal magnitudes are uniform in `(0, 1]`; the
/// first sub- and super-diagonals are always present.
pub fn gen_random_block_hessenberg(p: &HessParams) -> Result<CanonicalChainMatrix> {
    p.validate()?;
    let (k, size) = (p.k, p.order());
    let lower = p.lower_blocks * k;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut col_ptr = Vec::with_capacity(size + 1);
    let mut row_idx = Vec::new();
    let mut values = Vec::new();
    col_ptr.push(0);
    for c in 0..size {
        let cb = c / k;
        // Block row i may hold block column cb iff cb <= i + 1, i.e. i >= cb - 1.
        let first = cb.saturating_sub(1) * k;
        let last = (c + lower).min(size - 1);
        let mut diag_pos = 0;
        let mut out = 0.0;
        for r in first..=last {
            if r == c {
                diag_pos = row_idx.len();
                row_idx.push(r);
                values.push(0.0);
                continue;
            }
            let forced = r + 1 == c || c + 1 == r;
            let keep = rng.random::<f64>() < p.density;
            let magnitude = 1.0 - rng.random::<f64>();
            if forced || keep {
                row_idx.push(r);
                values.push(-magnitude);
                out += magnitude;
            }
        }
        values[diag_pos] = out;
        col_ptr.push(row_idx.len());
    }
    CanonicalChainMatrix::new(SparseMatrix::from_csc(size, size, col_ptr, row_idx, values)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NcdParams {
    /// Number of groups.
    pub groups: usize,
    /// States per group.
    pub group_size: usize,
    /// Intra-group rates are uniform in `(0.5, 1.0] · scale`.
    pub scale: f64,
    /// Rate between the last state of a group and the first of the next.
    pub coupling: f64,
    pub seed: u64,
}

impl NcdParams {
    pub fn new(groups: usize, group_size: usize, coupling: f64, seed: u64) -> Self {
        NcdParams {
            groups,
            group_size,
            scale: 1.0,
            coupling,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.groups < 2 || self.group_size < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 groups of at least 2 states, got {} x {}",
                self.groups, self.group_size
            )));
        }
        if !(self.coupling > 0.0) || !self.coupling.is_finite() {
            return Err(Error::invalid("coupling must be positive"));
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::invalid("intra-group scale must be positive"));
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.groups * self.group_size
    }
}

/// Dense strongly coupled groups in a chain, weakly linked neighbour to neighbour.
pub fn gen_ncd(p: &NcdParams) -> Result<CanonicalChainMatrix> {
    p.validate()?;
    let (g, s) = (p.groups, p.group_size);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut triplets = Vec::with_capacity(g * s * s + 4 * g);
    // Column `src` holds the outflow of state `src`.
    let mut outflow = vec![0.0; g * s];
    for grp in 0..g {
        let base = grp * s;
        for src in 0..s {
            for dst in 0..s {
                if src == dst {
                    continue;
                }
                let rate = (1.0 - 0.5 * rng.random::<f64>()) * p.scale;
                triplets.push((base + dst, base + src, -rate));
                outflow[base + src] += rate;
            }
        }
        if grp + 1 < g {
            let (last, next) = (base + s - 1, base + s);
            triplets.push((next, last, -p.coupling));
            triplets.push((last, next, -p.coupling));
            outflow[last] += p.coupling;
            outflow[next] += p.coupling;
        }
    }
    triplets.extend(outflow.iter().enumerate().map(|(i, &v)| (i, i, v)));
    let n = g * s;
    CanonicalChainMatrix::new(SparseMatrix::from_triplets(n, n, triplets)?)
}

/// Parsed `key = value` parameters (`#` starts a comment; `,` or newlines separate pairs).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (line_no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            for item in line.split(',') {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                let (key, value) = item
                    .split_once('=')
                    .ok_or_else(|| Error::parse(line_no + 1, format!("expected key=value, got `{item}`")))?;
                let key = key.trim().to_ascii_lowercase();
                if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(Error::parse(line_no + 1, format!("invalid key `{key}`")));
                }
                if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                    return Err(Error::parse(line_no + 1, format!("duplicate key `{key}`")));
                }
            }
        }
        Ok(KeyValues { entries })
    }

    /// Adds pairs from `other`, overriding existing keys.
    pub fn merge(&mut self, other: KeyValues) {
        self.entries.extend(other.entries);
    }

    pub fn insert(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_ascii_lowercase(), value.to_string());
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.entries
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::invalid(format!("invalid value `{v}` for `{key}`")))
            })
            .transpose()
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| Error::invalid(format!("missing parameter `{key}`")))
    }

    /// A list value written as `a;b;c`.
    pub fn get_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.entries
            .get(key)
            .map(|v| {
                v.split(';')
                    .map(|t| {
                        t.trim()
                            .parse()
                            .map_err(|_| Error::invalid(format!("invalid list item `{t}` for `{key}`")))
                    })
                    .collect()
            })
            .transpose()
    }

    fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        match self.keys().find(|k| !allowed.contains(k)) {
            Some(k) => Err(Error::invalid(format!("unknown parameter `{k}`"))),
            None => Ok(()),
        }
    }
}

/// A generator choice with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelSpec {
    Mutex(MutexParams),
    Hess(HessParams),
    Ncd(NcdParams),
}

impl ModelSpec {
    /// Builds a spec from key/value parameters. Keys:
    ///
    /// - `mutex`: `n`, `r`, `lambda`, `mu` (scalar or `;`-separated per process)
    /// - `hess`: `k`, `n`, `lower_blocks`, `density`
    /// - `ncd`: `groups`, `group_size`, `scale`, `coupling`
    ///
    /// `seed` applies to the random models.
    pub fn from_key_values(model: &str, kv: &KeyValues, seed: u64) -> Result<Self> {
        let spec = match model {
            "mutex" => {
                kv.reject_unknown(&["n", "r", "lambda", "mu", "seed"])?;
                let n: usize = kv.require("n")?;
                let r: usize = kv.require("r")?;
                let rates = |key: &str, default: f64| -> Result<Vec<f64>> {
                    Ok(match kv.get_list(key)? {
                        None => vec![default; n],
                        Some(v) if v.len() == 1 => vec![v[0]; n],
                        Some(v) => v,
                    })
                };
                ModelSpec::Mutex(MutexParams {
                    n,
                    r,
                    lambda: rates("lambda", 1.0)?,
                    mu: rates("mu", 2.0)?,
                })
            }
            "hess" => {
                kv.reject_unknown(&["k", "n", "lower_blocks", "density", "seed"])?;
                ModelSpec::Hess(HessParams {
                    k: kv.require("k")?,
                    n: kv.require("n")?,
                    lower_blocks: kv.get("lower_blocks")?.unwrap_or(4),
                    density: kv.get("density")?.unwrap_or(1.0),
                    seed: kv.get("seed")?.unwrap_or(seed),
                })
            }
            "ncd" => {
                kv.reject_unknown(&["groups", "group_size", "scale", "coupling", "seed"])?;
                ModelSpec::Ncd(NcdParams {
                    groups: kv.require("groups")?,
                    group_size: kv.require("group_size")?,
                    scale: kv.get("scale")?.unwrap_or(1.0),
                    coupling: kv.get("coupling")?.unwrap_or(1e-5),
                    seed: kv.get("seed")?.unwrap_or(seed),
                })
            }
            other => return Err(Error::invalid(format!("unknown model `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Mutex(p) => p.validate(),
            ModelSpec::Hess(p) => p.validate(),
            ModelSpec::Ncd(p) => p.validate(),
        }
    }

    pub fn generate(&self) -> Result<CanonicalChainMatrix> {
        match self {
            ModelSpec::Mutex(p) => gen_mutex(p),
            ModelSpec::Hess(p) => gen_random_block_hessenberg(p),
            ModelSpec::Ncd(p) => gen_ncd(p),
        }
    }
}
