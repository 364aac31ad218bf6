//! Shared domain types and exact combinatorial primitives.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of a random product-set experiment: `s` independent sets
/// `A_i ~ B(n_i, alpha_i)` raised to exponents `k_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "RawConfig")]
pub struct ExperimentConfig {
    n: Vec<u64>,
    alpha: Vec<f64>,
    k: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n: Vec<u64>,
    alpha: Vec<f64>,
    k: Vec<u32>,
}

impl TryFrom<RawConfig> for ExperimentConfig {
    type Error = Error;

    fn try_from(raw: RawConfig) -> Result<Self> {
        ExperimentConfig::new(raw.n, raw.alpha, raw.k)
    }
}

impl From<ExperimentConfig> for RawConfig {
    fn from(c: ExperimentConfig) -> Self {
        RawConfig {
            n: c.n,
            alpha: c.alpha,
            k: c.k,
        }
    }
}

impl ExperimentConfig {
    pub fn new(n: Vec<u64>, alpha: Vec<f64>, k: Vec<u32>) -> Result<Self> {
        if n.is_empty() {
            return Err(Error::domain("experiment needs at least one set"));
        }
        if alpha.len() != n.len() || k.len() != n.len() {
            return Err(Error::domain(format!(
                "array lengths differ: n has {}, alpha has {}, k has {}",
                n.len(),
                alpha.len(),
                k.len()
            )));
        }
        if let Some(i) = n.iter().position(|&v| v == 0) {
            return Err(Error::domain(format!("n[{i}] must be at least 1")));
        }
        if let Some(i) = k.iter().position(|&v| v == 0) {
            return Err(Error::domain(format!("k[{i}] must be at least 1")));
        }
        if let Some(i) = alpha.iter().position(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::domain(format!(
                "alpha[{i}] = {} is not a probability",
                alpha[i]
            )));
        }
        Ok(ExperimentConfig { n, alpha, k })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::domain(format!("invalid config: {e}")))
    }

    pub fn s(&self) -> usize {
        self.n.len()
    }

    pub fn n(&self) -> &[u64] {
        &self.n
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn k(&self) -> &[u32] {
        &self.k
    }
}

/// Unordered `k`-tuples drawn from `{1..n}` with exactly `m` distinct values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TupleProfile {
    k: u64,
    m: u64,
    n: u64,
}

impl TupleProfile {
    pub fn new(k: u64, m: u64, n: u64) -> Result<Self> {
        if m == 0 || m > k || m > n {
            return Err(Error::domain(format!(
                "tuple profile needs 1 <= m <= min(n, k); got k={k}, m={m}, n={n}"
            )));
        }
        Ok(TupleProfile { k, m, n })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> u64 {
        self.n
    }
}

/// Diagnostics for how deep a configuration sits inside the asymptotic regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// `(log n_1)^(k_1 - 1) * prod_{i>=2} (log n_i)^(k_i)`.
    #[serde(rename = "L")]
    pub log_product: f64,
    /// `k_1 + ... + k_s`.
    #[serde(rename = "K")]
    pub total_exponent: u64,
    /// `alpha_i * L^((K - 1) / 2)`; smaller is deeper inside the regime.
    pub ratios: Vec<f64>,
}

/// Exact binomial coefficient, zero when `r > n`.
pub fn binomial(n: u64, r: u64) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    // acc = C(n, i) after step i, so every division is exact.
    for i in 0..r {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(n, m) * C(k - 1, m - 1)`.
pub fn count_unordered_tuples(profile: TupleProfile) -> BigUint {
    binomial(profile.n, profile.m) * binomial(profile.k - 1, profile.m - 1)
}

/// Row `S(k, 0..=k)` of the Stirling numbers of the second kind.
pub fn stirling2_row(k: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for i in 1..=k {
        let mut next = vec![BigUint::zero(); i + 1];
        for j in 1..=i {
            let mut v = row[j - 1].clone();
            if j < i {
                v += &row[j] * BigUint::from(j);
            }
            next[j] = v;
        }
        row = next;
    }
    row
}

/// Stirling number of the second kind `S(k, j)`.
pub fn stirling2(k: u64, j: u64) -> BigUint {
    if j > k {
        return BigUint::zero();
    }
    stirling2_row(k as usize).swap_remove(j as usize)
}

/// Evaluates the asymptotic-regime quantity for `config`.
///
/// Logarithms are natural. The inner product runs over sets `2..=s` and is
/// the same for every outer index.
pub fn condition_ratios(config: &ExperimentConfig) -> Result<ConditionReport> {
    if let Some(i) = config.n.iter().position(|&v| v < 2) {
        return Err(Error::domain(format!(
            "n[{i}] = {} is below 2; regime ratios need positive logarithms",
            config.n[i]
        )));
    }
    let mut log_product = 1.0;
    for (i, (&n, &k)) in config.n.iter().zip(&config.k).enumerate() {
        let exp = if i == 0 { k - 1 } else { k };
        log_product *= (n as f64).ln().powi(exp as i32);
    }
    let total_exponent: u64 = config.k.iter().map(|&k| k as u64).sum();
    let scale = log_product.powf((total_exponent as f64 - 1.0) / 2.0);
    let ratios = config.alpha.iter().map(|a| a * scale).collect();
    Ok(ConditionReport {
        log_product,
        total_exponent,
        ratios,
    })
}
