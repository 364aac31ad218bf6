//! Seeded Monte Carlo checks of the product-set asymptotics.
//!
//! Trial `t` draws set `i` from stream `derive_stream(seed, t, i)`, so a run
//! is a pure function of its inputs and trials can execute in any order.

use std::io::{self, Write};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{stirling2_row, ExperimentConfig};
use crate::productset::{product_statistics, ProductQuery};
use crate::sampler::{derive_stream, sample_set, MAX_SET_INDEX, MAX_TRIAL};

/// `E(|A|^k)` for `|A| ~ Binomial(n, alpha)`, expanded over falling
/// factorial moments: `sum_j S(k, j) n (n - 1) ... (n - j + 1) alpha^j`.
pub fn binomial_moment_exact(n: u64, alpha: f64, k: u32) -> f64 {
    let stirling = stirling2_row(k as usize);
    let mut total = 0.0;
    let mut falling = 1.0;
    let mut power = 1.0;
    for (j, s) in stirling.iter().enumerate() {
        if j > 0 {
            if j as u64 > n {
                break;
            }
            falling *= (n - (j as u64 - 1)) as f64;
            power *= alpha;
        }
        let s = s.to_f64().expect("finite Stirling number");
        total += s * falling * power;
    }
    total
}

/// `prod_i (alpha_i n_i)^{k_i} / k_i!`, the predicted mean product-set size.
pub fn predicted_expectation(config: &ExperimentConfig) -> f64 {
    config
        .alpha()
        .iter()
        .zip(config.n())
        .zip(config.k())
        .map(|((&a, &n), &k)| power_over_factorial(a * n as f64, k))
        .product()
}

/// `prod_i |A_i|^{k_i} / k_i!` for realized sizes.
pub fn predicted_from_sizes(sizes: &[u64], k: &[u32]) -> f64 {
    sizes
        .iter()
        .zip(k)
        .map(|(&size, &k)| power_over_factorial(size as f64, k))
        .product()
}

fn power_over_factorial(base: f64, k: u32) -> f64 {
    (1..=k).map(|j| base / j as f64).product()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub sizes: Vec<u64>,
    #[serde(with = "crate::bigjson")]
    pub tuple_count: BigUint,
    #[serde(rename = "distinct", with = "crate::bigjson")]
    pub distinct_count: BigUint,
    #[serde(with = "crate::bigjson")]
    pub energy: BigUint,
    #[serde(with = "crate::bigjson")]
    pub deficiency: BigUint,
    pub predicted: f64,
    /// `distinct / predicted`; `None` when some sampled set is empty.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub trials: usize,
    pub epsilon: f64,
    /// Trials with at least one empty set; excluded from ratio statistics.
    pub empty_trials: usize,
    /// Fraction of ratio-defined trials with `|ratio - 1| >= epsilon`.
    pub exceed_fraction: Option<f64>,
    pub mean_ratio: Option<f64>,
    pub stddev_ratio: Option<f64>,
    /// Mean distinct count over all trials, empty ones included.
    pub mean_distinct: f64,
    /// Standard error of `mean_distinct`.
    pub stderr_distinct: f64,
    /// `prod (alpha_i n_i)^{k_i} / k_i!`.
    pub predicted_expectation: f64,
}

/// Runs `trials` seeded experiments and summarizes them.
///
/// Trials run in parallel; results are identical for any thread count.
pub fn run_trials(
    config: &ExperimentConfig,
    trials: usize,
    epsilon: f64,
    master_seed: u64,
    cap: u64,
) -> Result<(Vec<TrialRecord>, VerifySummary)> {
    if trials == 0 {
        return Err(Error::domain("at least one trial is required"));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::domain(format!(
            "epsilon = {epsilon} must be positive"
        )));
    }
    if trials as u64 - 1 > MAX_TRIAL || config.s() as u64 - 1 > MAX_SET_INDEX {
        return Err(Error::domain(
            "too many trials or sets for distinct streams",
        ));
    }
    let outcomes: Vec<Result<TrialRecord>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            run_trial(config, t, master_seed, cap).map_err(|e| Error::Trial {
                trial: t,
                source: Box::new(e),
            })
        })
        .collect();
    let records = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let summary = summarize(config, &records, epsilon);
    Ok((records, summary))
}

fn run_trial(config: &ExperimentConfig, trial: usize, seed: u64, cap: u64) -> Result<TrialRecord> {
    let sets = config
        .n()
        .iter()
        .zip(config.alpha())
        .enumerate()
        .map(|(i, (&n, &alpha))| sample_set(n, alpha, derive_stream(seed, trial as u64, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let sizes: Vec<u64> = sets.iter().map(|s| s.len() as u64).collect();
    let stats = product_statistics(
        &ProductQuery::from_sampled(&sets, config.k().to_vec())?,
        cap,
    )?;
    let predicted = predicted_from_sizes(&sizes, config.k());
    let ratio = if sizes.contains(&0) {
        None
    } else {
        Some(stats.distinct_count.to_f64().unwrap_or(f64::INFINITY) / predicted)
    };
    Ok(TrialRecord {
        trial,
        sizes,
        tuple_count: stats.tuple_count,
        distinct_count: stats.distinct_count,
        energy: stats.energy,
        deficiency: stats.deficiency,
        predicted,
        ratio,
    })
}

fn summarize(config: &ExperimentConfig, records: &[TrialRecord], epsilon: f64) -> VerifySummary {
    let ratios: Vec<f64> = records.iter().filter_map(|r| r.ratio).collect();
    let (mean_ratio, stddev_ratio) = mean_and_sd(&ratios);
    let exceed_fraction = (!ratios.is_empty()).then(|| {
        let hits = ratios
            .iter()
            .filter(|r| (*r - 1.0).abs() >= epsilon)
            .count();
        hits as f64 / ratios.len() as f64
    });
    let distinct: Vec<f64> = records
        .iter()
        .map(|r| r.distinct_count.to_f64().unwrap_or(f64::INFINITY))
        .collect();
    let (mean_distinct, sd_distinct) = mean_and_sd(&distinct);
    VerifySummary {
        trials: records.len(),
        epsilon,
        empty_trials: records.len() - ratios.len(),
        exceed_fraction,
        mean_ratio,
        stddev_ratio,
        mean_distinct: mean_distinct.unwrap_or(0.0),
        stderr_distinct: sd_distinct.unwrap_or(0.0) / (distinct.len() as f64).sqrt(),
        predicted_expectation: predicted_expectation(config),
    }
}

/// Mean and sample standard deviation (zero for a single value).
fn mean_and_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (Some(mean), Some(0.0));
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(var.sqrt()))
}

/// Writes `trial,size_1..size_s,tuple_count,distinct,energy,deficiency,predicted,ratio`.
/// An undefined ratio is an empty field.
pub fn write_trials_csv<W: Write>(mut out: W, s: usize, records: &[TrialRecord]) -> io::Result<()> {
    write!(out, "trial")?;
    for i in 1..=s {
        write!(out, ",size_{i}")?;
    }
    writeln!(
        out,
        ",tuple_count,distinct,energy,deficiency,predicted,ratio"
    )?;
    for r in records {
        write!(out, "{}", r.trial)?;
        for size in &r.sizes {
            write!(out, ",{size}")?;
        }
        write!(
            out,
            ",{},{},{},{},{},",
            r.tuple_count, r.distinct_count, r.energy, r.deficiency, r.predicted
        )?;
        if let Some(ratio) = r.ratio {
            write!(out, "{ratio}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
