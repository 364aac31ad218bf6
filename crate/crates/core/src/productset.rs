//! Exact statistics of the product multiset `A_1^{k_1} ... A_s^{k_s}`.
//!
//! Each `A_i^{k_i}` is enumerated as unordered `k_i`-multisets of `A_i`, so
//! the number of enumerated combinations equals `prod C(|A_i| + k_i - 1, k_i)`.
//! Per-set product tables are built first and then merged multiplicatively,
//! which yields the full representation function without materializing every
//! cross combination.

use std::collections::HashMap;
use std::hash::Hash;
use std::ops::Mul;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::binomial;
use crate::sampler::SampledSet;

/// Default limit on the number of enumerated tuple combinations.
pub const DEFAULT_CAP: u64 = 100_000_000;

/// Concrete sets with their exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductQuery {
    sets: Vec<Vec<u64>>,
    k: Vec<u32>,
}

/// A set given either as a bare list or as sampler output.
#[derive(Deserialize)]
#[serde(untagged)]
enum SetInput {
    List(Vec<u64>),
    Sampled(SampledSet),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuery {
    sets: Vec<SetInput>,
    k: Vec<u32>,
}

impl ProductQuery {
    /// Builds a query; each set is sorted and deduplicated.
    pub fn new(sets: Vec<Vec<u64>>, k: Vec<u32>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::domain("product query needs at least one set"));
        }
        if sets.len() != k.len() {
            return Err(Error::domain(format!(
                "{} sets but {} exponents",
                sets.len(),
                k.len()
            )));
        }
        if k.contains(&0) {
            return Err(Error::domain("exponents must be at least 1"));
        }
        let mut clean = Vec::with_capacity(sets.len());
        for mut set in sets {
            if set.contains(&0) {
                return Err(Error::domain("set elements must be positive integers"));
            }
            set.sort_unstable();
            set.dedup();
            clean.push(set);
        }
        Ok(ProductQuery { sets: clean, k })
    }

    pub fn from_sampled(sets: &[SampledSet], k: Vec<u32>) -> Result<Self> {
        Self::new(sets.iter().map(|s| s.elements().to_vec()).collect(), k)
    }

    /// Parses `{"sets": [...], "k": [...]}`; set entries may be integer
    /// arrays or `{"n": .., "elements": [..]}` objects.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawQuery = serde_json::from_str(text)
            .map_err(|e| Error::domain(format!("invalid product query: {e}")))?;
        let sets = raw
            .sets
            .into_iter()
            .map(|s| match s {
                SetInput::List(v) => v,
                SetInput::Sampled(s) => s.into_elements(),
            })
            .collect();
        Self::new(sets, raw.k)
    }

    pub fn sets(&self) -> &[Vec<u64>] {
        &self.sets
    }

    pub fn k(&self) -> &[u32] {
        &self.k
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.sets.iter().map(|s| s.len() as u64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductStatistics {
    #[serde(with = "crate::bigjson")]
    pub tuple_count: BigUint,
    #[serde(rename = "distinct", with = "crate::bigjson")]
    pub distinct_count: BigUint,
    #[serde(with = "crate::bigjson")]
    pub energy: BigUint,
    #[serde(with = "crate::bigjson")]
    pub deficiency: BigUint,
}

/// `prod_i C(sizes_i + k_i - 1, k_i)`.
pub fn cardinality_upper_bound(sizes: &[u64], k: &[u32]) -> Result<BigUint> {
    if sizes.len() != k.len() {
        return Err(Error::domain(format!(
            "{} sizes but {} exponents",
            sizes.len(),
            k.len()
        )));
    }
    Ok(sizes
        .iter()
        .zip(k)
        .map(|(&size, &k)| {
            if size == 0 {
                BigUint::zero()
            } else {
                binomial(size + k as u64 - 1, k as u64)
            }
        })
        .product())
}

pub fn product_statistics(query: &ProductQuery, cap: u64) -> Result<ProductStatistics> {
    let tuple_count = checked_tuple_count(query, cap)?;
    if tuple_count.is_zero() {
        return Ok(ProductStatistics {
            tuple_count,
            distinct_count: BigUint::zero(),
            energy: BigUint::zero(),
            deficiency: BigUint::zero(),
        });
    }
    let (distinct, energy) = if fits_u128(query) {
        summarize(&representation::<u128>(query))
    } else {
        summarize(&representation::<BigUint>(query))
    };
    let distinct_count = BigUint::from(distinct);
    debug_assert!(distinct_count <= tuple_count);
    Ok(ProductStatistics {
        deficiency: &tuple_count - &distinct_count,
        tuple_count,
        distinct_count,
        energy,
    })
}

/// The representation function `r(x)` as `(x, r(x))` pairs sorted by `x`.
pub fn representation_counts(query: &ProductQuery, cap: u64) -> Result<Vec<(BigUint, u64)>> {
    let tuple_count = checked_tuple_count(query, cap)?;
    if tuple_count.is_zero() {
        return Ok(Vec::new());
    }
    let mut out: Vec<(BigUint, u64)> = if fits_u128(query) {
        representation::<u128>(query)
            .into_iter()
            .map(|(x, c)| (BigUint::from(x), c))
            .collect()
    } else {
        representation::<BigUint>(query).into_iter().collect()
    };
    out.sort_unstable();
    Ok(out)
}

fn checked_tuple_count(query: &ProductQuery, cap: u64) -> Result<BigUint> {
    let tuple_count = cardinality_upper_bound(&query.sizes(), &query.k)?;
    if tuple_count > BigUint::from(cap) {
        return Err(Error::cap("product enumeration", &tuple_count, cap));
    }
    Ok(tuple_count)
}

fn fits_u128(query: &ProductQuery) -> bool {
    let largest: BigUint = query
        .sets
        .iter()
        .zip(&query.k)
        .map(|(set, &k)| BigUint::from(set.last().copied().unwrap_or(1)).pow(k))
        .product();
    largest.to_u128().is_some()
}

trait ProductKey: Hash + Eq + Clone + for<'a> Mul<&'a Self, Output = Self> {
    fn from_element(v: u64) -> Self;
    fn unit() -> Self;
}

impl ProductKey for u128 {
    fn from_element(v: u64) -> Self {
        v as u128
    }
    fn unit() -> Self {
        1
    }
}

impl ProductKey for BigUint {
    fn from_element(v: u64) -> Self {
        BigUint::from(v)
    }
    fn unit() -> Self {
        BigUint::one()
    }
}

// Callers guarantee through `fits_u128` that u128 products cannot overflow.
fn representation<K: ProductKey>(query: &ProductQuery) -> HashMap<K, u64> {
    let mut tables: Vec<HashMap<K, u64>> = query
        .sets
        .iter()
        .zip(&query.k)
        .map(|(set, &k)| multiset_products::<K>(set, k as usize))
        .collect();
    // Merge the largest table last so the outer loop stays short.
    tables.sort_by_key(|t| t.len());
    let mut acc: HashMap<K, u64> = HashMap::from([(K::unit(), 1)]);
    for table in tables {
        let mut next = HashMap::with_capacity(acc.len().saturating_mul(table.len()).min(1 << 24));
        for (x, c) in &acc {
            for (y, d) in &table {
                *next.entry(x.clone() * y).or_insert(0) += c * d;
            }
        }
        acc = next;
    }
    acc
}

fn multiset_products<K: ProductKey>(set: &[u64], k: usize) -> HashMap<K, u64> {
    fn go<K: ProductKey>(
        set: &[u64],
        start: usize,
        left: usize,
        partial: K,
        out: &mut HashMap<K, u64>,
    ) {
        if left == 0 {
            *out.entry(partial).or_insert(0) += 1;
            return;
        }
        for i in start..set.len() {
            let next = partial.clone() * &K::from_element(set[i]);
            go(set, i, left - 1, next, out);
        }
    }
    let mut out = HashMap::new();
    go(set, 0, k, K::unit(), &mut out);
    out
}

fn summarize<K>(table: &HashMap<K, u64>) -> (usize, BigUint) {
    let mut energy = BigUint::zero();
    let mut chunk: u128 = 0;
    for &r in table.values() {
        let sq = r as u128 * r as u128;
        match chunk.checked_add(sq) {
            Some(v) => chunk = v,
            None => {
                energy += chunk;
                chunk = sq;
            }
        }
    }
    energy += chunk;
    (table.len(), energy)
}
