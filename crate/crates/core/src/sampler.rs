//! Seeded sampling from the independent-inclusion model `B(n, alpha)`.
//!
//! Streams come from ChaCha8 keyed by the master seed, with the stream
//! index selecting one of the generator's 2^64 independent streams. Each
//! ground-set element consumes exactly one 64-bit word, in increasing order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bits of the stream index reserved for the set index.
pub const SET_INDEX_BITS: u32 = 24;
/// Largest trial index that `derive_stream` maps injectively.
pub const MAX_TRIAL: u64 = (1 << (64 - SET_INDEX_BITS)) - 1;
/// Largest set index that `derive_stream` maps injectively.
pub const MAX_SET_INDEX: u64 = (1 << SET_INDEX_BITS) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        SeedSpec {
            master_seed,
            stream_index,
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// A realized subset of `{1..n}`, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSet")]
pub struct SampledSet {
    n: u64,
    elements: Vec<u64>,
}

#[derive(Deserialize)]
struct RawSet {
    n: u64,
    elements: Vec<u64>,
}

impl TryFrom<RawSet> for SampledSet {
    type Error = Error;

    fn try_from(raw: RawSet) -> Result<Self> {
        SampledSet::new(raw.n, raw.elements)
    }
}

impl SampledSet {
    pub fn new(n: u64, elements: Vec<u64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("ground set bound n must be at least 1"));
        }
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("set elements must be strictly increasing"));
        }
        if let (Some(&lo), Some(&hi)) = (elements.first(), elements.last()) {
            if lo < 1 || hi > n {
                return Err(Error::domain(format!("set elements must lie in [1, {n}]")));
            }
        }
        Ok(SampledSet { n, elements })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn into_elements(self) -> Vec<u64> {
        self.elements
    }
}

/// Includes each `e` in `1..=n` independently with probability `alpha`.
pub fn sample_set(n: u64, alpha: f64, seed: SeedSpec) -> Result<SampledSet> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain(format!(
            "alpha = {alpha} is not a probability"
        )));
    }
    let mut rng = seed.rng();
    let mut elements = Vec::with_capacity(((n as f64) * alpha * 1.1) as usize + 8);
    for e in 1..=n {
        // gen::<f64>() lies in [0, 1): alpha = 0 never fires, alpha = 1 always does.
        if rng.gen::<f64>() < alpha {
            elements.push(e);
        }
    }
    Ok(SampledSet { n, elements })
}

/// Packs `(trial, set_index)` into one stream index:
/// `stream_index = trial << 24 | set_index`.
///
/// Injective for `trial <= MAX_TRIAL` and `set_index <= MAX_SET_INDEX`.
pub fn derive_stream(master_seed: u64, trial: u64, set_index: u64) -> SeedSpec {
    debug_assert!(trial <= MAX_TRIAL && set_index <= MAX_SET_INDEX);
    SeedSpec::new(master_seed, (trial << SET_INDEX_BITS) | set_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn alpha_zero_and_one() {
        let seed = SeedSpec::new(7, 3);
        assert!(sample_set(10, 0.0, seed).unwrap().is_empty());
        assert_eq!(
            sample_set(10, 1.0, seed).unwrap().elements(),
            &(1..=10).collect::<Vec<_>>()[..]
        );
    }

    #[test]
    fn rejects_bad_alpha() {
        let seed = SeedSpec::new(0, 0);
        assert!(sample_set(10, -0.1, seed).is_err());
        assert!(sample_set(10, 1.01, seed).is_err());
        assert!(sample_set(10, f64::NAN, seed).is_err());
        assert!(sample_set(0, 0.5, seed).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let seed = derive_stream(99, 4, 1);
        assert_eq!(
            sample_set(500, 0.3, seed).unwrap(),
            sample_set(500, 0.3, seed).unwrap()
        );
        assert_ne!(
            sample_set(500, 0.3, seed).unwrap(),
            sample_set(500, 0.3, derive_stream(99, 4, 2)).unwrap()
        );
    }

    #[test]
    fn draws_are_aligned_across_alpha() {
        // Element e is driven by the e-th word whatever alpha is, so a prefix
        // of the ground set samples identically when only n grows.
        let seed = SeedSpec::new(5, 11);
        let small = sample_set(200, 0.4, seed).unwrap();
        let big = sample_set(400, 0.4, seed).unwrap();
        let prefix: Vec<u64> = big
            .elements()
            .iter()
            .copied()
            .filter(|&e| e <= 200)
            .collect();
        assert_eq!(small.elements(), &prefix[..]);
    }

    #[test]
    fn output_is_valid_set() {
        for stream in 0..50 {
            let set = sample_set(1000, 0.37, SeedSpec::new(1, stream)).unwrap();
            assert!(set.elements().windows(2).all(|w| w[0] < w[1]));
            assert!(set.elements().iter().all(|&e| (1..=1000).contains(&e)));
        }
    }

    #[test]
    fn mean_size_matches_binomial() {
        let (n, alpha, streams) = (10_000u64, 0.3, 200u64);
        let total: usize = (0..streams)
            .map(|i| {
                sample_set(n, alpha, derive_stream(2024, i, 0))
                    .unwrap()
                    .len()
            })
            .sum();
        let mean = total as f64 / streams as f64;
        let se = (n as f64 * alpha * (1.0 - alpha) / streams as f64).sqrt();
        assert!((mean - 3000.0).abs() <= 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn inclusion_frequency_per_element() {
        let t = 10_000u64;
        for &alpha in &[0.1, 0.5, 0.9] {
            let mut hits = vec![0u64; 101];
            for i in 0..t {
                for e in sample_set(100, alpha, derive_stream(77, i, 0))
                    .unwrap()
                    .elements()
                {
                    hits[*e as usize] += 1;
                }
            }
            let tol = 4.0 * (alpha * (1.0 - alpha) / t as f64).sqrt();
            for (e, &h) in hits.iter().enumerate().skip(1) {
                let freq = h as f64 / t as f64;
                assert!(
                    (freq - alpha).abs() <= tol,
                    "alpha={alpha} e={e} freq={freq}"
                );
            }
        }
    }

    #[test]
    fn derive_stream_is_injective_on_grid() {
        let mut seen = HashSet::new();
        for trial in 0..=255 {
            for set in 0..=255 {
                assert!(seen.insert(derive_stream(3, trial, set)));
            }
        }
        assert_eq!(derive_stream(3, 9, 2), derive_stream(3, 9, 2));
        assert_ne!(derive_stream(3, 0, 0), derive_stream(3, 0, 1));
    }

    #[test]
    fn sampled_set_validation() {
        assert!(SampledSet::new(5, vec![1, 3, 5]).is_ok());
        assert!(SampledSet::new(5, vec![3, 3]).is_err());
        assert!(SampledSet::new(5, vec![0, 2]).is_err());
        assert!(SampledSet::new(5, vec![2, 6]).is_err());
        assert!(serde_json::from_str::<SampledSet>(r#"{"n":4,"elements":[4,1]}"#).is_err());
    }
}
