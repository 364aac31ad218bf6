//! Exact combinatorics for product sets of random integer sets.
//!
//! The crate covers the finite objects behind the asymptotic statement
//! `|A_1^{k_1} ... A_s^{k_s}| ~ prod |A_i|^{k_i} / k_i!` for independent
//! random sets `A_i` drawn from `B(n_i, alpha_i)`:
//!
//! * [`model`]: experiment configuration, binomials, Stirling numbers,
//!   tuple counts and regime diagnostics;
//! * [`sampler`]: reproducible draws from `B(n, alpha)`;
//! * [`productset`]: distinct-product counts, multiplicative energy and the
//!   deficiency against the binomial upper bound;
//! * [`energy`]: bounded multiplicative equations, factor matrices and the
//!   gcd decomposition relating them;
//! * [`rankin`]: truncated multiple harmonic sums and the Rankin bound;
//! * [`montecarlo`]: binomial moments, predictions and seeded trial runs.

pub mod bigjson;
pub mod energy;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod productset;
pub mod rankin;
pub mod sampler;

pub use energy::{
    decompose_matrix, energy_count, lemma2_bound, matrix_count, CountMethod, EnergySpec,
    FactorMatrix,
};
pub use error::{Error, ErrorKind, Result};
pub use model::{
    binomial, condition_ratios, count_unordered_tuples, stirling2, ConditionReport,
    ExperimentConfig, TupleProfile,
};
pub use montecarlo::{
    binomial_moment_exact, predicted_expectation, run_trials, TrialRecord, VerifySummary,
};
pub use productset::{
    cardinality_upper_bound, product_statistics, ProductQuery, ProductStatistics, DEFAULT_CAP,
};
pub use rankin::{rankin_bound, rankin_sum_exact, RankinQuery};
pub use sampler::{derive_stream, sample_set, SampledSet, SeedSpec};
