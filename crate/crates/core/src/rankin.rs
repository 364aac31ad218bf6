//! Truncated multiple harmonic sums
//! `S_m(x) = sum over a_1 ... a_m <= x of 1 / (a_1 ... a_m)`
//! and the closed-form bound obtained by Rankin's shift `t = m / log x`.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Harmonic numbers up to this index come from a summed table.
const TABLE_LIMIT: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankinQuery {
    m: u32,
    x: f64,
}

impl RankinQuery {
    /// Accepts `x >= 1`; the bound itself additionally needs `x >= 2`.
    pub fn new(m: u32, x: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("m must be at least 1"));
        }
        if !(x.is_finite() && x >= 1.0) {
            return Err(Error::domain(format!("x = {x} must be a finite real >= 1")));
        }
        Ok(RankinQuery { m, x })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    /// Rankin shift `t = m / log x`; infinite at `x = 1`.
    pub fn shift(&self) -> f64 {
        self.m as f64 / self.x.ln()
    }
}

/// Exact `S_m(x)` in double precision.
///
/// Uses `S_j(v) = sum_{a <= v} S_{j-1}(floor(v / a)) / a`, grouping the
/// `a` that share a quotient and memoizing on the quotient values.
pub fn rankin_sum_exact(query: &RankinQuery) -> Result<f64> {
    if query.x < 1.0 {
        return Err(Error::domain("x must be at least 1"));
    }
    let top = query.x.floor() as u64;
    let harmonic = Harmonic::new(top);
    let mut memo = HashMap::new();
    Ok(partial_sum(query.m, top, &harmonic, &mut memo))
}

fn partial_sum(level: u32, v: u64, h: &Harmonic, memo: &mut HashMap<(u32, u64), f64>) -> f64 {
    match level {
        0 => return 1.0,
        1 => return h.at(v),
        _ => {}
    }
    if let Some(&cached) = memo.get(&(level, v)) {
        return cached;
    }
    let mut acc = Kahan::default();
    let mut lo = 1u64;
    while lo <= v {
        let q = v / lo;
        let hi = v / q;
        let weight = if lo == hi {
            1.0 / lo as f64
        } else {
            h.block(lo, hi)
        };
        acc.add(weight * partial_sum(level - 1, q, h, memo));
        lo = hi + 1;
    }
    let total = acc.total();
    memo.insert((level, v), total);
    total
}

/// `x^t (1 + 1/t)^m` with `t = m / log x`, which equals `e^m (1 + log x / m)^m`.
pub fn rankin_bound(query: &RankinQuery) -> Result<f64> {
    if query.x < 2.0 {
        return Err(Error::domain(format!(
            "the Rankin bound needs x >= 2, got {}",
            query.x
        )));
    }
    let t = query.shift();
    Ok(query.x.powf(t) * (1.0 + 1.0 / t).powi(query.m as i32))
}

/// One line of a Rankin table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankinRow {
    pub m: u32,
    pub x: f64,
    pub sum: f64,
    pub bound: f64,
    /// `sum / bound`.
    pub ratio: f64,
    /// `sum / (log x)^m`.
    pub growth: f64,
}

pub fn rankin_row(query: &RankinQuery) -> Result<RankinRow> {
    let sum = rankin_sum_exact(query)?;
    let bound = rankin_bound(query)?;
    Ok(RankinRow {
        m: query.m,
        x: query.x,
        sum,
        bound,
        ratio: sum / bound,
        growth: sum / query.x.ln().powi(query.m as i32),
    })
}

#[derive(Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum
    }
}

/// Harmonic numbers: a compensated prefix table for small arguments and the
/// asymptotic expansion beyond it.
struct Harmonic {
    table: Vec<f64>,
}

impl Harmonic {
    fn new(top: u64) -> Self {
        let len = top.min(TABLE_LIMIT) as usize;
        let mut table = Vec::with_capacity(len + 1);
        table.push(0.0);
        let mut acc = Kahan::default();
        for i in 1..=len {
            acc.add(1.0 / i as f64);
            table.push(acc.total());
        }
        Harmonic { table }
    }

    fn at(&self, v: u64) -> f64 {
        if (v as usize) < self.table.len() {
            self.table[v as usize]
        } else {
            (v as f64).ln() + EULER_GAMMA + tail(v as f64)
        }
    }

    /// `H(hi) - H(lo - 1)`, without cancellation for large arguments.
    fn block(&self, lo: u64, hi: u64) -> f64 {
        let below = lo - 1;
        if (hi as usize) < self.table.len() || below < TABLE_LIMIT {
            return self.at(hi) - self.at(below);
        }
        let (b, h) = (below as f64, hi as f64);
        ((hi - below) as f64 / b).ln_1p() + tail(h) - tail(b)
    }
}

fn tail(v: f64) -> f64 {
    let inv = 1.0 / v;
    let inv2 = inv * inv;
    inv / 2.0 - inv2 / 12.0 + inv2 * inv2 / 120.0 - inv2 * inv2 * inv2 / 252.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(m: u32, x: f64) -> f64 {
        rankin_sum_exact(&RankinQuery::new(m, x).unwrap()).unwrap()
    }

    fn bound(m: u32, x: f64) -> f64 {
        rankin_bound(&RankinQuery::new(m, x).unwrap()).unwrap()
    }

    // Direct enumeration over ordered tuples.
    fn direct(m: u32, x: u64) -> f64 {
        fn go(left: u32, budget: u64) -> f64 {
            if left == 0 {
                return 1.0;
            }
            (1..=budget)
                .map(|a| go(left - 1, budget / a) / a as f64)
                .sum()
        }
        go(m, x)
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn small_examples() {
        assert_eq!(exact(1, 2.0), 1.5);
        assert!(close(exact(2, 2.0), 2.0, 1e-12));
        assert!(close(exact(2, 4.0), 41.0 / 12.0, 1e-12));
        assert!(close(exact(2, 4.7), 41.0 / 12.0, 1e-12));
        assert_eq!(exact(3, 1.0), 1.0);
    }

    #[test]
    fn matches_direct_enumeration() {
        for m in 1..=4 {
            for x in (1..=1000u64).step_by(37).chain([2, 3, 64, 999, 1000]) {
                let d = direct(m, x);
                assert!(close(exact(m, x as f64), d, 1e-9), "m={m} x={x}");
            }
        }
    }

    #[test]
    fn bound_examples() {
        let e = std::f64::consts::E;
        assert!(close(bound(1, e), 2.0 * e, 1e-12));
        assert!(close(bound(2, e * e), 4.0 * e * e, 1e-12));
        assert!(close(bound(1, 10.0), e * (1.0 + 10f64.ln()), 1e-12));
        assert!(close(bound(1, 10.0), 8.977357, 1e-6));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(RankinQuery::new(0, 5.0).is_err());
        assert!(RankinQuery::new(1, 0.5).is_err());
        assert!(RankinQuery::new(1, f64::NAN).is_err());
        let q = RankinQuery::new(2, 1.5).unwrap();
        assert!(rankin_sum_exact(&q).is_ok());
        assert!(matches!(rankin_bound(&q), Err(Error::Domain(_))));
    }

    #[test]
    fn sum_dominated_by_bound() {
        for m in 1..=3 {
            for j in 1..=14 {
                let x = (1u64 << j) as f64;
                assert!(exact(m, x) <= bound(m, x), "m={m} x={x}");
            }
        }
    }

    #[test]
    fn monotone_and_submultiplicative() {
        for m in 1..=3 {
            let mut prev = 0.0;
            for j in 1..=14 {
                let x = (1u64 << j) as f64;
                let s = exact(m, x);
                assert!(s >= prev);
                assert!(exact(m + 1, x) >= s);
                assert!(s <= exact(1, x).powi(m as i32) * (1.0 + 1e-12));
                prev = s;
            }
        }
    }

    #[test]
    fn growth_ratio_stays_bounded() {
        for m in 1..=3 {
            let ratios: Vec<f64> = (1..=14)
                .map(|j| {
                    let x = (1u64 << j) as f64;
                    exact(m, x) / x.ln().powi(m as i32)
                })
                .collect();
            let max = ratios.iter().cloned().fold(0.0, f64::max);
            // The ratio is largest at x = 2 and decreases toward 1/m!.
            assert_eq!(max, ratios[0]);
            assert!(ratios[13] < ratios[0]);
        }
    }

    #[test]
    fn harmonic_beyond_table_is_accurate() {
        let h = Harmonic::new(TABLE_LIMIT);
        let mut acc = Kahan::default();
        for i in 1..=TABLE_LIMIT {
            acc.add(1.0 / i as f64);
        }
        let asym = (TABLE_LIMIT as f64).ln() + EULER_GAMMA + tail(TABLE_LIMIT as f64);
        assert!(close(h.at(TABLE_LIMIT), acc.total(), 1e-15));
        assert!(close(asym, acc.total(), 1e-14));
        let lo = TABLE_LIMIT + 5;
        let hi = TABLE_LIMIT + 40;
        let direct: f64 = (lo..=hi).map(|i| 1.0 / i as f64).sum();
        assert!(close(h.block(lo, hi), direct, 1e-12));
    }

    #[test]
    fn large_x_is_consistent() {
        // Two-factor sum has the closed form sum_{a <= x} H(x/a) / a.
        let x = 50_000_000u64;
        let h = Harmonic::new(x);
        let mut acc = Kahan::default();
        for a in 1..=x {
            acc.add(h.at(x / a) / a as f64);
        }
        assert!(close(exact(2, x as f64), acc.total(), 1e-11));
    }
}
