//! Bounded multiplicative equations `a_1 ... a_n = b_1 ... b_m` and the
//! positive-integer matrices with bounded row and column products that
//! parametrize their solutions.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bounds `x_1..x_n` on the left factors and `y_1..y_m` on the right ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySpec {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl EnergySpec {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_bounds("x", &x)?;
        check_bounds("y", &y)?;
        Ok(EnergySpec { x, y })
    }

    /// Number of left factors.
    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Number of right factors.
    pub fn m(&self) -> usize {
        self.y.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// The same equation read right to left.
    pub fn swapped(&self) -> Self {
        EnergySpec {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }
}

fn check_bounds(name: &str, bounds: &[f64]) -> Result<()> {
    if bounds.is_empty() {
        return Err(Error::domain(format!("{name} needs at least one bound")));
    }
    if let Some(b) = bounds.iter().find(|b| !(b.is_finite() && **b >= 2.0)) {
        return Err(Error::domain(format!(
            "bound {b} in {name} is not a finite real >= 2"
        )));
    }
    Ok(())
}

fn floors(bounds: &[f64]) -> Vec<u64> {
    bounds.iter().map(|b| b.floor() as u64).collect()
}

fn volume(bounds: &[u64]) -> BigUint {
    bounds.iter().map(|&b| BigUint::from(b)).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMethod {
    /// Compare every left tuple against every right tuple.
    Brute,
    /// Tabulate product multiplicities per side and match them.
    Grouped,
}

impl FromStr for CountMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(CountMethod::Brute),
            "grouped" => Ok(CountMethod::Grouped),
            other => Err(Error::domain(format!("unknown counting method {other:?}"))),
        }
    }
}

impl fmt::Display for CountMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountMethod::Brute => "brute",
            CountMethod::Grouped => "grouped",
        })
    }
}

/// Counts ordered solutions of `a_1 ... a_n = b_1 ... b_m` with
/// `1 <= a_i <= x_i` and `1 <= b_j <= y_j`.
///
/// `Grouped` enumerates each side once, so it needs `prod floor(x) +
/// prod floor(y) <= cap`. `Brute` compares all pairs and needs
/// `prod floor(x) * prod floor(y) <= cap`.
pub fn energy_count(spec: &EnergySpec, method: CountMethod, cap: u64) -> Result<BigUint> {
    let fx = floors(&spec.x);
    let fy = floors(&spec.y);
    let (vx, vy) = (volume(&fx), volume(&fy));
    let work = match method {
        CountMethod::Brute => &vx * &vy,
        CountMethod::Grouped => &vx + &vy,
    };
    if work > BigUint::from(cap) {
        return Err(Error::cap("energy enumeration", work, cap));
    }
    // Each side's volume is at most cap, so every tuple product fits in u64.
    let count: u128 = match method {
        CountMethod::Brute => {
            let left = tuple_products(&fx);
            let right = tuple_products(&fy);
            let mut count = 0u128;
            for a in &left {
                for b in &right {
                    if a == b {
                        count += 1;
                    }
                }
            }
            count
        }
        CountMethod::Grouped => {
            let left = multiplicities(&fx);
            let right = multiplicities(&fy);
            let (small, large) = if left.len() <= right.len() {
                (&left, &right)
            } else {
                (&right, &left)
            };
            small
                .iter()
                .filter_map(|(p, c)| large.get(p).map(|d| *c as u128 * *d as u128))
                .sum()
        }
    };
    Ok(BigUint::from(count))
}

/// Products of all tuples in `[1, b_1] x ... x [1, b_k]`, odometer order.
fn tuple_products(bounds: &[u64]) -> Vec<u64> {
    let mut out = vec![1u64];
    for &b in bounds {
        let mut next = Vec::with_capacity(out.len() * b as usize);
        for &p in &out {
            for v in 1..=b {
                next.push(p * v);
            }
        }
        out = next;
    }
    out
}

fn multiplicities(bounds: &[u64]) -> HashMap<u64, u64> {
    let mut table: HashMap<u64, u64> = HashMap::from([(1, 1)]);
    for &b in bounds {
        let mut next = HashMap::with_capacity(table.len() * 2);
        for (&p, &c) in &table {
            for v in 1..=b {
                *next.entry(p * v).or_insert(0) += c;
            }
        }
        table = next;
    }
    table
}

/// Counts `m x n` positive-integer matrices whose column `h` has product at
/// most `x_h` and whose row `k` has product at most `y_k`.
///
/// Backtracks in row-major order; the final cell is counted in closed form.
/// `cap` limits the number of visited partial assignments.
pub fn matrix_count(m: usize, n: usize, x: &[f64], y: &[f64], cap: u64) -> Result<BigUint> {
    check_shape(m, n, x, y)?;
    let mut search = MatrixSearch {
        m,
        n,
        col_bound: floors(x),
        row_bound: floors(y),
        col: vec![1; n],
        row: vec![1; m],
        nodes: 0,
        cap,
    };
    let total = search.fill(0)?;
    Ok(BigUint::from(total))
}

fn check_shape(m: usize, n: usize, x: &[f64], y: &[f64]) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::domain("matrix dimensions must be positive"));
    }
    if x.len() != n || y.len() != m {
        return Err(Error::domain(format!(
            "expected {n} column bounds and {m} row bounds, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    check_bounds("x", x)?;
    check_bounds("y", y)
}

struct MatrixSearch {
    m: usize,
    n: usize,
    col_bound: Vec<u64>,
    row_bound: Vec<u64>,
    col: Vec<u64>,
    row: Vec<u64>,
    nodes: u64,
    cap: u64,
}

impl MatrixSearch {
    fn fill(&mut self, cell: usize) -> Result<u128> {
        let (r, c) = (cell / self.n, cell % self.n);
        let limit = (self.col_bound[c] / self.col[c]).min(self.row_bound[r] / self.row[r]);
        if cell + 1 == self.m * self.n {
            return Ok(limit as u128);
        }
        let mut total = 0u128;
        for v in 1..=limit {
            self.nodes += 1;
            if self.nodes > self.cap {
                return Err(Error::cap("matrix search nodes", self.nodes, self.cap));
            }
            self.col[c] *= v;
            self.row[r] *= v;
            total += self.fill(cell + 1)?;
            self.col[c] /= v;
            self.row[r] /= v;
        }
        Ok(total)
    }
}

/// `(prod x_i * prod y_j)^(1/2) * (prod_{i < n} log x_i)^(m - 1)`, the matrix
/// count bound without its implied constant. The log product skips the
/// last column bound.
pub fn lemma2_bound(m: usize, n: usize, x: &[f64], y: &[f64]) -> Result<f64> {
    check_shape(m, n, x, y)?;
    let volume: f64 = x.iter().chain(y).product();
    let logs: f64 = x[..n - 1].iter().map(|v| v.ln()).product();
    Ok(volume.sqrt() * logs.powi((m - 1) as i32))
}

/// An `m x n` matrix of positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FactorMatrix {
    entries: Vec<Vec<u64>>,
}

impl FactorMatrix {
    pub fn from_rows(entries: Vec<Vec<u64>>) -> Result<Self> {
        let cols = entries.first().map_or(0, Vec::len);
        if cols == 0 || entries.iter().any(|r| r.len() != cols) {
            return Err(Error::domain(
                "matrix rows must be nonempty and equally long",
            ));
        }
        if entries.iter().flatten().any(|&v| v == 0) {
            return Err(Error::domain("matrix entries must be positive"));
        }
        Ok(FactorMatrix { entries })
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries[0].len()
    }

    pub fn entries(&self) -> &[Vec<u64>] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.entries[row][col]
    }

    pub fn row_products(&self) -> Vec<BigUint> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|&v| BigUint::from(v)).product())
            .collect()
    }

    pub fn column_products(&self) -> Vec<BigUint> {
        (0..self.cols())
            .map(|c| self.entries.iter().map(|r| BigUint::from(r[c])).product())
            .collect()
    }
}

/// Builds an `m x n` matrix with column products `a` and row products `b`.
///
/// Columns `1..n-1` are peeled greedily: the remaining part of `a_h` takes
/// its gcd with each row residual in turn, top to bottom. The last column
/// receives the row residuals.
pub fn decompose_matrix(a: &[u64], b: &[u64]) -> Result<FactorMatrix> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("both factor lists must be nonempty"));
    }
    if a.contains(&0) || b.contains(&0) {
        return Err(Error::domain("factors must be positive integers"));
    }
    let pa: BigUint = a.iter().map(|&v| BigUint::from(v)).product();
    let pb: BigUint = b.iter().map(|&v| BigUint::from(v)).product();
    if pa != pb {
        return Err(Error::domain(format!(
            "products differ: {pa} on the left, {pb} on the right"
        )));
    }
    let (n, m) = (a.len(), b.len());
    let mut residual = b.to_vec();
    let mut entries = vec![vec![1u64; n]; m];
    for (h, &ah) in a.iter().enumerate().take(n - 1) {
        let mut rest = ah;
        for (i, res) in residual.iter_mut().enumerate() {
            let g = rest.gcd(res);
            entries[i][h] = g;
            rest /= g;
            *res /= g;
        }
        // Equal products make each a_h divide the product of the residuals.
        debug_assert_eq!(rest, 1);
    }
    for (i, res) in residual.into_iter().enumerate() {
        entries[i][n - 1] = res;
    }
    debug_assert_eq!(
        entries
            .iter()
            .map(|r| BigUint::from(r[n - 1]))
            .product::<BigUint>(),
        BigUint::from(a[n - 1])
    );
    Ok(FactorMatrix { entries })
}

/// Column and row products of a matrix, the inverse of [`decompose_matrix`]
/// when both fit in `u64`.
pub fn matrix_margins(matrix: &FactorMatrix) -> Option<(Vec<u64>, Vec<u64>)> {
    let to_u64 = |v: Vec<BigUint>| v.iter().map(|x| x.to_u64()).collect::<Option<Vec<_>>>();
    Some((
        to_u64(matrix.column_products())?,
        to_u64(matrix.row_products())?,
    ))
}

impl fmt::Display for FactorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.entries {
            let line: Vec<String> = row.iter().map(u64::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const CAP: u64 = 100_000_000;

    fn count(x: &[f64], y: &[f64], method: CountMethod) -> u64 {
        let spec = EnergySpec::new(x.to_vec(), y.to_vec()).unwrap();
        energy_count(&spec, method, CAP).unwrap().to_u64().unwrap()
    }

    fn mcount(x: &[f64], y: &[f64]) -> u64 {
        matrix_count(y.len(), x.len(), x, y, CAP)
            .unwrap()
            .to_u64()
            .unwrap()
    }

    // Naive oracle: every matrix with entries up to the largest bound.
    fn matrix_oracle(x: &[u64], y: &[u64]) -> u64 {
        let (m, n) = (y.len(), x.len());
        let top = *x.iter().chain(y).max().unwrap();
        let cells = m * n;
        let mut vals = vec![1u64; cells];
        let mut total = 0;
        loop {
            let cols_ok = (0..n).all(|c| (0..m).map(|r| vals[r * n + c]).product::<u64>() <= x[c]);
            let rows_ok = (0..m).all(|r| (0..n).map(|c| vals[r * n + c]).product::<u64>() <= y[r]);
            if cols_ok && rows_ok {
                total += 1;
            }
            let mut i = 0;
            loop {
                if i == cells {
                    return total;
                }
                if vals[i] < top {
                    vals[i] += 1;
                    break;
                }
                vals[i] = 1;
                i += 1;
            }
        }
    }

    #[test]
    fn energy_examples() {
        for method in [CountMethod::Brute, CountMethod::Grouped] {
            assert_eq!(count(&[10.0], &[10.0], method), 10);
            assert_eq!(count(&[2.0, 2.0], &[2.0, 2.0], method), 6);
            assert_eq!(count(&[3.0, 3.0], &[6.0], method), 8);
        }
    }

    #[test]
    fn energy_floors_real_bounds() {
        assert_eq!(count(&[3.9, 3.5], &[6.99], CountMethod::Grouped), 8);
    }

    #[test]
    fn energy_domain_and_cap_errors() {
        assert!(EnergySpec::new(vec![1.5], vec![4.0]).is_err());
        assert!(EnergySpec::new(vec![], vec![4.0]).is_err());
        assert!(EnergySpec::new(vec![f64::INFINITY], vec![4.0]).is_err());
        let spec = EnergySpec::new(vec![100.0, 100.0], vec![100.0, 100.0]).unwrap();
        assert!(matches!(
            energy_count(&spec, CountMethod::Brute, 1_000_000),
            Err(Error::CapExceeded { .. })
        ));
        assert!(energy_count(&spec, CountMethod::Grouped, 1_000_000).is_ok());
    }

    #[test]
    fn matrix_examples() {
        assert_eq!(mcount(&[5.0], &[7.0]), 5);
        assert_eq!(mcount(&[2.0, 3.0], &[4.0]), 5);
        assert_eq!(mcount(&[2.0, 2.0], &[2.0, 2.0]), 7);
    }

    #[test]
    fn matrix_count_matches_naive_oracle() {
        let cases: &[(&[u64], &[u64])] = &[
            (&[2, 2], &[2, 2]),
            (&[4, 3], &[5, 2]),
            (&[6], &[2, 3, 4]),
            (&[3, 4, 2], &[6, 4]),
            (&[5, 5], &[5, 5]),
            (&[2, 3, 2], &[2, 3]),
        ];
        for (x, y) in cases {
            let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
            let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
            assert_eq!(mcount(&xf, &yf), matrix_oracle(x, y), "x={x:?} y={y:?}");
        }
    }

    #[test]
    fn matrix_count_node_cap() {
        let r = matrix_count(2, 2, &[1e4, 1e4], &[1e4, 1e4], 1000);
        assert!(matches!(r, Err(Error::CapExceeded { .. })));
        assert!(matrix_count(2, 2, &[2.0], &[2.0, 2.0], CAP).is_err());
        assert!(matrix_count(1, 1, &[1.0], &[2.0], CAP).is_err());
    }

    #[test]
    fn bound_examples() {
        let e = std::f64::consts::E;
        let b = lemma2_bound(1, 1, &[4.0], &[9.0]).unwrap();
        assert!((b - 6.0).abs() <= 1e-12 * 6.0);
        let b = lemma2_bound(2, 2, &[e, e], &[e, e]).unwrap();
        assert!((b - e * e).abs() <= 1e-12 * e * e);
        let b = lemma2_bound(1, 2, &[4.0, 4.0], &[4.0]).unwrap();
        assert!((b - 8.0).abs() <= 1e-12 * 8.0);
        assert!(lemma2_bound(1, 1, &[1.0], &[4.0]).is_err());
    }

    #[test]
    fn decompose_examples() {
        let m = decompose_matrix(&[1, 1, 1], &[1, 1]).unwrap();
        assert_eq!(m.entries(), &[vec![1, 1, 1], vec![1, 1, 1]]);
        let m = decompose_matrix(&[6], &[2, 3]).unwrap();
        assert_eq!(m.entries(), &[vec![2], vec![3]]);
        let m = decompose_matrix(&[4, 9], &[6, 6]).unwrap();
        assert_eq!(m.entries(), &[vec![2, 3], vec![2, 3]]);
        assert_eq!(serde_json::to_string(&m).unwrap(), "[[2,3],[2,3]]");
    }

    #[test]
    fn decompose_rejects_mismatch() {
        assert!(matches!(
            decompose_matrix(&[4, 9], &[6, 7]),
            Err(Error::Domain(_))
        ));
        assert!(decompose_matrix(&[], &[1]).is_err());
        assert!(decompose_matrix(&[0], &[0]).is_err());
    }

    #[test]
    fn decompose_handles_products_beyond_u64() {
        let a = [u64::MAX, u64::MAX];
        let b = [u64::MAX, u64::MAX];
        let m = decompose_matrix(&a, &b).unwrap();
        assert_eq!(m.column_products(), vec![BigUint::from(u64::MAX); 2]);
        assert_eq!(m.row_products(), vec![BigUint::from(u64::MAX); 2]);
    }

    #[test]
    fn decompose_round_trip_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..2000 {
            let m = rng.gen_range(1..=4);
            let n = rng.gen_range(1..=4);
            let entries: Vec<Vec<u64>> = (0..m)
                .map(|_| (0..n).map(|_| rng.gen_range(1..=20)).collect())
                .collect();
            let source = FactorMatrix::from_rows(entries).unwrap();
            let (a, b) = matrix_margins(&source).unwrap();
            let out = decompose_matrix(&a, &b).unwrap();
            assert_eq!(matrix_margins(&out).unwrap(), (a, b));
        }
    }

    fn ordered_factorizations(n: u64, parts: usize) -> Vec<Vec<u64>> {
        if parts == 1 {
            return vec![vec![n]];
        }
        let mut out = Vec::new();
        for d in (1..=n).filter(|d| n.is_multiple_of(*d)) {
            for mut rest in ordered_factorizations(n / d, parts - 1) {
                rest.insert(0, d);
                out.push(rest);
            }
        }
        out
    }

    #[test]
    fn greedy_gcd_is_total_on_small_products() {
        let mut checked = 0u64;
        for big_n in 1..=5000u64 {
            let by_parts: Vec<Vec<Vec<u64>>> =
                (1..=3).map(|p| ordered_factorizations(big_n, p)).collect();
            for left in &by_parts {
                for right in &by_parts {
                    for a in left {
                        for b in right {
                            let out = decompose_matrix(a, b).unwrap();
                            let (ca, rb) = matrix_margins(&out).unwrap();
                            assert_eq!((&ca, &rb), (a, b));
                            checked += 1;
                        }
                    }
                }
            }
        }
        assert!(checked > 1_000_000);
    }

    fn bounds(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(2.0f64..9.0, len)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn brute_equals_grouped(x in bounds(1..4), y in bounds(1..4)) {
            prop_assert_eq!(count(&x, &y, CountMethod::Brute), count(&x, &y, CountMethod::Grouped));
        }

        #[test]
        fn energy_is_symmetric(x in bounds(1..4), y in bounds(1..4)) {
            prop_assert_eq!(count(&x, &y, CountMethod::Grouped), count(&y, &x, CountMethod::Grouped));
        }

        #[test]
        fn energy_at_most_matrix_count(x in bounds(1..4), y in bounds(1..3)) {
            prop_assert!(count(&x, &y, CountMethod::Grouped) <= mcount(&x, &y));
        }

        #[test]
        fn counts_monotone_in_each_bound(x in bounds(1..3), y in bounds(1..3), bump in 0.5f64..4.0, pick in 0usize..4) {
            let (mut x2, mut y2) = (x.clone(), y.clone());
            let idx = pick % (x.len() + y.len());
            if idx < x.len() { x2[idx] += bump } else { y2[idx - x.len()] += bump }
            prop_assert!(count(&x, &y, CountMethod::Grouped) <= count(&x2, &y2, CountMethod::Grouped));
            prop_assert!(mcount(&x, &y) <= mcount(&x2, &y2));
        }
    }
}
