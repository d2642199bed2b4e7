//! Sums over primes, EXP, and Euler product diagnostics.

use super::PrimeTable;

/// EXP(x) = max(e^x − 1, 0).
pub fn exp_fn(x: f64) -> f64 {
    (x.exp() - 1.0).max(0.0)
}

/// Σ_{p < x} 1/p.
pub fn mertens_sum(table: &PrimeTable, x: u64) -> f64 {
    table.primes_in(0, x).iter().map(|&p| 1.0 / p as f64).sum()
}

/// Σ_{p < x} log^K p / p.
pub fn log_power_sum(table: &PrimeTable, x: u64, k: u32) -> f64 {
    log_power_over(table.primes_in(0, x), k)
}

fn log_power_over(primes: &[u64], k: u32) -> f64 {
    primes.iter().map(|&p| (p as f64).ln().powi(k as i32) / p as f64).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExplogReport {
    /// EXP(K Σ 1/p)
    pub lhs: f64,
    /// Σ log^K p / p
    pub rhs_sum: f64,
    /// Smallest C_K with lhs ≤ C_K · rhs_sum (0 when both vanish).
    pub witness: f64,
}

/// Compares EXP(K Σ_{p∈P} 1/p) with Σ_{p∈P} log^K p / p.
pub fn explog_check(primes: &[u64], k: u32) -> ExplogReport {
    let lhs = exp_fn(k as f64 * primes.iter().map(|&p| 1.0 / p as f64).sum::<f64>());
    let rhs_sum = log_power_over(primes, k);
    let witness = if rhs_sum > 0.0 { lhs / rhs_sum } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
    ExplogReport { lhs, rhs_sum, witness }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EulerReport {
    pub s: f64,
    pub cutoff: u64,
    /// Π_{p ≤ X} (1 − p^{−s})^{−1}
    pub product: f64,
    /// Σ_{n ≤ X} n^{−s}
    pub partial_zeta: f64,
}

pub fn euler_product_diagnostic(table: &PrimeTable, s: f64, cutoff: u64) -> EulerReport {
    let product = table
        .primes_in(0, cutoff + 1)
        .iter()
        .map(|&p| 1.0 / (1.0 - (p as f64).powf(-s)))
        .product();
    let partial_zeta = (1..=cutoff).map(|n| (n as f64).powf(-s)).sum();
    EulerReport { s, cutoff, product, partial_zeta }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivisorBoundReport {
    /// Σ_{p ≥ w, p ∈ P} 1/p
    pub sum: f64,
    /// log(M·W^M) / (w·log w): the count bound times 1/w
    pub trivial_bound: f64,
    /// Whether Π_{p∈P} p ≤ M·W^M holds (the hypothesis).
    pub hypothesis_holds: bool,
}

pub fn divisor_bound_check(primes: &[u64], w: u64, big_w: u64, m: u64) -> DivisorBoundReport {
    let log_cap = (m as f64).ln() + m as f64 * (big_w as f64).ln();
    let log_prod: f64 = primes.iter().map(|&p| (p as f64).ln()).sum();
    let sum = primes.iter().filter(|&&p| p >= w).map(|&p| 1.0 / p as f64).sum();
    let wf = w as f64;
    DivisorBoundReport {
        sum,
        trivial_bound: log_cap / (wf * wf.ln()),
        hypothesis_holds: log_prod <= log_cap + 1e-9,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_values() {
        assert_eq!(exp_fn(0.0), 0.0);
        assert!((exp_fn(2f64.ln()) - 1.0).abs() < 1e-15);
        assert_eq!(exp_fn(-1.0), 0.0);
    }

    #[test]
    fn mertens_100() {
        let t = PrimeTable::build(100).unwrap();
        let oracle: f64 = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97]
            .iter()
            .map(|&p: &u64| 1.0 / p as f64)
            .sum();
        assert!((mertens_sum(&t, 100) - oracle).abs() < 1e-15);
        assert!((mertens_sum(&t, 100) - 1.8028).abs() < 5e-5);
    }
}
