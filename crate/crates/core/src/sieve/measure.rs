//! The truncated divisor-sum majorant ν and the prime weight f.

use rayon::prelude::*;

use super::{CutoffChi, PrimeSet, PrimeTable, SieveError, SieveParams};
use crate::cyclic::CyclicFn;

/// `Σ_{m | n, m < R} μ(m) χ(log m / log R)` over squarefree divisors.
pub fn truncated_divisor_sum(n: u64, r: f64, chi: &CutoffChi, table: &PrimeTable) -> Result<f64, SieveError> {
    let primes = table.distinct_prime_factors(n)?;
    let log_r = r.ln();
    let mut sum = 0.0;
    // depth-first over squarefree divisors below R
    let mut stack: Vec<(usize, u64, i32)> = vec![(0, 1, 1)];
    while let Some((start, m, sign)) = stack.pop() {
        sum += sign as f64 * chi.value((m as f64).ln() / log_r);
        for (i, &p) in primes.iter().enumerate().skip(start) {
            let next = m * p;
            if (next as f64) < r {
                stack.push((i + 1, next, -sign));
            }
        }
    }
    Ok(sum)
}

fn check_table(params: &SieveParams, table: &PrimeTable) -> Result<(), SieveError> {
    let needed = params.max_value();
    if needed > table.limit() {
        return Err(SieveError::TableTooSmall { needed, limit: table.limit() });
    }
    if params.r <= 1.0 {
        return Err(SieveError::BadParams(format!("sieve level R = {} must exceed 1", params.r)));
    }
    Ok(())
}

/// ν(x) = (φ(W)/W)·log R·(Σ_{m | Wx+b} μ(m) χ(log m / log R))² on `x ∈ [N]`.
pub fn nu(params: &SieveParams, chi: &CutoffChi, table: &PrimeTable) -> Result<CyclicFn, SieveError> {
    check_table(params, table)?;
    let n = params.n as usize;
    let weight = params.weight();
    let vals: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = if i == 0 { n as u64 } else { i as u64 };
            let s = truncated_divisor_sum(params.big_w * x + params.b, params.r, chi, table)?;
            Ok(weight * s * s)
        })
        .collect::<Result<_, SieveError>>()?;
    Ok(CyclicFn::new(vals))
}

/// f(x) = (φ(W)/W)·log R when `x ≤ N/2`, `Wx+b ∈ A` and `Wx+b > R`; zero otherwise.
pub fn prime_weight_f(params: &SieveParams, set: &PrimeSet, table: &PrimeTable) -> Result<CyclicFn, SieveError> {
    check_table(params, table)?;
    let n = params.n as usize;
    let weight = params.weight();
    let mut vals = vec![0.0; n];
    for x in 1..=params.n / 2 {
        let v = params.big_w * x + params.b;
        if (v as f64) > params.r && set.contains(v, table)? {
            vals[(x % params.n) as usize] = weight;
        }
    }
    Ok(CyclicFn::new(vals))
}

/// Errors at the first point where `f > ν`.
pub fn check_majorization(f: &CyclicFn, nu: &CyclicFn) -> Result<(), SieveError> {
    for (i, (&a, &b)) in f.values().iter().zip(nu.values()).enumerate() {
        if a > b {
            return Err(SieveError::Majorization { x: i, f: a, nu: b });
        }
    }
    Ok(())
}

/// The crude pointwise bound `(φ(W)/W)·log R·τ(Wx+b)²` at `x ∈ [N]`.
pub fn nu_divisor_bound(params: &SieveParams, table: &PrimeTable, x: u64) -> Result<f64, SieveError> {
    let tau = table.divisor_count(params.big_w * x + params.b)? as f64;
    Ok(params.weight() * tau * tau)
}

/// ν_{1/2} = (1 + ν)/2.
pub fn half_nu(nu: &CyclicFn) -> CyclicFn {
    nu.map(|v| (1.0 + v) / 2.0)
}
