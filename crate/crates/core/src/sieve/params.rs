//! W-trick parameters.

use std::collections::BTreeSet;

use num_integer::Integer;

use super::{PrimeTable, SieveError};

/// The prime subset A.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrimeSet {
    All,
    Explicit(BTreeSet<u64>),
}

impl PrimeSet {
    pub fn contains(&self, n: u64, table: &PrimeTable) -> Result<bool, SieveError> {
        match self {
            PrimeSet::All => table.is_prime(n),
            PrimeSet::Explicit(s) => Ok(s.contains(&n)),
        }
    }
}

/// Coarse scale M, sieve level R and fine scale H.
#[derive(Clone, Debug, PartialEq)]
pub enum Scales {
    Direct { m: u64, r: f64, h: u64 },
    /// `M = N^η₀`, `R = N^η₂`, `H = N^η₇`.
    Eta([f64; 8]),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SieveParams {
    pub n_prime: u64,
    pub w: u64,
    pub big_w: u64,
    pub b: u64,
    pub n: u64,
    pub m: u64,
    pub r: f64,
    pub h: u64,
    pub eta: Option<[f64; 8]>,
    pub delta0: Option<f64>,
    pub warnings: Vec<String>,
}

impl SieveParams {
    /// φ(W)/W.
    pub fn totient_ratio(&self) -> f64 {
        totient(self.big_w) as f64 / self.big_w as f64
    }

    /// The constant `(φ(W)/W)·log R`.
    pub fn weight(&self) -> f64 {
        self.totient_ratio() * self.r.ln()
    }

    /// Largest integer `W·x + b` with `x ∈ [N]`.
    pub fn max_value(&self) -> u64 {
        self.big_w * self.n + self.b
    }
}

/// Product of the primes below `w`.
pub fn primorial_below(w: u64) -> u64 {
    (2..w).filter(|&p| crate::polyalg::is_prime(p)).product()
}

pub fn totient(n: u64) -> u64 {
    let mut m = n;
    let mut out = n;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            while m.is_multiple_of(p) {
                m /= p;
            }
            out -= out / p;
        }
        p += 1;
    }
    if m > 1 {
        out -= out / m;
    }
    out
}

fn resolve_scales(n: u64, scales: &Scales) -> (u64, f64, u64, Option<[f64; 8]>) {
    match scales {
        Scales::Direct { m, r, h } => (*m, *r, *h, None),
        Scales::Eta(eta) => {
            let nf = n as f64;
            (nf.powf(eta[0]).floor() as u64, nf.powf(eta[2]), nf.powf(eta[7]).floor() as u64, Some(*eta))
        }
    }
}

/// Builds the parameter set from the outer length `N′`.
pub fn derive_params(
    n_prime: u64,
    w: u64,
    scales: &Scales,
    set: &PrimeSet,
    table: &PrimeTable,
) -> Result<SieveParams, SieveError> {
    let big_w = primorial_below(w);
    if (big_w as f64).powi(4) > n_prime as f64 {
        return Err(SieveError::BadParams(format!("W = {big_w} exceeds N'^(1/4) for N' = {n_prime}")));
    }
    let n = n_prime / (2 * big_w);
    build(n_prime, n, w, big_w, scales, set, table)
}

/// Builds the parameter set from `N` directly, taking `N′ = 2·W·N`.
pub fn params_from_n(
    n: u64,
    w: u64,
    scales: &Scales,
    set: &PrimeSet,
    table: &PrimeTable,
) -> Result<SieveParams, SieveError> {
    let big_w = primorial_below(w);
    build(2 * big_w * n, n, w, big_w, scales, set, table)
}

fn build(
    n_prime: u64,
    n: u64,
    w: u64,
    big_w: u64,
    scales: &Scales,
    set: &PrimeSet,
    table: &PrimeTable,
) -> Result<SieveParams, SieveError> {
    if n < 2 {
        return Err(SieveError::BadParams(format!("N = {n} is too small")));
    }
    let (m, r, h, eta) = resolve_scales(n, scales);
    if r <= 1.0 {
        return Err(SieveError::BadParams(format!("sieve level R = {r} must exceed 1")));
    }
    let needed = big_w * n + big_w;
    if needed > table.limit() {
        return Err(SieveError::TableTooSmall { needed, limit: table.limit() });
    }
    let mut best = (0u64, 0u64);
    for b in 1..=big_w {
        if b.gcd(&big_w) != 1 {
            continue;
        }
        let mut count = 0;
        for x in 1..=n / 2 {
            if set.contains(big_w * x + b, table)? {
                count += 1;
            }
        }
        if best.0 == 0 || count > best.1 {
            best = (b, count);
        }
    }
    let mut warnings = Vec::new();
    let nf = n as f64;
    if !(1.0 < h as f64 && (h as f64) < r && r < m as f64 && (m as f64) < nf) {
        warnings.push(format!("size hierarchy 1 < H < R < M < N fails: H={h}, R={r:.4}, M={m}, N={n}"));
    }
    Ok(SieveParams { n_prime, w, big_w, b: best.0, n, m, r, h, eta, delta0: None, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primorials() {
        assert_eq!(primorial_below(5), 6);
        assert_eq!(primorial_below(3), 2);
        assert_eq!(primorial_below(2), 1);
        assert_eq!(totient(30), 8);
    }

    #[test]
    fn residue_choice() {
        let table = PrimeTable::build(100_100).unwrap();
        let p = derive_params(100_000, 5, &Scales::Direct { m: 100, r: 10.0, h: 2 }, &PrimeSet::All, &table).unwrap();
        assert_eq!(p.big_w, 6);
        assert_eq!(p.n, 8333);
        let count = |b: u64| (1..=p.n / 2).filter(|x| table.is_prime(6 * x + b).unwrap()).count();
        let (c1, c5) = (count(1), count(5));
        let want = if c5 > c1 { 5 } else { 1 };
        assert_eq!(p.b, want);
    }
}
