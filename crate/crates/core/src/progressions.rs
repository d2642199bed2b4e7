//! Counting polynomial progressions `x + P_1(m), …, x + P_k(m)` in prime sets,
//! the W-tricked weighted average and a heuristic singular series.

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::cyclic::{kahan_sum, CyclicFn};
use crate::localfactors::{complementary_factor, LocalError};
use crate::polyalg::{MultiPoly, PolyError};
use crate::sieve::{PrimeSet, PrimeTable, SieveError};

#[derive(Debug, Error)]
pub enum ProgressionError {
    #[error("invalid progression: {0}")]
    BadSpec(String),
    #[error("prime table covers up to {limit} but {needed} is required")]
    TableTooSmall { needed: u128, limit: u64 },
    #[error("shifts up to {max_shift} leave no window inside [1, {n}]")]
    Wraparound { max_shift: i64, n: usize },
    #[error("integer overflow evaluating a shift")]
    Overflow,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Sieve(#[from] SieveError),
}

/// Polynomials in `m` with `P_i(0) = 0`, ranges `x ∈ [1, N]`, `m ∈ [1, M]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProgressionSpec {
    polys: Vec<MultiPoly>,
    n: u64,
    m: u64,
    set: PrimeSet,
}

impl ProgressionSpec {
    pub fn new(polys: Vec<MultiPoly>, n: u64, m: u64, set: PrimeSet) -> Result<Self, ProgressionError> {
        if polys.is_empty() {
            return Err(ProgressionError::BadSpec("no polynomials".into()));
        }
        for (i, p) in polys.iter().enumerate() {
            if p.nvars() != 1 {
                return Err(ProgressionError::BadSpec(format!("P_{} must be univariate in m", i + 1)));
            }
            if !p.constant_term().is_zero() {
                return Err(ProgressionError::BadSpec(format!("P_{}(0) != 0", i + 1)));
            }
            if polys[..i].contains(p) {
                return Err(ProgressionError::BadSpec(format!("P_{} repeats an earlier polynomial", i + 1)));
            }
        }
        if n == 0 || m == 0 {
            return Err(ProgressionError::BadSpec("N and M must be positive".into()));
        }
        Ok(ProgressionSpec { polys, n, m, set })
    }

    pub fn polys(&self) -> &[MultiPoly] {
        &self.polys
    }

    pub fn k(&self) -> usize {
        self.polys.len()
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn set(&self) -> &PrimeSet {
        &self.set
    }

    /// `shifts[m−1][i] = P_i(m)`.
    pub fn shift_table(&self) -> Result<Vec<Vec<i64>>, ProgressionError> {
        (1..=self.m as i128)
            .map(|m| {
                self.polys
                    .iter()
                    .map(|p| p.eval_i128(&[m]).and_then(|v| i64::try_from(v).ok()).ok_or(ProgressionError::Overflow))
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub x: u64,
    pub m: u64,
    pub values: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgressionCount {
    pub count: u64,
    /// The first witnesses in `(x, m)` order.
    pub witnesses: Vec<Witness>,
}

/// Exact count of `(x, m)` with every `x + P_i(m)` in the prime set.
pub fn count_progressions(
    spec: &ProgressionSpec,
    table: &PrimeTable,
    sample_cap: usize,
) -> Result<ProgressionCount, ProgressionError> {
    let shifts = spec.shift_table()?;
    let max_shift = shifts.iter().flatten().map(|s| s.max(&0)).max().copied().unwrap_or(0);
    let needed = spec.n as u128 + max_shift as u128;
    if needed > table.limit() as u128 {
        return Err(ProgressionError::TableTooSmall { needed, limit: table.limit() });
    }
    let member = |v: i64| -> Result<bool, SieveError> {
        if v < 2 {
            return Ok(false);
        }
        spec.set.contains(v as u64, table)
    };
    let per_x: Vec<(u64, Vec<Witness>)> = (1..=spec.n)
        .into_par_iter()
        .map(|x| {
            let mut c = 0;
            let mut w = Vec::new();
            for (j, row) in shifts.iter().enumerate() {
                let mut ok = true;
                for &s in row {
                    if !member(x as i64 + s)? {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    c += 1;
                    if w.len() < sample_cap {
                        w.push(Witness { x, m: j as u64 + 1, values: row.iter().map(|s| x as i64 + s).collect() });
                    }
                }
            }
            Ok((c, w))
        })
        .collect::<Result<_, SieveError>>()?;
    let mut count = 0;
    let mut witnesses = Vec::new();
    for (c, w) in per_x {
        count += c;
        let room = sample_cap - witnesses.len();
        witnesses.extend(w.into_iter().take(room));
    }
    Ok(ProgressionCount { count, witnesses })
}

/// `E_{m∈[M]} E_{x∈X′} Π_i g(x − P_i(Wm)/W)` with `X′ = [1 + S, N − S]`
/// and `S` the largest shift, so that no shift wraps.
pub fn weighted_polynomial_average(
    g: &CyclicFn,
    polys: &[MultiPoly],
    m: u64,
    big_w: u64,
) -> Result<f64, ProgressionError> {
    if polys.is_empty() || m == 0 || big_w == 0 {
        return Err(ProgressionError::BadSpec("need polynomials, M ≥ 1 and W ≥ 1".into()));
    }
    let w = big_w as i128;
    let mut shifts: Vec<Vec<i64>> = Vec::with_capacity(m as usize);
    for mm in 1..=m as i128 {
        let mut row = Vec::with_capacity(polys.len());
        for (i, p) in polys.iter().enumerate() {
            if p.nvars() != 1 {
                return Err(ProgressionError::BadSpec(format!("P_{} must be univariate in m", i + 1)));
            }
            let v = p.eval_i128(&[w * mm]).ok_or(ProgressionError::Overflow)?;
            if v % w != 0 {
                return Err(ProgressionError::BadSpec(format!("P_{}(Wm)/W is not integral at m = {mm}", i + 1)));
            }
            row.push(i64::try_from(v / w).map_err(|_| ProgressionError::Overflow)?);
        }
        shifts.push(row);
    }
    let n = g.n();
    let max_shift = shifts.iter().flatten().map(|s| s.abs()).max().unwrap_or(0);
    let (lo, hi) = (1 + max_shift, n as i64 - max_shift);
    if lo > hi {
        return Err(ProgressionError::Wraparound { max_shift, n });
    }
    let len = (hi - lo + 1) as f64;
    let per_m: Vec<f64> = shifts
        .par_iter()
        .map(|row| kahan_sum((lo..=hi).map(|x| row.iter().map(|&s| g.at(x - s)).product::<f64>())) / len)
        .collect();
    Ok(kahan_sum(per_m.into_iter()) / m as f64)
}

/// Euler product over `p ≤ P₀` of `c̄_p / (1 − 1/p)^k` for the family
/// `x + P_i(m)` in two variables. HEURISTIC.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularSeries {
    pub gamma: f64,
    pub k: usize,
    pub cutoff: u64,
    /// `(p, c̄_p)` for each prime used.
    pub factors: Vec<(u64, BigRational)>,
    /// A prime with `c̄_p = 0`, if any; then `gamma = 0`.
    pub terrible: Option<u64>,
}

impl SingularSeries {
    /// `γ̂·N·M / log^k N`.
    pub fn predicted_count(&self, n: u64, m: u64) -> f64 {
        self.gamma * n as f64 * m as f64 / (n as f64).ln().powi(self.k as i32)
    }
}

/// Lifts `P(m)` to `x + P(m)` in variables `(x, m)`.
pub fn two_variable_family(polys: &[MultiPoly]) -> Result<Vec<MultiPoly>, ProgressionError> {
    let x = MultiPoly::var(2, 0);
    polys
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if p.nvars() != 1 {
                return Err(ProgressionError::BadSpec(format!("P_{} must be univariate in m", i + 1)));
            }
            Ok(&x + &p.remap(2, &[1]))
        })
        .collect()
}

pub fn singular_series(polys: &[MultiPoly], cutoff: u64, table: &PrimeTable) -> Result<SingularSeries, ProgressionError> {
    if polys.is_empty() {
        return Err(ProgressionError::BadSpec("no polynomials".into()));
    }
    if cutoff > table.limit() {
        return Err(ProgressionError::TableTooSmall { needed: cutoff as u128, limit: table.limit() });
    }
    let fam = two_variable_family(polys)?;
    let k = fam.len();
    let factors: Vec<(u64, BigRational)> = table
        .primes_in(2, cutoff)
        .par_iter()
        .map(|&p| Ok((p, complementary_factor(p, &fam)?)))
        .collect::<Result<_, LocalError>>()?;
    let mut log_gamma = 0.0;
    let mut terrible = None;
    for (p, c) in &factors {
        if c.is_zero() {
            terrible = Some(*p);
            break;
        }
        let pf = *p as f64;
        log_gamma += c.to_f64().unwrap_or(0.0).ln() - k as f64 * (1.0 - 1.0 / pf).ln();
    }
    let gamma = if terrible.is_some() { 0.0 } else { log_gamma.exp() };
    Ok(SingularSeries { gamma, k, cutoff, factors, terrible })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::parse_poly;
    use num_bigint::BigInt;

    fn fam(src: &str) -> Vec<MultiPoly> {
        src.split(';').map(|s| parse_poly(s, &["m"]).unwrap()).collect()
    }

    #[test]
    fn single_polynomial_counts_primes() {
        let table = PrimeTable::build(200).unwrap();
        let spec = ProgressionSpec::new(fam("0"), 100, 7, PrimeSet::All).unwrap();
        assert_eq!(count_progressions(&spec, &table, 0).unwrap().count, 25 * 7);
    }

    #[test]
    fn twin_style_pairs() {
        let table = PrimeTable::build(100).unwrap();
        let spec = ProgressionSpec::new(fam("0;m"), 50, 6, PrimeSet::All).unwrap();
        let r = count_progressions(&spec, &table, 3).unwrap();
        let mut naive = 0;
        for x in 1..=50u64 {
            for m in 1..=6 {
                if crate::polyalg::is_prime(x) && crate::polyalg::is_prime(x + m) {
                    naive += 1;
                }
            }
        }
        assert_eq!(r.count, naive);
        assert_eq!(r.witnesses[0], Witness { x: 2, m: 1, values: vec![2, 3] });
        assert_eq!(r.witnesses.len(), 3);
    }

    #[test]
    fn spec_validation() {
        assert!(ProgressionSpec::new(fam("m+1"), 10, 2, PrimeSet::All).is_err());
        assert!(ProgressionSpec::new(fam("m;m"), 10, 2, PrimeSet::All).is_err());
        let table = PrimeTable::build(50).unwrap();
        let spec = ProgressionSpec::new(fam("0;m^2"), 40, 5, PrimeSet::All).unwrap();
        assert!(matches!(count_progressions(&spec, &table, 0), Err(ProgressionError::TableTooSmall { .. })));
    }

    #[test]
    fn constant_averages() {
        let g = CyclicFn::constant(100, 0.5);
        let v = weighted_polynomial_average(&g, &fam("0;m;m^2"), 5, 1).unwrap();
        assert!((v - 0.125).abs() < 1e-15);
        let one = CyclicFn::constant(256, 1.0);
        assert_eq!(weighted_polynomial_average(&one, &fam("0;m^2"), 3, 6).unwrap(), 1.0);
        assert!(matches!(
            weighted_polynomial_average(&one, &fam("0;m^2"), 10, 6),
            Err(ProgressionError::Wraparound { .. })
        ));
        assert!(weighted_polynomial_average(&one, &fam("0;m^2+1"), 2, 2).is_err());
    }

    #[test]
    fn series_normalization() {
        let table = PrimeTable::build(100).unwrap();
        let s = singular_series(&fam("0"), 50, &table).unwrap();
        assert!((s.gamma - 1.0).abs() < 1e-12);
        let t = singular_series(&fam("0;m"), 50, &table).unwrap();
        let quarter = BigRational::new(BigInt::from(1), BigInt::from(4));
        assert_eq!(t.factors[0], (2, quarter));
        assert!((t.gamma - 1.0).abs() < 1e-12);
        let z = singular_series(&fam("0;1"), 10, &table).unwrap();
        assert_eq!((z.gamma, z.terrible), (0.0, Some(2)));
    }
}
