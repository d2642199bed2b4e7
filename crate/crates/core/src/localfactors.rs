//! Local factors c_p and complementary factors c̄_p by exhaustive enumeration
//! of F_p^D, and instance-level checks of the local estimates.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::polyalg::{
    classify_prime, jointly_coprime_mod_p, linear_split, reduce_mod_p, CompiledModPoly, Degree,
    MultiPoly, PolyError, PrimeClass, PrimeTag,
};

/// Default cap on the number of enumerated points.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Largest family handled by the subset histogram.
pub const MAX_FAMILY: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LocalError {
    #[error("enumeration of {points} points exceeds budget {budget}")]
    Budget { points: u128, budget: u64 },
    #[error("family of {0} polynomials is too large (max {MAX_FAMILY})")]
    FamilyTooLarge(usize),
    #[error("polynomial is not linear in variable {var} mod {p}")]
    NotLinear { var: usize, p: u64 },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

fn space_size(p: u64, d: usize, budget: u64) -> Result<u64, LocalError> {
    let points = (p as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if points > budget as u128 {
        return Err(LocalError::Budget { points, budget });
    }
    Ok(points as u64)
}

fn nvars_of(polys: &[MultiPoly]) -> Result<usize, LocalError> {
    let n = polys.first().map_or(0, MultiPoly::nvars);
    if let Some(q) = polys.iter().find(|q| q.nvars() != n) {
        return Err(PolyError::NvarsMismatch { left: n, right: q.nvars() }.into());
    }
    Ok(n)
}

/// For every point of F_p^D, the bitmask of polynomials vanishing there;
/// returns the histogram of masks (length 2^J).
pub fn zero_mask_histogram(p: u64, polys: &[MultiPoly], budget: u64) -> Result<Vec<u64>, LocalError> {
    if polys.len() > MAX_FAMILY {
        return Err(LocalError::FamilyTooLarge(polys.len()));
    }
    let d = nvars_of(polys)?;
    space_size(p, d, budget)?;
    let compiled: Vec<CompiledModPoly> =
        polys.iter().map(|q| reduce_mod_p(q, p).map(|r| r.compiled())).collect::<Result<_, _>>()?;
    let buckets = 1usize << polys.len();
    let mask_at = |x: &[u64]| {
        compiled
            .iter()
            .enumerate()
            .filter(|(_, c)| c.eval(x) == 0)
            .fold(0usize, |m, (j, _)| m | (1 << j))
    };
    if d == 0 {
        let mut h = vec![0u64; buckets];
        h[mask_at(&[])] += 1;
        return Ok(h);
    }
    // split on the first coordinate; integer counts make the sum order-independent
    let hist = (0..p)
        .into_par_iter()
        .map(|x0| {
            let mut h = vec![0u64; buckets];
            let mut x = vec![0u64; d];
            x[0] = x0;
            loop {
                h[mask_at(&x)] += 1;
                let mut i = 1;
                while i < d {
                    x[i] += 1;
                    if x[i] < p {
                        break;
                    }
                    x[i] = 0;
                    i += 1;
                }
                if i == d {
                    break;
                }
            }
            h
        })
        .reduce(
            || vec![0u64; buckets],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(s, t)| *s += t);
                a
            },
        );
    Ok(hist)
}

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Subset densities derived from one enumeration.
#[derive(Clone, Debug)]
pub struct SubsetTable {
    pub p: u64,
    pub nvars: usize,
    pub family_size: usize,
    pub space: u64,
    hist: Vec<u64>,
}

impl SubsetTable {
    pub fn build(p: u64, polys: &[MultiPoly], budget: u64) -> Result<Self, LocalError> {
        let hist = zero_mask_histogram(p, polys, budget)?;
        let nvars = nvars_of(polys)?;
        Ok(SubsetTable { p, nvars, family_size: polys.len(), space: hist.iter().sum(), hist })
    }

    /// Number of points where every polynomial indexed by `subset` vanishes.
    pub fn common_zeros(&self, subset: usize) -> u64 {
        self.hist
            .iter()
            .enumerate()
            .filter(|(m, _)| m & subset == subset)
            .map(|(_, c)| c)
            .sum()
    }

    /// c_p of the subfamily selected by the bitmask.
    pub fn c(&self, subset: usize) -> BigRational {
        ratio(self.common_zeros(subset), self.space)
    }

    /// c̄_p of the whole family.
    pub fn c_bar(&self) -> BigRational {
        ratio(self.hist[0], self.space)
    }

    /// Right-hand side of the inclusion–exclusion identity for c̄_p.
    pub fn inclusion_exclusion(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for s in 0..(1usize << self.family_size) {
            let term = self.c(s);
            if s.count_ones() % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }
}

pub fn local_factor(p: u64, polys: &[MultiPoly]) -> Result<BigRational, LocalError> {
    local_factor_with_budget(p, polys, DEFAULT_BUDGET)
}

pub fn local_factor_with_budget(p: u64, polys: &[MultiPoly], budget: u64) -> Result<BigRational, LocalError> {
    if polys.is_empty() {
        return Ok(BigRational::one());
    }
    let t = SubsetTable::build(p, polys, budget)?;
    Ok(t.c((1 << polys.len()) - 1))
}

pub fn complementary_factor(p: u64, polys: &[MultiPoly]) -> Result<BigRational, LocalError> {
    complementary_factor_with_budget(p, polys, DEFAULT_BUDGET)
}

pub fn complementary_factor_with_budget(p: u64, polys: &[MultiPoly], budget: u64) -> Result<BigRational, LocalError> {
    if polys.is_empty() {
        return Ok(BigRational::zero());
    }
    Ok(SubsetTable::build(p, polys, budget)?.c_bar())
}

/// Sizes of the A / B / C split of the coefficient space for a polynomial
/// linear in one variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSplit {
    /// linear coefficient non-zero
    pub a: u64,
    /// linear coefficient zero, constant coefficient non-zero
    pub b: u64,
    /// both zero
    pub c: u64,
    pub value: BigRational,
}

pub fn local_factor_linear(p: u64, poly: &MultiPoly, var: usize) -> Result<LinearSplit, LocalError> {
    local_factor_linear_with_budget(p, poly, var, DEFAULT_BUDGET)
}

pub fn local_factor_linear_with_budget(
    p: u64,
    poly: &MultiPoly,
    var: usize,
    budget: u64,
) -> Result<LinearSplit, LocalError> {
    let d = poly.nvars();
    if var >= d {
        return Err(PolyError::VarOutOfRange { var, nvars: d }.into());
    }
    let (p1, p0) = linear_split(poly, var, p)?.ok_or(LocalError::NotLinear { var, p })?;
    // drop `var` so the coefficients live on F_p^{D-1}
    let map: Vec<usize> = (0..d).map(|i| if i < var { i } else { i.saturating_sub(1) }).collect();
    let p1 = p1.remap(d - 1, &map);
    let p0 = p0.remap(d - 1, &map);
    let t = SubsetTable::build(p, &[p1, p0], budget)?;
    let a = t.space - t.common_zeros(0b01);
    let c = t.common_zeros(0b11);
    let b = t.space - a - c;
    let full = t.space * p;
    Ok(LinearSplit { a, b, c, value: ratio(a + c * p, full) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clause {
    A,
    B,
    C,
    D,
    E,
    F,
}

#[derive(Clone, Debug)]
pub struct ClauseReport {
    pub clause: Clause,
    pub applicable: bool,
    /// Exact clauses: whether the identity holds. Asymptotic clauses: always true.
    pub holds: bool,
    /// Smallest constant making the clause true on this instance.
    pub witness: f64,
}

#[derive(Clone, Debug)]
pub struct LocalFactorReport {
    pub p: u64,
    pub c_p: BigRational,
    pub c_bar_p: BigRational,
    pub prime_class: PrimeClass,
    pub sample_space_size: u64,
    pub clauses: Vec<ClauseReport>,
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Evaluates the six local estimate clauses on one instance.
pub fn local_estimates_report(p: u64, polys: &[MultiPoly]) -> Result<LocalFactorReport, LocalError> {
    let class = classify_prime(p, polys)?;
    let t = SubsetTable::build(p, polys, DEFAULT_BUDGET)?;
    let j = polys.len();
    let full = (1usize << j) - 1;
    let pr = BigRational::from_integer(BigInt::from(p));
    let inv_p = BigRational::new(BigInt::one(), BigInt::from(p));
    let terrible = class.tag == PrimeTag::Terrible;
    let good = class.tag == PrimeTag::Good;
    let nonempty = || 1..=full;

    let max_over = |subsets: &mut dyn Iterator<Item = usize>, f: &dyn Fn(BigRational) -> BigRational| {
        subsets.map(|s| to_f64(&f(t.c(s)))).fold(0.0f64, f64::max)
    };

    let a = ClauseReport { clause: Clause::A, applicable: true, holds: t.c(0).is_one(), witness: 0.0 };
    let b = ClauseReport {
        clause: Clause::B,
        applicable: !terrible,
        holds: true,
        witness: max_over(&mut nonempty(), &|c| c * &pr),
    };
    let c = ClauseReport {
        clause: Clause::C,
        applicable: good,
        holds: true,
        witness: max_over(&mut nonempty().filter(|s| s.count_ones() == 1), &|c| (c - &inv_p).abs() * &pr * &pr),
    };
    let d = ClauseReport {
        clause: Clause::D,
        applicable: good,
        holds: true,
        witness: max_over(&mut nonempty().filter(|s| s.count_ones() > 1), &|c| c * &pr * &pr),
    };
    let e = ClauseReport { clause: Clause::E, applicable: terrible, holds: !terrible || t.c_bar().is_zero(), witness: 0.0 };
    let f = ClauseReport {
        clause: Clause::F,
        applicable: !terrible,
        holds: true,
        witness: to_f64(&((t.c_bar() - BigRational::one()).abs() * &pr)),
    };
    Ok(LocalFactorReport {
        p,
        c_p: t.c(full),
        c_bar_p: t.c_bar(),
        prime_class: class,
        sample_space_size: t.space,
        clauses: vec![a, b, c, d, e, f],
    })
}

/// The five crude bounds evaluated on one instance.
#[derive(Clone, Debug)]
pub struct CrudeReport {
    /// (i) all vanish ⇒ c_p = 1
    pub all_vanish: Option<bool>,
    /// (ii) one vanishes ⇒ c̄_p = 0
    pub one_vanishes: Option<bool>,
    /// (iii) a non-zero constant ⇒ c_p = 0
    pub nonzero_constant: Option<bool>,
    /// (iv) a non-constant member ⇒ c_p ≤ Dd/p
    pub non_constant: Option<bool>,
    /// (v) jointly coprime, J ≥ 2 ⇒ c_p·p² (reported)
    pub coprime_witness: Option<f64>,
}

impl CrudeReport {
    pub fn all_hold(&self) -> bool {
        [self.all_vanish, self.one_vanishes, self.nonzero_constant, self.non_constant]
            .iter()
            .all(|c| c.unwrap_or(true))
    }
}

pub fn crude_bounds(p: u64, polys: &[MultiPoly]) -> Result<CrudeReport, LocalError> {
    let t = SubsetTable::build(p, polys, DEFAULT_BUDGET)?;
    let full = (1usize << polys.len()) - 1;
    let cp = t.c(full);
    let reduced = polys.iter().map(|q| reduce_mod_p(q, p)).collect::<Result<Vec<_>, _>>()?;
    let vanish: Vec<bool> = reduced.iter().map(|r| r.is_zero()).collect();
    let all_vanish = (!polys.is_empty() && vanish.iter().all(|&v| v)).then(|| cp.is_one());
    let one_vanishes = vanish.iter().any(|&v| v).then(|| t.c_bar().is_zero());
    let nonzero_constant = reduced.iter().any(|r| r.is_nonzero_constant()).then(|| cp.is_zero());
    let d = t.nvars as u64;
    let non_constant = reduced
        .iter()
        .filter(|r| !r.is_zero() && !r.body().is_constant())
        .map(|r| match r.body().total_degree() {
            Degree::Finite(k) => k as u64,
            Degree::NegInfinity => 0,
        })
        .min()
        .map(|deg| cp <= BigRational::new(BigInt::from(d * deg), BigInt::from(p)));
    let coprime_witness = if polys.len() >= 2 && !vanish.iter().any(|&v| v) && jointly_coprime_mod_p(polys, p)? {
        Some(to_f64(&(cp * BigRational::from_integer(BigInt::from(p * p)))))
    } else {
        None
    };
    Ok(CrudeReport { all_vanish, one_vanishes, nonzero_constant, non_constant, coprime_witness })
}

/// Fraction of a product grid `A_1 × … × A_D` on which every polynomial vanishes mod p.
pub fn grid_zero_density(p: u64, polys: &[MultiPoly], grid: &[Vec<u64>]) -> Result<BigRational, LocalError> {
    let d = nvars_of(polys)?;
    if grid.len() != d {
        return Err(PolyError::ExponentLength { expected: d, found: grid.len() }.into());
    }
    let compiled: Vec<CompiledModPoly> =
        polys.iter().map(|q| reduce_mod_p(q, p).map(|r| r.compiled())).collect::<Result<_, _>>()?;
    let total: u64 = grid.iter().map(|a| a.len() as u64).product();
    if total == 0 {
        return Ok(BigRational::zero());
    }
    let mut idx = vec![0usize; d];
    let mut x: Vec<u64> = grid.iter().map(|a| a[0] % p).collect();
    let mut zeros = 0u64;
    loop {
        if compiled.iter().all(|c| c.eval(&x) == 0) {
            zeros += 1;
        }
        let mut i = 0;
        while i < d {
            idx[i] += 1;
            if idx[i] < grid[i].len() {
                x[i] = grid[i][idx[i]] % p;
                break;
            }
            idx[i] = 0;
            x[i] = grid[i][0] % p;
            i += 1;
        }
        if i == d {
            break;
        }
    }
    Ok(ratio(zeros, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::parse_family;

    fn fam(s: &str) -> Vec<MultiPoly> {
        parse_family(s, None).unwrap().polys
    }

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn x2_plus_1() {
        let f = fam("x^2+1");
        assert_eq!(local_factor(5, &f).unwrap(), q(2, 5));
        assert_eq!(local_factor(3, &f).unwrap(), q(0, 1));
        assert_eq!(local_factor(2, &f).unwrap(), q(1, 2));
    }

    #[test]
    fn empty_family() {
        assert_eq!(local_factor(7, &[]).unwrap(), q(1, 1));
        assert_eq!(complementary_factor(7, &[]).unwrap(), q(0, 1));
    }

    #[test]
    fn complementary_examples() {
        assert_eq!(complementary_factor(5, &fam("x1*x2+1")).unwrap(), q(21, 25));
        assert_eq!(complementary_factor(7, &fam("x1; x2")).unwrap(), q(36, 49));
    }

    #[test]
    fn linear_split_examples() {
        let s = local_factor_linear(5, &fam("x1*x2+1")[0], 1).unwrap();
        assert_eq!((s.a, s.b, s.c), (4, 1, 0));
        assert_eq!(s.value, q(4, 25));
        let s = local_factor_linear(5, &fam("x2 + x1^2")[0], 1).unwrap();
        assert_eq!((s.a, s.b, s.c), (5, 0, 0));
        assert_eq!(s.value, q(1, 5));
        let s = local_factor_linear(7, &fam("x1")[0], 0).unwrap();
        assert_eq!(s.value, q(1, 7));
        assert!(matches!(
            local_factor_linear(5, &fam("x1^2")[0], 0),
            Err(LocalError::NotLinear { var: 0, p: 5 })
        ));
    }

    #[test]
    fn estimates_examples() {
        let r = local_estimates_report(7, &fam("7x+7")).unwrap();
        assert_eq!(r.prime_class.tag, PrimeTag::Terrible);
        assert!(r.clauses[4].applicable && r.clauses[4].holds);
        assert!(r.c_bar_p.is_zero());

        let r = local_estimates_report(11, &fam("x1+1")).unwrap();
        assert_eq!(r.c_p, q(1, 11));
        assert_eq!(r.clauses[2].witness, 0.0);

        let r = local_estimates_report(5, &fam("x1+1; x2+1")).unwrap();
        assert_eq!(r.c_p, q(1, 25));
        assert!(r.clauses[3].applicable);
        assert_eq!(r.clauses[3].witness, 1.0);
    }

    #[test]
    fn budget_error() {
        let f = fam("x1+x2+x3");
        assert!(matches!(
            local_factor_with_budget(101, &f, 1000),
            Err(LocalError::Budget { points: 1030301, budget: 1000 })
        ));
    }

    #[test]
    fn crude_examples() {
        let r = crude_bounds(5, &fam("x+5; 3")).unwrap();
        assert_eq!(r.nonzero_constant, Some(true));
        assert!(r.all_hold());
        let r = crude_bounds(5, &fam("5x; 10")).unwrap();
        assert_eq!(r.all_vanish, Some(true));
        assert_eq!(r.one_vanishes, Some(true));
    }

    #[test]
    fn grid_density() {
        let f = fam("x1 - x2");
        let g = vec![vec![0, 1, 2], vec![0, 1, 2, 3]];
        assert_eq!(grid_zero_density(11, &f, &g).unwrap(), q(3, 12));
    }
}
