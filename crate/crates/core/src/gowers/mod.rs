//! Box norms, local and averaged local Gowers norms, dual functions and the
//! inequality suite around them.
//!
//! Shifts follow `T^n f(x) = f(x − n)` on Z_N.

mod checks;
mod tensor;

pub use checks::{domination_check, moment_bound, vdc_check, DominationReport, MomentReport, VdcReport};
pub use tensor::{
    box_norm, box_norm_power, corner_average, csg_check, weighted_box_power, wgn_check, CsgReport, Tensor, WgnReport,
};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::cyclic::{kahan_sum, CyclicFn};
use crate::polyalg::MultiPoly;
use crate::sieve::EstimatorMode;

/// Magnitude below which a negative pre-root value is treated as rounding.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;
/// Default cap on terms evaluated in exact mode.
pub const EXACT_BUDGET: u64 = 2_000_000_000;

#[derive(Debug, Error)]
pub enum GowersError {
    #[error("pre-root value {0} is negative beyond tolerance")]
    Negative(f64),
    #[error("bad shape: {0}")]
    Shape(String),
    #[error("invalid specification: {0}")]
    BadSpec(String),
    #[error("exact evaluation needs {cost} terms, budget is {budget}; use sampled mode")]
    Budget { cost: f64, budget: u64 },
    #[error("|f_{index}| exceeds its weight at flat position {position}")]
    Domination { index: usize, position: usize },
    #[error("modulus mismatch: {0} vs {1}")]
    Modulus(usize, usize),
    #[error("integer overflow evaluating a step polynomial")]
    Overflow,
}

/// Takes the `2^d`-th root, clamping tiny negative values to zero.
pub(crate) fn root(power: f64, d: usize) -> Result<f64, GowersError> {
    let p = if power < 0.0 {
        if power < -NEGATIVE_TOLERANCE {
            return Err(GowersError::Negative(power));
        }
        log::warn!("clamping negative pre-root value {power:e} to zero");
        0.0
    } else {
        power
    };
    Ok(p.powf(1.0 / (1u64 << d) as f64))
}

/// Steps `Q(h, W)` for `h ∈ [H]^t`, with `W` fixed and coarse range `[√M]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GowersSpec {
    q: Vec<MultiPoly>,
    t: usize,
    h: u64,
    w_value: i64,
    sqrt_m: u64,
}

impl GowersSpec {
    /// Each `Q_i` has `t + 1` variables `(h_1, …, h_t, W)`.
    pub fn new(q: Vec<MultiPoly>, t: usize, h: u64, w_value: i64, sqrt_m: u64) -> Result<Self, GowersError> {
        if q.is_empty() {
            return Err(GowersError::BadSpec("d must be at least 1".into()));
        }
        if h == 0 || sqrt_m == 0 {
            return Err(GowersError::BadSpec("H and sqrt(M) must be positive".into()));
        }
        for (i, p) in q.iter().enumerate() {
            if p.nvars() != t + 1 {
                return Err(GowersError::BadSpec(format!("Q_{} has {} variables, expected {}", i + 1, p.nvars(), t + 1)));
            }
            if p.is_zero() {
                return Err(GowersError::BadSpec(format!("Q_{} is the zero polynomial", i + 1)));
            }
        }
        Ok(GowersSpec { q, t, h, w_value, sqrt_m })
    }

    /// Constant steps: `t = 0`.
    pub fn constant_steps(steps: &[i64], sqrt_m: u64) -> Result<Self, GowersError> {
        let q = steps.iter().map(|&a| MultiPoly::constant(1, a)).collect();
        GowersSpec::new(q, 0, 1, 1, sqrt_m)
    }

    pub fn d(&self) -> usize {
        self.q.len()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn h(&self) -> u64 {
        self.h
    }

    pub fn w_value(&self) -> i64 {
        self.w_value
    }

    pub fn sqrt_m(&self) -> u64 {
        self.sqrt_m
    }

    pub fn q(&self) -> &[MultiPoly] {
        &self.q
    }

    pub fn with_range(&self, h: u64, sqrt_m: u64) -> Result<Self, GowersError> {
        GowersSpec::new(self.q.clone(), self.t, h, self.w_value, sqrt_m)
    }

    pub fn with_w(&self, w_value: i64) -> Self {
        GowersSpec { w_value, ..self.clone() }
    }

    /// Steps at one fine point `h`.
    pub fn steps(&self, h: &[i64]) -> Result<Vec<i64>, GowersError> {
        let mut point: Vec<i128> = h.iter().map(|&v| v as i128).collect();
        point.push(self.w_value as i128);
        self.q
            .iter()
            .map(|p| p.eval_i128(&point).and_then(|v| i64::try_from(v).ok()).ok_or(GowersError::Overflow))
            .collect()
    }

    /// Steps for every `h ∈ [H]^t`, in lexicographic order.
    pub fn step_table(&self) -> Result<Vec<Vec<i64>>, GowersError> {
        let count = (self.h as f64).powi(self.t as i32);
        if count > 1e7 {
            return Err(GowersError::Budget { cost: count, budget: 10_000_000 });
        }
        let mut out = Vec::with_capacity(count as usize);
        let mut h = vec![1i64; self.t];
        loop {
            out.push(self.steps(&h)?);
            let mut i = self.t;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                h[i] += 1;
                if h[i] <= self.h as i64 {
                    break;
                }
                h[i] = 1;
            }
        }
    }

    /// The concatenation `Q_1 ⊕ … ⊕ Q_k`, with fine variables placed side by side.
    pub fn concat(specs: &[GowersSpec]) -> Result<GowersSpec, GowersError> {
        let first = specs.first().ok_or_else(|| GowersError::BadSpec("nothing to concatenate".into()))?;
        if specs.iter().any(|s| s.h != first.h || s.sqrt_m != first.sqrt_m || s.w_value != first.w_value) {
            return Err(GowersError::BadSpec("concatenated specs must share H, sqrt(M) and W".into()));
        }
        let t: usize = specs.iter().map(|s| s.t).sum();
        let mut q = Vec::new();
        let mut offset = 0;
        for s in specs {
            let mut map: Vec<usize> = (0..s.t).map(|i| offset + i).collect();
            map.push(t);
            q.extend(s.q.iter().map(|p| p.remap(t + 1, &map)));
            offset += s.t;
        }
        GowersSpec::new(q, t, first.h, first.w_value, first.sqrt_m)
    }

    fn exact_norm_cost(&self, n: usize) -> f64 {
        (self.h as f64).powi(self.t as i32) * (self.sqrt_m as f64).powi(2 * self.d() as i32) * n as f64
    }

    fn dual_cost(&self, n: usize) -> f64 {
        (self.h as f64).powi(self.t as i32)
            * ((2 * self.sqrt_m - 1) as f64).powi(self.d() as i32)
            * ((1u64 << self.d()) - 1) as f64
            * n as f64
    }
}

/// Whether every step vanishes mod N.
pub fn steps_degenerate(steps: &[i64], n: usize) -> bool {
    steps.iter().all(|a| a.rem_euclid(n as i64) == 0)
}

/// `E_x ‖F_x‖_{□^d}^{2^d}` with `F_x(m) = f(x + Σ a_i m_i)`, `m ∈ [√M]^d`.
pub fn local_gowers_power(f: &CyclicFn, steps: &[i64], sqrt_m: u64) -> Result<f64, GowersError> {
    let d = steps.len();
    if d == 0 || sqrt_m == 0 {
        return Err(GowersError::BadSpec("need d >= 1 and sqrt(M) >= 1".into()));
    }
    let s = sqrt_m as usize;
    let dims = vec![s; d];
    let vals: Vec<f64> = (0..f.n())
        .into_par_iter()
        .map(|x| {
            let t = Tensor::from_fn(dims.clone(), |m| {
                let shift: i64 = m.iter().zip(steps).map(|(&mi, a)| (mi as i64 + 1) * a).sum();
                f.at(x as i64 + shift)
            })
            .expect("finite tensor");
            box_norm_power(&t)
        })
        .collect();
    Ok(kahan_sum(vals.into_iter()) / f.n() as f64)
}

/// The local Gowers norm with fixed steps.
pub fn local_gowers(f: &CyclicFn, steps: &[i64], sqrt_m: u64) -> Result<f64, GowersError> {
    root(local_gowers_power(f, steps, sqrt_m)?, steps.len())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GowersEstimate {
    pub norm: f64,
    /// The value before the `2^d`-th root.
    pub power: f64,
    /// Standard error of `power` in sampled mode.
    pub std_error: Option<f64>,
    pub seed: Option<u64>,
    pub evaluations: u64,
    /// All steps vanish mod N for every `h`.
    pub degenerate: bool,
}

/// The averaged local Gowers norm.
pub fn avg_local_gowers(f: &CyclicFn, spec: &GowersSpec, mode: EstimatorMode) -> Result<GowersEstimate, GowersError> {
    avg_local_gowers_with_budget(f, spec, mode, EXACT_BUDGET)
}

pub fn avg_local_gowers_with_budget(
    f: &CyclicFn,
    spec: &GowersSpec,
    mode: EstimatorMode,
    budget: u64,
) -> Result<GowersEstimate, GowersError> {
    let table = spec.step_table()?;
    let degenerate = table.iter().all(|a| steps_degenerate(a, f.n()));
    let cost = spec.exact_norm_cost(f.n());
    let sampled = match mode {
        EstimatorMode::Exact => {
            if cost > budget as f64 {
                return Err(GowersError::Budget { cost, budget });
            }
            None
        }
        EstimatorMode::Auto { budget: b, seed } => (cost > b as f64).then_some((b, seed)),
        EstimatorMode::Sampled { samples, seed } => Some((samples, seed)),
    };
    let d = spec.d();
    match sampled {
        None => {
            let mut acc = Vec::with_capacity(table.len());
            for steps in &table {
                acc.push(local_gowers_power(f, steps, spec.sqrt_m)?);
            }
            let power = kahan_sum(acc.into_iter()) / table.len() as f64;
            Ok(GowersEstimate {
                norm: root(power, d)?,
                power,
                std_error: None,
                seed: None,
                evaluations: cost as u64,
                degenerate,
            })
        }
        Some((samples, seed)) => {
            let samples = samples.max(2);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = spec.sqrt_m as i64;
            let (mut sum, mut sq) = (0.0, 0.0);
            let mut m0 = vec![0i64; d];
            let mut m1 = vec![0i64; d];
            for _ in 0..samples {
                let x = rng.random_range(0..f.n() as i64);
                let steps = &table[rng.random_range(0..table.len())];
                for i in 0..d {
                    m0[i] = rng.random_range(1..=s);
                    m1[i] = rng.random_range(1..=s);
                }
                let mut prod = 1.0;
                for omega in 0..1usize << d {
                    let shift: i64 = (0..d).map(|i| if omega >> i & 1 == 1 { m1[i] } else { m0[i] } * steps[i]).sum();
                    prod *= f.at(x + shift);
                }
                sum += prod;
                sq += prod * prod;
            }
            let k = samples as f64;
            let mean = sum / k;
            let var = ((sq / k - mean * mean) * k / (k - 1.0)).max(0.0);
            // the sampled power can dip below zero; clamp before the root
            Ok(GowersEstimate {
                norm: mean.max(0.0).powf(1.0 / (1u64 << d) as f64),
                power: mean,
                std_error: Some((var / k).sqrt()),
                seed: Some(seed),
                evaluations: samples << d,
                degenerate,
            })
        }
    }
}

/// One weighted difference pattern of the dual average.
struct DualTerm {
    weight: f64,
    offsets: Vec<i64>,
}

fn dual_terms(spec: &GowersSpec) -> Result<Vec<DualTerm>, GowersError> {
    let table = spec.step_table()?;
    let d = spec.d();
    let s = spec.sqrt_m as i64;
    let norm = (s * s) as f64;
    let mut out = Vec::new();
    let span = (2 * s - 1) as usize;
    for steps in &table {
        let mut delta = vec![-(s - 1); d];
        for _ in 0..span.pow(d as u32) {
            // m⁽¹⁾ − m⁽⁰⁾ = δ occurs S − |δ| times in [√M]²
            let weight: f64 = delta.iter().map(|&v| (s - v.abs()) as f64 / norm).product::<f64>() / table.len() as f64;
            let offsets = (1..1usize << d)
                .map(|omega| (0..d).filter(|&i| omega >> i & 1 == 1).map(|i| delta[i] * steps[i]).sum())
                .collect();
            out.push(DualTerm { weight, offsets });
            for v in delta.iter_mut() {
                *v += 1;
                if *v < s {
                    break;
                }
                *v = -(s - 1);
            }
        }
    }
    Ok(out)
}

/// The dual function `Df(x) = E Π_{ω≠0} f(x − Σ_i (m_i^{(ω_i)} − m_i^{(0)}) Q_i(h, W))`.
pub fn dual_function(f: &CyclicFn, spec: &GowersSpec) -> Result<CyclicFn, GowersError> {
    dual_function_with_budget(f, spec, EXACT_BUDGET)
}

pub fn dual_function_with_budget(f: &CyclicFn, spec: &GowersSpec, budget: u64) -> Result<CyclicFn, GowersError> {
    let cost = spec.dual_cost(f.n());
    if cost > budget as f64 {
        return Err(GowersError::Budget { cost, budget });
    }
    let terms = dual_terms(spec)?;
    let vals: Vec<f64> = (0..f.n())
        .into_par_iter()
        .map(|x| {
            let x = x as i64;
            let mut acc = 0.0;
            for term in &terms {
                let mut prod = term.weight;
                for &o in &term.offsets {
                    prod *= f.at(x - o);
                }
                acc += prod;
            }
            acc
        })
        .collect();
    Ok(CyclicFn::new(vals))
}

/// The global bad set `Ω₀ = {x : Dν(x) ≥ 2^{2^d}}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BadSet {
    mask: Vec<bool>,
    threshold: f64,
}

impl BadSet {
    pub fn from_nu(nu: &CyclicFn, spec: &GowersSpec) -> Result<Self, GowersError> {
        let dnu = dual_function(nu, spec)?;
        Ok(Self::from_dual(&dnu, spec.d()))
    }

    pub fn from_dual(dnu: &CyclicFn, d: usize) -> Self {
        let threshold = dual_bound(d);
        BadSet { mask: dnu.values().iter().map(|&v| v >= threshold).collect(), threshold }
    }

    pub fn n(&self) -> usize {
        self.mask.len()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn contains(&self, x: usize) -> bool {
        self.mask[x]
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Zeroes a function on the set.
    pub fn remove_from(&self, g: &CyclicFn) -> Result<CyclicFn, GowersError> {
        if g.n() != self.n() {
            return Err(GowersError::Modulus(g.n(), self.n()));
        }
        Ok(CyclicFn::from_fn(g.n(), |x| if self.mask[x] { 0.0 } else { g[x] }))
    }
}

/// `2^{2^d}`, the bound on the modified dual.
pub fn dual_bound(d: usize) -> f64 {
    2f64.powi(1 << d)
}

/// `D̃f = (1 − 1_{Ω₀}) Df` and `Ω₀`.
pub fn modified_dual(f: &CyclicFn, nu: &CyclicFn, spec: &GowersSpec) -> Result<(CyclicFn, BadSet), GowersError> {
    if f.n() != nu.n() {
        return Err(GowersError::Modulus(f.n(), nu.n()));
    }
    let bad = BadSet::from_nu(nu, spec)?;
    let df = modified_dual_with(f, &bad, spec)?;
    Ok((df, bad))
}

/// The modified dual against a precomputed bad set.
pub fn modified_dual_with(f: &CyclicFn, bad: &BadSet, spec: &GowersSpec) -> Result<CyclicFn, GowersError> {
    bad.remove_from(&dual_function(f, spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec2(a: i64, b: i64, s: u64) -> GowersSpec {
        GowersSpec::constant_steps(&[a, b], s).unwrap()
    }

    #[test]
    fn point_mass_on_z5() {
        let f = CyclicFn::from_fn(5, |x| if x == 0 { 1.0 } else { 0.0 });
        let v = local_gowers(&f, &[1, 1], 5).unwrap();
        assert!((v - 5f64.powf(-0.75)).abs() < 1e-12);
    }

    #[test]
    fn constants() {
        let f = CyclicFn::constant(12, 0.6);
        assert!((local_gowers(&f, &[1, 3], 4).unwrap() - 0.6).abs() < 1e-13);
        let df = dual_function(&f, &spec2(1, 3, 4)).unwrap();
        assert!(df.values().iter().all(|v| (v - 0.6f64.powi(3)).abs() < 1e-13));
    }

    #[test]
    fn dual_identity_small() {
        let f = CyclicFn::from_fn(17, |x| ((x * x) as f64 * 0.3).cos());
        let spec = spec2(2, 5, 3);
        let est = avg_local_gowers(&f, &spec, EstimatorMode::Exact).unwrap();
        let df = dual_function(&f, &spec).unwrap();
        assert!((f.inner(&df) - est.power).abs() < 1e-12);
    }

    #[test]
    fn degenerate_steps_flagged() {
        let f = CyclicFn::from_fn(6, |x| x as f64);
        let est = avg_local_gowers(&f, &spec2(6, 12, 2), EstimatorMode::Exact).unwrap();
        assert!(est.degenerate);
        let mean4 = f.values().iter().map(|v| v.powi(4)).sum::<f64>() / 6.0;
        assert!((est.power - mean4).abs() < 1e-9);
    }

    #[test]
    fn concat_layout() {
        let h1 = MultiPoly::var(2, 0);
        let a = GowersSpec::new(vec![h1.clone()], 1, 3, 2, 4).unwrap();
        let b = GowersSpec::new(vec![MultiPoly::var(2, 1), h1], 1, 3, 2, 4).unwrap();
        let c = GowersSpec::concat(&[a, b]).unwrap();
        assert_eq!((c.d(), c.t()), (3, 2));
        assert_eq!(c.steps(&[2, 3]).unwrap(), vec![2, 2, 3]);
    }

    #[test]
    fn sampled_close_to_exact() {
        let f = CyclicFn::from_fn(20, |x| 1.0 + ((x * 7) % 5) as f64 * 0.1);
        let spec = spec2(1, 2, 3);
        let exact = avg_local_gowers(&f, &spec, EstimatorMode::Exact).unwrap();
        let s = avg_local_gowers(&f, &spec, EstimatorMode::Sampled { samples: 200_000, seed: 7 }).unwrap();
        assert!((s.power - exact.power).abs() < 5.0 * s.std_error.unwrap());
    }

    #[test]
    fn bad_set_empty_for_unit_nu() {
        let nu = CyclicFn::constant(10, 1.0);
        let f = CyclicFn::from_fn(10, |x| if x % 2 == 0 { 2.0 } else { -1.0 });
        let (df, bad) = modified_dual(&f, &nu, &spec2(1, 1, 3)).unwrap();
        assert!(bad.is_empty());
        assert!(df.max_abs() <= dual_bound(2));
    }
}
