//! Finite factors of Z_N, conditional expectation and the energy-increment
//! decomposition of a function majorized by ν.

use std::collections::HashMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cyclic::{kahan_sum, CyclicFn};
use crate::gowers::{dual_function, modified_dual_with, BadSet, GowersError, GowersSpec};

/// Default energy-increment constant.
pub const DEFAULT_C: f64 = 1.0 / 64.0;

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("modulus mismatch: {0} vs {1}")]
    Modulus(usize, usize),
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error("energy increment failed at iteration {k}: {before} -> {after} (need +{needed}); {} trace records", trace.len())]
    EnergyIncrement { k: usize, before: f64, after: f64, needed: f64, trace: Vec<TraceRecord> },
    #[error("iteration cap {cap} reached")]
    Cap { cap: usize, trace: Vec<TraceRecord> },
    #[error(transparent)]
    Gowers(#[from] GowersError),
}

/// A partition of Z_N into non-empty atoms, labelled by first appearance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    atom_id: Vec<usize>,
    atom_count: usize,
}

impl Factor {
    /// Compacts arbitrary labels.
    pub fn new<T: Eq + std::hash::Hash>(labels: &[T]) -> Self {
        let mut seen: HashMap<&T, usize> = HashMap::new();
        let atom_id = labels
            .iter()
            .map(|l| {
                let next = seen.len();
                *seen.entry(l).or_insert(next)
            })
            .collect();
        Factor { atom_id, atom_count: seen.len() }
    }

    pub fn trivial(n: usize) -> Self {
        Factor { atom_id: vec![0; n], atom_count: usize::from(n > 0) }
    }

    pub fn discrete(n: usize) -> Self {
        Factor { atom_id: (0..n).collect(), atom_count: n }
    }

    pub fn n(&self) -> usize {
        self.atom_id.len()
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn atom_of(&self, x: usize) -> usize {
        self.atom_id[x]
    }

    pub fn atom_ids(&self) -> &[usize] {
        &self.atom_id
    }

    pub fn atom_sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.atom_count];
        for &a in &self.atom_id {
            s[a] += 1;
        }
        s
    }

    /// The common refinement.
    pub fn join(&self, other: &Factor) -> Result<Factor, StructureError> {
        if self.n() != other.n() {
            return Err(StructureError::Modulus(self.n(), other.n()));
        }
        let pairs: Vec<(usize, usize)> = self.atom_id.iter().copied().zip(other.atom_id.iter().copied()).collect();
        Ok(Factor::new(&pairs))
    }

    /// `E(f|Y)`: atom-wise averages.
    pub fn cond_exp(&self, f: &CyclicFn) -> Result<CyclicFn, StructureError> {
        if f.n() != self.n() {
            return Err(StructureError::Modulus(f.n(), self.n()));
        }
        let mut sums = vec![0.0; self.atom_count];
        for (x, &a) in self.atom_id.iter().enumerate() {
            sums[a] += f[x];
        }
        let sizes = self.atom_sizes();
        Ok(CyclicFn::from_fn(self.n(), |x| {
            let a = self.atom_id[x];
            sums[a] / sizes[a] as f64
        }))
    }

    /// `∫ 1_A w` for each atom A.
    pub fn atom_masses(&self, w: &CyclicFn) -> Result<Vec<f64>, StructureError> {
        if w.n() != self.n() {
            return Err(StructureError::Modulus(w.n(), self.n()));
        }
        let mut m = vec![0.0; self.atom_count];
        for (x, &a) in self.atom_id.iter().enumerate() {
            m[a] += w[x];
        }
        let n = self.n() as f64;
        Ok(m.into_iter().map(|v| v / n).collect())
    }

    /// Whether a set is a union of atoms.
    pub fn is_measurable(&self, mask: &[bool]) -> bool {
        let mut val: Vec<Option<bool>> = vec![None; self.atom_count];
        for (x, &a) in self.atom_id.iter().enumerate() {
            match val[a] {
                None => val[a] = Some(mask[x]),
                Some(v) if v != mask[x] => return false,
                _ => {}
            }
        }
        true
    }
}

/// Preimages of `[(n+α)ε, (n+α+1)ε)` with α drawn from the seed.
pub fn factor_from_function(g: &CyclicFn, eps: f64, seed: u64) -> Result<(Factor, f64), StructureError> {
    let alpha = ChaCha8Rng::seed_from_u64(seed).random::<f64>();
    Ok((factor_from_function_with_offset(g, eps, alpha)?, alpha))
}

pub fn factor_from_function_with_offset(g: &CyclicFn, eps: f64, alpha: f64) -> Result<Factor, StructureError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(StructureError::BadInput(format!("bin width {eps} must be positive")));
    }
    let bins: Vec<i64> = g.values().iter().map(|&v| (v / eps - alpha).floor() as i64).collect();
    Ok(Factor::new(&bins))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BadAtoms {
    pub mask: Vec<bool>,
    pub atoms: Vec<usize>,
    /// `∫ 1_mask (ν + 1)`
    pub mass: f64,
    /// `max |E(ν − 1|Y)|` off the mask.
    pub max_deviation: f64,
}

/// Union of atoms whose `(ν+1)`-mass is at most `threshold`.
pub fn refine_bad_set(y: &Factor, nu: &CyclicFn, threshold: f64) -> Result<BadAtoms, StructureError> {
    let nu1 = nu.map(|v| v + 1.0);
    let masses = y.atom_masses(&nu1)?;
    let small: Vec<bool> = masses.iter().map(|&m| m <= threshold).collect();
    let mask: Vec<bool> = y.atom_ids().iter().map(|&a| small[a]).collect();
    let dev = y.cond_exp(&nu.map(|v| v - 1.0))?;
    let max_deviation = mask
        .iter()
        .zip(dev.values())
        .filter(|(b, _)| !**b)
        .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
    let atoms = (0..y.atom_count()).filter(|&a| small[a]).collect();
    let mass = masses.iter().zip(&small).filter(|(_, s)| **s).map(|(m, _)| m).sum();
    Ok(BadAtoms { mask, atoms, mass, max_deviation })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecomposeParams {
    pub eta4: f64,
    pub eta5: f64,
    pub seed: u64,
    /// Energy-increment constant c.
    pub c: f64,
}

impl DecomposeParams {
    pub fn new(eta4: f64, eta5: f64, seed: u64) -> Self {
        DecomposeParams { eta4, eta5, seed, c: DEFAULT_C }
    }

    /// `4/(c η₄²) + 1`.
    pub fn cap(&self) -> usize {
        (4.0 / (self.c * self.eta4 * self.eta4)).floor() as usize + 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub sigma: f64,
    pub energy: f64,
    /// `∫ F_{K+1} D̃F_{K+1}`
    pub correlation: f64,
    pub atoms: usize,
    /// `∫ 1_Ω (ν + 1)` after this iteration.
    pub bad_mass: f64,
    /// `max |E(ν − 1|Y_K)|` off Ω.
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub g_structured: CyclicFn,
    pub g_uniform: CyclicFn,
    pub omega: Vec<bool>,
    pub factor: Factor,
    pub sigma: f64,
    pub iterations: usize,
    pub energy: f64,
    pub cap: usize,
    pub trace: Vec<TraceRecord>,
    /// The global bad set of the dual operator.
    pub dual_bad_set: BadSet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionCheck {
    pub structured_min: f64,
    pub structured_max: f64,
    /// `max (g_s + g_u − g)`; at most 0 when the upper sandwich holds.
    pub sum_excess: f64,
    /// `min (g_s + g_u)`
    pub sum_min: f64,
    /// `∫ g − ∫ g_s`
    pub mass_gap: f64,
    /// `|∫ g_u D̃g_u|`
    pub final_correlation: f64,
    /// `∫ 1_{g_s + g_u ≠ g}`
    pub mismatch_mass: f64,
}

impl Decomposition {
    pub fn check(&self, g: &CyclicFn) -> DecompositionCheck {
        let sum = self.g_structured.zip_with(&self.g_uniform, |a, b| a + b);
        let n = g.n() as f64;
        DecompositionCheck {
            structured_min: self.g_structured.values().iter().cloned().fold(f64::INFINITY, f64::min),
            structured_max: self.g_structured.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            sum_excess: sum.values().iter().zip(g.values()).map(|(s, v)| s - v).fold(f64::NEG_INFINITY, f64::max),
            sum_min: sum.values().iter().cloned().fold(f64::INFINITY, f64::min),
            mass_gap: g.mean() - self.g_structured.mean(),
            final_correlation: self.trace.last().map_or(0.0, |t| t.correlation.abs()),
            mismatch_mass: sum.values().iter().zip(g.values()).filter(|(s, v)| (*s - *v).abs() > 1e-12).count() as f64
                / n,
        }
    }
}

fn energy(g_cond: &CyclicFn, omega: &[bool]) -> f64 {
    kahan_sum(g_cond.values().iter().zip(omega).filter(|(_, o)| !**o).map(|(v, _)| v * v)) / g_cond.n() as f64
}

/// Energy-increment decomposition `g ≥ g_s + g_u` with `g_u` of small dual correlation.
pub fn knvn_decompose(
    g: &CyclicFn,
    nu: &CyclicFn,
    spec: &GowersSpec,
    params: &DecomposeParams,
) -> Result<Decomposition, StructureError> {
    if g.n() != nu.n() {
        return Err(StructureError::Modulus(g.n(), nu.n()));
    }
    if let Some(x) = (0..g.n()).find(|&x| g[x] < 0.0 || g[x] > nu[x]) {
        return Err(StructureError::BadInput(format!("0 <= g <= nu fails at {x}")));
    }
    if !(params.eta4 > 0.0 && params.eta5 > 0.0 && params.c > 0.0) {
        return Err(StructureError::BadInput("eta4, eta5 and c must be positive".into()));
    }
    let n = g.n();
    let dual_bad_set = BadSet::from_dual(&dual_function(nu, spec)?, spec.d());
    let threshold = params.eta5.sqrt();
    let eps = params.eta4 * params.eta4;
    let cap = params.cap();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut factor = Factor::trivial(n);
    let mut omega = vec![false; n];
    let mut sigma = 0.0;
    let mut g_cond = factor.cond_exp(g)?;
    let mut cur_energy = energy(&g_cond, &omega);
    let mut trace = Vec::new();
    let mut k = 0;
    loop {
        let scale = 1.0 / (1.0 + sigma);
        let f_next = CyclicFn::from_fn(n, |x| if omega[x] { 0.0 } else { scale * (g[x] - g_cond[x]) });
        let df = modified_dual_with(&f_next, &dual_bad_set, spec)?;
        let correlation = f_next.inner(&df);
        let bad_mass = kahan_sum((0..n).filter(|&x| omega[x]).map(|x| nu[x] + 1.0)) / n as f64;
        let deviation = {
            let dev = factor.cond_exp(&nu.map(|v| v - 1.0))?;
            (0..n).filter(|&x| !omega[x]).fold(0.0f64, |m, x| m.max(dev[x].abs()))
        };
        trace.push(TraceRecord {
            k,
            sigma,
            energy: cur_energy,
            correlation,
            atoms: factor.atom_count(),
            bad_mass,
            deviation,
        });
        if correlation.abs() <= params.eta4 {
            let g_structured = CyclicFn::from_fn(n, |x| if omega[x] { 0.0 } else { scale * g_cond[x] });
            return Ok(Decomposition {
                g_structured,
                g_uniform: f_next,
                omega,
                factor,
                sigma,
                iterations: k,
                energy: cur_energy,
                cap,
                trace,
                dual_bad_set,
            });
        }
        if k + 1 >= cap {
            return Err(StructureError::Cap { cap, trace });
        }
        let alpha = rng.random::<f64>();
        let new_factor = factor.join(&factor_from_function_with_offset(&df, eps, alpha)?)?;
        let bad = refine_bad_set(&new_factor, nu, threshold)?;
        let mut added = 0.0;
        for x in 0..n {
            if bad.mask[x] && !omega[x] {
                omega[x] = true;
                added += nu[x] + 1.0;
            }
        }
        sigma += added / n as f64;
        factor = new_factor;
        g_cond = factor.cond_exp(g)?;
        let next_energy = energy(&g_cond, &omega);
        let needed = params.c * params.eta4 * params.eta4;
        if next_energy < cur_energy + needed {
            return Err(StructureError::EnergyIncrement { k: k + 1, before: cur_energy, after: next_energy, needed, trace });
        }
        cur_energy = next_energy;
        k += 1;
    }
}

/// `∫ Π_k D̃f_k · (ν − 1)`.
pub fn orthogonality_diagnostic(
    fs: &[CyclicFn],
    nu: &CyclicFn,
    spec: &GowersSpec,
) -> Result<f64, StructureError> {
    let bad = BadSet::from_dual(&dual_function(nu, spec)?, spec.d());
    let mut prod = nu.map(|v| v - 1.0);
    for f in fs {
        if f.n() != nu.n() {
            return Err(StructureError::Modulus(f.n(), nu.n()));
        }
        let df = modified_dual_with(f, &bad, spec)?;
        prod = prod.zip_with(&df, |a, b| a * b);
    }
    Ok(prod.mean())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binning_example() {
        let n = 20;
        let g = CyclicFn::from_fn(n, |x| x as f64 / n as f64);
        let y = factor_from_function_with_offset(&g, 0.25, 0.0).unwrap();
        assert_eq!(y.atom_count(), 4);
        assert_eq!(y.atom_sizes(), vec![5; 4]);
        let c = factor_from_function_with_offset(&CyclicFn::constant(7, 0.3), 0.1, 0.5).unwrap();
        assert_eq!(c.atom_count(), 1);
    }

    #[test]
    fn join_identities() {
        let y = Factor::new(&[0, 0, 1, 1, 2, 2]);
        assert_eq!(y.join(&Factor::trivial(6)).unwrap(), y);
        assert_eq!(y.join(&y).unwrap(), y);
        let z = Factor::new(&[0, 1, 0, 1, 0, 1]);
        assert_eq!(Factor::new(&[0, 0, 0, 1, 1, 1]).join(&z).unwrap().atom_count(), 4);
    }

    #[test]
    fn conditional_expectation_basics() {
        let f = CyclicFn::from_fn(9, |x| (x * x) as f64);
        let t = Factor::trivial(9).cond_exp(&f).unwrap();
        assert!(t.values().iter().all(|v| (v - f.mean()).abs() < 1e-12));
        assert_eq!(Factor::discrete(9).cond_exp(&f).unwrap(), f);
        let y = Factor::new(&[0, 1, 2, 0, 1, 2, 0, 0, 1]);
        let e = y.cond_exp(&f).unwrap();
        assert!((e.mean() - f.mean()).abs() < 1e-12);
        assert_eq!(y.cond_exp(&e).unwrap(), e);
    }

    #[test]
    fn bad_atoms() {
        let nu = CyclicFn::constant(100, 1.0);
        let mut labels = vec![0; 100];
        labels[7] = 1;
        let y = Factor::new(&labels);
        let r = refine_bad_set(&y, &nu, 0.05).unwrap();
        assert_eq!(r.mask.iter().filter(|&&b| b).count(), 1);
        assert!(r.mask[7]);
        assert!((r.mass - 0.02).abs() < 1e-12);
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn zero_function() {
        let nu = CyclicFn::constant(32, 1.0);
        let g = CyclicFn::constant(32, 0.0);
        let spec = GowersSpec::constant_steps(&[1, 2], 3).unwrap();
        let d = knvn_decompose(&g, &nu, &spec, &DecomposeParams::new(0.1, 1e-3, 1)).unwrap();
        assert_eq!(d.iterations, 0);
        assert!(d.g_structured.max_abs() == 0.0 && d.g_uniform.max_abs() == 0.0);
    }
}
