//! Domination, van der Corput and moment diagnostics.

use super::{avg_local_gowers, dual_bound, dual_function, GowersError, GowersSpec};
use crate::cyclic::{kahan_sum, CyclicFn};
use crate::sieve::EstimatorMode;

#[derive(Clone, Debug, PartialEq)]
pub struct DominationReport {
    /// Norm under each component spec.
    pub parts: Vec<f64>,
    /// Norm under the concatenation.
    pub concatenated: f64,
    /// `concatenated − max(parts)`; non-negative when the lemma holds.
    pub slack: f64,
}

/// Compares each component norm with the norm of the concatenated spec.
pub fn domination_check(g: &CyclicFn, specs: &[GowersSpec]) -> Result<DominationReport, GowersError> {
    let joint = GowersSpec::concat(specs)?;
    let parts = specs
        .iter()
        .map(|s| avg_local_gowers(g, s, EstimatorMode::Exact).map(|e| e.norm))
        .collect::<Result<Vec<_>, _>>()?;
    let concatenated = avg_local_gowers(g, &joint, EstimatorMode::Exact)?.norm;
    let slack = concatenated - parts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(DominationReport { parts, concatenated, slack })
}

#[derive(Clone, Debug, PartialEq)]
pub struct VdcReport {
    /// `|E_{m∈[M]} x_m|²`
    pub lhs: f64,
    /// `E_{h,h'∈[H]} E_{m∈[M]} x_{m+h} x_{m+h'}`
    pub rhs: f64,
    /// `E_m x_m − E_h E_m x_{m+h}`
    pub boundary: f64,
    /// `lhs ≤ (√rhs + |boundary|)²`, which holds with constant 1.
    pub holds: bool,
}

/// Both sides of the van der Corput inequality for a sequence on `[1, M+H]`.
pub fn vdc_check(x: &dyn Fn(i64) -> f64, m: u64, h: u64) -> Result<VdcReport, GowersError> {
    if m == 0 || h == 0 {
        return Err(GowersError::BadSpec("M and H must be positive".into()));
    }
    let (m, h) = (m as i64, h as i64);
    let mean = kahan_sum((1..=m).map(x)) / m as f64;
    let inner: Vec<f64> = (1..=m).map(|mm| kahan_sum((1..=h).map(|hh| x(mm + hh))) / h as f64).collect();
    let shifted = kahan_sum(inner.iter().copied()) / m as f64;
    let rhs = kahan_sum(inner.iter().map(|v| v * v)) / m as f64;
    let lhs = mean * mean;
    let boundary = mean - shifted;
    let bound = (rhs.sqrt() + boundary.abs()).powi(2);
    Ok(VdcReport { lhs, rhs, boundary, holds: lhs <= bound * (1.0 + 1e-12) + 1e-15 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub k: u32,
    /// `∫ |Df|^K (ν + 1)`
    pub moment: f64,
    /// `2 (2^{2^d − 1})^K`
    pub bound: f64,
}

impl MomentReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.moment <= self.bound + tol
    }
}

/// The dual-function moment against `ν + 1`.
pub fn moment_bound(f: &CyclicFn, nu: &CyclicFn, spec: &GowersSpec, k: u32) -> Result<MomentReport, GowersError> {
    if f.n() != nu.n() {
        return Err(GowersError::Modulus(f.n(), nu.n()));
    }
    let df = dual_function(f, spec)?;
    let moment = kahan_sum(df.values().iter().zip(nu.values()).map(|(a, v)| a.abs().powi(k as i32) * (v + 1.0)))
        / f.n() as f64;
    let bound = 2.0 * (dual_bound(spec.d()) / 2.0).powi(k as i32);
    Ok(MomentReport { k, moment, bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vdc_on_bounded_sequence() {
        let r = vdc_check(&|m| ((m * m) as f64 * 0.1).sin(), 200, 5).unwrap();
        assert!(r.holds);
        let c = vdc_check(&|_| 1.0, 50, 4).unwrap();
        assert!((c.lhs - 1.0).abs() < 1e-14 && (c.rhs - 1.0).abs() < 1e-14 && c.boundary.abs() < 1e-14);
    }

    #[test]
    fn moment_with_unit_nu() {
        let nu = CyclicFn::constant(16, 1.0);
        let f = CyclicFn::constant(16, 2.0);
        let spec = GowersSpec::constant_steps(&[1, 2], 3).unwrap();
        let r = moment_bound(&f, &nu, &spec, 2).unwrap();
        // Df ≡ 2^3, so the moment is 2·64, the bound itself
        assert!((r.moment - r.bound).abs() < 1e-9);
    }
}
