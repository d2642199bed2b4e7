//! Empirical polynomial-forms and polynomial-correlation averages of ν.

use num_bigint::BigInt;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{exp_fn, PrimeTable, SieveError, SieveParams};
use crate::convexlat::{lattice_points, ConvexBody};
use crate::cyclic::CyclicFn;
use crate::polyalg::{classify_prime, MultiPoly, PrimeTag};

/// Cap on lattice points enumerated from a body.
pub const BODY_BUDGET: u64 = 10_000_000;

pub(crate) fn eval_i64(poly: &MultiPoly, point: &[i64]) -> Result<i64, SieveError> {
    let p: Vec<i128> = point.iter().map(|&v| v as i128).collect();
    poly.eval_i128(&p)
        .and_then(|v| i64::try_from(v).ok())
        .ok_or(SieveError::Overflow)
}

fn body_points(body: &ConvexBody) -> Result<Vec<Vec<i64>>, SieveError> {
    let pts = lattice_points(body, 1, &vec![0; body.dim()], BODY_BUDGET)?;
    if pts.is_empty() {
        return Err(SieveError::EmptyBody);
    }
    Ok(pts)
}

/// Integer window `[lo, hi]` such that every shift stays inside `[1, N]`.
fn truncated_window(n: u64, max_shift: i64, window: Option<(i64, i64)>) -> Result<(i64, i64), SieveError> {
    let n = n as i64;
    let (lo, hi) = window.unwrap_or((max_shift + 1, n - max_shift));
    if lo > hi || lo - max_shift < 1 || hi + max_shift > n {
        return Err(SieveError::Wraparound { lo, hi, max_shift, n: n as u64 });
    }
    Ok((lo, hi))
}

/// Bad and terrible primes of a family in the range `[w, cutoff]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BadPrimeReport {
    pub cutoff: u64,
    pub bad: Vec<u64>,
    pub terrible: Vec<u64>,
    /// Σ_{p bad} 1/p
    pub bad_sum: f64,
    /// EXP(Σ_{p bad} 1/p), the scale of the predicted deviation from 1.
    pub predicted_scale: f64,
}

pub fn bad_primes(polys: &[MultiPoly], w: u64, cutoff: u64, table: &PrimeTable) -> Result<BadPrimeReport, SieveError> {
    let mut bad = Vec::new();
    let mut terrible = Vec::new();
    if !polys.is_empty() {
        for &p in table.primes_in(w, cutoff + 1) {
            match classify_prime(p, polys)?.tag {
                PrimeTag::Good => {}
                PrimeTag::BadNotTerrible => bad.push(p),
                PrimeTag::Terrible => {
                    bad.push(p);
                    terrible.push(p);
                }
            }
        }
    }
    let bad_sum = bad.iter().map(|&p| 1.0 / p as f64).sum();
    Ok(BadPrimeReport { cutoff, bad, terrible, bad_sum, predicted_scale: exp_fn(bad_sum) })
}

/// The forms `W·x + W·Q_j(h) + b` in the variables `(x, h_1, …, h_d)`.
pub fn forms_family(qs: &[MultiPoly], big_w: u64, b: u64) -> Vec<MultiPoly> {
    qs.iter()
        .map(|q| {
            let d = q.nvars();
            let map: Vec<usize> = (1..=d).collect();
            let lifted = q.remap(d + 1, &map);
            let x = MultiPoly::var(d + 1, 0);
            let wv = BigInt::from(big_w);
            &(&x.scale(&wv) + &lifted.scale(&wv)) + &MultiPoly::constant(d + 1, b)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolyformReport {
    pub value: f64,
    pub lattice_points: usize,
    pub window: (i64, i64),
    pub primes: BadPrimeReport,
}

/// `E_{h ∈ Ω∩Z^d} E_{x ∈ X′} Π_j ν(x + Q_j(h))` over the truncated window.
pub fn polyform_average(
    nu: &CyclicFn,
    qs: &[MultiPoly],
    body: &ConvexBody,
    window: Option<(i64, i64)>,
    params: &SieveParams,
    table: &PrimeTable,
    prime_cutoff: u64,
) -> Result<PolyformReport, SieveError> {
    let hs = body_points(body)?;
    if let Some(q) = qs.iter().find(|q| q.nvars() != body.dim()) {
        return Err(SieveError::BadSpec(format!(
            "polynomial in {} variables for a body of dimension {}",
            q.nvars(),
            body.dim()
        )));
    }
    let shifts: Vec<Vec<i64>> =
        hs.iter().map(|h| qs.iter().map(|q| eval_i64(q, h)).collect()).collect::<Result<_, _>>()?;
    let max_shift = shifts.iter().flatten().map(|s| s.abs()).max().unwrap_or(0);
    let (lo, hi) = truncated_window(nu.n() as u64, max_shift, window)?;
    let count = (hi - lo + 1) as f64;
    let mut total = 0.0;
    for s in &shifts {
        let mut inner = 0.0;
        for x in lo..=hi {
            inner += s.iter().map(|&sj| nu.at(x + sj)).product::<f64>();
        }
        total += inner / count;
    }
    let primes = bad_primes(&forms_family(qs, params.big_w, params.b), params.w, prime_cutoff, table)?;
    Ok(PolyformReport { value: total / hs.len() as f64, lattice_points: hs.len(), window: (lo, hi), primes })
}

/// Vector polynomials in the fine variables `h`, and the bodies of the correlation average.
#[derive(Clone, Debug)]
pub struct PolycorSpec {
    /// Number of fine variables h.
    pub h_vars: usize,
    /// `P_j ∈ Z[h]^D`, one per j.
    pub p: Vec<Vec<MultiPoly>>,
    /// `Q_{j,k} ∈ Z[h]^{D′}`, indexed `[k][j]`.
    pub q: Vec<Vec<Vec<MultiPoly>>>,
    /// `S_l ∈ Z[h]^{D′}`.
    pub s: Vec<Vec<MultiPoly>>,
    /// Ω ⊂ R^D for m.
    pub omega: ConvexBody,
    /// Ω′ ⊂ R^{D′} for n.
    pub omega_n: ConvexBody,
    /// Ω″ ⊂ R^{D″} for h.
    pub omega_h: ConvexBody,
}

fn parallel(u: &[MultiPoly], v: &[MultiPoly]) -> bool {
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            if !(&(&u[i] * &v[j]) - &(&u[j] * &v[i])).is_zero() {
                return false;
            }
        }
    }
    true
}

impl PolycorSpec {
    pub fn validate(&self) -> Result<(), SieveError> {
        let d = self.omega.dim();
        let dn = self.omega_n.dim();
        if self.omega_h.dim() != self.h_vars {
            return Err(SieveError::BadSpec("h body dimension differs from the number of h variables".into()));
        }
        let all = self.p.iter().flatten().chain(self.q.iter().flatten().flatten()).chain(self.s.iter().flatten());
        if all.clone().any(|poly| poly.nvars() != self.h_vars) {
            return Err(SieveError::BadSpec("every polynomial must be in the h variables".into()));
        }
        if self.p.iter().any(|v| v.len() != d) {
            return Err(SieveError::BadSpec("P_j must have dimension D".into()));
        }
        for qk in &self.q {
            if qk.len() != self.p.len() || qk.iter().any(|v| v.len() != dn) {
                return Err(SieveError::BadSpec("Q_{j,k} must be J vectors of dimension D' per k".into()));
            }
        }
        if self.s.iter().any(|v| v.len() != dn) {
            return Err(SieveError::BadSpec("S_l must have dimension D'".into()));
        }
        for (k, qk) in self.q.iter().enumerate() {
            for j in 0..self.p.len() {
                for jj in j + 1..self.p.len() {
                    let u: Vec<MultiPoly> = self.p[j].iter().chain(&qk[j]).cloned().collect();
                    let v: Vec<MultiPoly> = self.p[jj].iter().chain(&qk[jj]).cloned().collect();
                    if parallel(&u, &v) {
                        return Err(SieveError::Degenerate(format!(
                            "(P_{}, Q_{},{}) and (P_{}, Q_{},{}) are parallel",
                            j + 1,
                            j + 1,
                            k + 1,
                            jj + 1,
                            jj + 1,
                            k + 1
                        )));
                    }
                }
            }
        }
        for l in 0..self.s.len() {
            for ll in l + 1..self.s.len() {
                if self.s[l] == self.s[ll] {
                    return Err(SieveError::Degenerate(format!("S_{} and S_{} coincide", l + 1, ll + 1)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorMode {
    Exact,
    /// Exact when the term count fits the budget, otherwise sampled.
    Auto { budget: u64, seed: u64 },
    Sampled { samples: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: Option<f64>,
    pub seed: Option<u64>,
    pub evaluations: u64,
}

fn dotv(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs_coord(pts: &[Vec<i64>], dim: usize) -> Vec<i64> {
    (0..dim).map(|i| pts.iter().map(|p| p[i].abs()).max().unwrap_or(0)).collect()
}

struct HData {
    p: Vec<Vec<i64>>,
    q: Vec<Vec<Vec<i64>>>,
    s: Vec<Vec<i64>>,
}

/// The nested correlation average of ν.
pub fn polycor_average(nu: &CyclicFn, spec: &PolycorSpec, mode: EstimatorMode) -> Result<Estimate, SieveError> {
    spec.validate()?;
    let ms = body_points(&spec.omega)?;
    let ns = body_points(&spec.omega_n)?;
    let hs = body_points(&spec.omega_h)?;
    let ev = |v: &Vec<MultiPoly>, h: &[i64]| v.iter().map(|poly| eval_i64(poly, h)).collect::<Result<Vec<_>, _>>();
    let hdata: Vec<HData> = hs
        .iter()
        .map(|h| {
            Ok(HData {
                p: spec.p.iter().map(|v| ev(v, h)).collect::<Result<_, _>>()?,
                q: spec.q.iter().map(|qk| qk.iter().map(|v| ev(v, h)).collect::<Result<_, _>>()).collect::<Result<_, _>>()?,
                s: spec.s.iter().map(|v| ev(v, h)).collect::<Result<_, _>>()?,
            })
        })
        .collect::<Result<_, SieveError>>()?;
    let mmax = max_abs_coord(&ms, spec.omega.dim());
    let nmax = max_abs_coord(&ns, spec.omega_n.dim());
    let bound = |v: &[i64], cap: &[i64]| v.iter().zip(cap).map(|(a, c)| a.abs() * c).sum::<i64>();
    let mut max_shift = 0i64;
    for hd in &hdata {
        for (j, pj) in hd.p.iter().enumerate() {
            for qk in &hd.q {
                max_shift = max_shift.max(bound(pj, &mmax) + bound(&qk[j], &nmax));
            }
        }
        for sl in &hd.s {
            max_shift = max_shift.max(bound(sl, &nmax));
        }
    }
    let (lo, hi) = truncated_window(nu.n() as u64, max_shift, None)?;
    let xs = (hi - lo + 1) as u64;

    let term = |n: &[i64], hd: &HData, x: i64| -> f64 {
        let mut prod = 1.0;
        for qk in &hd.q {
            let mut avg = 0.0;
            for m in &ms {
                let mut inner = 1.0;
                for (j, pj) in hd.p.iter().enumerate() {
                    inner *= nu.at(x + dotv(pj, m) + dotv(&qk[j], n));
                }
                avg += inner;
            }
            prod *= avg / ms.len() as f64;
        }
        for sl in &hd.s {
            prod *= nu.at(x + dotv(sl, n));
        }
        prod
    };

    let per_term = (spec.q.len() as u64 * ms.len() as u64 * spec.p.len() as u64 + spec.s.len() as u64).max(1);
    let outer = ns.len() as u64 * hs.len() as u64 * xs;
    let sampled = match mode {
        EstimatorMode::Exact => None,
        EstimatorMode::Auto { budget, seed } => (outer.saturating_mul(per_term) > budget).then_some((budget / per_term, seed)),
        EstimatorMode::Sampled { samples, seed } => Some((samples, seed)),
    };
    match sampled {
        None => {
            let mut total = 0.0;
            for n in &ns {
                for hd in &hdata {
                    let mut acc = 0.0;
                    for x in lo..=hi {
                        acc += term(n, hd, x);
                    }
                    total += acc / xs as f64;
                }
            }
            Ok(Estimate {
                value: total / (ns.len() * hs.len()) as f64,
                std_error: None,
                seed: None,
                evaluations: outer * per_term,
            })
        }
        Some((samples, seed)) => {
            let samples = samples.max(2);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sum = 0.0;
            let mut sq = 0.0;
            for _ in 0..samples {
                let n = &ns[rng.random_range(0..ns.len())];
                let hd = &hdata[rng.random_range(0..hdata.len())];
                let x = rng.random_range(lo..=hi);
                let v = term(n, hd, x);
                sum += v;
                sq += v * v;
            }
            let k = samples as f64;
            let mean = sum / k;
            let var = ((sq / k - mean * mean) * k / (k - 1.0)).max(0.0);
            Ok(Estimate {
                value: mean,
                std_error: Some((var / k).sqrt()),
                seed: Some(seed),
                evaluations: samples * per_term,
            })
        }
    }
}
