//! The smooth even cutoff χ and the transform φ of `e^x χ(x)`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::SieveError;

/// Ramp width of the default cutoff.
pub const DEFAULT_DELTA: f64 = 1e-7;

const GL_NODES: usize = 128;
const GRID_POINTS: usize = 2001;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChiShape {
    /// Plateau derivative with C∞ ramps of width `delta`: χ′ = −sign(t)·g(|t|)/Z
    /// where g rises 0 → 1 on [0, δ], equals 1 on [δ, 1−δ] and falls back on [1−δ, 1].
    PlateauRamp { delta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// χ(0) = 1; ∫₀¹|χ′|² = 1 + O(δ).
    UnitAtZero,
    /// Rescaled so that ∫₀¹|χ′|² = 1 exactly; χ(0) ≠ 1.
    Energy,
}

impl Default for ChiShape {
    fn default() -> Self {
        ChiShape::PlateauRamp { delta: DEFAULT_DELTA }
    }
}

fn psi(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

fn dpsi(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        psi(u) / (u * u)
    }
}

/// Smooth step, 0 for u ≤ 0 and 1 for u ≥ 1.
fn step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = psi(u);
    a / (a + psi(1.0 - u))
}

fn dstep(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let (a, b) = (psi(u), psi(1.0 - u));
    (dpsi(u) * b + a * dpsi(1.0 - u)) / ((a + b) * (a + b))
}

#[derive(Clone, Debug)]
pub struct CutoffChi {
    shape: ChiShape,
    normalization: Normalization,
    delta: f64,
    /// ∫₀¹ g = 1 − δ
    z: f64,
    scale: f64,
    energy: f64,
    /// Gauss–Legendre rule on [0, 1].
    rule: Vec<(f64, f64)>,
    grid: Vec<f64>,
    dgrid: Vec<f64>,
}

impl CutoffChi {
    pub fn new(shape: ChiShape, normalization: Normalization) -> Result<Self, SieveError> {
        let ChiShape::PlateauRamp { delta } = shape;
        if !(delta > 0.0 && delta < 0.5) {
            return Err(SieveError::BadCutoff(format!("ramp width {delta} must lie in (0, 1/2)")));
        }
        let gl = GaussLegendre::new(NonZeroUsize::new(GL_NODES).expect("non-zero"));
        let rule: Vec<(f64, f64)> = gl.as_node_weight_pairs().iter().map(|&(x, w)| ((x + 1.0) / 2.0, w / 2.0)).collect();
        let z = 1.0 - delta;
        let step_sq: f64 = rule.iter().map(|&(u, w)| w * step(u) * step(u)).sum();
        let raw_energy = (1.0 - 2.0 * delta + 2.0 * delta * step_sq) / (z * z);
        let scale = match normalization {
            Normalization::UnitAtZero => 1.0,
            Normalization::Energy => 1.0 / raw_energy.sqrt(),
        };
        let mut chi = CutoffChi {
            shape,
            normalization,
            delta,
            z,
            scale,
            energy: raw_energy * scale * scale,
            rule,
            grid: Vec::new(),
            dgrid: Vec::new(),
        };
        let h = 2.0 / (GRID_POINTS - 1) as f64;
        chi.grid = (0..GRID_POINTS).map(|i| chi.value(-1.0 + i as f64 * h)).collect();
        chi.dgrid = (0..GRID_POINTS).map(|i| chi.derivative(-1.0 + i as f64 * h)).collect();
        Ok(chi)
    }

    pub fn shape(&self) -> ChiShape {
        self.shape
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Samples of χ on a uniform grid over [−1, 1].
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Samples of χ′ on the same grid.
    pub fn derivative_grid(&self) -> &[f64] {
        &self.dgrid
    }

    /// ∫₀¹ |χ′|².
    pub fn energy(&self) -> f64 {
        self.energy
    }

    fn g(&self, s: f64) -> f64 {
        if s <= 0.0 || s >= 1.0 {
            0.0
        } else if s < self.delta {
            step(s / self.delta)
        } else if s > 1.0 - self.delta {
            step((1.0 - s) / self.delta)
        } else {
            1.0
        }
    }

    fn dg(&self, s: f64) -> f64 {
        if s <= 0.0 || s >= 1.0 {
            0.0
        } else if s < self.delta {
            dstep(s / self.delta) / self.delta
        } else if s > 1.0 - self.delta {
            -dstep((1.0 - s) / self.delta) / self.delta
        } else {
            0.0
        }
    }

    /// ∫₀^v step.
    fn step_integral(&self, v: f64) -> f64 {
        v * self.rule.iter().map(|&(u, w)| w * step(u * v)).sum::<f64>()
    }

    /// ∫₀^s g.
    fn g_integral(&self, s: f64) -> f64 {
        let d = self.delta;
        if s <= 0.0 {
            0.0
        } else if s >= 1.0 {
            self.z
        } else if s < d {
            d * self.step_integral(s / d)
        } else if s > 1.0 - d {
            self.z - d * self.step_integral((1.0 - s) / d)
        } else {
            d / 2.0 + (s - d)
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        let s = t.abs();
        if s >= 1.0 {
            return 0.0;
        }
        self.scale * (self.z - self.g_integral(s)) / self.z
    }

    pub fn derivative(&self, t: f64) -> f64 {
        -t.signum() * self.scale * self.g(t.abs()) / self.z
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        -self.scale * self.dg(t.abs()) / self.z
    }

    /// φ(ξ) with `e^x χ(x) = ∫ φ(ξ) e^{−ixξ} dξ`.
    ///
    /// Two integrations by parts leave `(1/2π z²) ∫ e^{zx} χ″(x) dx`, z = 1 + iξ,
    /// and χ″ lives on the three ramps only.
    pub fn phi(&self, xi: f64) -> Complex64 {
        let z = Complex64::new(1.0, xi);
        let d = self.delta;
        let mut acc = Complex64::new(0.0, 0.0);
        for &(u, w) in &self.rule {
            let k = dstep(u);
            if k == 0.0 {
                continue;
            }
            acc += w * k * ((z * (1.0 - d * u)).cosh() - (z * (d * u)).cosh());
        }
        acc * (2.0 * self.scale / self.z) / (2.0 * PI * z * z)
    }

    /// Direct quadrature of `(1/2π) ∫ e^{(1+iξ)x} χ(x) dx`, for cross-checks.
    pub fn phi_direct(&self, xi: f64, panels: usize) -> Complex64 {
        let z = Complex64::new(1.0, xi);
        let h = 2.0 / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..panels {
            let a = -1.0 + k as f64 * h;
            for &(u, w) in &self.rule[..] {
                let x = a + h * u;
                acc += w * h * (z * x).exp() * self.value(x);
            }
        }
        acc / (2.0 * PI)
    }
}

impl Default for CutoffChi {
    fn default() -> Self {
        Self::new(ChiShape::default(), Normalization::UnitAtZero).expect("default cutoff is valid")
    }
}

/// Truncated evaluation of ∫∫ (1+it)(1+it′)/(2+it+it′) φ(t)φ(t′) dt dt′ over
/// [−T, T]², by self-convolution of `(1+it)φ(t)` on a uniform grid.
pub fn phi_double_integral(chi: &CutoffChi, t_max: f64, dt: f64) -> Complex64 {
    let n = (2.0 * t_max / dt).round() as usize + 1;
    let ts: Vec<f64> = (0..n).map(|i| -t_max + i as f64 * dt).collect();
    let half: Vec<Complex64> = ts[n / 2..].iter().map(|&t| chi.phi(t)).collect();
    // χ real and even: φ(−t) is the conjugate of φ(t)
    let phi_at = |i: usize| {
        if i >= n / 2 {
            half[i - n / 2]
        } else {
            half[n - 1 - i - n / 2].conj()
        }
    };
    let size = (2 * n - 1).next_power_of_two();
    let mut a: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); size];
    for (i, &t) in ts.iter().enumerate() {
        a[i] = Complex64::new(1.0, t) * phi_at(i) * dt;
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut a);
    for v in a.iter_mut() {
        *v = *v * *v;
    }
    planner.plan_fft_inverse(size).process(&mut a);
    let norm = 1.0 / size as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, c) in a.iter().take(2 * n - 1).enumerate() {
        let s = -2.0 * t_max + k as f64 * dt;
        acc += c * norm / Complex64::new(2.0, s);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_integrals() {
        let chi = CutoffChi::default();
        let total: f64 = chi.rule.iter().map(|&(u, w)| w * dstep(u)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((chi.step_integral(1.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn shape_properties() {
        let chi = CutoffChi::default();
        assert_eq!(chi.value(0.0), 1.0);
        assert_eq!(chi.value(1.2), 0.0);
        assert_eq!(chi.value(-1.2), 0.0);
        assert_eq!(chi.value(0.3), chi.value(-0.3));
        assert!((chi.energy() - 1.0).abs() < 1e-6);
        let e = CutoffChi::new(ChiShape::PlateauRamp { delta: 0.2 }, Normalization::Energy).unwrap();
        assert!((e.energy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phi_matches_direct_quadrature() {
        let chi = CutoffChi::new(ChiShape::PlateauRamp { delta: 0.25 }, Normalization::UnitAtZero).unwrap();
        for xi in [0.0, 0.7, -3.0, 12.5] {
            let a = chi.phi(xi);
            let b = chi.phi_direct(xi, 64);
            assert!((a - b).norm() < 1e-10, "xi={xi}: {a} vs {b}");
        }
    }

    #[test]
    fn bad_width() {
        assert!(CutoffChi::new(ChiShape::PlateauRamp { delta: 0.0 }, Normalization::UnitAtZero).is_err());
    }
}
