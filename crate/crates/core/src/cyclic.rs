//! Real-valued functions on the cyclic group Z_N.

use std::ops::Index;

/// A function `Z_N -> R`, stored by residue `0..N`.
///
/// Integers `x` are identified with residues by `x mod N`, so `[N] = {1..N}`
/// places `N` at index 0.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicFn {
    values: Vec<f64>,
}

impl CyclicFn {
    /// Panics on an empty or non-finite input.
    pub fn new(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "cyclic function needs N >= 1");
        assert!(values.iter().all(|v| v.is_finite()), "non-finite value");
        CyclicFn { values }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::new(vec![c; n])
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> f64) -> Self {
        Self::new((0..n).map(f).collect())
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at an arbitrary integer, reduced mod N.
    pub fn at(&self, x: i64) -> f64 {
        self.values[x.rem_euclid(self.values.len() as i64) as usize]
    }

    /// Mean with compensated summation.
    pub fn mean(&self) -> f64 {
        kahan_sum(self.values.iter().copied()) / self.values.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.n(), other.n(), "modulus mismatch");
        Self::new(self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    /// `∫ f g` over the uniform measure.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.n(), other.n(), "modulus mismatch");
        kahan_sum(self.values.iter().zip(&other.values).map(|(a, b)| a * b)) / self.n() as f64
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    /// `T^n f(x) = f(x - n)`.
    pub fn shift(&self, n: i64) -> Self {
        let len = self.n() as i64;
        Self::from_fn(self.n(), |x| self.values[(x as i64 - n).rem_euclid(len) as usize])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<usize> for CyclicFn {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

pub fn kahan_sum(it: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in it {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_convention() {
        let f = CyclicFn::new(vec![1.0, 2.0, 3.0, 4.0]);
        let g = f.shift(1);
        assert_eq!(g.values(), &[4.0, 1.0, 2.0, 3.0]);
        assert_eq!(f.at(-1), 4.0);
        assert_eq!(f.at(4), 1.0);
    }

    #[test]
    fn mean_and_inner() {
        let f = CyclicFn::new(vec![1.0, 3.0]);
        assert_eq!(f.mean(), 2.0);
        assert_eq!(f.inner(&f), 5.0);
    }
}
