use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::PolyError;

/// Exponent tuple, ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Degree of a polynomial; the zero polynomial has degree `NegInfinity`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    NegInfinity,
    Finite(u32),
}

impl Degree {
    pub fn finite(self) -> Option<u32> {
        match self {
            Degree::NegInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInfinity => write!(f, "-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// Sparse multivariate polynomial with integer coefficients.
///
/// Terms are kept in graded-lex order with no zero coefficients, so structural
/// equality is polynomial equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigInt::one())
    }

    pub fn constant(nvars: usize, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c.into());
        p
    }

    /// The variable `x_i` (0-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index {i} out of range for {nvars} variables");
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(Monomial(e), BigInt::one());
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs; like terms are merged.
    pub fn from_terms<I, C>(nvars: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Vec<u32>, C)>,
        C: Into<BigInt>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(PolyError::ExponentLength { expected: nvars, found: e.len() });
            }
            p.add_term(Monomial(e), c.into());
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn constant_term(&self) -> BigInt {
        self.terms.get(&Monomial::one(self.nvars)).cloned().unwrap_or_default()
    }

    /// Leading term in graded-lex order.
    pub fn leading(&self) -> Option<(&Monomial, &BigInt)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> Degree {
        self.terms
            .keys()
            .map(Monomial::degree)
            .max()
            .map_or(Degree::NegInfinity, Degree::Finite)
    }

    pub fn degree_in(&self, i: usize) -> Degree {
        self.terms
            .keys()
            .map(|m| m.0[i])
            .max()
            .map_or(Degree::NegInfinity, Degree::Finite)
    }

    /// Variables that occur with positive exponent.
    pub fn occurring_vars(&self) -> Vec<usize> {
        (0..self.nvars)
            .filter(|&i| self.terms.keys().any(|m| m.0[i] > 0))
            .collect()
    }

    fn check_same(&self, other: &Self) -> Result<(), PolyError> {
        if self.nvars != other.nvars {
            Err(PolyError::NvarsMismatch { left: self.nvars, right: other.nvars })
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_same(other)?;
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), c.clone());
        }
        Ok(r)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_same(other)?;
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), -c);
        }
        Ok(r)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_same(other)?;
        let mut r = Self::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                r.add_term(m1.mul(m2), c1 * c2);
            }
        }
        Ok(r)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        let mut r = Self::zero(self.nvars);
        if c.is_zero() {
            return r;
        }
        for (m, a) in &self.terms {
            r.terms.insert(m.clone(), a * c);
        }
        r
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Full composition: variable `i` is replaced by `images[i]`. All images share
    /// one variable count, which becomes the result's.
    pub fn substitute(&self, images: &[MultiPoly]) -> Result<Self, PolyError> {
        if images.len() != self.nvars {
            return Err(PolyError::NvarsMismatch { left: self.nvars, right: images.len() });
        }
        let target = match images.first() {
            Some(p) => p.nvars,
            None => return Ok(self.clone()),
        };
        if let Some(bad) = images.iter().find(|p| p.nvars != target) {
            return Err(PolyError::NvarsMismatch { left: target, right: bad.nvars });
        }
        // cache powers per variable
        let mut powers: Vec<Vec<MultiPoly>> = images.iter().map(|p| vec![Self::one(target), p.clone()]).collect();
        let mut r = Self::zero(target);
        for (m, c) in &self.terms {
            let mut t = Self::constant(target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = &powers[i][powers[i].len() - 1] * &images[i];
                    powers[i].push(next);
                }
                t = &t * &powers[i][e as usize];
            }
            for (tm, tc) in t.terms {
                r.add_term(tm, tc);
            }
        }
        Ok(r)
    }

    /// Renames variables: old variable `i` becomes new variable `map[i]`.
    pub fn remap(&self, new_nvars: usize, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.nvars, "remap table length");
        let mut r = Self::zero(new_nvars);
        for (m, c) in &self.terms {
            let mut e = vec![0; new_nvars];
            for (i, &k) in m.0.iter().enumerate() {
                if k > 0 {
                    e[map[i]] += k;
                }
            }
            r.add_term(Monomial(e), c.clone());
        }
        r
    }

    /// Coefficients with respect to variable `i`: `self = sum_k out[k] * x_i^k`.
    /// The returned polynomials keep all variables (with `x_i` absent).
    pub fn coeffs_in(&self, i: usize) -> Vec<MultiPoly> {
        let deg = match self.degree_in(i) {
            Degree::NegInfinity => return Vec::new(),
            Degree::Finite(d) => d as usize,
        };
        let mut out = vec![Self::zero(self.nvars); deg + 1];
        for (m, c) in &self.terms {
            let k = m.0[i] as usize;
            let mut e = m.0.clone();
            e[i] = 0;
            out[k].add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Exact division by `d`; errors when `d` does not divide `self`.
    pub fn div_exact(&self, d: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.check_same(d)?;
        let (lm, lc) = d.leading().ok_or(PolyError::DivisionByZero)?;
        let mut q = Self::zero(self.nvars);
        let mut r = self.clone();
        while let Some((rm, rc)) = r.leading() {
            if !lm.divides(rm) {
                return Err(PolyError::NotDivisible);
            }
            let (qc, rem) = rc.div_rem(lc);
            if !rem.is_zero() {
                return Err(PolyError::NotDivisible);
            }
            let qm = rm.div(lm);
            let mut t = Self::zero(self.nvars);
            t.add_term(qm, qc);
            r = &r - &(&t * d);
            q = &q + &t;
        }
        Ok(q)
    }

    /// Divides every coefficient by the integer `c`, which must divide all of them.
    pub fn div_scalar_exact(&self, c: &BigInt) -> Result<MultiPoly, PolyError> {
        if c.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        let mut r = Self::zero(self.nvars);
        for (m, a) in &self.terms {
            let (q, rem) = a.div_rem(c);
            if !rem.is_zero() {
                return Err(PolyError::NotDivisible);
            }
            r.terms.insert(m.clone(), q);
        }
        Ok(r)
    }

    pub fn eval(&self, point: &[BigInt]) -> BigInt {
        assert_eq!(point.len(), self.nvars, "evaluation point length");
        let mut acc = BigInt::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Evaluation in i128 with overflow detection.
    pub fn eval_i128(&self, point: &[i128]) -> Option<i128> {
        assert_eq!(point.len(), self.nvars, "evaluation point length");
        let mut acc: i128 = 0;
        for (m, c) in &self.terms {
            let mut t = c.to_i128()?;
            for (&x, &e) in point.iter().zip(&m.0) {
                for _ in 0..e {
                    t = t.checked_mul(x)?;
                }
            }
            acc = acc.checked_add(t)?;
        }
        Some(acc)
    }

    /// Largest absolute coefficient (zero for the zero polynomial).
    pub fn max_abs_coeff(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_default()
    }

    /// Content: gcd of the integer coefficients (zero for the zero polynomial).
    pub fn content(&self) -> BigInt {
        self.terms.values().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn display_with(&self, names: &[&str]) -> String {
        assert_eq!(names.len(), self.nvars, "one name per variable");
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if idx == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mono: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { names[i].to_string() } else { format!("{}^{}", names[i], e) })
                .collect();
            if mono.is_empty() {
                s.push_str(&a.to_string());
            } else {
                if !a.is_one() {
                    s.push_str(&a.to_string());
                    s.push('*');
                }
                s.push_str(&mono.join("*"));
            }
        }
        s
    }

    pub fn default_names(nvars: usize) -> Vec<String> {
        (1..=nvars).map(|i| format!("x{i}")).collect()
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = Self::default_names(self.nvars);
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        f.write_str(&self.display_with(&refs))
    }
}

// Operator forms panic on a variable-count mismatch; the `checked_*` methods report it.
impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.checked_add(rhs).expect("polynomial addition")
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.checked_sub(rhs).expect("polynomial subtraction")
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.checked_mul(rhs).expect("polynomial multiplication")
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&BigInt::from(-1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: usize, i: usize) -> MultiPoly {
        MultiPoly::var(n, i)
    }

    #[test]
    fn cancellation_gives_empty_terms() {
        let p = x(1, 0).pow(2);
        let z = &p - &p;
        assert!(z.is_zero());
        assert_eq!(z.num_terms(), 0);
        assert_eq!(z.total_degree(), Degree::NegInfinity);
    }

    #[test]
    fn difference_of_squares() {
        let one = MultiPoly::one(1);
        let a = &x(1, 0) + &one;
        let b = &x(1, 0) - &one;
        let want = &x(1, 0).pow(2) - &one;
        assert_eq!(&a * &b, want);
    }

    #[test]
    fn substitute_shift() {
        // m^2 with m -> m + h, variables (m, h)
        let m2 = MultiPoly::var(1, 0).pow(2);
        let img = &x(2, 0) + &x(2, 1);
        let got = m2.substitute(&[img]).unwrap();
        let two = MultiPoly::constant(2, 2);
        let want = &(&x(2, 0).pow(2) + &(&two * &(&x(2, 0) * &x(2, 1)))) + &x(2, 1).pow(2);
        assert_eq!(got, want);
    }

    #[test]
    fn degrees() {
        let p = &(&x(2, 0).pow(2) * &x(2, 1)) + &x(2, 1);
        assert_eq!(p.total_degree(), Degree::Finite(3));
        let q = &(&x(2, 0) * &x(2, 1).pow(2)) + &x(2, 0);
        assert_eq!(q.degree_in(0), Degree::Finite(1));
    }

    #[test]
    fn mismatch_is_error() {
        assert!(matches!(
            x(1, 0).checked_add(&x(2, 0)),
            Err(PolyError::NvarsMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn exact_division_roundtrip() {
        let a = &(&x(2, 0) + &x(2, 1)) + &MultiPoly::one(2);
        let b = &x(2, 0) - &MultiPoly::constant(2, 3);
        let prod = &a * &b;
        assert_eq!(prod.div_exact(&b).unwrap(), a);
        assert!(matches!(a.div_exact(&b), Err(PolyError::NotDivisible)));
    }

    #[test]
    fn display_is_readable() {
        let p = &(&x(1, 0).pow(2) - &x(1, 0)) + &MultiPoly::constant(1, -7);
        assert_eq!(p.display_with(&["m"]), "m^2 - m - 7");
    }
}
