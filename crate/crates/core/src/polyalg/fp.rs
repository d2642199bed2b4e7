//! Dense recursive polynomials over F_p, used for gcd and coprimality.
//!
//! A level-`k` value is a polynomial in `x_{k-1}` whose coefficients are
//! level-`k-1` values; level 0 is a scalar. The outermost variable is the
//! highest-indexed one.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::MultiPoly;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Rp {
    C(u64),
    P(Vec<Rp>),
}

pub(crate) struct Fp {
    p: u64,
}

impl Fp {
    pub fn new(p: u64) -> Self {
        Fp { p }
    }

    fn mulmod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    fn inv(&self, a: u64) -> u64 {
        // Fermat; p is prime
        let mut r = 1u64;
        let mut b = a % self.p;
        let mut e = self.p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mulmod(r, b);
            }
            b = self.mulmod(b, b);
            e >>= 1;
        }
        r
    }

    pub fn zero(lvl: usize) -> Rp {
        if lvl == 0 {
            Rp::C(0)
        } else {
            Rp::P(Vec::new())
        }
    }

    fn constant(c: u64, lvl: usize) -> Rp {
        if lvl == 0 {
            Rp::C(c)
        } else if c == 0 {
            Rp::P(Vec::new())
        } else {
            Rp::P(vec![Self::constant(c, lvl - 1)])
        }
    }

    fn lift(c: Rp) -> Rp {
        if Self::is_zero(&c) {
            Rp::P(Vec::new())
        } else {
            Rp::P(vec![c])
        }
    }

    pub fn is_zero(a: &Rp) -> bool {
        match a {
            Rp::C(c) => *c == 0,
            Rp::P(v) => v.is_empty(),
        }
    }

    fn coeffs(a: &Rp) -> &[Rp] {
        match a {
            Rp::P(v) => v,
            Rp::C(_) => panic!("scalar has no coefficients"),
        }
    }

    fn trim(mut v: Vec<Rp>) -> Rp {
        while v.last().is_some_and(Self::is_zero) {
            v.pop();
        }
        Rp::P(v)
    }

    fn deg(a: &Rp) -> Option<usize> {
        Self::coeffs(a).len().checked_sub(1)
    }

    /// Non-zero constant at any level.
    pub fn is_unit(a: &Rp) -> bool {
        match a {
            Rp::C(c) => *c != 0,
            Rp::P(v) => v.len() == 1 && Self::is_unit(&v[0]),
        }
    }

    fn add(&self, a: &Rp, b: &Rp) -> Rp {
        match (a, b) {
            (Rp::C(x), Rp::C(y)) => Rp::C((x + y) % self.p),
            (Rp::P(x), Rp::P(y)) => {
                let n = x.len().max(y.len());
                let mut v = Vec::with_capacity(n);
                for i in 0..n {
                    match (x.get(i), y.get(i)) {
                        (Some(s), Some(t)) => v.push(self.add(s, t)),
                        (Some(s), None) => v.push(s.clone()),
                        (None, Some(t)) => v.push(t.clone()),
                        (None, None) => unreachable!(),
                    }
                }
                Self::trim(v)
            }
            _ => panic!("level mismatch"),
        }
    }

    fn neg(&self, a: &Rp) -> Rp {
        match a {
            Rp::C(x) => Rp::C((self.p - x) % self.p),
            Rp::P(v) => Rp::P(v.iter().map(|c| self.neg(c)).collect()),
        }
    }

    fn sub(&self, a: &Rp, b: &Rp) -> Rp {
        self.add(a, &self.neg(b))
    }

    fn mul(&self, a: &Rp, b: &Rp) -> Rp {
        match (a, b) {
            (Rp::C(x), Rp::C(y)) => Rp::C(self.mulmod(*x, *y)),
            (Rp::P(x), Rp::P(y)) => {
                if x.is_empty() || y.is_empty() {
                    return Rp::P(Vec::new());
                }
                let lvl_zero = match &x[0] {
                    Rp::C(_) => Rp::C(0),
                    Rp::P(_) => Rp::P(Vec::new()),
                };
                let mut v = vec![lvl_zero; x.len() + y.len() - 1];
                for (i, s) in x.iter().enumerate() {
                    if Self::is_zero(s) {
                        continue;
                    }
                    for (j, t) in y.iter().enumerate() {
                        let prod = self.mul(s, t);
                        v[i + j] = self.add(&v[i + j], &prod);
                    }
                }
                Self::trim(v)
            }
            _ => panic!("level mismatch"),
        }
    }

    /// Multiplies a level-`k` polynomial by a level-`k-1` coefficient.
    fn scale(&self, c: &Rp, a: &Rp) -> Rp {
        Self::trim(Self::coeffs(a).iter().map(|t| self.mul(c, t)).collect())
    }

    fn shift(a: &Rp, s: usize, zero: Rp) -> Rp {
        let mut v = vec![zero; s];
        v.extend(Self::coeffs(a).iter().cloned());
        Rp::P(v)
    }

    fn coeff_zero(lvl: usize) -> Rp {
        Self::zero(lvl - 1)
    }

    /// Exact quotient `a / b`, or `None` when `b` does not divide `a`.
    pub fn div_exact(&self, a: &Rp, b: &Rp, lvl: usize) -> Option<Rp> {
        if Self::is_zero(b) {
            return None;
        }
        if lvl == 0 {
            let (Rp::C(x), Rp::C(y)) = (a, b) else { panic!("level mismatch") };
            return Some(Rp::C(self.mulmod(*x, self.inv(*y))));
        }
        let db = Self::deg(b)?;
        let lb = Self::coeffs(b)[db].clone();
        let mut r = a.clone();
        let mut q = Vec::new();
        while let Some(dr) = Self::deg(&r) {
            if dr < db {
                return None;
            }
            let c = self.div_exact(&Self::coeffs(&r)[dr], &lb, lvl - 1)?;
            let s = dr - db;
            if q.len() <= s {
                q.resize(s + 1, Self::coeff_zero(lvl));
            }
            q[s] = c.clone();
            let t = Self::shift(&self.scale(&c, b), s, Self::coeff_zero(lvl));
            r = self.sub(&r, &t);
        }
        Some(Self::trim(q))
    }

    fn prem(&self, a: &Rp, b: &Rp, lvl: usize) -> Rp {
        let db = Self::deg(b).expect("non-zero divisor");
        let lb = Self::coeffs(b)[db].clone();
        let mut r = a.clone();
        while let Some(dr) = Self::deg(&r) {
            if dr < db {
                break;
            }
            let lr = Self::coeffs(&r)[dr].clone();
            let t = Self::shift(&self.scale(&lr, b), dr - db, Self::coeff_zero(lvl));
            r = self.sub(&self.scale(&lb, &r), &t);
        }
        r
    }

    fn content(&self, a: &Rp, lvl: usize) -> Rp {
        let mut g = Self::zero(lvl - 1);
        for c in Self::coeffs(a) {
            g = self.gcd(&g, c, lvl - 1);
            if Self::is_unit(&g) {
                break;
            }
        }
        g
    }

    fn primitive(&self, a: &Rp, lvl: usize) -> (Rp, Rp) {
        let c = self.content(a, lvl);
        let pp = Self::trim(
            Self::coeffs(a)
                .iter()
                .map(|t| self.div_exact(t, &c, lvl - 1).expect("content divides"))
                .collect(),
        );
        (c, pp)
    }

    /// A greatest common divisor (defined up to a unit).
    pub fn gcd(&self, a: &Rp, b: &Rp, lvl: usize) -> Rp {
        if lvl == 0 {
            return if Self::is_zero(a) && Self::is_zero(b) { Rp::C(0) } else { Rp::C(1) };
        }
        if Self::is_zero(a) {
            return b.clone();
        }
        if Self::is_zero(b) {
            return a.clone();
        }
        let (ca, pa) = self.primitive(a, lvl);
        let (cb, pb) = self.primitive(b, lvl);
        let c = self.gcd(&ca, &cb, lvl - 1);
        let (mut x, mut y) = if Self::deg(&pa) >= Self::deg(&pb) { (pa, pb) } else { (pb, pa) };
        let g = loop {
            if Self::deg(&y) == Some(0) {
                break Self::constant(1, lvl);
            }
            let r = self.prem(&x, &y, lvl);
            if Self::is_zero(&r) {
                break y;
            }
            let (_, pr) = self.primitive(&r, lvl);
            x = y;
            y = pr;
        };
        self.mul(&Self::lift(c), &g)
    }

    /// Converts a polynomial in `nvars` variables (coefficients reduced mod p).
    pub fn reduce_poly(&self, p: &MultiPoly) -> Rp {
        let n = p.nvars();
        let terms: Vec<(Vec<u32>, u64)> = p
            .terms()
            .filter_map(|(m, c)| {
                let r = reduce(c, self.p);
                (r != 0).then(|| (m.exps().to_vec(), r))
            })
            .collect();
        Self::build(&terms, n)
    }

    fn build(terms: &[(Vec<u32>, u64)], lvl: usize) -> Rp {
        if lvl == 0 {
            return Rp::C(terms.iter().map(|t| t.1).next().unwrap_or(0));
        }
        let v = lvl - 1;
        let deg = terms.iter().map(|t| t.0[v]).max();
        let Some(deg) = deg else { return Rp::P(Vec::new()) };
        let mut out = Vec::with_capacity(deg as usize + 1);
        for k in 0..=deg {
            let sub: Vec<(Vec<u32>, u64)> = terms.iter().filter(|t| t.0[v] == k).cloned().collect();
            out.push(Self::build(&sub, lvl - 1));
        }
        Self::trim(out)
    }
}

pub(crate) fn reduce(c: &BigInt, p: u64) -> u64 {
    let m = BigInt::from(p);
    let r = ((c % &m) + &m) % &m;
    r.to_u64().expect("residue fits in u64")
}
