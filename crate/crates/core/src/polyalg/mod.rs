//! Exact multivariate integer polynomials, reduction mod p, resultants,
//! coprimality over F_p and the good / bad / terrible prime classification.

mod fp;
mod parse;
mod poly;

pub use parse::{parse_family, parse_poly, ParsedFamily};
pub use poly::{Degree, Monomial, MultiPoly};

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use fp::{reduce, Fp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("variable count mismatch: {left} vs {right}")]
    NvarsMismatch { left: usize, right: usize },
    #[error("exponent tuple has length {found}, expected {expected}")]
    ExponentLength { expected: usize, found: usize },
    #[error("modulus {0} is not a prime >= 2")]
    InvalidModulus(u64),
    #[error("degree bound violated: degree {actual} in variable {var} exceeds bound {bound}")]
    DegreeBound { var: usize, actual: u32, bound: u32 },
    #[error("degree bounds must be at least 1")]
    ZeroDegreeBound,
    #[error("variable index {var} out of range for {nvars} variables")]
    VarOutOfRange { var: usize, nvars: usize },
    #[error("polynomial vanishes identically mod {p}")]
    VanishesModP { p: u64 },
    #[error("empty polynomial family")]
    EmptyFamily,
    #[error("division by zero polynomial")]
    DivisionByZero,
    #[error("exact division failed: divisor does not divide dividend")]
    NotDivisible,
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// Deterministic primality test for the moduli used here.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn check_prime(p: u64) -> Result<(), PolyError> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(PolyError::InvalidModulus(p))
    }
}

/// A polynomial with coefficients reduced into `[0, p)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModPoly {
    p: u64,
    body: MultiPoly,
}

impl ModPoly {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn body(&self) -> &MultiPoly {
        &self.body
    }

    pub fn is_zero(&self) -> bool {
        self.body.is_zero()
    }

    /// Non-zero constant mod p.
    pub fn is_nonzero_constant(&self) -> bool {
        !self.body.is_zero() && self.body.is_constant()
    }

    /// Dense evaluation table for fast point counting: returns coefficient/exponent
    /// pairs as machine words.
    pub fn compiled(&self) -> CompiledModPoly {
        CompiledModPoly {
            p: self.p,
            terms: self
                .body
                .terms()
                .map(|(m, c)| (reduce(c, self.p), m.exps().to_vec()))
                .collect(),
        }
    }
}

/// Word-sized evaluator for a `ModPoly`.
#[derive(Clone, Debug)]
pub struct CompiledModPoly {
    p: u64,
    terms: Vec<(u64, Vec<u32>)>,
}

impl CompiledModPoly {
    /// Evaluates at a point whose coordinates are already reduced mod p.
    pub fn eval(&self, x: &[u64]) -> u64 {
        let p = self.p as u128;
        let mut acc: u128 = 0;
        for (c, e) in &self.terms {
            let mut t = *c as u128;
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t = t * (*xi as u128) % p;
                }
            }
            acc += t;
        }
        (acc % p) as u64
    }
}

pub fn reduce_mod_p(poly: &MultiPoly, p: u64) -> Result<ModPoly, PolyError> {
    if p < 2 {
        return Err(PolyError::InvalidModulus(p));
    }
    check_prime(p)?;
    let body = MultiPoly::from_terms(
        poly.nvars(),
        poly.terms().map(|(m, c)| (m.exps().to_vec(), BigInt::from(reduce(c, p)))),
    )?;
    Ok(ModPoly { p, body })
}

/// Sylvester resultant of `a` and `b` in variable `var`, with the matrix size fixed by
/// the degree bounds `da`, `db` rather than the actual degrees.
pub fn resultant(a: &MultiPoly, b: &MultiPoly, var: usize, da: u32, db: u32) -> Result<MultiPoly, PolyError> {
    if a.nvars() != b.nvars() {
        return Err(PolyError::NvarsMismatch { left: a.nvars(), right: b.nvars() });
    }
    let n = a.nvars();
    if var >= n {
        return Err(PolyError::VarOutOfRange { var, nvars: n });
    }
    if da == 0 || db == 0 {
        return Err(PolyError::ZeroDegreeBound);
    }
    for (p, bound) in [(a, da), (b, db)] {
        if let Degree::Finite(d) = p.degree_in(var) {
            if d > bound {
                return Err(PolyError::DegreeBound { var, actual: d, bound });
            }
        }
    }
    let coeff = |p: &MultiPoly, bound: u32| {
        let mut c = p.coeffs_in(var);
        c.resize(bound as usize + 1, MultiPoly::zero(n));
        c
    };
    let ca = coeff(a, da);
    let cb = coeff(b, db);
    let size = (da + db) as usize;
    let mut m = vec![vec![MultiPoly::zero(n); size]; size];
    // rows: x^i * a for i < db, then x^i * b for i < da; columns by power of x
    for i in 0..db as usize {
        for (k, c) in ca.iter().enumerate() {
            m[i][i + k] = c.clone();
        }
    }
    for i in 0..da as usize {
        for (k, c) in cb.iter().enumerate() {
            m[db as usize + i][i + k] = c.clone();
        }
    }
    determinant(m, n)
}

/// Fraction-free (Bareiss) determinant of a square matrix of polynomials.
pub fn determinant(mut m: Vec<Vec<MultiPoly>>, nvars: usize) -> Result<MultiPoly, PolyError> {
    let size = m.len();
    if size == 0 {
        return Ok(MultiPoly::one(nvars));
    }
    let mut sign = BigInt::one();
    let mut prev = MultiPoly::one(nvars);
    for k in 0..size - 1 {
        if m[k][k].is_zero() {
            match (k + 1..size).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return Ok(MultiPoly::zero(nvars)),
            }
        }
        for i in k + 1..size {
            for j in k + 1..size {
                let num = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num.div_exact(&prev)?;
            }
        }
        prev = m[k][k].clone();
    }
    Ok(m[size - 1][size - 1].scale(&sign))
}

fn nonzero_mod(poly: &MultiPoly, p: u64) -> Result<(), PolyError> {
    if reduce_mod_p(poly, p)?.is_zero() {
        Err(PolyError::VanishesModP { p })
    } else {
        Ok(())
    }
}

/// True iff `a mod p` and `b mod p` share no non-constant common factor.
pub fn coprime_mod_p(a: &MultiPoly, b: &MultiPoly, p: u64) -> Result<bool, PolyError> {
    if a.nvars() != b.nvars() {
        return Err(PolyError::NvarsMismatch { left: a.nvars(), right: b.nvars() });
    }
    check_prime(p)?;
    nonzero_mod(a, p)?;
    nonzero_mod(b, p)?;
    Ok(coprime_unchecked(a, b, p))
}

fn coprime_unchecked(a: &MultiPoly, b: &MultiPoly, p: u64) -> bool {
    let f = Fp::new(p);
    let lvl = a.nvars();
    let g = f.gcd(&f.reduce_poly(a), &f.reduce_poly(b), lvl);
    Fp::is_unit(&g)
}

/// Every pair of the family is coprime mod p.
pub fn pairwise_coprime_mod_p(polys: &[MultiPoly], p: u64) -> Result<bool, PolyError> {
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            if !coprime_mod_p(&polys[i], &polys[j], p)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The whole family has no common non-constant factor mod p.
pub fn jointly_coprime_mod_p(polys: &[MultiPoly], p: u64) -> Result<bool, PolyError> {
    let first = polys.first().ok_or(PolyError::EmptyFamily)?;
    check_prime(p)?;
    let f = Fp::new(p);
    let lvl = first.nvars();
    let mut g = Fp::zero(lvl);
    for q in polys {
        if q.nvars() != lvl {
            return Err(PolyError::NvarsMismatch { left: lvl, right: q.nvars() });
        }
        nonzero_mod(q, p)?;
        g = f.gcd(&g, &f.reduce_poly(q), lvl);
        if Fp::is_unit(&g) {
            return Ok(true);
        }
    }
    Ok(Fp::is_unit(&g))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrimeTag {
    Good,
    BadNotTerrible,
    Terrible,
}

impl PrimeTag {
    pub fn is_bad(self) -> bool {
        self != PrimeTag::Good
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeClass {
    pub tag: PrimeTag,
    pub witness: String,
    /// For good primes: the variable index witnessing linearity of each polynomial.
    pub linear_vars: Vec<usize>,
}

/// Splits `poly mod p` as `P1 * x_var + P0` when it is linear in `x_var`.
pub fn linear_split(poly: &MultiPoly, var: usize, p: u64) -> Result<Option<(MultiPoly, MultiPoly)>, PolyError> {
    let r = reduce_mod_p(poly, p)?;
    if r.body().degree_in(var) != Degree::Finite(1) {
        return Ok(None);
    }
    let mut c = r.body().coeffs_in(var);
    let p1 = c.pop().expect("degree one");
    let p0 = c.pop().expect("degree one");
    Ok(Some((p1, p0)))
}

fn linear_witness(poly: &MultiPoly, p: u64) -> Result<Option<usize>, PolyError> {
    for var in 0..poly.nvars() {
        if let Some((p1, p0)) = linear_split(poly, var, p)? {
            let ok = if p0.is_zero() {
                // gcd(P1, 0) = P1
                p1.is_constant()
            } else {
                coprime_unchecked(&p1, &p0, p)
            };
            if ok {
                return Ok(Some(var));
            }
        }
    }
    Ok(None)
}

/// Good / bad / terrible classification of `p` for the family.
pub fn classify_prime(p: u64, polys: &[MultiPoly]) -> Result<PrimeClass, PolyError> {
    if polys.is_empty() {
        return Err(PolyError::EmptyFamily);
    }
    check_prime(p)?;
    let n = polys[0].nvars();
    if let Some(q) = polys.iter().find(|q| q.nvars() != n) {
        return Err(PolyError::NvarsMismatch { left: n, right: q.nvars() });
    }
    for (j, q) in polys.iter().enumerate() {
        if reduce_mod_p(q, p)?.is_zero() {
            return Ok(PrimeClass {
                tag: PrimeTag::Terrible,
                witness: format!("P{} vanishes identically mod {p}", j + 1),
                linear_vars: Vec::new(),
            });
        }
    }
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            if !coprime_unchecked(&polys[i], &polys[j], p) {
                return Ok(PrimeClass {
                    tag: PrimeTag::BadNotTerrible,
                    witness: format!("P{} and P{} share a factor mod {p}", i + 1, j + 1),
                    linear_vars: Vec::new(),
                });
            }
        }
    }
    let mut vars = Vec::with_capacity(polys.len());
    for (j, q) in polys.iter().enumerate() {
        match linear_witness(q, p)? {
            Some(v) => vars.push(v),
            None => {
                return Ok(PrimeClass {
                    tag: PrimeTag::BadNotTerrible,
                    witness: format!("P{} has no variable with coprime linear and constant coefficients mod {p}", j + 1),
                    linear_vars: Vec::new(),
                })
            }
        }
    }
    let desc: Vec<String> = vars.iter().enumerate().map(|(j, v)| format!("P{}:x{}", j + 1, v + 1)).collect();
    Ok(PrimeClass {
        tag: PrimeTag::Good,
        witness: format!("pairwise coprime; linear in {}", desc.join(", ")),
        linear_vars: vars,
    })
}

/// Integer polynomial from small coefficients, handy in tests and examples.
pub fn poly_from_i64(nvars: usize, terms: &[(&[u32], i64)]) -> MultiPoly {
    MultiPoly::from_terms(nvars, terms.iter().map(|(e, c)| (e.to_vec(), BigInt::from(*c))))
        .expect("exponent lengths match")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: usize, i: usize) -> MultiPoly {
        MultiPoly::var(n, i)
    }
    fn c(n: usize, v: i64) -> MultiPoly {
        MultiPoly::constant(n, v)
    }

    #[test]
    fn reduce_examples() {
        let p = &(&(&c(1, 6) * &x(1, 0).pow(2)) + &(&c(1, 10) * &x(1, 0))) + &c(1, 15);
        assert_eq!(reduce_mod_p(&p, 5).unwrap().body(), &x(1, 0).pow(2));
        let q = &(&c(1, 7) * &x(1, 0)) + &c(1, 7);
        assert!(reduce_mod_p(&q, 7).unwrap().is_zero());
        let r = &(&c(1, 5) * &x(1, 0)) - &c(1, 3);
        let want = &(&c(1, 5) * &x(1, 0)) + &c(1, 4);
        assert_eq!(reduce_mod_p(&r, 7).unwrap().body(), &want);
        assert!(matches!(reduce_mod_p(&r, 1), Err(PolyError::InvalidModulus(1))));
    }

    #[test]
    fn resultant_linear_symbolic() {
        // variables a, b, c, d, x
        let n = 5;
        let pa = &x(n, 0) + &(&x(n, 1) * &x(n, 4));
        let pb = &x(n, 2) + &(&x(n, 3) * &x(n, 4));
        let r = resultant(&pa, &pb, 4, 1, 1).unwrap();
        let want = &(&x(n, 0) * &x(n, 3)) - &(&x(n, 1) * &x(n, 2));
        assert_eq!(r, want);
    }

    #[test]
    fn resultant_shared_root() {
        let a = &x(1, 0).pow(2) - &c(1, 1);
        let b = &x(1, 0) - &c(1, 1);
        assert!(resultant(&a, &b, 0, 2, 1).unwrap().is_zero());
        assert!(matches!(resultant(&a, &b, 0, 1, 1), Err(PolyError::DegreeBound { .. })));
    }

    #[test]
    fn resultant_bivariate_coefficients() {
        // a(x1) + b(x1) x2 and c(x1) + d(x1) x2
        let n = 2;
        let a = &x(n, 0) + &c(n, 1);
        let b = x(n, 0).pow(2);
        let cc = &c(n, 3) - &x(n, 0);
        let d = &x(n, 0) + &c(n, 2);
        let p = &a + &(&b * &x(n, 1));
        let q = &cc + &(&d * &x(n, 1));
        let r = resultant(&p, &q, 1, 1, 1).unwrap();
        assert_eq!(r, &(&a * &d) - &(&b * &cc));
    }

    #[test]
    fn coprime_examples() {
        let x1 = x(2, 0);
        let x1p7 = &x1 + &c(2, 7);
        assert!(!coprime_mod_p(&x1, &x1p7, 7).unwrap());
        assert!(coprime_mod_p(&x(2, 0), &x(2, 1), 5).unwrap());
        let q = &(&x(2, 0) * &x(2, 1)) + &c(2, 1);
        assert!(coprime_mod_p(&q, &x(2, 0), 5).unwrap());
        assert!(matches!(
            coprime_mod_p(&c(2, 5), &x1, 5),
            Err(PolyError::VanishesModP { p: 5 })
        ));
    }

    #[test]
    fn coprime_detects_hidden_factor() {
        // (x1 + x2)(x1 - 1) and (x1 + x2)(x2 + 3)
        let s = &x(2, 0) + &x(2, 1);
        let a = &s * &(&x(2, 0) - &c(2, 1));
        let b = &s * &(&x(2, 1) + &c(2, 3));
        assert!(!coprime_mod_p(&a, &b, 11).unwrap());
        let a2 = &x(2, 0) - &c(2, 1);
        let b2 = &x(2, 1) + &c(2, 3);
        assert!(coprime_mod_p(&a2, &b2, 11).unwrap());
    }

    #[test]
    fn classify_examples() {
        let x1 = x(1, 0);
        let fam = [x1.clone(), &x1 + &c(1, 7)];
        assert_eq!(classify_prime(7, &fam).unwrap().tag, PrimeTag::BadNotTerrible);
        let t = [&(&c(1, 7) * &x1) + &c(1, 7)];
        assert_eq!(classify_prime(7, &t).unwrap().tag, PrimeTag::Terrible);
        let g = [&x(2, 0) + &c(2, 1), &x(2, 1) + &c(2, 3)];
        let cls = classify_prime(5, &g).unwrap();
        assert_eq!(cls.tag, PrimeTag::Good);
        assert_eq!(cls.linear_vars, vec![0, 1]);
        assert!(matches!(classify_prime(5, &[]), Err(PolyError::EmptyFamily)));
    }

    #[test]
    fn joint_vs_pairwise() {
        // x1*x2, x2*x3, x1*x3: jointly coprime but not pairwise
        let n = 3;
        let fam = [&x(n, 0) * &x(n, 1), &x(n, 1) * &x(n, 2), &x(n, 0) * &x(n, 2)];
        assert!(jointly_coprime_mod_p(&fam, 5).unwrap());
        assert!(!pairwise_coprime_mod_p(&fam, 5).unwrap());
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(1_000_000_007 * 3));
    }
}
