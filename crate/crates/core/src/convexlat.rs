//! Convex bodies, inradius, lattice points in residue classes, and the
//! averaging / covering estimates for periodic functions.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Default enumeration cap for lattice points.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

/// Default inradius guard: averaging requires `r >= cd_guard * m`.
pub const DEFAULT_CD_GUARD: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvexError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("box axis {axis} is empty: lower {lower} >= upper {upper}")]
    EmptyAxis { axis: usize, lower: f64, upper: f64 },
    #[error("body has empty interior")]
    Infeasible,
    #[error("non-finite bound")]
    NonFinite,
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("enumeration of {points} points exceeds budget {budget}")]
    Budget { points: f64, budget: u64 },
    #[error("inradius {inradius} is below the guard {guard}; use the covering estimate instead")]
    InradiusTooSmall { inradius: f64, guard: f64 },
    #[error("body contains no lattice points")]
    NoLatticePoints,
}

/// An open bounded convex body.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexBody {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `{x : normals[i]·x < offsets[i]}` intersected with the open bounding box.
    Halfspaces { normals: Vec<Vec<f64>>, offsets: Vec<f64>, lower: Vec<f64>, upper: Vec<f64> },
}

fn check_box(lower: &[f64], upper: &[f64]) -> Result<(), ConvexError> {
    if lower.len() != upper.len() {
        return Err(ConvexError::Dimension { expected: lower.len(), found: upper.len() });
    }
    for (axis, (&l, &u)) in lower.iter().zip(upper).enumerate() {
        if !l.is_finite() || !u.is_finite() {
            return Err(ConvexError::NonFinite);
        }
        if l >= u {
            return Err(ConvexError::EmptyAxis { axis, lower: l, upper: u });
        }
    }
    Ok(())
}

impl ConvexBody {
    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, ConvexError> {
        check_box(&lower, &upper)?;
        Ok(ConvexBody::Box { lower, upper })
    }

    /// The cube `(lo, hi)^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self, ConvexError> {
        Self::new_box(vec![lo; dim], vec![hi; dim])
    }

    pub fn new_halfspaces(
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self, ConvexError> {
        check_box(&lower, &upper)?;
        if normals.len() != offsets.len() {
            return Err(ConvexError::Dimension { expected: normals.len(), found: offsets.len() });
        }
        let d = lower.len();
        if let Some(a) = normals.iter().find(|a| a.len() != d) {
            return Err(ConvexError::Dimension { expected: d, found: a.len() });
        }
        let body = ConvexBody::Halfspaces { normals, offsets, lower, upper };
        body.inradius()?;
        Ok(body)
    }

    pub fn dim(&self) -> usize {
        self.bounds().0.len()
    }

    /// Bounding box (the box itself for `Box`).
    pub fn bounds(&self) -> (&[f64], &[f64]) {
        match self {
            ConvexBody::Box { lower, upper } | ConvexBody::Halfspaces { lower, upper, .. } => (lower, upper),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let (lo, hi) = self.bounds();
        let in_box = x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, u))| l < v && v < u);
        match self {
            ConvexBody::Box { .. } => in_box,
            ConvexBody::Halfspaces { normals, offsets, .. } => {
                in_box && normals.iter().zip(offsets).all(|(a, b)| dot(a, x) < *b)
            }
        }
    }

    /// Lebesgue measure, available in closed form for boxes only.
    pub fn volume(&self) -> Option<f64> {
        match self {
            ConvexBody::Box { lower, upper } => Some(lower.iter().zip(upper).map(|(l, u)| u - l).product()),
            ConvexBody::Halfspaces { .. } => None,
        }
    }

    pub fn translate(&self, v: &[f64]) -> Self {
        let shift = |x: &[f64]| x.iter().zip(v).map(|(a, b)| a + b).collect::<Vec<_>>();
        match self {
            ConvexBody::Box { lower, upper } => ConvexBody::Box { lower: shift(lower), upper: shift(upper) },
            ConvexBody::Halfspaces { normals, offsets, lower, upper } => ConvexBody::Halfspaces {
                normals: normals.clone(),
                offsets: normals.iter().zip(offsets).map(|(a, b)| b + dot(a, v)).collect(),
                lower: shift(lower),
                upper: shift(upper),
            },
        }
    }

    /// Radius of the largest open ball inside the body.
    pub fn inradius(&self) -> Result<f64, ConvexError> {
        match self {
            ConvexBody::Box { lower, upper } => Ok(lower
                .iter()
                .zip(upper)
                .map(|(l, u)| (u - l) / 2.0)
                .fold(f64::INFINITY, f64::min)),
            ConvexBody::Halfspaces { normals, offsets, lower, upper } => {
                chebyshev_radius(normals, offsets, lower, upper)
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Maximizes r subject to `a_i·x + r|a_i| <= b_i` by enumerating vertices of
/// the (D+1)-dimensional feasible region.
fn chebyshev_radius(
    normals: &[Vec<f64>],
    offsets: &[f64],
    lower: &[f64],
    upper: &[f64],
) -> Result<f64, ConvexError> {
    let d = lower.len();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for (a, &b) in normals.iter().zip(offsets) {
        let n = norm(a);
        if n == 0.0 {
            if b <= 0.0 {
                return Err(ConvexError::Infeasible);
            }
            continue;
        }
        let mut row = a.clone();
        row.push(n);
        rows.push((row, b));
    }
    for i in 0..d {
        let mut up = vec![0.0; d + 1];
        up[i] = 1.0;
        up[d] = 1.0;
        rows.push((up, upper[i]));
        let mut lo = vec![0.0; d + 1];
        lo[i] = -1.0;
        lo[d] = 1.0;
        rows.push((lo, -lower[i]));
    }
    let scale = rows.iter().map(|(_, b)| b.abs()).fold(1.0, f64::max);
    let tol = 1e-10 * scale;
    let k = d + 1;
    let mut best = f64::NEG_INFINITY;
    let mut pick: Vec<usize> = (0..k).collect();
    loop {
        let m = DMatrix::from_fn(k, k, |i, j| rows[pick[i]].0[j]);
        let rhs = DVector::from_fn(k, |i, _| rows[pick[i]].1);
        if let Some(z) = m.lu().solve(&rhs) {
            if z.iter().all(|v| v.is_finite()) && rows.iter().all(|(a, b)| dot(a, z.as_slice()) <= b + tol) {
                best = best.max(z[d]);
            }
        }
        // next combination
        let n = rows.len();
        let mut i = k;
        while i > 0 && pick[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        pick[i - 1] += 1;
        for j in i..k {
            pick[j] = pick[j - 1] + 1;
        }
    }
    if best > 0.0 {
        Ok(best)
    } else {
        Err(ConvexError::Infeasible)
    }
}

/// Number of integers `n` with `l < n < u` and `n ≡ a (mod m)`.
fn axis_count(l: f64, u: f64, m: i64, a: i64) -> i64 {
    let lo = l.floor() as i64 + 1;
    let hi = u.ceil() as i64 - 1;
    if hi < lo {
        return 0;
    }
    (hi - a).div_euclid(m) - (lo - 1 - a).div_euclid(m)
}

fn axis_range(l: f64, u: f64) -> (i64, i64) {
    (l.floor() as i64 + 1, u.ceil() as i64 - 1)
}

fn check_residue(body: &ConvexBody, m: u64, a: &[i64]) -> Result<(), ConvexError> {
    if m == 0 {
        return Err(ConvexError::ZeroModulus);
    }
    if a.len() != body.dim() {
        return Err(ConvexError::Dimension { expected: body.dim(), found: a.len() });
    }
    Ok(())
}

/// `|body ∩ (m·Z^D + a)|`; closed form for boxes, enumeration otherwise.
pub fn lattice_count(body: &ConvexBody, m: u64, a: &[i64]) -> Result<u128, ConvexError> {
    check_residue(body, m, a)?;
    match body {
        ConvexBody::Box { lower, upper } => Ok(lower
            .iter()
            .zip(upper)
            .zip(a)
            .map(|((&l, &u), &ai)| axis_count(l, u, m as i64, ai) as u128)
            .product()),
        ConvexBody::Halfspaces { .. } => {
            let mut n = 0u128;
            for_each_lattice_point(body, m, a, DEFAULT_BUDGET, |_| n += 1)?;
            Ok(n)
        }
    }
}

/// All points of `body ∩ (m·Z^D + a)` in lexicographic order.
pub fn lattice_points(body: &ConvexBody, m: u64, a: &[i64], budget: u64) -> Result<Vec<Vec<i64>>, ConvexError> {
    check_residue(body, m, a)?;
    let mut out = Vec::new();
    for_each_lattice_point(body, m, a, budget, |x| out.push(x.to_vec()))?;
    Ok(out)
}

fn for_each_lattice_point(
    body: &ConvexBody,
    m: u64,
    a: &[i64],
    budget: u64,
    mut visit: impl FnMut(&[i64]),
) -> Result<(), ConvexError> {
    let (lower, upper) = body.bounds();
    let m = m as i64;
    let d = lower.len();
    let mut starts = Vec::with_capacity(d);
    let mut ends = Vec::with_capacity(d);
    let mut total = 1.0f64;
    for i in 0..d {
        let (lo, hi) = axis_range(lower[i], upper[i]);
        let s = lo + (a[i] - lo).rem_euclid(m);
        if s > hi {
            return Ok(());
        }
        total *= ((hi - s) / m + 1) as f64;
        starts.push(s);
        ends.push(hi);
    }
    if total > budget as f64 {
        return Err(ConvexError::Budget { points: total, budget });
    }
    let mut x = starts.clone();
    let mut xf = vec![0.0; d];
    loop {
        for (f, v) in xf.iter_mut().zip(&x) {
            *f = *v as f64;
        }
        if body.contains(&xf) {
            visit(&x);
        }
        let mut i = d;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            x[i] += m;
            if x[i] <= ends[i] {
                break;
            }
            x[i] = starts[i];
        }
    }
}

/// Result of averaging a periodic function over a body.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicAverage {
    pub average: f64,
    /// Average over one period `Z_m^D`.
    pub reference: f64,
    /// `|average / reference - 1|`, or the absolute gap when the reference is zero.
    pub deviation: f64,
}

/// Average over `body ∩ Z^D` of an `m`-periodic `f`, given on residues in `[0, m)^D`.
pub fn average_periodic(
    body: &ConvexBody,
    f: &dyn Fn(&[u64]) -> f64,
    m: u64,
    cd_guard: f64,
) -> Result<PeriodicAverage, ConvexError> {
    if m == 0 {
        return Err(ConvexError::ZeroModulus);
    }
    let r = body.inradius()?;
    if r < cd_guard * m as f64 {
        return Err(ConvexError::InradiusTooSmall { inradius: r, guard: cd_guard * m as f64 });
    }
    let d = body.dim();
    let mut weighted = 0.0;
    let mut total = 0u128;
    let mut reference = 0.0;
    let mut res = vec![0u64; d];
    let residues = (m as u128).pow(d as u32);
    for _ in 0..residues {
        let a: Vec<i64> = res.iter().map(|&v| v as i64).collect();
        let fv = f(&res);
        let c = lattice_count(body, m, &a)?;
        weighted += fv * c as f64;
        total += c;
        reference += fv;
        for v in res.iter_mut() {
            *v += 1;
            if *v < m {
                break;
            }
            *v = 0;
        }
    }
    if total == 0 {
        return Err(ConvexError::NoLatticePoints);
    }
    let average = weighted / total as f64;
    let reference = reference / residues as f64;
    let deviation = if reference != 0.0 { (average / reference - 1.0).abs() } else { average.abs() };
    Ok(PeriodicAverage { average, reference, deviation })
}

/// Relative density of a residue class: `|Ω ∩ (mZ^D+a)| · m^D / |Ω ∩ Z^D|`.
pub fn normalized_residue_density(body: &ConvexBody, m: u64, a: &[i64]) -> Result<f64, ConvexError> {
    let all = lattice_count(body, 1, &vec![0; body.dim()])?;
    if all == 0 {
        return Err(ConvexError::NoLatticePoints);
    }
    let c = lattice_count(body, m, a)?;
    Ok(c as f64 * (m as f64).powi(body.dim() as i32) / all as f64)
}

/// Comparison of a body average with the best cube average.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverReport {
    pub body_average: f64,
    pub sup_cube_average: f64,
    /// Half side of the cubes `y + [-s, s]^D`.
    pub half_side: i64,
    /// Constant of the covering argument, `4^D`.
    pub covering_constant: f64,
    /// `body_average / sup_cube_average` (0 when both vanish).
    pub measured_ratio: f64,
}

/// Sup over cubes `y + [-r, r]^D` centered at lattice points of the body of
/// the cube average of `f`, with `r` the inradius.
pub fn sup_box_average(
    body: &ConvexBody,
    f: &dyn Fn(&[i64]) -> f64,
    cd_guard: f64,
    budget: u64,
) -> Result<CoverReport, ConvexError> {
    let r = body.inradius()?;
    if r <= cd_guard {
        return Err(ConvexError::InradiusTooSmall { inradius: r, guard: cd_guard });
    }
    let s = r.floor() as i64;
    let (lower, upper) = body.bounds();
    let d = lower.len();
    // summed-area table over the bounding box grown by s
    let mut origin = Vec::with_capacity(d);
    let mut dims = Vec::with_capacity(d);
    for i in 0..d {
        let (lo, hi) = axis_range(lower[i], upper[i]);
        origin.push(lo - s);
        dims.push((hi - lo + 2 * s + 1).max(0) as usize);
    }
    let cells: f64 = dims.iter().map(|&v| v as f64).product();
    if cells > budget as f64 {
        return Err(ConvexError::Budget { points: cells, budget });
    }
    let strides: Vec<usize> = (0..d).map(|i| dims[i + 1..].iter().product()).collect();
    let ncells = cells as usize;
    let mut table = vec![0.0f64; ncells];
    let mut x = vec![0i64; d];
    for (idx, cell) in table.iter_mut().enumerate() {
        let mut rem = idx;
        for i in 0..d {
            x[i] = origin[i] + (rem / strides[i]) as i64;
            rem %= strides[i];
        }
        *cell = f(&x);
    }
    for i in 0..d {
        for idx in 0..ncells {
            if !(idx / strides[i]).is_multiple_of(dims[i]) {
                table[idx] += table[idx - strides[i]];
            }
        }
    }
    let prefix = |hi: &[i64]| -> f64 {
        // inclusive prefix sum up to `hi` (grid coordinates); negative → 0
        if hi.iter().any(|&v| v < 0) {
            return 0.0;
        }
        table[hi.iter().zip(&strides).map(|(&v, &st)| v as usize * st).sum::<usize>()]
    };
    let cube_sum = |c: &[i64]| -> f64 {
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut pt = vec![0i64; d];
            let mut sign = 1.0;
            for i in 0..d {
                let g = c[i] - origin[i];
                if corner >> i & 1 == 1 {
                    pt[i] = g - s - 1;
                    sign = -sign;
                } else {
                    pt[i] = g + s;
                }
            }
            acc += sign * prefix(&pt);
        }
        acc
    };
    let cube_size = ((2 * s + 1) as f64).powi(d as i32);
    let mut sup = f64::NEG_INFINITY;
    let mut body_sum = 0.0;
    let mut body_n = 0u64;
    for_each_lattice_point(body, 1, &vec![0; d], budget, |c| {
        body_sum += f(c);
        body_n += 1;
        sup = sup.max(cube_sum(c) / cube_size);
    })?;
    if body_n == 0 {
        return Err(ConvexError::NoLatticePoints);
    }
    let body_average = body_sum / body_n as f64;
    let measured_ratio = if sup > 0.0 { body_average / sup } else { 0.0 };
    Ok(CoverReport {
        body_average,
        sup_cube_average: sup,
        half_side: s,
        covering_constant: 4f64.powi(d as i32),
        measured_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inradius_examples() {
        assert_eq!(ConvexBody::new_box(vec![0.0, 0.0], vec![10.0, 4.0]).unwrap().inradius().unwrap(), 2.0);
        assert_eq!(ConvexBody::cube(3, 0.0, 2.0).unwrap().inradius().unwrap(), 1.0);
        let simplex = ConvexBody::new_halfspaces(
            vec![vec![1.0, 1.0]],
            vec![1.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        let r = simplex.inradius().unwrap();
        assert!((r - 1.0 / (2.0 + 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn infeasible_halfspaces() {
        let e = ConvexBody::new_halfspaces(vec![vec![1.0]], vec![-1.0], vec![0.0], vec![1.0]);
        assert_eq!(e, Err(ConvexError::Infeasible));
    }

    #[test]
    fn count_examples() {
        let b = ConvexBody::cube(2, -0.5, 10.5).unwrap();
        assert_eq!(lattice_count(&b, 1, &[0, 0]).unwrap(), 121);
        let i = ConvexBody::new_box(vec![0.0], vec![100.0]).unwrap();
        assert_eq!(lattice_count(&i, 5, &[2]).unwrap(), 20);
        let b = ConvexBody::cube(2, 0.0, 10.0).unwrap();
        assert_eq!(lattice_count(&b, 3, &[1, 1]).unwrap(), 9);
        let pts = lattice_points(&b, 3, &[1, 1], 1000).unwrap();
        assert_eq!(pts.first().unwrap(), &vec![1, 1]);
        assert_eq!(pts.last().unwrap(), &vec![7, 7]);
    }

    #[test]
    fn halfspace_count_matches_enumeration() {
        let s = ConvexBody::new_halfspaces(vec![vec![1.0, 1.0]], vec![10.0], vec![0.0, 0.0], vec![10.0, 10.0])
            .unwrap();
        // x, y >= 1, x + y <= 9
        assert_eq!(lattice_count(&s, 1, &[0, 0]).unwrap(), 36);
    }

    #[test]
    fn averaging_examples() {
        let ind = |x: &[u64]| if x[0] == 0 { 1.0 } else { 0.0 };
        let open = ConvexBody::new_box(vec![0.0], vec![1000.0]).unwrap();
        let avg = average_periodic(&open, &ind, 5, DEFAULT_CD_GUARD).unwrap();
        assert!((avg.average - 199.0 / 999.0).abs() < 1e-15);
        let upto = ConvexBody::new_box(vec![0.0], vec![1000.5]).unwrap();
        assert_eq!(average_periodic(&upto, &ind, 5, DEFAULT_CD_GUARD).unwrap().average, 0.2);
        let aligned = ConvexBody::new_box(vec![-0.5], vec![999.5]).unwrap();
        let avg = average_periodic(&aligned, &|x| x[0] as f64, 5, DEFAULT_CD_GUARD).unwrap();
        assert_eq!(avg.deviation, 0.0);
        let small = ConvexBody::new_box(vec![0.0], vec![20.0]).unwrap();
        assert!(matches!(
            average_periodic(&small, &|_| 1.0, 5, DEFAULT_CD_GUARD),
            Err(ConvexError::InradiusTooSmall { .. })
        ));
    }

    #[test]
    fn cover_examples() {
        let b = ConvexBody::cube(2, 0.0, 100.0).unwrap();
        let r = sup_box_average(&b, &|_| 0.5, 1.0, DEFAULT_BUDGET).unwrap();
        assert!((r.sup_cube_average - 0.5).abs() < 1e-12);
        assert_eq!(r.covering_constant, 16.0);
        let point = |x: &[i64]| if x == [50, 50] { 1.0 } else { 0.0 };
        let r = sup_box_average(&b, &point, 1.0, DEFAULT_BUDGET).unwrap();
        assert!((r.sup_cube_average - 1.0 / 101f64.powi(2)).abs() < 1e-15);
        assert!(r.body_average <= r.covering_constant * r.sup_cube_average);
    }
}
