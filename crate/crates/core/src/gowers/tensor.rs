//! Real tensors on product sets, corner averages and box norms.

use super::{root, GowersError};

/// A real function on `X_1 × … × X_A`, row-major with the first axis slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self, GowersError> {
        if dims.contains(&0) {
            return Err(GowersError::Shape("empty index set".into()));
        }
        let len: usize = dims.iter().product();
        if len != data.len() {
            return Err(GowersError::Shape(format!("{} values for shape {:?}", data.len(), dims)));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(GowersError::Shape("non-finite entry".into()));
        }
        Ok(Tensor { dims, data })
    }

    pub fn from_fn(dims: Vec<usize>, f: impl Fn(&[usize]) -> f64) -> Result<Self, GowersError> {
        let len: usize = dims.iter().product();
        let mut idx = vec![0; dims.len()];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f(&idx));
            for ax in (0..dims.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < dims[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        Tensor::new(dims, data)
    }

    pub fn constant(dims: Vec<usize>, c: f64) -> Result<Self, GowersError> {
        let len = dims.iter().product();
        Tensor::new(dims, vec![c; len])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        let mut k = 0;
        for (i, d) in idx.iter().zip(&self.dims) {
            k = k * d + i;
        }
        self.data[k]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Extends a tensor on `X^{A∖{axis}}` to `X^A`, constant along `axis`.
    pub fn broadcast(&self, axis: usize, len: usize) -> Result<Tensor, GowersError> {
        if axis > self.rank() {
            return Err(GowersError::Shape(format!("axis {axis} beyond rank {}", self.rank())));
        }
        let mut dims = self.dims.clone();
        dims.insert(axis, len);
        Tensor::from_fn(dims, |idx| {
            let mut sub = idx.to_vec();
            sub.remove(axis);
            self.get(&sub)
        })
    }

    fn zip(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
        Tensor { dims: self.dims.clone(), data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect() }
    }
}

fn corner_rec(fs: &[&[f64]], dims: &[usize]) -> f64 {
    let Some((&n0, rest)) = dims.split_first() else {
        return fs.iter().map(|f| f[0]).product();
    };
    let stride: usize = rest.iter().product();
    let half = fs.len() / 2;
    let mut buf = vec![vec![0.0; stride]; half];
    let mut total = 0.0;
    for a in 0..n0 {
        for b in 0..n0 {
            for (j, out) in buf.iter_mut().enumerate() {
                let f0 = &fs[2 * j][a * stride..(a + 1) * stride];
                let f1 = &fs[2 * j + 1][b * stride..(b + 1) * stride];
                for ((o, x), y) in out.iter_mut().zip(f0).zip(f1) {
                    *o = x * y;
                }
            }
            let refs: Vec<&[f64]> = buf.iter().map(|v| v.as_slice()).collect();
            total += corner_rec(&refs, rest);
        }
    }
    total / (n0 * n0) as f64
}

/// `E_{m⁽⁰⁾,m⁽¹⁾} Π_ω f_ω(m⁽ω⁾)`, with `fs` indexed by ω where bit α is ω_α.
pub fn corner_average(fs: &[&Tensor]) -> Result<f64, GowersError> {
    let first = fs.first().ok_or_else(|| GowersError::Shape("no functions".into()))?;
    let rank = first.rank();
    if fs.len() != 1 << rank {
        return Err(GowersError::Shape(format!("{} functions for rank {rank}", fs.len())));
    }
    if fs.iter().any(|f| f.dims != first.dims) {
        return Err(GowersError::Shape("shape mismatch".into()));
    }
    let slices: Vec<&[f64]> = fs.iter().map(|f| f.data.as_slice()).collect();
    Ok(corner_rec(&slices, &first.dims))
}

/// `‖F‖_{□^A}^{2^{|A|}}` before the root.
pub fn box_norm_power(f: &Tensor) -> f64 {
    let fs = vec![f.data.as_slice(); 1 << f.rank()];
    corner_rec(&fs, &f.dims)
}

/// The box norm. For `|A| = 0` this is `F(∅)` itself.
pub fn box_norm(f: &Tensor) -> Result<f64, GowersError> {
    if f.rank() == 0 {
        return Ok(f.data[0]);
    }
    root(box_norm_power(f), f.rank())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsgReport {
    /// `|E Π_ω f_ω(m⁽ω⁾)|`
    pub lhs: f64,
    /// `Π_ω |‖f_ω‖_{□^A}|`
    pub rhs: f64,
}

impl CsgReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

/// Both sides of the Cauchy–Schwarz–Gowers inequality.
pub fn csg_check(fs: &[Tensor]) -> Result<CsgReport, GowersError> {
    let refs: Vec<&Tensor> = fs.iter().collect();
    let lhs = corner_average(&refs)?.abs();
    let mut rhs = 1.0;
    for f in fs {
        rhs *= box_norm(f)?.abs();
    }
    Ok(CsgReport { lhs, rhs })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WgnReport {
    /// `|E_m f(m) Π_α f_α(m|_{A∖α})|`
    pub lhs: f64,
    /// `‖f‖_{□^A(ν)}`
    pub weighted_norm: f64,
    /// `Π_α ‖ν_α‖_{□^{A∖α}}^{1/2}`
    pub weight_factor: f64,
    pub rhs: f64,
}

impl WgnReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

/// The weighted box norm power of `f` with weights `ν_α` on `X^{A∖α}`.
pub fn weighted_box_power(f: &Tensor, nus: &[Tensor]) -> Result<f64, GowersError> {
    let rank = f.rank();
    let ext = extend_all(f, nus)?;
    let fs: Vec<Tensor> = (0..1usize << rank)
        .map(|omega| {
            let mut t = f.clone();
            for (alpha, nu) in ext.iter().enumerate() {
                if omega >> alpha & 1 == 0 {
                    t = t.zip(nu, |a, b| a * b);
                }
            }
            t
        })
        .collect();
    let refs: Vec<&Tensor> = fs.iter().collect();
    corner_average(&refs)
}

fn extend_all(f: &Tensor, parts: &[Tensor]) -> Result<Vec<Tensor>, GowersError> {
    let rank = f.rank();
    if parts.len() != rank {
        return Err(GowersError::Shape(format!("{} lower-order functions for rank {rank}", parts.len())));
    }
    parts
        .iter()
        .enumerate()
        .map(|(alpha, g)| {
            let mut want = f.dims.clone();
            want.remove(alpha);
            if g.dims != want {
                return Err(GowersError::Shape(format!("function {alpha} has shape {:?}, expected {want:?}", g.dims)));
            }
            g.broadcast(alpha, f.dims[alpha])
        })
        .collect()
}

/// Both sides of the weighted generalized von Neumann inequality.
pub fn wgn_check(f: &Tensor, fas: &[Tensor], nus: &[Tensor]) -> Result<WgnReport, GowersError> {
    if f.rank() == 0 {
        return Err(GowersError::Shape("index set A must be non-empty".into()));
    }
    for (alpha, (fa, na)) in fas.iter().zip(nus).enumerate() {
        if fa.dims != na.dims {
            return Err(GowersError::Shape(format!("f_{alpha} and nu_{alpha} differ in shape")));
        }
        if let Some(k) = fa.data.iter().zip(&na.data).position(|(a, b)| a.abs() > *b) {
            return Err(GowersError::Domination { index: alpha, position: k });
        }
    }
    let ext = extend_all(f, fas)?;
    let mut prod = f.clone();
    for g in &ext {
        prod = prod.zip(g, |a, b| a * b);
    }
    let lhs = prod.mean().abs();
    let weighted_norm = root(weighted_box_power(f, nus)?, f.rank())?;
    let mut weight_factor = 1.0;
    for nu in nus {
        weight_factor *= box_norm(nu)?.abs().sqrt();
    }
    Ok(WgnReport { lhs, weighted_norm, weight_factor, rhs: weighted_norm * weight_factor })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_rank_one() {
        let c = Tensor::constant(vec![3, 4], 0.7).unwrap();
        assert!((box_norm(&c).unwrap() - 0.7).abs() < 1e-14);
        let g = [0.3, -1.0, 2.0];
        let h = [1.5, 0.5];
        let t = Tensor::from_fn(vec![3, 2], |i| g[i[0]] * h[i[1]]).unwrap();
        // each axis index appears squared in every corner product
        let want = (g.iter().map(|v| v * v).sum::<f64>() / 3.0 * h.iter().map(|v| v * v).sum::<f64>() / 2.0).sqrt();
        assert!((box_norm(&t).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn rank_one_axis_is_abs_mean() {
        let t = Tensor::new(vec![2], vec![1.0, -1.0]).unwrap();
        assert_eq!(box_norm(&t).unwrap(), 0.0);
        let s = Tensor::new(vec![], vec![-2.5]).unwrap();
        assert_eq!(box_norm(&s).unwrap(), -2.5);
    }

    #[test]
    fn corner_matches_direct_expansion() {
        let fs: Vec<Tensor> = (0..4)
            .map(|k| Tensor::from_fn(vec![2, 3], |i| ((i[0] * 3 + i[1] + k) as f64 * 0.37).sin()).unwrap())
            .collect();
        let mut direct = 0.0;
        for a0 in 0..2 {
            for a1 in 0..2 {
                for b0 in 0..3 {
                    for b1 in 0..3 {
                        let a = [a0, a1];
                        let b = [b0, b1];
                        let mut p = 1.0;
                        for (w, f) in fs.iter().enumerate() {
                            p *= f.get(&[a[w & 1], b[w >> 1 & 1]]);
                        }
                        direct += p;
                    }
                }
            }
        }
        let refs: Vec<&Tensor> = fs.iter().collect();
        assert!((corner_average(&refs).unwrap() - direct / 36.0).abs() < 1e-14);
    }

    #[test]
    fn ones_give_equality() {
        let one = Tensor::constant(vec![4, 4], 1.0).unwrap();
        let r = csg_check(&vec![one.clone(); 4]).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-14 && (r.rhs - 1.0).abs() < 1e-14);
        let lower = Tensor::constant(vec![4], 1.0).unwrap();
        let w = wgn_check(&one, &[lower.clone(), lower.clone()], &[lower.clone(), lower]).unwrap();
        assert!((w.lhs - 1.0).abs() < 1e-14 && (w.rhs - 1.0).abs() < 1e-14);
    }

    #[test]
    fn domination_violation_rejected() {
        let f = Tensor::constant(vec![2, 2], 1.0).unwrap();
        let big = Tensor::constant(vec![2], 2.0).unwrap();
        let small = Tensor::constant(vec![2], 1.0).unwrap();
        let err = wgn_check(&f, &[big, small.clone()], &[small.clone(), small]).unwrap_err();
        assert!(matches!(err, GowersError::Domination { index: 0, .. }));
    }
}
