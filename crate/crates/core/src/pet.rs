//! PET induction: polynomial systems, weight vectors, van der Corput steps and
//! linearization down to an averaged local Gowers specification.
//!
//! A system with `D` fine variables lives in `Z[m, h_1, …, h_D, W]`, with `m`
//! at index 0 and `W` last.

use std::cmp::Ordering;
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::gowers::{GowersError, GowersSpec};
use crate::polyalg::{MultiPoly, PolyError};

/// Cap on vdc steps in one linearization.
pub const MAX_STEPS: usize = 1_000_000;
/// Default cap on the node count of any intermediate system.
pub const DEFAULT_MAX_NODES: usize = 128;

#[derive(Debug, Error)]
pub enum PetError {
    #[error("invalid system: {0}")]
    Invalid(String),
    #[error("unknown node id {0}")]
    UnknownNode(usize),
    #[error("distance of a node to itself")]
    SameNode,
    #[error("node {0} is inactive")]
    Inactive(String),
    #[error("node {0} is linear")]
    Linear(String),
    #[error("weight did not decrease: {before} -> {after}")]
    WeightIncrease { before: WeightVector, after: WeightVector },
    #[error("resource limit: {0}")]
    Budget(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Gowers(#[from] GowersError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub id: usize,
    pub label: String,
    pub poly: MultiPoly,
    pub active: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolySystem {
    fine_dof: usize,
    nodes: Vec<Node>,
    distinguished: usize,
    next_id: usize,
}

fn m_degree(p: &MultiPoly) -> Option<u32> {
    p.degree_in(0).finite()
}

impl PolySystem {
    /// Builds and validates a system. Node ids are assigned `1..=k` in order.
    pub fn new(fine_dof: usize, nodes: Vec<(String, MultiPoly, bool)>, distinguished: usize) -> Result<Self, PetError> {
        let nodes: Vec<Node> = nodes
            .into_iter()
            .enumerate()
            .map(|(i, (label, poly, active))| Node { id: i + 1, label, poly, active })
            .collect();
        let next_id = nodes.len() + 1;
        let sys = PolySystem { fine_dof, nodes, distinguished, next_id };
        sys.validate()?;
        Ok(sys)
    }

    pub fn fine_dof(&self) -> usize {
        self.fine_dof
    }

    pub fn nvars(&self) -> usize {
        self.fine_dof + 2
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn distinguished(&self) -> usize {
        self.distinguished
    }

    pub fn node(&self, id: usize) -> Result<&Node, PetError> {
        self.nodes.iter().find(|n| n.id == id).ok_or(PetError::UnknownNode(id))
    }

    pub fn active_ids(&self) -> Vec<usize> {
        self.nodes.iter().filter(|n| n.active).map(|n| n.id).collect()
    }

    /// Variable names `m, h1, …, hD, W`.
    pub fn var_names(&self) -> Vec<String> {
        let mut v = vec!["m".to_string()];
        v.extend((1..=self.fine_dof).map(|i| format!("h{i}")));
        v.push("W".into());
        v
    }

    /// Checks the non-degeneracy conditions.
    pub fn validate(&self) -> Result<(), PetError> {
        if self.nodes.is_empty() {
            return Err(PetError::Invalid("no nodes".into()));
        }
        let nv = self.nvars();
        if let Some(n) = self.nodes.iter().find(|n| n.poly.nvars() != nv) {
            return Err(PetError::Invalid(format!("node {} has {} variables, expected {nv}", n.label, n.poly.nvars())));
        }
        let d = self.node(self.distinguished)?;
        if !d.active {
            return Err(PetError::Invalid("distinguished node is inactive".into()));
        }
        for (i, a) in self.nodes.iter().enumerate() {
            for b in &self.nodes[i + 1..] {
                let diff = &a.poly - &b.poly;
                if diff.is_constant() {
                    return Err(PetError::Invalid(format!("R_{} - R_{} is constant", a.label, b.label)));
                }
                if self.is_linear(a.id)? && self.is_linear(b.id)? && m_degree(&diff).unwrap_or(0) == 0 {
                    return Err(PetError::Invalid(format!(
                        "linear nodes {} and {} differ by an m-free polynomial",
                        a.label, b.label
                    )));
                }
            }
        }
        Ok(())
    }

    /// `deg_m(R_α − R_β)`.
    pub fn distance(&self, a: usize, b: usize) -> Result<u32, PetError> {
        if a == b {
            return Err(PetError::SameNode);
        }
        let diff = &self.node(a)?.poly - &self.node(b)?.poly;
        m_degree(&diff).ok_or_else(|| PetError::Invalid("two nodes carry the same polynomial".into()))
    }

    /// `R_α − R_{α₀}` is at most linear in `m`.
    pub fn is_linear(&self, id: usize) -> Result<bool, PetError> {
        if id == self.distinguished {
            return Ok(true);
        }
        let diff = &self.node(id)?.poly - &self.node(self.distinguished)?.poly;
        Ok(m_degree(&diff).unwrap_or(0) <= 1)
    }

    pub fn is_linear_system(&self) -> Result<bool, PetError> {
        for n in self.nodes.iter().filter(|n| n.active) {
            if !self.is_linear(n.id)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Replaces every `R_α` by `R_α − R`.
    pub fn translate(&self, r: &MultiPoly) -> Result<PolySystem, PetError> {
        let mut out = self.clone();
        for n in &mut out.nodes {
            n.poly = n.poly.checked_sub(r)?;
        }
        Ok(out)
    }

    pub fn display(&self) -> String {
        let names = self.var_names();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let mut s = String::new();
        for n in &self.nodes {
            let mark = if n.id == self.distinguished {
                "*"
            } else if n.active {
                ""
            } else {
                " (inactive)"
            };
            s.push_str(&format!("R_{}{} = {}\n", n.label, mark, n.poly.display_with(&refs)));
        }
        s
    }
}

/// Weight vector with entries indexed from 1; trailing zeros are dropped.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct WeightVector(Vec<u32>);

impl WeightVector {
    pub fn new(mut entries: Vec<u32>) -> Self {
        while entries.last() == Some(&0) {
            entries.pop();
        }
        WeightVector(entries)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// Component `i ≥ 1`.
    pub fn get(&self, i: usize) -> u32 {
        if i == 0 {
            return 0;
        }
        self.0.get(i - 1).copied().unwrap_or(0)
    }
}

impl Ord for WeightVector {
    /// `w < w′` when they agree above some index k and `w_k < w′_k`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.iter().rev().cmp(other.0.iter().rev()))
    }
}

impl PartialOrd for WeightVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Counts equivalence classes of active nodes by their distance to `reference`.
pub fn weight_vector(sys: &PolySystem, reference: usize) -> Result<WeightVector, PetError> {
    let r = sys.node(reference)?;
    if !r.active {
        return Err(PetError::Inactive(r.label.clone()));
    }
    let mut by_dist: Vec<Vec<usize>> = Vec::new();
    for n in sys.nodes.iter().filter(|n| n.active && n.id != reference) {
        let d = sys.distance(reference, n.id)? as usize;
        if d == 0 {
            continue;
        }
        if by_dist.len() < d {
            by_dist.resize(d, Vec::new());
        }
        by_dist[d - 1].push(n.id);
    }
    let mut out = Vec::with_capacity(by_dist.len());
    for (i, group) in by_dist.iter().enumerate() {
        let dist = (i + 1) as u32;
        let mut reps: Vec<usize> = Vec::new();
        for &b in group {
            let mut found = false;
            for &c in &reps {
                if sys.distance(b, c)? < dist {
                    found = true;
                    break;
                }
            }
            if !found {
                reps.push(b);
            }
        }
        out.push(reps.len() as u32);
    }
    Ok(WeightVector::new(out))
}

/// The base system `R_i = P_i(W·m)/W` (or `P_i(m)` without the W-form), node 1
/// distinguished and all nodes active.
pub fn make_system(polys: &[MultiPoly], w_form: bool) -> Result<PolySystem, PetError> {
    if polys.is_empty() {
        return Err(PetError::Invalid("no polynomials".into()));
    }
    for (i, p) in polys.iter().enumerate() {
        if p.nvars() != 1 {
            return Err(PetError::Invalid(format!("P_{} must be a polynomial in m alone", i + 1)));
        }
        if polys[..i].contains(p) {
            return Err(PetError::Invalid(format!("P_{} repeats an earlier polynomial", i + 1)));
        }
    }
    let m = MultiPoly::var(2, 0);
    let w = MultiPoly::var(2, 1);
    let mut nodes = Vec::new();
    for (i, p) in polys.iter().enumerate() {
        let r = if w_form {
            if !p.constant_term().is_zero() {
                return Err(PetError::Invalid(format!("P_{}(0) must vanish for the W-form", i + 1)));
            }
            let wm = &w * &m;
            p.substitute(&[wm])?.div_exact(&w).map_err(|_| {
                PetError::Invalid(format!("P_{}(Wm)/W is not integral", i + 1))
            })?
        } else {
            p.remap(2, &[0])
        };
        nodes.push(((i + 1).to_string(), r, true));
    }
    PolySystem::new(0, nodes, 1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub target: usize,
    pub target_label: String,
    /// `R_target`, subtracted from every node before differencing.
    pub translation: MultiPoly,
    pub reference: usize,
    pub weight_before: WeightVector,
    pub weight_after: WeightVector,
    /// Indices of the two new fine variables `h, h′`.
    pub new_vars: (usize, usize),
    /// Copy id for each duplicated node.
    pub copies: Vec<(usize, usize)>,
    pub nodes_after: usize,
}

/// One van der Corput step on a non-linear active node.
pub fn vdc_step(sys: &PolySystem, target: usize) -> Result<(PolySystem, StepRecord), PetError> {
    vdc_step_with_cap(sys, target, usize::MAX)
}

/// As [`vdc_step`], refusing to build a system with more than `max_nodes` nodes.
pub fn vdc_step_with_cap(
    sys: &PolySystem,
    target: usize,
    max_nodes: usize,
) -> Result<(PolySystem, StepRecord), PetError> {
    let t = sys.node(target)?.clone();
    if !t.active {
        return Err(PetError::Inactive(t.label));
    }
    if sys.is_linear(target)? {
        return Err(PetError::Linear(t.label));
    }
    let weight_before = weight_vector(sys, target)?;
    let shifted = sys.translate(&t.poly)?;
    let d0 = sys.fine_dof;
    let nv = d0 + 4;
    let (hv, hpv, wv) = (d0 + 1, d0 + 2, d0 + 3);
    // old variable i goes to i, except W which moves past h, h′
    let mut map: Vec<usize> = (0..=d0).collect();
    map.push(wv);
    let lift = |p: &MultiPoly| p.remap(nv, &map);
    let m_plus = |v: usize| -> Result<Vec<MultiPoly>, PetError> {
        let mut images: Vec<MultiPoly> = (0..nv).map(|i| MultiPoly::var(nv, i)).collect();
        images[0] = &MultiPoly::var(nv, 0) + &MultiPoly::var(nv, v);
        Ok(images)
    };
    let img_h = m_plus(hv)?;
    let img_hp = m_plus(hpv)?;

    let mut in_a0 = Vec::with_capacity(sys.nodes.len());
    for n in &shifted.nodes {
        in_a0.push(n.id == target || m_degree(&n.poly).unwrap_or(0) == 0);
    }
    let projected = in_a0.len() + in_a0.iter().filter(|z| !**z).count();
    if projected > max_nodes {
        return Err(PetError::Budget(format!("step on {} would build {projected} nodes (cap {max_nodes})", t.label)));
    }
    let mut nodes = Vec::new();
    let mut copies = Vec::new();
    let mut next_id = sys.next_id;
    for (n, &zero) in shifted.nodes.iter().zip(&in_a0) {
        let lifted = lift(&n.poly);
        if zero {
            nodes.push(Node { id: n.id, label: n.label.clone(), poly: lifted, active: false });
        } else {
            nodes.push(Node { id: n.id, label: n.label.clone(), poly: lifted.substitute(&img_h)?, active: n.active });
        }
    }
    for (n, &zero) in shifted.nodes.iter().zip(&in_a0) {
        if !zero {
            let poly = lift(&n.poly).substitute(&img_hp)?;
            let mut label = format!("{}'", n.label);
            while shifted.nodes.iter().chain(&nodes).any(|m| m.label == label) {
                label.push('\'');
            }
            nodes.push(Node { id: next_id, label, poly, active: n.active });
            copies.push((n.id, next_id));
            next_id += 1;
        }
    }
    // α′: active node of A₁ closest to the target, smallest id on ties
    let mut reference: Option<(u32, usize)> = None;
    for (n, &zero) in sys.nodes.iter().zip(&in_a0) {
        if zero || !n.active {
            continue;
        }
        let d = sys.distance(target, n.id)?;
        if reference.is_none_or(|(bd, bid)| (d, n.id) < (bd, bid)) {
            reference = Some((d, n.id));
        }
    }
    let reference = reference.ok_or_else(|| PetError::Invariant("A_1 has no active node".into()))?.1;
    let out = PolySystem { fine_dof: d0 + 2, nodes, distinguished: sys.distinguished, next_id };
    out.validate()?;
    let weight_after = weight_vector(&out, reference)?;
    if weight_after >= weight_before {
        return Err(PetError::WeightIncrease { before: weight_before, after: weight_after });
    }
    let rec = StepRecord {
        target,
        target_label: t.label,
        translation: t.poly,
        reference,
        weight_before,
        weight_after,
        new_vars: (hv, hpv),
        copies,
        nodes_after: out.nodes.len(),
    };
    Ok((out, rec))
}

/// Non-linear active node closest to `α₀`, smallest id on ties.
pub fn next_target(sys: &PolySystem) -> Result<Option<usize>, PetError> {
    let mut best: Option<(u32, usize)> = None;
    for n in sys.nodes.iter().filter(|n| n.active) {
        if sys.is_linear(n.id)? {
            continue;
        }
        let d = sys.distance(n.id, sys.distinguished)?;
        if best.is_none_or(|b| (d, n.id) < b) {
            best = Some((d, n.id));
        }
    }
    Ok(best.map(|b| b.1))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearizedResult {
    /// The linear system, normalized so `R_{α₀} = 0`.
    pub final_system: PolySystem,
    pub steps: Vec<StepRecord>,
    /// Active linear nodes other than `α₀`.
    pub linear_nodes: Vec<usize>,
    /// `b_α` in `(h_1, …, h_D, W)`.
    pub b: Vec<MultiPoly>,
    /// `c_α` in `(h_1, …, h_D, W)`.
    pub c: Vec<MultiPoly>,
    /// The Gowers steps: `b` padded with constants 1 to length at least 2.
    pub qvec: Vec<MultiPoly>,
    pub t: usize,
}

impl LinearizedResult {
    /// `Q₀ = Σ b_α m_α` in `(m_1, …, m_{|A_l|}, h_1, …, h_D, W)`.
    pub fn q0(&self) -> MultiPoly {
        let k = self.b.len();
        let nv = k + self.t + 1;
        let map: Vec<usize> = (k..nv).collect();
        let mut acc = MultiPoly::zero(nv);
        for (i, b) in self.b.iter().enumerate() {
            acc = &acc + &(&b.remap(nv, &map) * &MultiPoly::var(nv, i));
        }
        acc
    }

    /// Numeric spec with fine range `H`, `W` value and coarse range `√M`.
    pub fn gowers_spec(&self, h: u64, w_value: i64, sqrt_m: u64) -> Result<GowersSpec, PetError> {
        Ok(GowersSpec::new(self.qvec.clone(), self.t, h, w_value, sqrt_m)?)
    }

    pub fn var_names(&self) -> Vec<String> {
        let mut v: Vec<String> = (1..=self.t).map(|i| format!("h{i}")).collect();
        v.push("W".into());
        v
    }
}

/// Runs vdc steps until no non-linear active node remains, then reads off `b_α`.
pub fn linearize(sys: &PolySystem) -> Result<LinearizedResult, PetError> {
    linearize_with_cap(sys, DEFAULT_MAX_NODES)
}

pub fn linearize_with_cap(sys: &PolySystem, max_nodes: usize) -> Result<LinearizedResult, PetError> {
    sys.validate()?;
    let mut cur = sys.clone();
    let mut steps = Vec::new();
    while let Some(target) = next_target(&cur)? {
        if steps.len() >= MAX_STEPS {
            return Err(PetError::Budget(format!("more than {MAX_STEPS} steps")));
        }
        let (next, rec) = vdc_step_with_cap(&cur, target, max_nodes)?;
        steps.push(rec);
        cur = next;
    }
    let r0 = cur.node(cur.distinguished)?.poly.clone();
    let cur = cur.translate(&r0)?;
    let t = cur.fine_dof;
    // drop m: old variable i ≥ 1 becomes i − 1
    let mut map = vec![0];
    map.extend(0..=t);
    let mut linear_nodes = Vec::new();
    let (mut b, mut c) = (Vec::new(), Vec::new());
    for n in cur.nodes.iter().filter(|n| n.active && n.id != cur.distinguished) {
        if !cur.is_linear(n.id)? {
            return Err(PetError::Invariant(format!("node {} still non-linear", n.label)));
        }
        let co = n.poly.coeffs_in(0);
        let get = |k: usize| co.get(k).cloned().unwrap_or_else(|| MultiPoly::zero(cur.nvars())).remap(t + 1, &map);
        linear_nodes.push(n.id);
        b.push(get(1));
        c.push(get(0));
    }
    for (i, bi) in b.iter().enumerate() {
        if bi.is_zero() {
            return Err(PetError::Invariant(format!("b for node {} vanishes", linear_nodes[i])));
        }
        if b[..i].contains(bi) {
            return Err(PetError::Invariant(format!("b for node {} repeats", linear_nodes[i])));
        }
    }
    let mut qvec = b.clone();
    while qvec.len() < 2 {
        qvec.push(MultiPoly::one(t + 1));
    }
    Ok(LinearizedResult { final_system: cur, steps, linear_nodes, b, c, qvec, t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::parse_poly;

    fn p(src: &str, vars: &[&str]) -> MultiPoly {
        parse_poly(src, vars).unwrap()
    }

    const V0: [&str; 2] = ["m", "W"];

    fn example_52() -> PolySystem {
        let nodes = ["0", "m", "m^2"].iter().enumerate().map(|(i, s)| ((i + 1).to_string(), p(s, &V0), true)).collect();
        PolySystem::new(0, nodes, 3).unwrap()
    }

    #[test]
    fn distances_and_weights() {
        let s = example_52();
        assert_eq!(s.distance(1, 2).unwrap(), 1);
        assert_eq!(s.distance(2, 3).unwrap(), 2);
        assert!(!s.is_linear(1).unwrap() && !s.is_linear(2).unwrap() && s.is_linear(3).unwrap());
        assert_eq!(weight_vector(&s, 1).unwrap(), WeightVector::new(vec![1, 1]));
    }

    #[test]
    fn first_step_matches_example() {
        let s = example_52();
        let (next, rec) = vdc_step(&s, 1).unwrap();
        let v = ["m", "h1", "h2", "W"];
        let want = [
            ("1", "0", false),
            ("2", "m + h1", true),
            ("3", "(m + h1)^2", true),
            ("2'", "m + h2", true),
            ("3'", "(m + h2)^2", true),
        ];
        assert_eq!(next.nodes().len(), 5);
        for (node, (label, poly, active)) in next.nodes().iter().zip(want) {
            assert_eq!(node.label, label);
            assert_eq!(node.poly, p(poly, &v));
            assert_eq!(node.active, active);
        }
        assert_eq!(rec.reference, 2);
        assert_eq!(rec.weight_before, WeightVector::new(vec![1, 1]));
        assert_eq!(rec.weight_after, WeightVector::new(vec![0, 1]));
    }

    #[test]
    fn ordinal_order() {
        let w = |v: &[u32]| WeightVector::new(v.to_vec());
        assert!(w(&[5, 0]) < w(&[0, 1]));
        assert!(w(&[9, 9, 0, 0]) < w(&[0, 0, 1]));
        assert!(w(&[1, 2]) < w(&[2, 2]));
        assert_eq!(w(&[1, 0, 0]), w(&[1]));
        assert!(w(&[]) < w(&[1]));
    }

    #[test]
    fn linear_input_needs_no_steps() {
        let sys = make_system(&[p("0", &["m"]), p("m", &["m"])], true).unwrap();
        let r = linearize(&sys).unwrap();
        assert!(r.steps.is_empty());
        assert_eq!(r.b.len(), 1);
        assert_eq!(r.qvec.len(), 2);
    }

    #[test]
    fn squares_linearize() {
        let sys = make_system(&[p("0", &["m"]), p("m", &["m"]), p("m^2", &["m"])], true).unwrap();
        let r = linearize(&sys).unwrap();
        assert!(!r.steps.is_empty());
        for s in &r.steps {
            assert!(s.weight_after < s.weight_before);
        }
        assert!(r.final_system.is_linear_system().unwrap());
    }

    #[test]
    fn w_form_integrality() {
        let sys = make_system(&[p("0", &["m"]), p("m^2 + m", &["m"])], true).unwrap();
        assert_eq!(sys.nodes()[1].poly, p("W*m^2 + m", &V0));
        assert!(make_system(&[p("m + 1", &["m"])], true).is_err());
        assert!(make_system(&[p("m", &["m"]), p("m", &["m"])], false).is_err());
    }

    #[test]
    fn copy_labels_stay_unique() {
        let mut sys = example_52();
        for _ in 0..2 {
            let t = next_target(&sys).unwrap().unwrap();
            sys = vdc_step(&sys, t).unwrap().0;
        }
        let mut labels: Vec<&str> = sys.nodes().iter().map(|n| n.label.as_str()).collect();
        let len = labels.len();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), len);
    }
}
