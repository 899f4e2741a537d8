//! Circle-valued 2-cocycles, projective (almost) representations, twisted
//! regular representations, the Connes-type extraction of almost invariant
//! vectors, and phase trivialization.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{abelian_pair_coords, FiniteGroup, GroupElement, GroupKind};
use crate::linalg::{
    hermitian_eigen, hs_distance, kron, op_norm, svd_top, CMat, CVec, Tolerances, C64,
};
use crate::rep::UnitaryRep;

type Evaluator = dyn Fn(&GroupElement, &GroupElement) -> Result<C64> + Send + Sync;

/// A 2-cocycle given by an evaluator with a memo table.
#[derive(Clone)]
pub struct Cocycle2 {
    eval: Arc<Evaluator>,
    memo: Arc<Mutex<HashMap<(GroupElement, GroupElement), C64>>>,
    description: String,
}

impl fmt::Debug for Cocycle2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cocycle2({})", self.description)
    }
}

impl Cocycle2 {
    pub fn new(
        description: impl Into<String>,
        eval: impl Fn(&GroupElement, &GroupElement) -> Result<C64> + Send + Sync + 'static,
    ) -> Self {
        Cocycle2 { eval: Arc::new(eval), memo: Arc::default(), description: description.into() }
    }

    pub fn trivial() -> Self {
        Self::new("trivial", |_, _| Ok(C64::new(1.0, 0.0)))
    }

    /// `c((a,b),(a',b')) = w^{a b'}` on `(Z/n)^2`, `w = exp(2 pi i / n)`.
    pub fn heisenberg(n: u64) -> Self {
        Self::new(format!("heisenberg:{n}"), move |g, h| {
            let (a, _) = abelian_pair_coords(g).ok_or_else(|| Error::InvalidElement(g.key()))?;
            let (_, b2) = abelian_pair_coords(h).ok_or_else(|| Error::InvalidElement(h.key()))?;
            let k = (a * b2) % n;
            Ok(C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        })
    }

    /// `d mu (g,h) = mu(g) mu(h) / mu(gh)`.
    pub fn coboundary(mu: HashMap<GroupElement, C64>) -> Self {
        let mu = Arc::new(mu);
        Self::new("coboundary", move |g, h| {
            let get = |x: &GroupElement| {
                mu.get(x).copied().ok_or_else(|| Error::Unevaluable(format!("phase table lacks {}", x.key())))
            };
            Ok(get(g)? * get(h)? / get(&g.mul(h)?)?)
        })
    }

    pub fn from_table(table: HashMap<(GroupElement, GroupElement), C64>) -> Self {
        let table = Arc::new(table);
        Self::new("table", move |g, h| {
            table
                .get(&(g.clone(), h.clone()))
                .copied()
                .ok_or_else(|| Error::Unevaluable(format!("cocycle table lacks ({}, {})", g.key(), h.key())))
        })
    }

    /// Pointwise product `c * c'`.
    pub fn times(&self, other: &Cocycle2) -> Self {
        let (a, b) = (self.clone(), other.clone());
        Self::new(format!("{}*{}", self.description, other.description), move |g, h| {
            Ok(a.eval(g, h)? * b.eval(g, h)?)
        })
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn eval(&self, g: &GroupElement, h: &GroupElement) -> Result<C64> {
        let key = (g.clone(), h.clone());
        if let Some(v) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(*v);
        }
        let v = (self.eval)(g, h)?;
        self.memo.lock().expect("memo lock").insert(key, v);
        Ok(v)
    }

    /// Parses `trivial`, `heisenberg:n`, `coboundary:<phase file>` or
    /// `table:<table file>`; files hold JSON keyed by element keys.
    pub fn from_descriptor(desc: &str, kind: GroupKind) -> Result<Self> {
        if desc == "trivial" {
            return Ok(Self::trivial());
        }
        if let Some(n) = desc.strip_prefix("heisenberg:") {
            let n: u64 = n.parse().map_err(|e| Error::Parse(format!("heisenberg modulus: {e}")))?;
            return Ok(Self::heisenberg(n));
        }
        if let Some(path) = desc.strip_prefix("coboundary:") {
            let doc: PhaseTableDoc = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            return Ok(Self::coboundary(doc.to_map(kind)?));
        }
        if let Some(path) = desc.strip_prefix("table:") {
            let doc: CocycleTableDoc = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            let mut table = HashMap::new();
            for e in doc.entries {
                let v = C64::new(e.value[0], e.value[1]);
                table.insert((kind.parse_element(&e.g)?, kind.parse_element(&e.h)?), v);
            }
            return Ok(Self::from_table(table));
        }
        Err(Error::Parse(format!("unknown cocycle descriptor `{desc}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseEntry {
    pub element: String,
    pub value: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseTableDoc {
    pub phases: Vec<PhaseEntry>,
}

impl PhaseTableDoc {
    pub fn to_map(&self, kind: GroupKind) -> Result<HashMap<GroupElement, C64>> {
        self.phases
            .iter()
            .map(|e| Ok((kind.parse_element(&e.element)?, C64::new(e.value[0], e.value[1]))))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleEntry {
    pub g: String,
    pub h: String,
    pub value: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleTableDoc {
    pub entries: Vec<CocycleEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Obstruction {
    pub g: String,
    pub h: String,
    pub beta: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleReport {
    pub triples_checked: usize,
    pub max_identity_violation: f64,
    pub max_modulus_violation: f64,
    /// `c(g,h) / c(h,g)` on commuting pairs.
    pub obstructions: Vec<Obstruction>,
    /// Some commuting pair has `beta != 1` (beyond `1e-9`).
    pub non_coboundary: bool,
}

/// Cocycle identity on all triples and the commuting-pair obstruction.
pub fn cocycle_checks(c: &Cocycle2, test_set: &[GroupElement]) -> Result<CocycleReport> {
    let mut identity_violation: f64 = 0.0;
    let mut modulus_violation: f64 = 0.0;
    let mut triples = 0;
    for g in test_set {
        for h in test_set {
            let gh = g.mul(h)?;
            let cgh = c.eval(g, h)?;
            modulus_violation = modulus_violation.max((cgh.norm() - 1.0).abs());
            for k in test_set {
                let lhs = cgh * c.eval(&gh, k)?;
                let rhs = c.eval(h, k)? * c.eval(g, &h.mul(k)?)?;
                identity_violation = identity_violation.max((lhs - rhs).norm());
                triples += 1;
            }
        }
    }
    let mut obstructions = Vec::new();
    for (i, g) in test_set.iter().enumerate() {
        for h in &test_set[i..] {
            if g.mul(h)? == h.mul(g)? {
                let beta = c.eval(g, h)? / c.eval(h, g)?;
                obstructions.push(Obstruction { g: g.key(), h: h.key(), beta: [beta.re, beta.im] });
            }
        }
    }
    let non_coboundary =
        obstructions.iter().any(|o| (C64::new(o.beta[0], o.beta[1]) - 1.0).norm() > 1e-9);
    Ok(CocycleReport {
        triples_checked: triples,
        max_identity_violation: identity_violation,
        max_modulus_violation: modulus_violation,
        obstructions,
        non_coboundary,
    })
}

/// A unitary assigned to each element of a finite set of group elements.
#[derive(Clone, Debug)]
pub struct ElementMap {
    elements: Vec<GroupElement>,
    index: HashMap<GroupElement, usize>,
    matrices: Vec<CMat>,
}

impl ElementMap {
    pub fn new(pairs: Vec<(GroupElement, CMat)>) -> Result<Self> {
        let dim = pairs.first().map(|(_, m)| m.nrows()).unwrap_or(0);
        let mut elements = Vec::with_capacity(pairs.len());
        let mut matrices = Vec::with_capacity(pairs.len());
        let mut index = HashMap::new();
        for (g, m) in pairs {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch("element images must share one square shape".into()));
            }
            if index.insert(g.clone(), elements.len()).is_some() {
                return Err(Error::InvalidParameter(format!("element {} listed twice", g.key())));
            }
            elements.push(g);
            matrices.push(m);
        }
        Ok(ElementMap { elements, index, matrices })
    }

    /// `g -> rep(g)` on the given elements.
    pub fn from_rep(rep: &UnitaryRep, elements: &[GroupElement]) -> Result<Self> {
        Self::new(elements.iter().map(|g| Ok((g.clone(), rep.evaluate_element(g)?))).collect::<Result<_>>()?)
    }

    pub fn dim(&self) -> usize {
        self.matrices.first().map(|m| m.nrows()).unwrap_or(0)
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn get(&self, g: &GroupElement) -> Option<&CMat> {
        self.index.get(g).map(|&i| &self.matrices[i])
    }

    fn image(&self, g: &GroupElement) -> Result<&CMat> {
        self.get(g).ok_or_else(|| Error::Unevaluable(g.key()))
    }

    pub fn map_matrices(&self, mut f: impl FnMut(&GroupElement, &CMat) -> CMat) -> Self {
        ElementMap {
            elements: self.elements.clone(),
            index: self.index.clone(),
            matrices: self.elements.iter().zip(&self.matrices).map(|(g, m)| f(g, m)).collect(),
        }
    }

    /// Pairs `(g,h)` with `g`, `h` and `gh` all in the domain.
    pub fn closed_pairs(&self) -> Result<Vec<(GroupElement, GroupElement)>> {
        let mut out = Vec::new();
        for g in &self.elements {
            for h in &self.elements {
                if self.index.contains_key(&g.mul(h)?) {
                    out.push((g.clone(), h.clone()));
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct ProjectiveAlmostRep {
    pub map: ElementMap,
    pub cocycle: Cocycle2,
}

impl ProjectiveAlmostRep {
    /// `max ||pi(g)pi(h) - c(g,h) pi(gh)||_2` over the pairs (all closed
    /// pairs when `None`).
    pub fn defect(&self, pairs: Option<&[(GroupElement, GroupElement)]>) -> Result<f64> {
        let owned;
        let pairs = match pairs {
            Some(p) => p,
            None => {
                owned = self.map.closed_pairs()?;
                &owned
            }
        };
        let mut d: f64 = 0.0;
        for (g, h) in pairs {
            let lhs = self.map.image(g)? * self.map.image(h)?;
            let rhs = self.map.image(&g.mul(h)?)? * self.cocycle.eval(g, h)?;
            d = d.max(hs_distance(&lhs, &rhs));
        }
        Ok(d)
    }

    /// `pi (x) conj(pi)` with the trivial cocycle.
    pub fn tensor_conjugate(&self) -> ProjectiveAlmostRep {
        ProjectiveAlmostRep {
            map: self.map.map_matrices(|_, m| kron(m, &crate::linalg::conj(m))),
            cocycle: Cocycle2::trivial(),
        }
    }
}

/// `(u_g)_{gh,h} = c(g,h)` for every element of a finite group.
pub fn twisted_regular_rep(group: &FiniteGroup, c: &Cocycle2) -> Result<ProjectiveAlmostRep> {
    let n = group.order();
    let mut pairs = Vec::with_capacity(n);
    for (gi, g) in group.elements().iter().enumerate() {
        let mut u = CMat::zeros(n, n);
        for (hi, h) in group.elements().iter().enumerate() {
            u[(group.mul(gi, hi), hi)] = c.eval(g, h)?;
        }
        pairs.push((g.clone(), u));
    }
    Ok(ProjectiveAlmostRep { map: ElementMap::new(pairs)?, cocycle: c.clone() })
}

/// Largest admissible threshold: `(1 - a)^2 / 2` with `a - sqrt(1 - a^2) = 1/2`.
pub fn theta0_supremum() -> f64 {
    let a = (1.0 + 7f64.sqrt()) / 4.0;
    (1.0 - a).powi(2) / 2.0
}

/// A fixed admissible threshold strictly below [`theta0_supremum`].
pub fn theta0_default() -> f64 {
    0.0039
}

/// Bisection on `1 - sqrt(2t) - sqrt(1 - (1 - sqrt(2t))^2) = 1/2`.
pub fn theta0_bisect(tol: f64) -> f64 {
    let g = |t: f64| {
        let a = 1.0 - (2.0 * t).sqrt();
        a - (1.0 - a * a).max(0.0).sqrt() - 0.5
    };
    let (mut lo, mut hi) = (0.0, 0.04);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConnesResult {
    pub eta: CVec,
    pub lambda1: f64,
    pub lambda2: f64,
    pub min_overlap: f64,
    pub epsilon_measured: f64,
    pub witness_distance: f64,
    /// `sqrt(1 - 8 eps_measured)`.
    pub overlap_bound: f64,
    pub lambda1_ok: bool,
    pub simple_top: bool,
    pub overlap_ok: bool,
}

impl ConnesResult {
    pub fn pass(&self) -> bool {
        self.lambda1_ok && self.simple_top && self.overlap_ok
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ConnesOptions {
    pub theta0: f64,
    pub epsilon_claim: f64,
}

impl Default for ConnesOptions {
    fn default() -> Self {
        ConnesOptions { theta0: theta0_default(), epsilon_claim: 0.125 }
    }
}

/// Top right-singular vector of `T` and its overlaps with `U_i`, after
/// checking the hypotheses (unit Frobenius norm, a rank-one witness within
/// `theta0`, almost invariance within the claimed epsilon).
pub fn connes_extract(
    unitaries: &[CMat],
    t: &CMat,
    witness: &CVec,
    opts: &ConnesOptions,
    tol: &Tolerances,
) -> Result<ConnesResult> {
    let n = t.nrows();
    if t.ncols() != n || witness.len() != n || unitaries.iter().any(|u| u.shape() != (n, n)) {
        return Err(Error::DimensionMismatch("T, witness and unitaries must act on one space".into()));
    }
    let tf = t.norm();
    if (tf - 1.0).abs() > 1e-9 {
        return Err(Error::Hypothesis(format!("||T||_F = {tf}, expected 1")));
    }
    if (witness.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::Hypothesis("witness is not a unit vector".into()));
    }
    let witness_distance = (t - witness * witness.adjoint()).norm();
    if witness_distance >= opts.theta0 {
        return Err(Error::Hypothesis(format!(
            "||T - xi xi*||_F = {witness_distance} is not below theta0 = {}",
            opts.theta0
        )));
    }
    if opts.epsilon_claim > 0.125 {
        return Err(Error::Hypothesis(format!("epsilon {} exceeds 1/8", opts.epsilon_claim)));
    }
    let eps = unitaries.iter().map(|u| (u * t * u.adjoint() - t).norm()).fold(0.0, f64::max);
    if eps > opts.epsilon_claim {
        return Err(Error::Hypothesis(format!(
            "max ||U T U* - T||_F = {eps} exceeds the claimed {}",
            opts.epsilon_claim
        )));
    }
    let top = svd_top(t)?;
    let eta = top.top_right_vector;
    let min_overlap = unitaries
        .iter()
        .map(|u| (eta.adjoint() * u * &eta)[(0, 0)].norm())
        .fold(f64::INFINITY, f64::min);
    let min_overlap = if unitaries.is_empty() { 1.0 } else { min_overlap };
    let overlap_bound = (1.0 - 8.0 * eps).max(0.0).sqrt();
    Ok(ConnesResult {
        lambda1_ok: top.lambda1 >= 0.5,
        simple_top: top.lambda1 - top.lambda2 > tol.eig_cluster,
        // at eps = 0 the strict bound degenerates to equality
        overlap_ok: min_overlap > overlap_bound || (eps == 0.0 && min_overlap >= 1.0 - 1e-12),
        eta,
        lambda1: top.lambda1,
        lambda2: top.lambda2,
        min_overlap,
        epsilon_measured: eps,
        witness_distance,
        overlap_bound,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CornerConnesResult {
    /// In `pM_n`, normalized to `||eta||_2 = ||p||_2`.
    pub eta: CMat,
    pub lemma: ConnesResult,
    pub eta_op: f64,
    pub xi_op: f64,
    /// `4 ||xi||_op / ||p||_2`, the bound the argument delivers.
    pub op_bound: f64,
    pub op_bound_ok: bool,
    /// Whether the sharper `2 ||xi||_op / ||p||_2` also holds here.
    pub factor_two_holds: bool,
    /// `min_i |<u_i eta v_i^*, eta>| / ||p||_2^2`.
    pub min_overlap: f64,
}

/// The corner form: `xi` in `pM (x) conj(pM)` given as an `n^2 x n^2`
/// matrix (`kron` layout), `u_i` unitaries of `pMp` given on the range of
/// `p` (`r x r`) and `v_i` unitaries of `M_n`. The lemma runs on
/// `H = pM_n` with the norm `||x||_2 / ||p||_2` and `U_i x = u_i x v_i^*`.
pub fn connes_corner(
    us: &[CMat],
    vs: &[CMat],
    p: &CMat,
    xi: &CMat,
    opts: &ConnesOptions,
    tol: &Tolerances,
) -> Result<CornerConnesResult> {
    let n = p.nrows();
    if us.len() != vs.len() {
        return Err(Error::DimensionMismatch("one u_i per v_i expected".into()));
    }
    if xi.shape() != (n * n, n * n) {
        return Err(Error::DimensionMismatch(format!("xi must be {0}x{0}", n * n)));
    }
    crate::linalg::is_projection(p, tol.unitary)?;
    let (vals, vecs) = hermitian_eigen(p, tol.herm)?;
    let range: Vec<usize> = (0..n).filter(|&i| vals[i] > 0.5).collect();
    let r = range.len();
    let v = CMat::from_fn(n, r, |i, k| vecs[(i, range[k])]);
    let p_sq = p.trace().re / n as f64;
    // realignment: T[(i,j),(k,l)] = X[(i,k),(j,l)] / (n ||p||_2^2)
    let t_full = CMat::from_fn(n * n, n * n, |row, col| {
        let (i, j) = (row / n, row % n);
        let (k, l) = (col / n, col % n);
        xi[(i * n + k, j * n + l)] / (n as f64 * p_sq)
    });
    // orthonormal basis of vec(pM_n): columns of V (x) I
    let w = kron(&v, &crate::linalg::identity(n));
    let t = w.adjoint() * &t_full * &w;
    let mut big_us = Vec::with_capacity(us.len());
    for (u, vv) in us.iter().zip(vs) {
        if u.shape() != (r, r) || vv.shape() != (n, n) {
            return Err(Error::DimensionMismatch("u_i must be rank(p) square, v_i n x n".into()));
        }
        big_us.push(kron(u, &crate::linalg::conj(vv)));
    }
    // witness p (x) conj(p): the unit vector p / ||p||_H, here vec(V^* p) normalized
    let pw = w.adjoint() * CVec::from_iterator(n * n, p.transpose().iter().copied());
    let pw = &pw / C64::new(pw.norm(), 0.0);
    let lemma = connes_extract(&big_us, &t, &pw, opts, tol)?;
    // back to pM_n: x = V y, scaled so that ||x||_2 = ||p||_2
    let y = &lemma.eta;
    let mut eta = CMat::zeros(n, n);
    let x_r = CMat::from_fn(r, n, |a, j| y[a * n + j]);
    eta += &v * x_r;
    let scale = (n as f64 * p_sq).sqrt() / eta.norm();
    let eta = eta * C64::new(scale, 0.0);
    let eta_op = op_norm(&eta);
    let xi_op = op_norm(xi);
    let p_norm = p_sq.sqrt();
    let mut min_overlap = f64::INFINITY;
    for (u, vv) in us.iter().zip(vs) {
        let ul = &v * u * v.adjoint();
        let moved = &ul * &eta * vv.adjoint();
        let inner = (eta.adjoint() * moved).trace() / C64::new(n as f64, 0.0);
        min_overlap = min_overlap.min(inner.norm() / p_sq);
    }
    if us.is_empty() {
        min_overlap = 1.0;
    }
    Ok(CornerConnesResult {
        op_bound: 4.0 * xi_op / p_norm,
        op_bound_ok: eta_op <= 4.0 * xi_op / p_norm + 1e-12,
        factor_two_holds: eta_op <= 2.0 * xi_op / p_norm + 1e-12,
        eta,
        lemma,
        eta_op,
        xi_op,
        min_overlap,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrivializationStatus {
    Trivialized,
    Residual,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrivializationResult {
    pub phases: Vec<(GroupElement, C64)>,
    pub coboundary_residual: f64,
    pub status: TrivializationStatus,
}

#[derive(Clone, Copy, Debug)]
pub struct TrivializationOptions {
    pub phase_floor: f64,
    pub trivial_tol: f64,
}

impl Default for TrivializationOptions {
    fn default() -> Self {
        TrivializationOptions { phase_floor: 1e-6, trivial_tol: 1e-3 }
    }
}

/// `lambda(g)` makes `<pi(g) eta rho(g)^*, lambda(g) eta>` positive; the
/// residual is `max |lambda(g) lambda(h) lambda(gh)^{-1} - c(g,h)|` over
/// pairs of the test set whose product is also in it. The gauge
/// `lambda(e) = 1` is applied when the identity is tested.
pub fn phase_trivialization(
    par: &ProjectiveAlmostRep,
    rho: &ElementMap,
    eta: &CMat,
    test_set: &[GroupElement],
    opts: &TrivializationOptions,
) -> Result<TrivializationResult> {
    let n = eta.nrows();
    let mut phases: Vec<(GroupElement, C64)> = Vec::with_capacity(test_set.len());
    for g in test_set {
        let moved = par.map.image(g)? * eta * rho.image(g)?.adjoint();
        let inner = (eta.adjoint() * moved).trace() / C64::new(n as f64, 0.0);
        if inner.norm() < opts.phase_floor {
            return Err(Error::Hypothesis(format!("<pi(g) eta rho(g)*, eta> vanishes at g = {}", g.key())));
        }
        phases.push((g.clone(), inner / inner.norm()));
    }
    if let Some(&(_, le)) = phases.iter().find(|(g, _)| g.is_identity()) {
        let fix = le.conj();
        for (_, l) in phases.iter_mut() {
            *l *= fix;
        }
    }
    let table: HashMap<&GroupElement, C64> = phases.iter().map(|(g, l)| (g, *l)).collect();
    let mut residual: f64 = 0.0;
    for g in test_set {
        for h in test_set {
            if let Some(lgh) = table.get(&g.mul(h)?) {
                let v = table[g] * table[h] / lgh - par.cocycle.eval(g, h)?;
                residual = residual.max(v.norm());
            }
        }
    }
    let status = if residual < opts.trivial_tol {
        TrivializationStatus::Trivialized
    } else {
        TrivializationStatus::Residual
    };
    Ok(TrivializationResult { phases, coboundary_residual: residual, status })
}

pub fn read_phase_table(path: &Path, kind: GroupKind) -> Result<HashMap<GroupElement, C64>> {
    let doc: PhaseTableDoc = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    doc.to_map(kind)
}
