//! Unitary (almost) representations given by generator matrices, their
//! extension to the group ring, defect reports and the generator-wise
//! distance between representations.

use std::path::Path;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{
    projective_line_action, FiniteGroup, FreeWord, GeneratingSet, GroupElement, GroupKind,
    GroupRingElement, Sl2Int,
};
use crate::linalg::{
    self, d2_distance, hs_distance, identity, normalized_trace, op_norm, unitary_deviation,
    CMat, MatrixDoc, Tolerances, C64,
};

/// Norm used for defects.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    /// Normalized Hilbert-Schmidt norm.
    #[default]
    Hs,
    /// Operator norm.
    Op,
}

impl NormKind {
    pub fn distance(&self, a: &CMat, b: &CMat) -> f64 {
        match self {
            NormKind::Hs => hs_distance(a, b),
            NormKind::Op => op_norm(&(a - b)),
        }
    }
}

/// Largest group enumerated to resolve words for finite matrix groups.
const MAX_ENUMERATED_ORDER: usize = 50_000;
/// Ball radius searched for non-finite groups without a normal form.
const WORD_SEARCH_RADIUS: usize = 6;

/// Unitary matrices assigned to named generators. Inverses are never stored:
/// a letter `-i` evaluates to the adjoint of generator `i`.
#[derive(Debug)]
pub struct UnitaryRep {
    dim: usize,
    gens: GeneratingSet,
    matrices: Vec<CMat>,
    finite: OnceLock<Option<FiniteGroup>>,
}

impl Clone for UnitaryRep {
    fn clone(&self) -> Self {
        UnitaryRep {
            dim: self.dim,
            gens: self.gens.clone(),
            matrices: self.matrices.clone(),
            finite: OnceLock::new(),
        }
    }
}

impl UnitaryRep {
    pub fn new(gens: GeneratingSet, matrices: Vec<CMat>, tol: &Tolerances) -> Result<Self> {
        if matrices.len() != gens.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} generators but {} matrices",
                gens.len(),
                matrices.len()
            )));
        }
        let dim = matrices.first().map(|m| m.nrows()).unwrap_or(1);
        for (name, m) in gens.names().iter().zip(&matrices) {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "generator `{name}` is {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            linalg::ensure_finite(m)?;
            let deviation = unitary_deviation(m);
            if deviation > tol.unitary {
                return Err(Error::NotUnitary { deviation });
            }
        }
        // generators that are formal inverses of each other must match
        let els = gens.elements();
        for i in 0..els.len() {
            for j in i..els.len() {
                if els[j] == els[i].inverse() {
                    let dev = (&matrices[j] - matrices[i].adjoint()).norm();
                    if dev > tol.unitary * (dim as f64).sqrt().max(1.0) {
                        return Err(Error::InvalidParameter(format!(
                            "generators `{}` and `{}` are inverse elements but their matrices differ by {dev:e}",
                            gens.names()[i],
                            gens.names()[j]
                        )));
                    }
                }
            }
        }
        Ok(UnitaryRep { dim, gens, matrices, finite: OnceLock::new() })
    }

    /// Representation of the free group on `names`.
    pub fn free(names: &[&str], matrices: Vec<CMat>, tol: &Tolerances) -> Result<Self> {
        let kind = GroupKind::FreeWord { rank: names.len() };
        let gens = GeneratingSet::new(
            kind,
            names
                .iter()
                .enumerate()
                .map(|(i, n)| (n.to_string(), FreeWord::letter(i as i32 + 1).into()))
                .collect(),
            true,
        )?;
        Self::new(gens, matrices, tol)
    }

    /// All generators act by the identity of dimension `dim`.
    pub fn trivial(gens: &GeneratingSet, dim: usize) -> Self {
        UnitaryRep {
            dim,
            gens: gens.clone(),
            matrices: vec![identity(dim); gens.len()],
            finite: OnceLock::new(),
        }
    }

    /// Left regular representation `(u_s)_{sh,h} = 1` of a finite group.
    pub fn regular(group: &FiniteGroup) -> Self {
        let n = group.order();
        let gens = group.generating_set().clone();
        let matrices = gens
            .elements()
            .iter()
            .map(|s| {
                let si = group.index_of(s).expect("generator in group");
                permutation_matrix(&group.left_translation(si))
            })
            .collect();
        UnitaryRep { dim: n, gens, matrices, finite: OnceLock::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generating_set(&self) -> &GeneratingSet {
        &self.gens
    }

    pub fn names(&self) -> &[String] {
        self.gens.names()
    }

    pub fn matrices(&self) -> &[CMat] {
        &self.matrices
    }

    pub fn matrix(&self, name: &str) -> Result<&CMat> {
        self.gens
            .index_of(name)
            .map(|i| &self.matrices[i])
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    /// Replaces generator matrices without revalidation; used by search
    /// routines that keep iterates unitary themselves.
    pub fn with_matrices(&self, matrices: Vec<CMat>) -> Self {
        assert_eq!(matrices.len(), self.matrices.len());
        UnitaryRep {
            dim: matrices.first().map(|m| m.nrows()).unwrap_or(self.dim),
            gens: self.gens.clone(),
            matrices,
            finite: OnceLock::new(),
        }
    }

    /// Image of a single letter (`-i` is the adjoint of generator `i`).
    pub fn letter(&self, l: i32) -> Result<CMat> {
        let i = l.unsigned_abs() as usize;
        if i == 0 || i > self.matrices.len() {
            return Err(Error::UnknownGenerator(format!("letter {l}")));
        }
        let m = &self.matrices[i - 1];
        Ok(if l > 0 { m.clone() } else { m.adjoint() })
    }

    /// Product of the generator images in word order; the empty word gives
    /// the identity.
    pub fn evaluate_word(&self, w: &FreeWord) -> Result<CMat> {
        let mut acc = identity(self.dim);
        for &l in w.letters() {
            let i = l.unsigned_abs() as usize;
            if i == 0 || i > self.matrices.len() {
                return Err(Error::UnknownGenerator(format!("letter {l}")));
            }
            let m = &self.matrices[i - 1];
            acc = if l > 0 { &acc * m } else { &acc * m.adjoint() };
        }
        Ok(acc)
    }

    /// Parses `name`, `name^k` tokens separated by whitespace into a word
    /// over this representation's generators.
    pub fn parse_word(&self, text: &str) -> Result<FreeWord> {
        parse_word(self.gens.names(), text)
    }

    fn finite_group(&self) -> Option<&FiniteGroup> {
        self.finite
            .get_or_init(|| match self.gens.kind() {
                GroupKind::ModMatrix { .. } => {
                    FiniteGroup::generate(&self.gens, MAX_ENUMERATED_ORDER).ok()
                }
                _ => None,
            })
            .as_ref()
    }

    /// A word over the generators representing `g`, if one can be found.
    pub fn word_for(&self, g: &GroupElement) -> Result<FreeWord> {
        if g.is_identity() {
            return Ok(FreeWord::identity());
        }
        let els = self.gens.elements();
        if let Some(i) = els.iter().position(|x| x == g) {
            return Ok(FreeWord::letter(i as i32 + 1));
        }
        if let Some(i) = els.iter().position(|x| x.inverse() == *g) {
            return Ok(FreeWord::letter(-(i as i32 + 1)));
        }
        match (self.gens.kind(), g) {
            (GroupKind::FreeWord { .. }, GroupElement::Free(w)) => {
                // Translate letters of the free group into generator letters.
                let mut letters = Vec::with_capacity(w.len());
                for &l in w.letters() {
                    let base: GroupElement = FreeWord::letter(l.abs()).into();
                    let i = els
                        .iter()
                        .position(|x| *x == base)
                        .ok_or_else(|| Error::Unevaluable(g.key()))?;
                    letters.push(if l > 0 { i as i32 + 1 } else { -(i as i32 + 1) });
                }
                FreeWord::from_letters(&letters)
            }
            (GroupKind::ModMatrix { .. }, _) => {
                let group = self.finite_group().ok_or_else(|| Error::Unevaluable(g.key()))?;
                let i = group.index_of(g).ok_or_else(|| Error::Unevaluable(g.key()))?;
                Ok(group.word(i).clone())
            }
            (GroupKind::Sl2Int, GroupElement::Sl2(x)) => {
                let s = els.iter().position(|e| *e == Sl2Int::s().into());
                let t = els.iter().position(|e| *e == Sl2Int::t().into());
                if let (Some(s), Some(t)) = (s, t) {
                    let mut letters = Vec::new();
                    for (l, k) in x.st_word() {
                        let base = if l == 0 { s } else { t } as i32 + 1;
                        let k = k.to_i64().ok_or_else(|| Error::Unevaluable(g.key()))?;
                        let letter = if k > 0 { base } else { -base };
                        letters.extend(std::iter::repeat_n(letter, k.unsigned_abs() as usize));
                    }
                    return FreeWord::from_letters(&letters);
                }
                self.gens
                    .ball_words(WORD_SEARCH_RADIUS)?
                    .into_iter()
                    .find(|(h, _)| h == g)
                    .map(|(_, w)| w)
                    .ok_or_else(|| Error::Unevaluable(g.key()))
            }
            _ => Err(Error::Unevaluable(g.key())),
        }
    }

    /// `pi(g)` through the word returned by [`Self::word_for`].
    pub fn evaluate_element(&self, g: &GroupElement) -> Result<CMat> {
        if let (GroupElement::Sl2(x), Some(m)) = (g, self.st_power_shortcut(g)) {
            let _ = x;
            return m;
        }
        self.evaluate_word(&self.word_for(g)?)
    }

    /// Powers of `S` and `T` evaluated by repeated squaring, avoiding long
    /// words for elements such as `T^k` with large `k`.
    fn st_power_shortcut(&self, g: &GroupElement) -> Option<Result<CMat>> {
        let GroupElement::Sl2(x) = g else { return None };
        if self.gens.kind() != GroupKind::Sl2Int {
            return None;
        }
        let els = self.gens.elements();
        let s = els.iter().position(|e| *e == Sl2Int::s().into())?;
        let t = els.iter().position(|e| *e == Sl2Int::t().into())?;
        if els.iter().any(|e| e == g || e.inverse() == *g) {
            return None;
        }
        let mut acc = identity(self.dim);
        for (l, k) in x.st_word() {
            let base = &self.matrices[if l == 0 { s } else { t }];
            let m = if k.is_negative() {
                matrix_power(&base.adjoint(), &(-k))
            } else {
                matrix_power(base, &k)
            };
            acc *= m;
        }
        Some(Ok(acc))
    }

    /// Linear extension `pi~(sum a_g g) = sum a_g pi(g)`.
    pub fn ring_extension_apply(&self, xi: &GroupRingElement) -> Result<CMat> {
        if xi.kind() != self.gens.kind() {
            return Err(Error::MixedGroups(xi.kind().to_string(), self.gens.kind().to_string()));
        }
        let mut out = CMat::zeros(self.dim, self.dim);
        for (g, c) in xi.terms() {
            out += self.evaluate_element(g)? * c.to_c64();
        }
        Ok(out)
    }

    /// `pi~(Delta_S) = 1 - (1/|S|) sum_{s in S} pi(s)`, inverses through
    /// adjoints.
    pub fn laplacian_matrix(&self) -> Result<CMat> {
        if !self.gens.is_symmetric() {
            let _ = self.gens.laplacian()?;
        }
        let sym = self.gens.symmetric_set();
        let mut sum = CMat::zeros(self.dim, self.dim);
        for s in &sym {
            sum += self.letter(s.letter)?;
        }
        Ok(identity(self.dim) - sum / C64::new(sym.len() as f64, 0.0))
    }

    pub fn defect_report(
        &self,
        relators: &[FreeWord],
        pairs: &[(GroupElement, GroupElement)],
        norm: NormKind,
    ) -> Result<DefectReport> {
        let id = identity(self.dim);
        let mut per_relator = Vec::with_capacity(relators.len());
        for r in relators {
            let m = self.evaluate_word(r)?;
            per_relator.push(RelatorDefect { relator: self.word_text(r), defect: norm.distance(&m, &id) });
        }
        let mut pairs_checked = Vec::with_capacity(pairs.len());
        for (g, h) in pairs {
            let gh = g.mul(h)?;
            let lhs = self.evaluate_element(&gh)?;
            let rhs = self.evaluate_element(g)? * self.evaluate_element(h)?;
            pairs_checked.push(PairDefect {
                g: g.key(),
                h: h.key(),
                defect: norm.distance(&lhs, &rhs),
            });
        }
        let max_defect = per_relator
            .iter()
            .map(|r| r.defect)
            .chain(pairs_checked.iter().map(|p| p.defect))
            .fold(0.0, f64::max);
        Ok(DefectReport { norm, per_relator, pairs_checked, max_defect })
    }

    /// Human-readable form of a word using generator names.
    pub fn word_text(&self, w: &FreeWord) -> String {
        if w.is_empty() {
            return "e".into();
        }
        w.letters()
            .iter()
            .map(|&l| {
                let n = &self.gens.names()[l.unsigned_abs() as usize - 1];
                if l > 0 { n.clone() } else { format!("{n}^-1") }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// `d(pi, rho) = max_s d2(pi(s), rho(s))`; dimensions may differ.
    pub fn rep_distance(&self, other: &UnitaryRep) -> Result<f64> {
        if self.names() != other.names() {
            return Err(Error::InvalidParameter(format!(
                "generator alphabets differ: {:?} vs {:?}",
                self.names(),
                other.names()
            )));
        }
        let mut d: f64 = 0.0;
        for (a, b) in self.matrices.iter().zip(&other.matrices) {
            d = d.max(d2_distance(a, b)?);
        }
        Ok(d)
    }

    /// Normalized trace of `pi(g)` for each element.
    pub fn trace_character(&self, elements: &[GroupElement]) -> Result<Vec<C64>> {
        elements.iter().map(|g| Ok(normalized_trace(&self.evaluate_element(g)?))).collect()
    }

    pub fn direct_sum(&self, other: &UnitaryRep) -> Result<UnitaryRep> {
        if self.gens != other.gens {
            return Err(Error::InvalidParameter("direct sum needs equal generating sets".into()));
        }
        let matrices = self
            .matrices
            .iter()
            .zip(&other.matrices)
            .map(|(a, b)| linalg::direct_sum(&[a, b]))
            .collect();
        Ok(self.with_matrices(matrices))
    }

    /// `pi (x) conj(pi)`.
    pub fn tensor_conjugate(&self) -> UnitaryRep {
        let matrices = self.matrices.iter().map(|m| m.kronecker(&linalg::conj(m))).collect();
        self.with_matrices(matrices)
    }

    /// Conjugates every generator image by the unitary `u`.
    pub fn conjugate_by(&self, u: &CMat) -> UnitaryRep {
        let ua = u.adjoint();
        self.with_matrices(self.matrices.iter().map(|m| u * m * &ua).collect())
    }

    pub fn to_doc(&self) -> RepDoc {
        RepDoc {
            dimension: self.dim,
            group: self.gens.kind().to_string(),
            generators: self.gens.names().to_vec(),
            elements: Some(self.gens.elements().iter().map(|g| g.key()).collect()),
            matrices: self.matrices.iter().map(MatrixDoc::from_matrix).collect(),
        }
    }

    pub fn from_doc(doc: &RepDoc, tol: &Tolerances) -> Result<Self> {
        let kind: GroupKind = doc.group.parse()?;
        let elements: Vec<GroupElement> = match (&doc.elements, kind) {
            (Some(keys), _) => {
                if keys.len() != doc.generators.len() {
                    return Err(Error::Parse("elements and generators differ in length".into()));
                }
                keys.iter().map(|k| kind.parse_element(k)).collect::<Result<_>>()?
            }
            (None, GroupKind::FreeWord { .. }) => {
                (0..doc.generators.len()).map(|i| FreeWord::letter(i as i32 + 1).into()).collect()
            }
            (None, _) => {
                return Err(Error::Parse(format!("group `{}` needs generator elements", doc.group)))
            }
        };
        let gens = GeneratingSet::new(
            kind,
            doc.generators.iter().cloned().zip(elements).collect(),
            true,
        )?;
        let matrices: Vec<CMat> =
            doc.matrices.iter().map(MatrixDoc::to_matrix).collect::<Result<_>>()?;
        if matrices.iter().any(|m| m.nrows() != doc.dimension) {
            return Err(Error::Parse(format!("matrix blocks must be {0}x{0}", doc.dimension)));
        }
        Self::new(gens, matrices, tol)
    }

    pub fn read(path: &Path, tol: &Tolerances) -> Result<Self> {
        let doc: RepDoc = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::from_doc(&doc, tol)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(&self.to_doc())?)?;
        Ok(())
    }
}

impl UnitaryRep {
    /// Permutation matrices for each generator (`perm[j]` is the image of
    /// basis vector `j`).
    pub fn from_permutations(gens: &GeneratingSet, perms: &[Vec<usize>], tol: &Tolerances) -> Result<Self> {
        Self::new(gens.clone(), perms.iter().map(|p| permutation_matrix(p)).collect(), tol)
    }

    /// Action of `SL_2(F_n)` (or any 2x2 matrix group mod a prime) on the
    /// projective line.
    pub fn projective_line(gens: &GeneratingSet, tol: &Tolerances) -> Result<Self> {
        let GroupKind::ModMatrix { modulus, size: 2 } = gens.kind() else {
            return Err(Error::InvalidParameter("projective line needs 2x2 matrices mod a prime".into()));
        };
        let perms = gens
            .elements()
            .iter()
            .map(|g| match g {
                GroupElement::Mod(m) => {
                    let e = m.entries();
                    projective_line_action(modulus, [e[0], e[1], e[2], e[3]])
                }
                _ => unreachable!("kind checked by the generating set"),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_permutations(gens, &perms, tol)
    }

    /// Subrepresentation on the span of the orthonormal columns of `v`,
    /// which must be invariant within `tol`.
    pub fn restrict(&self, v: &CMat, tol: f64) -> Result<UnitaryRep> {
        if v.nrows() != self.dim {
            return Err(Error::DimensionMismatch(format!("basis has {} rows, rep dimension {}", v.nrows(), self.dim)));
        }
        let proj = v * v.adjoint();
        let comp = identity(self.dim) - &proj;
        let mut out = Vec::with_capacity(self.matrices.len());
        for m in &self.matrices {
            let leak = (&comp * m * v).norm();
            if leak > tol {
                return Err(Error::InvalidParameter(format!("subspace is not invariant (leak {leak:e})")));
            }
            out.push(v.adjoint() * m * v);
        }
        Ok(UnitaryRep { dim: v.ncols(), gens: self.gens.clone(), matrices: out, finite: OnceLock::new() })
    }

    /// One-dimensional representation by the parity of a permutation rep.
    pub fn sign_of(&self) -> Result<UnitaryRep> {
        let mut out = Vec::with_capacity(self.matrices.len());
        for m in &self.matrices {
            let perm: Option<Vec<usize>> = (0..self.dim)
                .map(|j| (0..self.dim).find(|&i| (m[(i, j)] - C64::new(1.0, 0.0)).norm() < 1e-12))
                .collect();
            let perm = perm.ok_or_else(|| Error::InvalidParameter("not a permutation representation".into()))?;
            out.push(CMat::from_element(1, 1, C64::new(parity(&perm), 0.0)));
        }
        Ok(UnitaryRep { dim: 1, gens: self.gens.clone(), matrices: out, finite: OnceLock::new() })
    }
}

fn parity(perm: &[usize]) -> f64 {
    let mut seen = vec![false; perm.len()];
    let mut sign = 1.0;
    for i in 0..perm.len() {
        if seen[i] {
            continue;
        }
        let mut len = 0;
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            j = perm[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// Orthonormal basis (Helmert columns) of the complement of the constant
/// vector in `C^n`.
pub fn constants_complement(n: usize) -> CMat {
    let mut v = CMat::zeros(n, n.saturating_sub(1));
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            v[(i, k - 1)] = C64::new(1.0 / norm, 0.0);
        }
        v[(k, k - 1)] = C64::new(-(k as f64) / norm, 0.0);
    }
    v
}

/// Rep file: header plus one matrix block per generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepDoc {
    pub dimension: usize,
    pub group: String,
    pub generators: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<String>>,
    pub matrices: Vec<MatrixDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelatorDefect {
    pub relator: String,
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDefect {
    pub g: String,
    pub h: String,
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub norm: NormKind,
    pub per_relator: Vec<RelatorDefect>,
    pub pairs_checked: Vec<PairDefect>,
    pub max_defect: f64,
}

/// Parses whitespace-separated `name` / `name^k` tokens.
pub fn parse_word(names: &[String], text: &str) -> Result<FreeWord> {
    let mut letters = Vec::new();
    let text = text.trim();
    if text == "e" || text.is_empty() {
        return Ok(FreeWord::identity());
    }
    for tok in text.split_whitespace() {
        let (name, pow) = match tok.split_once('^') {
            Some((n, p)) => (
                n,
                p.parse::<i32>().map_err(|e| Error::Parse(format!("exponent in `{tok}`: {e}")))?,
            ),
            None => (tok, 1),
        };
        let i = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))? as i32
            + 1;
        let l = if pow >= 0 { i } else { -i };
        letters.extend(std::iter::repeat_n(l, pow.unsigned_abs() as usize));
    }
    FreeWord::from_letters(&letters)
}

pub fn permutation_matrix(perm: &[usize]) -> CMat {
    let n = perm.len();
    let mut m = CMat::zeros(n, n);
    for (j, &i) in perm.iter().enumerate() {
        m[(i, j)] = C64::new(1.0, 0.0);
    }
    m
}

fn matrix_power(m: &CMat, k: &BigInt) -> CMat {
    let mut k = k.clone();
    let mut base = m.clone();
    let mut acc = identity(m.nrows());
    let two = BigInt::from(2);
    while k > BigInt::from(0) {
        if &k % &two == BigInt::from(1) {
            acc = &acc * &base;
        }
        base = &base * &base;
        k /= &two;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{cyclic_group, integers_group, sl2_mod_generators, ModMatrix};
    use crate::linalg::{c64, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn evaluate_word_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rep = UnitaryRep::free(&["s"], vec![random_unitary(&mut rng, 3)], &tol()).unwrap();
        assert_eq!(rep.evaluate_word(&FreeWord::identity()).unwrap(), identity(3));
        let w = FreeWord::from_letters(&[1]).unwrap().mul(&FreeWord::letter(-1));
        assert!((rep.evaluate_word(&w).unwrap() - identity(3)).norm() < 1e-12);
        // unreduced product s s^-1 evaluated letter by letter
        let m = rep.letter(1).unwrap() * rep.letter(-1).unwrap();
        assert!((m - identity(3)).norm() < 1e-12);
        assert!(matches!(
            rep.evaluate_word(&FreeWord::letter(2)),
            Err(Error::UnknownGenerator(_))
        ));
    }

    #[test]
    fn regular_rep_of_sl2_f2_satisfies_all_relations() {
        // Exhaustive check: every element's word evaluates to the permutation
        // of left translation, so every relator is the identity.
        let g = FiniteGroup::generate(&sl2_mod_generators(2).unwrap(), 100).unwrap();
        let rep = UnitaryRep::regular(&g);
        assert_eq!(rep.dim(), 6);
        for i in 0..g.order() {
            let m = rep.evaluate_word(g.word(i)).unwrap();
            assert_eq!(m, permutation_matrix(&g.left_translation(i)));
        }
        let rels: Vec<FreeWord> =
            ["S^4", "S^2", "T^2", "S T S T S T"].iter().map(|t| rep.parse_word(t).unwrap()).collect();
        let report = rep.defect_report(&rels, &[], NormKind::Hs).unwrap();
        assert!(report.max_defect < 1e-12);
    }

    #[test]
    fn ring_extension_examples() {
        let z2 = FiniteGroup::generate(&cyclic_group(2).unwrap(), 10).unwrap();
        let rep = UnitaryRep::regular(&z2);
        let lap = rep.generating_set().laplacian().unwrap();
        let m = rep.ring_extension_apply(&lap).unwrap();
        let expect = CMat::from_row_slice(
            2,
            2,
            &[c64(1.0, 0.0), c64(-1.0, 0.0), c64(-1.0, 0.0), c64(1.0, 0.0)],
        );
        assert!((m - expect).norm() < 1e-15);
        let triv = UnitaryRep::trivial(&integers_group(), 3);
        let lap = integers_group().laplacian().unwrap();
        assert!(triv.ring_extension_apply(&lap).unwrap().norm() < 1e-15);
    }

    #[test]
    fn rep_distance_examples() {
        let gens = integers_group();
        let a = UnitaryRep::trivial(&gens, 1);
        let b = UnitaryRep::trivial(&gens, 2);
        assert_eq!(a.rep_distance(&a).unwrap(), 0.0);
        assert!((a.rep_distance(&b).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let other = UnitaryRep::trivial(&cyclic_group(3).unwrap(), 1);
        assert!(a.rep_distance(&other).is_err());
    }

    #[test]
    fn characters() {
        let g = FiniteGroup::generate(&sl2_mod_generators(3).unwrap(), 100).unwrap();
        let reg = UnitaryRep::regular(&g);
        let chi = reg.trace_character(g.elements()).unwrap();
        assert!((chi[0] - c64(1.0, 0.0)).norm() < 1e-15);
        assert!(chi[1..].iter().all(|z| z.norm() < 1e-15));
        let triv = UnitaryRep::trivial(g.generating_set(), 4);
        assert!(triv.trace_character(g.elements()).unwrap().iter().all(|z| (*z - 1.0).norm() < 1e-15));
    }

    #[test]
    fn cyclic_regular_characters_converge_to_delta() {
        // Z acting on Z/N by shifts; characters on {-3..3} for N = 4..64.
        let gens = integers_group();
        let ball = gens.cayley_ball(3).unwrap();
        for n in 4..=64u64 {
            let perm: Vec<usize> = (0..n as usize).map(|i| (i + 1) % n as usize).collect();
            let rep = UnitaryRep::new(gens.clone(), vec![permutation_matrix(&perm)], &tol()).unwrap();
            let chi = rep.trace_character(&ball).unwrap();
            for (g, z) in ball.iter().zip(chi) {
                let expect = if g.is_identity() { 1.0 } else { 0.0 };
                assert!((z - expect).norm() < 1e-12, "N={n} g={g}");
            }
        }
    }

    #[test]
    fn sl2_words_evaluate_in_congruence_image() {
        // T^k shortcut and S/T normal form agree with direct reduction mod 3.
        let kind = GroupKind::Sl2Int;
        let gens = GeneratingSet::new(
            kind,
            vec![("S".into(), Sl2Int::s().into()), ("T".into(), Sl2Int::t().into())],
            true,
        )
        .unwrap();
        let modgens = sl2_mod_generators(3).unwrap();
        let g = FiniteGroup::generate(&modgens, 1000).unwrap();
        let reg = UnitaryRep::regular(&g);
        let rep = UnitaryRep::new(gens, reg.matrices().to_vec(), &tol()).unwrap();
        for x in [(1, 0, 3, 1), (5, 3, 3, 2), (1, 100, 0, 1), (-1, 0, 0, -1), (13, 8, 21, 13)] {
            let el = Sl2Int::from_i64(x.0, x.1, x.2, x.3).unwrap();
            let r = el.reduce_mod(3);
            let red: GroupElement =
                ModMatrix::new(3, 2, r.iter().map(|&v| v as i64).collect()).unwrap().into();
            let i = g.index_of(&red).unwrap();
            let direct = permutation_matrix(&g.left_translation(i));
            let m = rep.evaluate_element(&el.into()).unwrap();
            assert!((m - direct).norm() < 1e-9);
        }
    }

    #[test]
    fn inverse_generators_must_match() {
        let kind = GroupKind::Sl2Int;
        let gens = GeneratingSet::new(
            kind,
            vec![("t".into(), Sl2Int::t().into()), ("u".into(), Sl2Int::t().inverse().into())],
            false,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_unitary(&mut rng, 2);
        assert!(UnitaryRep::new(gens.clone(), vec![a.clone(), a.adjoint()], &tol()).is_ok());
        assert!(UnitaryRep::new(gens, vec![a.clone(), a], &tol()).is_err());
    }

    #[test]
    fn symmetric_group_irreducibles() {
        // S_3 as SL_2(F_2): projective line = trivial + standard.
        let gens = sl2_mod_generators(2).unwrap();
        let g = FiniteGroup::generate(&gens, 10).unwrap();
        let pl = UnitaryRep::projective_line(&gens, &tol()).unwrap();
        let std = pl.restrict(&constants_complement(3), 1e-12).unwrap();
        let sign = pl.sign_of().unwrap();
        assert_eq!((std.dim(), sign.dim()), (2, 1));
        // character norms <chi, chi> = 1 certify irreducibility
        for r in [&std, &sign] {
            let chi = r.trace_character(g.elements()).unwrap();
            let d = r.dim() as f64;
            let norm: f64 = chi.iter().map(|z| (z * d).norm_sqr()).sum::<f64>() / 6.0;
            assert!((norm - 1.0).abs() < 1e-12);
        }
        assert!(pl.restrict(&CMat::from_element(3, 1, c64(1.0 / 3f64.sqrt(), 0.0)), 1e-12).is_ok());
        let mut e1 = CMat::zeros(3, 1);
        e1[(0, 0)] = c64(1.0, 0.0);
        assert!(pl.restrict(&e1, 1e-12).is_err());
    }

    #[test]
    fn doc_round_trip() {
        let g = FiniteGroup::generate(&cyclic_group(3).unwrap(), 10).unwrap();
        let rep = UnitaryRep::regular(&g);
        let json = serde_json::to_string(&rep.to_doc()).unwrap();
        let back = UnitaryRep::from_doc(&serde_json::from_str(&json).unwrap(), &tol()).unwrap();
        assert_eq!(back.matrices(), rep.matrices());
        assert_eq!(back.generating_set(), rep.generating_set());
    }
}
