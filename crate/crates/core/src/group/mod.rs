//! Exact groups, generating sets, Cayley balls and the group ring.

mod element;
mod ring;

use std::collections::{HashMap, HashSet};

pub use element::{FreeWord, GroupElement, GroupKind, ModMatrix, Sl2Int};
pub use ring::{
    format_rational, parse_rational, GroupRingDoc, GroupRingElement, QComplex, TermDoc,
};

use crate::error::{Error, Result};

/// Named generators of a group. When `symmetric_closure` is set, the
/// symmetric set used by Laplacians and balls adds the inverses.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratingSet {
    kind: GroupKind,
    names: Vec<String>,
    elements: Vec<GroupElement>,
    symmetric_closure: bool,
}

/// An element of the symmetric generating set together with the letter
/// (`+i` generator `i`, `-i` its inverse, 1-based) that produces it.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricGenerator {
    pub element: GroupElement,
    pub letter: i32,
}

impl GeneratingSet {
    pub fn new(
        kind: GroupKind,
        generators: Vec<(String, GroupElement)>,
        symmetric_closure: bool,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut names = Vec::new();
        let mut elements = Vec::new();
        for (name, g) in generators {
            if !seen.insert(name.clone()) {
                return Err(Error::InvalidParameter(format!("duplicate generator name `{name}`")));
            }
            if !kind.contains(&g) {
                return Err(Error::MixedGroups(kind.to_string(), g.kind_name()));
            }
            names.push(name);
            elements.push(g);
        }
        Ok(GeneratingSet { kind, names, elements, symmetric_closure })
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn symmetric_closure(&self) -> bool {
        self.symmetric_closure
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn element(&self, name: &str) -> Option<&GroupElement> {
        self.index_of(name).map(|i| &self.elements[i])
    }

    /// True when the set (with closure applied, if requested) is closed
    /// under inversion.
    pub fn is_symmetric(&self) -> bool {
        if self.symmetric_closure {
            return true;
        }
        let set: HashSet<&GroupElement> = self.elements.iter().collect();
        self.elements.iter().all(|g| set.contains(&g.inverse()))
    }

    /// The symmetric set `S`, deduplicated: generators first, then the
    /// inverses that are not already present.
    pub fn symmetric_set(&self) -> Vec<SymmetricGenerator> {
        let mut out: Vec<SymmetricGenerator> = Vec::new();
        let mut seen: HashSet<GroupElement> = HashSet::new();
        for (i, g) in self.elements.iter().enumerate() {
            if seen.insert(g.clone()) {
                out.push(SymmetricGenerator { element: g.clone(), letter: i as i32 + 1 });
            }
        }
        if self.symmetric_closure {
            for (i, g) in self.elements.iter().enumerate() {
                let inv = g.inverse();
                if seen.insert(inv.clone()) {
                    out.push(SymmetricGenerator { element: inv, letter: -(i as i32 + 1) });
                }
            }
        }
        out
    }

    /// `Delta_S = 1 - (1/|S|) sum_{s in S} s` with exact coefficients.
    pub fn laplacian(&self) -> Result<GroupRingElement> {
        if !self.is_symmetric() {
            let missing = self
                .elements
                .iter()
                .zip(&self.names)
                .find(|(g, _)| !self.elements.contains(&g.inverse()))
                .map(|(_, n)| n.clone())
                .unwrap_or_default();
            return Err(Error::NotSymmetric(missing));
        }
        let sym = self.symmetric_set();
        let w = QComplex::from_ratio(-1, sym.len() as i64);
        let mut lap = GroupRingElement::one(self.kind);
        for s in sym {
            lap.add_term(s.element, w.clone())?;
        }
        Ok(lap)
    }

    /// Breadth-first ball of radius `r` with a shortest word for each
    /// element. Layers are ordered by canonical key, so the output is
    /// deterministic.
    pub fn ball_words(&self, r: usize) -> Result<Vec<(GroupElement, FreeWord)>> {
        let sym = self.symmetric_set();
        let id = self.kind.identity();
        let mut seen: HashSet<GroupElement> = HashSet::new();
        seen.insert(id.clone());
        let mut out = vec![(id.clone(), FreeWord::identity())];
        let mut frontier = vec![(id, FreeWord::identity())];
        for _ in 0..r {
            let mut next: Vec<(GroupElement, FreeWord)> = Vec::new();
            for (g, w) in &frontier {
                for s in &sym {
                    let h = g.mul(&s.element)?;
                    if seen.insert(h.clone()) {
                        next.push((h, w.mul(&FreeWord::letter(s.letter))));
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            next.sort_by_cached_key(|(g, _)| g.key());
            out.extend(next.iter().cloned());
            frontier = next;
        }
        Ok(out)
    }

    pub fn cayley_ball(&self, r: usize) -> Result<Vec<GroupElement>> {
        Ok(self.ball_words(r)?.into_iter().map(|(g, _)| g).collect())
    }
}

/// A finite group enumerated from a generating set, with a shortest word
/// for every element. Index 0 is the identity.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    gens: GeneratingSet,
    elements: Vec<GroupElement>,
    words: Vec<FreeWord>,
    index: HashMap<GroupElement, usize>,
}

impl FiniteGroup {
    /// Enumerates the group generated by `gens`; fails if it has more than
    /// `max_order` elements.
    pub fn generate(gens: &GeneratingSet, max_order: usize) -> Result<Self> {
        if matches!(gens.kind(), GroupKind::FreeWord { rank } if rank > 0 && !gens.is_empty()) {
            return Err(Error::InvalidParameter("free groups are infinite".into()));
        }
        let mut gens = gens.clone();
        gens.symmetric_closure = true;
        let mut radius = 1;
        loop {
            let ball = gens.ball_words(radius)?;
            if ball.len() > max_order {
                return Err(Error::InvalidParameter(format!(
                    "group has more than {max_order} elements"
                )));
            }
            let bigger = gens.ball_words(radius + 1)?;
            if bigger.len() == ball.len() {
                let (elements, words): (Vec<_>, Vec<_>) = ball.into_iter().unzip();
                let index = elements.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
                return Ok(FiniteGroup { gens, elements, words, index });
            }
            radius += 1;
        }
    }

    pub fn generating_set(&self) -> &GeneratingSet {
        &self.gens
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &GroupElement {
        &self.elements[i]
    }

    pub fn word(&self, i: usize) -> &FreeWord {
        &self.words[i]
    }

    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        let g = self.elements[i].mul(&self.elements[j]).expect("same group");
        self.index[&g]
    }

    pub fn inverse(&self, i: usize) -> usize {
        self.index[&self.elements[i].inverse()]
    }

    /// Permutation `h -> g h` on element indices.
    pub fn left_translation(&self, i: usize) -> Vec<usize> {
        (0..self.order()).map(|j| self.mul(i, j)).collect()
    }
}

/// `Z/n` realized as the unipotent subgroup `<(1,1;0,1)>` of `SL_2(Z/n)`.
pub fn cyclic_group(n: u64) -> Result<GeneratingSet> {
    let kind = GroupKind::ModMatrix { modulus: n, size: 2 };
    let g = ModMatrix::new(n, 2, vec![1, 1, 0, 1])?;
    GeneratingSet::new(kind, vec![("g".into(), g.into())], true)
}

/// Element `(a, b)` of `(Z/n)^2`, realized as the matrix `(1,a,b;0,1,0;0,0,1)`
/// over `Z/n`.
pub fn abelian_pair_element(n: u64, a: i64, b: i64) -> Result<GroupElement> {
    Ok(ModMatrix::new(n, 3, vec![1, a, b, 0, 1, 0, 0, 0, 1])?.into())
}

/// Coordinates `(a, b)` of an element produced by [`abelian_pair_element`].
pub fn abelian_pair_coords(g: &GroupElement) -> Option<(u64, u64)> {
    match g {
        GroupElement::Mod(m) if m.size() == 3 => Some((m.entry(0, 1), m.entry(0, 2))),
        _ => None,
    }
}

/// `(Z/n)^2` with generators `(1,0)` and `(0,1)`.
pub fn abelian_pair_group(n: u64) -> Result<GeneratingSet> {
    let kind = GroupKind::ModMatrix { modulus: n, size: 3 };
    GeneratingSet::new(
        kind,
        vec![
            ("x".into(), abelian_pair_element(n, 1, 0)?),
            ("y".into(), abelian_pair_element(n, 0, 1)?),
        ],
        true,
    )
}

/// `SL_2(Z/n)` with generators `S = (0,-1;1,0)` and `T = (1,1;0,1)`.
pub fn sl2_mod_generators(n: u64) -> Result<GeneratingSet> {
    let kind = GroupKind::ModMatrix { modulus: n, size: 2 };
    GeneratingSet::new(
        kind,
        vec![
            ("S".into(), ModMatrix::new(n, 2, vec![0, -1, 1, 0])?.into()),
            ("T".into(), ModMatrix::new(n, 2, vec![1, 1, 0, 1])?.into()),
        ],
        true,
    )
}

/// The infinite cyclic group as `<T>` inside `SL_2(Z)`.
pub fn integers_group() -> GeneratingSet {
    GeneratingSet::new(GroupKind::Sl2Int, vec![("s".into(), Sl2Int::t().into())], true)
        .expect("valid generator")
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// Inverse of `a` modulo `n`, if it exists.
pub fn mod_inverse(a: u64, n: u64) -> Option<u64> {
    let (mut r0, mut r1) = (n as i128, (a % n) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0 == 1).then(|| t0.rem_euclid(n as i128) as u64)
}

/// Points of the projective line over `F_n` (`n` prime): `[x:1]` for
/// `x = 0..n`, then `[1:0]`.
pub fn projective_line_points(n: u64) -> Result<Vec<(u64, u64)>> {
    if !is_prime(n) {
        return Err(Error::InvalidParameter(format!("projective line needs a prime, got {n}")));
    }
    Ok((0..n).map(|x| (x, 1)).chain(std::iter::once((1, 0))).collect())
}

/// Permutation of projective-line indices induced by `(a,b;c,d)` acting on
/// column vectors; `perm[i]` is the image of point `i`.
pub fn projective_line_action(n: u64, m: [u64; 4]) -> Result<Vec<usize>> {
    let pts = projective_line_points(n)?;
    let [a, b, c, d] = m.map(|v| v % n);
    Ok(pts
        .iter()
        .map(|&(x, y)| {
            let nx = (a * x + b * y) % n;
            let ny = (c * x + d * y) % n;
            match mod_inverse(ny, n) {
                Some(inv) => ((nx * inv) % n) as usize,
                None => n as usize,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(p: i64, d: i64) -> QComplex {
        QComplex::from_ratio(p, d)
    }

    fn t_pow(k: i64) -> GroupElement {
        Sl2Int::new(1.into(), BigInt::from(k), 0.into(), 1.into()).unwrap().into()
    }

    #[test]
    fn projective_line_basics() {
        assert_eq!(projective_line_points(5).unwrap().len(), 6);
        assert!(projective_line_points(6).is_err());
        assert_eq!(mod_inverse(3, 7), Some(5));
        assert_eq!(mod_inverse(2, 4), None);
        // S swaps [0:1] and [1:0]; T fixes [1:0] and shifts the affine points.
        assert_eq!(projective_line_action(3, [0, 2, 1, 0]).unwrap(), vec![3, 2, 1, 0]);
        assert_eq!(projective_line_action(3, [1, 1, 0, 1]).unwrap(), vec![1, 2, 0, 3]);
    }

    #[test]
    fn laplacian_of_integers() {
        let s = integers_group();
        let lap = s.laplacian().unwrap();
        let k = GroupKind::Sl2Int;
        let expect = GroupRingElement::from_terms(
            k,
            [(k.identity(), q(1, 1)), (t_pow(1), q(-1, 2)), (t_pow(-1), q(-1, 2))],
        )
        .unwrap();
        assert_eq!(lap, expect);
        assert_eq!(lap.l1_norm(), 2.0);
        assert!(lap.is_self_adjoint());
    }

    #[test]
    fn laplacian_of_z2_has_single_generator() {
        let s = cyclic_group(2).unwrap();
        let lap = s.laplacian().unwrap();
        let g = s.elements()[0].clone();
        let k = s.kind();
        let expect =
            GroupRingElement::from_terms(k, [(k.identity(), q(1, 1)), (g, q(-1, 1))]).unwrap();
        assert_eq!(lap, expect);
        assert_eq!(lap.l1_exact().unwrap(), num_rational::BigRational::from_integer(2.into()));
    }

    #[test]
    fn laplacian_rejects_non_symmetric() {
        let k = GroupKind::Sl2Int;
        let s = GeneratingSet::new(k, vec![("t".into(), Sl2Int::t().into())], false).unwrap();
        assert!(matches!(s.laplacian(), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn laplacian_square_on_integers() {
        // Symbolic expansion: (1 - (s + s^-1)/2)^2 = 3/2 - s - s^-1 + s^2/4 + s^-2/4.
        let lap = integers_group().laplacian().unwrap();
        let sq = lap.product(&lap).unwrap();
        let k = GroupKind::Sl2Int;
        let expect = GroupRingElement::from_terms(
            k,
            [
                (k.identity(), q(3, 2)),
                (t_pow(1), q(-1, 1)),
                (t_pow(-1), q(-1, 1)),
                (t_pow(2), q(1, 4)),
                (t_pow(-2), q(1, 4)),
            ],
        )
        .unwrap();
        assert_eq!(sq, expect);
    }

    #[test]
    fn laplacian_square_on_z3() {
        // With g^3 = e: Delta^2 = 3/2 Delta.
        let lap = cyclic_group(3).unwrap().laplacian().unwrap();
        assert_eq!(lap.product(&lap).unwrap(), lap.scale(&q(3, 2)));
    }

    #[test]
    fn balls() {
        let s = integers_group();
        assert_eq!(s.cayley_ball(0).unwrap(), vec![GroupKind::Sl2Int.identity()]);
        let b = s.cayley_ball(2).unwrap();
        assert_eq!(b.len(), 5);
        for k in -2..=2 {
            assert!(b.contains(&t_pow(k)));
        }
        let sl2 = sl2_mod_generators(2).unwrap();
        assert_eq!(sl2.cayley_ball(10).unwrap().len(), 6);
        let g = FiniteGroup::generate(&sl2, 100).unwrap();
        assert_eq!(g.order(), 6);
    }

    #[test]
    fn ball_words_evaluate_to_their_elements() {
        let s = sl2_mod_generators(5).unwrap();
        for (g, w) in s.ball_words(4).unwrap() {
            let mut acc = s.kind().identity();
            for &l in w.letters() {
                let base = &s.elements()[(l.unsigned_abs() - 1) as usize];
                let x = if l > 0 { base.clone() } else { base.inverse() };
                acc = acc.mul(&x).unwrap();
            }
            assert_eq!(acc, g);
        }
    }

    #[test]
    fn group_orders() {
        assert_eq!(FiniteGroup::generate(&sl2_mod_generators(3).unwrap(), 1000).unwrap().order(), 24);
        assert_eq!(FiniteGroup::generate(&abelian_pair_group(2).unwrap(), 100).unwrap().order(), 4);
        assert_eq!(FiniteGroup::generate(&cyclic_group(7).unwrap(), 100).unwrap().order(), 7);
        assert!(FiniteGroup::generate(&sl2_mod_generators(5).unwrap(), 50).is_err());
    }
}
