use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::element::{GroupElement, GroupKind};
use crate::error::{Error, Result};

/// Exact complex rational `re + i im`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QComplex {
    pub re: BigRational,
    pub im: BigRational,
}

impl QComplex {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        QComplex { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        QComplex { re, im: BigRational::zero() }
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        Self::real(BigRational::new(p.into(), q.into()))
    }

    pub fn zero() -> Self {
        Self::real(BigRational::zero())
    }

    pub fn one() -> Self {
        Self::real(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        QComplex { re: self.re.clone(), im: -&self.im }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    pub fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }
}

impl Add for &QComplex {
    type Output = QComplex;
    fn add(self, o: &QComplex) -> QComplex {
        QComplex { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for &QComplex {
    type Output = QComplex;
    fn sub(self, o: &QComplex) -> QComplex {
        QComplex { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul for &QComplex {
    type Output = QComplex;
    fn mul(self, o: &QComplex) -> QComplex {
        QComplex {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for &QComplex {
    type Output = QComplex;
    fn neg(self) -> QComplex {
        QComplex { re: -&self.re, im: -&self.im }
    }
}

/// Parses `p/q` or an integer `p`; decimal literals are rejected.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Inexact(s.to_string());
    if s.contains(['.', 'e', 'E']) {
        return Err(bad());
    }
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

impl fmt::Display for QComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "({} + {}i)", self.re, self.im)
        }
    }
}

/// Finitely supported function on a group with exact complex-rational
/// coefficients. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRingElement {
    kind: GroupKind,
    terms: BTreeMap<GroupElement, QComplex>,
}

impl GroupRingElement {
    pub fn zero(kind: GroupKind) -> Self {
        GroupRingElement { kind, terms: BTreeMap::new() }
    }

    pub fn one(kind: GroupKind) -> Self {
        Self::delta(kind, kind.identity())
    }

    pub fn delta(kind: GroupKind, g: GroupElement) -> Self {
        let mut e = Self::zero(kind);
        e.add_term(g, QComplex::one()).expect("caller supplies an element of kind");
        e
    }

    pub fn from_terms(
        kind: GroupKind,
        terms: impl IntoIterator<Item = (GroupElement, QComplex)>,
    ) -> Result<Self> {
        let mut e = Self::zero(kind);
        for (g, c) in terms {
            e.add_term(g, c)?;
        }
        Ok(e)
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    /// Adds `c * g`, dropping the entry if it cancels.
    pub fn add_term(&mut self, g: GroupElement, c: QComplex) -> Result<()> {
        if !self.kind.contains(&g) {
            return Err(Error::MixedGroups(self.kind.to_string(), g.kind_name()));
        }
        if c.is_zero() {
            return Ok(());
        }
        match self.terms.get_mut(&g) {
            Some(v) => {
                *v = &*v + &c;
                if v.is_zero() {
                    self.terms.remove(&g);
                }
            }
            None => {
                self.terms.insert(g, c);
            }
        }
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GroupElement, &QComplex)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &GroupElement> {
        self.terms.keys()
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, g: &GroupElement) -> QComplex {
        self.terms.get(g).cloned().unwrap_or_else(QComplex::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(QComplex::is_real)
    }

    fn check_same(&self, o: &Self) -> Result<()> {
        if self.kind != o.kind {
            return Err(Error::MixedGroups(self.kind.to_string(), o.kind.to_string()));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check_same(o)?;
        let mut out = self.clone();
        for (g, c) in &o.terms {
            out.add_term(g.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.scale(&QComplex::from_ratio(-1, 1)))
    }

    pub fn scale(&self, c: &QComplex) -> Self {
        let mut out = Self::zero(self.kind);
        for (g, v) in &self.terms {
            let p = v * c;
            if !p.is_zero() {
                out.terms.insert(g.clone(), p);
            }
        }
        out
    }

    /// Convolution `(ab)(g) = sum_h a(h) b(h^{-1} g)`.
    pub fn product(&self, o: &Self) -> Result<Self> {
        self.check_same(o)?;
        let mut out = Self::zero(self.kind);
        for (g, a) in &self.terms {
            for (h, b) in &o.terms {
                out.add_term(g.mul(h)?, a * b)?;
            }
        }
        Ok(out)
    }

    /// `a*(g) = conj(a(g^{-1}))`.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.kind);
        for (g, c) in &self.terms {
            out.terms.insert(g.inverse(), c.conj());
        }
        out
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.adjoint() == *self
    }

    /// `sum |a(g)|` in floating point.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(QComplex::abs_f64).sum()
    }

    /// Exact `sum |a(g)|`, available when every coefficient is real.
    pub fn l1_exact(&self) -> Option<BigRational> {
        if !self.is_real() {
            return None;
        }
        Some(self.terms.values().fold(BigRational::zero(), |acc, c| acc + c.re.abs()))
    }

    pub fn linf_norm(&self) -> f64 {
        self.terms.values().map(QComplex::abs_f64).fold(0.0, f64::max)
    }

    pub fn to_doc(&self) -> GroupRingDoc {
        GroupRingDoc {
            group: self.kind.to_string(),
            terms: self
                .terms
                .iter()
                .map(|(g, c)| TermDoc {
                    element: g.key(),
                    coeff: [format_rational(&c.re), format_rational(&c.im)],
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &GroupRingDoc) -> Result<Self> {
        let kind: GroupKind = doc.group.parse()?;
        Self::from_term_docs(kind, &doc.terms)
    }

    pub fn from_term_docs(kind: GroupKind, terms: &[TermDoc]) -> Result<Self> {
        let mut out = Self::zero(kind);
        for t in terms {
            let g = kind.parse_element(&t.element)?;
            let c = QComplex::new(parse_rational(&t.coeff[0])?, parse_rational(&t.coeff[1])?);
            out.add_term(g, c)?;
        }
        Ok(out)
    }
}

impl fmt::Display for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> =
            self.terms.iter().map(|(g, c)| format!("{c}*[{}]", g.key())).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// One `{element, coeff}` record of the group-ring file format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    pub element: String,
    pub coeff: [String; 2],
}

/// Group-ring document: group kind header plus coefficient records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupRingDoc {
    pub group: String,
    pub terms: Vec<TermDoc>,
}
