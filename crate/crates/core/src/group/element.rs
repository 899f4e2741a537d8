use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Integer 2x2 matrix of determinant one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sl2Int {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl Sl2Int {
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Result<Self> {
        if &a * &d - &b * &c != BigInt::one() {
            return Err(Error::InvalidElement(format!("det({a},{b};{c},{d}) != 1")));
        }
        Ok(Sl2Int { a, b, c, d })
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Sl2Int { a: BigInt::one(), b: BigInt::zero(), c: BigInt::zero(), d: BigInt::one() }
    }

    /// `(0,-1;1,0)`.
    pub fn s() -> Self {
        Sl2Int { a: 0.into(), b: (-1).into(), c: 1.into(), d: 0.into() }
    }

    /// `(1,1;0,1)`.
    pub fn t() -> Self {
        Sl2Int { a: 1.into(), b: 1.into(), c: 0.into(), d: 1.into() }
    }

    pub fn minus_identity() -> Self {
        Sl2Int { a: (-1).into(), b: 0.into(), c: 0.into(), d: (-1).into() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Sl2Int {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
        }
    }

    pub fn inverse(&self) -> Self {
        Sl2Int { a: self.d.clone(), b: -&self.b, c: -&self.c, d: self.a.clone() }
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn key(&self) -> String {
        format!("{},{},{},{}", self.a, self.b, self.c, self.d)
    }

    pub fn parse(key: &str) -> Result<Self> {
        let parts: Vec<&str> = key.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!("SL2 key `{key}` must have four entries")));
        }
        let mut v = Vec::with_capacity(4);
        for p in parts {
            v.push(BigInt::from_str(p).map_err(|e| Error::Parse(format!("`{p}`: {e}")))?);
        }
        let [a, b, c, d]: [BigInt; 4] = v.try_into().expect("four entries");
        Self::new(a, b, c, d)
    }

    /// Entries reduced into `[0, n)`.
    pub fn reduce_mod(&self, n: u64) -> [u64; 4] {
        let m = BigInt::from(n);
        let r = |x: &BigInt| -> u64 {
            let v = x.mod_floor(&m);
            u64::try_from(v).expect("reduced value fits")
        };
        [r(&self.a), r(&self.b), r(&self.c), r(&self.d)]
    }

    /// Decomposes into a word over `S = (0,-1;1,0)` and `T = (1,1;0,1)`.
    /// Letters: `(0, k)` is `S^k`, `(1, k)` is `T^k`; the product of the
    /// returned letters in order equals `self`.
    pub fn st_word(&self) -> Vec<(u8, BigInt)> {
        // Invariant: self = prefix * cur.
        let mut prefix: Vec<(u8, BigInt)> = Vec::new();
        let mut cur = self.clone();
        while !cur.c.is_zero() {
            // cur = T^q * (T^{-q} cur) with |a - q c| < |c|
            let q = cur.a.div_floor(&cur.c);
            if !q.is_zero() {
                prefix.push((1, q.clone()));
                cur = Sl2Int {
                    a: &cur.a - &q * &cur.c,
                    b: &cur.b - &q * &cur.d,
                    c: cur.c.clone(),
                    d: cur.d.clone(),
                };
            }
            // cur = S * (S^{-1} cur); S^{-1} (a,b;c,d) = (c,d;-a,-b)
            prefix.push((0, BigInt::one()));
            cur = Sl2Int { a: cur.c.clone(), b: cur.d.clone(), c: -&cur.a, d: -&cur.b };
        }
        // cur = (a, b; 0, a) with a = +-1
        if cur.a.is_negative() {
            prefix.push((0, BigInt::from(2)));
            cur = Sl2Int { a: -&cur.a, b: -&cur.b, c: cur.c.clone(), d: -&cur.d };
        }
        if !cur.b.is_zero() {
            prefix.push((1, cur.b.clone()));
        }
        // merge adjacent equal letters
        let mut out: Vec<(u8, BigInt)> = Vec::new();
        for (l, k) in prefix {
            match out.last_mut() {
                Some((pl, pk)) if *pl == l => *pk += k,
                _ => out.push((l, k)),
            }
        }
        out.retain(|(_, k)| !k.is_zero());
        out
    }
}

impl fmt::Display for Sl2Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{},{})", self.a, self.b, self.c, self.d)
    }
}

/// Square matrix over `Z/N` of determinant one (sizes 2 and 3).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModMatrix {
    modulus: u64,
    size: usize,
    entries: Vec<u64>,
}

fn det_mod(e: &[u64], size: usize, n: u64) -> u64 {
    let m = |x: u64, y: u64| ((x as u128 * y as u128) % n as u128) as u64;
    let sub = |x: u64, y: u64| (x + n - y % n) % n;
    let add = |x: u64, y: u64| (x + y) % n;
    match size {
        2 => sub(m(e[0], e[3]), m(e[1], e[2])),
        3 => {
            let t0 = m(e[0], sub(m(e[4], e[8]), m(e[5], e[7])));
            let t1 = m(e[1], sub(m(e[3], e[8]), m(e[5], e[6])));
            let t2 = m(e[2], sub(m(e[3], e[7]), m(e[4], e[6])));
            add(sub(t0, t1), t2)
        }
        _ => unreachable!(),
    }
}

impl ModMatrix {
    pub fn new(modulus: u64, size: usize, entries: Vec<i64>) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidElement(format!("modulus {modulus} < 2")));
        }
        if size != 2 && size != 3 {
            return Err(Error::InvalidElement(format!("unsupported matrix size {size}")));
        }
        if entries.len() != size * size {
            return Err(Error::InvalidElement(format!(
                "expected {} entries, found {}",
                size * size,
                entries.len()
            )));
        }
        let entries: Vec<u64> =
            entries.iter().map(|&x| x.rem_euclid(modulus as i64) as u64).collect();
        if det_mod(&entries, size, modulus) != 1 % modulus {
            return Err(Error::InvalidElement(format!("det != 1 mod {modulus}")));
        }
        Ok(ModMatrix { modulus, size, entries })
    }

    pub fn identity(modulus: u64, size: usize) -> Self {
        let mut entries = vec![0; size * size];
        for i in 0..size {
            entries[i * size + i] = 1 % modulus;
        }
        ModMatrix { modulus, size, entries }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.size + j]
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.modulus as u128;
        let k = self.size;
        let mut e = vec![0u64; k * k];
        for i in 0..k {
            for j in 0..k {
                let mut s: u128 = 0;
                for l in 0..k {
                    s += self.entries[i * k + l] as u128 * o.entries[l * k + j] as u128;
                }
                e[i * k + j] = (s % n) as u64;
            }
        }
        ModMatrix { modulus: self.modulus, size: k, entries: e }
    }

    /// Adjugate, which is the inverse since the determinant is one.
    pub fn inverse(&self) -> Self {
        let n = self.modulus;
        let e = &self.entries;
        let neg = |x: u64| (n - x % n) % n;
        let m = |x: u64, y: u64| ((x as u128 * y as u128) % n as u128) as u64;
        let sub = |x: u64, y: u64| (x + n - y % n) % n;
        let entries = match self.size {
            2 => vec![e[3], neg(e[1]), neg(e[2]), e[0]],
            3 => {
                let c = |r0: usize, c0: usize, r1: usize, c1: usize| {
                    sub(m(e[r0 * 3 + c0], e[r1 * 3 + c1]), m(e[r0 * 3 + c1], e[r1 * 3 + c0]))
                };
                // adj[i][j] = cofactor[j][i]
                vec![
                    c(1, 1, 2, 2),
                    neg(c(0, 1, 2, 2)),
                    c(0, 1, 1, 2),
                    neg(c(1, 0, 2, 2)),
                    c(0, 0, 2, 2),
                    neg(c(0, 0, 1, 2)),
                    c(1, 0, 2, 1),
                    neg(c(0, 0, 2, 1)),
                    c(0, 0, 1, 1),
                ]
            }
            _ => unreachable!(),
        };
        ModMatrix { modulus: n, size: self.size, entries }
    }

    pub fn key(&self) -> String {
        self.entries.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn parse(modulus: u64, size: usize, key: &str) -> Result<Self> {
        let mut v = Vec::new();
        for p in key.split(',').map(str::trim) {
            v.push(p.parse::<i64>().map_err(|e| Error::Parse(format!("`{p}`: {e}")))?);
        }
        Self::new(modulus, size, v)
    }
}

/// Reduced word in a free group. Letters are nonzero signed 1-based
/// generator indices; `-i` is the inverse of generator `i`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeWord {
    letters: Vec<i32>,
}

impl FreeWord {
    pub fn identity() -> Self {
        FreeWord { letters: Vec::new() }
    }

    pub fn letter(l: i32) -> Self {
        assert!(l != 0, "letter 0 is not allowed");
        FreeWord { letters: vec![l] }
    }

    /// Freely reduces the given letter sequence.
    pub fn from_letters(letters: &[i32]) -> Result<Self> {
        let mut out: Vec<i32> = Vec::with_capacity(letters.len());
        for &l in letters {
            if l == 0 {
                return Err(Error::InvalidElement("letter 0 in word".into()));
            }
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Ok(FreeWord { letters: out })
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = self.letters.clone();
        for &l in &o.letters {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        FreeWord { letters: out }
    }

    pub fn inverse(&self) -> Self {
        FreeWord { letters: self.letters.iter().rev().map(|l| -l).collect() }
    }

    pub fn max_letter(&self) -> usize {
        self.letters.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn key(&self) -> String {
        if self.letters.is_empty() {
            "e".to_string()
        } else {
            self.letters.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
        }
    }

    pub fn parse(key: &str) -> Result<Self> {
        let key = key.trim();
        if key == "e" || key.is_empty() {
            return Ok(Self::identity());
        }
        let mut v = Vec::new();
        for p in key.split_whitespace() {
            v.push(p.parse::<i32>().map_err(|e| Error::Parse(format!("`{p}`: {e}")))?);
        }
        let w = Self::from_letters(&v)?;
        if w.letters.len() != v.len() {
            return Err(Error::InvalidElement(format!("word `{key}` is not reduced")));
        }
        Ok(w)
    }
}

/// The group an element lives in; fixes identities and element parsing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupKind {
    Sl2Int,
    ModMatrix { modulus: u64, size: usize },
    FreeWord { rank: usize },
}

impl GroupKind {
    pub fn identity(&self) -> GroupElement {
        match *self {
            GroupKind::Sl2Int => GroupElement::Sl2(Sl2Int::identity()),
            GroupKind::ModMatrix { modulus, size } => {
                GroupElement::Mod(ModMatrix::identity(modulus, size))
            }
            GroupKind::FreeWord { .. } => GroupElement::Free(FreeWord::identity()),
        }
    }

    pub fn parse_element(&self, key: &str) -> Result<GroupElement> {
        let g = match *self {
            GroupKind::Sl2Int => GroupElement::Sl2(Sl2Int::parse(key)?),
            GroupKind::ModMatrix { modulus, size } => {
                GroupElement::Mod(ModMatrix::parse(modulus, size, key)?)
            }
            GroupKind::FreeWord { rank } => {
                let w = FreeWord::parse(key)?;
                if w.max_letter() > rank {
                    return Err(Error::InvalidElement(format!(
                        "word `{key}` uses a letter beyond rank {rank}"
                    )));
                }
                GroupElement::Free(w)
            }
        };
        Ok(g)
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        match (self, g) {
            (GroupKind::Sl2Int, GroupElement::Sl2(_)) => true,
            (GroupKind::ModMatrix { modulus, size }, GroupElement::Mod(m)) => {
                m.modulus == *modulus && m.size == *size
            }
            (GroupKind::FreeWord { rank }, GroupElement::Free(w)) => w.max_letter() <= *rank,
            _ => false,
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Sl2Int => write!(f, "sl2int"),
            GroupKind::ModMatrix { modulus, size: 2 } => write!(f, "modmatrix:{modulus}"),
            GroupKind::ModMatrix { modulus, size } => write!(f, "modmatrix:{modulus}:{size}"),
            GroupKind::FreeWord { rank } => write!(f, "freeword:{rank}"),
        }
    }
}

impl FromStr for GroupKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str| p.parse::<u64>().map_err(|e| Error::Parse(format!("`{s}`: {e}")));
        match parts.as_slice() {
            ["sl2int"] => Ok(GroupKind::Sl2Int),
            ["modmatrix", n] => Ok(GroupKind::ModMatrix { modulus: num(n)?, size: 2 }),
            ["modmatrix", n, k] => {
                let size = num(k)? as usize;
                if size != 2 && size != 3 {
                    return Err(Error::Parse(format!("`{s}`: size must be 2 or 3")));
                }
                Ok(GroupKind::ModMatrix { modulus: num(n)?, size })
            }
            ["freeword", k] => Ok(GroupKind::FreeWord { rank: num(k)? as usize }),
            _ => Err(Error::Parse(format!("unknown group kind `{s}`"))),
        }
    }
}

/// An element of one of the supported exact groups.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Sl2(Sl2Int),
    Mod(ModMatrix),
    Free(FreeWord),
}

impl GroupElement {
    pub fn kind_name(&self) -> String {
        match self {
            GroupElement::Sl2(_) => "sl2int".into(),
            GroupElement::Mod(m) => {
                GroupKind::ModMatrix { modulus: m.modulus, size: m.size }.to_string()
            }
            GroupElement::Free(_) => "freeword".into(),
        }
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        match (self, o) {
            (GroupElement::Sl2(a), GroupElement::Sl2(b)) => Ok(GroupElement::Sl2(a.mul(b))),
            (GroupElement::Mod(a), GroupElement::Mod(b))
                if a.modulus == b.modulus && a.size == b.size =>
            {
                Ok(GroupElement::Mod(a.mul(b)))
            }
            (GroupElement::Free(a), GroupElement::Free(b)) => Ok(GroupElement::Free(a.mul(b))),
            _ => Err(Error::MixedGroups(self.kind_name(), o.kind_name())),
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            GroupElement::Sl2(a) => GroupElement::Sl2(a.inverse()),
            GroupElement::Mod(a) => GroupElement::Mod(a.inverse()),
            GroupElement::Free(a) => GroupElement::Free(a.inverse()),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            GroupElement::Sl2(a) => *a == Sl2Int::identity(),
            GroupElement::Mod(a) => *a == ModMatrix::identity(a.modulus, a.size),
            GroupElement::Free(a) => a.is_empty(),
        }
    }

    /// Canonical serialization used by the file formats.
    pub fn key(&self) -> String {
        match self {
            GroupElement::Sl2(a) => a.key(),
            GroupElement::Mod(a) => a.key(),
            GroupElement::Free(a) => a.key(),
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl From<Sl2Int> for GroupElement {
    fn from(x: Sl2Int) -> Self {
        GroupElement::Sl2(x)
    }
}

impl From<ModMatrix> for GroupElement {
    fn from(x: ModMatrix) -> Self {
        GroupElement::Mod(x)
    }
}

impl From<FreeWord> for GroupElement {
    fn from(x: FreeWord) -> Self {
        GroupElement::Free(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn eval_st(word: &[(u8, BigInt)]) -> Sl2Int {
        let mut acc = Sl2Int::identity();
        for (l, k) in word {
            let (base, kk) = if k.is_negative() {
                let b = if *l == 0 { Sl2Int::s() } else { Sl2Int::t() };
                (b.inverse(), -k)
            } else {
                (if *l == 0 { Sl2Int::s() } else { Sl2Int::t() }, k.clone())
            };
            let mut i = BigInt::zero();
            while i < kk {
                acc = acc.mul(&base);
                i += 1;
            }
        }
        acc
    }

    #[test]
    fn sl2_determinant_checked() {
        assert!(Sl2Int::from_i64(1, 1, 1, 1).is_err());
        let g = Sl2Int::from_i64(2, 1, 1, 1).unwrap();
        assert_eq!(g.mul(&g.inverse()), Sl2Int::identity());
        assert_eq!(Sl2Int::parse(&g.key()).unwrap(), g);
    }

    #[test]
    fn st_word_reconstructs() {
        let cases = [
            (1, 0, 2, 1),
            (1, 0, 3, 1),
            (1, 1, 0, 1),
            (-1, 0, 0, -1),
            (1, 0, 1, 1),
            (1, 2, 0, 1),
            (0, -1, 1, 0),
            (5, 3, 3, 2),
            (-7, 3, 2, -1),
        ];
        for (a, b, c, d) in cases {
            let g = Sl2Int::from_i64(a, b, c, d).unwrap();
            assert_eq!(eval_st(&g.st_word()), g, "{g}");
        }
    }

    #[test]
    fn determinant_preserved_on_random_products() {
        let gens = [Sl2Int::s(), Sl2Int::t(), Sl2Int::t().inverse()];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut g = Sl2Int::identity();
        for i in 0..100_000 {
            g = g.mul(&gens[rng.random_range(0..3)]);
            if i % 64 == 63 {
                // keep entries bounded so the run stays fast
                assert_eq!(g.det(), BigInt::one());
                g = Sl2Int::identity();
            }
        }
        assert_eq!(g.det(), BigInt::one());
    }

    #[test]
    fn mod_matrix_inverse() {
        let g = ModMatrix::new(7, 3, vec![1, 2, 3, 0, 1, 4, 5, 6, 0]);
        // det = 1*(0-24) - 2*(0-20) + 3*(0-5) = -24+40-15 = 1
        let g = g.unwrap();
        assert_eq!(g.mul(&g.inverse()), ModMatrix::identity(7, 3));
        let h = ModMatrix::new(5, 2, vec![2, 1, 1, 1]).unwrap();
        assert_eq!(h.mul(&h.inverse()), ModMatrix::identity(5, 2));
        assert!(ModMatrix::new(5, 2, vec![1, 1, 1, 1]).is_err());
    }

    #[test]
    fn free_words_reduce() {
        let w = FreeWord::from_letters(&[1, 2, -2, -1, 3]).unwrap();
        assert_eq!(w.letters(), &[3]);
        let a = FreeWord::from_letters(&[1, 2]).unwrap();
        assert!(a.mul(&a.inverse()).is_empty());
        assert!(FreeWord::parse("1 -1").is_err());
        assert_eq!(FreeWord::parse("e").unwrap(), FreeWord::identity());
    }

    #[test]
    fn kinds_round_trip() {
        for s in ["sl2int", "modmatrix:7", "modmatrix:2:3", "freeword:3"] {
            assert_eq!(s.parse::<GroupKind>().unwrap().to_string(), s);
        }
        assert!("modmatrix:3:4".parse::<GroupKind>().is_err());
        let mixed = GroupElement::Sl2(Sl2Int::identity())
            .mul(&GroupElement::Free(FreeWord::identity()));
        assert!(matches!(mixed, Err(Error::MixedGroups(..))));
    }
}
