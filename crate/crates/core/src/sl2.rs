//! The σ-swap between the congruence subgroups of `SL_2(Z)` of lower and
//! upper triangular type mod `p`, congruence representations, the
//! compatibility defect and a local search bounding the distance to the
//! compatible locus.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{is_prime, mod_inverse, projective_line_action, GeneratingSet, GroupKind, Sl2Int};
use crate::linalg::{
    closest_unitary, d2_distance, expi_hermitian, identity, random_hermitian, CMat, Tolerances, C64,
};
use crate::rep::{permutation_matrix, UnitaryRep};

/// Relators of `SL_2(Z) = <S, T>`, as words in `S = (0,-1;1,0)` and
/// `T = (1,1;0,1)`.
pub const RELATORS: &[&str] = &["S^4", "S T S T S T S^-2"];

/// Case-study generators rewritten over `S` and `T`; `p` stands for the
/// prime of the context.
pub const REWRITES: &[(&str, &str)] = &[
    ("(1,0;p,1)", "S T^-p S^-1"),
    ("(1,1;0,1)", "T"),
    ("(-1,0;0,-1)", "S^2"),
    ("(1,0;1,1)", "S T^-1 S^-1"),
    ("(1,p;0,1)", "T^p"),
];

/// Parses `X^k` tokens over `S`, `T`; `k` may be an integer, `p` or `-p`.
pub fn parse_st_word(text: &str, p: i64) -> Result<Vec<(u8, i64)>> {
    text.split_whitespace()
        .map(|tok| {
            let (base, exp) = tok.split_once('^').unwrap_or((tok, "1"));
            let letter = match base {
                "S" => 0,
                "T" => 1,
                _ => return Err(Error::Parse(format!("unknown letter `{base}` in `{text}`"))),
            };
            let k = match exp {
                "p" => p,
                "-p" => -p,
                e => e.parse().map_err(|_| Error::Parse(format!("bad exponent `{e}` in `{text}`")))?,
            };
            Ok((letter, k))
        })
        .collect()
}

pub fn st_word_value(word: &[(u8, i64)]) -> Sl2Int {
    let mut acc = Sl2Int::identity();
    for &(l, k) in word {
        let base = if l == 0 { Sl2Int::s() } else { Sl2Int::t() };
        let base = if k < 0 { base.inverse() } else { base };
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base);
        }
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapDirection {
    PlusToMinus,
    MinusToPlus,
}

/// `(a, b; pc, d) -> (a, pb; c, d)` and back: conjugation by
/// `diag(sqrt p, 1/sqrt p)`.
pub fn sigma_swap(x: &Sl2Int, p: u64, dir: SwapDirection) -> Result<Sl2Int> {
    let p = BigInt::from(p);
    match dir {
        SwapDirection::PlusToMinus => {
            if !x.c.is_multiple_of(&p) {
                return Err(Error::InvalidElement(format!("{x} has lower-left entry not divisible by {p}")));
            }
            Sl2Int::new(x.a.clone(), &x.b * &p, &x.c / &p, x.d.clone())
        }
        SwapDirection::MinusToPlus => {
            if !x.b.is_multiple_of(&p) {
                return Err(Error::InvalidElement(format!("{x} has upper-right entry not divisible by {p}")));
            }
            Sl2Int::new(x.a.clone(), &x.b / &p, &x.c * &p, x.d.clone())
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaContext {
    p: u64,
    plus: Vec<Sl2Int>,
    minus: Vec<Sl2Int>,
}

impl SigmaContext {
    pub fn new(p: u64, plus: Vec<Sl2Int>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParameter(format!("{p} is not prime")));
        }
        let minus = plus
            .iter()
            .map(|x| sigma_swap(x, p, SwapDirection::PlusToMinus))
            .collect::<Result<Vec<_>>>()?;
        Ok(SigmaContext { p, plus, minus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn plus_generators(&self) -> &[Sl2Int] {
        &self.plus
    }

    pub fn minus_generators(&self) -> &[Sl2Int] {
        &self.minus
    }

    /// `S`, `T` and the plus generators, without repeats.
    pub fn plus_alphabet(&self) -> Vec<Sl2Int> {
        alphabet(&self.plus)
    }

    pub fn minus_alphabet(&self) -> Vec<Sl2Int> {
        alphabet(&self.minus)
    }
}

fn alphabet(gens: &[Sl2Int]) -> Vec<Sl2Int> {
    let mut out = vec![Sl2Int::s(), Sl2Int::t()];
    for g in gens {
        if !out.contains(g) {
            out.push(g.clone());
        }
    }
    out
}

/// `{(1,0;p,1), (1,1;0,1), -I}` for `p` in `{2, 3}`.
pub fn default_generators(p: u64) -> Result<SigmaContext> {
    if p != 2 && p != 3 {
        return Err(Error::InvalidParameter(format!(
            "default generators are only known to generate for p = 2, 3 (got {p})"
        )));
    }
    let p_i = p as i64;
    SigmaContext::new(
        p,
        vec![
            Sl2Int::from_i64(1, 0, p_i, 1)?,
            Sl2Int::from_i64(1, 1, 0, 1)?,
            Sl2Int::minus_identity(),
        ],
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CongruenceKind {
    Regular,
    #[serde(rename = "pline")]
    ProjectiveLine,
}

impl fmt::Display for CongruenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CongruenceKind::Regular => "regular",
            CongruenceKind::ProjectiveLine => "pline",
        })
    }
}

impl FromStr for CongruenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regular" => Ok(CongruenceKind::Regular),
            "pline" | "projective_line" => Ok(CongruenceKind::ProjectiveLine),
            _ => Err(Error::Parse(format!("unknown congruence kind `{s}`"))),
        }
    }
}

fn mat_mul_mod(x: [u64; 4], y: [u64; 4], n: u64) -> [u64; 4] {
    let [a, b, c, d] = x;
    let [e, f, g, h] = y;
    [(a * e + b * g) % n, (a * f + b * h) % n, (c * e + d * g) % n, (c * f + d * h) % n]
}

/// Permutation representation of `SL_2(Z)` through `SL_2(Z/N)`, acting on
/// itself by left multiplication or on the projective line. A twist `u`
/// first applies `(a,b;c,d) -> (a, ub; c/u, d)`, conjugation by `diag(u,1)`.
#[derive(Clone, Debug)]
pub struct CongruenceRep {
    modulus: u64,
    kind: CongruenceKind,
    twist: u64,
    elements: Vec<[u64; 4]>,
    index: HashMap<[u64; 4], usize>,
}

impl CongruenceRep {
    pub fn new(modulus: u64, kind: CongruenceKind) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidParameter(format!("modulus must be at least 2, got {modulus}")));
        }
        let mut elements = Vec::new();
        match kind {
            CongruenceKind::Regular => {
                let n = modulus;
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            for d in 0..n {
                                if (a * d + n * n - (b * c) % n) % n == 1 % n {
                                    elements.push([a, b, c, d]);
                                }
                            }
                        }
                    }
                }
            }
            CongruenceKind::ProjectiveLine => {
                if !is_prime(modulus) {
                    return Err(Error::InvalidParameter(format!(
                        "projective line needs a prime modulus, got {modulus}"
                    )));
                }
            }
        }
        let index = elements.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        Ok(CongruenceRep { modulus, kind, twist: 1, elements, index })
    }

    pub fn with_twist(&self, u: u64) -> Result<Self> {
        mod_inverse(u, self.modulus)
            .ok_or_else(|| Error::InvalidParameter(format!("{u} is not a unit mod {}", self.modulus)))?;
        let mut out = self.clone();
        out.twist = (self.twist * u) % self.modulus;
        Ok(out)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn kind(&self) -> CongruenceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            CongruenceKind::Regular => self.elements.len(),
            CongruenceKind::ProjectiveLine => self.modulus as usize + 1,
        }
    }

    /// Permutation of `m` in `SL_2(Z/N)` (twist applied).
    pub fn image_mod(&self, m: [u64; 4]) -> Result<Vec<usize>> {
        let n = self.modulus;
        let u = self.twist;
        let ui = mod_inverse(u, n).expect("twist is a unit");
        let m = [m[0] % n, (m[1] * u) % n, (m[2] * ui) % n, m[3] % n];
        match self.kind {
            CongruenceKind::Regular => self
                .elements
                .iter()
                .map(|g| {
                    self.index
                        .get(&mat_mul_mod(m, *g, n))
                        .copied()
                        .ok_or_else(|| Error::InvalidElement(format!("{m:?} is not in SL_2(Z/{n})")))
                })
                .collect(),
            CongruenceKind::ProjectiveLine => projective_line_action(n, m),
        }
    }

    pub fn image(&self, x: &Sl2Int) -> Result<Vec<usize>> {
        self.image_mod(x.reduce_mod(self.modulus))
    }

    /// Normalized character `#fixed points / dim`.
    pub fn character(&self, x: &Sl2Int) -> Result<BigRational> {
        let perm = self.image(x)?;
        let fixed = perm.iter().enumerate().filter(|(i, j)| i == *j).count();
        Ok(BigRational::new(fixed.into(), self.dim().into()))
    }

    /// Dense rep on the generators `S`, `T`.
    pub fn to_unitary_rep(&self, tol: &Tolerances) -> Result<UnitaryRep> {
        let gens = st_generating_set();
        let perms = vec![self.image(&Sl2Int::s())?, self.image(&Sl2Int::t())?];
        UnitaryRep::from_permutations(&gens, &perms, tol)
    }
}

/// `SL_2(Z)` with named generators `S`, `T`.
pub fn st_generating_set() -> GeneratingSet {
    GeneratingSet::new(
        GroupKind::Sl2Int,
        vec![("S".into(), Sl2Int::s().into()), ("T".into(), Sl2Int::t().into())],
        true,
    )
    .expect("valid generators")
}

/// A unitary image, kept as a permutation when possible.
#[derive(Clone, Debug, PartialEq)]
pub enum Sl2Image {
    Perm(Vec<usize>),
    Dense(CMat),
}

impl Sl2Image {
    pub fn identity(dim: usize) -> Self {
        Sl2Image::Perm((0..dim).collect())
    }

    pub fn dim(&self) -> usize {
        match self {
            Sl2Image::Perm(p) => p.len(),
            Sl2Image::Dense(m) => m.nrows(),
        }
    }

    pub fn to_dense(&self) -> CMat {
        match self {
            Sl2Image::Perm(p) => permutation_matrix(p),
            Sl2Image::Dense(m) => m.clone(),
        }
    }

    pub fn compose(&self, other: &Sl2Image) -> Sl2Image {
        match (self, other) {
            (Sl2Image::Perm(a), Sl2Image::Perm(b)) => Sl2Image::Perm(b.iter().map(|&j| a[j]).collect()),
            _ => Sl2Image::Dense(self.to_dense() * other.to_dense()),
        }
    }

    pub fn inverse(&self) -> Sl2Image {
        match self {
            Sl2Image::Perm(p) => {
                let mut inv = vec![0; p.len()];
                for (i, &j) in p.iter().enumerate() {
                    inv[j] = i;
                }
                Sl2Image::Perm(inv)
            }
            Sl2Image::Dense(m) => Sl2Image::Dense(m.adjoint()),
        }
    }

    /// Generalized `d_2`; for two permutations of one size this is
    /// `sqrt(2 #{j : a(j) != b(j)} / n)`.
    pub fn d2(&self, other: &Sl2Image) -> Result<f64> {
        match (self, other) {
            (Sl2Image::Perm(a), Sl2Image::Perm(b)) if a.len() == b.len() => {
                let mism = a.iter().zip(b).filter(|(x, y)| x != y).count();
                Ok((2.0 * mism as f64 / a.len() as f64).sqrt())
            }
            _ => d2_distance(&self.to_dense(), &other.to_dense()),
        }
    }
}

/// One side of a pair: a representation of `SL_2(Z)` that can evaluate
/// arbitrary integer matrices.
#[derive(Clone, Debug)]
pub enum SideRep {
    Trivial(usize),
    Congruence(CongruenceRep),
    Dense(UnitaryRep),
}

impl SideRep {
    pub fn dim(&self) -> usize {
        match self {
            SideRep::Trivial(d) => *d,
            SideRep::Congruence(c) => c.dim(),
            SideRep::Dense(r) => r.dim(),
        }
    }

    pub fn image(&self, x: &Sl2Int) -> Result<Sl2Image> {
        match self {
            SideRep::Trivial(d) => Ok(Sl2Image::identity(*d)),
            SideRep::Congruence(c) => Ok(Sl2Image::Perm(c.image(x)?)),
            SideRep::Dense(r) => Ok(Sl2Image::Dense(r.evaluate_element(&x.clone().into())?)),
        }
    }

    fn word_image(&self, word: &[(u8, i64)]) -> Result<Sl2Image> {
        let s = self.image(&Sl2Int::s())?;
        let t = self.image(&Sl2Int::t())?;
        let mut acc = Sl2Image::identity(self.dim());
        for &(l, k) in word {
            let base = if l == 0 { &s } else { &t };
            let base = if k < 0 { base.inverse() } else { base.clone() };
            for _ in 0..k.unsigned_abs() {
                acc = acc.compose(&base);
            }
        }
        Ok(acc)
    }

    /// How far the images of `alphabet` are from a genuine representation:
    /// the relators on `S`, `T` and the agreement of each letter with its
    /// word in `S`, `T`. Exactly zero for trivial and congruence sides.
    pub fn genuineness_residual(&self, alphabet: &[Sl2Int]) -> Result<f64> {
        let SideRep::Dense(_) = self else { return Ok(0.0) };
        let id = Sl2Image::identity(self.dim());
        let mut r: f64 = 0.0;
        for rel in RELATORS {
            r = r.max(self.word_image(&parse_st_word(rel, 0)?)?.d2(&id)?);
        }
        for x in alphabet {
            let w = st_word_i64(x)?;
            r = r.max(self.word_image(&w)?.d2(&self.image(x)?)?);
        }
        Ok(r)
    }

    /// Exact check of the relators on permutation images.
    pub fn relator_defects(&self) -> Result<Vec<(String, f64)>> {
        let id = Sl2Image::identity(self.dim());
        RELATORS
            .iter()
            .map(|rel| Ok((rel.to_string(), self.word_image(&parse_st_word(rel, 0)?)?.d2(&id)?)))
            .collect()
    }
}

/// Dense rep whose generators are the letters of `alphabet`, with the
/// images `side` assigns them; letters are named by their keys.
pub fn alphabet_rep(side: &SideRep, alphabet: &[Sl2Int], tol: &Tolerances) -> Result<UnitaryRep> {
    let gens = GeneratingSet::new(
        GroupKind::Sl2Int,
        alphabet.iter().map(|x| (x.key(), x.clone().into())).collect(),
        true,
    )?;
    let mats = alphabet.iter().map(|x| Ok(side.image(x)?.to_dense())).collect::<Result<Vec<_>>>()?;
    UnitaryRep::new(gens, mats, tol)
}

fn st_word_i64(x: &Sl2Int) -> Result<Vec<(u8, i64)>> {
    x.st_word()
        .into_iter()
        .map(|(l, k)| {
            k.to_i64()
                .map(|k| (l, k))
                .ok_or_else(|| Error::Unevaluable(format!("exponent too large in the word for {x}")))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub defect: f64,
    /// `d_2(pi_+(s_i^+), pi_-(s_i^-))` per generator.
    pub per_generator: Vec<f64>,
    pub dist_upper_bound: Option<f64>,
    /// Which compatible pair produced the bound.
    pub bound_source: Option<String>,
    /// Running best bound, one entry per search iteration.
    pub search_trace: Vec<f64>,
    pub iterations: usize,
}

pub fn compatibility_defect(plus: &SideRep, minus: &SideRep, ctx: &SigmaContext) -> Result<CompatibilityReport> {
    let per_generator = ctx
        .plus
        .iter()
        .zip(&ctx.minus)
        .map(|(sp, sm)| plus.image(sp)?.d2(&minus.image(sm)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(CompatibilityReport {
        defect: per_generator.iter().cloned().fold(0.0, f64::max),
        per_generator,
        dist_upper_bound: None,
        bound_source: None,
        search_trace: Vec::new(),
        iterations: 0,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub max_iters: usize,
    pub seed: u64,
    /// Dense local search runs only up to this dimension.
    pub dense_limit: usize,
    /// Relator and compatibility residual (in `d_2`) accepted as feasible.
    pub feasibility_tol: f64,
    pub restore_iters: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { max_iters: 200, seed: 0, dense_limit: 16, feasibility_tol: 1e-8, restore_iters: 2000 }
    }
}

struct Targets {
    plus_alpha: Vec<Sl2Int>,
    minus_alpha: Vec<Sl2Int>,
    plus: Vec<Sl2Image>,
    minus: Vec<Sl2Image>,
}

/// Distance from the inputs and compatibility residual of a candidate pair.
fn candidate_bound(
    targets: &Targets,
    ctx: &SigmaContext,
    cand_plus: &SideRep,
    cand_minus: &SideRep,
) -> Result<Option<f64>> {
    let genuine = cand_plus
        .genuineness_residual(&targets.plus_alpha)?
        .max(cand_minus.genuineness_residual(&targets.minus_alpha)?);
    let compat = compatibility_defect(cand_plus, cand_minus, ctx)?.defect;
    let mut dist: f64 = 0.0;
    for (x, t) in targets.plus_alpha.iter().zip(&targets.plus) {
        dist = dist.max(cand_plus.image(x)?.d2(t)?);
    }
    for (x, t) in targets.minus_alpha.iter().zip(&targets.minus) {
        dist = dist.max(cand_minus.image(x)?.d2(t)?);
    }
    Ok((genuine.max(compat) < 1e-8).then_some(dist + compat / 2.0))
}

/// Upper bound on the distance from `(plus, minus)` to a compatible pair.
/// Explicit compatible pairs (trivial, the input itself, twisted congruence
/// pairs) are scored first; in small dimensions a penalty search over the
/// images of `S`, `T` on both sides follows. The bound of a pair at
/// distance `d` with compatibility residual `r` is `d + r/2`.
pub fn dist_search(
    plus: &SideRep,
    minus: &SideRep,
    ctx: &SigmaContext,
    opts: &SearchOptions,
) -> Result<CompatibilityReport> {
    let dim = plus.dim();
    if minus.dim() != dim {
        return Err(Error::DimensionMismatch(format!("sides have dimensions {dim} and {}", minus.dim())));
    }
    let mut report = compatibility_defect(plus, minus, ctx)?;
    let plus_alpha = ctx.plus_alphabet();
    let minus_alpha = ctx.minus_alphabet();
    let targets = Targets {
        plus: plus_alpha.iter().map(|x| plus.image(x)).collect::<Result<_>>()?,
        minus: minus_alpha.iter().map(|x| minus.image(x)).collect::<Result<_>>()?,
        plus_alpha,
        minus_alpha,
    };

    let mut best = (f64::INFINITY, String::new());
    let mut consider = |b: Option<f64>, name: &str| {
        if let Some(b) = b {
            if b < best.0 {
                best = (b, name.to_string());
            }
        }
    };
    consider(candidate_bound(&targets, ctx, &SideRep::Trivial(dim), &SideRep::Trivial(dim))?, "trivial");
    consider(candidate_bound(&targets, ctx, plus, minus)?, "input");
    if let (SideRep::Congruence(a), SideRep::Congruence(b)) = (plus, minus) {
        let n = a.modulus();
        if let Some(pinv) = mod_inverse(ctx.p % n, n) {
            let twisted_minus = SideRep::Congruence(b.with_twist(pinv)?);
            consider(candidate_bound(&targets, ctx, plus, &twisted_minus)?, "twisted-minus");
            let twisted_plus = SideRep::Congruence(a.with_twist(ctx.p % n)?);
            consider(candidate_bound(&targets, ctx, &twisted_plus, minus)?, "twisted-plus");
        }
    }

    let mut trace = vec![best.0];
    let mut iterations = 0;
    if dim <= opts.dense_limit && opts.max_iters > 0 {
        let problem = PenaltyProblem::new(&targets, ctx)?;
        let start = [
            plus.image(&Sl2Int::s())?.to_dense(),
            plus.image(&Sl2Int::t())?.to_dense(),
            minus.image(&Sl2Int::s())?.to_dense(),
            minus.image(&Sl2Int::t())?.to_dense(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut starts = vec![start.clone()];
        // one jittered restart, used only if the plain start finds nothing
        let jitter: Vec<CMat> = start
            .iter()
            .map(|m| expi_hermitian(&(random_hermitian(&mut rng, dim) * C64::new(1e-2, 0.0))).map(|e| e * m))
            .collect::<Result<_>>()?;
        starts.push([jitter[0].clone(), jitter[1].clone(), jitter[2].clone(), jitter[3].clone()]);
        for s in starts {
            let out = problem.run(s, opts, best.0, &mut trace)?;
            iterations += out.iterations;
            if let Some(b) = out.best {
                if b < best.0 {
                    best = (b, "search".into());
                }
                break;
            }
        }
    }
    report.dist_upper_bound = Some(best.0);
    report.bound_source = Some(best.1);
    report.search_trace = trace;
    report.iterations = iterations;
    Ok(report)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum TermClass {
    Distance,
    Constraint,
}

/// A word in the four variables `S+`, `T+`, `S-`, `T-`; letters carry an
/// adjoint flag.
type VarWord = Vec<(usize, bool)>;

struct Term {
    class: TermClass,
    lhs: VarWord,
    rhs: Rhs,
}

enum Rhs {
    Word(VarWord),
    Fixed(CMat),
}

fn expand(word: &[(u8, i64)], offset: usize) -> VarWord {
    let mut out = Vec::new();
    for &(l, k) in word {
        for _ in 0..k.unsigned_abs() {
            out.push((offset + l as usize, k < 0));
        }
    }
    out
}

struct PenaltyProblem {
    dim: usize,
    terms: Vec<Term>,
}

struct RunOutcome {
    best: Option<f64>,
    iterations: usize,
}

struct Evaluation {
    penalty: f64,
    distance_sq: f64,
    dist: f64,
    residual: f64,
    compat_residual: f64,
}

impl PenaltyProblem {
    fn new(targets: &Targets, ctx: &SigmaContext) -> Result<Self> {
        let mut terms = Vec::new();
        for (alpha, imgs, off) in [(&targets.plus_alpha, &targets.plus, 0), (&targets.minus_alpha, &targets.minus, 2)] {
            for (x, img) in alpha.iter().zip(imgs) {
                terms.push(Term { class: TermClass::Distance, lhs: expand(&st_word_i64(x)?, off), rhs: Rhs::Fixed(img.to_dense()) });
            }
            for rel in RELATORS {
                let dim = imgs[0].dim();
                terms.push(Term {
                    class: TermClass::Constraint,
                    lhs: expand(&parse_st_word(rel, 0)?, off),
                    rhs: Rhs::Fixed(identity(dim)),
                });
            }
        }
        for (sp, sm) in ctx.plus.iter().zip(&ctx.minus) {
            terms.push(Term {
                class: TermClass::Constraint,
                lhs: expand(&st_word_i64(sp)?, 0),
                rhs: Rhs::Word(expand(&st_word_i64(sm)?, 2)),
            });
        }
        Ok(PenaltyProblem { dim: targets.plus[0].dim(), terms })
    }

    fn product(&self, word: &VarWord, vars: &[CMat; 4], adj: &[CMat; 4]) -> CMat {
        let mut acc = identity(self.dim);
        for &(v, a) in word {
            acc *= if a { &adj[v] } else { &vars[v] };
        }
        acc
    }

    /// Adds `w * d/dX ||W - R||_F^2 / n` contributions of `word` with
    /// residual `res` (already signed) into `grads`.
    fn accumulate(&self, word: &VarWord, res: &CMat, w: f64, vars: &[CMat; 4], adj: &[CMat; 4], grads: &mut [CMat; 4]) {
        let m = word.len();
        let letter = |k: usize| if word[k].1 { &adj[word[k].0] } else { &vars[word[k].0] };
        let mut prefix = vec![identity(self.dim)];
        for k in 0..m {
            let next = &prefix[k] * letter(k);
            prefix.push(next);
        }
        let mut suffix = vec![identity(self.dim); m + 1];
        for k in (0..m).rev() {
            suffix[k] = letter(k) * &suffix[k + 1];
        }
        let scale = C64::new(2.0 * w / self.dim as f64, 0.0);
        for k in 0..m {
            let (v, a) = word[k];
            let g = if a {
                &suffix[k + 1] * res.adjoint() * &prefix[k]
            } else {
                prefix[k].adjoint() * res * suffix[k + 1].adjoint()
            };
            grads[v] += g * scale;
        }
    }

    /// Penalty value with distance terms weighted by `dist_w` and
    /// constraint terms by `mu`; gradients go into `grads` when given.
    fn evaluate(&self, vars: &[CMat; 4], dist_w: f64, mu: f64, grads: Option<&mut [CMat; 4]>) -> Evaluation {
        let adj = [vars[0].adjoint(), vars[1].adjoint(), vars[2].adjoint(), vars[3].adjoint()];
        let n = self.dim as f64;
        let mut ev = Evaluation { penalty: 0.0, distance_sq: 0.0, dist: 0.0, residual: 0.0, compat_residual: 0.0 };
        let mut grads = grads;
        for term in &self.terms {
            let lhs = self.product(&term.lhs, vars, &adj);
            let rhs = match &term.rhs {
                Rhs::Word(word) => self.product(word, vars, &adj),
                Rhs::Fixed(m) => m.clone(),
            };
            let res = lhs - rhs;
            let val = res.norm_squared() / n;
            let w = match term.class {
                TermClass::Distance => {
                    ev.distance_sq += val;
                    ev.dist = ev.dist.max(val.sqrt());
                    dist_w
                }
                TermClass::Constraint => {
                    ev.penalty += val;
                    ev.residual = ev.residual.max(val.sqrt());
                    if matches!(term.rhs, Rhs::Word(_)) {
                        ev.compat_residual = ev.compat_residual.max(val.sqrt());
                    }
                    mu
                }
            };
            if let Some(g) = grads.as_deref_mut() {
                if w > 0.0 {
                    self.accumulate(&term.lhs, &res, w, vars, &adj, g);
                    if let Rhs::Word(word) = &term.rhs {
                        self.accumulate(word, &(-res.clone()), w, vars, &adj, g);
                    }
                }
            }
        }
        ev
    }

    fn objective(ev: &Evaluation, mu: f64, restoring: bool) -> f64 {
        if restoring {
            mu * ev.penalty
        } else {
            ev.distance_sq + mu * ev.penalty
        }
    }

    fn run(&self, start: [CMat; 4], opts: &SearchOptions, incumbent: f64, trace: &mut Vec<f64>) -> Result<RunOutcome> {
        let tol = Tolerances::default();
        let mut vars = start;
        let mut mu = 1.0;
        let mut step = 0.25;
        let mut best: Option<f64> = None;
        let mut running = incumbent;
        let mut iterations = 0;
        let total = opts.max_iters + opts.restore_iters;
        // restoration gives up when the penalty fails to halve over a window
        let mut window_start = f64::INFINITY;
        for it in 0..total {
            let restoring = it >= opts.max_iters;
            if !restoring && it > 0 && it % 50 == 0 {
                mu *= 2.0;
            }
            let dist_w = if restoring { 0.0 } else { 1.0 };
            let mut grads = [
                CMat::zeros(self.dim, self.dim),
                CMat::zeros(self.dim, self.dim),
                CMat::zeros(self.dim, self.dim),
                CMat::zeros(self.dim, self.dim),
            ];
            let ev = self.evaluate(&vars, dist_w, mu, Some(&mut grads));
            if ev.residual < opts.feasibility_tol {
                let b = ev.dist + ev.compat_residual / 2.0;
                best = Some(best.map_or(b, |x: f64| x.min(b)));
                running = running.min(b);
                if restoring {
                    trace.push(running);
                    iterations = it + 1;
                    break;
                }
            }
            trace.push(running);
            iterations = it + 1;
            let f0 = Self::objective(&ev, mu, restoring);
            if restoring && (it - opts.max_iters) % 50 == 0 {
                if f0 > 0.5 * window_start {
                    break;
                }
                window_start = f0;
            }
            // tangent projection G - X herm(X* G)
            for k in 0..4 {
                let xg = vars[k].adjoint() * &grads[k];
                let herm = (&xg + xg.adjoint()) * C64::new(0.5, 0.0);
                grads[k] -= &vars[k] * herm;
            }
            let gnorm: f64 = grads.iter().map(|g| g.norm_squared()).sum();
            if gnorm < 1e-30 {
                if restoring {
                    break;
                }
                continue;
            }
            let mut accepted = false;
            for _ in 0..40 {
                let trial = [0, 1, 2, 3].map(|k| {
                    closest_unitary(&(&vars[k] - &grads[k] * C64::new(step, 0.0)), &tol)
                        .map(|u| u.into_matrix())
                });
                let trial = match trial {
                    [Ok(a), Ok(b), Ok(c), Ok(d)] => [a, b, c, d],
                    _ => {
                        step *= 0.5;
                        continue;
                    }
                };
                let ev_t = self.evaluate(&trial, dist_w, mu, None);
                if Self::objective(&ev_t, mu, restoring) < f0 - 1e-4 * step * gnorm {
                    vars = trial;
                    step *= 1.5;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                if restoring {
                    break;
                }
                step = 0.25;
            }
        }
        Ok(RunOutcome { best, iterations })
    }
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub p: u64,
    pub nmax: u64,
    pub kinds: Vec<CongruenceKind>,
    pub search_iters: usize,
    pub seed: u64,
    /// Record wall-clock milliseconds; off gives reproducible rows.
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub kind: CongruenceKind,
    pub dim: usize,
    pub defect: f64,
    pub dist_upper_bound: f64,
    pub iterations: usize,
    pub wallclock_ms: u64,
}

/// `pi_+ = pi_- = ` the congruence representation mod `N`, for every `N`
/// in `2..=nmax` and kind (projective line only at prime `N`). Rows come
/// back in `(N, kind)` order.
pub fn scan(opts: &ScanOptions) -> Result<Vec<ScanRow>> {
    let ctx = default_generators(opts.p)?;
    let jobs: Vec<(u64, CongruenceKind)> = (2..=opts.nmax)
        .flat_map(|n| opts.kinds.iter().map(move |&k| (n, k)))
        .filter(|&(n, k)| k == CongruenceKind::Regular || is_prime(n))
        .collect();
    jobs.par_iter()
        .map(|&(n, kind)| {
            let start = Instant::now();
            let rep = SideRep::Congruence(CongruenceRep::new(n, kind)?);
            let search = SearchOptions {
                max_iters: opts.search_iters,
                seed: opts.seed ^ n.wrapping_mul(0x9e37_79b9_7f4a_7c15),
                ..SearchOptions::default()
            };
            let report = dist_search(&rep, &rep, &ctx, &search)?;
            Ok(ScanRow {
                n,
                kind,
                dim: rep.dim(),
                defect: report.defect,
                dist_upper_bound: report.dist_upper_bound.unwrap_or(f64::INFINITY),
                iterations: report.iterations,
                wallclock_ms: if opts.timing { start.elapsed().as_millis() as u64 } else { 0 },
            })
        })
        .collect()
}

/// `gcd(N, p) = 1`.
pub fn coprime(n: u64, p: u64) -> bool {
    n.gcd(&p) == 1
}

/// True when `x` lies in the plus congruence subgroup for `p`.
pub fn in_plus(x: &Sl2Int, p: u64) -> bool {
    (&x.c % BigInt::from(p)).is_zero()
}

pub fn in_minus(x: &Sl2Int, p: u64) -> bool {
    (&x.b % BigInt::from(p)).abs().is_zero()
}
