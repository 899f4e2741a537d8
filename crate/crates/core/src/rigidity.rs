//! Approximate intertwiners between a representation on a corner `pM_np`
//! and one on `M_n`: left-right defects, averaging, and the min-norm point
//! of an orbit convex hull.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::FreeWord;
use nalgebra::{DMatrix, DVector};

use crate::linalg::{hermitian_eigen, hs_norm, identity, is_projection, op_norm, CMat, C64};
use crate::rep::UnitaryRep;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    Collapsed,
    MaxIters,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub element: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntertwinerResult {
    /// Lies in `pM`; rescaled to unit HS ratio unless collapsed.
    pub xi: CMat,
    pub normalized_distance_to_p: f64,
    pub hs_norm_ratio: f64,
    pub op_norm: f64,
    /// `||pi(g) xi rho(g)^* - xi||_2 / ||p||_2` on the test ball.
    pub residuals: Vec<Residual>,
    pub status: Status,
    pub iterations: usize,
    /// Distance of the pre-rescaling point to `p`, normalized by `||p||_2`.
    pub delta: f64,
    /// `2 / (1 - delta)` when `delta < 1`.
    pub op_bound: f64,
    /// `delta^2 + 2 delta`.
    pub distance_bound: f64,
}

impl IntertwinerResult {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.value).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RigidityOptions {
    pub max_iters: usize,
    pub tol: f64,
    pub collapse_floor: f64,
    pub test_radius: usize,
    /// Frank-Wolfe duality-gap target for the min-norm method, relative to
    /// the largest squared atom norm.
    pub gap_tol: f64,
}

impl Default for RigidityOptions {
    fn default() -> Self {
        RigidityOptions { max_iters: 20_000, tol: 1e-12, collapse_floor: 0.1, test_radius: 2, gap_tol: 1e-12 }
    }
}

/// `pi` acting on the corner (lifted to `M_n` as `V pi V^* + (1 - p)`), `rho`
/// on `M_n`, and the projection `p`; both reps share one generator alphabet.
#[derive(Clone, Debug)]
pub struct CornerPair {
    pi: UnitaryRep,
    rho: UnitaryRep,
    p: CMat,
    p_norm: f64,
}

impl CornerPair {
    /// `pi` may be given on `C^{rank p}` (identified with the range of `p`
    /// through an eigenbasis) or on `C^n` commuting with `p`.
    pub fn new(pi: &UnitaryRep, rho: &UnitaryRep, p: &CMat, proj_tol: f64) -> Result<Self> {
        is_projection(p, proj_tol)?;
        let n = p.nrows();
        if rho.dim() != n {
            return Err(Error::DimensionMismatch(format!("rho has dimension {}, p is {n}x{n}", rho.dim())));
        }
        if pi.names() != rho.names() {
            return Err(Error::InvalidParameter("pi and rho must share a generator alphabet".into()));
        }
        let (vals, vecs) = hermitian_eigen(p, proj_tol)?;
        let range: Vec<usize> = (0..n).filter(|&i| vals[i] > 0.5).collect();
        let r = range.len();
        if r == 0 {
            return Err(Error::InvalidParameter("projection is zero".into()));
        }
        let lifted = if pi.dim() == n {
            for (name, m) in pi.names().iter().zip(pi.matrices()) {
                let dev = (m * p - p * m).norm();
                if dev > proj_tol * n as f64 {
                    return Err(Error::InvalidParameter(format!(
                        "pi(`{name}`) does not commute with p (deviation {dev:e})"
                    )));
                }
            }
            pi.clone()
        } else if pi.dim() == r {
            let v = CMat::from_fn(n, r, |i, k| vecs[(i, range[k])]);
            let comp = identity(n) - p;
            pi.with_matrices(pi.matrices().iter().map(|m| &v * m * v.adjoint() + &comp).collect())
        } else {
            return Err(Error::DimensionMismatch(format!(
                "pi has dimension {}, expected rank(p) = {r} or {n}",
                pi.dim()
            )));
        };
        Ok(CornerPair { pi: lifted, rho: rho.clone(), p: p.clone(), p_norm: hs_norm(p, n) })
    }

    pub fn p(&self) -> &CMat {
        &self.p
    }

    pub fn p_norm(&self) -> f64 {
        self.p_norm
    }

    fn n(&self) -> usize {
        self.p.nrows()
    }

    /// `pi(w) x rho(w)^*`.
    pub fn act(&self, w: &FreeWord, x: &CMat) -> Result<CMat> {
        Ok(self.pi.evaluate_word(w)? * x * self.rho.evaluate_word(w)?.adjoint())
    }

    /// `||pi(s) p rho(s)^* - p||_2 / ||p||_2`, directly and through
    /// `2(tau(p) - Re tau(p pi(s) p rho(s)^* p))`.
    pub fn left_right_defect(&self, s: &FreeWord) -> Result<LeftRightDefect> {
        let n = self.n();
        let moved = self.act(s, &self.p)?;
        let direct = hs_norm(&(&moved - &self.p), n) / self.p_norm;
        let tau = |x: &CMat| x.trace() / C64::new(n as f64, 0.0);
        let inner = tau(&(&self.p * &moved * &self.p)).re;
        let sq = 2.0 * (tau(&self.p).re - inner);
        let via_trace = sq.max(0.0).sqrt() / self.p_norm;
        Ok(LeftRightDefect { direct, via_trace })
    }

    fn residuals(&self, xi: &CMat, test_ball: &[(String, FreeWord)]) -> Result<Vec<Residual>> {
        let n = self.n();
        test_ball
            .iter()
            .map(|(key, w)| {
                let v = hs_norm(&(self.act(w, xi)? - xi), n) / self.p_norm;
                Ok(Residual { element: key.clone(), value: v })
            })
            .collect()
    }

    fn test_ball(&self, radius: usize) -> Result<Vec<(String, FreeWord)>> {
        Ok(self
            .rho
            .generating_set()
            .ball_words(radius)?
            .into_iter()
            .map(|(g, w)| (g.key(), w))
            .collect())
    }

    fn finish(&self, t: CMat, status: Status, iterations: usize, opts: &RigidityOptions) -> Result<IntertwinerResult> {
        let n = self.n();
        let ratio = hs_norm(&t, n) / self.p_norm;
        let delta = hs_norm(&(&t - &self.p), n) / self.p_norm;
        let op_bound = if delta < 1.0 { 2.0 / (1.0 - delta) } else { f64::INFINITY };
        let collapsed = ratio < opts.collapse_floor;
        let xi = if collapsed || ratio == 0.0 { t } else { t / C64::new(ratio, 0.0) };
        let status = if collapsed { Status::Collapsed } else { status };
        let residuals = self.residuals(&xi, &self.test_ball(opts.test_radius)?)?;
        Ok(IntertwinerResult {
            normalized_distance_to_p: hs_norm(&(&xi - &self.p), n) / self.p_norm,
            hs_norm_ratio: hs_norm(&xi, n) / self.p_norm,
            op_norm: op_norm(&xi),
            xi,
            residuals,
            status,
            iterations,
            delta,
            op_bound,
            distance_bound: delta * delta + 2.0 * delta,
        })
    }

    /// `Phi(T) = (1/|S|) sum_s pi(s) T rho(s)^*` over the given words.
    pub fn average(&self, steps: &[FreeWord], t: &CMat) -> Result<CMat> {
        let pairs: Vec<(CMat, CMat)> = steps
            .iter()
            .map(|w| Ok((self.pi.evaluate_word(w)?, self.rho.evaluate_word(w)?.adjoint())))
            .collect::<Result<_>>()?;
        Ok(apply_average(&pairs, t))
    }

    /// Iterates `Phi` from `T_0 = p`. `steps` defaults to the symmetric
    /// generating set when empty.
    pub fn averaging_intertwiner(&self, steps: &[FreeWord], opts: &RigidityOptions) -> Result<IntertwinerResult> {
        let steps: Vec<FreeWord> = if steps.is_empty() {
            self.rho.generating_set().symmetric_set().iter().map(|s| FreeWord::letter(s.letter)).collect()
        } else {
            steps.to_vec()
        };
        let pairs: Vec<(CMat, CMat)> = steps
            .iter()
            .map(|w| Ok((self.pi.evaluate_word(w)?, self.rho.evaluate_word(w)?.adjoint())))
            .collect::<Result<_>>()?;
        let n = self.n();
        let mut t = self.p.clone();
        for k in 1..=opts.max_iters {
            let next = apply_average(&pairs, &t);
            let change = hs_norm(&(&next - &t), n) / self.p_norm;
            t = next;
            if change < opts.tol {
                return self.finish(t, Status::Converged, k, opts);
            }
        }
        self.finish(t, Status::MaxIters, opts.max_iters, opts)
    }

    /// Min-norm point of `conv{pi(g) p rho(g)^* : g in B_radius}`, rescaled
    /// to unit HS ratio.
    pub fn bounded_intertwiner(&self, radius: usize, opts: &RigidityOptions) -> Result<IntertwinerResult> {
        let words: Vec<FreeWord> =
            self.rho.generating_set().ball_words(radius)?.into_iter().map(|(_, w)| w).collect();
        self.bounded_intertwiner_over(&words, opts)
    }

    pub fn bounded_intertwiner_over(&self, words: &[FreeWord], opts: &RigidityOptions) -> Result<IntertwinerResult> {
        let atoms: Vec<CMat> = words.iter().map(|w| self.act(w, &self.p)).collect::<Result<_>>()?;
        let mn = min_norm_point(&atoms, opts.gap_tol, opts.max_iters)?;
        let status = if mn.converged { Status::Converged } else { Status::MaxIters };
        self.finish(mn.point, status, mn.iterations, opts)
    }
}

fn apply_average(pairs: &[(CMat, CMat)], t: &CMat) -> CMat {
    let mut acc = CMat::zeros(t.nrows(), t.ncols());
    for (a, b) in pairs {
        acc += a * t * b;
    }
    acc / C64::new(pairs.len() as f64, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeftRightDefect {
    pub direct: f64,
    pub via_trace: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinNormPoint {
    pub weights: Vec<f64>,
    pub point: CMat,
    pub objective: f64,
    /// Frank-Wolfe duality gap at exit.
    pub gap: f64,
    /// The gap met the tolerance, or the Frank-Wolfe vertex was already in
    /// the active set (zero gap up to rounding).
    pub converged: bool,
    pub iterations: usize,
    /// Objective after every iteration (nonincreasing).
    pub trace: Vec<f64>,
}

/// Minimizes `||sum_i c_i A_i||_2^2` over the simplex by fully corrective
/// Frank-Wolfe (Wolfe's min-norm-point iteration): each major step adds the
/// Frank-Wolfe vertex, minor steps re-solve the affine problem on the active
/// set. Stops once the duality gap is at most `gap_tol` times the largest
/// squared atom norm.
pub fn min_norm_point(atoms: &[CMat], gap_tol: f64, max_iters: usize) -> Result<MinNormPoint> {
    let k = atoms.len();
    if k == 0 {
        return Err(Error::InvalidParameter("min-norm point of an empty set".into()));
    }
    let n = atoms[0].nrows();
    if atoms.iter().any(|a| a.shape() != atoms[0].shape()) {
        return Err(Error::DimensionMismatch("atoms must share one shape".into()));
    }
    let gram = DMatrix::<f64>::from_fn(k, k, |i, j| {
        atoms[i].iter().zip(atoms[j].iter()).map(|(a, b)| (a.conj() * b).re).sum::<f64>() / n as f64
    });
    let start = (0..k).min_by(|&a, &b| gram[(a, a)].total_cmp(&gram[(b, b)])).expect("nonempty");
    let scale = (0..k).map(|i| gram[(i, i)]).fold(f64::MIN_POSITIVE, f64::max);
    let mut c = vec![0.0; k];
    c[start] = 1.0;
    let mut active = vec![start];
    let objective = |c: &[f64]| {
        let v = DVector::from_column_slice(c);
        (v.transpose() * &gram * &v)[(0, 0)]
    };
    let mut trace = Vec::new();
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let mut f = objective(&c);
    for it in 1..=max_iters {
        iterations = it;
        let gc = &gram * DVector::from_column_slice(&c);
        let fw = (0..k).min_by(|&a, &b| gc[a].total_cmp(&gc[b])).expect("nonempty");
        gap = 2.0 * (f - gc[fw]);
        if gap <= gap_tol * scale || active.contains(&fw) {
            converged = true;
            trace.push(f);
            break;
        }
        active.push(fw);
        // minor cycles
        loop {
            let m = active.len();
            let mut kkt = DMatrix::<f64>::zeros(m + 1, m + 1);
            for (a, &i) in active.iter().enumerate() {
                for (b, &j) in active.iter().enumerate() {
                    kkt[(a, b)] = gram[(i, j)];
                }
                kkt[(a, m)] = 1.0;
                kkt[(m, a)] = 1.0;
            }
            let mut rhs = DVector::<f64>::zeros(m + 1);
            rhs[m] = 1.0;
            let sol = kkt.svd(true, true).solve(&rhs, 1e-14).map_err(|e| Error::InvalidParameter(e.into()))?;
            let y: Vec<f64> = (0..m).map(|a| sol[a]).collect();
            if y.iter().all(|&v| v > 1e-15) {
                for ci in c.iter_mut() {
                    *ci = 0.0;
                }
                for (a, &i) in active.iter().enumerate() {
                    c[i] = y[a];
                }
                break;
            }
            // move toward y until a weight hits zero
            let mut theta: f64 = 1.0;
            for (a, &i) in active.iter().enumerate() {
                if y[a] <= 1e-15 {
                    let denom = c[i] - y[a];
                    if denom > 0.0 {
                        theta = theta.min(c[i] / denom);
                    }
                }
            }
            for (a, &i) in active.iter().enumerate() {
                c[i] += theta * (y[a] - c[i]);
            }
            active.retain(|&i| c[i] > 1e-15);
            for (i, ci) in c.iter_mut().enumerate() {
                if !active.contains(&i) {
                    *ci = 0.0;
                }
            }
            if active.len() <= 1 {
                break;
            }
        }
        let total: f64 = c.iter().sum();
        for ci in c.iter_mut() {
            *ci /= total;
        }
        f = objective(&c).min(f);
        trace.push(f);
    }
    let mut point = CMat::zeros(atoms[0].nrows(), atoms[0].ncols());
    for (ci, a) in c.iter().zip(atoms) {
        if *ci > 0.0 {
            point += a * C64::new(*ci, 0.0);
        }
    }
    let objective = hs_norm(&point, n).powi(2);
    Ok(MinNormPoint { weights: c, point, objective, gap, converged, iterations, trace })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{sl2_mod_generators, FiniteGroup};
    use crate::linalg::{c64, expi_hermitian, random_ginibre, random_hermitian, random_unitary, Tolerances};
    use crate::rep::constants_complement;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn steinberg(p: u64) -> (FiniteGroup, UnitaryRep) {
        let gens = sl2_mod_generators(p).unwrap();
        let g = FiniteGroup::generate(&gens, 10_000).unwrap();
        let pl = UnitaryRep::projective_line(&gens, &tol()).unwrap();
        (g, pl.restrict(&constants_complement(p as usize + 1), 1e-12).unwrap())
    }

    fn conjugated(rho: &UnitaryRep, seed: u64, theta: f64) -> (UnitaryRep, CMat) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(&mut rng, rho.dim());
        let h = &h / c64(op_norm(&h), 0.0);
        let u = expi_hermitian(&(h * c64(theta, 0.0))).unwrap();
        (rho.conjugate_by(&u), u)
    }

    #[test]
    fn trivial_cases() {
        let (_, rho) = steinberg(3);
        let pair = CornerPair::new(&rho, &rho, &identity(3), 1e-10).unwrap();
        let s = FreeWord::letter(1);
        assert!(pair.left_right_defect(&s).unwrap().direct < 1e-14);
        let avg = pair.averaging_intertwiner(&[], &RigidityOptions::default()).unwrap();
        assert_eq!(avg.status, Status::Converged);
        assert!((avg.xi.clone() - identity(3)).norm() < 1e-12);
        assert!(avg.max_residual() < 1e-12);
        let mn = pair.bounded_intertwiner(2, &RigidityOptions::default()).unwrap();
        assert!((mn.op_norm - 1.0).abs() < 1e-12);
        assert!((mn.xi - identity(3)).norm() < 1e-10);
    }

    #[test]
    fn defect_formulas_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for r in 1..4usize {
            let n = 5;
            let u = random_unitary(&mut rng, n);
            let v = u.columns(0, r).into_owned();
            let p = &v * v.adjoint();
            let gens = sl2_mod_generators(3).unwrap();
            let pi_m: Vec<CMat> = (0..2).map(|_| random_unitary(&mut rng, r)).collect();
            let rho_m: Vec<CMat> = (0..2).map(|_| random_unitary(&mut rng, n)).collect();
            let pi = UnitaryRep::new(gens.clone(), pi_m, &tol()).unwrap();
            let rho = UnitaryRep::new(gens, rho_m, &tol()).unwrap();
            let pair = CornerPair::new(&pi, &rho, &p, 1e-10).unwrap();
            for l in [1, -1, 2, -2] {
                let d = pair.left_right_defect(&FreeWord::letter(l)).unwrap();
                assert!((d.direct - d.via_trace).abs() < 1e-9, "{d:?}");
            }
        }
    }

    #[test]
    fn negated_corner_defect() {
        // pi(s) = -p rho(s) p with rho(s) preserving the corner: the moved
        // projection is -p, so the defect is ||-2p||_2 / ||p||_2 = 2.
        let n = 4;
        let mut p = CMat::zeros(n, n);
        p[(0, 0)] = c64(1.0, 0.0);
        p[(1, 1)] = c64(1.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_unitary(&mut rng, 2);
        let b = random_unitary(&mut rng, 2);
        let rho_s = crate::linalg::direct_sum(&[&a, &b]);
        let pi_s = -(&p * &rho_s * &p);
        let pi_corner = pi_s.view((0, 0), (2, 2)).into_owned();
        let free = |m: CMat| UnitaryRep::free(&["s"], vec![m], &tol()).unwrap();
        let pair = CornerPair::new(&free(pi_corner), &free(rho_s), &p, 1e-10).unwrap();
        let d = pair.left_right_defect(&FreeWord::letter(1)).unwrap();
        let moved = pair.act(&FreeWord::letter(1), &p).unwrap();
        let direct = hs_norm(&(moved - &p), n) / hs_norm(&p, n);
        assert!((d.direct - direct).abs() < 1e-12);
        assert!((d.direct - 2.0).abs() < 1e-12);
        assert!((d.via_trace - 2.0).abs() < 1e-9);
    }

    #[test]
    fn averaging_recovers_conjugator() {
        for (p, seed) in [(3u64, 1u64), (5, 2), (7, 3)] {
            let (_, rho) = steinberg(p);
            let (pi, u) = conjugated(&rho, seed, 0.05);
            let pair = CornerPair::new(&pi, &rho, &identity(rho.dim()), 1e-10).unwrap();
            let res = pair.averaging_intertwiner(&[], &RigidityOptions::default()).unwrap();
            assert_eq!(res.status, Status::Converged);
            assert!(res.max_residual() < 1e-6, "p={p}: {}", res.max_residual());
            assert!((res.hs_norm_ratio - 1.0).abs() < 1e-9);
            assert!(res.op_norm <= 2.0);
            // xi = phase * u
            let phase = (u.adjoint() * &res.xi).trace() / c64(rho.dim() as f64, 0.0);
            assert!((phase.norm() - 1.0).abs() < 1e-8);
            assert!((&res.xi - &u * phase).norm() < 1e-6);
        }
    }

    #[test]
    fn averaging_is_contractive_and_fixed_points_intertwine() {
        let (_, rho) = steinberg(5);
        let (pi, _) = conjugated(&rho, 9, 0.3);
        let pair = CornerPair::new(&pi, &rho, &identity(5), 1e-10).unwrap();
        let steps: Vec<FreeWord> = [1, -1, 2, -2].iter().map(|&l| FreeWord::letter(l)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let t = random_ginibre(&mut rng, 5, 5);
            let phi = pair.average(&steps, &t).unwrap();
            assert!(hs_norm(&phi, 5) <= hs_norm(&t, 5) + 1e-12);
            let gap = hs_norm(&(&phi - &t), 5);
            for w in &steps {
                let r = hs_norm(&(pair.act(w, &t).unwrap() - &t), 5);
                assert!(r <= steps.len() as f64 * gap + 1e-12);
            }
        }
    }

    #[test]
    fn inequivalent_irreducibles_collapse() {
        let gens = sl2_mod_generators(2).unwrap();
        let g = FiniteGroup::generate(&gens, 10).unwrap();
        let pl = UnitaryRep::projective_line(&gens, &tol()).unwrap();
        let std = pl.restrict(&constants_complement(3), 1e-12).unwrap();
        let sign = pl.sign_of().unwrap();
        let words: Vec<FreeWord> = (0..g.order()).map(|i| g.word(i).clone()).collect();
        let mut p = CMat::zeros(2, 2);
        p[(0, 0)] = c64(1.0, 0.0);
        let pair = CornerPair::new(&sign, &std, &p, 1e-10).unwrap();
        // Schur orthogonality by brute force: the full-group average of
        // pi(g) X rho(g)^* vanishes for every X in pM.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = &p * random_ginibre(&mut rng, 2, 2);
        assert!(pair.average(&words, &x).unwrap().norm() < 1e-14);
        let opts = RigidityOptions::default();
        assert_eq!(pair.averaging_intertwiner(&words, &opts).unwrap().status, Status::Collapsed);
        assert_eq!(pair.bounded_intertwiner_over(&words, &opts).unwrap().status, Status::Collapsed);
    }

    #[test]
    fn min_norm_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_ginibre(&mut rng, 3, 3);
        let r = min_norm_point(std::slice::from_ref(&a), 1e-20, 100).unwrap();
        assert_eq!(r.point, a);
        let r = min_norm_point(&[a.clone(), -a.clone()], 1e-20, 100).unwrap();
        assert!(r.point.norm() < 1e-12);
        assert!(min_norm_point(&[], 1e-10, 10).is_err());
    }

    #[test]
    fn min_norm_matches_grid_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..3 {
            let atoms: Vec<CMat> = (0..3).map(|_| random_ginibre(&mut rng, 4, 4)).collect();
            let r = min_norm_point(&atoms, 1e-14, 10_000).unwrap();
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            assert!(r.weights.iter().all(|&w| w >= 0.0));
            assert!(r.trace.windows(2).all(|w| w[1] <= w[0] + 1e-15));
            let steps = 1000;
            let mut best = f64::INFINITY;
            for i in 0..=steps {
                for j in 0..=steps - i {
                    let (a, b) = (i as f64 / steps as f64, j as f64 / steps as f64);
                    let x = &atoms[0] * c64(a, 0.0) + &atoms[1] * c64(b, 0.0) + &atoms[2] * c64(1.0 - a - b, 0.0);
                    best = best.min(hs_norm(&x, 4).powi(2));
                }
            }
            assert!(r.objective <= best + 1e-5);
            assert!(best - r.objective < 1e-4);
        }
    }

    #[test]
    fn bounded_intertwiner_over_growing_balls() {
        let (g, rho) = steinberg(5);
        let (pi, _) = conjugated(&rho, 5, 0.05);
        let pair = CornerPair::new(&pi, &rho, &identity(5), 1e-10).unwrap();
        let opts = RigidityOptions::default();
        let mut prev = f64::INFINITY;
        for radius in 1..=3 {
            let res = pair.bounded_intertwiner(radius, &opts).unwrap();
            assert!(res.op_norm <= 2.0);
            assert!(res.op_norm <= res.op_bound);
            assert!(res.normalized_distance_to_p <= res.distance_bound + 1e-12);
            assert!(res.max_residual() <= prev + 1e-9);
            prev = res.max_residual();
        }
        let words: Vec<FreeWord> = (0..g.order()).map(|i| g.word(i).clone()).collect();
        let res = pair.bounded_intertwiner_over(&words, &opts).unwrap();
        assert_eq!(res.status, Status::Converged);
        assert!(res.max_residual() < 1e-6, "{}", res.max_residual());
    }
}
