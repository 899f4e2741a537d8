//! Dense complex linear algebra with the normalizations used throughout the
//! crate: normalized trace `tau(x) = tr(x)/n`, the normalized Hilbert-Schmidt
//! norm `||x||_2 = tau(x* x)^{1/2}` and the dimension-padding `d2` metric.

use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Numerical tolerances shared by the linear-algebra routines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub unitary: f64,
    pub herm: f64,
    pub eig: f64,
    pub rank: f64,
    /// Eigenvalues closer than this are merged into one atom.
    pub eig_cluster: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            unitary: 1e-10,
            herm: 1e-8,
            eig: 1e-9,
            rank: 1e-12,
            eig_cluster: 1e-8,
        }
    }
}

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

fn ensure_square(x: &CMat) -> Result<usize> {
    if x.nrows() != x.ncols() {
        return Err(Error::NotSquare { rows: x.nrows(), cols: x.ncols() });
    }
    Ok(x.nrows())
}

pub fn ensure_finite(x: &CMat) -> Result<()> {
    if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// `tau(x) = tr(x)/n`.
pub fn normalized_trace(x: &CMat) -> C64 {
    let n = x.nrows().max(1);
    x.trace() / n as f64
}

/// `||x||_2 = (sum |x_ij|^2 / n)^{1/2}` for square `x`.
pub fn normalized_hs_norm(x: &CMat) -> Result<f64> {
    let n = ensure_square(x)?;
    Ok(hs_norm(x, n))
}

#[inline]
pub(crate) fn hs_norm(x: &CMat, n: usize) -> f64 {
    (x.norm_squared() / n.max(1) as f64).sqrt()
}

/// Normalized HS distance between two matrices of the same size.
pub fn hs_distance(x: &CMat, y: &CMat) -> f64 {
    let n = x.nrows().max(1);
    let s: f64 = x.iter().zip(y.iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
    (s / n as f64).sqrt()
}

/// Largest singular value.
pub fn op_norm(x: &CMat) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// The generalized Hilbert-Schmidt distance: the smaller matrix is embedded
/// in the top-left corner of the larger one, padded with zeros, and the
/// normalized HS norm is taken in the larger dimension.
pub fn d2_distance(x: &CMat, y: &CMat) -> Result<f64> {
    ensure_square(x)?;
    ensure_square(y)?;
    let (small, large) = if x.nrows() <= y.nrows() { (x, y) } else { (y, x) };
    let n = small.nrows();
    let m = large.nrows();
    let mut s = 0.0;
    for j in 0..m {
        for i in 0..m {
            let a = if i < n && j < n { small[(i, j)] } else { C64::new(0.0, 0.0) };
            s += (a - large[(i, j)]).norm_sqr();
        }
    }
    Ok((s / m.max(1) as f64).sqrt())
}

/// `||x - x*||_op`, measured with the Frobenius bound for speed on large inputs.
pub fn hermitian_deviation(x: &CMat) -> f64 {
    let d = x - x.adjoint();
    if x.nrows() <= 64 {
        op_norm(&d)
    } else {
        d.norm()
    }
}

pub fn unitary_deviation(x: &CMat) -> f64 {
    let n = x.nrows();
    let d = x.adjoint() * x - identity(n);
    if n <= 64 {
        op_norm(&d)
    } else {
        d.norm()
    }
}

/// A square matrix with `||U*U - I||_op` below the configured tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(CMat);

impl UnitaryMatrix {
    pub fn new(m: CMat, tol: f64) -> Result<Self> {
        ensure_square(&m)?;
        ensure_finite(&m)?;
        let deviation = unitary_deviation(&m);
        if deviation > tol {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(UnitaryMatrix(m))
    }

    pub fn identity(n: usize) -> Self {
        UnitaryMatrix(identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        UnitaryMatrix(self.0.adjoint())
    }
}

impl AsRef<CMat> for UnitaryMatrix {
    fn as_ref(&self) -> &CMat {
        &self.0
    }
}

/// Finite atomic probability measure on the real line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    /// `(value, weight)` pairs, values strictly increasing.
    pub atoms: Vec<(f64, f64)>,
}

impl SpectralMeasure {
    pub fn dirac(v: f64) -> Self {
        SpectralMeasure { atoms: vec![(v, 1.0)] }
    }

    /// Groups sorted eigenvalues into atoms; consecutive values closer than
    /// `cluster` share an atom located at their mean.
    pub fn from_eigenvalues(values: &[f64], cluster: f64) -> Self {
        let mut v: Vec<f64> = values.to_vec();
        v.sort_by(|a, b| a.total_cmp(b));
        let n = v.len().max(1) as f64;
        let mut atoms = Vec::new();
        let mut i = 0;
        while i < v.len() {
            let mut j = i + 1;
            while j < v.len() && v[j] - v[j - 1] <= cluster {
                j += 1;
            }
            let group = &v[i..j];
            let mean = group.iter().sum::<f64>() / group.len() as f64;
            atoms.push((mean, group.len() as f64 / n));
            i = j;
        }
        SpectralMeasure { atoms }
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// `sum_i w_i v_i^k`.
    pub fn moment(&self, k: u32) -> f64 {
        self.atoms.iter().map(|&(v, w)| w * v.powi(k as i32)).sum()
    }

    /// Mass of the closed interval `[a, b]`.
    pub fn interval_weight(&self, a: f64, b: f64) -> Result<f64> {
        if a > b || a.is_nan() || b.is_nan() {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(self
            .atoms
            .iter()
            .filter(|(v, _)| *v >= a && *v <= b)
            .map(|a| a.1)
            .sum())
    }

    pub fn min_value(&self) -> f64 {
        self.atoms.first().map(|a| a.0).unwrap_or(0.0)
    }

    pub fn max_value(&self) -> f64 {
        self.atoms.last().map(|a| a.0).unwrap_or(0.0)
    }
}

/// Eigen-decomposition of a Hermitian matrix; eigenvalues ascending with the
/// matching eigenvectors as columns.
pub fn hermitian_eigen(x: &CMat, herm_tol: f64) -> Result<(Vec<f64>, CMat)> {
    let n = ensure_square(x)?;
    ensure_finite(x)?;
    let deviation = hermitian_deviation(x);
    if deviation > herm_tol {
        return Err(Error::NotHermitian { deviation });
    }
    if n == 0 {
        return Ok((Vec::new(), CMat::zeros(0, 0)));
    }
    let h = (x + x.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    Ok((values, vecs))
}

/// Spectral measure `mu_x` of a Hermitian matrix: eigenvalues of `(x + x*)/2`
/// weighted by multiplicity over `n`.
pub fn hermitian_spectrum(x: &CMat, tol: &Tolerances) -> Result<SpectralMeasure> {
    let (values, _) = hermitian_eigen(x, tol.herm)?;
    Ok(SpectralMeasure::from_eigenvalues(&values, tol.eig_cluster))
}

/// `tau(chi_[a,b](x))`; the interval is widened by `tol.eig` on both sides to
/// absorb eigensolver round-off at the endpoints.
pub fn spectral_interval_weight(x: &CMat, a: f64, b: f64, tol: &Tolerances) -> Result<f64> {
    if a > b || a.is_nan() || b.is_nan() {
        return Err(Error::InvalidInterval { a, b });
    }
    let (values, _) = hermitian_eigen(x, tol.herm)?;
    let n = values.len().max(1) as f64;
    let count = values
        .iter()
        .filter(|&&v| v >= a - tol.eig && v <= b + tol.eig)
        .count();
    Ok(count as f64 / n)
}

struct SortedSvd {
    u: CMat,
    values: Vec<f64>,
    v: CMat,
}

fn sorted_svd(x: &CMat) -> SortedSvd {
    let svd = x.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut us = CMat::zeros(u.nrows(), k);
    let mut vs = CMat::zeros(v_t.ncols(), k);
    let mut values = Vec::with_capacity(k);
    for (c, &i) in order.iter().enumerate() {
        us.set_column(c, &u.column(i));
        vs.set_column(c, &v_t.row(i).adjoint());
        values.push(svd.singular_values[i]);
    }
    SortedSvd { u: us, values, v: vs }
}

/// Singular values in decreasing order.
pub fn singular_values(x: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = x.clone().svd(false, false).singular_values.iter().cloned().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Unitary polar factor `U V*` of `x = U Sigma V*`.
pub fn closest_unitary(x: &CMat, tol: &Tolerances) -> Result<UnitaryMatrix> {
    ensure_square(x)?;
    ensure_finite(x)?;
    let svd = sorted_svd(x);
    let sigma_min = svd.values.last().cloned().unwrap_or(0.0);
    if sigma_min < tol.rank {
        return Err(Error::RankDeficient { sigma_min });
    }
    Ok(UnitaryMatrix(&svd.u * svd.v.adjoint()))
}

/// The two largest singular values and the top right-singular vector.
#[derive(Clone, Debug)]
pub struct SingularTriple {
    pub lambda1: f64,
    pub lambda2: f64,
    pub top_right_vector: CVec,
}

pub fn svd_top(t: &CMat) -> Result<SingularTriple> {
    ensure_square(t)?;
    ensure_finite(t)?;
    if t.nrows() == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let svd = sorted_svd(t);
    let lambda1 = svd.values[0];
    let lambda2 = svd.values.get(1).cloned().unwrap_or(0.0);
    let mut v: CVec = svd.v.column(0).into_owned();
    // Fix the phase so the largest-modulus coordinate is real positive.
    let (imax, _) = v
        .iter()
        .enumerate()
        .fold((0, -1.0), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
    let ph = v[imax] / v[imax].norm();
    if v[imax].norm() > 0.0 {
        v /= ph;
    }
    Ok(SingularTriple { lambda1, lambda2, top_right_vector: v })
}

pub fn is_projection(p: &CMat, tol: f64) -> Result<()> {
    ensure_square(p)?;
    let deviation = (p * p - p).norm().max((p - p.adjoint()).norm());
    if deviation > tol {
        return Err(Error::NotProjection { deviation });
    }
    Ok(())
}

/// Kronecker product `a (x) b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Entrywise complex conjugate.
pub fn conj(a: &CMat) -> CMat {
    a.map(|z| z.conj())
}

/// Block direct sum.
pub fn direct_sum(blocks: &[&CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    out
}

/// `exp(i H)` for Hermitian `H`.
pub fn expi_hermitian(h: &CMat) -> Result<CMat> {
    let (values, vecs) = hermitian_eigen(h, 1e-8)?;
    let d = CMat::from_diagonal(&CVec::from_iterator(
        values.len(),
        values.iter().map(|&l| C64::new(0.0, l).exp()),
    ));
    Ok(&vecs * d * vecs.adjoint())
}

/// Matrix of independent standard complex Gaussians (real and imaginary
/// parts each `N(0, 1/2)`).
pub fn random_ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the phase fix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = random_ginibre(rng, n, n);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = random_ginibre(rng, n, n);
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    let g = random_ginibre(rng, n, 1);
    let v: CVec = g.column(0).into_owned();
    let nv = v.norm();
    v / C64::new(nv, 0.0)
}

/// Column vector outer product `a b*`.
pub fn outer(a: &CVec, b: &CVec) -> CMat {
    a * b.adjoint()
}

/// On-disk matrix document: `rows`, `cols` and a flat row-major list of
/// `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &CMat) -> Self {
        let mut entries = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixDoc { rows: m.nrows(), cols: m.ncols(), entries }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Parse("rows and cols must be positive".into()));
        }
        if self.entries.len() != self.rows * self.cols {
            return Err(Error::Parse(format!(
                "expected {} entries for a {}x{} matrix, found {}",
                self.rows * self.cols,
                self.rows,
                self.cols,
                self.entries.len()
            )));
        }
        let m = CMat::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.entries[i * self.cols + j];
            C64::new(re, im)
        });
        ensure_finite(&m)?;
        Ok(m)
    }
}

pub fn matrix_from_json(s: &str) -> Result<CMat> {
    let doc: MatrixDoc = serde_json::from_str(s)?;
    doc.to_matrix()
}

pub fn matrix_to_json(m: &CMat) -> String {
    serde_json::to_string(&MatrixDoc::from_matrix(m)).expect("matrix serializes")
}

pub fn read_matrix(path: &Path) -> Result<CMat> {
    matrix_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_matrix(path: &Path, m: &CMat) -> Result<()> {
    std::fs::write(path, matrix_to_json(m))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> CMat {
        CMat::from_diagonal(&CVec::from_iterator(v.len(), v.iter().map(|&x| c64(x, 0.0))))
    }

    #[test]
    fn hs_norm_examples() {
        assert!((normalized_hs_norm(&identity(5)).unwrap() - 1.0).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((normalized_hs_norm(&diag(&[1.0, 0.0])).unwrap() - h).abs() < 1e-15);
        let mut n = CMat::zeros(2, 2);
        n[(0, 1)] = c64(1.0, 0.0);
        assert!((normalized_hs_norm(&n).unwrap() - h).abs() < 1e-15);
        assert!(matches!(
            normalized_hs_norm(&CMat::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn d2_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(&mut rng, 4);
        assert_eq!(d2_distance(&u, &u).unwrap(), 0.0);
        let one = identity(1);
        let d = d2_distance(&one, &identity(2)).unwrap();
        assert!((d - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((d2_distance(&identity(2), &identity(2).map(|z| -z)).unwrap() - 2.0).abs() < 1e-15);
        // argument order does not matter
        assert_eq!(d2_distance(&identity(2), &one).unwrap(), d);
    }

    #[test]
    fn spectrum_examples() {
        let tol = Tolerances::default();
        assert_eq!(hermitian_spectrum(&CMat::zeros(3, 3), &tol).unwrap(), SpectralMeasure::dirac(0.0));
        let m = hermitian_spectrum(&diag(&[0.0, 2.0]), &tol).unwrap();
        assert_eq!(m.atoms.len(), 2);
        assert!((m.atoms[0].0).abs() < 1e-12 && (m.atoms[0].1 - 0.5).abs() < 1e-15);
        assert!((m.atoms[1].0 - 2.0).abs() < 1e-12 && (m.atoms[1].1 - 0.5).abs() < 1e-15);

        let mut bad = CMat::zeros(2, 2);
        bad[(0, 1)] = c64(1.0, 0.0);
        assert!(matches!(hermitian_spectrum(&bad, &tol), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn interval_weight_examples() {
        let tol = Tolerances::default();
        let x = diag(&[0.0, 1.5, 1.5]);
        assert_eq!(spectral_interval_weight(&x, 0.1, 0.9, &tol).unwrap(), 0.0);
        assert!((spectral_interval_weight(&x, 1.0, 2.0, &tol).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(&mut rng, 6);
        let r = op_norm(&h);
        assert_eq!(spectral_interval_weight(&h, -r, r, &tol).unwrap(), 1.0);
        assert!(matches!(
            spectral_interval_weight(&x, 2.0, 1.0, &tol),
            Err(Error::InvalidInterval { .. })
        ));
    }

    #[test]
    fn closest_unitary_examples() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary(&mut rng, 4);
        let w = closest_unitary(&u, &tol).unwrap();
        assert!((w.as_matrix() - &u).norm() < 1e-12);
        let w = closest_unitary(&(identity(3) * c64(2.0, 0.0)), &tol).unwrap();
        assert!((w.as_matrix() - identity(3)).norm() < 1e-14);
        let mut singular = identity(2);
        singular[(1, 1)] = c64(0.0, 0.0);
        assert!(matches!(closest_unitary(&singular, &tol), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn closest_unitary_beats_random_search() {
        // Random-search oracle: no perturbed unitary is closer to x.
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_ginibre(&mut rng, 3, 3);
        let w = closest_unitary(&x, &tol).unwrap().into_matrix();
        let best = (&w - &x).norm();
        for _ in 0..1000 {
            let h = random_hermitian(&mut rng, 3) * c64(0.05, 0.0);
            let cand = &w * expi_hermitian(&h).unwrap();
            assert!((&cand - &x).norm() >= best - 1e-12);
        }
    }

    #[test]
    fn svd_top_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xi = random_unit_vector(&mut rng, 4);
        let t = outer(&xi, &xi);
        let s = svd_top(&t).unwrap();
        assert!((s.lambda1 - 1.0).abs() < 1e-12 && s.lambda2.abs() < 1e-12);
        let overlap = (xi.adjoint() * &s.top_right_vector)[(0, 0)].norm();
        assert!((overlap - 1.0).abs() < 1e-12);

        let s = svd_top(&diag(&[0.8, 0.6])).unwrap();
        assert!((s.lambda1 - 0.8).abs() < 1e-15 && (s.lambda2 - 0.6).abs() < 1e-15);
        assert!((s.top_right_vector[0] - c64(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn svd_top_matches_hermitian_eigen_oracle() {
        // Independent route: eigen-decomposition of T*T.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = random_ginibre(&mut rng, 8, 8);
        let s = svd_top(&t).unwrap();
        let (vals, vecs) = hermitian_eigen(&(t.adjoint() * &t), 1e-8).unwrap();
        let l1 = vals[7].sqrt();
        let l2 = vals[6].sqrt();
        assert!((s.lambda1 - l1).abs() < 1e-9);
        assert!((s.lambda2 - l2).abs() < 1e-9);
        let e: CVec = vecs.column(7).into_owned();
        let overlap = (e.adjoint() * &s.top_right_vector)[(0, 0)].norm();
        assert!((overlap - 1.0).abs() < 1e-9);
        let tt = t.adjoint() * &t;
        let resid = &tt * &s.top_right_vector - &s.top_right_vector * c64(l1 * l1, 0.0);
        assert!(resid.norm() < 1e-9);
    }

    #[test]
    fn matrix_doc_rejects_length_mismatch() {
        let s = r#"{"rows":2,"cols":2,"entries":[[1,0],[0,0],[0,0]]}"#;
        assert!(matches!(matrix_from_json(s), Err(Error::Parse(_))));
        let m = matrix_from_json(r#"{"rows":1,"cols":2,"entries":[[1.5,-2],[0,0.25]]}"#).unwrap();
        assert_eq!(m[(0, 0)], c64(1.5, -2.0));
        assert_eq!(m[(0, 1)], c64(0.0, 0.25));
    }
}
