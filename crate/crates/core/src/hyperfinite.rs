//! Block subalgebras of `M_n`, their trace-preserving conditional
//! expectations, and (eps, D)-hyperfiniteness certificates for tuples.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, hs_norm, identity, unitary_deviation, CMat, MatrixDoc, C64,
};

/// `u (sum_k M_{d_k} (x) 1_{m_k}) u^*`. In the rotated basis block `k`
/// occupies `d_k * m_k` consecutive coordinates laid out as `C^d (x) C^m`
/// (index `i * m + j`).
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSubalgebra {
    ambient_dim: usize,
    change_of_basis: CMat,
    blocks: Vec<(usize, usize)>,
}

impl BlockSubalgebra {
    pub fn new(change_of_basis: CMat, blocks: Vec<(usize, usize)>, unitary_tol: f64) -> Result<Self> {
        let n = change_of_basis.nrows();
        if change_of_basis.ncols() != n {
            return Err(Error::NotSquare { rows: n, cols: change_of_basis.ncols() });
        }
        if blocks.iter().any(|&(d, m)| d == 0 || m == 0) {
            return Err(Error::InvalidParameter("block sizes must be positive".into()));
        }
        let total: usize = blocks.iter().map(|&(d, m)| d * m).sum();
        if total != n {
            return Err(Error::DimensionMismatch(format!(
                "blocks cover {total} coordinates but the ambient dimension is {n}"
            )));
        }
        let deviation = unitary_deviation(&change_of_basis);
        if deviation > unitary_tol {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(BlockSubalgebra { ambient_dim: n, change_of_basis, blocks })
    }

    /// Blocks in the standard basis.
    pub fn standard(blocks: Vec<(usize, usize)>) -> Result<Self> {
        let n = blocks.iter().map(|&(d, m)| d * m).sum();
        Self::new(identity(n), blocks, 1e-10)
    }

    pub fn full(n: usize) -> Self {
        BlockSubalgebra { ambient_dim: n, change_of_basis: identity(n), blocks: vec![(n, 1)] }
    }

    pub fn diagonal(n: usize) -> Self {
        BlockSubalgebra { ambient_dim: n, change_of_basis: identity(n), blocks: vec![(1, 1); n] }
    }

    pub fn scalars(n: usize) -> Self {
        BlockSubalgebra { ambient_dim: n, change_of_basis: identity(n), blocks: vec![(1, n)] }
    }

    /// Completes blocks covering the first `r < n` rotated coordinates with
    /// the scalar block on the complement.
    pub fn unitalize(change_of_basis: CMat, mut blocks: Vec<(usize, usize)>, unitary_tol: f64) -> Result<Self> {
        let n = change_of_basis.nrows();
        let covered: usize = blocks.iter().map(|&(d, m)| d * m).sum();
        if covered > n {
            return Err(Error::DimensionMismatch(format!("blocks cover {covered} > {n}")));
        }
        if covered < n {
            blocks.push((1, n - covered));
        }
        Self::new(change_of_basis, blocks, unitary_tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn change_of_basis(&self) -> &CMat {
        &self.change_of_basis
    }

    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    /// Largest matrix-factor size.
    pub fn subhomogeneity_degree(&self) -> usize {
        self.blocks.iter().map(|&(d, _)| d).max().unwrap_or(0)
    }

    /// `sum_k d_k^2`.
    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|&(d, _)| d * d).sum()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.blocks.len());
        let mut acc = 0;
        for &(d, m) in &self.blocks {
            off.push(acc);
            acc += d * m;
        }
        off
    }

    /// Rotated-basis element `sum_k A_k (x) 1_{m_k}` built from the
    /// block matrices `A_k`.
    pub fn embed(&self, parts: &[CMat]) -> Result<CMat> {
        if parts.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch("one matrix per block expected".into()));
        }
        let mut y = CMat::zeros(self.ambient_dim, self.ambient_dim);
        for ((&(d, m), off), a) in self.blocks.iter().zip(self.offsets()).zip(parts) {
            if a.nrows() != d || a.ncols() != d {
                return Err(Error::DimensionMismatch(format!("block of size {d} expected")));
            }
            for i in 0..d {
                for k in 0..d {
                    for j in 0..m {
                        y[(off + i * m + j, off + k * m + j)] = a[(i, k)];
                    }
                }
            }
        }
        Ok(&self.change_of_basis * y * self.change_of_basis.adjoint())
    }

    /// Trace-preserving conditional expectation, i.e. the HS-orthogonal
    /// projection onto the subalgebra.
    pub fn conditional_expectation(&self, x: &CMat) -> Result<CMat> {
        let n = self.ambient_dim;
        if x.nrows() != n || x.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "expected {n}x{n}, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        let u = &self.change_of_basis;
        let y = u.adjoint() * x * u;
        let parts: Vec<CMat> = self
            .blocks
            .iter()
            .zip(self.offsets())
            .map(|(&(d, m), off)| {
                CMat::from_fn(d, d, |i, k| {
                    let s: C64 = (0..m).map(|j| y[(off + i * m + j, off + k * m + j)]).sum();
                    s / m as f64
                })
            })
            .collect();
        self.embed(&parts)
    }

    /// Orthonormal HS basis of the subalgebra (normalized trace inner
    /// product), for cross-checks.
    pub fn hs_basis(&self) -> Vec<CMat> {
        let n = self.ambient_dim as f64;
        let mut out = Vec::with_capacity(self.dimension());
        for (k, &(d, m)) in self.blocks.iter().enumerate() {
            for i in 0..d {
                for j in 0..d {
                    let parts: Vec<CMat> = self
                        .blocks
                        .iter()
                        .enumerate()
                        .map(|(l, &(dl, _))| {
                            let mut a = CMat::zeros(dl, dl);
                            if l == k {
                                a[(i, j)] = C64::new((n / m as f64).sqrt(), 0.0);
                            }
                            a
                        })
                        .collect();
                    out.push(self.embed(&parts).expect("consistent block shapes"));
                }
            }
        }
        out
    }

    pub fn to_doc(&self) -> BlockDoc {
        BlockDoc {
            ambient_dim: self.ambient_dim,
            change_of_basis: MatrixDoc::from_matrix(&self.change_of_basis),
            blocks: self.blocks.clone(),
        }
    }

    pub fn from_doc(doc: &BlockDoc, unitary_tol: f64) -> Result<Self> {
        let u = doc.change_of_basis.to_matrix()?;
        if u.nrows() != doc.ambient_dim {
            return Err(Error::DimensionMismatch("change of basis does not match ambient_dim".into()));
        }
        Self::new(u, doc.blocks.clone(), unitary_tol)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDoc {
    pub ambient_dim: usize,
    pub change_of_basis: MatrixDoc,
    pub blocks: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMode {
    /// Bounds the largest factor size.
    Subhomogeneity,
    /// Bounds `dim Q`.
    Dimension,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HyperfiniteCertificate {
    pub subalgebra: BlockSubalgebra,
    pub epsilon: f64,
    pub d_bound: usize,
    pub mode: BoundMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateDoc {
    #[serde(flatten)]
    pub subalgebra: BlockDoc,
    pub epsilon: f64,
    pub d_bound: usize,
    pub mode: BoundMode,
}

impl HyperfiniteCertificate {
    pub fn to_doc(&self) -> CertificateDoc {
        CertificateDoc {
            subalgebra: self.subalgebra.to_doc(),
            epsilon: self.epsilon,
            d_bound: self.d_bound,
            mode: self.mode,
        }
    }

    pub fn from_doc(doc: &CertificateDoc, unitary_tol: f64) -> Result<Self> {
        Ok(HyperfiniteCertificate {
            subalgebra: BlockSubalgebra::from_doc(&doc.subalgebra, unitary_tol)?,
            epsilon: doc.epsilon,
            d_bound: doc.d_bound,
            mode: doc.mode,
        })
    }

    pub fn read(path: &Path, unitary_tol: f64) -> Result<Self> {
        let doc: CertificateDoc = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::from_doc(&doc, unitary_tol)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(&self.to_doc())?)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub pass: bool,
    pub epsilon_measured: f64,
    pub d_measured: usize,
}

/// `max_i ||x_i - E_Q(x_i)||_2`.
pub fn approximation_error(tuple: &[CMat], q: &BlockSubalgebra) -> Result<f64> {
    let mut eps: f64 = 0.0;
    for x in tuple {
        let e = q.conditional_expectation(x)?;
        eps = eps.max(hs_norm(&(x - e), q.ambient_dim()));
    }
    Ok(eps)
}

/// Recomputes the approximation error from scratch and checks both bounds.
pub fn check_certificate(tuple: &[CMat], cert: &HyperfiniteCertificate) -> Result<CheckOutcome> {
    let q = &cert.subalgebra;
    let eps = approximation_error(tuple, q)?;
    let d = match cert.mode {
        BoundMode::Subhomogeneity => q.subhomogeneity_degree(),
        BoundMode::Dimension => q.dimension(),
    };
    Ok(CheckOutcome { pass: eps <= cert.epsilon && d <= cert.d_bound, epsilon_measured: eps, d_measured: d })
}

#[derive(Clone, Copy, Debug)]
pub struct FinderOptions {
    pub target_epsilon: f64,
    pub cluster_tol: f64,
    pub seed: u64,
}

impl FinderOptions {
    pub fn new(target_epsilon: f64, seed: u64) -> Self {
        FinderOptions { target_epsilon, cluster_tol: 1e-6, seed }
    }
}

/// Gram matrix of `vec(Y) -> ([Y, x_i], [Y, x_i^*])_i` (column-major vec).
fn commutator_gram(tuple: &[CMat]) -> CMat {
    let n = tuple[0].nrows();
    let id = identity(n);
    let mut g = CMat::zeros(n * n, n * n);
    for x in tuple {
        for y in [x.clone(), x.adjoint()] {
            let k = y.transpose().kronecker(&id) - id.kronecker(&y);
            g += k.adjoint() * k;
        }
    }
    g
}

/// Splits sorted eigenvalues into runs whose consecutive gaps are at most
/// `tol`; returns the run lengths.
fn cluster_sizes(values: &[f64], tol: f64) -> Vec<usize> {
    let mut sizes = Vec::new();
    let mut run = 0;
    for i in 0..values.len() {
        if i > 0 && values[i] - values[i - 1] > tol {
            sizes.push(run);
            run = 0;
        }
        run += 1;
    }
    if run > 0 {
        sizes.push(run);
    }
    sizes
}

/// Best-effort search for a small block subalgebra close to the tuple.
/// Every returned certificate is claimed at its own measured error, so it
/// passes [`check_certificate`]; when nothing beats the target the full
/// algebra (`D = n`, error 0) is returned.
pub fn find_blocks(tuple: &[CMat], opts: &FinderOptions) -> Result<HyperfiniteCertificate> {
    let n = tuple.first().map(|x| x.nrows()).ok_or_else(|| {
        Error::InvalidParameter("empty tuple".into())
    })?;
    for x in tuple {
        if x.nrows() != n || x.ncols() != n {
            return Err(Error::DimensionMismatch("tuple matrices must share one square shape".into()));
        }
    }
    let (_, vecs) = hermitian_eigen(&commutator_gram(tuple), 1e-6)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let kmax = if n <= 12 { n * n } else { 4 * n };
    let mut best: Option<(usize, f64, BlockSubalgebra)> = None;
    for k in 1..=kmax {
        let mut y = CMat::zeros(n, n);
        for c in 0..k {
            let w: f64 = StandardNormal.sample(&mut rng);
            let v = vecs.column(c);
            y += CMat::from_column_slice(n, n, v.as_slice()) * C64::new(w, 0.0);
        }
        let h = (&y + y.adjoint()) * C64::new(0.5, 0.0);
        let scale = crate::linalg::op_norm(&h);
        if scale < 1e-300 {
            continue;
        }
        let (vals, u) = hermitian_eigen(&(h / C64::new(scale, 0.0)), 1e-6)?;
        let blocks: Vec<(usize, usize)> =
            cluster_sizes(&vals, opts.cluster_tol).into_iter().map(|d| (d, 1)).collect();
        let q = BlockSubalgebra { ambient_dim: n, change_of_basis: u, blocks };
        let eps = approximation_error(tuple, &q)?;
        if eps > opts.target_epsilon {
            continue;
        }
        let d = q.subhomogeneity_degree();
        let better = match &best {
            None => true,
            Some((bd, be, _)) => d < *bd || (d == *bd && eps < *be),
        };
        if better {
            best = Some((d, eps, q));
        }
    }
    let (d, eps, q) = best.unwrap_or((n, 0.0, BlockSubalgebra::full(n)));
    Ok(HyperfiniteCertificate { subalgebra: q, epsilon: eps, d_bound: d, mode: BoundMode::Subhomogeneity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, normalized_trace, random_ginibre, random_unitary};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn degrees() {
        assert_eq!(BlockSubalgebra::full(5).subhomogeneity_degree(), 5);
        assert_eq!(BlockSubalgebra::diagonal(5).subhomogeneity_degree(), 1);
        let q = BlockSubalgebra::standard(vec![(2, 1), (3, 1), (1, 1)]).unwrap();
        assert_eq!(q.subhomogeneity_degree(), 3);
        assert_eq!(q.dimension(), 14);
    }

    #[test]
    fn enumerated_degree_vs_dimension() {
        // All block patterns with n <= 6: degree <= dim, equality exactly
        // when a single factor of size 1 or a lone (1, m) scalar block.
        fn patterns(n: usize) -> Vec<Vec<(usize, usize)>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for d in 1..=n {
                for m in 1..=n / d {
                    for mut rest in patterns(n - d * m) {
                        rest.insert(0, (d, m));
                        out.push(rest);
                    }
                }
            }
            out
        }
        for n in 1..=6 {
            for b in patterns(n) {
                let q = BlockSubalgebra::standard(b.clone()).unwrap();
                let (deg, dim) = (q.subhomogeneity_degree(), q.dimension());
                assert!(deg <= dim);
                assert_eq!(deg == dim, b.len() == 1 && b[0].0 == 1, "{b:?}");
            }
        }
    }

    #[test]
    fn expectation_examples() {
        let x = CMat::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(2.0, 1.0), c64(3.0, 0.0), c64(4.0, -1.0)]);
        let e = BlockSubalgebra::diagonal(2).conditional_expectation(&x).unwrap();
        assert_eq!(e, CMat::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(4.0, -1.0)]));
        let mut r = rng(5);
        let x = random_ginibre(&mut r, 4, 4);
        let e = BlockSubalgebra::scalars(4).conditional_expectation(&x).unwrap();
        assert!((e - identity(4) * normalized_trace(&x)).norm() < 1e-12);
        assert!(BlockSubalgebra::scalars(4).conditional_expectation(&identity(3)).is_err());
    }

    #[test]
    fn expectation_matches_gram_schmidt_projection() {
        let mut r = rng(11);
        for blocks in [vec![(2, 3)], vec![(2, 1), (1, 2), (3, 1)], vec![(1, 4), (2, 2)]] {
            let n: usize = blocks.iter().map(|&(d, m)| d * m).sum();
            let q = BlockSubalgebra::new(random_unitary(&mut r, n), blocks, 1e-10).unwrap();
            // Gram-Schmidt on a spanning set built from the embedding, kept
            // independent of `hs_basis`.
            let mut basis: Vec<CMat> = Vec::new();
            for k in 0..q.blocks().len() {
                for i in 0..q.blocks()[k].0 {
                    for j in 0..q.blocks()[k].0 {
                        let parts: Vec<CMat> = q
                            .blocks()
                            .iter()
                            .enumerate()
                            .map(|(l, &(d, _))| {
                                let mut a = CMat::zeros(d, d);
                                if l == k {
                                    a[(i, j)] = c64(1.0, 0.0);
                                }
                                a
                            })
                            .collect();
                        let mut v = q.embed(&parts).unwrap();
                        for b in &basis {
                            let c = normalized_trace(&(b.adjoint() * &v));
                            v -= b * c;
                        }
                        let norm = hs_norm(&v, n);
                        basis.push(v / c64(norm, 0.0));
                    }
                }
            }
            let x = random_ginibre(&mut r, n, n);
            let mut proj = CMat::zeros(n, n);
            for b in &basis {
                proj += b * normalized_trace(&(b.adjoint() * &x));
            }
            assert!(hs_norm(&(proj - q.conditional_expectation(&x).unwrap()), n) < 1e-10);
            assert_eq!(q.hs_basis().len(), basis.len());
        }
    }

    #[test]
    fn expectation_is_best_approximation() {
        let mut r = rng(17);
        let q = BlockSubalgebra::new(random_unitary(&mut r, 6), vec![(2, 2), (1, 2)], 1e-10).unwrap();
        let x = random_ginibre(&mut r, 6, 6);
        let e = q.conditional_expectation(&x).unwrap();
        let best = hs_norm(&(&x - &e), 6);
        for _ in 0..100 {
            let parts = vec![random_ginibre(&mut r, 2, 2), random_ginibre(&mut r, 1, 1)];
            let y = q.embed(&parts).unwrap();
            assert!(best <= hs_norm(&(&x - y), 6) + 1e-10);
        }
    }

    #[test]
    fn certificate_examples() {
        let mut r = rng(3);
        let diag: Vec<CMat> = (0..2)
            .map(|_| {
                let v: Vec<C64> = (0..4).map(|k| c64(0.0, k as f64 * 0.7 + 0.1).exp()).collect();
                CMat::from_diagonal(&crate::linalg::CVec::from_vec(v))
            })
            .collect();
        let cert = HyperfiniteCertificate {
            subalgebra: BlockSubalgebra::diagonal(4),
            epsilon: 0.0,
            d_bound: 1,
            mode: BoundMode::Subhomogeneity,
        };
        assert!(check_certificate(&diag, &cert).unwrap().pass);

        let blk = crate::linalg::direct_sum(&[&random_unitary(&mut r, 2), &random_unitary(&mut r, 2)]);
        let cert = HyperfiniteCertificate {
            subalgebra: BlockSubalgebra::standard(vec![(2, 1), (2, 1)]).unwrap(),
            epsilon: 1e-14,
            d_bound: 2,
            mode: BoundMode::Subhomogeneity,
        };
        let out = check_certificate(&[blk], &cert).unwrap();
        assert!(out.pass && out.epsilon_measured < 1e-14);

        let pair = vec![random_unitary(&mut r, 4), random_unitary(&mut r, 4)];
        let direct = pair
            .iter()
            .map(|x| hs_norm(&(x - identity(4) * normalized_trace(x)), 4))
            .fold(0.0, f64::max);
        let cert = HyperfiniteCertificate {
            subalgebra: BlockSubalgebra::scalars(4),
            epsilon: 1.0,
            d_bound: 1,
            mode: BoundMode::Dimension,
        };
        assert!((check_certificate(&pair, &cert).unwrap().epsilon_measured - direct).abs() < 1e-12);
    }

    #[test]
    fn finder_on_commuting_tuple() {
        let mut r = rng(21);
        let u = random_unitary(&mut r, 6);
        let tuple: Vec<CMat> = (0..3)
            .map(|_| {
                let d = random_unitary(&mut r, 6).diagonal().map(|z| z / z.norm());
                &u * CMat::from_diagonal(&d) * u.adjoint()
            })
            .collect();
        let cert = find_blocks(&tuple, &FinderOptions::new(1e-8, 1)).unwrap();
        assert_eq!(cert.d_bound, 1);
        assert!(cert.epsilon <= 1e-8);
        assert!(check_certificate(&tuple, &cert).unwrap().pass);
    }

    #[test]
    fn finder_recovers_hidden_blocks() {
        let mut r = rng(8);
        let u = random_unitary(&mut r, 8);
        let tuple: Vec<CMat> = (0..2)
            .map(|_| {
                let a = random_unitary(&mut r, 2);
                let b = random_unitary(&mut r, 3);
                let c = random_unitary(&mut r, 3);
                &u * crate::linalg::direct_sum(&[&a, &b, &c]) * u.adjoint()
            })
            .collect();
        let cert = find_blocks(&tuple, &FinderOptions::new(1e-8, 2)).unwrap();
        let mut sizes: Vec<usize> = cert.subalgebra.blocks().iter().map(|&(d, _)| d).collect();
        sizes.sort();
        assert_eq!(sizes, vec![2, 3, 3]);
        assert!(check_certificate(&tuple, &cert).unwrap().pass);
    }

    #[test]
    fn finder_on_generic_pair() {
        let mut r = rng(4);
        let tuple = vec![random_unitary(&mut r, 8), random_unitary(&mut r, 8)];
        let cert = find_blocks(&tuple, &FinderOptions::new(0.1, 3)).unwrap();
        assert_eq!(cert.d_bound, 8);
        assert!(cert.epsilon < 1e-12);
        assert!(check_certificate(&tuple, &cert).unwrap().pass);
    }

    #[test]
    fn unitalize_appends_scalar_block() {
        let q = BlockSubalgebra::unitalize(identity(5), vec![(2, 1)], 1e-10).unwrap();
        assert_eq!(q.blocks(), &[(2, 1), (1, 3)]);
        let e = q.conditional_expectation(&identity(5)).unwrap();
        assert!((e - identity(5)).norm() < 1e-14);
    }
}
