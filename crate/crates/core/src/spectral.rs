//! Laplacian spectra, almost spectral gaps and sum-of-squares certificates.

use std::path::Path;

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{
    format_rational, parse_rational, GeneratingSet, GroupElement, GroupKind, GroupRingElement,
    QComplex, TermDoc,
};
use crate::linalg::{hermitian_eigen, hermitian_spectrum, op_norm, CMat, SpectralMeasure, Tolerances};
use crate::rep::UnitaryRep;

/// Spectral measure of `pi~(Delta_S)`.
pub fn laplacian_spectrum(rep: &UnitaryRep, tol: &Tolerances) -> Result<SpectralMeasure> {
    let lap = rep.laplacian_matrix()?;
    hermitian_spectrum(&lap, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub lambda: f64,
    pub alpha: f64,
    #[serde(rename = "epsilon")]
    pub epsilon_measured: f64,
    #[serde(rename = "weight")]
    pub interval_weight: f64,
    pub pass: bool,
    /// `(n+1) M^2` with `M` the largest l1 norm among the Laplacian and the
    /// certificate terms; only for certificate checks.
    #[serde(rename = "C")]
    pub c: Option<f64>,
    #[serde(rename = "Cprime")]
    pub c_prime: Option<f64>,
}

/// Mass of `[alpha, lambda - alpha]`; passes when at most `epsilon`.
pub fn almost_gap_check(
    measure: &SpectralMeasure,
    lambda: f64,
    alpha: f64,
    epsilon: f64,
) -> Result<GapReport> {
    if !(alpha > 0.0 && alpha < lambda / 2.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, lambda/2), got alpha={alpha}, lambda={lambda}"
        )));
    }
    let w = measure.interval_weight(alpha, lambda - alpha)?;
    Ok(GapReport {
        lambda,
        alpha,
        epsilon_measured: epsilon,
        interval_weight: w,
        pass: w <= epsilon,
        c: None,
        c_prime: None,
    })
}

/// `Delta^2 - lambda Delta = sum xi_i^* xi_i` with exact coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SosCertificate {
    pub kind: GroupKind,
    pub lambda: BigRational,
    pub xis: Vec<GroupRingElement>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub group: String,
    pub lambda: String,
    pub xis: Vec<Vec<TermDoc>>,
}

impl SosCertificate {
    pub fn new(kind: GroupKind, lambda: BigRational, xis: Vec<GroupRingElement>) -> Result<Self> {
        let two = BigRational::from_integer(2.into());
        if !lambda.is_positive() || lambda > two {
            return Err(Error::InvalidParameter(format!(
                "lambda must lie in (0, 2], got {}",
                format_rational(&lambda)
            )));
        }
        if let Some(x) = xis.iter().find(|x| x.kind() != kind) {
            return Err(Error::MixedGroups(x.kind().to_string(), kind.to_string()));
        }
        Ok(SosCertificate { kind, lambda, xis })
    }

    pub fn lambda_f64(&self) -> f64 {
        QComplex::real(self.lambda.clone()).to_c64().re
    }

    /// Union of supports.
    pub fn support(&self) -> Vec<GroupElement> {
        let mut out: Vec<GroupElement> = self.xis.iter().flat_map(|x| x.support().cloned()).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn to_doc(&self) -> CertificateDoc {
        CertificateDoc {
            group: self.kind.to_string(),
            lambda: format_rational(&self.lambda),
            xis: self.xis.iter().map(|x| x.to_doc().terms).collect(),
        }
    }

    pub fn from_doc(doc: &CertificateDoc) -> Result<Self> {
        let kind: GroupKind = doc.group.parse()?;
        let lambda = parse_rational(&doc.lambda)?;
        let xis = doc
            .xis
            .iter()
            .map(|t| GroupRingElement::from_term_docs(kind, t))
            .collect::<Result<_>>()?;
        Self::new(kind, lambda, xis)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let doc: CertificateDoc = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::from_doc(&doc)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_doc())?)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SosResidual {
    /// Exact l1 norm when the residual has real coefficients.
    pub residual_l1: Option<BigRational>,
    pub residual_l1_f64: f64,
    pub residual_element: GroupRingElement,
}

/// `Delta^2 - lambda Delta - sum xi_i^* xi_i`, computed exactly.
pub fn sos_residual(gens: &GeneratingSet, cert: &SosCertificate) -> Result<SosResidual> {
    if gens.kind() != cert.kind {
        return Err(Error::MixedGroups(gens.kind().to_string(), cert.kind.to_string()));
    }
    let lap = gens.laplacian()?;
    let mut r = lap.product(&lap)?.sub(&lap.scale(&QComplex::real(cert.lambda.clone())))?;
    for xi in &cert.xis {
        r = r.sub(&xi.adjoint().product(xi)?)?;
    }
    Ok(SosResidual { residual_l1: r.l1_exact(), residual_l1_f64: r.l1_norm(), residual_element: r })
}

/// Operator-norm multiplicativity defect of `rep` on the products the
/// certificate argument uses: `pi(g)pi(h)` vs `pi(gh)` for `g,h` in the
/// support of `Delta`, and `pi(g)^* pi(h)` vs `pi(g^-1 h)` on each
/// `supp xi_i`.
pub fn certificate_epsilon(
    rep: &UnitaryRep,
    gens: &GeneratingSet,
    cert: &SosCertificate,
) -> Result<f64> {
    let lap = gens.laplacian()?;
    let mut eps: f64 = 0.0;
    let lap_supp: Vec<GroupElement> = lap.support().cloned().collect();
    let eval = |g: &GroupElement| rep.evaluate_element(g);
    let lap_mats: Vec<CMat> = lap_supp.iter().map(eval).collect::<Result<_>>()?;
    for (g, pg) in lap_supp.iter().zip(&lap_mats) {
        for (h, ph) in lap_supp.iter().zip(&lap_mats) {
            let pgh = eval(&g.mul(h)?)?;
            eps = eps.max(op_norm(&(pg * ph - pgh)));
        }
    }
    for xi in &cert.xis {
        let supp: Vec<GroupElement> = xi.support().cloned().collect();
        let mats: Vec<CMat> = supp.iter().map(eval).collect::<Result<_>>()?;
        for (g, pg) in supp.iter().zip(&mats) {
            for (h, ph) in supp.iter().zip(&mats) {
                let p = eval(&g.inverse().mul(h)?)?;
                eps = eps.max(op_norm(&(pg.adjoint() * ph - p)));
            }
        }
    }
    Ok(eps)
}

/// Checks the spectral containment `[0, C'eps] u [lambda - C'eps, 2]`
/// implied by an exact certificate for an operator-norm almost
/// representation. With `epsilon = None` the measured defect is used.
pub fn sos_consequence_check(
    rep: &UnitaryRep,
    gens: &GeneratingSet,
    cert: &SosCertificate,
    epsilon: Option<f64>,
    tol: &Tolerances,
) -> Result<GapReport> {
    let res = sos_residual(gens, cert)?;
    if !res.residual_element.is_zero() {
        return Err(Error::Hypothesis(format!(
            "certificate does not satisfy the identity; residual l1 = {}",
            res.residual_l1_f64
        )));
    }
    let measured = certificate_epsilon(rep, gens, cert)?;
    let eps = epsilon.unwrap_or(measured);
    if measured > eps + tol.eig {
        return Err(Error::Hypothesis(format!(
            "representation defect {measured:e} exceeds the requested epsilon {eps:e}"
        )));
    }
    let lap = gens.laplacian()?;
    let m_l1 = cert.xis.iter().map(|x| x.l1_norm()).fold(lap.l1_norm(), f64::max);
    let n = cert.xis.len() as f64;
    let c = (n + 1.0) * m_l1 * m_l1;
    let lambda = cert.lambda_f64();
    let c_prime = 2.0 * c / lambda;
    let bound = c_prime * eps;

    let (eigs, _) = hermitian_eigen(&rep.laplacian_matrix()?, tol.herm)?;
    let inside = |t: f64| {
        (t >= -tol.eig && t <= bound + tol.eig) || (t >= lambda - bound - tol.eig && t <= 2.0 + tol.eig)
    };
    let pass = eigs.iter().all(|&t| inside(t));
    let stray = eigs.iter().filter(|&&t| !inside(t)).count();
    Ok(GapReport {
        lambda,
        alpha: bound,
        epsilon_measured: measured,
        interval_weight: stray as f64 / eigs.len().max(1) as f64,
        pass,
        c: Some(c),
        c_prime: Some(c_prime),
    })
}

/// Exact rational lambda from a float-free string, for convenience.
pub fn rational(text: &str) -> Result<BigRational> {
    parse_rational(text)
}
