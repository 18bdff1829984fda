//! Linearization at the equilibrium, its spectrum, the diagonal-similarity
//! norm certificate, and the stability classification.

pub mod poly;

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::Params;
use crate::error::Result;
use poly::{aberth_roots, faddeev_leverrier, MonicPoly, ROOT_MAX_ITER, ROOT_TOL};

/// Width of the band around spectral radius 1 reported as inconclusive.
pub const RADIUS_MARGIN: f64 = 1e-6;

/// Upper clamp for the certificate's epsilon, strictly below 1/3.
pub const EPSILON_CEILING: f64 = 1.0 / 3.0 - 1e-9;

/// The 6x6 Jacobian at the equilibrium, state ordered
/// `(x[n], x[n-1], x[n-2], y[n], y[n-1], y[n-2])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearizationMatrix(pub [[f64; 6]; 6]);

impl LinearizationMatrix {
    /// Builds the matrix from the two coupling strengths `u = p/(alpha+1)`
    /// and `v = q/(alpha+1)`. `u = v = 0` gives the pure shift.
    pub fn from_couplings(u: f64, v: f64) -> Self {
        let mut a = [[0.0; 6]; 6];
        a[0][3] = u;
        a[0][5] = -u;
        a[1][0] = 1.0;
        a[2][1] = 1.0;
        a[3][0] = v;
        a[3][2] = -v;
        a[4][3] = 1.0;
        a[5][4] = 1.0;
        LinearizationMatrix(a)
    }

    pub fn entries(&self) -> &[[f64; 6]; 6] {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        (0..6).map(|i| self.0[i][i]).sum()
    }

    /// `max_i sum_j |a_ij|`.
    pub fn infinity_norm(&self) -> f64 {
        infinity_norm(&self.0)
    }

    pub fn characteristic_polynomial(&self) -> MonicPoly {
        MonicPoly::new(faddeev_leverrier(&self.0).to_vec())
    }
}

fn infinity_norm(m: &[[f64; 6]; 6]) -> f64 {
    m.iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn jacobian(params: &Params) -> LinearizationMatrix {
    let e = params.alpha() + 1.0;
    LinearizationMatrix::from_couplings(params.p() / e, params.q() / e)
}

/// The six eigenvalues, largest modulus first, and the worst relative
/// characteristic-polynomial residual among them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spectrum {
    #[serde(serialize_with = "serialize_complex")]
    pub eigenvalues: [Complex64; 6],
    pub residual: f64,
}

fn serialize_complex<S: serde::Serializer>(
    values: &[Complex64; 6],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(values.len()))?;
    for v in values {
        seq.serialize_element(&[v.re, v.im])?;
    }
    seq.end()
}

/// Eigenvalues as the roots of the characteristic polynomial (computed by
/// Faddeev-LeVerrier, solved by Aberth iteration to `tol`).
pub fn eigenvalues(matrix: &LinearizationMatrix, tol: f64) -> Result<Spectrum> {
    let poly = matrix.characteristic_polynomial();
    let roots = aberth_roots(&poly, tol, ROOT_MAX_ITER)?;
    let mut eigenvalues = [Complex64::new(0.0, 0.0); 6];
    eigenvalues.copy_from_slice(&roots);
    eigenvalues.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
    let residual = eigenvalues
        .iter()
        .map(|z| poly.relative_residual(*z))
        .fold(0.0, f64::max);
    Ok(Spectrum {
        eigenvalues,
        residual,
    })
}

pub fn spectral_radius(eigenvalues: &[Complex64]) -> f64 {
    eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A diagonal similarity `D = diag(1, 1-2e, 1-3e, 1, 1-2e, 1-3e)` with
/// `||D A D^-1||_inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonCertificate {
    pub epsilon: f64,
    pub weights: [f64; 6],
    pub norm_value: f64,
}

impl EpsilonCertificate {
    pub fn certifies_stability(&self) -> bool {
        self.norm_value < 1.0
    }
}

/// Why no certificate could be built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateRefusal {
    /// `alpha + 1 - 2p`
    pub p_margin: f64,
    /// `alpha + 1 - 2q`
    pub q_margin: f64,
}

impl std::fmt::Display for CertificateRefusal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        if self.p_margin <= 0.0 {
            parts.push(format!("alpha + 1 - 2p = {} <= 0", self.p_margin));
        }
        if self.q_margin <= 0.0 {
            parts.push(format!("alpha + 1 - 2q = {} <= 0", self.q_margin));
        }
        write!(f, "no admissible epsilon: {}", parts.join(", "))
    }
}

pub fn certificate_weights(epsilon: f64) -> [f64; 6] {
    let d2 = 1.0 - 2.0 * epsilon;
    let d3 = 1.0 - 3.0 * epsilon;
    [1.0, d2, d3, 1.0, d2, d3]
}

/// `D A D^-1` for diagonal `D`, entrywise `d_i a_ij / d_j`.
pub fn similarity(matrix: &LinearizationMatrix, weights: &[f64; 6]) -> [[f64; 6]; 6] {
    let mut out = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            out[i][j] = weights[i] * matrix.0[i][j] / weights[j];
        }
    }
    out
}

/// Upper limit for epsilon below which the weighted norm is below one:
/// `min((alpha+1-2p), (alpha+1-2q)) / (3 (alpha+1))`.
pub fn epsilon_bound(params: &Params) -> f64 {
    let e = params.alpha() + 1.0;
    (e - 2.0 * params.p()).min(e - 2.0 * params.q()) / (3.0 * e)
}

/// Picks epsilon as half of [`epsilon_bound`] and evaluates the weighted
/// norm, or refuses when the bound is not positive.
pub fn epsilon_certificate(
    params: &Params,
) -> std::result::Result<EpsilonCertificate, CertificateRefusal> {
    let e = params.alpha() + 1.0;
    let refusal = CertificateRefusal {
        p_margin: e - 2.0 * params.p(),
        q_margin: e - 2.0 * params.q(),
    };
    if refusal.p_margin <= 0.0 || refusal.q_margin <= 0.0 {
        return Err(refusal);
    }
    let epsilon = (0.5 * epsilon_bound(params)).min(EPSILON_CEILING);
    let weights = certificate_weights(epsilon);
    let norm_value = infinity_norm(&similarity(&jacobian(params), &weights));
    Ok(EpsilonCertificate {
        epsilon,
        weights,
        norm_value,
    })
}

/// `alpha > 1` and `0 < p, q <= 1`: the region where global asymptotic
/// stability of the equilibrium is known.
pub fn global_hypotheses_hold(params: &Params) -> bool {
    params.alpha() > 1.0 && params.p() <= 1.0 && params.q() <= 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    GloballyAsymptoticallyStable,
    LocallyAsymptoticallyStable,
    Unstable,
    Inconclusive,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::GloballyAsymptoticallyStable => "globally-asymptotically-stable",
            Classification::LocallyAsymptoticallyStable => "locally-asymptotically-stable",
            Classification::Unstable => "unstable",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub params: Params,
    pub spectrum: Spectrum,
    pub spectral_radius: f64,
    pub certificate: std::result::Result<EpsilonCertificate, CertificateRefusal>,
    pub hypotheses_hold: bool,
    pub classification: Classification,
}

impl StabilityReport {
    pub fn eigenvalues(&self) -> &[Complex64; 6] {
        &self.spectrum.eigenvalues
    }

    pub fn char_residual(&self) -> f64 {
        self.spectrum.residual
    }
}

fn classify_radius(radius: f64, margin: f64) -> Classification {
    if radius < 1.0 - margin {
        Classification::LocallyAsymptoticallyStable
    } else if radius > 1.0 + margin {
        Classification::Unstable
    } else {
        Classification::Inconclusive
    }
}

/// Full stability report with the default tolerances.
pub fn classify(params: &Params) -> Result<StabilityReport> {
    classify_with(params, ROOT_TOL, RADIUS_MARGIN)
}

pub fn classify_with(params: &Params, eigen_tol: f64, margin: f64) -> Result<StabilityReport> {
    let spectrum = eigenvalues(&jacobian(params), eigen_tol)?;
    let spectral_radius = spectral_radius(&spectrum.eigenvalues);
    let hypotheses_hold = global_hypotheses_hold(params);
    let classification = if hypotheses_hold {
        Classification::GloballyAsymptoticallyStable
    } else {
        classify_radius(spectral_radius, margin)
    };
    Ok(StabilityReport {
        params: *params,
        spectrum,
        spectral_radius,
        certificate: epsilon_certificate(params),
        hypotheses_hold,
        classification,
    })
}
