//! Linear cocycles over invertible base dynamics: domination detection,
//! construction of the dominated splitting and its certification.

mod base;
mod domination;
mod splitting;
mod system;
mod verify;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use base::{BaseKind, BaseSystem, Point, PointMap, DEFAULT_GRID};
pub(crate) use domination::log_gelfand;
pub use domination::{detect_domination, Criterion, DominationCertificate, MAX_FIT_RMS, RATE_MARGIN, RESOLUTION};
pub use splitting::{
    build_splitting, construct_lower, construct_upper, continuity, gap_envelope, stabilization_index, Continuity,
    LimitResult, PointRecord, SplittingReport, GAP_FLOOR,
};
pub use system::{CocycleSystem, Generator, StabilizedProduct, DEFAULT_HORIZON, INJECTIVITY_FLOOR};
pub use verify::{
    converse_constant, r_e_bound, r_e_certificate, uniqueness_check, verify_splitting, Converse, RCertificate,
    Verification, LOG_SLACK, RESOLUTION_FACTOR,
};

use crate::error::Result;

/// One row of an `(n, value)` table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub n: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisParams {
    pub k: usize,
    pub n_max: usize,
    pub tol: f64,
    pub criterion: Criterion,
    /// Threshold on the equivariance residuals.
    pub residual_tol: f64,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        AnalysisParams { k: 1, n_max: 60, tol: 1e-8, criterion: Criterion::Bogo, residual_tol: 1e-6 }
    }
}

/// Everything the end-to-end pipeline produces. Stages after a failed
/// domination test are absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub certificate: DominationCertificate,
    pub splitting: Option<SplittingReport>,
    pub verification: Option<Verification>,
    pub r_e: Option<RCertificate>,
    pub converse: Option<Converse>,
}

impl Analysis {
    pub fn dominated(&self) -> bool {
        self.certificate.pass
    }

    pub fn verified(&self) -> bool {
        self.verification.as_ref().is_some_and(|v| v.pass)
    }
}

/// Detect, construct, verify and certify.
///
/// Weighted norms are handled in the isometric Euclidean copy
/// `x -> diag(sqrt w) x`; reported subspaces are mapped back, distances
/// are those of the weighted geometry.
pub fn analyze(c: &CocycleSystem, params: &AnalysisParams) -> Result<Analysis> {
    if let Some((copy, w)) = c.euclidean_copy() {
        let mut out = analyze(&copy, params)?;
        let back = DMatrix::from_diagonal(&w.map(|s| 1.0 / s));
        if let Some(s) = out.splitting.as_mut() {
            for p in &mut s.points {
                p.e = p.e.transform(&back);
                p.f = p.f.transform(&back);
                p.e_next = p.e_next.transform(&back);
                p.f_next = p.f_next.transform(&back);
            }
        }
        return Ok(out);
    }
    let certificate = detect_domination(c, params.k, params.n_max, params.criterion)?;
    if !certificate.pass {
        return Ok(Analysis { certificate, splitting: None, verification: None, r_e: None, converse: None });
    }
    let splitting = build_splitting(c, params.k, certificate.tau_fit, params.tol, params.n_max)?;
    let verification = verify_splitting(c, &splitting, params.n_max, params.residual_tol)?;
    let r_e =
        if c.norm().is_euclidean() { Some(r_e_certificate(c, &splitting, &certificate, params.n_max)?) } else { None };
    let converse =
        if verification.pass { Some(converse_constant(c, &splitting, &verification, params.n_max)?) } else { None };
    Ok(Analysis { certificate, splitting: Some(splitting), verification: Some(verification), r_e, converse })
}
