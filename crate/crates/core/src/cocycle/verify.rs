//! Checks on a constructed splitting: equivariance, the domination ratio
//! `|A^n|_F| / m(A^n|_E)`, the volume fraction `R_E` and its lower bound,
//! and the converse Gelfand-number criterion.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domination::{log_gelfand, resolvable, DominationCertificate, RATE_MARGIN};
use super::splitting::SplittingReport;
use super::system::{CocycleSystem, StabilizedProduct};
use super::TableRow;
use crate::error::{Error, Result};
use crate::extremal::SearchOptions;
use crate::fit::{line_fit, Envelope};
use crate::geometry::{self, BoundCheck};
use crate::linalg;
use crate::norms::Norm;
use crate::subspace::Subspace;

/// A ratio counts as resolved when it exceeds the leakage of the error in
/// `F` through the top singular direction by this factor.
pub const RESOLUTION_FACTOR: f64 = 10.0;

/// Beyond this `n`, `K~` is not evaluated in non-Hilbert norms.
pub const GENERAL_NORM_K_TILDE_HORIZON: usize = 16;

/// Slack of the non-strict comparisons, in log space.
pub const LOG_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub pass: bool,
    pub reasons: Vec<String>,
    /// `max d_H(A_x E(x), E(Tx))`
    pub equivariance_residual_e: f64,
    /// `max Gap(A_x F(x), F(Tx))`
    pub equivariance_residual_f: f64,
    /// `(n, sup |A^n v| / |A^n u|)` over unit `u in E`, `v in F`.
    pub domination_table: Vec<TableRow>,
    /// Largest `N` with every ratio for `n <= N` above its rounding floor.
    pub resolved_through: usize,
    pub envelope: Option<Envelope>,
    /// Smallest `K~` with `m(A^n|_E) >= c_k / K~` and `|A^n|_F| <= K~ c_{k+1}`
    /// on the resolved range.
    pub k_tilde: Option<f64>,
    /// `min_x m(A_x|_{E(x)})`
    pub min_one_step_norm: f64,
}

struct Series {
    log_ratio: Vec<f64>,
    log_leak: Vec<f64>,
    log_k_tilde: Vec<Option<f64>>,
}

fn series(
    c: &CocycleSystem,
    x: &[f64],
    e: &Subspace,
    f: &Subspace,
    accuracy: f64,
    n_max: usize,
    opts: &SearchOptions,
) -> Result<Series> {
    let k = e.dim();
    let norm = c.norm();
    let products = c.forward_products(x, n_max)?;
    let mut out = Series { log_ratio: vec![], log_leak: vec![], log_k_tilde: vec![] };
    let floor = accuracy.max(4.0 * f64::EPSILON).ln();
    for (n, p) in products.iter().enumerate() {
        let (lf, le, ltop) = if norm.is_euclidean() {
            let lf = linalg::spectral_norm(&(p.r() * f.basis())).ln();
            let le = linalg::min_singular(&(p.r() * e.basis())).ln();
            (lf, le, linalg::spectral_norm(p.r()).ln())
        } else {
            let m = p.scaled();
            (
                geometry::restricted_norm_with(&m, f, norm, opts).ln(),
                geometry::min_norm_with(&m, e, norm, opts).ln(),
                geometry::operator_norm(&m, norm).ln(),
            )
        };
        out.log_ratio.push(lf - le);
        out.log_leak.push(floor + ltop - le);
        let kt = if n == 0 || (!norm.is_hilbert() && (n > GENERAL_NORM_K_TILDE_HORIZON || !resolvable(p, k, norm))) {
            None
        } else {
            let ck = log_gelfand(p, k, norm, opts)? - p.log_scale();
            let ck1 = log_gelfand(p, k + 1, norm, opts)? - p.log_scale();
            Some((ck - le).max(lf - ck1))
        };
        out.log_k_tilde.push(kt);
    }
    Ok(out)
}

fn log_min_norm_one_step(c: &CocycleSystem, x: &[f64], e: &Subspace) -> f64 {
    geometry::min_norm(&c.generator_at(x), e, c.norm()).ln()
}

/// Checks a constructed splitting over `n = 1..=n_max` at every sample and
/// its image. Never fails; problems are listed in `reasons`.
pub fn verify_splitting(
    c: &CocycleSystem,
    report: &SplittingReport,
    n_max: usize,
    residual_tol: f64,
) -> Result<Verification> {
    let opts = SearchOptions { starts: 16, ..SearchOptions::default() };
    let mut reasons = Vec::new();
    let mut res_e = 0.0f64;
    let mut res_f = 0.0f64;
    for p in &report.points {
        let a = c.generator_at(&p.x);
        res_e = res_e.max(geometry::hausdorff(&p.e.image(&a)?, &p.e_next, &Norm::Euclidean));
        res_f = res_f.max(geometry::gap(&p.f.image(&a)?, &p.f_next, &Norm::Euclidean));
    }
    let all: Vec<Series> = report
        .points
        .par_iter()
        .flat_map_iter(|p| {
            let tx = c.base().forward(&p.x);
            [
                series(c, &p.x, &p.e, &p.f, p.lower_accuracy, n_max, &opts),
                series(c, &tx, &p.e_next, &p.f_next, p.lower_accuracy_next, n_max, &opts),
            ]
        })
        .collect::<Result<_>>()?;
    let min_one_step =
        report.points.iter().map(|p| log_min_norm_one_step(c, &p.x, &p.e)).fold(f64::INFINITY, f64::min).exp();

    let sup_at = |n: usize| all.iter().map(|s| s.log_ratio[n]).fold(f64::NEG_INFINITY, f64::max);
    let domination_table: Vec<TableRow> = (1..=n_max).map(|n| TableRow { n, value: sup_at(n).exp() }).collect();
    let resolved = |n: usize| all.iter().all(|s| s.log_ratio[n] >= RESOLUTION_FACTOR.ln() + s.log_leak[n]);
    let resolved_through = (1..=n_max).take_while(|&n| resolved(n)).last().unwrap_or(0);

    let k_tilde = all
        .iter()
        .flat_map(|s| s.log_k_tilde[..=resolved_through].iter().flatten())
        .fold(None, |acc: Option<f64>, &v| Some(acc.map_or(v, |a| a.max(v))))
        .map(f64::exp);

    let mut envelope = None;
    if resolved_through >= 4 {
        let fit: Vec<(f64, f64)> =
            (resolved_through.div_ceil(2)..=resolved_through).map(|n| (n as f64, sup_at(n))).collect();
        let cover: Vec<(f64, f64)> = (0..=resolved_through).map(|n| (n as f64, sup_at(n).exp())).collect();
        envelope = line_fit(&fit).map(|l| Envelope::with_rate(l.slope.exp(), l.intercept.exp(), l.rms, &cover));
    } else {
        reasons.push(format!("domination ratios resolved only through n = {resolved_through}"));
    }
    if !(res_e < residual_tol) {
        reasons.push(format!("equivariance residual of E is {res_e:.3e}"));
    }
    if !(res_f < residual_tol) {
        reasons.push(format!("equivariance residual of F is {res_f:.3e}"));
    }
    match &envelope {
        Some(env) if env.rate < RATE_MARGIN => {}
        Some(env) => reasons.push(format!("domination ratios do not decay: fitted rate {:.4}", env.rate)),
        None if resolved_through >= 4 => reasons.push("could not fit the domination ratios".into()),
        None => {}
    }
    if resolved_through >= 1 && !(sup_at(resolved_through) < sup_at(1)) && resolved_through > 1 {
        reasons.push("last resolved ratio is not below the first".into());
    }
    Ok(Verification {
        pass: reasons.is_empty(),
        reasons,
        equivariance_residual_e: res_e,
        equivariance_residual_f: res_f,
        domination_table,
        resolved_through,
        envelope,
        k_tilde,
        min_one_step_norm: min_one_step,
    })
}

/// The volume fraction `R_E` realized on the upper bundle together with
/// the closed-form lower bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RCertificate {
    /// `min det(A^n|E) / prod_{i<=k} sigma_i(A^n)` over samples, `1 <= n <= n_max`.
    pub estimate: f64,
    pub log_estimate: f64,
    /// `-(2k log kappa * Q + 36k/(1-tau))`
    pub log_lower_bound: f64,
    pub lower_bound: f64,
    /// `Q = ceil((log(3 kappa^3 K) - log(1-tau)) / (-log tau))`, at least 0.
    pub q_index: u64,
    /// The same bound with `12 kappa^3 K` and `2k/(1-tau)`.
    pub log_lower_bound_alt: f64,
    pub q_index_alt: u64,
    pub kappa: f64,
    pub k_const: f64,
    pub tau: f64,
    pub holds: bool,
    /// `max |pi_x| <= 1 / R_E` on the samples.
    pub projection_check: BoundCheck,
}

/// `Q` and the bound `log R_E >= -(2k log kappa Q + c k / (1 - tau))` for a
/// given multiplier `m` in `log(m kappa^3 K)`.
pub fn r_e_bound(k: usize, kappa: f64, k_const: f64, tau: f64, mult: f64, c: f64) -> (u64, f64) {
    let q = ((mult * kappa.powi(3) * k_const).ln() - (1.0 - tau).ln()) / -tau.ln();
    let q = q.ceil().max(0.0) as u64;
    let kf = k as f64;
    (q, -(2.0 * kf * kappa.ln() * q as f64 + c * kf / (1.0 - tau)))
}

fn log_volume_fraction(p: &StabilizedProduct, e: &Subspace) -> f64 {
    let k = e.dim();
    let det: f64 = linalg::singular_values(&(p.r() * e.basis())).iter().map(|s| s.ln()).sum();
    let top: f64 = linalg::singular_values(p.r()).iter().take(k).map(|s| s.ln()).sum();
    det - top
}

pub fn r_e_certificate(
    c: &CocycleSystem,
    report: &SplittingReport,
    cert: &DominationCertificate,
    n_max: usize,
) -> Result<RCertificate> {
    if !c.norm().is_euclidean() {
        return Err(Error::Precondition("the volume-fraction certificate needs the Euclidean norm".into()));
    }
    let k = report.k;
    if k == 0 || k >= c.dim() {
        return Err(Error::Precondition(format!("need 1 <= k < d = {}, got k = {k}", c.dim())));
    }
    let per_point: Vec<f64> = report
        .points
        .par_iter()
        .map(|p| -> Result<f64> {
            let products = c.forward_products(&p.x, n_max)?;
            Ok(products.iter().skip(1).map(|q| log_volume_fraction(q, &p.e)).fold(0.0, f64::min))
        })
        .collect::<Result<_>>()?;
    let log_estimate = per_point.into_iter().fold(0.0, f64::min).min(0.0);
    let kappa = c.kappa();
    let (q, lb) = r_e_bound(k, kappa, cert.k_fit, cert.tau_fit, 3.0, 36.0);
    let (q_alt, lb_alt) = r_e_bound(k, kappa, cert.k_fit, cert.tau_fit, 12.0, 2.0);
    let max_proj = report.points.iter().map(|p| p.proj_norm).fold(0.0, f64::max);
    Ok(RCertificate {
        estimate: log_estimate.exp(),
        log_estimate,
        log_lower_bound: lb,
        lower_bound: lb.exp(),
        q_index: q,
        log_lower_bound_alt: lb_alt,
        q_index_alt: q_alt,
        kappa,
        k_const: cert.k_fit,
        tau: cert.tau_fit,
        holds: log_estimate >= lb,
        projection_check: BoundCheck::new(max_proj, (-log_estimate).exp(), 1e-9),
    })
}

/// `K' = K C_0` with `C_0 = max |(A_x|_{E(x)})^{-1}|`, and the check of
/// `max{c_{k+1}(A^n_x), c_{k+1}(A^n_{Tx})} <= K' tau^n c_k(A^{n+1}_x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Converse {
    pub c0: f64,
    pub k_env: f64,
    pub tau: f64,
    pub k_prime: f64,
    /// `(n, max over samples of lhs / rhs)`
    pub margin_table: Vec<TableRow>,
    pub checked_through: usize,
    pub holds: bool,
}

pub fn converse_constant(
    c: &CocycleSystem,
    report: &SplittingReport,
    verification: &Verification,
    n_max: usize,
) -> Result<Converse> {
    let env = match (&verification.envelope, verification.pass) {
        (Some(env), true) => *env,
        _ => return Err(Error::Precondition("no verified dominated splitting".into())),
    };
    let norm = c.norm();
    let k = report.k;
    let opts = SearchOptions { starts: 16, ..SearchOptions::default() };
    let c0 =
        report.points.iter().map(|p| 1.0 / geometry::min_norm(&c.generator_at(&p.x), &p.e, norm)).fold(0.0, f64::max);
    let k_prime = env.constant * c0;
    let per_point: Vec<Vec<Option<f64>>> = report
        .points
        .par_iter()
        .map(|p| -> Result<Vec<Option<f64>>> {
            let px = c.forward_products(&p.x, n_max + 1)?;
            let ptx = c.forward_products(&c.base().forward(&p.x), n_max)?;
            (1..=n_max)
                .map(|n| {
                    if !resolvable(&px[n], k, norm) || !resolvable(&ptx[n], k, norm) {
                        return Ok(None);
                    }
                    let lhs = log_gelfand(&px[n], k + 1, norm, &opts)?.max(log_gelfand(&ptx[n], k + 1, norm, &opts)?);
                    let rhs = k_prime.ln() + n as f64 * env.rate.ln() + log_gelfand(&px[n + 1], k, norm, &opts)?;
                    Ok(Some(lhs - rhs))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut margin_table = Vec::new();
    for n in 1..=n_max {
        let col: Option<Vec<f64>> = per_point.iter().map(|p| p[n - 1]).collect();
        match col {
            Some(v) => margin_table.push(TableRow { n, value: v.into_iter().fold(f64::NEG_INFINITY, f64::max).exp() }),
            None => break,
        }
    }
    let holds = margin_table.iter().all(|r| r.value.ln() <= LOG_SLACK);
    Ok(Converse {
        c0,
        k_env: env.constant,
        tau: env.rate,
        k_prime,
        checked_through: margin_table.last().map_or(0, |r| r.n),
        margin_table,
        holds,
    })
}

/// `max d_H` between the bundles of two reports on the same samples.
pub fn uniqueness_check(r1: &SplittingReport, r2: &SplittingReport) -> Result<f64> {
    if r1.k != r2.k || r1.points.len() != r2.points.len() {
        return Err(Error::Precondition("reports are on different samples or ranks".into()));
    }
    let mut out = 0.0f64;
    for (a, b) in r1.points.iter().zip(&r2.points) {
        let same = a.x.len() == b.x.len() && a.x.iter().zip(&b.x).all(|(u, v)| (u - v).abs() < 1e-12);
        if !same {
            return Err(Error::Precondition(format!("sample mismatch: {:?} vs {:?}", a.x, b.x)));
        }
        out = out.max(geometry::hausdorff(&a.e, &b.e, &Norm::Euclidean));
        out = out.max(geometry::hausdorff(&a.f, &b.f, &Norm::Euclidean));
    }
    Ok(out)
}
