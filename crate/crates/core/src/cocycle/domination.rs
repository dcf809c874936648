//! Detection of an exponential gap between the `k`-th and `(k+1)`-th
//! growth rates along orbits.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::system::{CocycleSystem, StabilizedProduct};
use super::TableRow;
use crate::error::{Error, Result};
use crate::extremal::SearchOptions;
use crate::fit::{line_fit, Envelope};
use crate::norms::Norm;
use crate::snumbers;

/// Fitted rates at or above this are treated as no gap.
pub const RATE_MARGIN: f64 = 0.99;

/// Largest acceptable RMS residual of the log-linear fit.
pub const MAX_FIT_RMS: f64 = 1.0;

/// In non-Hilbert norms, s-numbers of a product are only trusted while
/// `sigma_{k+1} / sigma_1` stays above this.
pub const RESOLUTION: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    /// `sigma_{k+1}(A^n_x) <= K tau^n sigma_k(A^n_x)`.
    #[default]
    Bogo,
    /// `max{c_{k+1}(A^n_x), c_{k+1}(A^n_{Tx})} <= K tau^n c_k(A^{n+1}_x)`.
    Magic,
    /// `c_{k+1}(A^n_x) <= K tau^n c_k(A^n_x)`, equivalent to `Magic` for
    /// invertible generators.
    Simple,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Bogo => "bogo",
            Criterion::Magic => "magic",
            Criterion::Simple => "simple",
        })
    }
}

impl FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Criterion> {
        match s {
            "bogo" => Ok(Criterion::Bogo),
            "magic" => Ok(Criterion::Magic),
            "simple" => Ok(Criterion::Simple),
            _ => Err(Error::Precondition(format!("unknown criterion `{s}` (bogo, magic, simple)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationCertificate {
    pub k: usize,
    pub criterion: Criterion,
    /// Smallest `K` with every tabulated ratio (and `n = 0`) under `K tau^n`.
    pub k_fit: f64,
    pub tau_fit: f64,
    /// Intercept of the least-squares line.
    pub k_least_squares: f64,
    pub fit_rms: f64,
    /// `(n, max over samples of the ratio)` for `n = 1..`.
    pub per_n_ratios: Vec<TableRow>,
    /// Ratio at `n = 0`, which enters `k_fit`.
    pub ratio_at_zero: f64,
    pub pass: bool,
    pub diagnosis: Option<String>,
}

impl DominationCertificate {
    pub fn envelope(&self) -> Envelope {
        Envelope { constant: self.k_fit, rate: self.tau_fit, ls_constant: self.k_least_squares, rms: self.fit_rms }
    }
}

/// `ln c_q` of a stabilized product in `norm`.
pub(crate) fn log_gelfand(p: &StabilizedProduct, q: usize, norm: &Norm, opts: &SearchOptions) -> Result<f64> {
    match norm {
        Norm::Euclidean => Ok(p.log_singular_values()[q - 1]),
        Norm::Weighted(_) => {
            let w = norm.scaling().expect("weighted norm has a scaling");
            Ok(p.conjugated(&w).log_singular_values()[q - 1])
        }
        _ => Ok(p.log_scale() + snumbers::gelfand(&p.scaled(), q, norm, opts)?.value.ln()),
    }
}

/// Whether `c_{k+1}` of this product is resolvable in floating point.
pub(crate) fn resolvable(p: &StabilizedProduct, k: usize, norm: &Norm) -> bool {
    if norm.is_hilbert() {
        return true;
    }
    let s = p.log_singular_values();
    s[k] - s[0] > RESOLUTION.ln()
}

fn log_ratios(
    c: &CocycleSystem,
    x: &[f64],
    k: usize,
    n_max: usize,
    criterion: Criterion,
    opts: &SearchOptions,
) -> Result<Vec<Option<f64>>> {
    let norm = c.norm();
    let px = c.forward_products(x, n_max + 1)?;
    let ptx = match criterion {
        Criterion::Magic => Some(c.forward_products(&c.base().forward(x), n_max)?),
        _ => None,
    };
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if !resolvable(&px[n], k, norm) || !resolvable(&px[n + 1], k, norm) {
            out.push(None);
            continue;
        }
        let r = match criterion {
            Criterion::Bogo => {
                let s = px[n].log_singular_values();
                s[k] - s[k - 1]
            }
            Criterion::Simple => log_gelfand(&px[n], k + 1, norm, opts)? - log_gelfand(&px[n], k, norm, opts)?,
            Criterion::Magic => {
                let ptx = ptx.as_ref().expect("magic needs the image orbit");
                if !resolvable(&ptx[n], k, norm) {
                    out.push(None);
                    continue;
                }
                let top = log_gelfand(&px[n], k + 1, norm, opts)?.max(log_gelfand(&ptx[n], k + 1, norm, opts)?);
                top - log_gelfand(&px[n + 1], k, norm, opts)?
            }
        };
        out.push(Some(r));
    }
    Ok(out)
}

/// Tabulates the criterion ratio over the samples for `n = 1..=n_max` and
/// fits `(K, tau)` on the second half of the horizon.
pub fn detect_domination(
    c: &CocycleSystem,
    k: usize,
    n_max: usize,
    criterion: Criterion,
) -> Result<DominationCertificate> {
    let d = c.dim();
    if k == 0 || k >= d {
        return Err(Error::Precondition(format!("need 1 <= k < d = {d}, got k = {k}")));
    }
    if n_max < 8 {
        return Err(Error::Precondition(format!("n_max must be at least 8, got {n_max}")));
    }
    if let (Norm::Weighted(_), Some((e, _))) = (c.norm(), c.euclidean_copy()) {
        return detect_domination(&e, k, n_max, criterion);
    }
    let opts = SearchOptions::default();
    let per_point: Vec<Vec<Option<f64>>> =
        c.samples().par_iter().map(|x| log_ratios(c, x, k, n_max, criterion, &opts)).collect::<Result<_>>()?;
    // sup over samples; an unresolved entry anywhere truncates the table
    let mut sup = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let col: Option<Vec<f64>> = per_point.iter().map(|p| p[n]).collect();
        match col {
            Some(v) => sup.push(v.into_iter().fold(f64::NEG_INFINITY, f64::max)),
            None => break,
        }
    }
    let mut diagnosis = None;
    if sup.len() <= n_max {
        diagnosis = Some(format!("ratios resolved only through n = {}", sup.len().saturating_sub(1)));
    }
    let per_n_ratios: Vec<TableRow> =
        sup.iter().enumerate().skip(1).map(|(n, l)| TableRow { n, value: l.exp() }).collect();
    let ratio_at_zero = sup.first().map_or(1.0, |l| l.exp());
    let last = sup.len().saturating_sub(1);
    let fit_pts: Vec<(f64, f64)> = (last.div_ceil(2).max(1)..=last).map(|n| (n as f64, sup[n])).collect();
    let spread = fit_pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
        - fit_pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let line = line_fit(&fit_pts).filter(|_| spread > 1e-12);
    let (tau_fit, k_ls, rms) = match line {
        Some(l) => (l.slope.exp(), l.intercept.exp(), l.rms),
        None => {
            diagnosis = Some("no exponential gap: all ratios equal".into());
            (1.0, sup.first().map_or(1.0, |l| l.exp()), 0.0)
        }
    };
    let cover: Vec<(f64, f64)> = sup.iter().enumerate().map(|(n, l)| (n as f64, l.exp())).collect();
    let env = Envelope::with_rate(tau_fit, k_ls, rms, &cover);
    let mut pass = true;
    if !(tau_fit < RATE_MARGIN) {
        pass = false;
        diagnosis.get_or_insert_with(|| format!("no exponential gap: fitted rate {tau_fit:.4}"));
    }
    if rms > MAX_FIT_RMS {
        pass = false;
        diagnosis.get_or_insert_with(|| format!("log-linear fit residual {rms:.3} too large"));
    }
    if fit_pts.len() < 2 {
        pass = false;
        diagnosis.get_or_insert_with(|| "too few resolved ratios to fit".into());
    }
    Ok(DominationCertificate {
        k,
        criterion,
        k_fit: env.constant,
        tau_fit,
        k_least_squares: k_ls,
        fit_rms: rms,
        per_n_ratios,
        ratio_at_zero,
        pass,
        diagnosis,
    })
}
