//! Least-squares fits of geometric envelopes `v(t) <= C rate^t`.

use serde::{Deserialize, Serialize};

/// `y = intercept + slope * x` with the root-mean-square residual.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms: f64,
}

/// Ordinary least squares. `None` with fewer than two distinct abscissae.
pub fn line_fit(points: &[(f64, f64)]) -> Option<LineFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Some(LineFit { slope, intercept, rms: (ss / n).sqrt() })
}

/// A geometric envelope `constant * rate^t`.
///
/// `rate` and `ls_constant` come from the log-linear fit; `constant` is the
/// smallest value putting every covered point under the curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub constant: f64,
    pub rate: f64,
    pub ls_constant: f64,
    pub rms: f64,
}

impl Envelope {
    /// Fits `ln v` against `t` on `fit` and covers every point of `cover`.
    /// Non-positive values carry no information about the rate and are skipped.
    pub fn fit(fit: &[(f64, f64)], cover: &[(f64, f64)]) -> Option<Envelope> {
        let logs: Vec<(f64, f64)> = fit.iter().filter(|p| p.1 > 0.0).map(|&(t, v)| (t, v.ln())).collect();
        let line = line_fit(&logs)?;
        Some(Envelope::with_rate(line.slope.exp(), line.intercept.exp(), line.rms, cover))
    }

    /// Envelope with a prescribed rate.
    pub fn with_rate(rate: f64, ls_constant: f64, rms: f64, cover: &[(f64, f64)]) -> Envelope {
        let lr = rate.ln();
        let constant = cover.iter().filter(|p| p.1 > 0.0).map(|&(t, v)| (v.ln() - t * lr).exp()).fold(0.0, f64::max);
        Envelope { constant, rate, ls_constant, rms }
    }

    pub fn at(&self, t: f64) -> f64 {
        self.constant * self.rate.powf(t)
    }

    /// Whether `v <= slack * envelope(t)`, compared in log space.
    pub fn covers(&self, t: f64, v: f64, slack: f64) -> bool {
        v <= 0.0 || v.ln() <= slack.ln() + self.constant.ln() + t * self.rate.ln() + 1e-12
    }
}
