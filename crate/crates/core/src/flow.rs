//! Continuous-time cocycles `B(x, t)` solving `Y' = M(phi^s x) Y` over a
//! linear flow, their time-`1/m` discretizations, and the continuous-time
//! domination checks.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::{
    self, build_splitting, detect_domination, uniqueness_check, verify_splitting, BaseSystem, CocycleSystem, Criterion,
    Point, SplittingReport, StabilizedProduct, Verification, MAX_FIT_RMS,
};
use crate::error::{Error, Result};
use crate::extremal::SearchOptions;
use crate::fit::{line_fit, Envelope};
use crate::geometry;
use crate::norms::Norm;
use crate::subspace::Subspace;

/// `y -> M(y)`, safe to call from several threads.
pub type Field = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

pub const DEFAULT_STEP: f64 = 1.0 / 256.0;
pub const DEFAULT_T_MAX: f64 = 64.0;
/// Points in the grid over `epsilon in [0, 1]`.
pub const EPS_GRID: usize = 33;
/// Spacing of the time grid used by the checks; a multiple of the step.
pub const TIME_GRID: f64 = 0.25;
/// A fitted exponent at or below this counts as no gap.
pub const GAMMA_MARGIN: f64 = 0.01;
/// Largest `d_H` tolerated between splittings of different discretizations.
pub const AGREEMENT_TOL: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlowBase {
    /// A single fixed point.
    Constant,
    /// `phi^t x = x + t omega mod 1`.
    Torus { frequency: Vec<f64> },
}

#[derive(Clone)]
pub struct FlowCocycle {
    base: FlowBase,
    field: Field,
    dim: usize,
    norm: Norm,
    step: f64,
    t_max: f64,
    samples: Vec<Point>,
}

impl fmt::Debug for FlowCocycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowCocycle")
            .field("base", &self.base)
            .field("dim", &self.dim)
            .field("norm", &self.norm)
            .field("step", &self.step)
            .field("t_max", &self.t_max)
            .field("samples", &self.samples.len())
            .finish()
    }
}

/// `B(x, t)` with a Richardson estimate of the integration error.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowEval {
    pub matrix: DMatrix<f64>,
    pub error: f64,
}

/// One row of a `(t, value)` table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeRow {
    pub t: f64,
    pub value: f64,
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(1.0);
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

impl FlowCocycle {
    /// `grid` is the approximate number of sample points on the torus.
    pub fn new<F>(base: FlowBase, dim: usize, norm: Norm, field: F, grid: usize) -> Result<FlowCocycle>
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        norm.check_dim(dim)?;
        let samples = match &base {
            FlowBase::Constant => vec![vec![0.0]],
            FlowBase::Torus { frequency } => BaseSystem::torus(frequency.clone(), grid)?.samples().to_vec(),
        };
        for s in &samples {
            let m = field(s);
            if m.shape() != (dim, dim) || m.iter().any(|v| !v.is_finite()) {
                return Err(Error::Dimension(format!("field at {s:?} is not a finite {dim}x{dim} matrix")));
            }
        }
        Ok(FlowCocycle { base, field: Arc::new(field), dim, norm, step: DEFAULT_STEP, t_max: DEFAULT_T_MAX, samples })
    }

    /// The autonomous flow `Y' = M Y`.
    pub fn autonomous(m: DMatrix<f64>, norm: Norm) -> Result<FlowCocycle> {
        let d = m.nrows();
        FlowCocycle::new(FlowBase::Constant, d, norm, move |_: &[f64]| m.clone(), 1)
    }

    pub fn with_step(mut self, h: f64) -> FlowCocycle {
        self.step = h;
        self
    }

    pub fn with_t_max(mut self, t: f64) -> FlowCocycle {
        self.t_max = t;
        self
    }

    pub fn with_samples(mut self, samples: Vec<Point>) -> FlowCocycle {
        self.samples = samples;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> &Norm {
        &self.norm
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn samples(&self) -> &[Point] {
        &self.samples
    }

    pub fn field_at(&self, y: &[f64]) -> DMatrix<f64> {
        (self.field)(y)
    }

    /// `phi^t x`.
    pub fn flow_point(&self, x: &[f64], t: f64) -> Point {
        match &self.base {
            FlowBase::Constant => x.to_vec(),
            FlowBase::Torus { frequency } => x.iter().zip(frequency).map(|(a, w)| wrap(a + t * w)).collect(),
        }
    }

    /// RK4 with step `h` on the grid `0, h, 2h, ...` and one partial step
    /// to reach `t`. No horizon check.
    pub fn integrate(&self, x: &[f64], t: f64, h: f64) -> DMatrix<f64> {
        let mut y = DMatrix::identity(self.dim, self.dim);
        let full = (t / h + 1e-9).floor() as usize;
        let mut s = 0.0;
        for i in 0..=full {
            let dt = if i < full { h } else { t - full as f64 * h };
            if dt <= 1e-15 {
                break;
            }
            let m0 = self.field_at(&self.flow_point(x, s));
            let mh = self.field_at(&self.flow_point(x, s + dt / 2.0));
            let m1 = self.field_at(&self.flow_point(x, s + dt));
            let k1 = &m0 * &y;
            let k2 = &mh * (&y + &k1 * (dt / 2.0));
            let k3 = &mh * (&y + &k2 * (dt / 2.0));
            let k4 = &m1 * (&y + &k3 * dt);
            y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            s = (i + 1) as f64 * h;
        }
        y
    }

    /// `B(x, t)` for `0 <= t <= t_max`.
    pub fn evaluate(&self, x: &[f64], t: f64) -> Result<FlowEval> {
        if !(0.0..=self.t_max).contains(&t) {
            return Err(Error::Precondition(format!("time {t} outside [0, {}]", self.t_max)));
        }
        let coarse = self.integrate(x, t, self.step);
        let fine = self.integrate(x, t, self.step / 2.0);
        let error = (&coarse - &fine).norm() / 15.0;
        Ok(FlowEval { matrix: fine, error })
    }

    /// `[B(x, 0), B(x, dt), ..., B(x, n dt)]` as stabilized products of
    /// well-conditioned blocks.
    pub fn products(&self, x: &[f64], dt: f64, n: usize) -> Result<Vec<StabilizedProduct>> {
        if n as f64 * dt > self.t_max + 1e-9 {
            return Err(Error::Precondition(format!("time {} exceeds the horizon {}", n as f64 * dt, self.t_max)));
        }
        let mut p = StabilizedProduct::identity(self.dim);
        let mut out = vec![p.clone()];
        for j in 0..n {
            let y = self.flow_point(x, j as f64 * dt);
            p.push(&self.integrate(&y, dt, self.step));
            out.push(p.clone());
        }
        Ok(out)
    }
}

/// `|B(x, s+t) - B(phi^t x, s) B(x, t)| / |B(x, s+t)|` at step `h`.
pub fn cocycle_law_residual(fc: &FlowCocycle, x: &[f64], s: f64, t: f64, h: f64) -> f64 {
    let whole = fc.integrate(x, s + t, h);
    let split = fc.integrate(&fc.flow_point(x, t), s, h) * fc.integrate(x, t, h);
    (&whole - split).norm() / whole.norm()
}

/// The cocycle `A_m(x, n) = B(x, n/m)` over `T_m = phi^{1/m}`.
pub fn discretize_flow(fc: &FlowCocycle, m: usize) -> Result<CocycleSystem> {
    if m == 0 {
        return Err(Error::Precondition("discretization needs m >= 1".into()));
    }
    let base = match &fc.base {
        FlowBase::Constant => BaseSystem::cycle(1)?,
        FlowBase::Torus { frequency } => {
            let shift = frequency.iter().map(|w| w / m as f64).collect();
            BaseSystem::torus(shift, 1)?.with_samples(fc.samples.clone())?
        }
    };
    let flow = fc.clone();
    let dt = 1.0 / m as f64;
    CocycleSystem::new(base, fc.dim, fc.norm.clone(), move |x: &[f64]| flow.integrate(x, dt, flow.step))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuousCertificate {
    pub k: usize,
    /// `sup_x sup_eps c_{k+1}(B(phi^eps x, t)) / c_k(B(x, t+1))` on the time grid.
    pub ratio_table: Vec<TimeRow>,
    pub gamma: f64,
    /// Smallest `C` with every tabulated ratio under `C e^{-gamma t}`.
    pub c_const: f64,
    pub fit_rms: f64,
    pub eps_grid: usize,
    pub time_step: f64,
    pub pass: bool,
    pub diagnosis: Option<String>,
}

/// `sup_{0<=eps<=1} c_{k+1}(B^t_{phi^eps x}) <= C e^{-gamma t} c_k(B^{t+1}_x)`
/// on a grid of `eps` and `t in [0, t_max]`.
pub fn continuous_domination_check(
    fc: &FlowCocycle,
    k: usize,
    t_max: f64,
    eps_grid: usize,
) -> Result<ContinuousCertificate> {
    if k == 0 || k >= fc.dim {
        return Err(Error::Precondition(format!("need 1 <= k < d = {}, got k = {k}", fc.dim)));
    }
    if eps_grid < 2 {
        return Err(Error::Precondition("the epsilon grid needs at least two points".into()));
    }
    let n = (t_max / TIME_GRID + 1e-9).floor() as usize;
    if n < 4 {
        return Err(Error::Precondition(format!("t_max = {t_max} is too short")));
    }
    let shift = (1.0 / TIME_GRID).round() as usize;
    let opts = SearchOptions::default();
    let norm = &fc.norm;
    let per_point: Vec<Vec<f64>> = fc
        .samples
        .par_iter()
        .map(|x| -> Result<Vec<f64>> {
            let px = fc.products(x, TIME_GRID, n + shift)?;
            let mut lhs = vec![f64::NEG_INFINITY; n + 1];
            for i in 0..eps_grid {
                let eps = i as f64 / (eps_grid - 1) as f64;
                let pe = fc.products(&fc.flow_point(x, eps), TIME_GRID, n)?;
                for (j, p) in pe.iter().enumerate() {
                    lhs[j] = lhs[j].max(cocycle::log_gelfand(p, k + 1, norm, &opts)?);
                }
            }
            (0..=n).map(|j| Ok(lhs[j] - cocycle::log_gelfand(&px[j + shift], k, norm, &opts)?)).collect()
        })
        .collect::<Result<_>>()?;
    let sup: Vec<f64> = (0..=n).map(|j| per_point.iter().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max)).collect();
    let ratio_table: Vec<TimeRow> =
        sup.iter().enumerate().map(|(j, l)| TimeRow { t: j as f64 * TIME_GRID, value: l.exp() }).collect();
    let fit: Vec<(f64, f64)> = (n.div_ceil(2)..=n).map(|j| (j as f64 * TIME_GRID, sup[j])).collect();
    let spread = fit.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
        - fit.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let mut diagnosis = None;
    let (gamma, rms) = match line_fit(&fit).filter(|_| spread > 1e-12) {
        Some(l) => (-l.slope, l.rms),
        None => {
            diagnosis = Some("no exponential gap: all ratios equal".to_string());
            (0.0, 0.0)
        }
    };
    let cover: Vec<(f64, f64)> = ratio_table.iter().map(|r| (r.t, r.value)).collect();
    let env = Envelope::with_rate((-gamma).exp(), 1.0, rms, &cover);
    let mut pass = true;
    if !(gamma > GAMMA_MARGIN) {
        pass = false;
        diagnosis.get_or_insert_with(|| format!("no exponential gap: fitted exponent {gamma:.4}"));
    }
    if rms > MAX_FIT_RMS {
        pass = false;
        diagnosis.get_or_insert_with(|| format!("log-linear fit residual {rms:.3} too large"));
    }
    Ok(ContinuousCertificate {
        k,
        ratio_table,
        gamma,
        c_const: env.constant,
        fit_rms: rms,
        eps_grid,
        time_step: TIME_GRID,
        pass,
        diagnosis,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    /// Horizon of the `m = 1` discretization; scaled by `m` for the others.
    pub n_max: usize,
    pub tol: f64,
    /// End of the real-time grid for the continuous-time ratio.
    pub t_check: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams { n_max: 40, tol: 1e-8, t_check: 8.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub m: usize,
    pub tau_fit: f64,
    pub splitting: SplittingReport,
    pub verification: Verification,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSplitting {
    pub k: usize,
    pub discretizations: Vec<Discretization>,
    /// Largest pairwise `d_H` between the splittings of different `m`.
    pub agreement: f64,
    pub worst_pair: Option<(usize, usize)>,
    /// `(t, sup_x |B^t|_F| / m(B^t|_E))` on a grid with fractional times.
    pub ratio_table: Vec<TimeRow>,
    pub gamma: Option<f64>,
    pub c_const: Option<f64>,
    /// `max |B(x, t)|` over samples and `t in [0, 1]`.
    pub sup_norm_unit_time: f64,
    /// `min m(B(x, t)|_{E(x)})` over samples and `t in [0, 1]`.
    pub min_norm_unit_time: f64,
    pub pass: bool,
    pub reasons: Vec<String>,
}

/// Splittings of the time-`1/m` cocycles, their agreement, and the
/// continuous-time domination ratio along the `m = m_list[0]` splitting.
pub fn flow_splitting(fc: &FlowCocycle, k: usize, m_list: &[usize], params: &FlowParams) -> Result<FlowSplitting> {
    if m_list.is_empty() {
        return Err(Error::Precondition("need at least one discretization".into()));
    }
    let mut reasons = Vec::new();
    let mut discretizations = Vec::new();
    for &m in m_list {
        let c = discretize_flow(fc, m)?;
        let n_max = params.n_max * m;
        let cert = detect_domination(&c, k, n_max, Criterion::Bogo)?;
        if !cert.pass {
            return Err(Error::Precondition(format!(
                "time-1/{m} cocycle is not dominated: {}",
                cert.diagnosis.unwrap_or_default()
            )));
        }
        let splitting = build_splitting(&c, k, cert.tau_fit, params.tol, n_max)?;
        let verification = verify_splitting(&c, &splitting, n_max, 1e-6)?;
        if !verification.pass {
            reasons.push(format!("m = {m}: {}", verification.reasons.join("; ")));
        }
        discretizations.push(Discretization { m, tau_fit: cert.tau_fit, splitting, verification });
    }
    let mut agreement = 0.0f64;
    let mut worst_pair = None;
    for i in 0..discretizations.len() {
        for j in i + 1..discretizations.len() {
            let d = uniqueness_check(&discretizations[i].splitting, &discretizations[j].splitting)?;
            if d > agreement {
                agreement = d;
                worst_pair = Some((discretizations[i].m, discretizations[j].m));
            }
        }
    }
    if !(agreement < AGREEMENT_TOL) {
        let (a, b) = worst_pair.unwrap_or((0, 0));
        reasons.push(format!("splittings for m = {a} and m = {b} differ by {agreement:.3e}"));
    }

    let split = &discretizations[0].splitting;
    let n = (params.t_check.min(fc.t_max) / TIME_GRID + 1e-9).floor() as usize;
    let unit = (1.0 / TIME_GRID).round() as usize;
    let opts = SearchOptions { starts: 16, ..SearchOptions::default() };
    let norm = &fc.norm;
    let per_point: Vec<(Vec<f64>, f64, f64)> = split
        .points
        .par_iter()
        .map(|p| -> Result<(Vec<f64>, f64, f64)> {
            let prods = fc.products(&p.x, TIME_GRID, n.max(unit))?;
            let mut ratios = Vec::with_capacity(n + 1);
            let (mut sup, mut inf) = (0.0f64, f64::INFINITY);
            for (j, q) in prods.iter().enumerate() {
                let m = q.scaled();
                let top = geometry::restricted_norm_with(&m, &p.f, norm, &opts);
                let bottom = geometry::min_norm_with(&m, &p.e, norm, &opts);
                if j <= n {
                    ratios.push(top.ln() - bottom.ln());
                }
                if j <= unit {
                    sup = sup.max(geometry::operator_norm(&m, norm).ln() + q.log_scale());
                    inf = inf.min(bottom.ln() + q.log_scale());
                }
            }
            Ok((ratios, sup, inf))
        })
        .collect::<Result<_>>()?;
    let sup_t: Vec<f64> = (0..=n).map(|j| per_point.iter().map(|p| p.0[j]).fold(f64::NEG_INFINITY, f64::max)).collect();
    let ratio_table: Vec<TimeRow> =
        sup_t.iter().enumerate().map(|(j, l)| TimeRow { t: j as f64 * TIME_GRID, value: l.exp() }).collect();
    let fit: Vec<(f64, f64)> = ratio_table.iter().map(|r| (r.t, r.value)).collect();
    let env = Envelope::fit(&fit, &fit);
    let gamma = env.map(|e| -e.rate.ln());
    if !gamma.is_some_and(|g| g > GAMMA_MARGIN) {
        reasons.push("continuous-time ratio does not decay".into());
    }
    let sup_norm_unit_time = per_point.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).exp();
    let min_norm_unit_time = per_point.iter().map(|p| p.2).fold(f64::INFINITY, f64::min).exp();
    if !(min_norm_unit_time > 0.0) {
        reasons.push("minimal norm on E vanishes for t in [0, 1]".into());
    }
    Ok(FlowSplitting {
        k,
        discretizations,
        agreement,
        worst_pair,
        ratio_table,
        gamma,
        c_const: env.map(|e| e.constant),
        sup_norm_unit_time,
        min_norm_unit_time,
        pass: reasons.is_empty(),
        reasons,
    })
}

/// `d_H` of the `m`-th discretization's bundle from a reference subspace
/// pair, for quick checks.
pub fn splitting_distance(report: &SplittingReport, e: &Subspace, f: &Subspace) -> f64 {
    report
        .points
        .iter()
        .map(|p| geometry::hausdorff(&p.e, e, &Norm::Euclidean).max(geometry::hausdorff(&p.f, f, &Norm::Euclidean)))
        .fold(0.0, f64::max)
}

/// Orthogonality residual `|B^T B - I|`, for isometric flows.
pub fn orthogonality_residual(b: &DMatrix<f64>) -> f64 {
    (b.transpose() * b - DMatrix::identity(b.nrows(), b.ncols())).norm()
}
