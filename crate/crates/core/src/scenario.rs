//! Scenario configuration: a TOML document naming a base system, a
//! generator from a fixed symbolic catalog, a norm and analysis parameters.
//!
//! ```toml
//! name = "skew"
//! dimension = 2
//! norm = "euclidean"
//!
//! [base]
//! kind = "rotation"
//! alpha = 0.6180339887498949
//! grid = 128
//!
//! [generator]
//! kind = "conjugated_diagonal"
//! diagonal = [4.0, 1.0]
//! angle = { terms = [{ frequency = [1], sin = 0.1 }] }
//!
//! [analysis]
//! k = 1
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cocycle::{AnalysisParams, BaseSystem, CocycleSystem, Criterion, DEFAULT_GRID, DEFAULT_HORIZON};
use crate::error::{config_err, Error, Result};
use crate::flow::{FlowBase, FlowCocycle, FlowParams, DEFAULT_STEP, DEFAULT_T_MAX, EPS_GRID};
use crate::linalg::{self, rotation};
use crate::norms::Norm;
use crate::snumbers::{EUCLIDEAN_CAP, GENERAL_CAP};

/// A real number written either as a float or as a fraction `"p/q"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoefficientRepr", into = "f64")]
pub struct Coefficient(pub f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum CoefficientRepr {
    Int(i64),
    Float(f64),
    Text(String),
}

impl TryFrom<CoefficientRepr> for Coefficient {
    type Error = String;

    fn try_from(r: CoefficientRepr) -> std::result::Result<Coefficient, String> {
        match r {
            CoefficientRepr::Int(i) => Ok(Coefficient(i as f64)),
            CoefficientRepr::Float(x) => Ok(Coefficient(x)),
            CoefficientRepr::Text(s) => parse_fraction(&s).map(Coefficient),
        }
    }
}

impl From<Coefficient> for f64 {
    fn from(c: Coefficient) -> f64 {
        c.0
    }
}

fn parse_fraction(s: &str) -> std::result::Result<f64, String> {
    let bad = || format!("`{s}` is not a number or a fraction p/q");
    match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0.0 {
                return Err(bad());
            }
            Ok(p / q)
        }
        None => s.trim().parse().map_err(|_| bad()),
    }
}

fn zero() -> Coefficient {
    Coefficient(0.0)
}

/// `cos * cos(2 pi <frequency, x>) + sin * sin(2 pi <frequency, x>)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub frequency: Vec<i64>,
    #[serde(default = "zero")]
    pub cos: Coefficient,
    #[serde(default = "zero")]
    pub sin: Coefficient,
}

/// A trigonometric polynomial on the circle or torus.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigPoly {
    #[serde(default)]
    pub constant: Option<Coefficient>,
    #[serde(default)]
    pub terms: Vec<TrigTerm>,
}

impl TrigPoly {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.constant.map_or(0.0, |c| c.0);
        for t in &self.terms {
            let phase: f64 = t.frequency.iter().zip(x).map(|(m, y)| *m as f64 * y).sum::<f64>() * 2.0 * PI;
            v += t.cos.0 * phase.cos() + t.sin.0 * phase.sin();
        }
        v
    }

    fn max_arity(&self) -> usize {
        self.terms.iter().map(|t| t.frequency.len()).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseSpec {
    /// A single fixed point.
    Fixed,
    /// `i -> i + 1 mod length`.
    Cycle { length: usize },
    /// `x -> x + alpha mod 1`.
    Rotation {
        alpha: Coefficient,
        #[serde(default = "default_grid")]
        grid: usize,
    },
    /// `x -> x + shift mod 1` on the torus.
    Torus {
        shift: Vec<Coefficient>,
        #[serde(default = "default_grid")]
        grid: usize,
    },
    /// The linear flow `x + t frequency`; constant when `frequency` is absent.
    Flow {
        #[serde(default)]
        frequency: Option<Vec<Coefficient>>,
        #[serde(default = "default_flow_grid")]
        grid: usize,
    },
}

fn default_grid() -> usize {
    DEFAULT_GRID
}

fn default_flow_grid() -> usize {
    16
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// The same matrix everywhere; rows listed top to bottom.
    Constant { matrix: Vec<Vec<f64>> },
    /// `R(theta(x)) diag(diagonal) R(theta(x))^T` with `R` the rotation in
    /// the first coordinate plane.
    ConjugatedDiagonal { diagonal: Vec<f64>, angle: TrigPoly },
    /// `[[E - v(x), -1], [1, 0]]`.
    Schrodinger { energy: Coefficient, potential: TrigPoly },
    /// `diag(diagonal) + perturbation * N(x)` with seeded `N`: independent
    /// matrices per point on a cycle, a random first-order trigonometric
    /// polynomial in `x_1 + ... + x_m` otherwise.
    RandomNearDiagonal { diagonal: Vec<f64>, perturbation: f64 },
    /// Flow field `M(y) = matrix`.
    FlowConstant { matrix: Vec<Vec<f64>> },
    /// Flow field `diag(diagonal) + forcing * P(y)` with a fixed
    /// trigonometric coupling `P`.
    DiagonalTrig { diagonal: Vec<f64>, forcing: f64 },
    /// Flow field `rate * J`, `J` the rotation generator in the first plane.
    Rotation { rate: f64 },
}

impl GeneratorSpec {
    fn is_flow(&self) -> bool {
        matches!(
            self,
            GeneratorSpec::FlowConstant { .. } | GeneratorSpec::DiagonalTrig { .. } | GeneratorSpec::Rotation { .. }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    #[serde(default = "one")]
    pub k: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub criterion: Criterion,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    /// Flow scenarios: discretizations `1/m` to compare.
    #[serde(default = "default_m_list")]
    pub m_list: Vec<usize>,
    /// Flow scenarios: end of the time grid for the continuous checks.
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_eps_grid")]
    pub eps_grid: usize,
    #[serde(default = "default_step")]
    pub step: f64,
}

fn one() -> usize {
    1
}
fn default_n_max() -> usize {
    60
}
fn default_tol() -> f64 {
    1e-8
}
fn default_residual_tol() -> f64 {
    1e-6
}
fn default_horizon() -> usize {
    DEFAULT_HORIZON
}
fn default_m_list() -> Vec<usize> {
    vec![1, 2, 3]
}
fn default_t_max() -> f64 {
    8.0
}
fn default_eps_grid() -> usize {
    EPS_GRID
}
fn default_step() -> f64 {
    DEFAULT_STEP
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        AnalysisSpec {
            k: one(),
            n_max: default_n_max(),
            tol: default_tol(),
            criterion: Criterion::default(),
            residual_tol: default_residual_tol(),
            horizon: default_horizon(),
            m_list: default_m_list(),
            t_max: default_t_max(),
            eps_grid: default_eps_grid(),
            step: default_step(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Report directory; relative paths resolve against the working directory.
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub dimension: usize,
    #[serde(default = "euclidean")]
    pub norm: Norm,
    #[serde(default)]
    pub seed: u64,
    pub base: BaseSpec,
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn euclidean() -> Norm {
    Norm::Euclidean
}

/// A built scenario.
#[derive(Clone, Debug)]
pub enum Scenario {
    Discrete(CocycleSystem),
    Flow(FlowCocycle),
}

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&toml::to_string(self).map_err(|_| fmt::Error)?)
    }
}

/// Reads, parses and validates a scenario file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text).map_err(|e| match e {
        Error::Config { path: p, message } => Error::Config { path: format!("{}: {p}", path.display()), message },
        other => other,
    })
}

/// Parses and validates; parse errors carry `line:column`.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| {
        let at = e.span().map(|s| line_col(text, s.start)).unwrap_or_default();
        config_err(at, e.message().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn line_col(text: &str, offset: usize) -> String {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    format!("line {line}, column {col}")
}

fn matrix_of(rows: &[Vec<f64>], d: usize, path: &str) -> Result<DMatrix<f64>> {
    let m = linalg::from_rows(rows).ok_or_else(|| config_err(path, "rows must be nonempty and of equal length"))?;
    if m.shape() != (d, d) {
        return Err(config_err(path, format!("expected a {d}x{d} matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(config_err(path, "entries must be finite"));
    }
    Ok(m)
}

fn check_len(v: &[f64], d: usize, path: &str) -> Result<()> {
    if v.len() != d || v.iter().any(|x| !x.is_finite()) {
        return Err(config_err(path, format!("expected {d} finite entries, got {}", v.len())));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let d = self.dimension;
        if self.name.trim().is_empty() {
            return Err(config_err("name", "must not be empty"));
        }
        let cap = if self.norm.is_hilbert() { EUCLIDEAN_CAP } else { GENERAL_CAP };
        if d == 0 || d > cap {
            return Err(config_err("dimension", format!("must be in 1..={cap} for the {} norm", self.norm)));
        }
        self.norm.check_dim(d).map_err(|e| config_err("norm", e.to_string()))?;
        let a = &self.analysis;
        if a.k == 0 || a.k >= d {
            return Err(config_err("analysis.k", format!("need 1 <= k < dimension = {d}, got {}", a.k)));
        }
        if !(a.tol > 0.0) {
            return Err(config_err("analysis.tol", "must be positive"));
        }
        if !(a.residual_tol > 0.0) {
            return Err(config_err("analysis.residual_tol", "must be positive"));
        }
        if a.n_max < 4 {
            return Err(config_err("analysis.n_max", "must be at least 4"));
        }
        if a.horizon < a.n_max {
            return Err(config_err("analysis.horizon", format!("must be at least n_max = {}", a.n_max)));
        }
        if !(a.step > 0.0 && a.step <= 0.25) {
            return Err(config_err("analysis.step", "must be in (0, 1/4]"));
        }
        if a.m_list.is_empty() || a.m_list.contains(&0) {
            return Err(config_err("analysis.m_list", "must be a nonempty list of positive integers"));
        }
        if !(a.t_max >= 1.0) || a.t_max + 1.0 > DEFAULT_T_MAX {
            return Err(config_err("analysis.t_max", format!("must be in [1, {}]", DEFAULT_T_MAX - 1.0)));
        }
        if a.eps_grid < 2 {
            return Err(config_err("analysis.eps_grid", "must be at least 2"));
        }
        let flow_base = matches!(self.base, BaseSpec::Flow { .. });
        if flow_base != self.generator.is_flow() {
            return Err(config_err(
                "generator.kind",
                "flow fields need a flow base, and a flow base needs a flow field",
            ));
        }
        match &self.base {
            BaseSpec::Cycle { length } if *length == 0 => return Err(config_err("base.length", "must be positive")),
            BaseSpec::Rotation { alpha, grid } => {
                if !alpha.0.is_finite() {
                    return Err(config_err("base.alpha", "must be finite"));
                }
                if *grid == 0 {
                    return Err(config_err("base.grid", "must be positive"));
                }
            }
            BaseSpec::Torus { shift, grid } => {
                if shift.is_empty() || shift.iter().any(|s| !s.0.is_finite()) {
                    return Err(config_err("base.shift", "must be a nonempty list of finite numbers"));
                }
                if *grid == 0 {
                    return Err(config_err("base.grid", "must be positive"));
                }
            }
            BaseSpec::Flow { frequency, grid } => {
                if frequency.as_ref().is_some_and(|f| f.is_empty() || f.iter().any(|s| !s.0.is_finite())) {
                    return Err(config_err("base.frequency", "must be a nonempty list of finite numbers"));
                }
                if *grid == 0 {
                    return Err(config_err("base.grid", "must be positive"));
                }
            }
            _ => {}
        }
        match &self.generator {
            GeneratorSpec::Constant { matrix } | GeneratorSpec::FlowConstant { matrix } => {
                matrix_of(matrix, d, "generator.matrix")?;
            }
            GeneratorSpec::ConjugatedDiagonal { diagonal, angle } => {
                check_len(diagonal, d, "generator.diagonal")?;
                if d < 2 {
                    return Err(config_err("generator.kind", "conjugated_diagonal needs dimension >= 2"));
                }
                self.check_poly(angle, "generator.angle")?;
            }
            GeneratorSpec::Schrodinger { energy, potential } => {
                if d != 2 {
                    return Err(config_err("dimension", "schrodinger generators are 2x2"));
                }
                if !energy.0.is_finite() {
                    return Err(config_err("generator.energy", "must be finite"));
                }
                self.check_poly(potential, "generator.potential")?;
            }
            GeneratorSpec::RandomNearDiagonal { diagonal, perturbation } => {
                check_len(diagonal, d, "generator.diagonal")?;
                if !(perturbation.is_finite() && *perturbation >= 0.0) {
                    return Err(config_err("generator.perturbation", "must be finite and nonnegative"));
                }
            }
            GeneratorSpec::DiagonalTrig { diagonal, forcing } => {
                check_len(diagonal, d, "generator.diagonal")?;
                if !forcing.is_finite() {
                    return Err(config_err("generator.forcing", "must be finite"));
                }
            }
            GeneratorSpec::Rotation { rate } => {
                if d < 2 {
                    return Err(config_err("generator.kind", "rotation needs dimension >= 2"));
                }
                if !rate.is_finite() {
                    return Err(config_err("generator.rate", "must be finite"));
                }
            }
        }
        Ok(())
    }

    fn base_arity(&self) -> usize {
        match &self.base {
            BaseSpec::Fixed | BaseSpec::Cycle { .. } | BaseSpec::Rotation { .. } => 1,
            BaseSpec::Torus { shift, .. } => shift.len(),
            BaseSpec::Flow { frequency, .. } => frequency.as_ref().map_or(1, |f| f.len()),
        }
    }

    fn check_poly(&self, p: &TrigPoly, path: &str) -> Result<()> {
        if p.max_arity() > self.base_arity() {
            return Err(config_err(
                format!("{path}.terms"),
                format!("frequencies have more entries than the base has coordinates ({})", self.base_arity()),
            ));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the validated config. The
    /// output section is left out: where a report goes does not change it.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputSpec::default();
        let json = serde_json::to_string(&c).expect("configs serialize");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn analysis_params(&self) -> AnalysisParams {
        let a = &self.analysis;
        AnalysisParams { k: a.k, n_max: a.n_max, tol: a.tol, criterion: a.criterion, residual_tol: a.residual_tol }
    }

    pub fn flow_params(&self) -> FlowParams {
        let a = &self.analysis;
        FlowParams { n_max: a.n_max, tol: a.tol, t_check: a.t_max }
    }

    pub fn is_flow(&self) -> bool {
        self.generator.is_flow()
    }

    pub fn build(&self) -> Result<Scenario> {
        self.validate()?;
        if self.is_flow() {
            return self.build_flow().map(Scenario::Flow);
        }
        let d = self.dimension;
        let base = match &self.base {
            BaseSpec::Fixed => BaseSystem::cycle(1)?,
            BaseSpec::Cycle { length } => BaseSystem::cycle(*length)?,
            BaseSpec::Rotation { alpha, grid } => BaseSystem::rotation(alpha.0, *grid)?,
            BaseSpec::Torus { shift, grid } => BaseSystem::torus(shift.iter().map(|s| s.0).collect(), *grid)?,
            BaseSpec::Flow { .. } => unreachable!("validated"),
        };
        let norm = self.norm.clone();
        let c = match &self.generator {
            GeneratorSpec::Constant { matrix } => {
                let m = matrix_of(matrix, d, "generator.matrix")?;
                CocycleSystem::new(base, d, norm, move |_: &[f64]| m.clone())
            }
            GeneratorSpec::ConjugatedDiagonal { diagonal, angle } => {
                let dm = DMatrix::from_diagonal(&DVector::from_column_slice(diagonal));
                let angle = angle.clone();
                CocycleSystem::new(base, d, norm, move |x: &[f64]| {
                    let r = rotation(d, 0, 1, angle.eval(x));
                    &r * &dm * r.transpose()
                })
            }
            GeneratorSpec::Schrodinger { energy, potential } => {
                let e = energy.0;
                let v = potential.clone();
                let gen = move |x: &[f64]| DMatrix::from_row_slice(2, 2, &[e - v.eval(x), -1.0, 1.0, 0.0]);
                for s in base.samples() {
                    let det = gen(s).determinant();
                    if (det - 1.0).abs() > 1e-12 {
                        return Err(config_err("generator", format!("determinant {det} at {s:?} is not 1")));
                    }
                }
                CocycleSystem::new(base, 2, norm, gen)
            }
            GeneratorSpec::RandomNearDiagonal { diagonal, perturbation } => {
                let dm = DMatrix::from_diagonal(&DVector::from_column_slice(diagonal));
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let mut draw = || DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0)) * *perturbation;
                if let BaseSpec::Cycle { length } = self.base {
                    let mats: Vec<DMatrix<f64>> = (0..length).map(|_| &dm + draw()).collect();
                    CocycleSystem::new(base, d, norm, move |x: &[f64]| mats[x[0].round() as usize % mats.len()].clone())
                } else {
                    let (c0, c1, s1) = (draw(), draw(), draw());
                    CocycleSystem::new(base, d, norm, move |x: &[f64]| {
                        let phase = 2.0 * PI * x.iter().sum::<f64>();
                        &dm + &c0 + &c1 * phase.cos() + &s1 * phase.sin()
                    })
                }
            }
            _ => unreachable!("validated"),
        };
        let c = c.map_err(|e| config_err("generator", e.to_string()))?;
        Ok(Scenario::Discrete(c.with_horizon(self.analysis.horizon)))
    }

    fn build_flow(&self) -> Result<FlowCocycle> {
        let d = self.dimension;
        let BaseSpec::Flow { frequency, grid } = &self.base else { unreachable!("validated") };
        let base = match frequency {
            Some(f) => FlowBase::Torus { frequency: f.iter().map(|c| c.0).collect() },
            None => FlowBase::Constant,
        };
        let norm = self.norm.clone();
        let fc = match &self.generator {
            GeneratorSpec::FlowConstant { matrix } => {
                let m = matrix_of(matrix, d, "generator.matrix")?;
                FlowCocycle::new(base, d, norm, move |_: &[f64]| m.clone(), *grid)
            }
            GeneratorSpec::DiagonalTrig { diagonal, forcing } => {
                let dm = DMatrix::from_diagonal(&DVector::from_column_slice(diagonal));
                let eps = *forcing;
                FlowCocycle::new(base, d, norm, move |y: &[f64]| forced_field(&dm, eps, y), *grid)
            }
            GeneratorSpec::Rotation { rate } => {
                let j = (rotation_generator(d)) * *rate;
                FlowCocycle::new(base, d, norm, move |_: &[f64]| j.clone(), *grid)
            }
            _ => unreachable!("validated"),
        };
        let fc = fc.map_err(|e| config_err("generator", e.to_string()))?;
        Ok(fc.with_step(self.analysis.step))
    }
}

fn rotation_generator(d: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(d, d);
    j[(0, 1)] = -1.0;
    j[(1, 0)] = 1.0;
    j
}

/// `D + eps P(y)` where `P` couples neighbouring coordinates through
/// `cos`, `sin` of the first two torus angles.
pub fn forced_field(dm: &DMatrix<f64>, eps: f64, y: &[f64]) -> DMatrix<f64> {
    let d = dm.nrows();
    let a = 2.0 * PI * y.first().copied().unwrap_or(0.0);
    let b = 2.0 * PI * y.get(1).copied().unwrap_or(0.0);
    let mut m = dm.clone();
    for i in 0..d {
        m[(i, i)] += eps * (a + i as f64 * b).cos();
        if i + 1 < d {
            m[(i, i + 1)] += eps * b.sin();
            m[(i + 1, i)] += 0.5 * eps * (a + b).cos();
        }
    }
    m
}
