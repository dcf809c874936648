//! Seeded randomized sweeps over the geometric, s-number, splitting and
//! quantitative inequalities. Every instance is drawn inside the
//! preconditions of the inequality it exercises; a violation is reported
//! together with the smallest dimension at which the same draw still fails.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::SearchOptions;
use crate::geometry::{self, BoundCheck};
use crate::linalg;
use crate::norms::Norm;
use crate::snumbers;
use crate::subspace::Subspace;
use crate::svd_split;

/// Largest ambient dimension accepted by the sweeps.
pub const DIM_CAP: usize = 8;
/// Dimension used for the polytope-norm subsets of the sweeps.
const POLYTOPE_DIM: usize = 3;
/// Every `POLYTOPE_EVERY`-th trial also runs the polytope-norm checks.
const POLYTOPE_EVERY: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Geometry,
    Snumbers,
    Svd,
    Quantitative,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Geometry, Suite::Snumbers, Suite::Svd, Suite::Quantitative];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Geometry => "geometry",
            Suite::Snumbers => "snumbers",
            Suite::Svd => "svd",
            Suite::Quantitative => "quantitative",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown suite `{s}` (geometry, snumbers, svd, quantitative)")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub trials: usize,
    pub seed: u64,
    /// Largest ambient dimension; trials cycle through `2..=dim`.
    pub dim: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { trials: 1000, seed: 0, dim: 4 }
    }
}

/// Result of one instance of one check.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    /// The draw missed the preconditions.
    Skip,
    Checked {
        lhs: f64,
        rhs: f64,
        holds: bool,
    },
}

impl Outcome {
    fn bound(b: BoundCheck) -> Outcome {
        Outcome::Checked { lhs: b.lhs, rhs: b.rhs, holds: b.holds }
    }

    /// `|value - target| <= tol`, reported as `lhs = |value - target|`.
    fn close(value: f64, target: f64, tol: f64) -> Outcome {
        let err = (value - target).abs();
        Outcome::Checked { lhs: err, rhs: tol, holds: err <= tol }
    }

    fn from_result(r: Result<BoundCheck>) -> Outcome {
        match r {
            Ok(b) => Outcome::bound(b),
            Err(Error::Precondition(_)) => Outcome::Skip,
            Err(_) => Outcome::Checked { lhs: f64::INFINITY, rhs: 0.0, holds: false },
        }
    }
}

type CheckFn = fn(&mut ChaCha8Rng, usize) -> Outcome;

struct Check {
    name: &'static str,
    run: CheckFn,
    /// Only every `every`-th trial, at dimension `min(d, cap)`.
    every: usize,
    cap: usize,
}

const fn check(name: &'static str, run: CheckFn) -> Check {
    Check { name, run, every: 1, cap: DIM_CAP }
}

const fn sparse(name: &'static str, run: CheckFn) -> Check {
    Check { name, run, every: POLYTOPE_EVERY, cap: POLYTOPE_DIM }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckStats {
    pub name: String,
    pub evaluated: usize,
    pub skipped: usize,
    pub violations: usize,
    /// `max (lhs - rhs)` over evaluated instances.
    pub worst_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub check: String,
    pub trial: usize,
    /// Dimension of the original failing draw.
    pub dim: usize,
    /// Smallest dimension at which the same draw still fails.
    pub minimized_dim: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub options: SweepOptions,
    pub checks: Vec<CheckStats>,
    pub counterexample: Option<Counterexample>,
}

impl SuiteReport {
    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }
}

fn rng_for(seed: u64, trial: usize, check: usize, dim: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((trial as u64) << 24) ^ ((check as u64) << 8) ^ dim as u64);
    rng
}

fn trial_dim(trial: usize, dim: usize) -> usize {
    2 + trial % (dim - 1)
}

fn checks(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::Geometry => vec![
            check("hausdorff sandwich", geo_sandwich),
            check("hausdorff sandwich (weighted)", geo_sandwich_weighted),
            sparse("hausdorff sandwich (l1/linf)", geo_sandwich_polytope),
            check("gap asymmetry", geo_gap_asymmetry),
            check("angle times projection norm", geo_angle_projection),
            check("angle asymmetry", geo_angle_asymmetry),
            sparse("angle asymmetry (l1/linf)", geo_angle_asymmetry_polytope),
            check("open condition", geo_open_condition),
            check("complement norm", geo_complement),
            check("gap estimate", geo_gap_estimate),
            check("determinant multiplicativity", geo_det_multiplicative),
            check("determinant splitting", geo_det_split),
        ],
        Suite::Snumbers => vec![
            check("euclidean collapse", sn_collapse),
            check("product of singular values", sn_det),
            check("gelfand monotone", sn_monotone),
            sparse("gelfand monotone (linf)", sn_monotone_linf),
            check("submultiplicativity", sn_submultiplicative),
            check("gelfand lipschitz", sn_lipschitz),
        ],
        Suite::Svd => vec![
            check("hilbert split: min norm on E", svd_min_norm),
            check("hilbert split: norm on F", svd_norm_f),
            check("hilbert split: projection", svd_projection),
            check("one step projections", svd_one_step),
            check("paring matches hilbert split", svd_gen_matches),
            check("paring containment", svd_gen_containment),
            sparse("paring containment (linf)", svd_gen_containment_linf),
        ],
        Suite::Quantitative => vec![
            check("log det of nearby matrices", q_matrices),
            check("log det over nearby subspaces", q_grassmann),
            check("composed log det bound", q_composed),
        ],
    }
}

/// Runs `trials` instances of every check of the suite.
pub fn run_suite(suite: Suite, opts: &SweepOptions) -> Result<SuiteReport> {
    if opts.dim < 2 || opts.dim > DIM_CAP {
        return Err(Error::DimensionCap { what: "lemma sweep", dim: opts.dim, cap: DIM_CAP });
    }
    let list = checks(suite);
    let results: Vec<(CheckStats, Option<Counterexample>)> = list
        .par_iter()
        .enumerate()
        .map(|(ci, c)| {
            let mut stats = CheckStats {
                name: c.name.to_string(),
                evaluated: 0,
                skipped: 0,
                violations: 0,
                worst_margin: f64::NEG_INFINITY,
            };
            let mut first = None;
            for t in (0..opts.trials).filter(|t| t % c.every == 0) {
                let d = trial_dim(t, opts.dim).min(c.cap);
                match (c.run)(&mut rng_for(opts.seed, t, ci, d), d) {
                    Outcome::Skip => stats.skipped += 1,
                    Outcome::Checked { lhs, rhs, holds } => {
                        stats.evaluated += 1;
                        stats.worst_margin = stats.worst_margin.max(lhs - rhs);
                        if !holds {
                            stats.violations += 1;
                            if first.is_none() {
                                first = Some(minimize(c, ci, opts.seed, t, d, lhs, rhs));
                            }
                        }
                    }
                }
            }
            (stats, first)
        })
        .collect();
    let counterexample = results.iter().find_map(|r| r.1.clone());
    Ok(SuiteReport { suite, options: *opts, checks: results.into_iter().map(|r| r.0).collect(), counterexample })
}

fn minimize(c: &Check, ci: usize, seed: u64, trial: usize, dim: usize, lhs: f64, rhs: f64) -> Counterexample {
    let mut out = Counterexample { check: c.name.to_string(), trial, dim, minimized_dim: dim, lhs, rhs };
    for d in 2..dim {
        if let Outcome::Checked { lhs, rhs, holds: false } = (c.run)(&mut rng_for(seed, trial, ci, d), d) {
            out.minimized_dim = d;
            out.lhs = lhs;
            out.rhs = rhs;
            break;
        }
    }
    out
}

// ---- random instances ----

pub fn random_matrix(rng: &mut impl Rng, d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0))
}

/// A random matrix with condition number at most `kappa`.
pub fn random_conditioned(rng: &mut impl Rng, d: usize, kappa: f64) -> DMatrix<f64> {
    let u = random_orthogonal(rng, d);
    let v = random_orthogonal(rng, d);
    let mut s: Vec<f64> = (0..d).map(|_| rng.gen_range(1.0..kappa)).collect();
    s[0] = kappa;
    if d > 1 {
        s[d - 1] = 1.0;
    }
    u * DMatrix::from_diagonal(&DVector::from_vec(s)) * v.transpose()
}

pub fn random_orthogonal(rng: &mut impl Rng, d: usize) -> DMatrix<f64> {
    random_matrix(rng, d).qr().q()
}

pub fn random_subspace(rng: &mut impl Rng, d: usize, q: usize) -> Subspace {
    Subspace::span_of(&DMatrix::from_fn(d, q, |_, _| rng.gen_range(-1.0..1.0)))
}

/// `E` moved by a random perturbation of size about `eps` in its basis.
pub fn perturb(rng: &mut impl Rng, e: &Subspace, eps: f64) -> Subspace {
    let b = e.basis();
    let noise = DMatrix::from_fn(b.nrows(), b.ncols(), |_, _| rng.gen_range(-1.0..1.0));
    let n = linalg::spectral_norm(&noise).max(1e-300);
    Subspace::span_of(&(b + noise * (eps / n)))
}

fn random_weights(rng: &mut impl Rng, d: usize) -> Norm {
    Norm::Weighted((0..d).map(|_| rng.gen_range(0.2..5.0)).collect())
}

fn polytope(rng: &mut impl Rng) -> Norm {
    if rng.gen_bool(0.5) {
        Norm::l1()
    } else {
        Norm::linf()
    }
}

fn split_dim(rng: &mut impl Rng, d: usize) -> usize {
    rng.gen_range(1..d)
}

/// `sigma_i` from the eigenvalues of `A^T A`, descending.
pub fn eigen_singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> =
        SymmetricEigen::new(a.transpose() * a).eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// `det(A|E)` for an orthonormal basis `b` of `E`: `|det R|` from `A b = Q R`.
pub fn qr_determinant(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a * b).qr().r().diagonal().iter().map(|x| x.abs()).product()
}

// ---- geometry ----

fn sandwich(e: &Subspace, ep: &Subspace, norm: &Norm) -> Outcome {
    let (lo, hi) = geometry::hausdorff_sandwich(e, ep, norm);
    let worst = if lo.lhs - lo.rhs > hi.lhs - hi.rhs { lo } else { hi };
    Outcome::Checked { lhs: worst.lhs, rhs: worst.rhs, holds: lo.holds && hi.holds }
}

fn geo_sandwich(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let q = split_dim(rng, d);
    let e = random_subspace(rng, d, q);
    let q2 = if rng.gen_bool(0.5) { q } else { split_dim(rng, d) };
    sandwich(&e, &random_subspace(rng, d, q2), &Norm::Euclidean)
}

fn geo_sandwich_weighted(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let q = split_dim(rng, d);
    let e = random_subspace(rng, d, q);
    let x = rng.gen_range(0.01..1.0);
    let ep = perturb(rng, &e, x);
    sandwich(&e, &ep, &random_weights(rng, d))
}

fn geo_sandwich_polytope(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let e = random_subspace(rng, d, 1);
    let ep = random_subspace(rng, d, 1);
    sandwich(&e, &ep, &polytope(rng))
}

fn geo_gap_asymmetry(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let q = split_dim(rng, d);
    let e = random_subspace(rng, d, q);
    let x = rng.gen_range(0.001..0.5) / q as f64;
    let ep = perturb(rng, &e, x);
    let norm = if rng.gen_bool(0.5) { Norm::Euclidean } else { random_weights(rng, d) };
    Outcome::from_result(geometry::gap_asymmetry_bound(&e, &ep, q, &norm))
}

fn complement_pair(rng: &mut ChaCha8Rng, d: usize) -> (Subspace, Subspace) {
    let q = split_dim(rng, d);
    let e = random_subspace(rng, d, q);
    let f = random_subspace(rng, d, d - q);
    (e, f)
}

fn geo_angle_projection(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let (e, f) = complement_pair(rng, d);
    match geometry::angle_projection_identity(&e, &f, &Norm::Euclidean) {
        Ok(v) => Outcome::close(v, 1.0, 1e-6),
        Err(_) => Outcome::Skip,
    }
}

fn geo_angle_asymmetry(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let (e, f) = complement_pair(rng, d);
    let norm = if rng.gen_bool(0.5) { Norm::Euclidean } else { random_weights(rng, d) };
    let a = geometry::sin_minimal_angle(&f, &e, &norm);
    let b = geometry::sin_minimal_angle(&e, &f, &norm);
    Outcome::bound(BoundCheck::new(a, 2.0 * b, 1e-9))
}

fn geo_angle_asymmetry_polytope(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let e = random_subspace(rng, d, 1);
    let f = random_subspace(rng, d, d - 1);
    let norm = polytope(rng);
    let a = geometry::sin_minimal_angle(&f, &e, &norm);
    let b = geometry::sin_minimal_angle(&e, &f, &norm);
    Outcome::bound(BoundCheck::new(a, 2.0 * b, 1e-6))
}

fn geo_open_condition(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let (e, f) = complement_pair(rng, d);
    let s = geometry::sin_minimal_angle(&e, &f, &Norm::Euclidean);
    let x = s * rng.gen_range(0.01..0.5);
    let ep = perturb(rng, &e, x);
    Outcome::from_result(geometry::open_condition(&e, &ep, &f, &Norm::Euclidean))
}

fn geo_complement(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let q = split_dim(rng, d);
    let e = random_subspace(rng, d, q);
    let norm = if rng.gen_bool(0.5) { Norm::Euclidean } else { random_weights(rng, d) };
    match geometry::complement_with_bound(&e, &norm) {
        Ok((_, b)) => Outcome::Checked { lhs: b.lhs, rhs: b.rhs, holds: b.holds && (b.lhs - 1.0).abs() < 1e-9 },
        Err(_) => Outcome::Checked { lhs: f64::INFINITY, rhs: 0.0, holds: false },
    }
}

fn geo_gap_estimate(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let (e, f) = complement_pair(rng, d);
    let x = rng.gen_range(0.001..0.3);
    let ep = perturb(rng, &e, x);
    Outcome::from_result(geometry::gap_estimate(&e, &ep, &f, &Norm::Euclidean))
}

fn geo_det_multiplicative(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let a = random_conditioned(rng, d, 5.0);
    let b = random_conditioned(rng, d, 5.0);
    let q = split_dim(rng, d);
    let e = random_subspace(rng, d, q);
    let ae = match e.image(&a) {
        Ok(s) => s,
        Err(_) => return Outcome::Skip,
    };
    let lhs = geometry::determinant(&(&b * &a), &e, &Norm::Euclidean);
    let rhs = geometry::determinant(&b, &ae, &Norm::Euclidean) * geometry::determinant(&a, &e, &Norm::Euclidean);
    Outcome::close(lhs / rhs, 1.0, 1e-9)
}

fn geo_det_split(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let a = random_conditioned(rng, d, 5.0);
    let l = rng.gen_range(1..d);
    let m = rng.gen_range(1..=d - l);
    let g = random_subspace(rng, d, l);
    let h = random_subspace(rng, d, m);
    match geometry::det_split_bound(&a, &g, &h, &Norm::Euclidean) {
        Ok(s) => {
            let margin = (s.lower - s.ratio).max(s.ratio - s.upper);
            Outcome::Checked { lhs: margin, rhs: 0.0, holds: s.holds == Some(true) }
        }
        Err(_) => Outcome::Skip,
    }
}

// ---- s-numbers ----

fn sn_collapse(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let a = random_matrix(rng, d);
    let sigma = eigen_singular_values(&a);
    let opts = SearchOptions::default();
    let norm = Norm::Euclidean;
    let mut err = 0.0f64;
    let mut prod = 1.0;
    for q in 1..=d {
        prod *= sigma[q - 1];
        let (Ok(c), Ok(x), Ok(v)) = (
            snumbers::gelfand(&a, q, &norm, &opts),
            snumbers::kolmogorov(&a, q, &norm, &opts),
            snumbers::volume_growth(&a, q, &norm, &opts),
        ) else {
            return Outcome::Checked { lhs: f64::INFINITY, rhs: 0.0, holds: false };
        };
        // singular values are only determined to eps * sigma_1, volumes to
        // eps * sigma_1^q; certificates are re-evaluated independently
        let scale = sigma[0];
        let on_f = eigen_singular_values(&(&a * c.certificate.basis()))[0];
        let on_w = *eigen_singular_values(&(&a * x.certificate.basis())).last().unwrap();
        let vol = qr_determinant(&a, v.certificate.basis());
        err = err
            .max((c.value - sigma[q - 1]).abs() / scale)
            .max((x.value - sigma[q - 1]).abs() / scale)
            .max((on_f - sigma[q - 1]).abs() / scale)
            .max((on_w - sigma[q - 1]).abs() / scale)
            .max((v.value - prod).abs() / scale.powi(q as i32))
            .max((vol - v.value).abs() / v.value);
    }
    Outcome::close(err, 0.0, 1e-9)
}

fn sn_det(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let a = random_matrix(rng, d);
    let p: f64 = linalg::singular_values(&a).iter().product();
    let det = a.determinant().abs();
    Outcome::close(p / det, 1.0, 1e-9)
}

fn gelfand_list(a: &DMatrix<f64>, norm: &Norm) -> Option<Vec<f64>> {
    let opts = SearchOptions::default();
    (1..=a.nrows()).map(|q| snumbers::gelfand(a, q, norm, &opts).ok().map(|s| s.value)).collect()
}

fn monotone(values: &[f64], slack: f64) -> Outcome {
    let worst = values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    Outcome::Checked { lhs: worst, rhs: 0.0, holds: worst <= slack * (1.0 + values[0]) }
}

fn sn_monotone(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let a = random_matrix(rng, d);
    let norm = if rng.gen_bool(0.5) { Norm::Euclidean } else { random_weights(rng, d) };
    match gelfand_list(&a, &norm) {
        Some(c) => monotone(&c, 1e-9),
        None => Outcome::Checked { lhs: f64::INFINITY, rhs: 0.0, holds: false },
    }
}

fn sn_monotone_linf(rng: &mut ChaCha8Rng, _d: usize) -> Outcome {
    let a = random_matrix(rng, 2);
    match gelfand_list(&a, &Norm::linf()) {
        Some(c) => monotone(&c, 1e-6),
        None => Outcome::Checked { lhs: f64::INFINITY, rhs: 0.0, holds: false },
    }
}

fn sn_submultiplicative(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let (a, b, c) = (random_matrix(rng, d), random_matrix(rng, d), random_matrix(rng, d));
    let k = rng.gen_range(1..=d);
    let sk = |m: &DMatrix<f64>| linalg::singular_values(m)[k - 1];
    let lhs = sk(&(&a * &b * &c));
    let rhs = linalg::spectral_norm(&a) * sk(&b) * linalg::spectral_norm(&c);
    Outcome::bound(BoundCheck::new(lhs, rhs, 1e-12))
}

fn sn_lipschitz(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let a = random_matrix(rng, d);
    let b = &a + random_matrix(rng, d) * rng.gen_range(1e-6..1.0);
    let sa = linalg::singular_values(&a);
    let sb = linalg::singular_values(&b);
    let lhs = (0..d).map(|q| (sa[q] - sb[q]).abs()).fold(0.0, f64::max);
    Outcome::bound(BoundCheck::new(lhs, linalg::spectral_norm(&(&a - &b)), 1e-12))
}

// ---- splittings ----

/// `E` near the top-`k` right singular subspace, so that `r` ranges over (0, 1].
fn near_top(rng: &mut ChaCha8Rng, a: &DMatrix<f64>, d: usize) -> Subspace {
    let k = split_dim(rng, d);
    let top = Subspace::from_orthonormal(linalg::Svd::new(a).right(k));
    let x = rng.gen_range(0.0..1.0);
    perturb(rng, &top, x)
}

fn hilbert_check(rng: &mut ChaCha8Rng, d: usize, which: usize) -> Outcome {
    let x = rng.gen_range(1.5..20.0);
    let a = random_conditioned(rng, d, x);
    let e = near_top(rng, &a, d);
    match svd_split::hilbert_svd_split(&a, &e) {
        Ok(p) => Outcome::bound(p.checks[which].check),
        Err(Error::BoundViolated(_)) => Outcome::Checked { lhs: f64::INFINITY, rhs: 0.0, holds: false },
        Err(_) => Outcome::Skip,
    }
}

fn svd_min_norm(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    hilbert_check(rng, d, 0)
}

fn svd_norm_f(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    hilbert_check(rng, d, 1)
}

fn svd_projection(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    hilbert_check(rng, d, 2)
}

fn svd_one_step(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let a = random_conditioned(rng, d, 10.0);
    let v = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0)).normalize();
    let norm = if rng.gen_bool(0.5) { Norm::Euclidean } else { random_weights(rng, d) };
    let v = &v / norm.eval(&v);
    match svd_split::banach_one_step(&a, &v, &norm) {
        Ok(s) => Outcome::Checked { lhs: s.proj_norm_domain, rhs: s.bound, holds: s.holds },
        Err(_) => Outcome::Checked { lhs: f64::INFINITY, rhs: 0.0, holds: false },
    }
}

fn svd_gen_matches(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let x = rng.gen_range(1.5..20.0);
    let a = random_conditioned(rng, d, x);
    let k = split_dim(rng, d);
    let e = Subspace::from_orthonormal(linalg::Svd::new(&a).right(k));
    let (Ok(h), Ok(g)) = (
        svd_split::hilbert_svd_split(&a, &e),
        svd_split::banach_gen_svd(&a, &e, &Norm::Euclidean, &SearchOptions::default()),
    ) else {
        return Outcome::Checked { lhs: f64::INFINITY, rhs: 0.0, holds: false };
    };
    Outcome::close(geometry::hausdorff(&h.f, &g.pair.f, &Norm::Euclidean), 0.0, 1e-8)
}

fn svd_gen_containment(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let a = random_conditioned(rng, d, 10.0);
    let e = near_top(rng, &a, d);
    let norm = if rng.gen_bool(0.5) { Norm::Euclidean } else { random_weights(rng, d) };
    match svd_split::banach_gen_svd(&a, &e, &norm, &SearchOptions::default()) {
        Ok(g) => Outcome::close(g.pair.containment_residual, 0.0, 1e-9),
        Err(_) => Outcome::Checked { lhs: f64::INFINITY, rhs: 0.0, holds: false },
    }
}

fn svd_gen_containment_linf(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let a = random_conditioned(rng, d, 10.0);
    let q = split_dim(rng, d);
    let e = random_subspace(rng, d, q);
    let opts = SearchOptions { starts: 16, ..SearchOptions::default() };
    match svd_split::banach_gen_svd(&a, &e, &polytope(rng), &opts) {
        Ok(g) => Outcome::close(g.pair.containment_residual, 0.0, 1e-9),
        Err(_) => Outcome::Checked { lhs: f64::INFINITY, rhs: 0.0, holds: false },
    }
}

// ---- quantitative ----

fn q_matrices(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let k = rng.gen_range(1..=d);
    let kappa = rng.gen_range(1.0..10.0);
    let b1 = random_conditioned(rng, k, kappa) * rng.gen_range(0.1..10.0);
    let m1 = linalg::min_singular(&b1);
    let dir = random_matrix(rng, k);
    // |dB| = t m1 keeps |dB| < min(m1, m2) since m2 >= m1 - |dB|, up to t < 1/2
    let t = rng.gen_range(0.0..0.5);
    let b2 = &b1 + &dir * (t * m1 / linalg::spectral_norm(&dir));
    Outcome::from_result(svd_split::det_lipschitz_matrices(&b1, &b2))
}

fn q_grassmann(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let kappa = [2.0, 10.0, rng.gen_range(1.0..50.0)][rng.gen_range(0..3)];
    let a = random_conditioned(rng, d, kappa);
    let k = split_dim(rng, d);
    let e1 = random_subspace(rng, d, k);
    let radius = (2.0 * kappa).powi(-2);
    // d_H is within a factor 2 of the basis perturbation size
    let x = radius * rng.gen_range(0.0..0.5);
    let e2 = perturb(rng, &e1, x);
    Outcome::from_result(svd_split::det_lipschitz_grassmann(&a, &e1, &e2))
}

fn q_composed(rng: &mut ChaCha8Rng, d: usize) -> Outcome {
    let a1 = random_conditioned(rng, d, 4.0);
    let a2 = &a1 + random_matrix(rng, d) * rng.gen_range(0.0..0.02);
    let q = split_dim(rng, d);
    let e1 = random_subspace(rng, d, q);
    let x = rng.gen_range(0.0..0.005);
    let e2 = perturb(rng, &e1, x);
    let Some(bound) = svd_split::composed_euclidean_bound(&a1, &a2, &e1, &e2) else {
        return Outcome::Skip;
    };
    let lhs = (svd_split::log_det_on(&a1, &e1) - svd_split::log_det_on(&a2, &e2)).abs();
    Outcome::bound(BoundCheck::new(lhs, bound, 1e-12))
}
