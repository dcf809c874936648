//! Singular value splittings `R^d = E + F` adapted to an operator `A`, in the
//! Euclidean setting and in general norms, plus Lipschitz estimates for
//! `log det(A|E)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::{sphere_sup, SearchOptions};
use crate::geometry::{self, BoundCheck};
use crate::linalg::{self, Svd};
use crate::norms::{scale_rows, Norm};
use crate::snumbers::{self, GENERAL_CAP};
use crate::subspace::{Subspace, RANK_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedCheck {
    pub name: String,
    pub check: BoundCheck,
}

fn named(name: &str, check: BoundCheck) -> NamedCheck {
    NamedCheck { name: name.to_string(), check }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitPair {
    pub e: Subspace,
    pub f: Subspace,
    pub e_image: Subspace,
    pub f_image: Subspace,
    /// `|pi_{E//F}|`
    pub proj_norm_domain: f64,
    /// `|pi_{E'//F'}|`
    pub proj_norm_image: f64,
    /// `m(A|_E)`
    pub min_norm_on_e: f64,
    /// `|A|_F|`
    pub sup_norm_on_f: f64,
    /// `det(A|E) / V_k(A)`
    pub r: f64,
    /// `|pi_{E'//F'} A B_F| / |A B_F|`, zero when `A F` lies in `F'`.
    pub containment_residual: f64,
    pub checks: Vec<NamedCheck>,
}

impl SplitPair {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.check.holds)
    }
}

fn containment_residual(a: &DMatrix<f64>, f: &Subspace, e_image: &Subspace, f_image: &Subspace) -> Result<f64> {
    let p = geometry::oblique_projection(e_image, f_image)?;
    let af = a * f.basis();
    let n = linalg::spectral_norm(&af);
    if n == 0.0 {
        return Ok(0.0);
    }
    Ok(linalg::spectral_norm(&(p * af)) / n)
}

fn check_split_dims(a: &DMatrix<f64>, e: &Subspace) -> Result<(usize, usize)> {
    let d = a.nrows();
    if a.ncols() != d || e.ambient_dim() != d {
        return Err(Error::Dimension("operator and subspace dimensions differ".into()));
    }
    let k = e.dim();
    if k == 0 || k >= d {
        return Err(Error::Dimension(format!("need 1 <= dim E < {d}, got {k}")));
    }
    Ok((d, k))
}

/// Euclidean splitting with `F = {v : A v in (A E)^perp}`.
///
/// Asserts `m(A|_E) >= r sigma_k`, `|A|_F| <= sigma_{k+1} / r` and
/// `|pi_{E//F}| <= 1/r`, where `r = det(A|E) / V_k(A)`.
pub fn hilbert_svd_split(a: &DMatrix<f64>, e: &Subspace) -> Result<SplitPair> {
    let (_, k) = check_split_dims(a, e)?;
    let e_image = e.image(a)?;
    let f_image = e_image.orth_complement();
    let f = Subspace::preimage(a, &f_image);
    if f.dim() != a.nrows() - k {
        return Err(Error::Dimension(format!("complement has dimension {}", f.dim())));
    }
    let s = linalg::singular_values(a);
    let det_e: f64 = linalg::singular_values(&(a * e.basis())).iter().product();
    let vk: f64 = s.iter().take(k).product();
    let r = det_e / vk;
    let min_norm_on_e = linalg::min_singular(&(a * e.basis()));
    let sup_norm_on_f = linalg::spectral_norm(&(a * f.basis()));
    let proj_norm_domain = geometry::projection_norm(e, &f, &Norm::Euclidean)?;
    let checks = vec![
        named("min_norm_on_E >= r sigma_k", BoundCheck::new(r * s[k - 1], min_norm_on_e, 1e-9)),
        named("sup_norm_on_F <= sigma_{k+1} / r", BoundCheck::new(sup_norm_on_f, s[k] / r, 1e-9)),
        named("projection <= 1 / r", BoundCheck::new(proj_norm_domain, 1.0 / r, 1e-9)),
    ];
    let pair = SplitPair {
        containment_residual: containment_residual(a, &f, &e_image, &f_image)?,
        e: e.clone(),
        f,
        e_image,
        f_image,
        proj_norm_domain,
        proj_norm_image: 1.0,
        min_norm_on_e,
        sup_norm_on_f,
        r,
        checks,
    };
    if let Some(bad) = pair.checks.iter().find(|c| !c.check.holds) {
        return Err(Error::BoundViolated(format!("{}: {:?}", bad.name, bad.check)));
    }
    Ok(pair)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneStep {
    pub v: DVector<f64>,
    /// Norming functional of `A v`; `G' = ker l`.
    pub functional: DVector<f64>,
    pub g: Subspace,
    pub g_image: Subspace,
    /// `|pi_{<v>//G}|`
    pub proj_norm_domain: f64,
    /// `|pi_{<Av>//G'}|`
    pub proj_norm_image: f64,
    /// `c_1(A) / |A v|`
    pub bound: f64,
    pub holds: bool,
}

/// `sup { |l(x)| : x in D, |x| = 1 }`.
fn functional_norm_on(l: &DVector<f64>, d: &Subspace, norm: &Norm, opts: &SearchOptions) -> f64 {
    if norm.is_euclidean() {
        return (d.basis().transpose() * l).norm();
    }
    if let Some(w) = norm.scaling() {
        let wd = Subspace::span_of(&scale_rows(d.basis(), &w));
        let lw = l.component_div(&w);
        return (wd.basis().transpose() * lw).norm();
    }
    sphere_sup(norm, d.basis(), |x| l.dot(x).abs(), opts).value
}

/// `{x in sub : h . x = 0}`.
fn hyperplane_section(sub: &Subspace, h: &DVector<f64>) -> Subspace {
    let c = sub.basis().transpose() * h;
    let row = DMatrix::from_row_slice(1, c.len(), c.as_slice());
    let n = linalg::null_space(&row, RANK_TOL);
    Subspace::span_of(&(sub.basis() * n))
}

/// One step of paring: complements `G` of `<v>` in `domain` and `G'` of
/// `<Av>` in `codomain` with `A G in G'`.
fn one_step_within(
    a: &DMatrix<f64>,
    domain: &Subspace,
    codomain: &Subspace,
    v: &DVector<f64>,
    norm: &Norm,
    opts: &SearchOptions,
) -> Result<OneStep> {
    let w = a * v;
    let aw = norm.eval(&w);
    if aw == 0.0 {
        return Err(Error::Precondition("vector in kernel".into()));
    }
    let l = norm.norming_functional(&w);
    let g = hyperplane_section(domain, &(a.transpose() * &l));
    let g_image = hyperplane_section(codomain, &l);
    let vn = norm.eval(v);
    let lav = l.dot(&w);
    // pi_{<v>//G} u = l(Au) / l(Av) v
    let proj_norm_domain = functional_norm_on(&(a.transpose() * &l), domain, norm, opts) * vn / lav;
    let proj_norm_image = functional_norm_on(&l, codomain, norm, opts) * aw / lav;
    let c1 = geometry::restricted_norm_with(a, domain, norm, opts);
    let bound = c1 * vn / aw;
    let holds = BoundCheck::new(proj_norm_domain, bound, 1e-9).holds && (proj_norm_image - 1.0).abs() < 1e-9;
    Ok(OneStep { v: v.clone(), functional: l, g, g_image, proj_norm_domain, proj_norm_image, bound, holds })
}

/// Complements `G`, `G'` of `<v>`, `<Av>` with `A G in G'`,
/// `|pi_{<v>//G}| <= c_1(A)/|Av|` and `|pi_{<Av>//G'}| = 1`.
pub fn banach_one_step(a: &DMatrix<f64>, v: &DVector<f64>, norm: &Norm) -> Result<OneStep> {
    let d = a.nrows();
    norm.check_dim(d)?;
    let whole = Subspace::whole(d);
    let step = one_step_within(a, &whole, &whole, v, norm, &SearchOptions::default())?;
    if !step.holds {
        return Err(Error::BoundViolated(format!(
            "one step: projection {} vs bound {}, image projection {}",
            step.proj_norm_domain, step.bound, step.proj_norm_image
        )));
    }
    Ok(step)
}

/// Maximizer of `|A v|` over the unit sphere of `e`.
fn top_vector(a: &DMatrix<f64>, e: &Subspace, norm: &Norm, opts: &SearchOptions) -> DVector<f64> {
    if norm.is_euclidean() {
        let svd = Svd::new(&(a * e.basis()));
        let mut v = e.basis() * svd.v.column(0);
        linalg::fix_sign(&mut v);
        return v;
    }
    if let Some(w) = norm.scaling() {
        let we = Subspace::span_of(&scale_rows(e.basis(), &w));
        let b = crate::norms::conjugate_by_scaling(a, &w);
        let svd = Svd::new(&(&b * we.basis()));
        let mut v = (we.basis() * svd.v.column(0)).component_div(&w);
        linalg::fix_sign(&mut v);
        return v;
    }
    sphere_sup(norm, e.basis(), |x| norm.eval(&(a * x)), opts).point
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSvd {
    pub pair: SplitPair,
    pub steps: Vec<OneStep>,
    /// `c_{k+1}(A)`
    pub c_next: f64,
    /// Smallest `D` with `|pi_{E//F}|, |pi_{E'//F'}| <= D` and `|A|_F| <= D c_{k+1}`.
    pub empirical_d: f64,
    /// `r^{-(2^k - 1)}`, the shape of the a priori constant with `C_k = 1`.
    pub d_shape: f64,
}

/// Splitting in a general norm by paring off one dimension at a time.
pub fn banach_gen_svd(a: &DMatrix<f64>, e: &Subspace, norm: &Norm, opts: &SearchOptions) -> Result<GenSvd> {
    let (d, k) = check_split_dims(a, e)?;
    norm.check_dim(d)?;
    if !norm.is_hilbert() && d > GENERAL_CAP {
        return Err(Error::DimensionCap { what: "general-norm splitting", dim: d, cap: GENERAL_CAP });
    }
    let e_image = e.image(a)?;
    let mut f = Subspace::whole(d);
    let mut fp = Subspace::whole(d);
    let mut ei = e.clone();
    let mut steps = Vec::with_capacity(k);
    for _ in 0..k {
        let v = top_vector(a, &ei, norm, opts);
        let v = &v / norm.eval(&v);
        let step = one_step_within(a, &f, &fp, &v, norm, opts)?;
        f = step.g.clone();
        fp = step.g_image.clone();
        ei = ei.intersection(&f);
        steps.push(step);
    }
    if f.dim() != d - k || fp.dim() != d - k {
        return Err(Error::Dimension(format!("complements have dimensions {} and {}", f.dim(), fp.dim())));
    }
    let proj_norm_domain = geometry::projection_norm(e, &f, norm)?;
    let proj_norm_image = geometry::projection_norm(&e_image, &fp, norm)?;
    let min_norm_on_e = geometry::min_norm_with(a, e, norm, opts);
    let sup_norm_on_f = geometry::restricted_norm_with(a, &f, norm, opts);
    let vk = snumbers::volume_growth(a, k, norm, opts)?.value;
    let r = geometry::determinant(a, e, norm) / vk;
    let c_next = snumbers::gelfand(a, k + 1, norm, opts)?.value;
    let empirical_d = proj_norm_domain.max(proj_norm_image).max(sup_norm_on_f / c_next);
    let d_shape = r.powi(-((1i32 << k) - 1));
    let containment = containment_residual(a, &f, &e_image, &fp)?;
    let checks = vec![
        named("A F in F'", BoundCheck::new(containment, 1e-9, 0.0)),
        named(
            "one-step projection bounds",
            BoundCheck::new(steps.iter().filter(|s| !s.holds).count() as f64, 0.0, 0.0),
        ),
    ];
    Ok(GenSvd {
        pair: SplitPair {
            e: e.clone(),
            f,
            e_image,
            f_image: fp,
            proj_norm_domain,
            proj_norm_image,
            min_norm_on_e,
            sup_norm_on_f,
            r,
            containment_residual: containment,
            checks,
        },
        steps,
        c_next,
        empirical_d,
        d_shape,
    })
}

/// The complements `F`, `F'` of the paring construction, without the
/// diagnostic measurements of [`banach_gen_svd`].
pub fn gen_svd_complement(
    a: &DMatrix<f64>,
    e: &Subspace,
    norm: &Norm,
    opts: &SearchOptions,
) -> Result<(Subspace, Subspace)> {
    let (d, k) = check_split_dims(a, e)?;
    norm.check_dim(d)?;
    let mut f = Subspace::whole(d);
    let mut fp = Subspace::whole(d);
    let mut ei = e.clone();
    for _ in 0..k {
        let v = top_vector(a, &ei, norm, opts);
        let w = a * &v;
        if norm.eval(&w) == 0.0 {
            return Err(Error::NotInjective { ratio: 0.0 });
        }
        let l = norm.norming_functional(&w);
        f = hyperplane_section(&f, &(a.transpose() * &l));
        fp = hyperplane_section(&fp, &l);
        ei = ei.intersection(&f);
    }
    if f.dim() != d - k || fp.dim() != d - k {
        return Err(Error::Dimension(format!("complements have dimensions {} and {}", f.dim(), fp.dim())));
    }
    Ok((f, fp))
}

fn log_abs_det(b: &DMatrix<f64>) -> f64 {
    linalg::singular_values(b).iter().map(|s| s.ln()).sum()
}

/// `|log det B2/det B1| <= k |B1 - B2| / (m - |B1 - B2|)` with
/// `m = min(|B1^{-1}|^{-1}, |B2^{-1}|^{-1})`.
pub fn det_lipschitz_matrices(b1: &DMatrix<f64>, b2: &DMatrix<f64>) -> Result<BoundCheck> {
    let k = b1.nrows();
    if b1.shape() != (k, k) || b2.shape() != (k, k) {
        return Err(Error::Dimension("need two k x k matrices".into()));
    }
    let m = linalg::min_singular(b1).min(linalg::min_singular(b2));
    let delta = linalg::spectral_norm(&(b1 - b2));
    if !(m > 0.0) || !(delta < m) {
        return Err(Error::Precondition(format!("bound not applicable: |dB| = {delta:.3e}, m = {m:.3e}")));
    }
    let lhs = (log_abs_det(b2) - log_abs_det(b1)).abs();
    Ok(BoundCheck::new(lhs, k as f64 * delta / (m - delta), 1e-12))
}

/// `log det(A|E)` in the Euclidean norm.
pub fn log_det_on(a: &DMatrix<f64>, e: &Subspace) -> f64 {
    linalg::singular_values(&(a * e.basis())).iter().map(|s| s.ln()).sum()
}

/// `|log det(A|E1)/det(A|E2)| <= 36 k kappa(A)^2 d_H(E1, E2)` when
/// `d_H(E1, E2) <= (2 kappa)^{-2}`.
pub fn det_lipschitz_grassmann(a: &DMatrix<f64>, e1: &Subspace, e2: &Subspace) -> Result<BoundCheck> {
    let k = e1.dim();
    if e2.dim() != k || k == 0 {
        return Err(Error::Dimension("subspaces must share a positive dimension".into()));
    }
    let s = linalg::singular_values(a);
    let smin = s[s.len() - 1];
    if smin == 0.0 {
        return Err(Error::Precondition("operator is singular".into()));
    }
    let kappa = s[0] / smin;
    let dh = geometry::hausdorff(e1, e2, &Norm::Euclidean);
    if dh > (2.0 * kappa).powi(-2) {
        return Err(Error::Precondition(format!("bound not applicable: d_H = {dh:.3e} > (2 kappa)^-2")));
    }
    let lhs = (log_det_on(a, e1) - log_det_on(a, e2)).abs();
    Ok(BoundCheck::new(lhs, 36.0 * k as f64 * kappa * kappa * dh, 1e-12))
}

/// `|log det(A1|E1)/det(A2|E2)| / (|A1 - A2| + d_H(E1, E2))`, or 0 when both
/// numerator and denominator vanish.
pub fn det_reg_banach_check(
    a1: &DMatrix<f64>,
    a2: &DMatrix<f64>,
    e1: &Subspace,
    e2: &Subspace,
    norm: &Norm,
) -> Result<f64> {
    let d1 = geometry::determinant(a1, e1, norm);
    let d2 = geometry::determinant(a2, e2, norm);
    if d1 == 0.0 || d2 == 0.0 {
        return Err(Error::Precondition("degenerate restriction".into()));
    }
    let num = (d1.ln() - d2.ln()).abs();
    let den = geometry::operator_norm(&(a1 - a2), norm) + geometry::hausdorff(e1, e2, norm);
    if den == 0.0 {
        return Ok(if num < 1e-12 { 0.0 } else { f64::INFINITY });
    }
    Ok(num / den)
}

/// Euclidean bound on `|log det(A1|E1)/det(A2|E2)|` obtained by changing the
/// operator first (matrix estimate on the singular values of `A_i B_{E1}`)
/// and then the subspace (Grassmannian estimate for `A2`). `None` when a
/// precondition fails.
pub fn composed_euclidean_bound(a1: &DMatrix<f64>, a2: &DMatrix<f64>, e1: &Subspace, e2: &Subspace) -> Option<f64> {
    let k = e1.dim() as f64;
    let m = linalg::min_singular(&(a1 * e1.basis()));
    let delta = linalg::spectral_norm(&(a1 - a2));
    if !(delta < m) {
        return None;
    }
    let first = k * delta / (m - delta);
    let second = det_lipschitz_grassmann(a2, e1, e2).ok()?.rhs;
    Some(first + second)
}
