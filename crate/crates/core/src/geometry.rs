//! Geometry of subspaces in a normed `R^d`: gaps, Hausdorff distance,
//! minimal angles, oblique projections and determinants.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::{self, optimize_on_sphere, sphere_sup, SearchOptions, Sense};
use crate::linalg;
use crate::norms::{conjugate_by_scaling, scale_rows, Norm};
use crate::subspace::{Subspace, RANK_TOL};

/// QMC sample count for ball volumes of dimension >= 3.
pub const VOLUME_SAMPLES: usize = 1_000_000;

/// A checked inequality `lhs <= rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl BoundCheck {
    /// `lhs <= rhs` up to an absolute-plus-relative slack.
    pub fn new(lhs: f64, rhs: f64, slack: f64) -> BoundCheck {
        let holds = lhs <= rhs + slack * (1.0 + rhs.abs());
        BoundCheck { lhs, rhs, holds }
    }
}

fn scaled(norm: &Norm, e: &Subspace) -> Option<Subspace> {
    norm.scaling().map(|w| Subspace::span_of(&scale_rows(e.basis(), &w)))
}

/// `sup { d(e, F) : e in E, |e| = 1 }`.
pub fn gap(e: &Subspace, f: &Subspace, norm: &Norm) -> f64 {
    if e.is_zero() {
        return 0.0;
    }
    if norm.is_euclidean() {
        let r = e.basis() - f.basis() * (f.basis().transpose() * e.basis());
        return linalg::spectral_norm(&r);
    }
    if let (Some(se), Some(sf)) = (scaled(norm, e), scaled(norm, f)) {
        return gap(&se, &sf, &Norm::Euclidean);
    }
    sphere_sup(norm, e.basis(), |x| extremal::distance_to_span(norm, x, f.basis()), &SearchOptions::default()).value
}

/// Hausdorff distance between unit spheres. In inner-product norms this is
/// the projector distance `|P_E - P_F|`; otherwise the two-sided sup-inf
/// distance between `S_E` and `S_F`.
pub fn hausdorff(e: &Subspace, f: &Subspace, norm: &Norm) -> f64 {
    if norm.is_euclidean() {
        if e.dim() != f.dim() {
            return 1.0;
        }
        return linalg::spectral_norm(&(e.projector() - f.projector()));
    }
    if let (Some(se), Some(sf)) = (scaled(norm, e), scaled(norm, f)) {
        return hausdorff(&se, &sf, &Norm::Euclidean);
    }
    one_sided_sphere_distance(e, f, norm).max(one_sided_sphere_distance(f, e, norm))
}

/// `sup_{x in S_E} d(x, S_F)`.
fn one_sided_sphere_distance(e: &Subspace, f: &Subspace, norm: &Norm) -> f64 {
    if e.is_zero() {
        return 0.0;
    }
    if f.is_zero() {
        return 1.0;
    }
    let opts = SearchOptions::default();
    let to_sphere = |x: &DVector<f64>| distance_to_sphere(norm, x, f.basis(), &opts);
    // the gap maximizer is a good start and makes the estimate at least Gap(E, F)
    let g = sphere_sup(norm, e.basis(), |x| extremal::distance_to_span(norm, x, f.basis()), &opts);
    let seed = e.basis().transpose() * &g.point;
    let obj = |c: &DVector<f64>| {
        let x = e.basis() * c;
        to_sphere(&(&x / norm.eval(&x)))
    };
    let (v, _) = optimize_on_sphere(e.dim(), &obj, Sense::Max, &opts, std::slice::from_ref(&seed));
    v.max(obj(&seed))
}

/// `inf { |x - y| : y in span(F), |y| = 1 }`.
fn distance_to_sphere(norm: &Norm, x: &DVector<f64>, f: &DMatrix<f64>, opts: &SearchOptions) -> f64 {
    let obj = |c: &DVector<f64>| {
        let y = f * c;
        norm.eval(&(x - &y / norm.eval(&y)))
    };
    optimize_on_sphere(f.ncols(), &obj, Sense::Min, &opts.inner(), &[]).0
}

/// `sin theta(E, F) = inf { |e - f| : e in S_E, f in F }`.
pub fn sin_minimal_angle(e: &Subspace, f: &Subspace, norm: &Norm) -> f64 {
    if e.is_zero() || f.is_zero() {
        return 1.0;
    }
    if norm.is_euclidean() {
        let r = e.basis() - f.basis() * (f.basis().transpose() * e.basis());
        return linalg::min_singular(&r).min(1.0);
    }
    if let (Some(se), Some(sf)) = (scaled(norm, e), scaled(norm, f)) {
        return sin_minimal_angle(&se, &sf, &Norm::Euclidean);
    }
    if e.intersection(f).dim() > 0 {
        return 0.0;
    }
    // on G = E + F, sin theta = 1 / |pi_{E//F}|_G|
    let g = e.sum(f);
    let (p, m) = (e.dim(), f.dim());
    let mut cat = DMatrix::zeros(e.ambient_dim(), p + m);
    cat.columns_mut(0, p).copy_from(e.basis());
    cat.columns_mut(p, m).copy_from(f.basis());
    let pinv = cat.pseudo_inverse(1e-14).expect("pseudo-inverse");
    let proj = e.basis() * pinv.rows(0, p);
    let sup = sphere_sup(norm, g.basis(), |x| norm.eval(&(&proj * x)), &SearchOptions::default());
    (1.0 / sup.value).min(1.0)
}

/// Minimal angle from `E` to `F`, in `[0, pi/2]`.
pub fn minimal_angle(e: &Subspace, f: &Subspace, norm: &Norm) -> f64 {
    sin_minimal_angle(e, f, norm).clamp(0.0, 1.0).asin()
}

/// Matrix of the projection onto `E` along `F`.
pub fn oblique_projection(e: &Subspace, f: &Subspace) -> Result<DMatrix<f64>> {
    let d = e.ambient_dim();
    if e.dim() + f.dim() != d {
        return Err(Error::NotComplementary(format!("dimensions {} + {} != {d}", e.dim(), f.dim())));
    }
    let mut m = DMatrix::zeros(d, d);
    m.columns_mut(0, e.dim()).copy_from(e.basis());
    m.columns_mut(e.dim(), f.dim()).copy_from(f.basis());
    let s = linalg::singular_values(&m);
    if s[d - 1] < 1e-12 * s[0] {
        return Err(Error::NotComplementary("subspaces intersect".into()));
    }
    let inv = m.try_inverse().ok_or_else(|| Error::NotComplementary("singular".into()))?;
    Ok(e.basis() * inv.rows(0, e.dim()))
}

/// `|pi_{E//F}|`.
pub fn projection_norm(e: &Subspace, f: &Subspace, norm: &Norm) -> Result<f64> {
    Ok(operator_norm(&oblique_projection(e, f)?, norm))
}

/// Operator norm of `a` on the whole space.
pub fn operator_norm(a: &DMatrix<f64>, norm: &Norm) -> f64 {
    if let Some(v) = norm.operator_norm_closed(a) {
        return v;
    }
    restricted_norm(a, &Subspace::whole(a.ncols()), norm)
}

/// `|A|_E| = sup { |A v| : v in E, |v| = 1 }`.
pub fn restricted_norm(a: &DMatrix<f64>, e: &Subspace, norm: &Norm) -> f64 {
    restricted_norm_with(a, e, norm, &SearchOptions::default())
}

pub fn restricted_norm_with(a: &DMatrix<f64>, e: &Subspace, norm: &Norm, opts: &SearchOptions) -> f64 {
    if e.is_zero() {
        return 0.0;
    }
    if norm.is_euclidean() {
        return linalg::spectral_norm(&(a * e.basis()));
    }
    if let Some(w) = norm.scaling() {
        let se = Subspace::span_of(&scale_rows(e.basis(), &w));
        return restricted_norm(&conjugate_by_scaling(a, &w), &se, &Norm::Euclidean);
    }
    sphere_sup(norm, e.basis(), |x| norm.eval(&(a * x)), opts).value
}

/// `m(A|_E) = inf { |A v| : v in E, |v| = 1 }`.
pub fn min_norm(a: &DMatrix<f64>, e: &Subspace, norm: &Norm) -> f64 {
    min_norm_with(a, e, norm, &SearchOptions::default())
}

pub fn min_norm_with(a: &DMatrix<f64>, e: &Subspace, norm: &Norm, opts: &SearchOptions) -> f64 {
    if e.is_zero() {
        return f64::INFINITY;
    }
    if norm.is_euclidean() {
        return linalg::min_singular(&(a * e.basis()));
    }
    if let Some(w) = norm.scaling() {
        let se = Subspace::span_of(&scale_rows(e.basis(), &w));
        return min_norm(&conjugate_by_scaling(a, &w), &se, &Norm::Euclidean);
    }
    let Ok(ae) = e.image(a) else { return 0.0 };
    // m(A|_E) = 1 / sup over S_{AE} of |(A|_E)^{-1} w|
    let m = ae.basis().transpose() * a * e.basis();
    let Some(minv) = m.try_inverse() else { return 0.0 };
    let back = e.basis() * minv * ae.basis().transpose();
    let sup = sphere_sup(norm, ae.basis(), |w| norm.eval(&(&back * w)), opts).value;
    1.0 / sup
}

/// `det(A|E)` with the same norm on domain and range.
pub fn determinant(a: &DMatrix<f64>, e: &Subspace, norm: &Norm) -> f64 {
    determinant_between(a, e, norm, norm, VOLUME_SAMPLES)
}

/// `det(A|E) = m_{AE}(A B_E) / m_E(B_E)`, zero when `A|_E` is not injective.
pub fn determinant_between(a: &DMatrix<f64>, e: &Subspace, norm_in: &Norm, norm_out: &Norm, samples: usize) -> f64 {
    if e.is_zero() {
        return 1.0;
    }
    let ab = a * e.basis();
    let s = linalg::singular_values(&ab);
    if s[s.len() - 1] < RANK_TOL * s[0] || s[0] == 0.0 {
        return 0.0;
    }
    let euclid_det: f64 = s.iter().product();
    if norm_in.is_euclidean() && norm_out.is_euclidean() {
        return euclid_det;
    }
    let ae = Subspace::from_orthonormal(linalg::Svd::new(&ab).left(e.dim()));
    let vin = extremal::ball_volume(norm_in, e.basis(), samples);
    let vout = extremal::ball_volume(norm_out, ae.basis(), samples);
    euclid_det * vin / vout
}

/// Checks `Gap(E', E) <= q G / (1 - q G)` for `G = Gap(E, E') < 1/q`.
pub fn gap_asymmetry_bound(e: &Subspace, ep: &Subspace, q: usize, norm: &Norm) -> Result<BoundCheck> {
    let g = gap(e, ep, norm);
    let qf = q as f64;
    if !(g < 1.0 / qf) {
        return Err(Error::Precondition(format!("Gap = {g:.6} is not below 1/q = {:.6}", 1.0 / qf)));
    }
    Ok(BoundCheck::new(gap(ep, e, norm), qf * g / (1.0 - qf * g), 1e-9))
}

/// `Gap v Gap' <= d_H <= 2 (Gap v Gap')`.
pub fn hausdorff_sandwich(e: &Subspace, f: &Subspace, norm: &Norm) -> (BoundCheck, BoundCheck) {
    let g = gap(e, f, norm).max(gap(f, e, norm));
    let h = hausdorff(e, f, norm);
    (BoundCheck::new(g, h, 1e-9), BoundCheck::new(h, 2.0 * g, 1e-9))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetSplit {
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    /// Asserted only for inner-product norms, where the constant is 1.
    pub holds: Option<bool>,
}

/// `det(A|G+H) / (det(A|G) det(A|H))` against `sin theta(G',H')^l` and
/// `sin theta(G,H)^{-l}`, `l = dim G`.
pub fn det_split_bound(a: &DMatrix<f64>, g: &Subspace, h: &Subspace, norm: &Norm) -> Result<DetSplit> {
    let e = g.sum(h);
    if e.dim() != g.dim() + h.dim() {
        return Err(Error::Precondition("G and H intersect".into()));
    }
    let gp = g.image(a)?;
    let hp = h.image(a)?;
    e.image(a)?;
    let l = g.dim() as i32;
    let ratio = determinant(a, &e, norm) / (determinant(a, g, norm) * determinant(a, h, norm));
    let lower = sin_minimal_angle(&gp, &hp, norm).powi(l);
    let upper = sin_minimal_angle(g, h, norm).powi(-l);
    let holds = norm
        .is_hilbert()
        .then(|| BoundCheck::new(lower, ratio, 1e-9).holds && BoundCheck::new(ratio, upper, 1e-9).holds);
    Ok(DetSplit { ratio, lower, upper, holds })
}

/// For complements `E, F` and `d_H(E, E') < sin theta(E, F)`:
/// `|pi_{E'//F}| <= |pi_{E//F}| / (1 - |pi_{E//F}| d_H(E, E'))`.
pub fn open_condition(e: &Subspace, ep: &Subspace, f: &Subspace, norm: &Norm) -> Result<BoundCheck> {
    let p = projection_norm(e, f, norm)?;
    let dh = hausdorff(e, ep, norm);
    let s = sin_minimal_angle(e, f, norm);
    if !(dh < s) {
        return Err(Error::Precondition(format!("d_H = {dh:.6} >= sin theta = {s:.6}")));
    }
    let lhs = projection_norm(ep, f, norm)?;
    Ok(BoundCheck::new(lhs, p / (1.0 - p * dh), 1e-9))
}

/// For complements `E, F` and `E'` of the same dimension `q` as `E`:
/// `d_H(E', E) <= 4 q |pi_{F//E}|_{E'}|`.
pub fn gap_estimate(e: &Subspace, ep: &Subspace, f: &Subspace, norm: &Norm) -> Result<BoundCheck> {
    if e.dim() != ep.dim() {
        return Err(Error::Precondition("E and E' differ in dimension".into()));
    }
    let pf = oblique_projection(f, e)?;
    let r = restricted_norm(&pf, ep, norm);
    Ok(BoundCheck::new(hausdorff(ep, e, norm), 4.0 * e.dim() as f64 * r, 1e-9))
}

/// Builds a complement `F` of `E` with `|pi_{E//F}| <= sqrt(dim E)` and
/// returns it with the achieved projection norm.
///
/// Inner-product norms use the orthogonal complement (norm 1). For a line the
/// kernel of a norming functional also gives norm 1. Otherwise the projection
/// norm is minimized over complements, starting from the orthogonal one.
pub fn complement_with_bound(e: &Subspace, norm: &Norm) -> Result<(Subspace, BoundCheck)> {
    let q = e.dim();
    let d = e.ambient_dim();
    let bound = (q as f64).sqrt();
    let f = if norm.is_euclidean() {
        e.orth_complement()
    } else if let Some(w) = norm.scaling() {
        let wwb = scale_rows(&scale_rows(e.basis(), &w), &w);
        Subspace::from_orthonormal(linalg::null_space(&wwb.transpose(), RANK_TOL))
    } else if q == 1 {
        let x = e.basis().column(0).into_owned();
        let l = norm.norming_functional(&x);
        Subspace::from_orthonormal(linalg::null_space(&DMatrix::from_row_slice(1, d, l.as_slice()), RANK_TOL))
    } else {
        let obj = |y: &DMatrix<f64>| {
            projection_norm(e, &Subspace::from_orthonormal(y.clone()), norm).unwrap_or(f64::INFINITY)
        };
        let warm = [e.orth_complement().basis().clone()];
        let opts = SearchOptions { starts: 16, ..SearchOptions::default() };
        let (_, y) = extremal::grassmann_optimize(d, d - q, &obj, Sense::Min, &opts, &warm);
        Subspace::from_orthonormal(y)
    };
    let p = projection_norm(e, &f, norm)?;
    Ok((f, BoundCheck::new(p, bound, 1e-9)))
}

/// `|pi_{E//F}| * sin theta(E, F)`, which equals 1 for complements.
pub fn angle_projection_identity(e: &Subspace, f: &Subspace, norm: &Norm) -> Result<f64> {
    Ok(projection_norm(e, f, norm)? * sin_minimal_angle(e, f, norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn line(v: &[f64]) -> Subspace {
        Subspace::line(v).unwrap()
    }

    #[test]
    fn sup_norm_gap_and_hausdorff_in_the_plane() {
        let e = line(&[1.0, 0.0]);
        let f = line(&[1.0, 1.0]);
        let n = Norm::linf();
        assert_abs_diff_eq!(gap(&e, &f, &n), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(hausdorff(&e, &f, &n), 1.0, epsilon = 1e-12);
        let (lo, hi) = hausdorff_sandwich(&e, &f, &n);
        assert!(lo.holds && hi.holds);
    }

    #[test]
    fn euclidean_lines_at_known_angle() {
        let t = 0.3f64;
        let e = line(&[1.0, 0.0, 0.0]);
        let f = line(&[t.cos(), t.sin(), 0.0]);
        assert_abs_diff_eq!(gap(&e, &f, &Norm::Euclidean), t.sin(), epsilon = 1e-14);
        assert_abs_diff_eq!(hausdorff(&e, &f, &Norm::Euclidean), t.sin(), epsilon = 1e-14);
        assert_abs_diff_eq!(minimal_angle(&e, &f, &Norm::Euclidean), t, epsilon = 1e-12);
    }

    #[test]
    fn projection_along_a_diagonal() {
        let e = line(&[1.0, 0.0]);
        let f = line(&[1.0, 1.0]);
        let p = oblique_projection(&e, &f).unwrap();
        // v = a e1 + b (1,1): P(x, y) = (x - y, 0)
        assert_abs_diff_eq!(p[(0, 0)], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p[(0, 1)], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(projection_norm(&e, &f, &Norm::Euclidean).unwrap(), 2f64.sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(angle_projection_identity(&e, &f, &Norm::Euclidean).unwrap(), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(angle_projection_identity(&e, &f, &Norm::linf()).unwrap(), 1.0, epsilon = 1e-12);
        assert!(oblique_projection(&e, &e).is_err());
    }

    #[test]
    fn determinants() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        assert_abs_diff_eq!(determinant(&a, &Subspace::whole(2), &Norm::Euclidean), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(determinant(&a, &Subspace::whole(2), &Norm::linf()), 2.0, epsilon = 1e-12);
        // on a line the determinant is the stretch factor in the norm
        let e = line(&[1.0, 1.0]);
        let n = Norm::l1();
        assert_abs_diff_eq!(determinant(&a, &e, &n), 4.0 / 2.0, epsilon = 1e-12);
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(determinant(&singular, &Subspace::whole(2), &Norm::Euclidean), 0.0);
    }

    #[test]
    fn min_norm_in_sup_norm() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        // m(A) = 1/|A^{-1}|_inf, A^{-1} = [[.5,-.5],[0,1]]
        assert_abs_diff_eq!(min_norm(&a, &Subspace::whole(2), &Norm::linf()), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn gap_asymmetry_example() {
        let e = line(&[1.0, 0.0, 0.0]);
        let s = 0.2f64;
        let ep = line(&[(1.0 - s * s).sqrt(), s, 0.0]);
        let c = gap_asymmetry_bound(&e, &ep, 1, &Norm::Euclidean).unwrap();
        assert_abs_diff_eq!(c.rhs, 0.25, epsilon = 1e-12);
        assert!(c.holds);
        let far = line(&[0.0, 1.0, 0.0]);
        assert!(gap_asymmetry_bound(&e, &far, 1, &Norm::Euclidean).is_err());
    }

    #[test]
    fn complements_with_small_projection() {
        let e = Subspace::from_columns(&DMatrix::from_column_slice(3, 2, &[1.0, 1.0, 0.0, 0.0, 1.0, 1.0])).unwrap();
        for n in [Norm::Euclidean, Norm::linf(), Norm::l1(), Norm::Weighted(vec![1.0, 2.0, 3.0])] {
            let (f, c) = complement_with_bound(&e, &n).unwrap();
            assert_eq!(f.dim(), 1);
            assert!(c.holds, "{n}: {c:?}");
        }
    }
}
