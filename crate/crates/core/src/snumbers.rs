//! Gelfand numbers `c_q`, Kolmogorov numbers `x_q` and maximal volume growth
//! `V_q`. In inner-product norms all of them come from singular values; in
//! other norms they are computed by searching the Grassmannian.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::{grassmann_optimize, Method, SearchOptions, Sense};
use crate::geometry::{self, VOLUME_SAMPLES};
use crate::linalg::{self, Svd};
use crate::norms::{conjugate_by_scaling, Norm};
use crate::subspace::Subspace;

/// Largest dimension for the singular-value paths.
pub const EUCLIDEAN_CAP: usize = 16;
/// Largest dimension for the search-based oracles.
pub const GENERAL_CAP: usize = 6;

/// Ball-volume samples per determinant evaluation inside a search.
const SEARCH_VOLUME_SAMPLES: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SNumber {
    pub q: usize,
    pub value: f64,
    /// Subspace realizing the value: the codimension `q-1` subspace for
    /// `c_q`, the `q`-dimensional one for `x_q` and `V_q`.
    pub certificate: Subspace,
    pub method: Method,
    pub tolerance: f64,
    pub seed: u64,
}

fn check(a: &DMatrix<f64>, q: usize, norm: &Norm) -> Result<usize> {
    let d = a.nrows();
    if a.ncols() != d {
        return Err(Error::Dimension(format!("operator must be square, got {}x{}", d, a.ncols())));
    }
    if q == 0 || q > d {
        return Err(Error::Dimension(format!("q = {q} outside 1..={d}")));
    }
    norm.check_dim(d)?;
    let cap = if norm.is_hilbert() { EUCLIDEAN_CAP } else { GENERAL_CAP };
    if d > cap {
        return Err(Error::DimensionCap { what: "s-number oracle", dim: d, cap });
    }
    Ok(d)
}

fn closed(q: usize, value: f64, certificate: Subspace) -> SNumber {
    SNumber { q, value, certificate, method: Method::ClosedForm, tolerance: 0.0, seed: 0 }
}

/// In a weighted norm, work with `W A W^{-1}` and map certificates back.
fn via_scaling(a: &DMatrix<f64>, norm: &Norm, f: impl Fn(&DMatrix<f64>) -> Result<SNumber>) -> Option<Result<SNumber>> {
    let w = norm.scaling()?;
    let winv = DMatrix::from_diagonal(&w.map(|x| 1.0 / x));
    Some(f(&conjugate_by_scaling(a, &w)).map(|mut s| {
        s.certificate = s.certificate.transform(&winv);
        s
    }))
}

/// `c_q(A) = inf { |A|_F| : codim F = q - 1 }`.
pub fn gelfand(a: &DMatrix<f64>, q: usize, norm: &Norm, opts: &SearchOptions) -> Result<SNumber> {
    let d = check(a, q, norm)?;
    if norm.is_euclidean() {
        let svd = Svd::new(a);
        let f = Subspace::from_orthonormal(svd.v.columns(q - 1, d - q + 1).into_owned());
        return Ok(closed(q, svd.s[q - 1], f));
    }
    if let Some(r) = via_scaling(a, norm, |b| gelfand(b, q, &Norm::Euclidean, opts)) {
        return r;
    }
    if q == 1 {
        return Ok(closed(1, geometry::operator_norm(a, norm), Subspace::whole(d)));
    }
    gelfand_search(a, q, norm, opts)
}

/// The Grassmannian search behind [`gelfand`], usable for any norm.
pub fn gelfand_search(a: &DMatrix<f64>, q: usize, norm: &Norm, opts: &SearchOptions) -> Result<SNumber> {
    let d = check(a, q, norm)?;
    let inner = opts.inner();
    let obj =
        |y: &DMatrix<f64>| geometry::restricted_norm_with(a, &Subspace::from_orthonormal(y.clone()), norm, &inner);
    let warm = Svd::new(a).v.columns(q - 1, d - q + 1).into_owned();
    let (value, y) = grassmann_optimize(d, d - q + 1, &obj, Sense::Min, opts, &[warm]);
    Ok(SNumber {
        q,
        value,
        certificate: Subspace::from_orthonormal(y),
        method: Method::MultiStart,
        tolerance: opts.tol,
        seed: opts.seed,
    })
}

/// `x_q(A) = sup { m(A|_W) : dim W = q }`.
pub fn kolmogorov(a: &DMatrix<f64>, q: usize, norm: &Norm, opts: &SearchOptions) -> Result<SNumber> {
    let d = check(a, q, norm)?;
    if norm.is_euclidean() {
        let svd = Svd::new(a);
        return Ok(closed(q, svd.s[q - 1], Subspace::from_orthonormal(svd.right(q))));
    }
    if let Some(r) = via_scaling(a, norm, |b| kolmogorov(b, q, &Norm::Euclidean, opts)) {
        return r;
    }
    if q == d {
        return Ok(closed(q, geometry::min_norm(a, &Subspace::whole(d), norm), Subspace::whole(d)));
    }
    kolmogorov_search(a, q, norm, opts)
}

pub fn kolmogorov_search(a: &DMatrix<f64>, q: usize, norm: &Norm, opts: &SearchOptions) -> Result<SNumber> {
    let d = check(a, q, norm)?;
    let inner = opts.inner();
    let obj = |y: &DMatrix<f64>| geometry::min_norm_with(a, &Subspace::from_orthonormal(y.clone()), norm, &inner);
    let warm = Svd::new(a).right(q);
    let (value, y) = grassmann_optimize(d, q, &obj, Sense::Max, opts, &[warm]);
    Ok(SNumber {
        q,
        value,
        certificate: Subspace::from_orthonormal(y),
        method: Method::MultiStart,
        tolerance: opts.tol,
        seed: opts.seed,
    })
}

/// `V_q(A) = sup { det(A|E) : dim E = q }`.
pub fn volume_growth(a: &DMatrix<f64>, q: usize, norm: &Norm, opts: &SearchOptions) -> Result<SNumber> {
    let d = check(a, q, norm)?;
    if norm.is_euclidean() {
        let svd = Svd::new(a);
        let v = svd.s.iter().take(q).product();
        return Ok(closed(q, v, Subspace::from_orthonormal(svd.right(q))));
    }
    if let Some(r) = via_scaling(a, norm, |b| volume_growth(b, q, &Norm::Euclidean, opts)) {
        return r;
    }
    if q == d {
        // the ball volumes of domain and range coincide
        return Ok(closed(q, a.determinant().abs(), Subspace::whole(d)));
    }
    if q == 1 {
        let top = crate::extremal::sphere_sup(norm, &DMatrix::identity(d, d), |x| norm.eval(&(a * x)), opts);
        return Ok(SNumber {
            q,
            value: top.value,
            certificate: Subspace::line(top.point.as_slice())?,
            method: top.method,
            tolerance: if top.method == Method::Enumeration { 0.0 } else { opts.tol },
            seed: opts.seed,
        });
    }
    let obj = |y: &DMatrix<f64>| {
        geometry::determinant_between(a, &Subspace::from_orthonormal(y.clone()), norm, norm, SEARCH_VOLUME_SAMPLES)
    };
    let warm = Svd::new(a).right(q);
    let (_, y) = grassmann_optimize(d, q, &obj, Sense::Max, opts, &[warm]);
    let e = Subspace::from_orthonormal(y);
    let value = geometry::determinant_between(a, &e, norm, norm, VOLUME_SAMPLES);
    Ok(SNumber { q, value, certificate: e, method: Method::MultiStart, tolerance: opts.tol, seed: opts.seed })
}

/// `V_q / (c_q V_{q-1})`, which stays within constants depending on `q` and
/// the norm; it is exactly 1 in inner-product norms.
pub fn gelfand_volume_ratio(a: &DMatrix<f64>, q: usize, norm: &Norm, opts: &SearchOptions) -> Result<f64> {
    let vq = volume_growth(a, q, norm, opts)?.value;
    let vprev = if q == 1 { 1.0 } else { volume_growth(a, q - 1, norm, opts)?.value };
    let c = gelfand(a, q, norm, opts)?.value;
    Ok(vq / (c * vprev))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub gelfand: Vec<f64>,
    pub kolmogorov: Vec<f64>,
    pub volume: Vec<f64>,
}

/// `c_q`, `x_q`, `V_q` for `q = 1..=d`.
pub fn profile(a: &DMatrix<f64>, norm: &Norm, opts: &SearchOptions) -> Result<Profile> {
    let d = a.nrows();
    let mut p = Profile { gelfand: vec![], kolmogorov: vec![], volume: vec![] };
    for q in 1..=d {
        p.gelfand.push(gelfand(a, q, norm, opts)?.value);
        p.kolmogorov.push(kolmogorov(a, q, norm, opts)?.value);
        p.volume.push(volume_growth(a, q, norm, opts)?.value);
    }
    Ok(p)
}

/// Largest deviation of `c_q`, `x_q` from `sigma_q` and of `V_q` from
/// `sigma_1 ... sigma_q`, relative to `sigma_1`, in the Euclidean norm.
pub fn euclidean_collapse_error(a: &DMatrix<f64>) -> Result<f64> {
    let s = linalg::singular_values(a);
    let p = profile(a, &Norm::Euclidean, &SearchOptions::default())?;
    let scale = s[0].max(f64::MIN_POSITIVE);
    let mut err = 0.0f64;
    let mut prod = 1.0;
    for q in 0..s.len() {
        prod *= s[q];
        err = err.max((p.gelfand[q] - s[q]).abs() / scale);
        err = err.max((p.kolmogorov[q] - s[q]).abs() / scale);
        err = err.max((p.volume[q] - prod).abs() / prod.max(f64::MIN_POSITIVE));
    }
    Ok(err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn diagonal_in_euclidean_norm() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&[3.0, 2.0, 1.0]));
        let opts = SearchOptions::default();
        assert_eq!(gelfand(&a, 2, &Norm::Euclidean, &opts).unwrap().value, 2.0);
        assert_eq!(kolmogorov(&a, 3, &Norm::Euclidean, &opts).unwrap().value, 1.0);
        assert_abs_diff_eq!(volume_growth(&a, 2, &Norm::Euclidean, &opts).unwrap().value, 6.0, epsilon = 1e-13);
        assert!(euclidean_collapse_error(&a).unwrap() < 1e-12);
    }

    #[test]
    fn sup_norm_upper_triangular() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        let n = Norm::linf();
        let opts = SearchOptions::default();
        assert_abs_diff_eq!(gelfand(&a, 1, &n, &opts).unwrap().value, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(volume_growth(&a, 2, &n, &opts).unwrap().value, 2.0, epsilon = 1e-12);
        // c_2 = inf over lines of the stretch; the line (1,-1) is stretched by 1
        let c2 = gelfand(&a, 2, &n, &opts).unwrap();
        assert_abs_diff_eq!(c2.value, 1.0, epsilon = 1e-7);
        assert_eq!(c2.certificate.dim(), 1);
        assert!(gelfand(&a, 3, &n, &opts).is_err());
    }

    #[test]
    fn weighted_norm_matches_conjugated_svd() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.5, 1.0]);
        let n = Norm::Weighted(vec![1.0, 4.0]);
        let w = n.scaling().unwrap();
        let s = linalg::singular_values(&conjugate_by_scaling(&a, &w));
        let c2 = gelfand(&a, 2, &n, &SearchOptions::default()).unwrap();
        assert_abs_diff_eq!(c2.value, s[1], epsilon = 1e-13);
        // the certificate line is stretched by exactly c_2 in the weighted norm
        let f = &c2.certificate;
        assert_abs_diff_eq!(geometry::restricted_norm(&a, f, &n), s[1], epsilon = 1e-12);
    }

    #[test]
    fn caps_are_enforced() {
        let a = DMatrix::<f64>::identity(7, 7);
        assert!(matches!(gelfand(&a, 2, &Norm::linf(), &SearchOptions::default()), Err(Error::DimensionCap { .. })));
    }
}
