//! Norms on `R^d`: Euclidean, `l^p` for `1 <= p <= inf`, and weighted
//! Euclidean `|v| = sqrt(sum w_i v_i^2)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Norm {
    Euclidean,
    /// `p` in `[1, inf]`; `Lp(2.0)` is normalized to `Euclidean`.
    Lp(f64),
    Weighted(Vec<f64>),
}

impl Norm {
    pub fn lp(p: f64) -> Result<Norm> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidNorm(format!("p = {p} must be >= 1")));
        }
        Ok(if p == 2.0 { Norm::Euclidean } else { Norm::Lp(p) })
    }

    pub fn l1() -> Norm {
        Norm::Lp(1.0)
    }

    pub fn linf() -> Norm {
        Norm::Lp(f64::INFINITY)
    }

    pub fn weighted(w: Vec<f64>) -> Result<Norm> {
        if w.is_empty() || w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidNorm("weights must be positive and finite".into()));
        }
        Ok(Norm::Weighted(w))
    }

    /// Checks that the norm is usable on `R^d`.
    pub fn check_dim(&self, d: usize) -> Result<()> {
        match self {
            Norm::Weighted(w) if w.len() != d => {
                Err(Error::Dimension(format!("weighted norm has {} weights, ambient dimension is {d}", w.len())))
            }
            Norm::Lp(p) if p.is_nan() || *p < 1.0 => Err(Error::InvalidNorm(format!("p = {p}"))),
            _ => Ok(()),
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, Norm::Euclidean) || matches!(self, Norm::Lp(p) if *p == 2.0)
    }

    /// Inner-product norms: Euclidean and weighted.
    pub fn is_hilbert(&self) -> bool {
        self.is_euclidean() || matches!(self, Norm::Weighted(_))
    }

    /// `l^1` and `l^inf`, whose unit balls are polytopes.
    pub fn is_polytope(&self) -> bool {
        matches!(self, Norm::Lp(p) if *p == 1.0 || p.is_infinite())
    }

    /// `W = diag(sqrt(w))` for a weighted norm, so that `|v| = |W v|_2`.
    pub fn scaling(&self) -> Option<DVector<f64>> {
        match self {
            Norm::Weighted(w) => Some(DVector::from_iterator(w.len(), w.iter().map(|x| x.sqrt()))),
            _ => None,
        }
    }

    pub fn eval(&self, v: &DVector<f64>) -> f64 {
        match self {
            Norm::Euclidean => v.norm(),
            Norm::Lp(p) => lp_norm(v.as_slice(), *p),
            Norm::Weighted(w) => v.iter().zip(w).map(|(x, w)| w * x * x).sum::<f64>().sqrt(),
        }
    }

    /// Dual norm of a functional given by its coefficient vector.
    pub fn dual(&self, l: &DVector<f64>) -> f64 {
        match self {
            Norm::Euclidean => l.norm(),
            Norm::Lp(p) => lp_norm(l.as_slice(), conjugate(*p)),
            Norm::Weighted(w) => l.iter().zip(w).map(|(x, w)| x * x / w).sum::<f64>().sqrt(),
        }
    }

    /// A functional `l` with `l(y) = |y|` and dual norm 1.
    ///
    /// For `l^1` zero coordinates get coefficient 0; for `l^inf` the first
    /// coordinate of maximal modulus is used.
    pub fn norming_functional(&self, y: &DVector<f64>) -> DVector<f64> {
        let n = self.eval(y);
        let d = y.len();
        if n == 0.0 {
            let mut l = DVector::zeros(d);
            if d > 0 {
                l[0] = 1.0 / self.dual(&DVector::from_fn(d, |i, _| if i == 0 { 1.0 } else { 0.0 }));
            }
            return l;
        }
        match self {
            Norm::Euclidean => y / n,
            Norm::Weighted(w) => DVector::from_fn(d, |i, _| w[i] * y[i] / n),
            Norm::Lp(p) if *p == 1.0 => y.map(|x| if x == 0.0 { 0.0 } else { x.signum() }),
            Norm::Lp(p) if p.is_infinite() => {
                let j = y.iamax();
                DVector::from_fn(d, |i, _| if i == j { y[j].signum() } else { 0.0 })
            }
            Norm::Lp(p) => {
                let u = y / n;
                u.map(|x| x.signum() * x.abs().powf(p - 1.0))
            }
        }
    }

    /// `R` with `|x|_2 <= R |x|` on `R^d`.
    pub fn euclidean_bound(&self, d: usize) -> f64 {
        match self {
            Norm::Euclidean => 1.0,
            Norm::Lp(p) if *p <= 2.0 => 1.0,
            Norm::Lp(p) if p.is_infinite() => (d as f64).sqrt(),
            Norm::Lp(p) => (d as f64).powf(0.5 - 1.0 / p),
            Norm::Weighted(w) => 1.0 / w.iter().cloned().fold(f64::INFINITY, f64::min).sqrt(),
        }
    }

    /// Operator norm of `a` from `self` to `self` on the whole space, when a
    /// closed form exists.
    pub fn operator_norm_closed(&self, a: &DMatrix<f64>) -> Option<f64> {
        match self {
            Norm::Euclidean => Some(crate::linalg::spectral_norm(a)),
            Norm::Lp(p) if *p == 1.0 => Some((0..a.ncols()).map(|j| a.column(j).abs().sum()).fold(0.0, f64::max)),
            Norm::Lp(p) if p.is_infinite() => Some((0..a.nrows()).map(|i| a.row(i).abs().sum()).fold(0.0, f64::max)),
            Norm::Weighted(_) => {
                let w = self.scaling()?;
                Some(crate::linalg::spectral_norm(&conjugate_by_scaling(a, &w)))
            }
            _ => None,
        }
    }
}

/// `W A W^{-1}` for `W = diag(w)`.
pub fn conjugate_by_scaling(a: &DMatrix<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| w[i] * a[(i, j)] / w[j])
}

/// `diag(w) * m`.
pub fn scale_rows(m: &DMatrix<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| w[i] * m[(i, j)])
}

pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

pub fn lp_norm(v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return v.iter().fold(0.0, |m, x| m.max(x.abs()));
    }
    if p == 1.0 {
        return v.iter().map(|x| x.abs()).sum();
    }
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|x| (x.abs() / scale).powf(p)).sum::<f64>().powf(1.0 / p)
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Euclidean => write!(f, "euclidean"),
            Norm::Lp(p) if *p == 1.0 => write!(f, "l1"),
            Norm::Lp(p) if p.is_infinite() => write!(f, "linf"),
            Norm::Lp(p) => write!(f, "lp:{p}"),
            Norm::Weighted(w) => {
                let parts: Vec<String> = w.iter().map(|x| x.to_string()).collect();
                write!(f, "weighted:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for Norm {
    type Err = Error;

    /// Accepts `euclidean`, `l2`, `l1`, `linf`, `lp:<p>`, `weighted:<w1>,<w2>,...`.
    fn from_str(s: &str) -> Result<Norm> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "euclidean" | "l2" => return Ok(Norm::Euclidean),
            "l1" => return Ok(Norm::l1()),
            "linf" | "lmax" | "sup" => return Ok(Norm::linf()),
            _ => {}
        }
        if let Some(p) = s.strip_prefix("lp:") {
            let p = if p == "inf" {
                f64::INFINITY
            } else {
                p.parse::<f64>().map_err(|e| Error::InvalidNorm(format!("{s}: {e}")))?
            };
            return Norm::lp(p);
        }
        if let Some(w) = s.strip_prefix("weighted:") {
            let w = w
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidNorm(format!("{s}: {e}")))?;
            return Norm::weighted(w);
        }
        Err(Error::InvalidNorm(format!("unknown norm `{s}`")))
    }
}

impl TryFrom<String> for Norm {
    type Error = Error;
    fn try_from(s: String) -> Result<Norm> {
        s.parse()
    }
}

impl From<Norm> for String {
    fn from(n: Norm) -> String {
        n.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn evaluates_standard_norms() {
        let x = v(&[3.0, -4.0]);
        assert_eq!(Norm::Euclidean.eval(&x), 5.0);
        assert_eq!(Norm::l1().eval(&x), 7.0);
        assert_eq!(Norm::linf().eval(&x), 4.0);
        assert_relative_eq!(Norm::Lp(3.0).eval(&x), (27.0f64 + 64.0).powf(1.0 / 3.0), epsilon = 1e-14);
        assert_relative_eq!(Norm::Weighted(vec![1.0, 4.0]).eval(&x), (9.0f64 + 64.0).sqrt());
    }

    #[test]
    fn norming_functionals_attain_and_have_unit_dual() {
        let y = v(&[0.5, -2.0, 1.0]);
        for n in [Norm::Euclidean, Norm::l1(), Norm::linf(), Norm::Lp(3.0), Norm::Weighted(vec![1.0, 2.0, 0.5])] {
            let l = n.norming_functional(&y);
            assert_relative_eq!(l.dot(&y), n.eval(&y), epsilon = 1e-12);
            assert_relative_eq!(n.dual(&l), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn round_trips_through_strings() {
        for n in [Norm::Euclidean, Norm::l1(), Norm::linf(), Norm::Lp(3.5), Norm::Weighted(vec![1.0, 2.5])] {
            let s = n.to_string();
            assert_eq!(s.parse::<Norm>().unwrap(), n);
        }
        assert!("lp:0.5".parse::<Norm>().is_err());
        assert_eq!("lp:2".parse::<Norm>().unwrap(), Norm::Euclidean);
    }

    #[test]
    fn closed_form_operator_norms() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        assert_eq!(Norm::linf().operator_norm_closed(&a), Some(3.0));
        assert_eq!(Norm::l1().operator_norm_closed(&a), Some(2.0));
    }
}
