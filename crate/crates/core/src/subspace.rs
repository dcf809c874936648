//! Linear subspaces of `R^d`, stored by a Euclidean-orthonormal basis.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, Svd};

/// Relative tolerance used for rank decisions.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Span of the columns of `m`; fails if they are linearly dependent.
    pub fn from_columns(m: &DMatrix<f64>) -> Result<Subspace> {
        let q = linalg::range_basis(m, RANK_TOL);
        if q.ncols() != m.ncols() {
            return Err(Error::Dimension(format!("columns have rank {} < {}", q.ncols(), m.ncols())));
        }
        Ok(Subspace { basis: q })
    }

    /// Span of the columns of `m`, whatever its rank.
    pub fn span_of(m: &DMatrix<f64>) -> Subspace {
        Subspace { basis: linalg::range_basis(m, RANK_TOL) }
    }

    pub fn from_vectors(vs: &[DVector<f64>]) -> Result<Subspace> {
        if vs.is_empty() {
            return Err(Error::Dimension("no vectors".into()));
        }
        Subspace::from_columns(&DMatrix::from_columns(vs))
    }

    pub fn line(v: &[f64]) -> Result<Subspace> {
        Subspace::from_columns(&DMatrix::from_column_slice(v.len(), 1, v))
    }

    /// Wraps columns that are already orthonormal.
    pub fn from_orthonormal(q: DMatrix<f64>) -> Subspace {
        Subspace { basis: q }
    }

    /// `span(e_i : i in idx)`.
    pub fn coordinate(d: usize, idx: &[usize]) -> Subspace {
        let mut q = DMatrix::zeros(d, idx.len());
        for (j, &i) in idx.iter().enumerate() {
            q[(i, j)] = 1.0;
        }
        Subspace { basis: q }
    }

    pub fn whole(d: usize) -> Subspace {
        Subspace { basis: DMatrix::identity(d, d) }
    }

    pub fn zero(d: usize) -> Subspace {
        Subspace { basis: DMatrix::zeros(d, 0) }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    pub fn orth_complement(&self) -> Subspace {
        Subspace { basis: linalg::orth_complement(&self.basis) }
    }

    /// `A E`; fails when `A` is not injective on `E`.
    pub fn image(&self, a: &DMatrix<f64>) -> Result<Subspace> {
        if self.is_zero() {
            return Ok(Subspace::zero(a.nrows()));
        }
        let ab = a * &self.basis;
        let s = linalg::singular_values(&ab);
        let ratio = s[s.len() - 1] / s[0].max(f64::MIN_POSITIVE);
        if !(ratio > RANK_TOL) {
            return Err(Error::NotInjective { ratio });
        }
        Ok(Subspace { basis: Svd::new(&ab).left(self.dim()) })
    }

    /// `{v : A v in target}`.
    pub fn preimage(a: &DMatrix<f64>, target: &Subspace) -> Subspace {
        let perp = target.orth_complement();
        if perp.is_zero() {
            return Subspace::whole(a.ncols());
        }
        Subspace { basis: linalg::null_space(&(perp.basis.transpose() * a), RANK_TOL) }
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        let d = self.ambient_dim();
        if self.is_zero() || other.is_zero() {
            return Subspace::zero(d);
        }
        let p = self.dim();
        let mut m = DMatrix::zeros(d, p + other.dim());
        m.columns_mut(0, p).copy_from(&self.basis);
        m.columns_mut(p, other.dim()).copy_from(&(-&other.basis));
        let n = linalg::null_space(&m, 1e-10);
        if n.ncols() == 0 {
            return Subspace::zero(d);
        }
        let coeff = n.rows(0, p).into_owned();
        Subspace::span_of(&(&self.basis * coeff))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let d = self.ambient_dim();
        let mut m = DMatrix::zeros(d, self.dim() + other.dim());
        m.columns_mut(0, self.dim()).copy_from(&self.basis);
        m.columns_mut(self.dim(), other.dim()).copy_from(&other.basis);
        Subspace::span_of(&m)
    }

    /// Euclidean distance from `v` to the subspace, relative to `|v|`.
    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        let r = v - &self.basis * (self.basis.transpose() * v);
        r.norm() <= tol * v.norm().max(f64::MIN_POSITIVE)
    }

    /// Maps the subspace by an invertible change of coordinates.
    pub fn transform(&self, m: &DMatrix<f64>) -> Subspace {
        Subspace::span_of(&(m * &self.basis))
    }

    /// Columns as plain vectors, for serialization.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|j| self.basis.column(j).iter().copied().collect()).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct SubspaceRepr {
    ambient_dim: usize,
    basis: Vec<Vec<f64>>,
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubspaceRepr { ambient_dim: self.ambient_dim(), basis: self.columns() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Subspace, D::Error> {
        let r = SubspaceRepr::deserialize(de)?;
        let d = r.ambient_dim;
        if r.basis.iter().any(|c| c.len() != d) {
            return Err(serde::de::Error::custom("basis column length differs from ambient_dim"));
        }
        let cols: Vec<f64> = r.basis.into_iter().flatten().collect();
        let k = cols.len().checked_div(d).unwrap_or(0);
        Ok(Subspace { basis: DMatrix::from_column_slice(d, k, &cols) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_dependent_columns() {
        let m = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        assert!(Subspace::from_columns(&m).is_err());
    }

    #[test]
    fn intersection_of_planes_in_r3() {
        let a = Subspace::coordinate(3, &[0, 1]);
        let b = Subspace::coordinate(3, &[1, 2]);
        let c = a.intersection(&b);
        assert_eq!(c.dim(), 1);
        assert!(c.contains(&DVector::from_column_slice(&[0.0, 1.0, 0.0]), 1e-12));
    }

    #[test]
    fn preimage_and_image() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        let g = Subspace::preimage(&a, &Subspace::coordinate(2, &[1]));
        assert!(g.contains(&DVector::from_column_slice(&[1.0, -2.0]), 1e-12));
        let img = Subspace::coordinate(2, &[0]).image(&a).unwrap();
        assert!(img.contains(&DVector::from_column_slice(&[1.0, 0.0]), 1e-12));
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(Subspace::coordinate(2, &[1]).image(&singular).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let s = Subspace::line(&[1.0, 2.0, 2.0]).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        let back: Subspace = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }
}
