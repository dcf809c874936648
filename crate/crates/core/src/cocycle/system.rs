//! Cocycles `A^n_x` over a base system and their stabilized products.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::base::{BaseSystem, Point};
use crate::error::{Error, Result};
use crate::linalg::{self, Svd};
use crate::norms::{conjugate_by_scaling, Norm};
use crate::subspace::Subspace;

/// `x -> A_x`, safe to call from several threads.
pub type Generator = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Generators with a smaller singular value are rejected as non-injective.
pub const INJECTIVITY_FLOOR: f64 = 1e-12;

/// Default bound on `|n|` for orbit products. Products are stabilized, but
/// the distances we extract from them stop carrying information long before.
pub const DEFAULT_HORIZON: usize = 400;

/// `e^L Q R` with `Q` orthogonal and `R` upper triangular, normalized so
/// that `max |R_ij| = 1`.
///
/// New factors are applied on the left as `A Q = Q' R'`, `R <- R' R`; the
/// triangular factor stays row-graded, so its small singular values keep
/// their relative accuracy.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilizedProduct {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    log_scale: f64,
}

impl StabilizedProduct {
    pub fn identity(d: usize) -> StabilizedProduct {
        StabilizedProduct { q: DMatrix::identity(d, d), r: DMatrix::identity(d, d), log_scale: 0.0 }
    }

    /// `self <- a * self`.
    pub fn push(&mut self, a: &DMatrix<f64>) {
        let qr = (a * &self.q).qr();
        let (q, r) = qr.unpack();
        self.q = q;
        self.r = r * &self.r;
        let s = self.r.amax();
        if s > 0.0 && s.is_finite() {
            self.r /= s;
            self.log_scale += s.ln();
        }
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    /// `Q R`, the product divided by `e^L`.
    pub fn scaled(&self) -> DMatrix<f64> {
        &self.q * &self.r
    }

    /// The product itself; overflows for long dominated orbits.
    pub fn matrix(&self) -> DMatrix<f64> {
        self.scaled() * self.log_scale.exp()
    }

    /// `ln sigma_i`, descending.
    pub fn log_singular_values(&self) -> Vec<f64> {
        linalg::singular_values(&self.r).iter().map(|s| self.log_scale + s.ln()).collect()
    }

    pub fn singular_values(&self) -> Vec<f64> {
        self.log_singular_values().into_iter().map(f64::exp).collect()
    }

    /// Span of the top `k` left singular vectors.
    pub fn top_left(&self, k: usize) -> Subspace {
        let svd = Svd::new(&self.r);
        Subspace::from_orthonormal(&self.q * svd.left(k))
    }

    /// `ln` of the singular values of the product restricted to `e`,
    /// descending. Euclidean norms only.
    pub fn log_restricted(&self, e: &Subspace) -> Vec<f64> {
        linalg::singular_values(&(&self.r * e.basis())).iter().map(|s| self.log_scale + s.ln()).collect()
    }

    /// The same product in the coordinates `x -> W x`, i.e. `W P W^{-1}`.
    pub fn conjugated(&self, w: &DVector<f64>) -> StabilizedProduct {
        let mut p = StabilizedProduct { q: self.q.clone(), r: self.r.clone(), log_scale: self.log_scale };
        p.push(&DMatrix::from_diagonal(w));
        for (j, mut col) in p.r.column_iter_mut().enumerate() {
            col /= w[j];
        }
        let s = p.r.amax();
        p.r /= s;
        p.log_scale += s.ln();
        p
    }
}

/// A cocycle of injective linear maps over an invertible base.
#[derive(Clone)]
pub struct CocycleSystem {
    base: BaseSystem,
    generator: Generator,
    dim: usize,
    norm: Norm,
    horizon: usize,
    injectivity_floor: f64,
    sup_norm: f64,
    sup_inverse_norm: f64,
}

impl fmt::Debug for CocycleSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CocycleSystem")
            .field("base", &self.base)
            .field("dim", &self.dim)
            .field("norm", &self.norm)
            .field("horizon", &self.horizon)
            .field("injectivity_floor", &self.injectivity_floor)
            .finish()
    }
}

impl CocycleSystem {
    /// Checks shapes and injectivity at every sample point and at its
    /// forward and backward images.
    pub fn new<G>(base: BaseSystem, dim: usize, norm: Norm, generator: G) -> Result<CocycleSystem>
    where
        G: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        CocycleSystem::from_arc(base, dim, norm, Arc::new(generator))
    }

    pub fn from_arc(base: BaseSystem, dim: usize, norm: Norm, generator: Generator) -> Result<CocycleSystem> {
        if dim == 0 {
            return Err(Error::Dimension("cocycle dimension must be positive".into()));
        }
        norm.check_dim(dim)?;
        let mut floor = f64::INFINITY;
        let mut sup = 0.0f64;
        let mut sup_inv = 0.0f64;
        for s in base.samples() {
            for x in [base.inverse(s), s.clone(), base.forward(s)] {
                let a = generator(&x);
                if a.shape() != (dim, dim) {
                    return Err(Error::Dimension(format!(
                        "generator at {x:?} has shape {:?}, expected {dim}x{dim}",
                        a.shape()
                    )));
                }
                if a.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Precondition(format!("generator at {x:?} has non-finite entries")));
                }
                let sv = linalg::singular_values(&a);
                floor = floor.min(sv[dim - 1]);
                sup = sup.max(sv[0]);
                sup_inv = sup_inv.max(1.0 / sv[dim - 1]);
            }
        }
        if floor <= INJECTIVITY_FLOOR {
            return Err(Error::Degenerate { floor });
        }
        Ok(CocycleSystem {
            base,
            generator,
            dim,
            norm,
            horizon: DEFAULT_HORIZON,
            injectivity_floor: floor,
            sup_norm: sup,
            sup_inverse_norm: sup_inv,
        })
    }

    /// The constant cocycle `A` over a single fixed point.
    pub fn constant(a: DMatrix<f64>, norm: Norm) -> Result<CocycleSystem> {
        let d = a.nrows();
        if a.ncols() != d {
            return Err(Error::Dimension("generator must be square".into()));
        }
        CocycleSystem::new(BaseSystem::cycle(1)?, d, norm, move |_: &[f64]| a.clone())
    }

    pub fn with_horizon(mut self, horizon: usize) -> CocycleSystem {
        self.horizon = horizon;
        self
    }

    pub fn base(&self) -> &BaseSystem {
        &self.base
    }

    pub fn samples(&self) -> &[Point] {
        self.base.samples()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> &Norm {
        &self.norm
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Smallest singular value of a generator seen at construction.
    pub fn injectivity_floor(&self) -> f64 {
        self.injectivity_floor
    }

    /// `sup_x |A_x|` over the checked points (Euclidean operator norm).
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// `kappa = sup |A_x| * sup |A_x^{-1}|` over the checked points.
    pub fn kappa(&self) -> f64 {
        self.sup_norm * self.sup_inverse_norm
    }

    pub fn generator_at(&self, x: &[f64]) -> DMatrix<f64> {
        (self.generator)(x)
    }

    pub(crate) fn check_horizon(&self, n: usize) -> Result<()> {
        if n > self.horizon {
            return Err(Error::Precondition(format!("orbit length {n} exceeds the horizon {}", self.horizon)));
        }
        Ok(())
    }

    /// `A^n_x`; for negative `n` the inverse of `A^{|n|}_{T^n x}`.
    pub fn orbit_product(&self, x: &[f64], n: i64) -> Result<StabilizedProduct> {
        self.check_horizon(n.unsigned_abs() as usize)?;
        let mut p = StabilizedProduct::identity(self.dim);
        let mut y = x.to_vec();
        if n >= 0 {
            for _ in 0..n {
                p.push(&self.generator_at(&y));
                y = self.base.forward(&y);
            }
        } else {
            for _ in 0..(-n) {
                y = self.base.inverse(&y);
                let inv = linalg::inverse(&self.generator_at(&y)).ok_or(Error::Degenerate { floor: 0.0 })?;
                p.push(&inv);
            }
        }
        Ok(p)
    }

    /// `[A^0_x, A^1_x, ..., A^n_x]`, built incrementally.
    pub fn forward_products(&self, x: &[f64], n: usize) -> Result<Vec<StabilizedProduct>> {
        self.check_horizon(n)?;
        let mut out = Vec::with_capacity(n + 1);
        let mut p = StabilizedProduct::identity(self.dim);
        let mut y = x.to_vec();
        out.push(p.clone());
        for _ in 0..n {
            p.push(&self.generator_at(&y));
            y = self.base.forward(&y);
            out.push(p.clone());
        }
        Ok(out)
    }

    /// `A^n_{T^{-n} x}` for `n = 1..=n_max`. Each product is rebuilt from
    /// scratch since new factors enter on the right.
    pub fn backward_products(&self, x: &[f64], n_max: usize) -> Result<Vec<StabilizedProduct>> {
        self.check_horizon(n_max)?;
        let mut gens = Vec::with_capacity(n_max);
        let mut y = x.to_vec();
        for _ in 0..n_max {
            y = self.base.inverse(&y);
            gens.push(self.generator_at(&y));
        }
        Ok((1..=n_max)
            .map(|n| {
                let mut p = StabilizedProduct::identity(self.dim);
                for a in gens[..n].iter().rev() {
                    p.push(a);
                }
                p
            })
            .collect())
    }

    /// The cocycle `A^m` over `T^m`, on the same samples.
    pub fn rebase(&self, m: usize) -> Result<CocycleSystem> {
        if m == 0 {
            return Err(Error::Precondition("rebase step must be positive".into()));
        }
        let parent = self.clone();
        let gen = move |x: &[f64]| -> DMatrix<f64> {
            let mut p = DMatrix::identity(parent.dim, parent.dim);
            let mut y = x.to_vec();
            for _ in 0..m {
                p = parent.generator_at(&y) * p;
                y = parent.base.forward(&y);
            }
            p
        };
        let c = CocycleSystem::new(self.base.power(m), self.dim, self.norm.clone(), gen)?;
        Ok(c.with_horizon((self.horizon / m).max(1)))
    }

    /// For weighted norms, the isometric copy `W A_x W^{-1}` with the
    /// Euclidean norm, `W = diag(sqrt w)`.
    pub fn euclidean_copy(&self) -> Option<(CocycleSystem, DVector<f64>)> {
        let w = self.norm.scaling()?;
        let parent = self.generator.clone();
        let ww = w.clone();
        let gen = move |x: &[f64]| conjugate_by_scaling(&parent(x), &ww);
        let c = CocycleSystem::new(self.base.clone(), self.dim, Norm::Euclidean, gen).ok()?;
        Some((c.with_horizon(self.horizon), w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive(c: &CocycleSystem, x: &[f64], n: usize) -> DMatrix<f64> {
        let mut p = DMatrix::identity(c.dim(), c.dim());
        let mut y = x.to_vec();
        for _ in 0..n {
            p = c.generator_at(&y) * p;
            y = c.base().forward(&y);
        }
        p
    }

    fn random_cycle(seed: u64) -> CocycleSystem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mats: Vec<DMatrix<f64>> =
            (0..3).map(|_| DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0)) + DMatrix::identity(3, 3)).collect();
        CocycleSystem::new(BaseSystem::cycle(3).unwrap(), 3, Norm::Euclidean, move |x: &[f64]| {
            mats[x[0] as usize].clone()
        })
        .unwrap()
    }

    #[test]
    fn zero_steps_is_identity() {
        let c = CocycleSystem::constant(DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0])), Norm::Euclidean)
            .unwrap();
        let p = c.orbit_product(&[0.0], 0).unwrap();
        assert_eq!(p.matrix(), DMatrix::identity(2, 2));
        assert_eq!(p.log_scale(), 0.0);
    }

    #[test]
    fn diagonal_power_from_log_scale() {
        let c = CocycleSystem::constant(DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0])), Norm::Euclidean)
            .unwrap();
        let s = c.orbit_product(&[0.0], 50).unwrap().log_singular_values();
        assert!((s[0] - 50.0 * 2f64.ln()).abs() < 1e-8 * 50.0 * 2f64.ln());
        assert!(s[1].abs() < 1e-8);
    }

    #[test]
    fn matches_naive_product_on_a_cycle() {
        let c = random_cycle(7);
        for x in c.samples() {
            let p = c.orbit_product(x, 12).unwrap().matrix();
            let q = naive(&c, x, 12);
            assert!((&p - &q).norm() <= 1e-8 * q.norm(), "{}", (&p - &q).norm() / q.norm());
        }
    }

    #[test]
    fn negative_orbits_invert() {
        let c = random_cycle(3);
        let x = vec![1.0];
        let back = c.orbit_product(&x, -5).unwrap().matrix();
        let y = c.base().iterate(&x, -5);
        let fwd = naive(&c, &y, 5);
        let id = back * fwd;
        assert!((id - DMatrix::identity(3, 3)).norm() < 1e-8);
    }

    #[test]
    fn horizon_and_injectivity_are_enforced() {
        let c = random_cycle(1).with_horizon(10);
        assert!(c.orbit_product(&[0.0], 11).is_err());
        assert!(c.orbit_product(&[0.0], -11).is_err());
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(CocycleSystem::constant(singular, Norm::Euclidean), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn rebase_squares_the_cocycle() {
        let c = random_cycle(5);
        let c2 = c.rebase(2).unwrap();
        for x in c.samples() {
            let a = c2.orbit_product(x, 3).unwrap().matrix();
            let b = naive(&c, x, 6);
            assert!((&a - &b).norm() <= 1e-9 * b.norm());
        }
    }

    #[test]
    fn conjugated_product_matches_explicit_conjugation() {
        let c = random_cycle(11);
        let w = DVector::from_vec(vec![1.0, 2.0, 0.5]);
        let p = c.orbit_product(&[0.0], 8).unwrap();
        let direct = linalg::singular_values(&conjugate_by_scaling(&p.matrix(), &w));
        let via = p.conjugated(&w).singular_values();
        for i in 0..3 {
            assert!((direct[i] - via[i]).abs() <= 1e-9 * direct[0]);
        }
    }
}
