//! The upper bundle as a pullback limit of top singular subspaces and the
//! lower bundle as a limit of finite-time complements.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::base::Point;
use super::system::{CocycleSystem, StabilizedProduct};
use super::TableRow;
use crate::error::{Error, Result};
use crate::extremal::SearchOptions;
use crate::fit::Envelope;
use crate::geometry;
use crate::linalg;
use crate::norms::{scale_rows, Norm};
use crate::subspace::Subspace;
use crate::svd_split::gen_svd_complement;

/// Gaps below this are rounding noise and carry no rate information.
pub const GAP_FLOOR: f64 = 1e-15;

/// A limit subspace and the distances between successive iterates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitResult {
    pub subspace: Subspace,
    /// `(n, d_H(X_n, X_{n+1}))`
    pub table: Vec<TableRow>,
}

impl LimitResult {
    /// Largest of the last two increments.
    pub fn last_gap(&self) -> f64 {
        self.table.iter().rev().take(2).map(|r| r.value).fold(0.0, f64::max)
    }
}

fn euclid_dh(a: &Subspace, b: &Subspace) -> f64 {
    geometry::hausdorff(a, b, &Norm::Euclidean)
}

/// `E(x) = lim E'_n(T^{-n} x)` with `E'_n` the top-`k` left singular
/// subspace of `A^n_{T^{-n} x}`. Stops once successive iterates are closer
/// than `tol (1 - tau)`.
pub fn construct_upper(
    c: &CocycleSystem,
    x: &[f64],
    k: usize,
    tau: f64,
    tol: f64,
    n_max: usize,
) -> Result<LimitResult> {
    if k == 0 || k >= c.dim() {
        return Err(Error::Precondition(format!("need 1 <= k < d = {}, got k = {k}", c.dim())));
    }
    if !(tau > 0.0 && tau < 1.0) || !(tol > 0.0) {
        return Err(Error::Precondition(format!(
            "construction needs a domination rate in (0, 1) and tol > 0, got tau = {tau}, tol = {tol}"
        )));
    }
    let threshold = tol * (1.0 - tau);
    c.check_horizon(n_max + 1)?;
    // A^n_{T^{-n}x} gains its new factor on the right, so each product is
    // rebuilt from the cached generators
    let mut gens = Vec::with_capacity(n_max + 1);
    let mut y = x.to_vec();
    let mut next_product = |gens: &mut Vec<DMatrix<f64>>| {
        y = c.base().inverse(&y);
        gens.push(c.generator_at(&y));
        let mut p = StabilizedProduct::identity(c.dim());
        for a in gens.iter().rev() {
            p.push(a);
        }
        p
    };
    let mut prev = next_product(&mut gens).top_left(k);
    let mut table = Vec::new();
    for n in 1..=n_max {
        let next = next_product(&mut gens).top_left(k);
        let gap = euclid_dh(&prev, &next);
        table.push(TableRow { n, value: gap });
        if gap < threshold {
            return Ok(LimitResult { subspace: next, table });
        }
        prev = next;
    }
    Err(Error::LimitNotResolved { horizon: n_max, last_gap: table.last().map_or(f64::NAN, |r| r.value) })
}

/// `{v : A v is orthogonal to A E}`, with orthogonality taken in the
/// inner product `<u, v> = sum w_i u_i v_i` when `scaling = sqrt w` is given.
fn hilbert_complement(
    p: &StabilizedProduct,
    e: &Subspace,
    scaling: Option<&nalgebra::DVector<f64>>,
) -> Result<Subspace> {
    // Only the row space matters, so the orthogonal factor drops out in the
    // Euclidean case and the graded triangular factor is used directly.
    let m: DMatrix<f64> = match scaling {
        Some(w) => scale_rows(&p.scaled(), w),
        None => p.r().clone(),
    };
    let s = &m * e.basis();
    let qs = s.clone().qr();
    let rs = qs.r();
    let diag_min = (0..rs.ncols()).map(|i| rs[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if !(diag_min > 0.0) {
        return Err(Error::NotInjective { ratio: 0.0 });
    }
    let n = m.transpose() * qs.q();
    let z = n.qr().q();
    Ok(Subspace::from_orthonormal(linalg::orth_complement(&z)))
}

/// The finite-time lower complement `F_n(x)` of `E` for the product `p`.
pub(crate) fn lower_complement(
    p: &StabilizedProduct,
    e: &Subspace,
    norm: &Norm,
    opts: &SearchOptions,
) -> Result<Subspace> {
    match norm {
        Norm::Euclidean => hilbert_complement(p, e, None),
        Norm::Weighted(_) => hilbert_complement(p, e, norm.scaling().as_ref()),
        _ => Ok(gen_svd_complement(&p.scaled(), e, norm, opts)?.0),
    }
}

/// `F(x) = lim F_n(x)` where `F_n` is the complement of `E` produced by the
/// singular-value splitting of `A^n_x`. Stops once two successive
/// increments are below `tol`.
pub fn construct_lower(c: &CocycleSystem, x: &[f64], e: &Subspace, tol: f64, n_max: usize) -> Result<LimitResult> {
    if e.ambient_dim() != c.dim() || e.is_zero() || e.dim() >= c.dim() {
        return Err(Error::Dimension(format!("need 1 <= dim E < {}", c.dim())));
    }
    let opts = SearchOptions { starts: 16, ..SearchOptions::default() };
    c.check_horizon(n_max + 1)?;
    let mut p = StabilizedProduct::identity(c.dim());
    let mut y = x.to_vec();
    let mut advance = |p: &mut StabilizedProduct| {
        p.push(&c.generator_at(&y));
        y = c.base().forward(&y);
    };
    advance(&mut p);
    let mut prev = lower_complement(&p, e, c.norm(), &opts)?;
    let mut table: Vec<TableRow> = Vec::new();
    for n in 1..=n_max {
        advance(&mut p);
        let next = lower_complement(&p, e, c.norm(), &opts)?;
        let gap = euclid_dh(&prev, &next);
        let before = table.last().map_or(f64::INFINITY, |r| r.value);
        table.push(TableRow { n, value: gap });
        // the complements need not approach monotonically; ask for two quiet steps
        if gap < tol && before < tol {
            return Ok(LimitResult { subspace: next, table });
        }
        prev = next;
    }
    Err(Error::LimitNotResolved { horizon: n_max, last_gap: table.last().map_or(f64::NAN, |r| r.value) })
}

/// The splitting at one sample point and at its image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub x: Point,
    pub e: Subspace,
    pub f: Subspace,
    /// `|pi_{E(x)//F(x)}|` in the cocycle's norm.
    pub proj_norm: f64,
    /// `E(Tx)`, `F(Tx)` computed independently.
    pub e_next: Subspace,
    pub f_next: Subspace,
    pub upper_table: Vec<TableRow>,
    pub lower_table: Vec<TableRow>,
    /// Estimated distance of `F(x)` and `F(Tx)` from the true limits.
    pub lower_accuracy: f64,
    pub lower_accuracy_next: f64,
}

/// Neighboring-sample distances on a circle grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Continuity {
    pub grid_spacing: f64,
    pub modulus_e: f64,
    pub modulus_f: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplittingReport {
    pub k: usize,
    pub n_max: usize,
    pub tol: f64,
    /// Domination rate driving the stopping rule.
    pub tau: f64,
    pub points: Vec<PointRecord>,
    /// `(n, max over samples of d_H(E'_n, E'_{n+1}))`
    pub convergence_table: Vec<TableRow>,
    pub convergence_envelope: Option<Envelope>,
    /// First `n` after which every tabulated gap stays under twice the
    /// least-squares envelope.
    pub stabilization_index: Option<usize>,
    pub lower_convergence_table: Vec<TableRow>,
    pub continuity: Option<Continuity>,
}

fn sup_table(tables: impl Iterator<Item = Vec<TableRow>>) -> Vec<TableRow> {
    let mut out: Vec<TableRow> = Vec::new();
    for t in tables {
        for row in t {
            match out.iter_mut().find(|r| r.n == row.n) {
                Some(r) => r.value = r.value.max(row.value),
                None => out.push(row),
            }
        }
    }
    out.sort_by_key(|r| r.n);
    out
}

/// Fits a geometric envelope to the positive entries of a gap table.
pub fn gap_envelope(table: &[TableRow]) -> Option<Envelope> {
    let pts: Vec<(f64, f64)> = table.iter().filter(|r| r.value > GAP_FLOOR).map(|r| (r.n as f64, r.value)).collect();
    Envelope::fit(&pts, &pts)
}

/// First tabulated `n` from which every gap is at most `2 K_ls rate^n`.
pub fn stabilization_index(table: &[TableRow], env: &Envelope) -> Option<usize> {
    let bound = |r: &TableRow| r.value <= GAP_FLOOR || r.value <= 2.0 * env.ls_constant * env.rate.powi(r.n as i32);
    (0..table.len()).find(|&i| table[i..].iter().all(bound)).map(|i| table[i].n)
}

fn point_record(c: &CocycleSystem, x: &[f64], k: usize, tau: f64, tol: f64, n_max: usize) -> Result<PointRecord> {
    let up = construct_upper(c, x, k, tau, tol, n_max)?;
    let lo = construct_lower(c, x, &up.subspace, tol, n_max)?;
    let tx = c.base().forward(x);
    let up_next = construct_upper(c, &tx, k, tau, tol, n_max)?;
    let lo_next = construct_lower(c, &tx, &up_next.subspace, tol, n_max)?;
    let proj_norm = geometry::projection_norm(&up.subspace, &lo.subspace, c.norm())?;
    let accuracy = |r: &LimitResult| (r.last_gap() / (1.0 - tau)).max(GAP_FLOOR);
    Ok(PointRecord {
        x: x.to_vec(),
        lower_accuracy: accuracy(&lo),
        lower_accuracy_next: accuracy(&lo_next),
        e: up.subspace,
        f: lo.subspace,
        proj_norm,
        e_next: up_next.subspace,
        f_next: lo_next.subspace,
        upper_table: up.table,
        lower_table: lo.table,
    })
}

/// Moduli of continuity of `x -> E(x)`, `F(x)` over neighboring samples of
/// a circle grid.
pub fn continuity(c: &CocycleSystem, points: &[PointRecord]) -> Option<Continuity> {
    if !c.base().is_circle() || points.len() < 2 {
        return None;
    }
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| points[a].x[0].total_cmp(&points[b].x[0]));
    let mut out = Continuity { grid_spacing: 0.0, modulus_e: 0.0, modulus_f: 0.0 };
    for w in 0..idx.len() {
        let (a, b) = (&points[idx[w]], &points[idx[(w + 1) % idx.len()]]);
        out.grid_spacing = out.grid_spacing.max(c.base().distance(&a.x, &b.x));
        out.modulus_e = out.modulus_e.max(euclid_dh(&a.e, &b.e));
        out.modulus_f = out.modulus_f.max(euclid_dh(&a.f, &b.f));
    }
    Some(out)
}

/// Constructs `E(x) + F(x)` at every sample point (and its image).
pub fn build_splitting(c: &CocycleSystem, k: usize, tau: f64, tol: f64, n_max: usize) -> Result<SplittingReport> {
    let points: Vec<PointRecord> =
        c.samples().par_iter().map(|x| point_record(c, x, k, tau, tol, n_max)).collect::<Result<_>>()?;
    let convergence_table = sup_table(points.iter().map(|p| p.upper_table.clone()));
    let lower_convergence_table = sup_table(points.iter().map(|p| p.lower_table.clone()));
    let convergence_envelope = gap_envelope(&convergence_table);
    let stab = convergence_envelope.as_ref().and_then(|e| stabilization_index(&convergence_table, e));
    let continuity = continuity(c, &points);
    Ok(SplittingReport {
        k,
        n_max,
        tol,
        tau,
        points,
        convergence_table,
        convergence_envelope,
        stabilization_index: stab,
        lower_convergence_table,
        continuity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn constant(rows: &[f64]) -> CocycleSystem {
        CocycleSystem::constant(DMatrix::from_row_slice(2, 2, rows), Norm::Euclidean).unwrap()
    }

    #[test]
    fn diagonal_splitting_is_the_axes() {
        let c = constant(&[2.0, 0.0, 0.0, 1.0]);
        let up = construct_upper(&c, &[0.0], 1, 0.5, 1e-8, 60).unwrap();
        assert!(up.table.iter().all(|r| r.value == 0.0));
        assert!(euclid_dh(&up.subspace, &Subspace::coordinate(2, &[0])) < 1e-14);
        let lo = construct_lower(&c, &[0.0], &up.subspace, 1e-8, 60).unwrap();
        assert!(euclid_dh(&lo.subspace, &Subspace::coordinate(2, &[1])) < 1e-14);
    }

    #[test]
    fn triangular_splitting_matches_eigenvectors() {
        let c = constant(&[2.0, 1.0, 0.0, 1.0]);
        let up = construct_upper(&c, &[0.0], 1, 0.5, 1e-10, 80).unwrap();
        assert!(euclid_dh(&up.subspace, &Subspace::line(&[1.0, 0.0]).unwrap()) < 1e-9);
        let lo = construct_lower(&c, &[0.0], &up.subspace, 1e-10, 80).unwrap();
        assert!(euclid_dh(&lo.subspace, &Subspace::line(&[1.0, -1.0]).unwrap()) < 1e-9);
    }

    #[test]
    fn weighted_and_polytope_lower_limits_agree_with_euclidean() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        let e = Subspace::line(&[1.0, 0.0]).unwrap();
        for norm in [Norm::weighted(vec![1.0, 3.0]).unwrap(), Norm::linf(), Norm::l1()] {
            let c = CocycleSystem::constant(a.clone(), norm).unwrap();
            let lo = construct_lower(&c, &[0.0], &e, 1e-10, 80).unwrap();
            assert!(euclid_dh(&lo.subspace, &Subspace::line(&[1.0, -1.0]).unwrap()) < 1e-8);
        }
    }

    #[test]
    fn rotation_does_not_converge() {
        let c = CocycleSystem::constant(linalg::rotation(2, 0, 1, 0.7), Norm::Euclidean).unwrap();
        assert!(matches!(construct_upper(&c, &[0.0], 1, 0.5, 1e-8, 30), Err(Error::LimitNotResolved { .. })));
    }

    #[test]
    fn graded_complement_survives_huge_products() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 2.0, 1.0]));
        let c = CocycleSystem::constant(a, Norm::Euclidean).unwrap();
        let e = Subspace::coordinate(3, &[0, 1]);
        let p = c.orbit_product(&[0.0], 150).unwrap();
        let f = lower_complement(&p, &e, &Norm::Euclidean, &SearchOptions::default()).unwrap();
        assert!(euclid_dh(&f, &Subspace::coordinate(3, &[2])) < 1e-12);
    }
}
