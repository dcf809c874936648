//! Extremal problems over unit spheres in general norms.
//!
//! Polytope norms (`l^1`, `l^inf`) are handled exactly: a convex, positively
//! homogeneous function attains its supremum over a unit ball section at a
//! vertex, and the vertices are enumerated. Everything else falls back to a
//! seeded multi-start compass search.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::norms::{lp_norm, Norm};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub starts: usize,
    pub iterations: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { starts: 64, iterations: 200, tol: 1e-6, seed: 0 }
    }
}

impl SearchOptions {
    /// Cheaper settings for searches nested inside another search.
    pub fn inner(&self) -> SearchOptions {
        SearchOptions { starts: 8, iterations: 120, ..*self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Enumeration,
    MultiStart,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

impl Sense {
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Max => a > b,
            Sense::Min => a < b,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Extremum {
    pub value: f64,
    /// Maximizer in ambient coordinates, of unit norm.
    pub point: DVector<f64>,
    pub method: Method,
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

fn push_unique(out: &mut Vec<DVector<f64>>, c: DVector<f64>) {
    if !out.iter().any(|x| (x - &c).amax() < 1e-9 * (1.0 + c.amax())) {
        out.push(c);
    }
}

/// Vertices of `{c : |B c| <= 1}` in coefficient coordinates, for polytope
/// norms. Returns `None` for other norms.
pub fn section_vertices(norm: &Norm, basis: &DMatrix<f64>) -> Option<Vec<DVector<f64>>> {
    let (d, q) = basis.shape();
    let p = match norm {
        Norm::Lp(p) if *p == 1.0 || p.is_infinite() => *p,
        _ => return None,
    };
    let mut out = Vec::new();
    if q == 0 {
        return Some(out);
    }
    if p.is_infinite() {
        for rows in combinations(d, q) {
            let bs = select_rows(basis, &rows);
            let Some(inv) = bs.clone().try_inverse() else { continue };
            if linalg::min_singular(&bs) < 1e-10 * linalg::spectral_norm(&bs) {
                continue;
            }
            for mask in 0..(1usize << q) {
                let sig = DVector::from_fn(q, |i, _| if mask >> i & 1 == 1 { -1.0 } else { 1.0 });
                let c = &inv * sig;
                let x = basis * &c;
                if x.amax() <= 1.0 + 1e-10 {
                    push_unique(&mut out, c);
                }
            }
        }
    } else if q == 1 {
        let s = basis.column(0).abs().sum();
        out.push(DVector::from_element(1, 1.0 / s));
        out.push(DVector::from_element(1, -1.0 / s));
    } else {
        for rows in combinations(d, q - 1) {
            let bz = select_rows(basis, &rows);
            let n = linalg::null_space(&bz, 1e-10);
            if n.ncols() != 1 {
                continue;
            }
            let c = n.column(0).into_owned();
            let s = lp_norm((basis * &c).as_slice(), 1.0);
            push_unique(&mut out, &c / s);
            push_unique(&mut out, -&c / s);
        }
    }
    Some(out)
}

fn lex_less(a: &DVector<f64>, b: &DVector<f64>) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        if (x - y).abs() > 1e-12 {
            return x < y;
        }
    }
    false
}

/// `sup { f(x) : x in span(B), |x| = 1 }` for `f` convex and positively
/// homogeneous. Ties are broken towards the lexicographically smallest `x`.
pub fn sphere_sup<F>(norm: &Norm, basis: &DMatrix<f64>, f: F, opts: &SearchOptions) -> Extremum
where
    F: Fn(&DVector<f64>) -> f64 + Sync,
{
    let (d, q) = basis.shape();
    if q == 0 {
        return Extremum { value: 0.0, point: DVector::zeros(d), method: Method::ClosedForm };
    }
    if let Some(vs) = section_vertices(norm, basis) {
        if !vs.is_empty() {
            let mut best: Option<(f64, DVector<f64>)> = None;
            for c in vs {
                let x = basis * c;
                let val = f(&x);
                let replace = match &best {
                    None => true,
                    Some((bv, bx)) => {
                        let tol = 1e-12 * bv.abs().max(1.0);
                        val > bv + tol || ((val - bv).abs() <= tol && lex_less(&x, bx))
                    }
                };
                if replace {
                    best = Some((val, x));
                }
            }
            let (value, point) = best.unwrap();
            return Extremum { value, point, method: Method::Enumeration };
        }
    }
    let g = |c: &DVector<f64>| {
        let x = basis * c;
        let n = norm.eval(&x);
        if n == 0.0 {
            0.0
        } else {
            f(&(x / n))
        }
    };
    let (value, c) = optimize_on_sphere(q, &g, Sense::Max, opts, &[]);
    let x = basis * c;
    let n = norm.eval(&x);
    let method = if q == 1 { Method::ClosedForm } else { Method::MultiStart };
    Extremum { value, point: x / n, method }
}

/// Optimizes a function on the Euclidean unit sphere of `R^q`. Exact for
/// `q = 1`, a fine scan plus golden refinement for `q = 2`, and multi-start
/// compass search otherwise.
pub fn optimize_on_sphere<G>(
    q: usize,
    g: &G,
    sense: Sense,
    opts: &SearchOptions,
    extra: &[DVector<f64>],
) -> (f64, DVector<f64>)
where
    G: Fn(&DVector<f64>) -> f64 + Sync + ?Sized,
{
    match q {
        0 => (0.0, DVector::zeros(0)),
        1 => {
            let a = DVector::from_element(1, 1.0);
            let b = DVector::from_element(1, -1.0);
            let (ga, gb) = (g(&a), g(&b));
            if sense.better(gb, ga) {
                (gb, b)
            } else {
                (ga, a)
            }
        }
        2 => circle_optimize(|t| g(&DVector::from_column_slice(&[t.cos(), t.sin()])), sense)
            .map_point(|t| DVector::from_column_slice(&[t.cos(), t.sin()])),
        _ => {
            let mut starts: Vec<DVector<f64>> = extra.iter().map(|c| c.normalize()).collect();
            for i in 0..q {
                let mut e = DVector::zeros(q);
                e[i] = 1.0;
                starts.push(e.clone());
                starts.push(-e);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            for _ in 0..opts.starts {
                let c = DVector::from_fn(q, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
                if c.norm() > 1e-8 {
                    starts.push(c.normalize());
                }
            }
            let results: Vec<(f64, DVector<f64>)> =
                starts.par_iter().map(|c0| compass_on_sphere(g, c0.clone(), sense, opts)).collect();
            let mut best = results[0].clone();
            for r in results.into_iter().skip(1) {
                if sense.better(r.0, best.0) {
                    best = r;
                }
            }
            best
        }
    }
}

trait MapPoint {
    fn map_point<F: Fn(f64) -> DVector<f64>>(self, f: F) -> (f64, DVector<f64>);
}

impl MapPoint for (f64, f64) {
    fn map_point<F: Fn(f64) -> DVector<f64>>(self, f: F) -> (f64, DVector<f64>) {
        (self.0, f(self.1))
    }
}

/// Optimizes a `2 pi`-periodic function of one angle.
pub fn circle_optimize<G: Fn(f64) -> f64>(g: G, sense: Sense) -> (f64, f64) {
    const N: usize = 2048;
    let h = std::f64::consts::TAU / N as f64;
    let vals: Vec<f64> = (0..N).map(|j| g(j as f64 * h)).collect();
    // refine around the best few local optima of the scan
    let mut locals: Vec<usize> = (0..N)
        .filter(|&j| {
            let (l, r) = (vals[(j + N - 1) % N], vals[(j + 1) % N]);
            !sense.better(l, vals[j]) && !sense.better(r, vals[j])
        })
        .collect();
    locals.sort_by(|&a, &b| {
        let o = vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal);
        if sense == Sense::Max {
            o.reverse()
        } else {
            o
        }
    });
    let mut best = (vals[locals.first().copied().unwrap_or(0)], locals.first().copied().unwrap_or(0) as f64 * h);
    for &j in locals.iter().take(6) {
        let (v, t) = golden(&g, (j as f64 - 1.0) * h, (j as f64 + 1.0) * h, sense);
        if sense.better(v, best.0) {
            best = (v, t);
        }
    }
    best
}

/// Golden-section search on `[a, b]`.
pub fn golden<G: Fn(f64) -> f64>(g: &G, mut a: f64, mut b: f64, sense: Sense) -> (f64, f64) {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let key = |x: f64| if sense == Sense::Max { -g(x) } else { g(x) };
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (key(c), key(d));
    while (b - a).abs() > 1e-13 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = key(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = key(d);
        }
    }
    let t = 0.5 * (a + b);
    (g(t), t)
}

fn compass_on_sphere<G>(g: &G, c0: DVector<f64>, sense: Sense, opts: &SearchOptions) -> (f64, DVector<f64>)
where
    G: Fn(&DVector<f64>) -> f64 + ?Sized,
{
    let q = c0.len();
    let mut c = c0;
    let mut val = g(&c);
    let mut step = 0.5;
    let floor = (opts.tol * 1e-4).min(1e-9);
    for _ in 0..opts.iterations {
        let tangent = linalg::orth_complement(&DMatrix::from_column_slice(q, 1, c.as_slice()));
        let mut moved = false;
        for j in 0..tangent.ncols() {
            for s in [1.0, -1.0] {
                let cand = (&c + tangent.column(j) * (s * step)).normalize();
                let v = g(&cand);
                if sense.better(v, val) {
                    c = cand;
                    val = v;
                    moved = true;
                    break;
                }
            }
            if moved {
                break;
            }
        }
        if moved {
            step = (step * 1.5).min(1.0);
        } else {
            step *= 0.5;
            if step < floor {
                break;
            }
        }
    }
    (val, c)
}

/// Multi-start compass search over the Grassmannian of `p`-planes in `R^d`.
/// The objective receives an orthonormal `d x p` basis.
pub fn grassmann_optimize<G>(
    d: usize,
    p: usize,
    g: &G,
    sense: Sense,
    opts: &SearchOptions,
    warm: &[DMatrix<f64>],
) -> (f64, DMatrix<f64>)
where
    G: Fn(&DMatrix<f64>) -> f64 + Sync,
{
    if p == 0 || p == d {
        let y = DMatrix::identity(d, p);
        return (g(&y), y);
    }
    let mut starts: Vec<DMatrix<f64>> = warm.iter().map(|w| linalg::range_basis(w, 1e-12)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.starts {
        let z = DMatrix::from_fn(d, p, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let y = linalg::range_basis(&z, 1e-12);
        if y.ncols() == p {
            starts.push(y);
        }
    }
    let results: Vec<(f64, DMatrix<f64>)> =
        starts.par_iter().map(|y0| compass_on_grassmann(g, y0.clone(), sense, opts)).collect();
    let mut best = results[0].clone();
    for r in results.into_iter().skip(1) {
        if sense.better(r.0, best.0) {
            best = r;
        }
    }
    best
}

fn compass_on_grassmann<G>(g: &G, y0: DMatrix<f64>, sense: Sense, opts: &SearchOptions) -> (f64, DMatrix<f64>)
where
    G: Fn(&DMatrix<f64>) -> f64,
{
    let (d, p) = y0.shape();
    let mut y = y0;
    let mut val = g(&y);
    let mut step = 0.5;
    let floor = (opts.tol * 1e-4).min(1e-9);
    for _ in 0..opts.iterations {
        let comp = linalg::orth_complement(&y);
        let mut moved = false;
        'dirs: for i in 0..comp.ncols() {
            for j in 0..p {
                for s in [1.0, -1.0] {
                    let mut cand = y.clone();
                    let shift = comp.column(i) * (s * step);
                    let col = cand.column(j) + shift;
                    cand.set_column(j, &col);
                    let cand = linalg::range_basis(&cand, 1e-12);
                    if cand.ncols() != p {
                        continue;
                    }
                    let v = g(&cand);
                    if sense.better(v, val) {
                        y = cand;
                        val = v;
                        moved = true;
                        break 'dirs;
                    }
                }
            }
        }
        if moved {
            step = (step * 1.5).min(1.0);
        } else {
            step *= 0.5;
            if step < floor {
                break;
            }
        }
    }
    let _ = d;
    (val, y)
}

/// `inf { |v - x| : x in span(F) }`. The columns of `f` must be independent.
pub fn distance_to_span(norm: &Norm, v: &DVector<f64>, f: &DMatrix<f64>) -> f64 {
    let m = f.ncols();
    if m == 0 {
        return norm.eval(v);
    }
    match norm {
        Norm::Euclidean => {
            let q = linalg::range_basis(f, 1e-12);
            (v - &q * (q.transpose() * v)).norm()
        }
        Norm::Lp(p) if *p == 2.0 => distance_to_span(&Norm::Euclidean, v, f),
        Norm::Weighted(_) => {
            let w = norm.scaling().unwrap();
            let wv = v.component_mul(&w);
            let wf = crate::norms::scale_rows(f, &w);
            distance_to_span(&Norm::Euclidean, &wv, &wf)
        }
        Norm::Lp(p) => {
            let c_ls = f.clone().svd(true, true).solve(v, 1e-14).unwrap_or_else(|_| DVector::zeros(m));
            let obj = |c: &DVector<f64>| norm.eval(&(v - f * c));
            let mut best = obj(&c_ls);
            if p.is_infinite() {
                // vertices of the epigraph of |v - F c|_inf
                let d = v.len();
                let cons: Vec<(usize, f64)> = (0..d).flat_map(|i| [(i, 1.0), (i, -1.0)]).collect();
                for sel in combinations(cons.len(), m + 1) {
                    let mut a = DMatrix::zeros(m + 1, m + 1);
                    let mut b = DVector::zeros(m + 1);
                    for (r, &k) in sel.iter().enumerate() {
                        let (i, s) = cons[k];
                        for j in 0..m {
                            a[(r, j)] = s * f[(i, j)];
                        }
                        a[(r, m)] = 1.0;
                        b[r] = s * v[i];
                    }
                    if let Some(sol) = a.lu().solve(&b) {
                        if sol.iter().all(|x| x.is_finite()) {
                            best = best.min(obj(&sol.rows(0, m).into_owned()));
                        }
                    }
                }
                best
            } else if *p == 1.0 {
                for rows in combinations(v.len(), m) {
                    let fs = select_rows(f, &rows);
                    let vs = DVector::from_fn(m, |i, _| v[rows[i]]);
                    if let Some(c) = fs.lu().solve(&vs) {
                        if c.iter().all(|x| x.is_finite()) {
                            best = best.min(obj(&c));
                        }
                    }
                }
                best
            } else {
                smooth_distance(norm, v, f, c_ls)
            }
        }
    }
}

/// Gradient descent with backtracking for smooth `l^p`, `1 < p < inf`.
fn smooth_distance(norm: &Norm, v: &DVector<f64>, f: &DMatrix<f64>, c0: DVector<f64>) -> f64 {
    let obj = |c: &DVector<f64>| norm.eval(&(v - f * c));
    let mut c = c0;
    let mut val = obj(&c);
    let mut step = 1.0;
    for _ in 0..2000 {
        let r = v - f * &c;
        if norm.eval(&r) == 0.0 {
            return 0.0;
        }
        let grad = -(f.transpose() * norm.norming_functional(&r));
        let gn = grad.norm();
        if gn < 1e-14 {
            break;
        }
        let mut accepted = false;
        while step > 1e-16 {
            let cand = &c - &grad * (step / gn);
            let cv = obj(&cand);
            if cv < val {
                c = cand;
                let gain = val - cv;
                val = cv;
                step *= 2.0;
                accepted = true;
                if gain < 1e-16 * (1.0 + val) {
                    return val;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    val
}

/// Volume of the unit Euclidean ball in `R^q`.
pub fn unit_ball_volume(q: usize) -> f64 {
    match q {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(q - 2) * std::f64::consts::TAU / q as f64,
    }
}

/// Lebesgue volume (in orthonormal coordinates of `span(B)`) of
/// `{c : |B c| <= 1}`, with `B` Euclidean-orthonormal.
///
/// Closed forms for inner-product norms and `q = 1`; exact polygon areas or
/// periodic quadrature for `q = 2`; quasi-Monte-Carlo with `samples` points
/// for `q >= 3`.
pub fn ball_volume(norm: &Norm, basis: &DMatrix<f64>, samples: usize) -> f64 {
    let q = basis.ncols();
    if q == 0 {
        return 1.0;
    }
    if norm.is_euclidean() {
        return unit_ball_volume(q);
    }
    if let Some(w) = norm.scaling() {
        let wb = crate::norms::scale_rows(basis, &w);
        let g = wb.transpose() * wb;
        return unit_ball_volume(q) / g.determinant().sqrt();
    }
    if q == 1 {
        return 2.0 / norm.eval(&basis.column(0).into_owned());
    }
    if q == 2 {
        if let Some(mut vs) = section_vertices(norm, basis) {
            vs.sort_by(|a, b| a[1].atan2(a[0]).partial_cmp(&b[1].atan2(b[0])).unwrap());
            let n = vs.len();
            let twice: f64 = (0..n).map(|i| vs[i][0] * vs[(i + 1) % n][1] - vs[(i + 1) % n][0] * vs[i][1]).sum();
            return 0.5 * twice.abs();
        }
        const N: usize = 4096;
        let h = std::f64::consts::TAU / N as f64;
        let s: f64 = (0..N)
            .map(|j| {
                let t = j as f64 * h;
                let x = basis * DVector::from_column_slice(&[t.cos(), t.sin()]);
                norm.eval(&x).powi(-2)
            })
            .sum();
        return 0.5 * s * h;
    }
    ball_volume_qmc(norm, basis, samples)
}

/// Quasi-Monte-Carlo estimate with a Halton sequence on the bounding box.
pub fn ball_volume_qmc(norm: &Norm, basis: &DMatrix<f64>, samples: usize) -> f64 {
    let (d, q) = basis.shape();
    if q == 0 {
        return 1.0;
    }
    let r = norm.euclidean_bound(d);
    let hits = (1..=samples)
        .into_par_iter()
        .filter(|&i| {
            let c = DVector::from_fn(q, |j, _| r * (2.0 * halton(i, PRIMES[j % PRIMES.len()]) - 1.0));
            norm.eval(&(basis * c)) <= 1.0
        })
        .count();
    (2.0 * r).powi(q as i32) * hits as f64 / samples as f64
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `i` in base `b`.
pub fn halton(mut i: usize, b: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = b as usize;
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn counts_combinations() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn cube_and_cross_polytope_vertices() {
        let id = DMatrix::<f64>::identity(2, 2);
        assert_eq!(section_vertices(&Norm::linf(), &id).unwrap().len(), 4);
        assert_eq!(section_vertices(&Norm::l1(), &id).unwrap().len(), 4);
        let id3 = DMatrix::<f64>::identity(3, 3);
        assert_eq!(section_vertices(&Norm::linf(), &id3).unwrap().len(), 8);
        assert_eq!(section_vertices(&Norm::l1(), &id3).unwrap().len(), 6);
    }

    #[test]
    fn distances_in_polytope_norms() {
        let e1 = DVector::from_column_slice(&[1.0, 0.0]);
        let diag = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        assert_abs_diff_eq!(distance_to_span(&Norm::linf(), &e1, &diag), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(distance_to_span(&Norm::l1(), &e1, &diag), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(distance_to_span(&Norm::Euclidean, &e1, &diag), 0.5f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn smooth_lp_distance_matches_scan() {
        let n = Norm::Lp(3.0);
        let v = DVector::from_column_slice(&[1.0, 0.2]);
        let f = DMatrix::from_column_slice(2, 1, &[1.0, 2.0]);
        let got = distance_to_span(&n, &v, &f);
        let scan = (0..200001)
            .map(|i| {
                let t = -2.0 + 4.0 * i as f64 / 200000.0;
                n.eval(&(&v - &f * t))
            })
            .fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(got, scan, epsilon = 1e-8);
    }

    #[test]
    fn ball_volumes() {
        let id = DMatrix::<f64>::identity(2, 2);
        assert_abs_diff_eq!(ball_volume(&Norm::linf(), &id, 0), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ball_volume(&Norm::l1(), &id, 0), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ball_volume_qmc(&Norm::linf(), &id, 100_000), 4.0, epsilon = 1e-3);
        // l^4 ball area from quadrature against QMC
        let quad = ball_volume(&Norm::Lp(4.0), &id, 0);
        let qmc = ball_volume_qmc(&Norm::Lp(4.0), &id, 400_000);
        assert_abs_diff_eq!(quad, qmc, epsilon = 2e-3);
        let id3 = DMatrix::<f64>::identity(3, 3);
        assert_abs_diff_eq!(ball_volume(&Norm::l1(), &id3, 200_000), 8.0 / 6.0, epsilon = 5e-3);
    }

    #[test]
    fn sphere_sup_exact_for_polytopes() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        let id = DMatrix::<f64>::identity(2, 2);
        let n = Norm::linf();
        let e = sphere_sup(&n, &id, |x| n.eval(&(&a * x)), &SearchOptions::default());
        assert_eq!(e.method, Method::Enumeration);
        assert_abs_diff_eq!(e.value, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn sphere_optimizer_in_three_dims() {
        // maximize the first coordinate of a unit vector
        let g = |c: &DVector<f64>| c[0] / c.norm();
        let (v, c) = optimize_on_sphere(3, &g, Sense::Max, &SearchOptions::default(), &[]);
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c[0], 1.0, epsilon = 1e-4);
    }
}
