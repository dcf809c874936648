//! Dense helpers on top of `nalgebra`.
//!
//! Singular values come from a one-sided Jacobi iteration. It is slower than
//! bidiagonalization but keeps relative accuracy on row-graded matrices, which
//! is what long cocycle products look like after QR stabilization.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// `a = u * diag(s) * v^T` with `s` sorted in decreasing order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl Svd {
    pub fn new(a: &DMatrix<f64>) -> Svd {
        let (m, n) = a.shape();
        if m > n {
            let (u, s, v) = jacobi(a);
            Svd { u, s, v }
        } else {
            // rows of cocycle products carry the grading, so rotate rows
            let (u, s, v) = jacobi(&a.transpose());
            Svd { u: v, s, v: u }
        }
    }

    pub fn rank(&self, rel_tol: f64) -> usize {
        let top = self.s.get(0).copied().unwrap_or(0.0);
        self.s.iter().filter(|&&x| x > rel_tol * top && x > 0.0).count()
    }

    /// Leading `k` left singular vectors.
    pub fn left(&self, k: usize) -> DMatrix<f64> {
        self.u.columns(0, k).into_owned()
    }

    pub fn right(&self, k: usize) -> DMatrix<f64> {
        self.v.columns(0, k).into_owned()
    }
}

/// One-sided Jacobi on the columns of `g` (m >= n).
fn jacobi(g: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let (m, n) = g.shape();
    let mut w = g.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma == 0.0 || gamma.abs() <= 1e-15 * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (a, b) = (w[(i, p)], w[(i, q)]);
                    w[(i, p)] = c * a - s * b;
                    w[(i, q)] = s * a + c * b;
                }
                for i in 0..n {
                    let (a, b) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * a - s * b;
                    v[(i, q)] = s * a + c * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap_or(std::cmp::Ordering::Equal));

    let mut u = DMatrix::zeros(m, n);
    let mut vs = DMatrix::zeros(n, n);
    let mut s = DVector::zeros(n);
    let mut filled = 0;
    for (dst, &src) in order.iter().enumerate() {
        s[dst] = norms[src];
        vs.set_column(dst, &v.column(src));
        if norms[src] > 0.0 {
            u.set_column(dst, &(w.column(src) / norms[src]));
            filled += 1;
        }
    }
    if filled < n {
        let basis = u.columns(0, filled).into_owned();
        let comp = orth_complement(&basis);
        for j in filled..n {
            u.set_column(j, &comp.column(j - filled));
        }
    }
    (u, s, vs)
}

pub fn singular_values(a: &DMatrix<f64>) -> DVector<f64> {
    Svd::new(a).s
}

pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    singular_values(a)[0]
}

/// Smallest of the `min(m, n)` singular values.
pub fn min_singular(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let s = singular_values(a);
    s[s.len() - 1]
}

/// Orthonormal basis of the column space, dropping directions below `rel_tol`.
pub fn range_basis(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if a.ncols() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = Svd::new(a);
    let r = svd.rank(rel_tol).min(a.nrows());
    svd.left(r)
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns `q`.
pub fn orth_complement(q: &DMatrix<f64>) -> DMatrix<f64> {
    let d = q.nrows();
    let k = q.ncols();
    if k == 0 {
        return DMatrix::identity(d, d);
    }
    if k >= d {
        return DMatrix::zeros(d, 0);
    }
    let p = DMatrix::<f64>::identity(d, d) - q * q.transpose();
    let eig = SymmetricEigen::new(p);
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = DMatrix::zeros(d, d - k);
    for (j, &i) in idx.iter().take(d - k).enumerate() {
        let mut col = eig.eigenvectors.column(i).into_owned();
        fix_sign(&mut col);
        out.set_column(j, &col);
    }
    out
}

/// Null space of `a` as orthonormal columns.
pub fn null_space(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let rows = range_basis(&a.transpose(), rel_tol);
    orth_complement(&rows)
}

/// Make the first non-negligible entry positive.
pub fn fix_sign(v: &mut DVector<f64>) {
    let scale = v.amax();
    if let Some(x) = v.iter().find(|x| x.abs() > 1e-12 * scale).copied() {
        if x < 0.0 {
            v.neg_mut();
        }
    }
}

pub fn inverse(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    a.clone().try_inverse()
}

/// Parse `"a,b;c,d"` into a row-major matrix.
pub fn parse_matrix(text: &str) -> Option<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = text
        .split(';')
        .map(|r| r.split(',').map(|x| x.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()
        .ok()?;
    from_rows(&rows)
}

pub fn from_rows(rows: &[Vec<f64>]) -> Option<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first()?.len();
    if m == 0 || rows.iter().any(|r| r.len() != m) {
        return None;
    }
    Some(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn to_rows(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect()
}

/// Givens rotation by `theta` in the `(i, j)` plane.
pub fn rotation(d: usize, i: usize, j: usize, theta: f64) -> DMatrix<f64> {
    let mut r = DMatrix::identity(d, d);
    let (s, c) = theta.sin_cos();
    r[(i, i)] = c;
    r[(j, j)] = c;
    r[(i, j)] = -s;
    r[(j, i)] = s;
    r
}
