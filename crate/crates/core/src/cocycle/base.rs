//! Invertible base dynamics `T : X -> X` together with the sample points
//! standing in for the compact space `X`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A base point: a coordinate vector in the parameter space of `X`.
pub type Point = Vec<f64>;

/// A closure on base points, safe to call from several threads.
pub type PointMap = Arc<dyn Fn(&[f64]) -> Point + Send + Sync>;

/// Default number of grid points on a circle.
pub const DEFAULT_GRID: usize = 128;

#[derive(Clone)]
pub enum BaseKind {
    /// `x_i -> x_{i+1 mod n}`.
    FiniteCycle { points: Vec<Point> },
    /// `x -> x + alpha mod 1`.
    CircleRotation { alpha: f64 },
    /// Componentwise `x -> x + shift mod 1`.
    TorusTranslation { shift: Vec<f64> },
    /// A user-supplied homeomorphism and its inverse.
    Explicit { forward: PointMap, inverse: PointMap, label: String },
}

impl fmt::Debug for BaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseKind::FiniteCycle { points } => write!(f, "FiniteCycle({} points)", points.len()),
            BaseKind::CircleRotation { alpha } => write!(f, "CircleRotation({alpha})"),
            BaseKind::TorusTranslation { shift } => write!(f, "TorusTranslation({shift:?})"),
            BaseKind::Explicit { label, .. } => write!(f, "Explicit({label})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BaseSystem {
    kind: BaseKind,
    samples: Vec<Point>,
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(1.0);
    // rem_euclid can return 1.0 for tiny negative inputs
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Distance on the torus `R^m / Z^m`.
fn torus_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let t = (x - y).rem_euclid(1.0);
            t.min(1.0 - t)
        })
        .fold(0.0, f64::max)
}

impl BaseSystem {
    /// The cycle `0 -> 1 -> ... -> n-1 -> 0` on the points `[i]`.
    pub fn cycle(n: usize) -> Result<BaseSystem> {
        BaseSystem::finite_cycle((0..n).map(|i| vec![i as f64]).collect())
    }

    pub fn finite_cycle(points: Vec<Point>) -> Result<BaseSystem> {
        if points.is_empty() {
            return Err(Error::Precondition("a cycle needs at least one point".into()));
        }
        let m = points[0].len();
        if points.iter().any(|p| p.len() != m) {
            return Err(Error::Dimension("cycle points have different lengths".into()));
        }
        for i in 0..points.len() {
            for j in 0..i {
                if dist(&points[i], &points[j]) < 1e-12 {
                    return Err(Error::Precondition(format!("cycle points {j} and {i} coincide")));
                }
            }
        }
        let samples = points.clone();
        Ok(BaseSystem { kind: BaseKind::FiniteCycle { points }, samples })
    }

    /// Rotation by `alpha` sampled on the grid `j / grid`.
    pub fn rotation(alpha: f64, grid: usize) -> Result<BaseSystem> {
        if grid == 0 || !alpha.is_finite() {
            return Err(Error::Precondition("rotation needs a finite angle and a nonempty grid".into()));
        }
        let samples = (0..grid).map(|j| vec![j as f64 / grid as f64]).collect();
        Ok(BaseSystem { kind: BaseKind::CircleRotation { alpha: wrap(alpha) }, samples })
    }

    /// Translation on the `m`-torus sampled on a product grid with about
    /// `grid` points in total.
    pub fn torus(shift: Vec<f64>, grid: usize) -> Result<BaseSystem> {
        let m = shift.len();
        if m == 0 || grid == 0 || shift.iter().any(|s| !s.is_finite()) {
            return Err(Error::Precondition("torus needs a finite shift and a nonempty grid".into()));
        }
        let per_axis = ((grid as f64).powf(1.0 / m as f64).round() as usize).max(1);
        let total = per_axis.pow(m as u32);
        let samples = (0..total)
            .map(|mut idx| {
                (0..m)
                    .map(|_| {
                        let j = idx % per_axis;
                        idx /= per_axis;
                        j as f64 / per_axis as f64
                    })
                    .collect()
            })
            .collect();
        let shift = shift.into_iter().map(wrap).collect();
        Ok(BaseSystem { kind: BaseKind::TorusTranslation { shift }, samples })
    }

    /// A user-supplied map; `inverse` must undo `forward` on the samples.
    pub fn explicit(forward: PointMap, inverse: PointMap, samples: Vec<Point>, label: &str) -> Result<BaseSystem> {
        if samples.is_empty() {
            return Err(Error::Precondition("explicit base needs sample points".into()));
        }
        for s in &samples {
            let back = forward(&inverse(s));
            let there = inverse(&forward(s));
            if dist(&back, s) > 1e-12 || dist(&there, s) > 1e-12 {
                return Err(Error::Precondition(format!("inverse does not undo forward at {s:?}")));
            }
        }
        Ok(BaseSystem { kind: BaseKind::Explicit { forward, inverse, label: label.to_string() }, samples })
    }

    /// Replaces the sample points. Cycles only accept their own points.
    pub fn with_samples(mut self, samples: Vec<Point>) -> Result<BaseSystem> {
        if samples.is_empty() {
            return Err(Error::Precondition("empty sample set".into()));
        }
        if let BaseKind::FiniteCycle { points } = &self.kind {
            if samples.iter().any(|s| points.iter().all(|p| dist(p, s) > 1e-12)) {
                return Err(Error::Precondition("sample is not a point of the cycle".into()));
            }
        }
        self.samples = samples;
        Ok(self)
    }

    pub fn kind(&self) -> &BaseKind {
        &self.kind
    }

    pub fn samples(&self) -> &[Point] {
        &self.samples
    }

    /// Whether base points live on the circle `R/Z`.
    pub fn is_circle(&self) -> bool {
        matches!(self.kind, BaseKind::CircleRotation { .. })
    }

    /// Distance between base points, periodic where the base is.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            BaseKind::CircleRotation { .. } | BaseKind::TorusTranslation { .. } => torus_dist(a, b),
            _ => dist(a, b),
        }
    }

    pub fn forward(&self, x: &[f64]) -> Point {
        match &self.kind {
            BaseKind::FiniteCycle { points } => points[(nearest(points, x) + 1) % points.len()].clone(),
            BaseKind::CircleRotation { alpha } => vec![wrap(x[0] + alpha)],
            BaseKind::TorusTranslation { shift } => x.iter().zip(shift).map(|(a, s)| wrap(a + s)).collect(),
            BaseKind::Explicit { forward, .. } => forward(x),
        }
    }

    pub fn inverse(&self, x: &[f64]) -> Point {
        match &self.kind {
            BaseKind::FiniteCycle { points } => {
                let n = points.len();
                points[(nearest(points, x) + n - 1) % n].clone()
            }
            BaseKind::CircleRotation { alpha } => vec![wrap(x[0] - alpha)],
            BaseKind::TorusTranslation { shift } => x.iter().zip(shift).map(|(a, s)| wrap(a - s)).collect(),
            BaseKind::Explicit { inverse, .. } => inverse(x),
        }
    }

    /// `T^n x` for signed `n`. Rotations and translations use the closed form.
    pub fn iterate(&self, x: &[f64], n: i64) -> Point {
        match &self.kind {
            BaseKind::CircleRotation { alpha } => vec![wrap(x[0] + n as f64 * alpha)],
            BaseKind::TorusTranslation { shift } => x.iter().zip(shift).map(|(a, s)| wrap(a + n as f64 * s)).collect(),
            BaseKind::FiniteCycle { points } => {
                let len = points.len() as i64;
                points[(nearest(points, x) as i64 + n).rem_euclid(len) as usize].clone()
            }
            BaseKind::Explicit { .. } => {
                let mut y = x.to_vec();
                for _ in 0..n.unsigned_abs() {
                    y = if n > 0 { self.forward(&y) } else { self.inverse(&y) };
                }
                y
            }
        }
    }

    /// The base map `T^m` on the same samples.
    pub fn power(&self, m: usize) -> BaseSystem {
        let kind = match &self.kind {
            BaseKind::CircleRotation { alpha } => BaseKind::CircleRotation { alpha: wrap(alpha * m as f64) },
            BaseKind::TorusTranslation { shift } => {
                BaseKind::TorusTranslation { shift: shift.iter().map(|s| wrap(s * m as f64)).collect() }
            }
            _ => {
                let (f, b) = (self.clone(), self.clone());
                let label = format!("{} (power {m})", self.describe());
                BaseKind::Explicit {
                    forward: Arc::new(move |x: &[f64]| f.iterate(x, m as i64)),
                    inverse: Arc::new(move |x: &[f64]| b.iterate(x, -(m as i64))),
                    label,
                }
            }
        };
        BaseSystem { kind, samples: self.samples.clone() }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            BaseKind::FiniteCycle { points } => format!("cycle of length {}", points.len()),
            BaseKind::CircleRotation { alpha } => format!("circle rotation by {alpha}"),
            BaseKind::TorusTranslation { shift } => format!("torus translation by {shift:?}"),
            BaseKind::Explicit { label, .. } => label.clone(),
        }
    }
}

fn nearest(points: &[Point], x: &[f64]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, p) in points.iter().enumerate() {
        let d = dist(p, x);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}
