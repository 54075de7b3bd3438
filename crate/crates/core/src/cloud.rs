//! Point-cloud container and its bounding ball.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// A finite sample of points in `R^d`, all sharing one ambient dimension.
///
/// Construction validates dimensional consistency and finiteness only; the
/// oversampling requirement `n > d` is enforced by the operations that rely
/// on it (neighbor graphs and sphere fitting), so that small inputs such as a
/// two-point path remain representable.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<DVector<f64>>,
    dim: usize,
}

impl PointCloud {
    pub fn new(points: Vec<DVector<f64>>) -> Result<Self> {
        let dim = match points.first() {
            Some(p) => p.len(),
            None => return Err(Error::TooFewPoints { n: 0, dim: 0 }),
        };
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            for (c, v) in p.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { index: i, component: c });
                }
            }
        }
        Ok(Self { points, dim })
    }

    /// Build from rows of coordinates (row i = point i).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows.iter().map(|r| DVector::from_column_slice(r)).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &DVector<f64> {
        &self.points[i]
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn centroid(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.dim);
        for p in &self.points {
            c += p;
        }
        c / self.points.len() as f64
    }

    /// Centroid-centered enclosing ball: `(center, max distance to a point)`.
    ///
    /// Radius is 0 for a single-point cloud; callers that scale by the radius
    /// guard against that themselves.
    pub fn bounding_ball(&self) -> (DVector<f64>, f64) {
        let c = self.centroid();
        let r = self
            .points
            .iter()
            .map(|p| (p - &c).norm())
            .fold(0.0_f64, f64::max);
        (c, r)
    }

    /// Index of the lexicographically smallest point (component-wise order,
    /// ties by index). Used as the deterministic path start.
    pub fn lexicographic_min(&self) -> usize {
        let mut best = 0;
        for i in 1..self.points.len() {
            if lex_less(&self.points[i], &self.points[best]) {
                best = i;
            }
        }
        best
    }
}

fn lex_less(a: &DVector<f64>, b: &DVector<f64>) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}
