use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planar affine map on `(x, y) = (column, row)` coordinates, stored as a
/// 3x3 matrix whose last row is `(0, 0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub m: [[f64; 3]; 3],
}

impl Default for Transform {
    fn default() -> Self {
        Self::identity()
    }
}

impl Transform {
    pub fn identity() -> Self {
        Self::affine(1.0, 0.0, 0.0, 0.0, 1.0, 0.0)
    }

    /// `x' = a x + b y + c`, `y' = d x + e y + f`.
    pub fn affine(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> Self {
        Self {
            m: [[a, b, c], [d, e, f], [0.0, 0.0, 1.0]],
        }
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        Self::affine(1.0, 0.0, dx, 0.0, 1.0, dy)
    }

    /// Counter-clockwise rotation (as displayed, rows growing downwards)
    /// by `degrees` and uniform scaling about `(cx, cy)`.
    pub fn rotation_scale_about(degrees: f64, scale: f64, cx: f64, cy: f64) -> Self {
        let (s, c) = degrees.to_radians().sin_cos();
        // y axis points down, so a visual CCW turn is (x, y) -> (x cos + y sin, -x sin + y cos)
        let lin = Self::affine(scale * c, scale * s, 0.0, -scale * s, scale * c, 0.0);
        Self::translation(cx, cy).then_after(&lin).then_after(&Self::translation(-cx, -cy))
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn then_after(&self, other: &Transform) -> Transform {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        Transform { m }
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.m[0][0] * x + self.m[0][1] * y + self.m[0][2],
            self.m[1][0] * x + self.m[1][1] * y + self.m[1][2],
        )
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn inverse(&self) -> Result<Transform> {
        let det = self.det();
        if det.abs() <= 1e-6 || !det.is_finite() {
            return Err(Error::SingularTransform);
        }
        let [[a, b, c], [d, e, f], _] = self.m;
        let ia = e / det;
        let ib = -b / det;
        let id = -d / det;
        let ie = a / det;
        Ok(Transform::affine(ia, ib, -(ia * c + ib * f), id, ie, -(id * c + ie * f)))
    }

    /// Rotation angle of the linear part in degrees (visual CCW positive).
    pub fn rotation_degrees(&self) -> f64 {
        self.m[0][1].atan2(self.m[0][0]).to_degrees()
    }

    /// Geometric-mean scale of the linear part.
    pub fn scale(&self) -> f64 {
        self.det().abs().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Transform) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..3 {
                d = d.max((self.m[i][j] - other.m[i][j]).abs());
            }
        }
        d
    }
}
