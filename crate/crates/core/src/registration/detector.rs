use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::integral::IntegralImage;
use crate::imaging::Plane;

/// Weight that balances the box-filtered `D_xy` against the Gaussian one.
pub const DXY_WEIGHT: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    pub octaves: usize,
    pub intervals: usize,
    pub init_sample: usize,
    /// Hessian threshold on images scaled to `[0, 1]`.
    pub threshold: f64,
    /// Keep only the strongest responses.
    pub max_points: usize,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            octaves: 4,
            intervals: 4,
            init_sample: 2,
            threshold: 4e-4,
            max_points: 1500,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterestPoint {
    /// Column coordinate.
    pub x: f64,
    /// Row coordinate.
    pub y: f64,
    pub scale: f64,
    pub orientation: f64,
    pub laplacian_positive: bool,
    pub response: f64,
}

/// Approximated Hessian determinant.
pub fn hessian_response(dxx: f64, dyy: f64, dxy: f64) -> f64 {
    dxx * dyy - (DXY_WEIGHT * dxy).powi(2)
}

struct Layer {
    size: usize,
    step: usize,
    rows: usize,
    cols: usize,
    response: Vec<f64>,
    laplacian: Vec<bool>,
}

impl Layer {
    fn build(ii: &IntegralImage, size: usize, step: usize) -> Self {
        let rows = ii.height() / step;
        let cols = ii.width() / step;
        let l = (size / 3) as isize;
        let b = ((size - 1) / 2) as isize;
        let w = size as isize;
        let inv_area = 1.0 / (size * size) as f64;
        let mut response = vec![0.0; rows * cols];
        let mut laplacian = vec![false; rows * cols];
        for i in 0..rows {
            let r = (i * step) as isize;
            for j in 0..cols {
                let c = (j * step) as isize;
                let dxx = ii.box_sum(r - l + 1, c - b, 2 * l - 1, w)
                    - 3.0 * ii.box_sum(r - l + 1, c - l / 2, 2 * l - 1, l);
                let dyy = ii.box_sum(r - b, c - l + 1, w, 2 * l - 1)
                    - 3.0 * ii.box_sum(r - l / 2, c - l + 1, l, 2 * l - 1);
                let dxy = ii.box_sum(r - l, c + 1, l, l) + ii.box_sum(r + 1, c - l, l, l)
                    - ii.box_sum(r - l, c - l, l, l)
                    - ii.box_sum(r + 1, c + 1, l, l);
                let (dxx, dyy, dxy) = (dxx * inv_area, dyy * inv_area, dxy * inv_area);
                response[i * cols + j] = hessian_response(dxx, dyy, dxy);
                laplacian[i * cols + j] = dxx + dyy >= 0.0;
            }
        }
        Self {
            size,
            step,
            rows,
            cols,
            response,
            laplacian,
        }
    }

    #[inline]
    fn at(&self, i: isize, j: isize) -> f64 {
        self.response[i as usize * self.cols + j as usize]
    }
}

fn filter_size(octave: usize, interval: usize) -> usize {
    3 * ((1 << (octave + 1)) * (interval + 1) + 1)
}

/// Fast-Hessian blob detection on a luminance plane in `[0, 255]`.
pub fn detect(lum: &Plane, p: &DetectorParams) -> Vec<InterestPoint> {
    let ii = IntegralImage::new(&lum.map(|v| v / 255.0));
    let mut points = Vec::new();
    for o in 0..p.octaves {
        let step = p.init_sample << o;
        if ii.height() / step < 3 || ii.width() / step < 3 {
            break;
        }
        let layers: Vec<Layer> = (0..p.intervals)
            .map(|i| Layer::build(&ii, filter_size(o, i), step))
            .collect();
        for k in 1..layers.len().saturating_sub(1) {
            let (b, m, t) = (&layers[k - 1], &layers[k], &layers[k + 1]);
            let border = ((t.size + 1) / (2 * t.step)) as isize;
            for i in border + 1..m.rows as isize - border - 1 {
                for j in border + 1..m.cols as isize - border - 1 {
                    let v = m.at(i, j);
                    if v <= p.threshold || !is_local_max(v, b, m, t, i, j) {
                        continue;
                    }
                    if let Some(pt) = interpolate(b, m, t, i, j) {
                        points.push(pt);
                    }
                }
            }
        }
    }
    points.sort_by(|a, b| b.response.total_cmp(&a.response));
    points.truncate(p.max_points);
    points
}

fn is_local_max(v: f64, b: &Layer, m: &Layer, t: &Layer, i: isize, j: isize) -> bool {
    for layer in [b, m, t] {
        for di in -1..=1 {
            for dj in -1..=1 {
                if std::ptr::eq(layer, m) && di == 0 && dj == 0 {
                    continue;
                }
                if layer.at(i + di, j + dj) >= v {
                    return false;
                }
            }
        }
    }
    true
}

fn interpolate(b: &Layer, m: &Layer, t: &Layer, i: isize, j: isize) -> Option<InterestPoint> {
    let v = m.at(i, j);
    let dx = (m.at(i, j + 1) - m.at(i, j - 1)) / 2.0;
    let dy = (m.at(i + 1, j) - m.at(i - 1, j)) / 2.0;
    let ds = (t.at(i, j) - b.at(i, j)) / 2.0;
    let dxx = m.at(i, j + 1) + m.at(i, j - 1) - 2.0 * v;
    let dyy = m.at(i + 1, j) + m.at(i - 1, j) - 2.0 * v;
    let dss = t.at(i, j) + b.at(i, j) - 2.0 * v;
    let dxy = (m.at(i + 1, j + 1) - m.at(i + 1, j - 1) - m.at(i - 1, j + 1) + m.at(i - 1, j - 1)) / 4.0;
    let dxs = (t.at(i, j + 1) - t.at(i, j - 1) - b.at(i, j + 1) + b.at(i, j - 1)) / 4.0;
    let dys = (t.at(i + 1, j) - t.at(i - 1, j) - b.at(i + 1, j) + b.at(i - 1, j)) / 4.0;
    let h = Matrix3::new(dxx, dxy, dxs, dxy, dyy, dys, dxs, dys, dss);
    let off = -(h.try_inverse()? * Vector3::new(dx, dy, ds));
    // A blob centred between two samples yields offsets of about 0.5 at
    // both; allow up to one sample so such blobs are not lost.
    if off.iter().any(|o| !o.is_finite() || o.abs() > 1.0) {
        return None;
    }
    let step = m.step as f64;
    let filter_step = (m.size - b.size) as f64;
    Some(InterestPoint {
        x: (j as f64 + off[0]) * step,
        y: (i as f64 + off[1]) * step,
        scale: 1.2 / 9.0 * (m.size as f64 + off[2] * filter_step),
        orientation: 0.0,
        laplacian_positive: m.laplacian[i as usize * m.cols + j as usize],
        response: v,
    })
}
