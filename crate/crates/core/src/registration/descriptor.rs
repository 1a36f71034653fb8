use std::f64::consts::PI;

use super::detector::InterestPoint;
use super::integral::IntegralImage;

pub const DESCRIPTOR_LEN: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct Descriptor {
    pub point: InterestPoint,
    pub vector: [f64; DESCRIPTOR_LEN],
}

#[inline]
fn haar_x(ii: &IntegralImage, row: isize, col: isize, s: isize) -> f64 {
    ii.box_sum(row - s / 2, col, s, s / 2) - ii.box_sum(row - s / 2, col - s / 2, s, s / 2)
}

#[inline]
fn haar_y(ii: &IntegralImage, row: isize, col: isize, s: isize) -> f64 {
    ii.box_sum(row, col - s / 2, s / 2, s) - ii.box_sum(row - s / 2, col - s / 2, s / 2, s)
}

fn gaussian(x: f64, y: f64, sigma: f64) -> f64 {
    (-(x * x + y * y) / (2.0 * sigma * sigma)).exp() / (2.0 * PI * sigma * sigma)
}

/// Dominant orientation from Gaussian-weighted Haar responses within 6s.
pub fn orientation(ii: &IntegralImage, p: &InterestPoint) -> f64 {
    let s = p.scale;
    let haar_size = (4.0 * s).round().max(2.0) as isize;
    let mut samples = Vec::with_capacity(113);
    for i in -6i32..=6 {
        for j in -6i32..=6 {
            if i * i + j * j >= 36 {
                continue;
            }
            let row = (p.y + j as f64 * s).round() as isize;
            let col = (p.x + i as f64 * s).round() as isize;
            let g = gaussian(i as f64, j as f64, 2.5);
            let dx = g * haar_x(ii, row, col, haar_size);
            let dy = g * haar_y(ii, row, col, haar_size);
            samples.push((dy.atan2(dx), dx, dy));
        }
    }
    let mut best = (0.0, 0.0);
    let mut best_mag = -1.0;
    let mut start = 0.0;
    while start < 2.0 * PI {
        let end = start + PI / 3.0;
        let (mut sx, mut sy) = (0.0, 0.0);
        for &(ang, dx, dy) in &samples {
            let a = ang.rem_euclid(2.0 * PI);
            let inside = if end < 2.0 * PI {
                a >= start && a < end
            } else {
                a >= start || a < end - 2.0 * PI
            };
            if inside {
                sx += dx;
                sy += dy;
            }
        }
        let mag = sx * sx + sy * sy;
        if mag > best_mag {
            best_mag = mag;
            best = (sx, sy);
        }
        start += 0.15;
    }
    best.1.atan2(best.0)
}

/// Whether the 20s descriptor window (rotated) lies inside the image.
fn inside(ii: &IntegralImage, p: &InterestPoint) -> bool {
    let reach = 10.0 * std::f64::consts::SQRT_2 * p.scale + 2.0 * p.scale + 1.0;
    p.x - reach >= 0.0
        && p.y - reach >= 0.0
        && p.x + reach < ii.width() as f64
        && p.y + reach < ii.height() as f64
}

fn describe_one(ii: &IntegralImage, p: &InterestPoint) -> [f64; DESCRIPTOR_LEN] {
    let s = p.scale;
    let (sin, cos) = p.orientation.sin_cos();
    let haar_size = (2.0 * s).round().max(2.0) as isize;
    let mut v = [0.0; DESCRIPTOR_LEN];
    for sub_y in 0..4 {
        for sub_x in 0..4 {
            let mut acc = [0.0; 4];
            for k in 0..5 {
                for l in 0..5 {
                    // sample offset in the keypoint frame, in units of s
                    let u = (sub_x * 5 + l) as f64 - 9.5;
                    let w = (sub_y * 5 + k) as f64 - 9.5;
                    let col = p.x + s * (u * cos - w * sin);
                    let row = p.y + s * (u * sin + w * cos);
                    let (ri, ci) = (row.round() as isize, col.round() as isize);
                    let rx = haar_x(ii, ri, ci, haar_size);
                    let ry = haar_y(ii, ri, ci, haar_size);
                    let g = gaussian(u, w, 3.3);
                    // rotate responses into the keypoint frame
                    let dx = g * (rx * cos + ry * sin);
                    let dy = g * (-rx * sin + ry * cos);
                    acc[0] += dx;
                    acc[1] += dx.abs();
                    acc[2] += dy;
                    acc[3] += dy.abs();
                }
            }
            let base = (sub_y * 4 + sub_x) * 4;
            v[base..base + 4].copy_from_slice(&acc);
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// Assign orientations and build unit-norm descriptors; points whose window
/// leaves the image are dropped. Returns the descriptors and the drop count.
pub fn describe(ii: &IntegralImage, points: &[InterestPoint]) -> (Vec<Descriptor>, usize) {
    let mut out = Vec::with_capacity(points.len());
    let mut dropped = 0;
    for p in points {
        if !inside(ii, p) {
            dropped += 1;
            continue;
        }
        let mut point = *p;
        point.orientation = orientation(ii, &point);
        let vector = describe_one(ii, &point);
        if vector.iter().all(|&x| x == 0.0) {
            dropped += 1;
            continue;
        }
        out.push(Descriptor { point, vector });
    }
    (out, dropped)
}

pub fn distance(a: &Descriptor, b: &Descriptor) -> f64 {
    a.vector
        .iter()
        .zip(&b.vector)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
