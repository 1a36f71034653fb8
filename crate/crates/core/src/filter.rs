//! Small spatial-filtering helpers shared by halftoning, metrics and attacks.

use crate::error::{Error, Result};
use crate::imaging::Plane;

/// How samples outside the plane are synthesized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Border {
    /// Mirror including the edge sample (`cba|abc|cba`).
    Symmetric,
    Replicate,
    Zero,
}

/// Normalized 1-D Gaussian of odd length `size`.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Vec<f64>> {
    if size == 0 || size.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("kernel size must be odd, got {size}")));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    let half = (size / 2) as f64;
    let mut k: Vec<f64> = (0..size)
        .map(|i| {
            let x = i as f64 - half;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    Ok(k)
}

fn reflect(i: isize, n: usize) -> Option<usize> {
    let n = n as isize;
    if n == 1 {
        return Some(0);
    }
    let period = 2 * n;
    let mut j = i.rem_euclid(period);
    if j >= n {
        j = period - 1 - j;
    }
    Some(j as usize)
}

fn resolve(i: isize, n: usize, border: Border) -> Option<usize> {
    if (0..n as isize).contains(&i) {
        return Some(i as usize);
    }
    match border {
        Border::Symmetric => reflect(i, n),
        Border::Replicate => Some(i.clamp(0, n as isize - 1) as usize),
        Border::Zero => None,
    }
}

/// Correlate with a separable kernel (`kernel` applied along rows and columns).
pub fn convolve_separable(plane: &Plane, kernel: &[f64], border: Border) -> Plane {
    let (h, w) = plane.dims();
    let half = (kernel.len() / 2) as isize;
    let mut tmp = Plane::zeros(h, w);
    for r in 0..h {
        for c in 0..w {
            let mut s = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                if let Some(cc) = resolve(c as isize + k as isize - half, w, border) {
                    s += kv * plane[(r, cc)];
                }
            }
            tmp[(r, c)] = s;
        }
    }
    let mut out = Plane::zeros(h, w);
    for r in 0..h {
        for c in 0..w {
            let mut s = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                if let Some(rr) = resolve(r as isize + k as isize - half, h, border) {
                    s += kv * tmp[(rr, c)];
                }
            }
            out[(r, c)] = s;
        }
    }
    out
}

/// Gaussian blur with an odd `size`×`size` window.
pub fn gaussian_blur(plane: &Plane, size: usize, sigma: f64, border: Border) -> Result<Plane> {
    Ok(convolve_separable(plane, &gaussian_kernel(size, sigma)?, border))
}

/// Median over an odd `size`×`size` window.
pub fn median_filter(plane: &Plane, size: usize, border: Border) -> Result<Plane> {
    if size == 0 || size.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("window size must be odd, got {size}")));
    }
    let (h, w) = plane.dims();
    let half = (size / 2) as isize;
    let mut window = Vec::with_capacity(size * size);
    Ok(Plane::from_fn(h, w, |r, c| {
        window.clear();
        for dr in -half..=half {
            for dc in -half..=half {
                let rr = resolve(r as isize + dr, h, border);
                let cc = resolve(c as isize + dc, w, border);
                window.push(match (rr, cc) {
                    (Some(rr), Some(cc)) => plane[(rr, cc)],
                    _ => 0.0,
                });
            }
        }
        window.sort_by(|a, b| a.total_cmp(b));
        window[window.len() / 2]
    }))
}

/// Bilinear sample at real coordinates; `None` outside `[0, h-1]×[0, w-1]`.
pub fn sample_bilinear(plane: &Plane, y: f64, x: f64) -> Option<f64> {
    let (h, w) = plane.dims();
    const EPS: f64 = 1e-9;
    if !(y >= -EPS && x >= -EPS && y <= (h - 1) as f64 + EPS && x <= (w - 1) as f64 + EPS) {
        return None;
    }
    let y = y.clamp(0.0, (h - 1) as f64);
    let x = x.clamp(0.0, (w - 1) as f64);
    let r0 = y.floor() as usize;
    let c0 = x.floor() as usize;
    let r1 = (r0 + 1).min(h - 1);
    let c1 = (c0 + 1).min(w - 1);
    let fy = y - r0 as f64;
    let fx = x - c0 as f64;
    let top = plane[(r0, c0)] * (1.0 - fx) + plane[(r0, c1)] * fx;
    let bottom = plane[(r1, c0)] * (1.0 - fx) + plane[(r1, c1)] * fx;
    Some(top * (1.0 - fy) + bottom * fy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_is_normalized_and_symmetric() {
        let k = gaussian_kernel(7, 1.5).unwrap();
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..3 {
            assert!((k[i] - k[6 - i]).abs() < 1e-15);
        }
        assert!(gaussian_kernel(4, 1.0).is_err());
        assert!(gaussian_kernel(3, 0.0).is_err());
    }

    #[test]
    fn blur_keeps_constants() {
        let p = Plane::filled(9, 11, 42.0);
        for b in [Border::Symmetric, Border::Replicate] {
            let out = gaussian_blur(&p, 7, 2.0, b).unwrap();
            assert!(out.as_slice().iter().all(|v| (v - 42.0).abs() < 1e-9));
        }
    }

    #[test]
    fn reflect_indices() {
        assert_eq!(reflect(-1, 5), Some(0));
        assert_eq!(reflect(-2, 5), Some(1));
        assert_eq!(reflect(5, 5), Some(4));
        assert_eq!(reflect(6, 5), Some(3));
    }

    #[test]
    fn median_removes_impulse() {
        let mut p = Plane::filled(5, 5, 10.0);
        p[(2, 2)] = 255.0;
        let out = median_filter(&p, 3, Border::Symmetric).unwrap();
        assert!(out.as_slice().iter().all(|&v| v == 10.0));
    }

    #[test]
    fn bilinear_interpolates_and_bounds() {
        let p = Plane::from_vec(2, 2, vec![0.0, 10.0, 20.0, 30.0]).unwrap();
        assert_eq!(sample_bilinear(&p, 0.5, 0.5), Some(15.0));
        assert_eq!(sample_bilinear(&p, 1.0, 1.0), Some(30.0));
        assert_eq!(sample_bilinear(&p, 1.5, 0.0), None);
    }
}
