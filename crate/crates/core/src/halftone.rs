//! Jarvis error diffusion, an inverse-halftoning reconstructor, and Arnold
//! cat map scrambling of binary digests.

use crate::error::{Error, Result};
use crate::filter::{gaussian_blur, sample_bilinear, Border};
use crate::imaging::{BitMatrix, Plane, Raster};
use crate::transforms::{lwt_haar_forward_with, lwt_haar_inverse, HaarScaling};

const THRESHOLD: f64 = 128.0;

/// Jarvis-Judice-Ninke weights as `(row offset, column offset, weight)`.
pub const JARVIS_WEIGHTS: [(usize, isize, f64); 12] = [
    (0, 1, 7.0),
    (0, 2, 5.0),
    (1, -2, 3.0),
    (1, -1, 5.0),
    (1, 0, 7.0),
    (1, 1, 5.0),
    (1, 2, 3.0),
    (2, -2, 1.0),
    (2, -1, 3.0),
    (2, 0, 5.0),
    (2, 1, 3.0),
    (2, 2, 1.0),
];
pub const JARVIS_DIVISOR: f64 = 48.0;

/// Raster-order error diffusion; errors pushed past the border are dropped.
pub fn jarvis_halftone(lum: &Plane) -> BitMatrix {
    let (h, w) = lum.dims();
    let mut work = lum.clone();
    let mut out = BitMatrix::zeros(h, w);
    for r in 0..h {
        for c in 0..w {
            let u = work[(r, c)];
            let on = u >= THRESHOLD;
            out.set(r, c, on);
            let err = u - if on { 255.0 } else { 0.0 };
            if err == 0.0 {
                continue;
            }
            for &(dr, dc, wt) in &JARVIS_WEIGHTS {
                let rr = r + dr;
                let cc = c as isize + dc;
                if rr < h && cc >= 0 && (cc as usize) < w {
                    work[(rr, cc as usize)] += err * wt / JARVIS_DIVISOR;
                }
            }
        }
    }
    out
}

/// Raster-order diffusion renders content displaced by roughly this many
/// (rows, columns) against the scan; measured by feature registration of
/// halftones against their sources.
pub const SCAN_LAG: (f64, f64) = (0.65, 0.3);

/// Continuous-tone estimate from a halftone: Gaussian low-pass,
/// soft-thresholding of the one-level wavelet details, then a sub-pixel
/// shift that undoes [`SCAN_LAG`].
pub fn inverse_halftone(h: &BitMatrix) -> Result<Plane> {
    Ok(undo_scan_lag(&denoise(h)?))
}

fn undo_scan_lag(p: &Plane) -> Plane {
    let (h, w) = p.dims();
    let (ymax, xmax) = (h.saturating_sub(1) as f64, w.saturating_sub(1) as f64);
    Plane::from_fn(h, w, |r, c| {
        let y = (r as f64 - SCAN_LAG.0).clamp(0.0, ymax);
        let x = (c as f64 - SCAN_LAG.1).clamp(0.0, xmax);
        sample_bilinear(p, y, x).unwrap_or(0.0)
    })
}

fn denoise(h: &BitMatrix) -> Result<Plane> {
    let smooth = gaussian_blur(&h.to_plane(), 7, 1.5, Border::Symmetric)?;
    let (rows, cols) = smooth.dims();
    if rows % 2 != 0 || cols % 2 != 0 {
        return Ok(smooth.clamp(0.0, 255.0));
    }
    let mut dec = lwt_haar_forward_with(&smooth, HaarScaling::Orthonormal)?;
    let mut mags: Vec<f64> = dec.cd.as_slice().iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| a.total_cmp(b));
    let t = if mags.is_empty() {
        0.0
    } else {
        mags[mags.len() / 2] / 0.6745
    };
    let soft = |v: f64| v.signum() * (v.abs() - t).max(0.0);
    dec.ch = dec.ch.map(soft);
    dec.cv = dec.cv.map(soft);
    dec.cd = dec.cd.map(soft);
    Ok(lwt_haar_inverse(&dec)?.clamp(0.0, 255.0))
}

/// Halftone every channel independently.
pub fn halftone_raster(img: &Raster) -> Vec<BitMatrix> {
    img.planes().iter().map(jarvis_halftone).collect()
}

/// Inverse-halftone a per-channel digest back to a raster.
pub fn inverse_halftone_raster(digest: &[BitMatrix]) -> Result<Raster> {
    let planes = digest.iter().map(inverse_halftone).collect::<Result<Vec<_>>>()?;
    Raster::from_planes(planes)
}

fn ensure_square(b: &BitMatrix) -> Result<usize> {
    let (h, w) = b.dims();
    if h != w || h == 0 {
        return Err(Error::InvalidDimensions {
            height: h,
            width: w,
            reason: "cat map needs a non-empty square matrix",
        });
    }
    Ok(h)
}

/// Apply `(x, y) -> (x + y, x + 2y) mod N` the given number of times.
pub fn acm_scramble(b: &BitMatrix, iterations: usize) -> Result<BitMatrix> {
    let n = ensure_square(b)?;
    let mut cur = b.clone();
    for _ in 0..iterations {
        let mut next = BitMatrix::zeros(n, n);
        for x in 0..n {
            for y in 0..n {
                next.set((x + y) % n, (x + 2 * y) % n, cur.get(x, y));
            }
        }
        cur = next;
    }
    Ok(cur)
}

/// Inverse of [`acm_scramble`] with the same iteration count.
pub fn acm_unscramble(b: &BitMatrix, iterations: usize) -> Result<BitMatrix> {
    let n = ensure_square(b)?;
    let mut cur = b.clone();
    for _ in 0..iterations {
        let mut next = BitMatrix::zeros(n, n);
        for x in 0..n {
            for y in 0..n {
                next.set(x, y, cur.get((x + y) % n, (x + 2 * y) % n));
            }
        }
        cur = next;
    }
    Ok(cur)
}
