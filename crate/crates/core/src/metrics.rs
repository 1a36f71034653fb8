//! Image quality and watermark robustness measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{convolve_separable, gaussian_kernel, Border};
use crate::imaging::{ensure_same_dims, BitMatrix, Plane, Raster};

const PEAK: f64 = 255.0;

pub fn mse_plane(x: &Plane, y: &Plane) -> Result<f64> {
    ensure_same_dims(x.dims(), y.dims())?;
    let n = x.as_slice().len().max(1) as f64;
    Ok(x.as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n)
}

/// PSNR for a given MSE; `f64::INFINITY` when the MSE is zero.
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (PEAK * PEAK / mse).log10()
    }
}

pub fn psnr_plane(x: &Plane, y: &Plane) -> Result<f64> {
    Ok(psnr_from_mse(mse_plane(x, y)?))
}

/// Mean squared error averaged over all channels.
pub fn mse(x: &Raster, y: &Raster) -> Result<f64> {
    if x.channels() != y.channels() {
        return Err(Error::ChannelCount {
            expected: x.channels(),
            actual: y.channels(),
        });
    }
    let mut total = 0.0;
    for (a, b) in x.planes().iter().zip(y.planes()) {
        total += mse_plane(a, b)?;
    }
    Ok(total / x.channels() as f64)
}

pub fn psnr(x: &Raster, y: &Raster) -> Result<f64> {
    Ok(psnr_from_mse(mse(x, y)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SsimParams {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub window: usize,
    pub sigma: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        let c1 = (0.01 * PEAK).powi(2);
        let c2 = (0.03 * PEAK).powi(2);
        Self {
            c1,
            c2,
            c3: c2 / 2.0,
            window: 11,
            sigma: 1.5,
        }
    }
}

/// Mean SSIM over all windows lying fully inside the image.
///
/// Luminance, contrast and structure terms are evaluated separately so that
/// an arbitrary `c3` is honoured.
pub fn ssim_plane(x: &Plane, y: &Plane, p: &SsimParams) -> Result<f64> {
    ensure_same_dims(x.dims(), y.dims())?;
    if !(p.c1 > 0.0 && p.c2 > 0.0 && p.c3 > 0.0) {
        return Err(Error::InvalidParameter("SSIM stabilizers must be positive".into()));
    }
    let (h, w) = x.dims();
    let k = gaussian_kernel(p.window, p.sigma)?;
    let half = p.window / 2;
    if h < p.window || w < p.window {
        return Err(Error::InvalidDimensions {
            height: h,
            width: w,
            reason: "image smaller than the SSIM window",
        });
    }
    let blur = |q: &Plane| convolve_separable(q, &k, Border::Zero);
    let mx = blur(x);
    let my = blur(y);
    let xx = blur(&x.zip_map(x, |a, b| a * b)?);
    let yy = blur(&y.zip_map(y, |a, b| a * b)?);
    let xy = blur(&x.zip_map(y, |a, b| a * b)?);
    let mut total = 0.0;
    let mut count = 0usize;
    for r in half..h - half {
        for c in half..w - half {
            let (ux, uy) = (mx[(r, c)], my[(r, c)]);
            let vx = (xx[(r, c)] - ux * ux).max(0.0);
            let vy = (yy[(r, c)] - uy * uy).max(0.0);
            let cov = xy[(r, c)] - ux * uy;
            let (sx, sy) = (vx.sqrt(), vy.sqrt());
            let l = (2.0 * ux * uy + p.c1) / (ux * ux + uy * uy + p.c1);
            let con = (2.0 * sx * sy + p.c2) / (vx + vy + p.c2);
            let s = (cov + p.c3) / (sx * sy + p.c3);
            total += l * con * s;
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// SSIM on luminance (color inputs are converted first).
pub fn ssim(x: &Raster, y: &Raster, p: &SsimParams) -> Result<f64> {
    ssim_plane(&x.luminance(), &y.luminance(), p)
}

/// Literal normalized correlation: matching ones over the cell count.
pub fn nc(w: &BitMatrix, w_prime: &BitMatrix) -> Result<f64> {
    ensure_same_dims(w.dims(), w_prime.dims())?;
    let hits = w
        .as_slice()
        .iter()
        .zip(w_prime.as_slice())
        .filter(|(a, b)| **a == 1 && **b == 1)
        .count();
    Ok(hits as f64 / w.len() as f64)
}

/// Cosine-normalized correlation; 1 for a perfect extraction.
pub fn nc_normalized(w: &BitMatrix, w_prime: &BitMatrix) -> Result<f64> {
    ensure_same_dims(w.dims(), w_prime.dims())?;
    let hits = nc(w, w_prime)? * w.len() as f64;
    let denom = (w.count_ones() as f64 * w_prime.count_ones() as f64).sqrt();
    Ok(if denom == 0.0 { 0.0 } else { hits / denom })
}

pub fn ber(w: &BitMatrix, w_prime: &BitMatrix) -> Result<f64> {
    Ok(w.xor(w_prime)?.count_ones() as f64 / w.len() as f64)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn between(predicted: &BitMatrix, truth: &BitMatrix) -> Result<Self> {
        ensure_same_dims(predicted.dims(), truth.dims())?;
        let mut c = Confusion::default();
        for (&p, &t) in predicted.as_slice().iter().zip(truth.as_slice()) {
            match (p == 1, t == 1) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        Ok(c)
    }

    /// Percentage; `None` when there are no positives.
    pub fn tpr(&self) -> Option<f64> {
        let pos = self.tp + self.fn_;
        (pos > 0).then(|| 100.0 * self.tp as f64 / pos as f64)
    }

    pub fn fpr(&self) -> Option<f64> {
        let neg = self.fp + self.tn;
        (neg > 0).then(|| 100.0 * self.fp as f64 / neg as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn textured(h: usize, w: usize) -> Plane {
        Plane::from_fn(h, w, |r, c| {
            (128.0 + 70.0 * ((r as f64) / 5.0).sin() * ((c as f64) / 8.0).cos() + ((r * 31 + c * 17) % 23) as f64)
                .clamp(0.0, 255.0)
        })
    }

    #[test]
    fn identical_images() {
        let x = textured(32, 32);
        assert_eq!(mse_plane(&x, &x).unwrap(), 0.0);
        assert!(psnr_plane(&x, &x).unwrap().is_infinite());
        assert!((ssim_plane(&x, &x, &SsimParams::default()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_offset_psnr() {
        let x = textured(16, 16);
        let y = x.map(|v| v + 1.0);
        assert!((mse_plane(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        let expected = 20.0 * 255f64.log10();
        assert!((psnr_plane(&x, &y).unwrap() - expected).abs() < 1e-9);
        assert!((expected - 48.13).abs() < 0.01);
    }

    #[test]
    fn mse_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Plane::from_fn(20, 30, |_, _| rng.random_range(0.0..255.0));
        let y = Plane::from_fn(20, 30, |_, _| rng.random_range(0.0..255.0));
        let mut s = 0.0;
        for r in 0..20 {
            for c in 0..30 {
                s += (x[(r, c)] - y[(r, c)]).powi(2);
            }
        }
        assert!((mse_plane(&x, &y).unwrap() - s / 600.0).abs() < 1e-9);
        assert!(mse_plane(&x, &Plane::zeros(20, 31)).is_err());
    }

    #[test]
    fn ssim_inversion_and_noise() {
        let x = textured(96, 96);
        let p = SsimParams::default();
        let inv = x.map(|v| 255.0 - v);
        assert!(ssim_plane(&x, &inv, &p).unwrap() < 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = Normal::new(0.0, 5.0).unwrap();
        let noisy = Plane::from_fn(96, 96, |r, c| x[(r, c)] + n.sample(&mut rng));
        let s = ssim_plane(&x, &noisy, &p).unwrap();
        assert!(s > 0.8 && s < 1.0, "{s}");
        let s2 = ssim_plane(&noisy, &x, &p).unwrap();
        assert!((s - s2).abs() < 1e-12);
    }

    #[test]
    fn nc_ber_examples() {
        let ones = BitMatrix::ones(8, 8);
        assert_eq!(nc(&ones, &ones).unwrap(), 1.0);
        assert_eq!(ber(&ones, &ones).unwrap(), 0.0);
        assert_eq!(ber(&ones, &ones.complement()).unwrap(), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = BitMatrix::from_fn(128, 128, |_, _| rng.random_bool(0.5));
        let lit = nc(&w, &w).unwrap();
        assert!((lit - 0.5).abs() < 0.02);
        assert!((lit - w.count_ones() as f64 / w.len() as f64).abs() < 1e-15);
        assert!((nc_normalized(&w, &w).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn confusion_rates() {
        let truth = BitMatrix::from_bits(1, 10, vec![1; 10]).unwrap();
        let pred = BitMatrix::from_bits(1, 10, vec![1, 1, 1, 1, 1, 1, 1, 1, 1, 0]).unwrap();
        let c = Confusion::between(&pred, &truth).unwrap();
        assert_eq!(c.tpr(), Some(90.0));
        assert_eq!(c.fpr(), None);
        let z = BitMatrix::zeros(1, 10);
        assert_eq!(Confusion::between(&z, &z).unwrap().tpr(), None);
    }
}
