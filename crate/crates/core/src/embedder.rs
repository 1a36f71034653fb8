//! Watermark generation, content-adaptive thresholds and DC-correlation
//! embedding in the diagonal detail band.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::halftone::halftone_raster;
use crate::imaging::{rgb_to_yuv, resize_nearest, yuv_to_rgb, BitMatrix, Plane, Raster};
use crate::metrics::{mse, psnr_from_mse, ssim, SsimParams};
use crate::transforms::{dct2, idct2, jpeg_roundtrip, lwt_haar_forward, lwt_haar_inverse};

/// JPEG quality used to probe local texture for the threshold map.
pub const DEFAULT_DIF_QUALITY: u32 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WatermarkKey(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    pub t1: f64,
    pub t2: f64,
}

impl Default for ThresholdParams {
    fn default() -> Self {
        Self { t1: 5.0, t2: 3.0 }
    }
}

impl ThresholdParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.t1 >= 0.0 && self.t2 >= 0.0 && (self.t1 > 0.0 || self.t2 > 0.0);
        if !ok || !self.t1.is_finite() || !self.t2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "thresholds must be non-negative and not both zero (t1={}, t2={})",
                self.t1, self.t2
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DcStats {
    pub mu: f64,
    pub sigma: f64,
}

/// Pseudorandom binary watermark derived from `key`.
pub fn generate_watermark(key: WatermarkKey, height: usize, width: usize) -> BitMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(key.0);
    BitMatrix::from_fn(height, width, |_, _| rng.random::<bool>())
}

fn require_multiple_of_8(h: usize, w: usize) -> Result<()> {
    if h == 0 || w == 0 || !h.is_multiple_of(8) || !w.is_multiple_of(8) {
        return Err(Error::InvalidDimensions {
            height: h,
            width: w,
            reason: "embedding needs dimensions that are non-zero multiples of 8",
        });
    }
    Ok(())
}

/// Mean absolute JPEG error per 8x8 block, replicated to one value per 4x4 block.
pub fn compute_dif(lum: &Plane, qf: u32) -> Result<Plane> {
    let (h, w) = lum.dims();
    require_multiple_of_8(h, w)?;
    let compressed = jpeg_roundtrip(lum, qf)?;
    let mut blocks = Plane::zeros(h / 8, w / 8);
    for r in 0..h {
        for c in 0..w {
            blocks[(r / 8, c / 8)] += (lum[(r, c)] - compressed[(r, c)]).abs();
        }
    }
    let blocks = blocks.map(|s| s / 64.0);
    resize_nearest(&blocks, h / 4, w / 4)
}

/// `T = T1 + T2 * Dif`, cellwise.
pub fn threshold_matrix(dif: &Plane, p: &ThresholdParams) -> Plane {
    dif.map(|d| p.t1 + p.t2 * d)
}

/// Mean and population standard deviation.
pub fn dc_stats(dc: &Plane) -> DcStats {
    let n = dc.as_slice().len().max(1) as f64;
    let mu = dc.as_slice().iter().sum::<f64>() / n;
    let var = dc.as_slice().iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
    DcStats {
        mu,
        sigma: var.sqrt(),
    }
}

/// Push a DC coefficient towards the side of the distribution that encodes `bit`.
pub fn correlate_dc(dc: f64, bit: bool, t: f64, stats: &DcStats) -> f64 {
    if bit {
        if dc < stats.sigma + stats.mu {
            dc + t
        } else {
            dc
        }
    } else if dc > -stats.sigma + stats.mu {
        dc - t
    } else {
        dc
    }
}

fn cd_block(cd: &Plane, i: usize, j: usize) -> Plane {
    Plane::from_fn(2, 2, |r, c| cd[(2 * i + r, 2 * j + c)])
}

/// 2x2 DCT coefficients of every 2x2 block of `cd`, row-major, as
/// `[dc, ac01, ac10, ac11]`.
pub fn cd_block_features(cd: &Plane) -> Result<Vec<[f64; 4]>> {
    let (h, w) = cd.dims();
    if h % 2 != 0 || w % 2 != 0 {
        return Err(Error::InvalidDimensions {
            height: h,
            width: w,
            reason: "detail band must have even dimensions",
        });
    }
    let mut out = Vec::with_capacity(h * w / 4);
    for i in 0..h / 2 {
        for j in 0..w / 2 {
            let c = dct2(&cd_block(cd, i, j))?;
            out.push([c[(0, 0)], c[(0, 1)], c[(1, 0)], c[(1, 1)]]);
        }
    }
    Ok(out)
}

/// DC coefficient of every 2x2 block of `cd`.
pub fn block_dc(cd: &Plane) -> Result<Plane> {
    let (h, w) = cd.dims();
    let feats = cd_block_features(cd)?;
    Plane::from_vec(h / 2, w / 2, feats.iter().map(|f| f[0]).collect())
}

/// Embed `wm` (one bit per 4x4 block) into a luminance plane.
pub fn embed_luminance(lum: &Plane, wm: &BitMatrix, p: &ThresholdParams, qf: u32) -> Result<Plane> {
    p.validate()?;
    let (h, w) = lum.dims();
    require_multiple_of_8(h, w)?;
    if wm.dims() != (h / 4, w / 4) {
        return Err(Error::DimensionMismatch {
            left: wm.dims(),
            right: (h / 4, w / 4),
        });
    }
    let t = threshold_matrix(&compute_dif(lum, qf)?, p);
    let mut dec = lwt_haar_forward(lum)?;
    let stats = dc_stats(&block_dc(&dec.cd)?);
    for i in 0..h / 4 {
        for j in 0..w / 4 {
            let mut c = dct2(&cd_block(&dec.cd, i, j))?;
            c[(0, 0)] = correlate_dc(c[(0, 0)], wm.get(i, j), t[(i, j)], &stats);
            let back = idct2(&c)?;
            for r in 0..2 {
                for cc in 0..2 {
                    dec.cd[(2 * i + r, 2 * j + cc)] = back[(r, cc)];
                }
            }
        }
    }
    lwt_haar_inverse(&dec)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedReport {
    pub psnr: f64,
    pub ssim: f64,
    pub mse: f64,
    pub seed: u64,
    pub t1: f64,
    pub t2: f64,
}

#[derive(Clone, Debug)]
pub struct Embedded {
    /// Real-valued watermarked image (quantize before saving).
    pub watermarked: Raster,
    pub watermark: BitMatrix,
    /// One halftone per channel of the cover.
    pub digest: Vec<BitMatrix>,
    /// Quality measured on the 8-bit quantized watermarked image.
    pub report: EmbedReport,
}

/// Full embedding: color split, texture-adaptive DC embedding, recombination,
/// digest generation.
pub fn embed(cover: &Raster, key: WatermarkKey, p: &ThresholdParams) -> Result<Embedded> {
    embed_with_quality(cover, key, p, DEFAULT_DIF_QUALITY)
}

pub fn embed_with_quality(cover: &Raster, key: WatermarkKey, p: &ThresholdParams, qf: u32) -> Result<Embedded> {
    let (h, w) = cover.dims();
    require_multiple_of_8(h, w)?;
    let watermark = generate_watermark(key, h / 4, w / 4);
    let watermarked = if cover.is_gray() {
        Raster::gray(embed_luminance(cover.plane(0), &watermark, p, qf)?)
    } else {
        let yuv = rgb_to_yuv(cover)?;
        let mut planes = yuv.into_planes();
        planes[0] = embed_luminance(&planes[0], &watermark, p, qf)?;
        yuv_to_rgb(&Raster::from_planes(planes)?)?
    };
    let stored = watermarked.quantized();
    let m = mse(cover, &stored)?;
    let report = EmbedReport {
        psnr: psnr_from_mse(m),
        ssim: ssim(cover, &stored, &SsimParams::default())?,
        mse: m,
        seed: key.0,
        t1: p.t1,
        t2: p.t2,
    };
    Ok(Embedded {
        watermarked,
        watermark,
        digest: halftone_raster(cover),
        report,
    })
}
