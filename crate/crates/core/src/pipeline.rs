//! End-to-end authentication, tampering helpers and ground-truth bookkeeping.

use serde::{Deserialize, Serialize};

use crate::attacks::{chain_geometry, surviving_region, Attack};
use crate::authenticator::{block_truth, detect, postprocess, recover, score, Score, TamperMap, BLOCK};
use crate::embedder::{block_dc, generate_watermark, WatermarkKey};
use crate::error::{Error, Result};
use crate::fnn::{extract_watermark, ExtractConfig, RunSummary};
use crate::halftone::{acm_scramble, acm_unscramble, inverse_halftone_raster};
use crate::imaging::{BitMatrix, Plane, Raster};
use crate::metrics::{ber, nc, nc_normalized, psnr};
use crate::registration::{
    coverage, estimate_transform, lattice_linear_part, warp, warp_plane, RegistrationParams, RegistrationStatus, Transform,
};
use crate::transforms::lwt_haar_forward;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuthConfig {
    pub registration: RegistrationParams,
    pub extract: ExtractConfig,
    /// Skip feature registration and use the suspect as is.
    pub skip_registration: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegistrationSummary {
    pub transform: Transform,
    pub rotation_degrees: f64,
    pub scale: f64,
    pub matches: usize,
    pub inliers: usize,
    /// Watermark agreement of the chosen lattice alignment, when the
    /// estimate was snapped onto the pixel lattice.
    pub lattice_agreement: Option<f64>,
    /// Reason registration fell back to the identity, if it did.
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuthReport {
    pub registration: RegistrationSummary,
    pub nc: f64,
    pub nc_normalized: f64,
    pub ber: f64,
    pub raw_tampered_blocks: usize,
    pub tampered_blocks: usize,
    /// Blocks outside the registered suspect's footprint.
    pub lost_blocks: usize,
    pub psnr_registered_vs_digest: f64,
    pub extraction: Vec<RunSummary>,
    pub score: Option<Score>,
}

#[derive(Clone, Debug)]
pub struct Authentication {
    pub registered: Raster,
    pub digest_image: Raster,
    pub expected: BitMatrix,
    pub extracted: BitMatrix,
    pub raw_map: BitMatrix,
    /// Post-processed map, with lost blocks included.
    pub map: TamperMap,
    pub recovered: Raster,
    pub report: AuthReport,
}

/// Luminance used by the embedder: the plane itself for gray, BT.601 Y otherwise.
fn embedding_luminance(img: &Raster) -> Plane {
    img.luminance()
}

/// Fraction of blocks whose detail-band DC lies on the side of the mean
/// that the expected watermark bit asks for.
pub fn watermark_agreement(lum: &Plane, expected: &BitMatrix) -> Result<f64> {
    let dc = block_dc(&lwt_haar_forward(lum)?.cd)?;
    if dc.dims() != expected.dims() {
        return Err(Error::DimensionMismatch {
            left: dc.dims(),
            right: expected.dims(),
        });
    }
    let mu = dc.mean();
    let hits = dc
        .as_slice()
        .iter()
        .zip(expected.as_slice())
        .filter(|&(&v, &b)| (v > mu) == (b == 1))
        .count();
    Ok(hits as f64 / expected.len() as f64)
}

/// Integer offsets tried around a lattice estimate.
pub const LATTICE_SEARCH_RADIUS: i32 = 2;

struct Located {
    transform: Transform,
    status: RegistrationStatus,
    agreement: Option<f64>,
}

// Feature registration, then (for axis-permutation estimates) an integer
// translation search scored by watermark agreement. Features on the
// inverse-halftoned digest sit a fraction of a pixel off the true content,
// so the feature translation alone cannot pick the right lattice offset.
fn locate(suspect: &Plane, reference: &Plane, expected: &BitMatrix, p: &RegistrationParams) -> Result<Located> {
    let (h, w) = reference.dims();
    let free = RegistrationParams {
        snap_tolerance: None,
        ..*p
    };
    let (base, status) = match estimate_transform(reference, suspect, &free) {
        Ok(e) => (e.transform, RegistrationStatus::Registered(e)),
        Err(e) => {
            log::warn!("registration skipped: {e}");
            (Transform::identity(), RegistrationStatus::Skipped(e.to_string()))
        }
    };
    let registered = matches!(status, RegistrationStatus::Registered(_));
    let perm = p
        .snap_tolerance
        .filter(|_| registered || suspect.dims() == (h, w))
        .and_then(|tol| lattice_linear_part(&base, tol));
    let Some(perm) = perm else {
        return Ok(Located {
            transform: base,
            status,
            agreement: None,
        });
    };
    let (cx, cy) = (base.m[0][2].round(), base.m[1][2].round());
    let mut best: Option<(f64, Transform)> = None;
    for dy in -LATTICE_SEARCH_RADIUS..=LATTICE_SEARCH_RADIUS {
        for dx in -LATTICE_SEARCH_RADIUS..=LATTICE_SEARCH_RADIUS {
            let t = Transform::affine(perm[0], perm[1], cx + dx as f64, perm[2], perm[3], cy + dy as f64);
            let a = watermark_agreement(&warp_plane(suspect, &t, h, w)?, expected)?;
            if best.as_ref().is_none_or(|(b, _)| a > *b) {
                best = Some((a, t));
            }
        }
    }
    let (agreement, transform) = best.expect("search window is non-empty");
    log::debug!("lattice alignment {:?} with agreement {agreement:.3}", transform.m);
    Ok(Located {
        transform,
        status,
        agreement: Some(agreement),
    })
}

/// Run registration, watermark extraction, tamper localisation and recovery.
///
/// `truth` (block level) is optional and only used for scoring.
pub fn authenticate(
    suspect: &Raster,
    digest: &[BitMatrix],
    key: WatermarkKey,
    cfg: &AuthConfig,
    truth: Option<&BitMatrix>,
) -> Result<Authentication> {
    let digest_image = inverse_halftone_raster(digest)?;
    let reference = embedding_luminance(&digest_image);
    let (h, w) = reference.dims();
    if h % 8 != 0 || w % 8 != 0 || h == 0 || w == 0 {
        return Err(Error::InvalidDimensions {
            height: h,
            width: w,
            reason: "digest dimensions must be non-zero multiples of 8",
        });
    }
    if suspect.channels() != digest_image.channels() {
        return Err(Error::ChannelCount {
            expected: digest_image.channels(),
            actual: suspect.channels(),
        });
    }

    let expected = generate_watermark(key, h / BLOCK, w / BLOCK);
    let located = if cfg.skip_registration && suspect.dims() == (h, w) {
        Located {
            transform: Transform::identity(),
            status: RegistrationStatus::Skipped("disabled".into()),
            agreement: None,
        }
    } else {
        locate(&embedding_luminance(suspect), &reference, &expected, &cfg.registration)?
    };
    let transform = located.transform;
    let registered = warp(suspect, &transform, h, w)?;
    let (sh, sw) = suspect.dims();
    let footprint = coverage(sh, sw, &transform, h, w)?;
    let lost = block_truth(&footprint.complement());

    let lum = embedding_luminance(&registered);
    let cd = lwt_haar_forward(&lum)?.cd;
    let extraction = extract_watermark(&cd, &expected, &cfg.extract)?;
    let extracted = extraction.bits;

    let raw_map = detect(&expected, &extracted)?;
    let cleaned = postprocess(&raw_map);
    let block = BitMatrix::from_fn(h / BLOCK, w / BLOCK, |r, c| cleaned.get(r, c) || lost.get(r, c));
    let map = TamperMap::from_block(block);
    let recovered = recover(&registered, &map.pixel, &digest_image)?;

    let (matches, inliers, skipped) = match &located.status {
        RegistrationStatus::Registered(e) => (e.matches, e.inliers, None),
        RegistrationStatus::Skipped(why) => (0, 0, Some(why.clone())),
    };
    let registration = RegistrationSummary {
        transform,
        rotation_degrees: transform.rotation_degrees(),
        scale: transform.scale(),
        matches,
        inliers,
        lattice_agreement: located.agreement,
        skipped,
    };
    let report = AuthReport {
        registration,
        nc: nc(&expected, &extracted)?,
        nc_normalized: nc_normalized(&expected, &extracted)?,
        ber: ber(&expected, &extracted)?,
        raw_tampered_blocks: raw_map.count_ones(),
        tampered_blocks: map.block.count_ones(),
        lost_blocks: lost.count_ones(),
        psnr_registered_vs_digest: psnr(&registered.quantized(), &digest_image.quantized())?,
        extraction: extraction.runs,
        score: truth.map(|t| score(&map.block, t)).transpose()?,
    };
    Ok(Authentication {
        registered,
        digest_image,
        expected,
        extracted,
        raw_map,
        map,
        recovered,
        report,
    })
}

/// Scramble every channel of a digest with the cat map.
pub fn scramble_digest(digest: &[BitMatrix], iterations: usize) -> Result<Vec<BitMatrix>> {
    digest.iter().map(|b| acm_scramble(b, iterations)).collect()
}

pub fn unscramble_digest(digest: &[BitMatrix], iterations: usize) -> Result<Vec<BitMatrix>> {
    digest.iter().map(|b| acm_unscramble(b, iterations)).collect()
}

/// Digest channels packed into a `{0, 255}` raster for storage.
pub fn digest_to_raster(digest: &[BitMatrix]) -> Result<Raster> {
    Raster::from_planes(digest.iter().map(BitMatrix::to_plane).collect())
}

/// A tampered image together with its pixel-level ground truth.
#[derive(Clone, Debug)]
pub struct Tampered {
    pub image: Raster,
    pub truth: BitMatrix,
}

/// Pixels that differ in any channel.
pub fn changed_pixels(before: &Raster, after: &Raster) -> Result<BitMatrix> {
    if before.dims() != after.dims() || before.channels() != after.channels() {
        return Err(Error::DimensionMismatch {
            left: before.dims(),
            right: after.dims(),
        });
    }
    let (h, w) = before.dims();
    Ok(BitMatrix::from_fn(h, w, |r, c| {
        before
            .planes()
            .iter()
            .zip(after.planes())
            .any(|(a, b)| a[(r, c)].round() != b[(r, c)].round())
    }))
}

/// Side of a square covering `fraction` of an `h`×`w` image.
pub fn square_side(h: usize, w: usize, fraction: f64) -> usize {
    ((fraction * (h * w) as f64).sqrt().round() as usize).min(h).min(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

impl Region {
    pub fn centered(h: usize, w: usize, height: usize, width: usize) -> Self {
        Self {
            top: (h - height.min(h)) / 2,
            left: (w - width.min(w)) / 2,
            height: height.min(h),
            width: width.min(w),
        }
    }

    fn fits(&self, h: usize, w: usize) -> bool {
        self.top + self.height <= h && self.left + self.width <= w
    }
}

/// Copy `src_region` of `src` into `img` at `(top, left)`.
pub fn paste(img: &Raster, src: &Raster, src_region: Region, top: usize, left: usize) -> Result<Tampered> {
    let (h, w) = img.dims();
    let dst = Region {
        top,
        left,
        ..src_region
    };
    if !dst.fits(h, w) || !src_region.fits(src.height(), src.width()) {
        return Err(Error::InvalidParameter(format!("paste region {src_region:?} -> ({top}, {left}) out of bounds")));
    }
    if img.channels() != src.channels() {
        return Err(Error::ChannelCount {
            expected: img.channels(),
            actual: src.channels(),
        });
    }
    let mut out = img.clone();
    for ch in 0..out.channels() {
        let from = src.plane(ch);
        let to = out.plane_mut(ch);
        for r in 0..src_region.height {
            for c in 0..src_region.width {
                to[(top + r, left + c)] = from[(src_region.top + r, src_region.left + c)];
            }
        }
    }
    let truth = changed_pixels(img, &out)?;
    Ok(Tampered { image: out, truth })
}

/// Paste the centre of `donor` into the centre of `img`.
pub fn paste_center(img: &Raster, donor: &Raster, height: usize, width: usize) -> Result<Tampered> {
    let (h, w) = img.dims();
    let dst = Region::centered(h, w, height, width);
    let src = Region::centered(donor.height(), donor.width(), dst.height, dst.width);
    paste(img, donor, src, dst.top, dst.left)
}

/// Move a square covering `fraction` of the image from near the top-left
/// corner to near the bottom-right corner.
pub fn copy_move(img: &Raster, fraction: f64) -> Result<Tampered> {
    let (h, w) = img.dims();
    let s = square_side(h, w, fraction);
    let (mh, mw) = (h / 16, w / 16);
    if s + mh > h - mh || s + mw > w - mw {
        return Err(Error::InvalidParameter(format!("copy-move fraction {fraction} too large")));
    }
    let src = Region {
        top: mh,
        left: mw,
        height: s,
        width: s,
    };
    paste(img, img, src, h - mh - s, w - mw - s)
}

/// Vector-quantisation style forgery: the co-located centre square of
/// another image protected with the same key.
pub fn vector_quantization(img: &Raster, other: &Raster, fraction: f64) -> Result<Tampered> {
    if img.dims() != other.dims() {
        return Err(Error::DimensionMismatch {
            left: img.dims(),
            right: other.dims(),
        });
    }
    let (h, w) = img.dims();
    let s = square_side(h, w, fraction);
    let r = Region::centered(h, w, s, s);
    paste(img, other, r, r.top, r.left)
}

/// Pixels of the original canvas whose content does not survive the
/// geometric part of `attacks` (pushed out of frame or cropped away).
pub fn geometric_loss(h: usize, w: usize, attacks: &[Attack]) -> Result<BitMatrix> {
    if !attacks.iter().any(Attack::is_geometric) {
        return Ok(BitMatrix::zeros(h, w));
    }
    let surviving = surviving_region(h, w, attacks)?;
    let (t, _, _) = chain_geometry(h, w, attacks);
    let back = warp_plane(&surviving, &t.inverse()?, h, w)?;
    Ok(BitMatrix::from_fn(h, w, |r, c| back[(r, c)] < 0.5))
}

/// Block-level truth for a tamper followed by an attack chain.
pub fn scenario_truth(tamper_truth: &BitMatrix, attacks: &[Attack]) -> Result<BitMatrix> {
    let (h, w) = tamper_truth.dims();
    let lost = geometric_loss(h, w, attacks)?;
    Ok(block_truth(&tamper_truth.or(&lost)?))
}
