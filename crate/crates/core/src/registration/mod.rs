//! Feature-based re-registration of an attacked image against the
//! reference rendered from the digest.

mod descriptor;
mod detector;
mod estimate;
mod integral;
mod transform;
mod warp;

pub use descriptor::{describe, distance, orientation, Descriptor, DESCRIPTOR_LEN};
pub use detector::{detect, hessian_response, DetectorParams, InterestPoint, DXY_WEIGHT};
pub use estimate::{fit_affine, lattice_linear_part, match_descriptors, ransac_affine, snap_to_lattice, Match, RansacFit, RansacParams};
pub use integral::IntegralImage;
pub use transform::Transform;
pub use warp::{coverage, warp, warp_plane};

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{Plane, Raster};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegistrationParams {
    pub detector: DetectorParams,
    pub ratio: f64,
    pub ransac: RansacParams,
    /// Accepted range of the singular values of the linear part.
    pub scale_range: (f64, f64),
    /// Largest accepted ratio between the two singular values.
    pub max_anisotropy: f64,
    /// Entry-wise tolerance for snapping onto axis permutations; `None` disables.
    pub snap_tolerance: Option<f64>,
}

impl Default for RegistrationParams {
    fn default() -> Self {
        Self {
            detector: DetectorParams::default(),
            ratio: 0.7,
            ransac: RansacParams::default(),
            scale_range: (0.2, 5.0),
            max_anisotropy: 1.5,
            snap_tolerance: Some(0.01),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Estimate {
    /// Maps target coordinates onto reference coordinates.
    pub transform: Transform,
    pub matches: usize,
    pub inliers: usize,
    pub snapped: bool,
}

fn features(lum: &Plane, p: &DetectorParams) -> Vec<Descriptor> {
    let ii = IntegralImage::new(&lum.map(|v| v / 255.0));
    let (descs, dropped) = describe(&ii, &detect(lum, p));
    log::debug!("{} descriptors, {dropped} points too close to the border", descs.len());
    descs
}

/// Singular values of the 2x2 linear part, largest first.
pub fn singular_values(t: &Transform) -> (f64, f64) {
    let m = Matrix2::new(t.m[0][0], t.m[0][1], t.m[1][0], t.m[1][1]);
    let sv = m.singular_values();
    (sv[0].max(sv[1]), sv[0].min(sv[1]))
}

// Every supported attack is a similarity, so a strongly sheared or wildly
// scaled fit means RANSAC latched onto chance matches.
fn check_plausible(t: &Transform, p: &RegistrationParams) -> Result<()> {
    let (hi, lo) = singular_values(t);
    let scale = (hi * lo).sqrt();
    let anisotropy = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(p.scale_range.0..=p.scale_range.1).contains(&lo)
        || !(p.scale_range.0..=p.scale_range.1).contains(&hi)
        || anisotropy > p.max_anisotropy
    {
        return Err(Error::ImplausibleTransform { scale, anisotropy });
    }
    Ok(())
}

/// Estimate the affine map taking `target` onto `reference`.
pub fn estimate_transform(reference: &Plane, target: &Plane, p: &RegistrationParams) -> Result<Estimate> {
    let refs = features(reference, &p.detector);
    let tars = features(target, &p.detector);
    let matches = match_descriptors(&tars, &refs, p.ratio);
    let fit = ransac_affine(&matches, &p.ransac)?;
    check_plausible(&fit.transform, p)?;
    let mut transform = fit.transform;
    let mut snapped = false;
    if let Some(tol) = p.snap_tolerance {
        let inliers: Vec<&Match> = fit.inliers.iter().map(|&i| &matches[i]).collect();
        let s = snap_to_lattice(&transform, &inliers, tol);
        snapped = s != transform;
        transform = s;
    }
    Ok(Estimate {
        transform,
        matches: matches.len(),
        inliers: fit.inliers.len(),
        snapped,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum RegistrationStatus {
    Registered(Estimate),
    Skipped(String),
}

#[derive(Clone, Debug)]
pub struct Registration {
    pub image: Raster,
    /// Target-to-reference map actually applied (identity when skipped).
    pub transform: Transform,
    pub status: RegistrationStatus,
}

/// Register `target` onto the reference frame; falls back to the identity
/// (with a warning) when no reliable transform is found.
pub fn register(target: &Raster, reference: &Plane, p: &RegistrationParams) -> Result<Registration> {
    let (h, w) = reference.dims();
    let (transform, status) = match estimate_transform(reference, &target.luminance(), p) {
        Ok(est) => (est.transform, RegistrationStatus::Registered(est)),
        Err(e) => {
            log::warn!("registration skipped: {e}");
            (Transform::identity(), RegistrationStatus::Skipped(e.to_string()))
        }
    };
    let image = warp(target, &transform, h, w)?;
    Ok(Registration {
        image,
        transform,
        status,
    })
}
