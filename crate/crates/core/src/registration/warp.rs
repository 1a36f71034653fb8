use super::transform::Transform;
use crate::error::Result;
use crate::filter::sample_bilinear;
use crate::imaging::{BitMatrix, Plane, Raster};

/// Resample `src` onto an `out_h`×`out_w` canvas, where `t` maps source
/// coordinates to canvas coordinates. Pixels with no source are 0.
pub fn warp_plane(src: &Plane, t: &Transform, out_h: usize, out_w: usize) -> Result<Plane> {
    let inv = t.inverse()?;
    Ok(Plane::from_fn(out_h, out_w, |r, c| {
        let (x, y) = inv.apply(c as f64, r as f64);
        sample_bilinear(src, y, x).unwrap_or(0.0)
    }))
}

pub fn warp(img: &Raster, t: &Transform, out_h: usize, out_w: usize) -> Result<Raster> {
    img.try_map_planes(|p| warp_plane(p, t, out_h, out_w))
}

/// Canvas pixels that receive source data under `t`.
pub fn coverage(src_h: usize, src_w: usize, t: &Transform, out_h: usize, out_w: usize) -> Result<BitMatrix> {
    let inv = t.inverse()?;
    let eps = 1e-9;
    Ok(BitMatrix::from_fn(out_h, out_w, |r, c| {
        let (x, y) = inv.apply(c as f64, r as f64);
        x >= -eps && y >= -eps && x <= (src_w - 1) as f64 + eps && y <= (src_h - 1) as f64 + eps
    }))
}
