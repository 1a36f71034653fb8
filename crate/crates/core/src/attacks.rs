//! Deterministic attack simulator: noise, filtering, compression, intensity
//! and geometric distortions, plus a small text grammar for attack chains.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{convolve_separable, gaussian_blur, median_filter, sample_bilinear, Border};
use crate::imaging::{Plane, Raster};
use crate::registration::{coverage, warp_plane, Transform};
use crate::transforms::{jpeg_quantize_plane, scaled_quant_table, CHROMA_QUANT, LUMA_QUANT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CropSides {
    Around,
    Top,
    Bottom,
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CropAmount {
    /// Fraction of the image area (for `Around`) or of the cut dimension.
    Fraction(f64),
    Pixels(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Attack {
    /// Fraction of samples forced to 0 or 255.
    SaltPepper(f64),
    /// Multiplicative noise `x (1 + n)`, `n ~ N(0, v)` on the `[0, 1]` scale.
    Speckle(f64),
    /// Additive `N(0, v)` on the `[0, 1]` scale.
    GaussianNoise(f64),
    Sharpen { size: usize, sigma: f64, strength: f64 },
    HistEq,
    Smooth { size: usize, sigma: f64 },
    Jpeg(u32),
    Darken(f64),
    Lighten(f64),
    /// Counter-clockwise rotation about the centre, same canvas.
    Rotate(f64),
    Translate { dx: f64, dy: f64 },
    Crop { amount: CropAmount, sides: CropSides },
    /// Resizes the canvas.
    Scale(f64),
    Median(usize),
    Average(usize),
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn odd_window(size: usize) -> Result<()> {
    if size == 0 || size.is_multiple_of(2) {
        return Err(invalid(format!("window size must be odd and positive, got {size}")));
    }
    Ok(())
}

impl Attack {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Attack::SaltPepper(r) if !(0.0..=1.0).contains(&r) => Err(invalid(format!("density {r} outside [0, 1]"))),
            Attack::Speckle(v) | Attack::GaussianNoise(v) if !(v >= 0.0 && v.is_finite()) => {
                Err(invalid(format!("variance {v} must be non-negative")))
            }
            Attack::Sharpen { size, sigma, strength } => {
                odd_window(size)?;
                if !(sigma > 0.0) || !strength.is_finite() {
                    return Err(invalid("sharpen needs sigma > 0 and finite strength"));
                }
                Ok(())
            }
            Attack::Smooth { size, sigma } => {
                odd_window(size)?;
                if !(sigma > 0.0) {
                    return Err(invalid("smoothing needs sigma > 0"));
                }
                Ok(())
            }
            Attack::Jpeg(q) if !(1..=100).contains(&q) => Err(Error::QualityOutOfRange(q)),
            Attack::Darken(d) | Attack::Lighten(d) if !(d >= 0.0 && d.is_finite()) => {
                Err(invalid(format!("offset {d} must be non-negative")))
            }
            Attack::Rotate(a) if !a.is_finite() => Err(invalid("rotation angle must be finite")),
            Attack::Translate { dx, dy } if !(dx.is_finite() && dy.is_finite()) => Err(invalid("shift must be finite")),
            Attack::Crop {
                amount: CropAmount::Fraction(f),
                ..
            } if !(0.0..1.0).contains(&f) => Err(invalid(format!("crop fraction {f} outside [0, 1)"))),
            Attack::Scale(s) if !(s > 0.0 && s.is_finite()) => Err(invalid(format!("scale {s} must be positive"))),
            Attack::Median(n) | Attack::Average(n) => odd_window(n),
            _ => Ok(()),
        }
    }

    pub fn is_geometric(&self) -> bool {
        matches!(
            self,
            Attack::Rotate(_) | Attack::Translate { .. } | Attack::Crop { .. } | Attack::Scale(_)
        )
    }

    /// Where an input canvas of `h`×`w` lands, as a map plus output size.
    /// Non-geometric attacks (and crops, which keep the canvas) return the identity.
    pub fn geometry(&self, h: usize, w: usize) -> (Transform, usize, usize) {
        match *self {
            Attack::Rotate(deg) => (rotation(deg, h, w), h, w),
            Attack::Translate { dx, dy } => (Transform::translation(dx, dy), h, w),
            Attack::Scale(s) => {
                let (nh, nw) = scaled_dims(h, w, s);
                (scale_transform(h, w, nh, nw), nh, nw)
            }
            _ => (Transform::identity(), h, w),
        }
    }
}

fn rotation(deg: f64, h: usize, w: usize) -> Transform {
    let quarter = deg / 90.0;
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    if (quarter - quarter.round()).abs() < 1e-12 {
        // exact lattice map for multiples of 90 degrees
        let (s, c) = match quarter.round().rem_euclid(4.0) as i32 {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        };
        let lin = Transform::affine(c, s, 0.0, -s, c, 0.0);
        return Transform::translation(cx, cy)
            .then_after(&lin)
            .then_after(&Transform::translation(-cx, -cy));
    }
    Transform::rotation_scale_about(deg, 1.0, cx, cy)
}

fn scaled_dims(h: usize, w: usize, s: f64) -> (usize, usize) {
    (((h as f64 * s).round() as usize).max(1), ((w as f64 * s).round() as usize).max(1))
}

// Pixel-centre aligned resize map.
fn scale_transform(h: usize, w: usize, nh: usize, nw: usize) -> Transform {
    let sx = nw as f64 / w as f64;
    let sy = nh as f64 / h as f64;
    Transform::affine(sx, 0.0, 0.5 * (sx - 1.0), 0.0, sy, 0.5 * (sy - 1.0))
}

// Resize with edge replication so no border is left without content.
fn resize_clamped(p: &Plane, t: &Transform, nh: usize, nw: usize) -> Result<Plane> {
    let inv = t.inverse()?;
    let (h, w) = p.dims();
    Ok(Plane::from_fn(nh, nw, |r, c| {
        let (x, y) = inv.apply(c as f64, r as f64);
        let (y, x) = (y.clamp(0.0, (h - 1) as f64), x.clamp(0.0, (w - 1) as f64));
        sample_bilinear(p, y, x).unwrap_or(0.0)
    }))
}

fn crop_box(h: usize, w: usize, amount: CropAmount, sides: CropSides) -> (usize, usize, usize, usize) {
    // returns (top, bottom, left, right) band widths
    match sides {
        CropSides::Around => {
            let (bh, bw) = match amount {
                CropAmount::Pixels(p) => (p, p),
                CropAmount::Fraction(f) => {
                    let k = (1.0 - (1.0 - f).sqrt()) / 2.0;
                    ((h as f64 * k).round() as usize, (w as f64 * k).round() as usize)
                }
            };
            (bh, bh, bw, bw)
        }
        _ => {
            let along = if matches!(sides, CropSides::Top | CropSides::Bottom) { h } else { w };
            let band = match amount {
                CropAmount::Pixels(p) => p,
                CropAmount::Fraction(f) => (along as f64 * f).round() as usize,
            }
            .min(along);
            match sides {
                CropSides::Top => (band, 0, 0, 0),
                CropSides::Bottom => (0, band, 0, 0),
                CropSides::Left => (0, 0, band, 0),
                _ => (0, 0, 0, band),
            }
        }
    }
}

fn crop_plane(p: &Plane, amount: CropAmount, sides: CropSides) -> Plane {
    let (h, w) = p.dims();
    let (t, b, l, r) = crop_box(h, w, amount, sides);
    Plane::from_fn(h, w, |i, j| {
        if i < t || i + b >= h || j < l || j + r >= w {
            0.0
        } else {
            p[(i, j)]
        }
    })
}

fn hist_eq(img: &Raster) -> Raster {
    let mut hist = [0usize; 256];
    for p in img.planes() {
        for &v in p.as_slice() {
            hist[v.round().clamp(0.0, 255.0) as usize] += 1;
        }
    }
    let total: usize = hist.iter().sum();
    let mut cdf = [0usize; 256];
    let mut acc = 0;
    for (c, h) in cdf.iter_mut().zip(hist) {
        acc += h;
        *c = acc;
    }
    let cdf_min = cdf.iter().copied().find(|&c| c > 0).unwrap_or(0);
    let denom = (total - cdf_min).max(1) as f64;
    let lut: Vec<f64> = cdf
        .iter()
        .map(|&c| (255.0 * c.saturating_sub(cdf_min) as f64 / denom).round())
        .collect();
    img.map_planes(|p| p.map(|v| lut[v.round().clamp(0.0, 255.0) as usize]))
}

fn pad_to_8(p: &Plane) -> Plane {
    let (h, w) = p.dims();
    let (ph, pw) = (h.div_ceil(8) * 8, w.div_ceil(8) * 8);
    Plane::from_fn(ph, pw, |r, c| p[(r.min(h - 1), c.min(w - 1))])
}

fn jpeg(img: &Raster, qf: u32) -> Result<Raster> {
    let luma = scaled_quant_table(&LUMA_QUANT, qf)?;
    let chroma = scaled_quant_table(&CHROMA_QUANT, qf)?;
    let (h, w) = img.dims();
    let roundtrip = |p: &Plane, table: &[f64; 64]| -> Result<Plane> {
        jpeg_quantize_plane(&pad_to_8(p), table)?.crop(0, 0, h, w)
    };
    if img.is_gray() {
        return Ok(Raster::gray(roundtrip(img.plane(0), &luma)?));
    }
    let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
    // JFIF full-range YCbCr
    let y = Plane::from_fn(h, w, |i, j| 0.299 * r[(i, j)] + 0.587 * g[(i, j)] + 0.114 * b[(i, j)]);
    let cb = Plane::from_fn(h, w, |i, j| {
        128.0 - 0.168736 * r[(i, j)] - 0.331264 * g[(i, j)] + 0.5 * b[(i, j)]
    });
    let cr = Plane::from_fn(h, w, |i, j| {
        128.0 + 0.5 * r[(i, j)] - 0.418688 * g[(i, j)] - 0.081312 * b[(i, j)]
    });
    let y = roundtrip(&y, &luma)?;
    let cb = roundtrip(&cb, &chroma)?;
    let cr = roundtrip(&cr, &chroma)?;
    let rr = Plane::from_fn(h, w, |i, j| y[(i, j)] + 1.402 * (cr[(i, j)] - 128.0));
    let gg = Plane::from_fn(h, w, |i, j| {
        y[(i, j)] - 0.344136 * (cb[(i, j)] - 128.0) - 0.714136 * (cr[(i, j)] - 128.0)
    });
    let bb = Plane::from_fn(h, w, |i, j| y[(i, j)] + 1.772 * (cb[(i, j)] - 128.0));
    Raster::from_planes(vec![rr, gg, bb])
}

/// Apply a single attack. Output is quantized to 8 bits.
pub fn apply(img: &Raster, attack: &Attack, rng: &mut ChaCha8Rng) -> Result<Raster> {
    attack.validate()?;
    let (h, w) = img.dims();
    let out = match *attack {
        Attack::SaltPepper(rho) => {
            let mut out = img.clone();
            for ch in 0..out.channels() {
                for v in out.plane_mut(ch).as_mut_slice() {
                    if rng.random::<f64>() < rho {
                        *v = if rng.random::<bool>() { 255.0 } else { 0.0 };
                    }
                }
            }
            out
        }
        Attack::Speckle(var) => {
            let n = Normal::new(0.0, var.sqrt()).map_err(|e| invalid(e.to_string()))?;
            let mut out = img.clone();
            for ch in 0..out.channels() {
                for v in out.plane_mut(ch).as_mut_slice() {
                    *v *= 1.0 + n.sample(rng);
                }
            }
            out
        }
        Attack::GaussianNoise(var) => {
            let n = Normal::new(0.0, var.sqrt()).map_err(|e| invalid(e.to_string()))?;
            let mut out = img.clone();
            for ch in 0..out.channels() {
                for v in out.plane_mut(ch).as_mut_slice() {
                    *v += 255.0 * n.sample(rng);
                }
            }
            out
        }
        Attack::Sharpen { size, sigma, strength } => img.try_map_planes(|p| {
            let blurred = gaussian_blur(p, size, sigma, Border::Replicate)?;
            p.zip_map(&blurred, |x, b| x + strength * (x - b))
        })?,
        Attack::HistEq => hist_eq(&img.quantized()),
        Attack::Smooth { size, sigma } => img.try_map_planes(|p| gaussian_blur(p, size, sigma, Border::Replicate))?,
        Attack::Jpeg(q) => jpeg(&img.quantized(), q)?,
        Attack::Darken(d) => img.map_planes(|p| p.map(|v| v - d)),
        Attack::Lighten(d) => img.map_planes(|p| p.map(|v| v + d)),
        Attack::Scale(_) => {
            let (t, nh, nw) = attack.geometry(h, w);
            img.try_map_planes(|p| resize_clamped(p, &t, nh, nw))?
        }
        Attack::Rotate(_) | Attack::Translate { .. } => {
            let (t, nh, nw) = attack.geometry(h, w);
            img.try_map_planes(|p| warp_plane(p, &t, nh, nw))?
        }
        Attack::Crop { amount, sides } => img.map_planes(|p| crop_plane(p, amount, sides)),
        Attack::Median(n) => img.try_map_planes(|p| median_filter(p, n, Border::Symmetric))?,
        Attack::Average(n) => {
            let k = vec![1.0 / n as f64; n];
            img.map_planes(|p| convolve_separable(p, &k, Border::Symmetric))
        }
    };
    Ok(out.quantized())
}

/// Apply attacks left to right with one generator seeded by `seed`.
pub fn chain(img: &Raster, attacks: &[Attack], seed: u64) -> Result<Raster> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = img.clone();
    for a in attacks {
        cur = apply(&cur, a, &mut rng)?;
    }
    Ok(cur)
}

/// Pixels of the final canvas that still carry content from the input
/// canvas after the geometric part of `attacks`.
pub fn surviving_region(h: usize, w: usize, attacks: &[Attack]) -> Result<Plane> {
    let mut mask = Plane::filled(h, w, 1.0);
    for a in attacks {
        let (mh, mw) = mask.dims();
        mask = match *a {
            Attack::Crop { amount, sides } => crop_plane(&mask, amount, sides),
            Attack::Scale(_) => {
                let (t, nh, nw) = a.geometry(mh, mw);
                resize_clamped(&mask, &t, nh, nw)?
            }
            _ if a.is_geometric() => {
                let (t, nh, nw) = a.geometry(mh, mw);
                let cov = coverage(mh, mw, &t, nh, nw)?;
                let moved = warp_plane(&mask, &t, nh, nw)?;
                Plane::from_fn(nh, nw, |r, c| if cov.get(r, c) { moved[(r, c)] } else { 0.0 })
            }
            _ => mask,
        };
    }
    Ok(mask)
}

/// Composite geometric map of `attacks` on an `h`×`w` canvas, with the
/// final canvas size. Crops and photometric attacks contribute nothing.
pub fn chain_geometry(h: usize, w: usize, attacks: &[Attack]) -> (Transform, usize, usize) {
    let mut total = Transform::identity();
    let (mut ch, mut cw) = (h, w);
    for a in attacks {
        let (t, nh, nw) = a.geometry(ch, cw);
        total = t.then_after(&total);
        (ch, cw) = (nh, nw);
    }
    (total, ch, cw)
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

impl fmt::Display for Attack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Attack::SaltPepper(r) => write!(f, "sp:{}", fmt_num(r)),
            Attack::Speckle(v) => write!(f, "speckle:{}", fmt_num(v)),
            Attack::GaussianNoise(v) => write!(f, "gauss:{}", fmt_num(v)),
            Attack::Sharpen { size, sigma, strength } => {
                write!(f, "sharpen:{size},{},{}", fmt_num(sigma), fmt_num(strength))
            }
            Attack::HistEq => write!(f, "histeq"),
            Attack::Smooth { size, sigma } => write!(f, "smooth:{size},{}", fmt_num(sigma)),
            Attack::Jpeg(q) => write!(f, "jpeg:{q}"),
            Attack::Darken(d) => write!(f, "darken:{}", fmt_num(d)),
            Attack::Lighten(d) => write!(f, "lighten:{}", fmt_num(d)),
            Attack::Rotate(a) => write!(f, "rot:{}", fmt_num(a)),
            Attack::Translate { dx, dy } => write!(f, "translate:{},{}", fmt_num(dx), fmt_num(dy)),
            Attack::Crop { amount, sides } => {
                let amt = match amount {
                    CropAmount::Fraction(x) => fmt_num(x),
                    CropAmount::Pixels(p) => format!("{p}px"),
                };
                let side = match sides {
                    CropSides::Around => "around",
                    CropSides::Top => "top",
                    CropSides::Bottom => "bottom",
                    CropSides::Left => "left",
                    CropSides::Right => "right",
                };
                write!(f, "crop:{amt},{side}")
            }
            Attack::Scale(s) => write!(f, "scale:{}", fmt_num(s)),
            Attack::Median(n) => write!(f, "median:{n}"),
            Attack::Average(n) => write!(f, "average:{n}"),
        }
    }
}

fn syntax(msg: impl Into<String>) -> Error {
    Error::AttackSyntax(msg.into())
}

fn nums(name: &str, args: &[&str], want: usize) -> Result<Vec<f64>> {
    if args.len() != want {
        return Err(syntax(format!("`{name}` takes {want} argument(s), got {}", args.len())));
    }
    args.iter()
        .map(|a| a.trim().parse::<f64>().map_err(|_| syntax(format!("`{name}`: `{a}` is not a number"))))
        .collect()
}

fn whole(name: &str, v: f64) -> Result<usize> {
    if v < 0.0 || v.fract() != 0.0 {
        return Err(syntax(format!("`{name}` expects a whole number, got {v}")));
    }
    Ok(v as usize)
}

impl FromStr for Attack {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n.trim().to_ascii_lowercase(), r.trim()),
            None => (s.to_ascii_lowercase(), ""),
        };
        let args: Vec<&str> = if rest.is_empty() { Vec::new() } else { rest.split(',').collect() };
        let attack = match name.as_str() {
            "sp" | "saltpepper" => Attack::SaltPepper(nums(&name, &args, 1)?[0]),
            "speckle" => Attack::Speckle(nums(&name, &args, 1)?[0]),
            "gauss" | "noise" => Attack::GaussianNoise(nums(&name, &args, 1)?[0]),
            "sharpen" => {
                let v = nums(&name, &args, 3)?;
                Attack::Sharpen {
                    size: whole(&name, v[0])?,
                    sigma: v[1],
                    strength: v[2],
                }
            }
            "histeq" => {
                nums(&name, &args, 0)?;
                Attack::HistEq
            }
            "smooth" => {
                let v = nums(&name, &args, 2)?;
                Attack::Smooth {
                    size: whole(&name, v[0])?,
                    sigma: v[1],
                }
            }
            "jpeg" => Attack::Jpeg(whole(&name, nums(&name, &args, 1)?[0])? as u32),
            "darken" => Attack::Darken(nums(&name, &args, 1)?[0]),
            "lighten" => Attack::Lighten(nums(&name, &args, 1)?[0]),
            "rot" | "rotate" => Attack::Rotate(nums(&name, &args, 1)?[0]),
            "translate" | "shift" => {
                let v = nums(&name, &args, 2)?;
                Attack::Translate { dx: v[0], dy: v[1] }
            }
            "crop" => {
                if args.is_empty() || args.len() > 2 {
                    return Err(syntax("`crop` takes an amount and an optional side"));
                }
                let a = args[0].trim();
                let amount = if let Some(px) = a.strip_suffix("px") {
                    CropAmount::Pixels(px.trim().parse().map_err(|_| syntax(format!("bad pixel count `{a}`")))?)
                } else if let Some(pc) = a.strip_suffix('%') {
                    CropAmount::Fraction(pc.trim().parse::<f64>().map_err(|_| syntax(format!("bad percentage `{a}`")))? / 100.0)
                } else {
                    CropAmount::Fraction(a.parse().map_err(|_| syntax(format!("bad crop amount `{a}`")))?)
                };
                let sides = match args.get(1).map(|s| s.trim().to_ascii_lowercase()).as_deref() {
                    None | Some("around") => CropSides::Around,
                    Some("top") => CropSides::Top,
                    Some("bottom") => CropSides::Bottom,
                    Some("left") => CropSides::Left,
                    Some("right") => CropSides::Right,
                    Some(other) => return Err(syntax(format!("unknown crop side `{other}`"))),
                };
                Attack::Crop { amount, sides }
            }
            "scale" => Attack::Scale(nums(&name, &args, 1)?[0]),
            "median" => Attack::Median(whole(&name, nums(&name, &args, 1)?[0])?),
            "average" | "mean" => Attack::Average(whole(&name, nums(&name, &args, 1)?[0])?),
            "" => return Err(syntax("empty attack")),
            other => return Err(syntax(format!("unknown attack `{other}`"))),
        };
        attack.validate()?;
        Ok(attack)
    }
}

/// Parse `name:p1,p2;name:...`. An empty string is the empty chain.
pub fn parse_chain(s: &str) -> Result<Vec<Attack>> {
    s.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(str::parse)
        .collect()
}

pub fn format_chain(attacks: &[Attack]) -> String {
    attacks.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(";")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: u32,
    pub name: &'static str,
    pub attack: Attack,
}

/// The numbered attack catalog (compression IDs 30-34 are not simulated).
pub fn catalog() -> Vec<CatalogEntry> {
    let mut out = Vec::new();
    let mut push = |id: u32, name: &'static str, attack: Attack| out.push(CatalogEntry { id, name, attack });
    for k in 1..=10 {
        push(k, "salt & pepper", Attack::SaltPepper(0.01 * k as f64));
    }
    push(11, "speckle", Attack::Speckle(0.005));
    push(12, "speckle", Attack::Speckle(0.01));
    for k in 0..10 {
        push(
            13 + k,
            "sharpen",
            Attack::Sharpen {
                size: 5,
                sigma: 1.0,
                strength: 2.0 * (k + 1) as f64,
            },
        );
    }
    push(23, "histogram equalization", Attack::HistEq);
    for k in 0..6 {
        push(
            24 + k,
            "gaussian smoothing",
            Attack::Smooth {
                size: 3,
                sigma: 0.1 * (k + 1) as f64,
            },
        );
    }
    for (k, q) in [90, 80, 70, 60].into_iter().enumerate() {
        push(35 + k as u32, "jpeg", Attack::Jpeg(q));
    }
    for k in 0..5 {
        push(39 + k, "darken", Attack::Darken(60.0 + 10.0 * k as f64));
    }
    for k in 0..5 {
        push(44 + k, "lighten", Attack::Lighten(60.0 + 10.0 * k as f64));
    }
    for (k, deg) in [1.0, 2.0, 3.0, 4.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0].into_iter().enumerate() {
        push(49 + k as u32, "rotation", Attack::Rotate(deg));
    }
    push(60, "translation", Attack::Translate { dx: 100.0, dy: 100.0 });
    push(61, "translation", Attack::Translate { dx: 150.0, dy: 150.0 });
    push(
        62,
        "cropping",
        Attack::Crop {
            amount: CropAmount::Fraction(0.25),
            sides: CropSides::Around,
        },
    );
    for k in 0..5 {
        push(63 + k, "scale", Attack::Scale(1.1 + 0.1 * k as f64));
    }
    out
}
