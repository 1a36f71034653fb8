//! Raster containers, color conversion, resampling and file I/O.
//!
//! Samples are kept as `f64` in the nominal `[0, 255]` range. Quantization to
//! 8 bits happens only when writing files (and at the explicit
//! [`Raster::quantized`] call sites that simulate a file round trip).

use std::ops::{Index, IndexMut};
use std::path::Path;

use image::{DynamicImage, ImageFormat};

use crate::error::{Error, Result};

/// A dense row-major matrix of real samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0.0)
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        Self {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::InvalidParameter(format!(
                "buffer of {} samples cannot form a {height}x{width} plane",
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            height,
            width,
            data,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.width..(r + 1) * self.width]
    }

    /// Sample with coordinates clamped to the plane (replicate border).
    #[inline]
    pub fn get_clamped(&self, r: isize, c: isize) -> f64 {
        let r = r.clamp(0, self.height as isize - 1) as usize;
        let c = c.clamp(0, self.width as isize - 1) as usize;
        self.data[r * self.width + c]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Plane, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        ensure_same_dims(self.dims(), other.dims())?;
        Ok(Self {
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn clamp(&self, lo: f64, hi: f64) -> Self {
        self.map(|v| v.clamp(lo, hi))
    }

    /// Round to the nearest integer and clamp to `[0, 255]`.
    pub fn quantized(&self) -> Self {
        self.map(quantize_sample)
    }

    /// Copy of the rectangle starting at `(top, left)`.
    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<Self> {
        if top + height > self.height || left + width > self.width {
            return Err(Error::InvalidParameter(format!(
                "crop {height}x{width}+{top}+{left} exceeds {}x{}",
                self.height, self.width
            )));
        }
        Ok(Self::from_fn(height, width, |r, c| self[(top + r, left + c)]))
    }
}

impl Index<(usize, usize)> for Plane {
    type Output = f64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.width + c]
    }
}

impl IndexMut<(usize, usize)> for Plane {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.width + c]
    }
}

#[inline]
pub(crate) fn quantize_sample(v: f64) -> f64 {
    v.round().clamp(0.0, 255.0)
}

pub(crate) fn ensure_same_dims(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

/// Planar image: one (gray) or three (RGB or YUV) planes of equal size.
#[derive(Clone, Debug, PartialEq)]
pub struct Raster {
    planes: Vec<Plane>,
}

impl Raster {
    pub fn gray(plane: Plane) -> Self {
        Self {
            planes: vec![plane],
        }
    }

    pub fn from_planes(planes: Vec<Plane>) -> Result<Self> {
        if planes.len() != 1 && planes.len() != 3 {
            return Err(Error::ChannelCount {
                expected: 3,
                actual: planes.len(),
            });
        }
        for p in &planes[1..] {
            ensure_same_dims(planes[0].dims(), p.dims())?;
        }
        Ok(Self { planes })
    }

    pub fn channels(&self) -> usize {
        self.planes.len()
    }

    pub fn is_gray(&self) -> bool {
        self.planes.len() == 1
    }

    pub fn height(&self) -> usize {
        self.planes[0].height()
    }

    pub fn width(&self) -> usize {
        self.planes[0].width()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.planes[0].dims()
    }

    pub fn plane(&self, i: usize) -> &Plane {
        &self.planes[i]
    }

    pub fn plane_mut(&mut self, i: usize) -> &mut Plane {
        &mut self.planes[i]
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    pub fn into_planes(self) -> Vec<Plane> {
        self.planes
    }

    pub fn map_planes(&self, f: impl Fn(&Plane) -> Plane) -> Self {
        Self {
            planes: self.planes.iter().map(f).collect(),
        }
    }

    pub fn try_map_planes(&self, f: impl Fn(&Plane) -> Result<Plane>) -> Result<Self> {
        Ok(Self {
            planes: self.planes.iter().map(f).collect::<Result<_>>()?,
        })
    }

    pub fn quantized(&self) -> Self {
        self.map_planes(Plane::quantized)
    }

    /// BT.601 luma for color rasters, the plane itself for gray ones.
    pub fn luminance(&self) -> Plane {
        if self.is_gray() {
            return self.planes[0].clone();
        }
        let (r, g, b) = (&self.planes[0], &self.planes[1], &self.planes[2]);
        let data = r
            .as_slice()
            .iter()
            .zip(g.as_slice())
            .zip(b.as_slice())
            .map(|((&r, &g), &b)| KR * r + KG * g + KB * b)
            .collect();
        Plane {
            height: r.height,
            width: r.width,
            data,
        }
    }

    /// True when both dimensions are multiples of 4 (one watermark bit per 4x4 block).
    pub fn block_aligned(&self) -> bool {
        self.height().is_multiple_of(4) && self.width().is_multiple_of(4)
    }
}

/// Binary matrix; every cell is 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    height: usize,
    width: usize,
    bits: Vec<u8>,
}

impl BitMatrix {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            bits: vec![0; height * width],
        }
    }

    pub fn ones(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            bits: vec![1; height * width],
        }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                bits.push(f(r, c) as u8);
            }
        }
        Self {
            height,
            width,
            bits,
        }
    }

    pub fn from_bits(height: usize, width: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != height * width {
            return Err(Error::InvalidParameter(format!(
                "{} bits cannot form a {height}x{width} matrix",
                bits.len()
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParameter("bit values must be 0 or 1".into()));
        }
        Ok(Self {
            height,
            width,
            bits,
        })
    }

    /// Threshold a plane at `threshold` (cells `>= threshold` become 1).
    pub fn from_plane(plane: &Plane, threshold: f64) -> Self {
        Self {
            height: plane.height(),
            width: plane.width(),
            bits: plane
                .as_slice()
                .iter()
                .map(|&v| (v >= threshold) as u8)
                .collect(),
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.width + c] != 0
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.bits[r * self.width + c] = v as u8;
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn complement(&self) -> Self {
        Self {
            height: self.height,
            width: self.width,
            bits: self.bits.iter().map(|&b| 1 - b).collect(),
        }
    }

    pub fn xor(&self, other: &BitMatrix) -> Result<Self> {
        ensure_same_dims(self.dims(), other.dims())?;
        Ok(Self {
            height: self.height,
            width: self.width,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a ^ b).collect(),
        })
    }

    pub fn or(&self, other: &BitMatrix) -> Result<Self> {
        ensure_same_dims(self.dims(), other.dims())?;
        Ok(Self {
            height: self.height,
            width: self.width,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a | b).collect(),
        })
    }

    /// `{0, 255}` plane, the on-disk representation of halftones and maps.
    pub fn to_plane(&self) -> Plane {
        Plane {
            height: self.height,
            width: self.width,
            data: self.bits.iter().map(|&b| b as f64 * 255.0).collect(),
        }
    }
}

const KR: f64 = 0.299;
const KG: f64 = 0.587;
const KB: f64 = 0.114;
const U_SCALE: f64 = 0.492;
const V_SCALE: f64 = 0.877;

/// BT.601 analog RGB to YUV; U and V are zero-centered.
pub fn rgb_to_yuv(img: &Raster) -> Result<Raster> {
    if img.is_gray() {
        return Err(Error::AlreadyGrayscale);
    }
    let y = img.luminance();
    let (r, b) = (img.plane(0), img.plane(2));
    let u = b.zip_map(&y, |b, y| U_SCALE * (b - y))?;
    let v = r.zip_map(&y, |r, y| V_SCALE * (r - y))?;
    Raster::from_planes(vec![y, u, v])
}

/// Inverse of [`rgb_to_yuv`], clamped to `[0, 255]`.
pub fn yuv_to_rgb(img: &Raster) -> Result<Raster> {
    if img.is_gray() {
        return Err(Error::ChannelCount {
            expected: 3,
            actual: 1,
        });
    }
    let (y, u, v) = (img.plane(0), img.plane(1), img.plane(2));
    let (h, w) = y.dims();
    let mut r = Plane::zeros(h, w);
    let mut g = Plane::zeros(h, w);
    let mut b = Plane::zeros(h, w);
    for i in 0..h * w {
        let (yy, uu, vv) = (y.data[i], u.data[i], v.data[i]);
        let rr = yy + vv / V_SCALE;
        let bb = yy + uu / U_SCALE;
        let gg = (yy - KR * rr - KB * bb) / KG;
        r.data[i] = rr.clamp(0.0, 255.0);
        g.data[i] = gg.clamp(0.0, 255.0);
        b.data[i] = bb.clamp(0.0, 255.0);
    }
    Raster::from_planes(vec![r, g, b])
}

/// Nearest-neighbour resampling of a plane.
pub fn resize_nearest(m: &Plane, new_height: usize, new_width: usize) -> Result<Plane> {
    if new_height == 0 || new_width == 0 {
        return Err(Error::InvalidDimensions {
            height: new_height,
            width: new_width,
            reason: "target size must be non-zero",
        });
    }
    let (h, w) = m.dims();
    Ok(Plane::from_fn(new_height, new_width, |r, c| {
        let sr = (r * h / new_height).min(h - 1);
        let sc = (c * w / new_width).min(w - 1);
        m[(sr, sc)]
    }))
}

/// Result of [`load_image`].
#[derive(Clone, Debug)]
pub struct LoadedImage {
    pub raster: Raster,
    /// Set when a dimension is not a multiple of 4; embedding will refuse such input.
    pub misaligned: bool,
}

/// Read an 8-bit PNG or BMP file. Alpha channels are discarded.
pub fn load_image(path: impl AsRef<Path>) -> Result<LoadedImage> {
    let path = path.as_ref();
    let reader = image::ImageReader::open(path)?.with_guessed_format()?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Bmp) => {}
        _ => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
            })
        }
    }
    let is_bmp = reader.format() == Some(ImageFormat::Bmp);
    let img = reader.decode()?;
    let raster = match img {
        DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            let data = buf.into_raw().into_iter().map(f64::from).collect();
            Raster::gray(Plane::from_vec(h as usize, w as usize, data)?)
        }
        DynamicImage::ImageLumaA8(_) => {
            let buf = img.to_luma8();
            let (w, h) = buf.dimensions();
            let data = buf.into_raw().into_iter().map(f64::from).collect();
            Raster::gray(Plane::from_vec(h as usize, w as usize, data)?)
        }
        DynamicImage::ImageRgb8(_) | DynamicImage::ImageRgba8(_) => {
            let buf = img.to_rgb8();
            let (w, h) = (buf.width() as usize, buf.height() as usize);
            let raw = buf.into_raw();
            let planes = (0..3)
                .map(|ch| {
                    let data = raw.iter().skip(ch).step_by(3).map(|&v| f64::from(v)).collect();
                    Plane::from_vec(h, w, data)
                })
                .collect::<Result<Vec<_>>>()?;
            // 8-bit gray BMPs are stored as a palette and decode as RGB.
            if is_bmp && planes[1] == planes[0] && planes[2] == planes[0] {
                Raster::gray(planes.into_iter().next().expect("three planes"))
            } else {
                Raster::from_planes(planes)?
            }
        }
        _ => {
            return Err(Error::UnsupportedBitDepth {
                path: path.to_path_buf(),
            })
        }
    };
    let misaligned = !raster.block_aligned();
    if misaligned {
        log::warn!(
            "{}: {}x{} is not a multiple of 4",
            path.display(),
            raster.height(),
            raster.width()
        );
    }
    Ok(LoadedImage { raster, misaligned })
}

/// Write a raster as 8-bit PNG or BMP, chosen by file extension.
pub fn save_image(raster: &Raster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = match ImageFormat::from_path(path) {
        Ok(f @ (ImageFormat::Png | ImageFormat::Bmp)) => f,
        _ => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
            })
        }
    };
    let (h, w) = raster.dims();
    let img = if raster.is_gray() {
        let raw = raster
            .plane(0)
            .as_slice()
            .iter()
            .map(|&v| quantize_sample(v) as u8)
            .collect();
        DynamicImage::ImageLuma8(
            image::GrayImage::from_raw(w as u32, h as u32, raw).expect("buffer size matches"),
        )
    } else {
        let mut raw = Vec::with_capacity(h * w * 3);
        for i in 0..h * w {
            for p in raster.planes() {
                raw.push(quantize_sample(p.as_slice()[i]) as u8);
            }
        }
        DynamicImage::ImageRgb8(
            image::RgbImage::from_raw(w as u32, h as u32, raw).expect("buffer size matches"),
        )
    };
    img.save_with_format(path, format)?;
    Ok(())
}

/// Save a bit matrix as an 8-bit `{0, 255}` PNG.
pub fn save_bits(bits: &BitMatrix, path: impl AsRef<Path>) -> Result<()> {
    save_image(&Raster::gray(bits.to_plane()), path)
}

/// Load a `{0, 255}` (or 1-bit) image as bits, thresholding at 128.
pub fn load_bits(path: impl AsRef<Path>) -> Result<Vec<BitMatrix>> {
    let loaded = load_image(path)?;
    Ok(loaded
        .raster
        .planes()
        .iter()
        .map(|p| BitMatrix::from_plane(p, 128.0))
        .collect())
}
