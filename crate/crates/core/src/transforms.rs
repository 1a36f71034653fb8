//! One-level Haar lifting wavelet, orthonormal block DCT, and a pixel-domain
//! JPEG round trip (quantization only; entropy coding is lossless and skipped).

use crate::error::{Error, Result};
use crate::imaging::{ensure_same_dims, Plane};

/// Coefficient scaling of the Haar lifting scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum HaarScaling {
    /// Plain lifting: approximation = pair mean, detail = pair difference.
    #[default]
    Lifting,
    /// Orthonormal filter-bank scaling (energy preserving).
    Orthonormal,
}

/// One-level 2-D wavelet decomposition.
///
/// `ch` is low-pass along rows and high-pass along columns, `cv` the reverse,
/// `cd` high-pass in both directions.
#[derive(Clone, Debug, PartialEq)]
pub struct LwtDecomposition {
    pub ca: Plane,
    pub ch: Plane,
    pub cv: Plane,
    pub cd: Plane,
    pub scaling: HaarScaling,
}

// split -> predict (odd from even) -> update (even from detail)
#[inline]
fn lift_forward(even: f64, odd: f64) -> (f64, f64) {
    let detail = odd - even;
    let approx = even + detail / 2.0;
    (approx, detail)
}

#[inline]
fn lift_inverse(approx: f64, detail: f64) -> (f64, f64) {
    let even = approx - detail / 2.0;
    let odd = detail + even;
    (even, odd)
}

fn orthonormal_factors() -> [f64; 4] {
    // [ca, ch, cv, cd] multipliers from lifting to orthonormal scaling.
    [2.0, 1.0, 1.0, 0.5]
}

/// Forward one-level Haar lifting transform.
pub fn lwt_haar_forward(lum: &Plane) -> Result<LwtDecomposition> {
    lwt_haar_forward_with(lum, HaarScaling::Lifting)
}

pub fn lwt_haar_forward_with(lum: &Plane, scaling: HaarScaling) -> Result<LwtDecomposition> {
    let (h, w) = lum.dims();
    if h % 2 != 0 || w % 2 != 0 || h == 0 || w == 0 {
        return Err(Error::InvalidDimensions {
            height: h,
            width: w,
            reason: "wavelet transform needs even, non-zero dimensions",
        });
    }
    let (hh, hw) = (h / 2, w / 2);
    // Row pass.
    let mut low = Plane::zeros(h, hw);
    let mut high = Plane::zeros(h, hw);
    for r in 0..h {
        for c in 0..hw {
            let (s, d) = lift_forward(lum[(r, 2 * c)], lum[(r, 2 * c + 1)]);
            low[(r, c)] = s;
            high[(r, c)] = d;
        }
    }
    // Column pass.
    let mut ca = Plane::zeros(hh, hw);
    let mut ch = Plane::zeros(hh, hw);
    let mut cv = Plane::zeros(hh, hw);
    let mut cd = Plane::zeros(hh, hw);
    for r in 0..hh {
        for c in 0..hw {
            let (s, d) = lift_forward(low[(2 * r, c)], low[(2 * r + 1, c)]);
            ca[(r, c)] = s;
            ch[(r, c)] = d;
            let (s, d) = lift_forward(high[(2 * r, c)], high[(2 * r + 1, c)]);
            cv[(r, c)] = s;
            cd[(r, c)] = d;
        }
    }
    if scaling == HaarScaling::Orthonormal {
        let [fa, fh, fv, fd] = orthonormal_factors();
        ca = ca.map(|v| v * fa);
        ch = ch.map(|v| v * fh);
        cv = cv.map(|v| v * fv);
        cd = cd.map(|v| v * fd);
    }
    Ok(LwtDecomposition {
        ca,
        ch,
        cv,
        cd,
        scaling,
    })
}

/// Inverse of [`lwt_haar_forward`] / [`lwt_haar_forward_with`].
pub fn lwt_haar_inverse(dec: &LwtDecomposition) -> Result<Plane> {
    let dims = dec.ca.dims();
    for band in [&dec.ch, &dec.cv, &dec.cd] {
        ensure_same_dims(dims, band.dims())?;
    }
    let (hh, hw) = dims;
    let [fa, fh, fv, fd] = match dec.scaling {
        HaarScaling::Lifting => [1.0; 4],
        HaarScaling::Orthonormal => orthonormal_factors(),
    };
    let mut low = Plane::zeros(2 * hh, hw);
    let mut high = Plane::zeros(2 * hh, hw);
    for r in 0..hh {
        for c in 0..hw {
            let (e, o) = lift_inverse(dec.ca[(r, c)] / fa, dec.ch[(r, c)] / fh);
            low[(2 * r, c)] = e;
            low[(2 * r + 1, c)] = o;
            let (e, o) = lift_inverse(dec.cv[(r, c)] / fv, dec.cd[(r, c)] / fd);
            high[(2 * r, c)] = e;
            high[(2 * r + 1, c)] = o;
        }
    }
    let mut out = Plane::zeros(2 * hh, 2 * hw);
    for r in 0..2 * hh {
        for c in 0..hw {
            let (e, o) = lift_inverse(low[(r, c)], high[(r, c)]);
            out[(r, 2 * c)] = e;
            out[(r, 2 * c + 1)] = o;
        }
    }
    Ok(out)
}

/// Orthonormal DCT-II basis; row `k` holds frequency `k`.
fn dct_basis(n: usize) -> Result<Vec<f64>> {
    if n != 2 && n != 8 {
        return Err(Error::UnsupportedBlockSize(n));
    }
    let mut basis = vec![0.0; n * n];
    for k in 0..n {
        let alpha = if k == 0 {
            (1.0 / n as f64).sqrt()
        } else {
            (2.0 / n as f64).sqrt()
        };
        for i in 0..n {
            basis[k * n + i] =
                alpha * (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64).cos();
        }
    }
    Ok(basis)
}

fn square_size(block: &Plane) -> Result<usize> {
    let (h, w) = block.dims();
    if h != w {
        return Err(Error::InvalidDimensions {
            height: h,
            width: w,
            reason: "DCT block must be square",
        });
    }
    Ok(h)
}

// out = A * X * B^T with A, B given as n x n row-major.
fn sandwich(a: &[f64], x: &[f64], b: &[f64], n: usize, out: &mut [f64]) {
    let mut tmp = [0.0f64; 64];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += a[i * n + k] * x[k * n + j];
            }
            tmp[i * n + j] = s;
        }
    }
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += tmp[i * n + k] * b[j * n + k];
            }
            out[i * n + j] = s;
        }
    }
}

fn transpose(m: &[f64], n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = m[i * n + j];
        }
    }
    t
}

/// Orthonormal 2-D DCT-II of a 2x2 or 8x8 block.
pub fn dct2(block: &Plane) -> Result<Plane> {
    let n = square_size(block)?;
    let basis = dct_basis(n)?;
    let mut out = vec![0.0; n * n];
    sandwich(&basis, block.as_slice(), &basis, n, &mut out);
    Plane::from_vec(n, n, out)
}

/// Inverse of [`dct2`].
pub fn idct2(block: &Plane) -> Result<Plane> {
    let n = square_size(block)?;
    let basis_t = transpose(&dct_basis(n)?, n);
    let mut out = vec![0.0; n * n];
    sandwich(&basis_t, block.as_slice(), &basis_t, n, &mut out);
    Plane::from_vec(n, n, out)
}

pub const LUMA_QUANT: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

pub const CHROMA_QUANT: [u16; 64] = [
    17, 18, 24, 47, 99, 99, 99, 99, //
    18, 21, 26, 66, 99, 99, 99, 99, //
    24, 26, 56, 99, 99, 99, 99, 99, //
    47, 66, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99,
];

/// Quality-scaled quantization table (IJG convention).
pub fn scaled_quant_table(base: &[u16; 64], qf: u32) -> Result<[f64; 64]> {
    if !(1..=100).contains(&qf) {
        return Err(Error::QualityOutOfRange(qf));
    }
    let scale = if qf < 50 { 5000 / qf } else { 200 - 2 * qf };
    let mut table = [0.0; 64];
    for (t, &b) in table.iter_mut().zip(base) {
        *t = ((u32::from(b) * scale + 50) / 100).clamp(1, 255) as f64;
    }
    Ok(table)
}

/// Quantize/dequantize every 8x8 block of `plane` with `table`.
///
/// The plane must be block aligned; output is rounded and clamped to 8 bits.
pub fn jpeg_quantize_plane(plane: &Plane, table: &[f64; 64]) -> Result<Plane> {
    let (h, w) = plane.dims();
    if h % 8 != 0 || w % 8 != 0 {
        return Err(Error::InvalidDimensions {
            height: h,
            width: w,
            reason: "JPEG simulation needs dimensions that are multiples of 8",
        });
    }
    let basis = dct_basis(8)?;
    let basis_t = transpose(&basis, 8);
    let mut out = Plane::zeros(h, w);
    let mut block = [0.0; 64];
    let mut coeffs = [0.0; 64];
    for br in (0..h).step_by(8) {
        for bc in (0..w).step_by(8) {
            for i in 0..8 {
                for j in 0..8 {
                    block[i * 8 + j] = plane[(br + i, bc + j)] - 128.0;
                }
            }
            sandwich(&basis, &block, &basis, 8, &mut coeffs);
            for (c, q) in coeffs.iter_mut().zip(table) {
                *c = (*c / q).round() * q;
            }
            sandwich(&basis_t, &coeffs, &basis_t, 8, &mut block);
            for i in 0..8 {
                for j in 0..8 {
                    out[(br + i, bc + j)] = (block[i * 8 + j] + 128.0).round().clamp(0.0, 255.0);
                }
            }
        }
    }
    Ok(out)
}

/// Luminance JPEG compression round trip at quality `qf`.
pub fn jpeg_roundtrip(lum: &Plane, qf: u32) -> Result<Plane> {
    let table = scaled_quant_table(&LUMA_QUANT, qf)?;
    jpeg_quantize_plane(lum, &table)
}
