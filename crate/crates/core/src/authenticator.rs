//! Tamper localisation and digest-based recovery.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{BitMatrix, Plane, Raster};
use crate::metrics::Confusion;

/// Side of the pixel block that each watermark bit covers.
pub const BLOCK: usize = 4;
/// Components smaller than this are treated as isolated noise.
pub const MIN_COMPONENT: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct TamperMap {
    pub block: BitMatrix,
    pub pixel: BitMatrix,
}

impl TamperMap {
    pub fn from_block(block: BitMatrix) -> Self {
        let pixel = expand(&block);
        Self { block, pixel }
    }
}

fn same_shape(a: &BitMatrix, b: &BitMatrix) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            left: a.dims(),
            right: b.dims(),
        });
    }
    Ok(())
}

/// Raw tamper map: cellwise XOR of the expected and extracted watermarks.
pub fn detect(expected: &BitMatrix, extracted: &BitMatrix) -> Result<BitMatrix> {
    same_shape(expected, extracted)?;
    expected.xor(extracted)
}

/// Clear 8-connected components with fewer than `min_size` set cells.
pub fn remove_small_components(map: &BitMatrix, min_size: usize) -> BitMatrix {
    let (h, w) = map.dims();
    let mut out = map.clone();
    let mut seen = vec![false; h * w];
    let mut stack = Vec::new();
    let mut component = Vec::new();
    for start in 0..h * w {
        if seen[start] || !map.get(start / w, start % w) {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        component.clear();
        while let Some(k) = stack.pop() {
            component.push(k);
            let (r, c) = ((k / w) as isize, (k % w) as isize);
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (nr, nc) = (r + dr, c + dc);
                    if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                        continue;
                    }
                    let n = nr as usize * w + nc as usize;
                    if !seen[n] && map.get(nr as usize, nc as usize) {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
        }
        if component.len() < min_size {
            for &k in &component {
                out.set(k / w, k % w, false);
            }
        }
    }
    out
}

const CROSS: [(isize, isize); 5] = [(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)];

// Dilation pads with 0 and erosion with 1, so closing never eats the border.
fn morph(map: &BitMatrix, dilate: bool) -> BitMatrix {
    let (h, w) = map.dims();
    BitMatrix::from_fn(h, w, |r, c| {
        let mut hits = CROSS.iter().map(|&(dr, dc)| {
            let (nr, nc) = (r as isize + dr, c as isize + dc);
            if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                !dilate
            } else {
                map.get(nr as usize, nc as usize)
            }
        });
        if dilate {
            hits.any(|b| b)
        } else {
            hits.all(|b| b)
        }
    })
}

pub fn dilate(map: &BitMatrix) -> BitMatrix {
    morph(map, true)
}

pub fn erode(map: &BitMatrix) -> BitMatrix {
    morph(map, false)
}

/// Closing with the radius-one disk (a 3x3 cross).
pub fn close(map: &BitMatrix) -> BitMatrix {
    erode(&dilate(map))
}

/// Drop isolated detections, then close small gaps.
pub fn postprocess(raw: &BitMatrix) -> BitMatrix {
    close(&remove_small_components(raw, MIN_COMPONENT))
}

/// Replicate each cell into a `BLOCK`x`BLOCK` square.
pub fn expand(block: &BitMatrix) -> BitMatrix {
    let (h, w) = block.dims();
    BitMatrix::from_fn(h * BLOCK, w * BLOCK, |r, c| block.get(r / BLOCK, c / BLOCK))
}

/// A block is tampered when at least half of its pixels are.
pub fn block_truth(pixel_truth: &BitMatrix) -> BitMatrix {
    let (h, w) = pixel_truth.dims();
    BitMatrix::from_fn(h / BLOCK, w / BLOCK, |br, bc| {
        let mut n = 0;
        for r in br * BLOCK..(br + 1) * BLOCK {
            for c in bc * BLOCK..(bc + 1) * BLOCK {
                n += pixel_truth.get(r, c) as usize;
            }
        }
        2 * n >= BLOCK * BLOCK
    })
}

/// Per-pixel replacement: flagged pixels come from the digest.
pub fn recover(registered: &Raster, pixel_map: &BitMatrix, digest: &Raster) -> Result<Raster> {
    if registered.dims() != digest.dims() {
        return Err(Error::DimensionMismatch {
            left: registered.dims(),
            right: digest.dims(),
        });
    }
    if registered.dims() != pixel_map.dims() {
        return Err(Error::DimensionMismatch {
            left: registered.dims(),
            right: pixel_map.dims(),
        });
    }
    if registered.channels() != digest.channels() {
        return Err(Error::ChannelCount {
            expected: registered.channels(),
            actual: digest.channels(),
        });
    }
    let planes = registered
        .planes()
        .iter()
        .zip(digest.planes())
        .map(|(a, b)| {
            let (h, w) = a.dims();
            Plane::from_fn(h, w, |r, c| {
                if pixel_map.get(r, c) {
                    b[(r, c)]
                } else {
                    a[(r, c)]
                }
                .clamp(0.0, 255.0)
            })
        })
        .collect();
    Raster::from_planes(planes)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub confusion: Confusion,
    /// `None` when the truth has no tampered cells.
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
}

pub fn score(map: &BitMatrix, truth: &BitMatrix) -> Result<Score> {
    let confusion = Confusion::between(map, truth)?;
    Ok(Score {
        confusion,
        tpr: confusion.tpr(),
        fpr: confusion.fpr(),
    })
}
