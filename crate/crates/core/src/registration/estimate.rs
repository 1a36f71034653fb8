use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::descriptor::{distance, Descriptor};
use super::transform::Transform;
use crate::error::{Error, Result};

/// A correspondence from a target-image point to a reference-image point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub target: (f64, f64),
    pub reference: (f64, f64),
    pub distance: f64,
}

/// Nearest-neighbour matching with a distance-ratio test; only points with
/// the same Laplacian sign are compared.
pub fn match_descriptors(target: &[Descriptor], reference: &[Descriptor], ratio: f64) -> Vec<Match> {
    let mut out = Vec::new();
    for t in target {
        let mut best = (f64::INFINITY, usize::MAX);
        let mut second = f64::INFINITY;
        for (k, r) in reference.iter().enumerate() {
            if r.point.laplacian_positive != t.point.laplacian_positive {
                continue;
            }
            let d = distance(t, r);
            if d < best.0 {
                second = best.0;
                best = (d, k);
            } else if d < second {
                second = d;
            }
        }
        if best.1 != usize::MAX && best.0 < ratio * second {
            let r = &reference[best.1];
            out.push(Match {
                target: (t.point.x, t.point.y),
                reference: (r.point.x, r.point.y),
                distance: best.0,
            });
        }
    }
    out
}

/// Least-squares affine map taking `target` points onto `reference` points.
pub fn fit_affine(matches: &[&Match]) -> Option<Transform> {
    if matches.len() < 3 {
        return None;
    }
    let n = matches.len();
    let a = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => matches[i].target.0,
        1 => matches[i].target.1,
        _ => 1.0,
    });
    let bx = DVector::from_fn(n, |i, _| matches[i].reference.0);
    let by = DVector::from_fn(n, |i, _| matches[i].reference.1);
    let svd = a.svd(true, true);
    if svd.singular_values.min() < 1e-8 * svd.singular_values.max().max(1.0) {
        return None;
    }
    let px = svd.solve(&bx, 1e-12).ok()?;
    let py = svd.solve(&by, 1e-12).ok()?;
    let t = Transform::affine(px[0], px[1], px[2], py[0], py[1], py[2]);
    (t.det().abs() > 1e-6).then_some(t)
}

fn residual(t: &Transform, m: &Match) -> f64 {
    let (x, y) = t.apply(m.target.0, m.target.1);
    (x - m.reference.0).hypot(y - m.reference.1)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RansacParams {
    pub iterations: usize,
    pub inlier_radius: f64,
    pub min_inliers: usize,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self {
            iterations: 2000,
            inlier_radius: 3.0,
            min_inliers: 8,
            seed: 0x7261_6e73,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RansacFit {
    pub transform: Transform,
    pub inliers: Vec<usize>,
}

/// Robust affine estimate: 3-point hypotheses, consensus, least-squares refit.
pub fn ransac_affine(matches: &[Match], p: &RansacParams) -> Result<RansacFit> {
    let required = p.min_inliers.max(3);
    if matches.len() < required {
        return Err(Error::InsufficientMatches {
            found: matches.len(),
            required,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut best: Vec<usize> = Vec::new();
    for _ in 0..p.iterations {
        let i = rng.random_range(0..matches.len());
        let j = rng.random_range(0..matches.len());
        let k = rng.random_range(0..matches.len());
        if i == j || j == k || i == k {
            continue;
        }
        let sample = [&matches[i], &matches[j], &matches[k]];
        // skip nearly collinear triples
        let (a, b, c) = (sample[0].target, sample[1].target, sample[2].target);
        let area = ((b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)).abs();
        if area < 1.0 {
            continue;
        }
        let Some(t) = fit_affine(&sample) else { continue };
        let inliers: Vec<usize> = (0..matches.len())
            .filter(|&q| residual(&t, &matches[q]) <= p.inlier_radius)
            .collect();
        if inliers.len() > best.len() {
            best = inliers;
        }
    }
    if best.len() < required {
        return Err(Error::InsufficientMatches {
            found: best.len(),
            required,
        });
    }
    let mut transform = fit_affine(&best.iter().map(|&q| &matches[q]).collect::<Vec<_>>())
        .ok_or(Error::SingularTransform)?;
    // one consensus refresh with the refined model
    let refreshed: Vec<usize> = (0..matches.len())
        .filter(|&q| residual(&transform, &matches[q]) <= p.inlier_radius)
        .collect();
    if refreshed.len() >= best.len() {
        if let Some(t) = fit_affine(&refreshed.iter().map(|&q| &matches[q]).collect::<Vec<_>>()) {
            transform = t;
            best = refreshed;
        }
    }
    Ok(RansacFit {
        transform,
        inliers: best,
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

const SIGNED_PERMUTATIONS: [[f64; 4]; 8] = [
    [1.0, 0.0, 0.0, 1.0],
    [-1.0, 0.0, 0.0, 1.0],
    [1.0, 0.0, 0.0, -1.0],
    [-1.0, 0.0, 0.0, -1.0],
    [0.0, 1.0, 1.0, 0.0],
    [0.0, -1.0, 1.0, 0.0],
    [0.0, 1.0, -1.0, 0.0],
    [0.0, -1.0, -1.0, 0.0],
];

/// The signed axis permutation (identity, quarter turns, flips) whose
/// entries are all within `tolerance` of the linear part of `t`, as
/// `[a, b, d, e]`.
pub fn lattice_linear_part(t: &Transform, tolerance: f64) -> Option<[f64; 4]> {
    let lin = [t.m[0][0], t.m[0][1], t.m[1][0], t.m[1][1]];
    SIGNED_PERMUTATIONS
        .iter()
        .find(|c| c.iter().zip(&lin).all(|(a, b)| (a - b).abs() <= tolerance))
        .copied()
}

/// Snap an estimate onto the pixel lattice when its linear part is a signed
/// axis permutation within `tolerance` and the inlier-median translation is
/// within a quarter pixel of an integer.
///
/// Exact lattice maps resample without interpolation, which keeps the
/// finest-scale wavelet detail intact.
pub fn snap_to_lattice(t: &Transform, matches: &[&Match], tolerance: f64) -> Transform {
    let Some(p) = lattice_linear_part(t, tolerance) else {
        return *t;
    };
    let (tx, ty) = if matches.is_empty() {
        (t.m[0][2], t.m[1][2])
    } else {
        (
            median(matches.iter().map(|m| m.reference.0 - p[0] * m.target.0 - p[1] * m.target.1).collect()),
            median(matches.iter().map(|m| m.reference.1 - p[2] * m.target.0 - p[3] * m.target.1).collect()),
        )
    };
    let near = |v: f64| (v - v.round()).abs() <= 0.25;
    if !(near(tx) && near(ty)) {
        return *t;
    }
    Transform::affine(p[0], p[1], tx.round(), p[2], p[3], ty.round())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(t: &Transform, n: usize, outliers: usize) -> Vec<Match> {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let mut v: Vec<Match> = (0..n)
            .map(|_| {
                let (x, y) = (rng.random_range(0.0..500.0), rng.random_range(0.0..500.0));
                Match {
                    target: (x, y),
                    reference: t.apply(x, y),
                    distance: 0.1,
                }
            })
            .collect();
        for _ in 0..outliers {
            v.push(Match {
                target: (rng.random_range(0.0..500.0), rng.random_range(0.0..500.0)),
                reference: (rng.random_range(0.0..500.0), rng.random_range(0.0..500.0)),
                distance: 0.3,
            });
        }
        v
    }

    #[test]
    fn recovers_affine_with_outliers() {
        let t = Transform::affine(0.9, -0.3, 12.0, 0.25, 1.1, -7.0);
        let fit = ransac_affine(&synthetic(&t, 60, 40), &RansacParams::default()).unwrap();
        assert!(fit.transform.max_abs_diff(&t) < 1e-6);
        assert_eq!(fit.inliers.len(), 60);
    }

    #[test]
    fn too_few_matches() {
        let t = Transform::identity();
        let r = ransac_affine(&synthetic(&t, 2, 0), &RansacParams::default());
        assert!(matches!(r, Err(Error::InsufficientMatches { .. })));
    }

    #[test]
    fn snapping() {
        let noisy = Transform::affine(0.002, 0.999, 0.03, -1.001, 0.001, 511.02);
        let ms = synthetic(&Transform::affine(0.0, 1.0, 0.0, -1.0, 0.0, 511.0), 20, 0);
        let refs: Vec<&Match> = ms.iter().collect();
        let s = snap_to_lattice(&noisy, &refs, 0.01);
        assert_eq!(s, Transform::affine(0.0, 1.0, 0.0, -1.0, 0.0, 511.0));
        let rotated = Transform::rotation_scale_about(3.0, 1.0, 256.0, 256.0);
        assert_eq!(snap_to_lattice(&rotated, &refs, 0.01), rotated);
    }
}
