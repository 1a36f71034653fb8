use proptest::prelude::*;

use semifrag::attacks::{chain, chain_geometry, parse_chain};
use semifrag::authenticator::{detect, postprocess, recover};
use semifrag::embedder::{embed, generate_watermark, ThresholdParams, WatermarkKey};
use semifrag::halftone::{acm_scramble, acm_unscramble, inverse_halftone, jarvis_halftone};
use semifrag::imaging::{load_image, resize_nearest, rgb_to_yuv, save_image, yuv_to_rgb, BitMatrix, Plane, Raster};
use semifrag::metrics::{ber, psnr_from_mse, ssim_plane, SsimParams};
use semifrag::transforms::{dct2, idct2, lwt_haar_forward, lwt_haar_inverse};

fn plane(h: usize, w: usize, range: std::ops::Range<f64>) -> impl Strategy<Value = Plane> {
    prop::collection::vec(range, h * w).prop_map(move |v| Plane::from_vec(h, w, v).unwrap())
}

fn bits(h: usize, w: usize) -> impl Strategy<Value = BitMatrix> {
    prop::collection::vec(any::<bool>(), h * w).prop_map(move |v| {
        BitMatrix::from_bits(h, w, v.into_iter().map(u8::from).collect()).unwrap()
    })
}

fn sparse_bits(h: usize, w: usize) -> impl Strategy<Value = BitMatrix> {
    prop::collection::vec(0u8..10, h * w)
        .prop_map(move |v| BitMatrix::from_fn(h, w, |r, c| v[r * w + c] < 2))
}

fn max_abs_diff(a: &Plane, b: &Plane) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn color_round_trip_within_one_level(rgb in prop::collection::vec(0u8..=255, 3 * 16)) {
        let planes = (0..3)
            .map(|ch| Plane::from_vec(4, 4, (0..16).map(|i| rgb[3 * i + ch] as f64).collect()).unwrap())
            .collect();
        let img = Raster::from_planes(planes).unwrap();
        let back = yuv_to_rgb(&rgb_to_yuv(&img).unwrap()).unwrap().quantized();
        for ch in 0..3 {
            prop_assert!(max_abs_diff(img.plane(ch), back.plane(ch)) <= 1.0);
        }
    }

    #[test]
    fn nearest_upscale_then_decimate_is_identity(m in plane(5, 7, 0.0..255.0)) {
        let up = resize_nearest(&m, 10, 14).unwrap();
        let down = Plane::from_fn(5, 7, |r, c| up[(2 * r, 2 * c)]);
        prop_assert_eq!(down, m);
    }

    #[test]
    fn lwt_round_trip(m in plane(8, 12, -500.0..500.0)) {
        let back = lwt_haar_inverse(&lwt_haar_forward(&m).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&m, &back) <= 1e-9);
    }

    #[test]
    fn dct_round_trip_and_dc(m in plane(2, 2, 0.0..255.0), big in plane(8, 8, -100.0..100.0)) {
        let d = dct2(&m).unwrap();
        prop_assert!(max_abs_diff(&m, &idct2(&d).unwrap()) <= 1e-9);
        prop_assert!((d[(0, 0)] - 2.0 * m.mean()).abs() <= 1e-9);
        prop_assert!(max_abs_diff(&big, &idct2(&dct2(&big).unwrap()).unwrap()) <= 1e-9);
    }

    #[test]
    fn halftone_is_binary_and_inverse_in_range(m in plane(16, 16, 0.0..255.0)) {
        let h = jarvis_halftone(&m);
        prop_assert!(h.as_slice().iter().all(|&b| b <= 1));
        let inv = inverse_halftone(&h).unwrap();
        prop_assert!(inv.as_slice().iter().all(|v| (0.0..=255.0).contains(v)));
    }

    #[test]
    fn cat_map_is_a_permutation(b in bits(16, 16), n in 0usize..40) {
        let s = acm_scramble(&b, n).unwrap();
        prop_assert_eq!(s.count_ones(), b.count_ones());
        prop_assert_eq!(acm_unscramble(&s, n).unwrap(), b);
    }

    #[test]
    fn xor_detection_is_an_involution(w in bits(12, 12), w2 in bits(12, 12)) {
        let d = detect(&w, &w2).unwrap();
        prop_assert_eq!(detect(&w, &d).unwrap(), w2);
    }

    #[test]
    fn postprocess_is_idempotent(m in sparse_bits(24, 24)) {
        let once = postprocess(&m);
        prop_assert_eq!(postprocess(&once), once);
    }

    #[test]
    fn recovery_stays_in_range(
        a in plane(8, 8, -40.0..300.0),
        d in plane(8, 8, -40.0..300.0),
        m in bits(8, 8),
    ) {
        let out = recover(&Raster::gray(a), &m, &Raster::gray(d)).unwrap();
        prop_assert!(out.plane(0).as_slice().iter().all(|v| (0.0..=255.0).contains(v)));
    }

    #[test]
    fn ber_counts_disagreements(w in bits(10, 10), w2 in bits(10, 10)) {
        let expected = w.xor(&w2).unwrap().count_ones() as f64 / 100.0;
        prop_assert_eq!(ber(&w, &w2).unwrap(), expected);
        prop_assert_eq!(ber(&w, &w).unwrap(), 0.0);
    }

    #[test]
    fn psnr_decreases_with_mse(a in 0.01f64..1e4, b in 0.01f64..1e4) {
        prop_assume!(a != b);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(psnr_from_mse(lo) > psnr_from_mse(hi));
    }

    #[test]
    fn ssim_is_symmetric(x in plane(16, 16, 0.0..255.0), y in plane(16, 16, 0.0..255.0)) {
        let p = SsimParams::default();
        prop_assert!((ssim_plane(&x, &y, &p).unwrap() - ssim_plane(&y, &x, &p).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn seeded_attacks_are_reproducible(m in plane(16, 16, 0.0..255.0), seed in any::<u64>()) {
        let img = Raster::gray(m);
        let attacks = parse_chain("sp:0.05;speckle:0.01;gauss:0.001").unwrap();
        prop_assert_eq!(chain(&img, &attacks, seed).unwrap(), chain(&img, &attacks, seed).unwrap());
    }
}

#[test]
fn file_round_trip_is_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let img = Raster::from_planes(
        (0..3)
            .map(|ch| Plane::from_fn(9, 13, |r, c| ((r * 31 + c * 17 + ch * 71) % 256) as f64))
            .collect(),
    )
    .unwrap();
    let gray = Raster::gray(img.plane(1).clone());
    for ext in ["png", "bmp"] {
        for (name, raster) in [("rgb", &img), ("gray", &gray)] {
            let path = tmp.path().join(format!("{name}.{ext}"));
            save_image(raster, &path).unwrap();
            assert_eq!(&load_image(&path).unwrap().raster, raster, "{name}.{ext}");
        }
    }
}

#[test]
fn attack_canvas_dimensions() {
    let img = Raster::gray(Plane::from_fn(64, 48, |r, c| ((r * 5 + c * 3) % 256) as f64));
    for spec in ["histeq", "sp:0.1", "jpeg:50", "median:3", "crop:10%", "rot:30", "translate:5,-3", "rot:90"] {
        let attacks = parse_chain(spec).unwrap();
        let out = chain(&img, &attacks, 3).unwrap();
        // rotations keep the canvas, as a cropping rotate does
        assert_eq!(out.dims(), (64, 48), "{spec}");
        assert_eq!(chain_geometry(64, 48, &attacks).1, 64, "{spec}");
    }
    let out = chain(&img, &parse_chain("scale:0.5").unwrap(), 3).unwrap();
    assert_eq!(out.dims(), (32, 24));
}

#[test]
fn payload_is_one_bit_per_block() {
    let w = generate_watermark(WatermarkKey(3), 128, 128);
    assert_eq!(w.len(), 16384);
    let ones = w.count_ones() as f64 / w.len() as f64;
    assert!((0.45..0.55).contains(&ones), "{ones}");
}

#[test]
fn embedding_leaves_chroma_untouched() {
    let cover = Raster::from_planes(
        (0..3)
            .map(|ch| {
                Plane::from_fn(64, 64, |r, c| {
                    120.0 + 50.0 * ((r as f64 * 0.3 + ch as f64).sin() + (c as f64 * 0.2).cos()) / 2.0
                })
            })
            .collect(),
    )
    .unwrap();
    let e = embed(&cover, WatermarkKey(5), &ThresholdParams::default()).unwrap();
    let a = rgb_to_yuv(&cover).unwrap();
    let b = rgb_to_yuv(&e.watermarked).unwrap();
    for ch in 1..3 {
        assert!(max_abs_diff(a.plane(ch), b.plane(ch)) <= 1e-9, "channel {ch}");
    }
    assert!(max_abs_diff(a.plane(0), b.plane(0)) > 0.0);
}

#[test]
fn embedding_is_deterministic() {
    let cover = Raster::gray(Plane::from_fn(64, 64, |r, c| ((r * r + 3 * c) % 200) as f64 + 20.0));
    let p = ThresholdParams::default();
    let a = embed(&cover, WatermarkKey(9), &p).unwrap();
    let b = embed(&cover, WatermarkKey(9), &p).unwrap();
    assert_eq!(a.watermarked, b.watermarked);
    assert_eq!(a.digest, b.digest);
}
