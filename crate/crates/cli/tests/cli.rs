use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use semifrag::imaging::{load_bits, load_image, save_image, Plane, Raster};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_semifrag"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn semifrag")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn cover(dir: &Path) -> PathBuf {
    let planes = (0..3)
        .map(|ch| {
            Plane::from_fn(64, 64, |r, c| {
                let x = r as f64 * 0.2 + ch as f64;
                let y = c as f64 * 0.15;
                128.0 + 60.0 * (x.sin() * y.cos()) + 20.0 * ((r * 7 + c * 13 + ch) % 11) as f64 / 11.0
            })
        })
        .collect();
    let path = dir.join("cover.png");
    save_image(&Raster::from_planes(planes).unwrap(), &path).unwrap();
    path
}

#[test]
fn missing_input_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    for cmd in ["embed", "attack", "digest"] {
        let mut args = vec![cmd, "/definitely/not/here.png", "--out", s(tmp.path())];
        if cmd == "attack" {
            args.extend(["--attack", "sp:0.1"]);
        }
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{cmd}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("not found"));
    }
}

#[test]
fn embed_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let src = cover(tmp.path());
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let out = run(&["embed", s(&src), "--key", "11", "--out", s(dir)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["watermarked.png", "digest.png", "report.json"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(a.join("report.json")).unwrap()).unwrap();
    assert!(report["psnr"].as_f64().unwrap() > 30.0);
    assert_eq!(report["key"], 11);
}

#[test]
fn zero_density_noise_is_identity() {
    let tmp = tempfile::tempdir().unwrap();
    let src = cover(tmp.path());
    let out = run(&["attack", s(&src), "--attack", "sp:0.0", "--out", s(tmp.path())]);
    assert!(out.status.success());
    let before = load_image(&src).unwrap().raster;
    let after = load_image(tmp.path().join("attacked.png")).unwrap().raster;
    assert_eq!(before, after);
}

#[test]
fn quarter_turn_keeps_square_dims() {
    let tmp = tempfile::tempdir().unwrap();
    let src = cover(tmp.path());
    let out = run(&["attack", s(&src), "--attack", "rot:90", "--out", s(tmp.path())]);
    assert!(out.status.success());
    let before = load_image(&src).unwrap().raster;
    let after = load_image(tmp.path().join("attacked.png")).unwrap().raster;
    assert_eq!(after.dims(), (64, 64));
    // counter-clockwise: the top-right corner moves to the top-left
    assert_eq!(after.plane(0)[(0, 0)], before.plane(0)[(0, 63)]);
}

#[test]
fn bad_attack_grammar_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let src = cover(tmp.path());
    let out = run(&["attack", s(&src), "--attack", "wobble:3", "--out", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tamper_writes_truth_mask() {
    let tmp = tempfile::tempdir().unwrap();
    let src = cover(tmp.path());
    let donor = tmp.path().join("donor.png");
    save_image(&Raster::from_planes(vec![Plane::filled(32, 32, 3.0); 3]).unwrap(), &donor).unwrap();
    let out = run(&[
        "tamper",
        s(&src),
        "--paste",
        s(&donor),
        "--at",
        "10,20",
        "--size",
        "16,8",
        "--out",
        s(tmp.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let truth = load_bits(tmp.path().join("truth.png")).unwrap().remove(0);
    assert_eq!(truth.count_ones(), 16 * 8);
    assert!(truth.get(20, 10) && truth.get(27, 25) && !truth.get(28, 10));
    let tampered = load_image(tmp.path().join("tampered.png")).unwrap().raster;
    assert_eq!(tampered.plane(1)[(20, 10)], 3.0);
}

#[test]
fn authenticate_clean_image_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let src = cover(tmp.path());
    let e = tmp.path().join("e");
    assert!(run(&["embed", s(&src), "--key", "3", "--scramble", "5", "--out", s(&e)]).status.success());
    let a = tmp.path().join("a");
    let out = run(&[
        "authenticate",
        s(&e.join("watermarked.png")),
        "--digest",
        s(&e.join("digest.png")),
        "--key",
        "3",
        "--scramble",
        "5",
        "--skip-registration",
        "--out",
        s(&a),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["registered.png", "tamper_map.png", "recovered.png", "report.json"] {
        assert!(a.join(file).exists(), "{file}");
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(a.join("report.json")).unwrap()).unwrap();
    assert!(report["ber"].as_f64().unwrap() < 0.2, "{report}");
    assert!(report["score"].is_null());
}
