//! Corpus evaluation: attack catalog on a centre paste, and the recovery sweep.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use semifrag::attacks::{catalog, chain, CatalogEntry};
use semifrag::embedder::{embed_with_quality, WatermarkKey};
use semifrag::imaging::{Plane, Raster};
use semifrag::metrics::{mse, psnr, ssim, SsimParams};
use semifrag::pipeline::{authenticate, paste_center, scenario_truth, square_side, AuthConfig};

use crate::svg::{line_chart, Series};
use crate::{read_image, require, write_json, EmbedArgs};

#[derive(Args, Clone, Debug)]
pub struct EvaluateArgs {
    /// Directory of PNG/BMP covers.
    corpus: PathBuf,
    #[command(flatten)]
    params: EmbedArgs,
    /// Donor for the pasted region (default: the next cover in the corpus).
    #[arg(long)]
    donor: Option<PathBuf>,
    /// Side of the pasted square for the catalog run.
    #[arg(long, default_value_t = 100)]
    paste: usize,
    /// Restrict the catalog to these attack IDs.
    #[arg(long, value_delimiter = ',')]
    ids: Vec<u32>,
    /// Tamper rates (percent) for the recovery sweep.
    #[arg(long, value_delimiter = ',', default_value = "5,10,20,30,40,50,60,70,80")]
    rates: Vec<f64>,
    #[arg(long)]
    skip_catalog: bool,
    #[arg(long)]
    skip_sweep: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Default, Serialize)]
struct Row {
    id: u32,
    name: String,
    params: String,
    psnr_attacked: Option<f64>,
    ssim_attacked: Option<f64>,
    tpr: Option<f64>,
    fpr: Option<f64>,
    error: Option<String>,
}

#[derive(Debug, Default, Serialize)]
struct SweepPoint {
    rate: f64,
    psnr: Option<f64>,
    ssim: Option<f64>,
    mse: Option<f64>,
    tpr: Option<f64>,
    fpr: Option<f64>,
    error: Option<String>,
}

fn covers(dir: &Path) -> Result<Vec<PathBuf>> {
    require(dir)?;
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("png") || e.eq_ignore_ascii_case("bmp"))
        })
        .collect();
    out.sort();
    if out.is_empty() {
        bail!("no PNG or BMP images in {}", dir.display());
    }
    Ok(out)
}

fn rotate_half_turn(img: &Raster) -> Raster {
    img.map_planes(|p| {
        let (h, w) = p.dims();
        Plane::from_fn(h, w, |r, c| p[(h - 1 - r, w - 1 - c)])
    })
}

/// Bring the donor to the cover's channel layout.
fn match_channels(donor: &Raster, channels: usize) -> Result<Raster> {
    Ok(match (donor.channels(), channels) {
        (a, b) if a == b => donor.clone(),
        (3, 1) => Raster::gray(donor.luminance()),
        (1, 3) => Raster::from_planes(vec![donor.plane(0).clone(); 3])?,
        (a, b) => bail!("cannot use a {a}-channel donor for a {b}-channel cover"),
    })
}

pub fn run(args: &EvaluateArgs) -> Result<()> {
    let paths = covers(&args.corpus)?;
    let fixed_donor = args.donor.as_deref().map(read_image).transpose()?;
    for (i, path) in paths.iter().enumerate() {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("image").to_string();
        let cover = read_image(path)?;
        let donor = match &fixed_donor {
            Some(d) => d.clone(),
            None if paths.len() > 1 => read_image(&paths[(i + 1) % paths.len()])?,
            None => rotate_half_turn(&cover),
        };
        let donor = match_channels(&donor, cover.channels())?;
        let dir = args.out.join(&stem);
        fs::create_dir_all(dir.join("plots"))?;
        log::info!("evaluating {}", path.display());
        evaluate_cover(args, &cover, &donor, &dir).with_context(|| format!("evaluating {}", path.display()))?;
    }
    Ok(())
}

fn evaluate_cover(args: &EvaluateArgs, cover: &Raster, donor: &Raster, dir: &Path) -> Result<()> {
    let key = WatermarkKey(args.params.key);
    let e = embed_with_quality(cover, key, &args.params.thresholds(), args.params.qf)?;
    let watermarked = e.watermarked.quantized();
    write_json(&dir.join("embed.json"), &e.report)?;
    let cfg = AuthConfig::default();

    if !args.skip_catalog {
        let tampered = paste_center(&watermarked, donor, args.paste, args.paste)?;
        let entries: Vec<CatalogEntry> = catalog()
            .into_iter()
            .filter(|c| args.ids.is_empty() || args.ids.contains(&c.id))
            .collect();
        let mut rows = Vec::with_capacity(entries.len());
        for entry in &entries {
            let mut row = Row {
                id: entry.id,
                name: entry.name.to_string(),
                params: entry.attack.to_string(),
                ..Row::default()
            };
            let attacks = [entry.attack];
            let outcome = (|| -> Result<()> {
                let attacked = chain(&tampered.image, &attacks, args.seed)?;
                if attacked.dims() == watermarked.dims() {
                    row.psnr_attacked = Some(psnr(&watermarked, &attacked)?);
                    row.ssim_attacked = Some(ssim(&watermarked, &attacked, &SsimParams::default())?);
                }
                let truth = scenario_truth(&tampered.truth, &attacks)?;
                let auth = authenticate(&attacked, &e.digest, key, &cfg, Some(&truth))?;
                let s = auth.report.score.expect("truth supplied");
                row.tpr = s.tpr;
                row.fpr = s.fpr;
                Ok(())
            })();
            if let Err(err) = outcome {
                log::warn!("attack {} ({}) failed: {err:#}", entry.id, row.params);
                row.error = Some(format!("{err:#}"));
            }
            log::info!("attack {} {}: tpr {:?} fpr {:?}", row.id, row.params, row.tpr, row.fpr);
            rows.push(row);
        }
        fs::write(dir.join("results.csv"), results_csv(&rows))?;
        let ids = |f: fn(&Row) -> Option<f64>| -> Vec<(f64, f64)> {
            rows.iter().map(|r| (r.id as f64, f(r).unwrap_or(f64::NAN))).collect()
        };
        fs::write(
            dir.join("plots/detection.svg"),
            line_chart(
                "Tamper detection under attack",
                "attack id",
                "percent",
                &[
                    Series { label: "TPR", color: "#1f77b4", points: ids(|r| r.tpr) },
                    Series { label: "FPR", color: "#d62728", points: ids(|r| r.fpr) },
                ],
            ),
        )?;
        fs::write(
            dir.join("plots/attacked_psnr.svg"),
            line_chart(
                "Attacked image quality",
                "attack id",
                "PSNR (dB)",
                &[Series { label: "PSNR", color: "#2ca02c", points: ids(|r| r.psnr_attacked) }],
            ),
        )?;
    }

    if !args.skip_sweep {
        let (h, w) = cover.dims();
        let mut points = Vec::new();
        for &rate in &args.rates {
            let mut p = SweepPoint { rate, ..SweepPoint::default() };
            let outcome = (|| -> Result<()> {
                let side = square_side(h, w, rate / 100.0);
                let t = paste_center(&watermarked, donor, side, side)?;
                let truth = scenario_truth(&t.truth, &[])?;
                let auth = authenticate(&t.image, &e.digest, key, &cfg, Some(&truth))?;
                let rec = auth.recovered.quantized();
                p.psnr = Some(psnr(cover, &rec)?);
                p.ssim = Some(ssim(cover, &rec, &SsimParams::default())?);
                p.mse = Some(mse(cover, &rec)?);
                if let Some(s) = auth.report.score {
                    p.tpr = s.tpr;
                    p.fpr = s.fpr;
                }
                Ok(())
            })();
            if let Err(err) = outcome {
                log::warn!("sweep at {rate}% failed: {err:#}");
                p.error = Some(format!("{err:#}"));
            }
            points.push(p);
        }
        fs::write(dir.join("recovery.csv"), recovery_csv(&points))?;
        fs::write(
            dir.join("plots/recovery.svg"),
            line_chart(
                "Recovered image quality",
                "tamper rate (%)",
                "PSNR (dB)",
                &[Series {
                    label: "PSNR",
                    color: "#1f77b4",
                    points: points.iter().map(|p| (p.rate, p.psnr.unwrap_or(f64::NAN))).collect(),
                }],
            ),
        )?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn num(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.4}")).unwrap_or_default()
}

fn results_csv(rows: &[Row]) -> String {
    let mut s = String::from("id,name,params,psnr_attacked,ssim_attacked,tpr,fpr,error\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.id,
            csv_field(&r.name),
            csv_field(&r.params),
            num(r.psnr_attacked),
            num(r.ssim_attacked),
            num(r.tpr),
            num(r.fpr),
            csv_field(r.error.as_deref().unwrap_or(""))
        );
    }
    s
}

fn recovery_csv(points: &[SweepPoint]) -> String {
    let mut s = String::from("rate,psnr,ssim,mse,tpr,fpr,error\n");
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            p.rate,
            num(p.psnr),
            num(p.ssim),
            num(p.mse),
            num(p.tpr),
            num(p.fpr),
            csv_field(p.error.as_deref().unwrap_or(""))
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_parameter_lists() {
        let rows = [Row {
            id: 5,
            name: "sharpen".into(),
            params: "sharpen:3,0.5,0.8".into(),
            tpr: Some(95.0),
            ..Row::default()
        }];
        let csv = results_csv(&rows);
        let line = csv.lines().nth(1).unwrap();
        assert_eq!(line, "5,sharpen,\"sharpen:3,0.5,0.8\",,,95.0000,,");
        assert_eq!(csv.lines().next().unwrap().split(',').count(), 8);
    }

    #[test]
    fn half_turn_is_an_involution() {
        let img = Raster::gray(Plane::from_fn(4, 6, |r, c| (r * 6 + c) as f64));
        assert_eq!(rotate_half_turn(&rotate_half_turn(&img)), img);
        assert_eq!(rotate_half_turn(&img).plane(0)[(0, 0)], 23.0);
    }
}
