//! `semifrag` command-line tool.

mod evaluate;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use semifrag::attacks::{chain, format_chain, parse_chain, Attack};
use semifrag::authenticator::block_truth;
use semifrag::embedder::{embed_with_quality, EmbedReport, ThresholdParams, WatermarkKey};
use semifrag::halftone::{halftone_raster, inverse_halftone_raster};
use semifrag::imaging::{load_bits, load_image, save_bits, save_image, Raster};
use semifrag::metrics::{psnr, ssim, SsimParams};
use semifrag::pipeline::{
    authenticate, copy_move, digest_to_raster, paste, scenario_truth, scramble_digest, unscramble_digest, AuthConfig,
    AuthReport, Region, Tampered,
};

#[derive(Parser)]
#[command(name = "semifrag", version, about = "Semi-fragile watermarking with tamper localisation and recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Watermark a cover image and produce its halftone digest.
    Embed {
        cover: PathBuf,
        #[command(flatten)]
        params: EmbedArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Halftone digest of an image, plus its inverse-halftoned preview.
    Digest {
        image: PathBuf,
        /// Scramble the digest with this many cat-map iterations (0 = off).
        #[arg(long, default_value_t = 0)]
        scramble: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Apply an attack chain such as "sp:0.05;rot:90;jpeg:70".
    Attack {
        image: PathBuf,
        #[arg(long)]
        attack: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Forge an image and write the tampered copy with its truth mask.
    Tamper {
        image: PathBuf,
        /// Donor image for a paste; its centre `--size` region is used.
        #[arg(long, conflicts_with = "copy_move")]
        paste: Option<PathBuf>,
        /// Destination column,row of the pasted region.
        #[arg(long, value_parser = parse_pair, default_value = "206,206")]
        at: (usize, usize),
        /// Width,height of the pasted region.
        #[arg(long, value_parser = parse_pair, default_value = "100,100")]
        size: (usize, usize),
        /// Copy-move a square covering this fraction of the image instead.
        #[arg(long)]
        copy_move: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Register, extract, localise tampering and recover.
    Authenticate {
        suspect: PathBuf,
        #[arg(long)]
        digest: PathBuf,
        #[arg(long, default_value_t = 1)]
        key: u64,
        /// Cat-map iterations the digest was scrambled with (0 = not scrambled).
        #[arg(long, default_value_t = 0)]
        scramble: usize,
        /// Pixel truth mask in the original frame, for TPR/FPR.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Attack chain the suspect went through; lets the truth include
        /// content lost to cropping or warping.
        #[arg(long)]
        attack: Option<String>,
        #[arg(long)]
        skip_registration: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the attack catalog and the recovery sweep over a corpus.
    Evaluate(evaluate::EvaluateArgs),
}

#[derive(Args, Clone, Debug)]
pub struct EmbedArgs {
    #[arg(long, default_value_t = 1)]
    pub key: u64,
    #[arg(long, default_value_t = 5.0)]
    pub t1: f64,
    #[arg(long, default_value_t = 3.0)]
    pub t2: f64,
    /// JPEG quality used for the texture measure.
    #[arg(long, default_value_t = 30)]
    pub qf: u32,
    /// Scramble the digest with this many cat-map iterations (0 = off).
    #[arg(long, default_value_t = 0)]
    pub scramble: usize,
}

impl EmbedArgs {
    pub fn thresholds(&self) -> ThresholdParams {
        ThresholdParams { t1: self.t1, t2: self.t2 }
    }
}

/// An input path that does not exist; reported with exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("input not found: {0}")]
pub struct MissingInput(PathBuf);

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two comma-separated numbers, got {s:?}"))?;
    let num = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

pub fn require(path: &Path) -> Result<()> {
    if !path.exists() {
        return Err(MissingInput(path.to_path_buf()).into());
    }
    Ok(())
}

pub fn read_image(path: &Path) -> Result<Raster> {
    require(path)?;
    Ok(load_image(path).with_context(|| format!("reading {}", path.display()))?.raster)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn out_dir(dir: &Path) -> Result<&Path> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

#[derive(Serialize)]
struct EmbedOutput {
    key: u64,
    qf: u32,
    scramble: usize,
    height: usize,
    width: usize,
    channels: usize,
    #[serde(flatten)]
    quality: EmbedReport,
}

fn cmd_embed(cover: &Path, params: &EmbedArgs, out: &Path) -> Result<()> {
    let img = read_image(cover)?;
    let e = embed_with_quality(&img, WatermarkKey(params.key), &params.thresholds(), params.qf)?;
    let digest = if params.scramble > 0 {
        scramble_digest(&e.digest, params.scramble)?
    } else {
        e.digest
    };
    let out = out_dir(out)?;
    save_image(&e.watermarked, out.join("watermarked.png"))?;
    save_image(&digest_to_raster(&digest)?, out.join("digest.png"))?;
    let (height, width) = img.dims();
    write_json(
        &out.join("report.json"),
        &EmbedOutput {
            key: params.key,
            qf: params.qf,
            scramble: params.scramble,
            height,
            width,
            channels: img.channels(),
            quality: e.report,
        },
    )
}

fn cmd_digest(image: &Path, scramble: usize, out: &Path) -> Result<()> {
    let img = read_image(image)?.quantized();
    let digest = halftone_raster(&img);
    let preview = inverse_halftone_raster(&digest)?;
    let stored = if scramble > 0 {
        scramble_digest(&digest, scramble)?
    } else {
        digest
    };
    let out = out_dir(out)?;
    save_image(&digest_to_raster(&stored)?, out.join("digest.png"))?;
    save_image(&preview, out.join("inverse.png"))?;
    write_json(
        &out.join("report.json"),
        &serde_json::json!({
            "scramble": scramble,
            "inverse_psnr": psnr(&img, &preview.quantized())?,
            "inverse_ssim": ssim(&img, &preview.quantized(), &SsimParams::default())?,
        }),
    )
}

fn cmd_attack(image: &Path, spec: &str, seed: u64, out: &Path) -> Result<()> {
    let img = read_image(image)?;
    let attacks = parse_chain(spec)?;
    let attacked = chain(&img, &attacks, seed)?;
    let out = out_dir(out)?;
    save_image(&attacked, out.join("attacked.png"))?;
    let (p, s) = if attacked.dims() == img.dims() {
        (
            Some(psnr(&img, &attacked)?),
            Some(ssim(&img, &attacked, &SsimParams::default())?),
        )
    } else {
        (None, None)
    };
    write_json(
        &out.join("report.json"),
        &serde_json::json!({
            "chain": format_chain(&attacks),
            "seed": seed,
            "height": attacked.height(),
            "width": attacked.width(),
            "psnr": p,
            "ssim": s,
        }),
    )
}

fn cmd_tamper(
    image: &Path,
    donor: Option<&Path>,
    at: (usize, usize),
    size: (usize, usize),
    fraction: Option<f64>,
    out: &Path,
) -> Result<()> {
    let img = read_image(image)?;
    let t: Tampered = match (donor, fraction) {
        (_, Some(f)) => copy_move(&img, f)?,
        (Some(d), None) => {
            let src = read_image(d)?;
            let (w, h) = size;
            let region = Region::centered(src.height(), src.width(), h, w);
            if (region.height, region.width) != (h, w) {
                bail!("donor {} is smaller than {w}x{h}", d.display());
            }
            paste(&img, &src, region, at.1, at.0)?
        }
        (None, None) => bail!("one of --paste or --copy-move is required"),
    };
    let out = out_dir(out)?;
    save_image(&t.image, out.join("tampered.png"))?;
    save_bits(&t.truth, out.join("truth.png"))?;
    Ok(())
}

#[derive(Serialize)]
struct AuthOutput<'a> {
    key: u64,
    scramble: usize,
    attack: Option<String>,
    #[serde(flatten)]
    report: &'a AuthReport,
}

#[allow(clippy::too_many_arguments)]
fn cmd_authenticate(
    suspect: &Path,
    digest_path: &Path,
    key: u64,
    scramble: usize,
    truth: Option<&Path>,
    attack: Option<&str>,
    skip_registration: bool,
    out: &Path,
) -> Result<()> {
    let img = read_image(suspect)?;
    require(digest_path)?;
    let mut digest = load_bits(digest_path)?;
    if scramble > 0 {
        digest = unscramble_digest(&digest, scramble)?;
    }
    let attacks: Vec<Attack> = attack.map(parse_chain).transpose()?.unwrap_or_default();
    let block_truth = match truth {
        Some(p) => {
            require(p)?;
            let px = load_bits(p)?.swap_remove(0);
            Some(if attacks.is_empty() {
                block_truth(&px)
            } else {
                scenario_truth(&px, &attacks)?
            })
        }
        None => None,
    };
    let cfg = AuthConfig {
        skip_registration,
        ..AuthConfig::default()
    };
    let auth = authenticate(&img, &digest, WatermarkKey(key), &cfg, block_truth.as_ref())?;
    if let Some(reason) = &auth.report.registration.skipped {
        log::warn!("registration fell back to identity: {reason}");
    }
    if auth.report.extraction.iter().any(|r| r.fallback) {
        log::warn!("network training failed on some runs; threshold extractor used there");
    }
    let out = out_dir(out)?;
    save_image(&auth.registered, out.join("registered.png"))?;
    save_bits(&auth.map.pixel, out.join("tamper_map.png"))?;
    save_image(&auth.recovered, out.join("recovered.png"))?;
    write_json(
        &out.join("report.json"),
        &AuthOutput {
            key,
            scramble,
            attack: (!attacks.is_empty()).then(|| format_chain(&attacks)),
            report: &auth.report,
        },
    )
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Embed { cover, params, out } => cmd_embed(&cover, &params, &out),
        Command::Digest { image, scramble, out } => cmd_digest(&image, scramble, &out),
        Command::Attack { image, attack, seed, out } => cmd_attack(&image, &attack, seed, &out),
        Command::Tamper {
            image,
            paste,
            at,
            size,
            copy_move,
            out,
        } => cmd_tamper(&image, paste.as_deref(), at, size, copy_move, &out),
        Command::Authenticate {
            suspect,
            digest,
            key,
            scramble,
            truth,
            attack,
            skip_registration,
            out,
        } => cmd_authenticate(
            &suspect,
            &digest,
            key,
            scramble,
            truth.as_deref(),
            attack.as_deref(),
            skip_registration,
            &out,
        ),
        Command::Evaluate(args) => evaluate::run(&args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<MissingInput>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
