use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;

use gsav_core::fit::{fit_materials, FitConfig, FitFrame, MAX_FIT_FRAMES};
use gsav_core::io::{load_pfm, save_avatar, save_trace};
use gsav_core::losses::LossWeights;
use gsav_core::shade::ShadeParams;
use gsav_core::Image;

use crate::assets::{frame_stem, load_avatar_rig, load_camera_list, load_env, load_poses};

/// Fit per-point albedo, roughness and base reflectance to target images.
///
/// Target for animation frame `i` is `frame_{i:04}.pfm`, or failing that
/// `frame_{i:04}_color.pfm` (both linear RGB over black, as written by
/// `render --channels color`). An optional premultiplied
/// `frame_{i:04}_albedo.pfm` enables the albedo term. The k-th selected
/// frame is seen by camera k modulo the number of cameras.
#[derive(Debug, Args)]
#[command(verbatim_doc_comment)]
pub struct FitArgs {
    #[arg(long)]
    pub avatar: PathBuf,
    #[arg(long)]
    pub rig: PathBuf,
    #[arg(long)]
    pub animation: PathBuf,
    #[arg(long)]
    pub cameras: PathBuf,
    /// Directory holding the target images.
    #[arg(long)]
    pub targets: PathBuf,
    #[arg(long)]
    pub light: PathBuf,
    /// Fitted avatar output.
    #[arg(long)]
    pub out: PathBuf,
    /// Loss trace CSV output.
    #[arg(long)]
    pub trace: PathBuf,
    /// Animation frames to fit (comma-separated); all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub frames: Vec<usize>,
    #[arg(long, default_value_t = 500)]
    pub iters: usize,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// Largest change of any attribute per iteration.
    #[arg(long, default_value_t = 0.05)]
    pub max_update: f64,
    /// Jaw regularizer weight.
    #[arg(long, default_value_t = 0.1)]
    pub w_jaw: f64,
    /// MAE share of the RGB term; the rest is D-SSIM.
    #[arg(long, default_value_t = 0.8)]
    pub lambda1: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub w_normal: f64,
    #[arg(long, default_value_t = 0.25)]
    pub w_albedo: f64,
    /// Roughness total-variation weight.
    #[arg(long, default_value_t = 0.02)]
    pub w_tv: f64,
}

fn load_target(dir: &Path, stem: &str) -> Result<Image> {
    for name in [format!("{stem}.pfm"), format!("{stem}_color.pfm")] {
        let path = dir.join(&name);
        if path.exists() {
            return load_pfm(&path).with_context(|| format!("loading {}", path.display()));
        }
    }
    bail!("no target for {stem} in {}", dir.display())
}

pub fn run(args: &FitArgs) -> Result<()> {
    let (cloud, rig) = load_avatar_rig(&args.avatar, &args.rig)?;
    let env = load_env(&args.light)?;
    let poses = load_poses(Some(&args.animation), &rig)?;
    let cameras = load_camera_list(&args.cameras)?;
    let selected: Vec<usize> = if args.frames.is_empty() {
        (0..poses.len().min(MAX_FIT_FRAMES)).collect()
    } else {
        args.frames.clone()
    };
    if let Some(&bad) = selected.iter().find(|&&i| i >= poses.len()) {
        bail!("frame {bad} requested, the animation has {}", poses.len());
    }

    let mut frames = Vec::with_capacity(selected.len());
    for (k, &i) in selected.iter().enumerate() {
        let stem = frame_stem(i);
        let albedo_path = args.targets.join(format!("{stem}_albedo.pfm"));
        let albedo_target = if albedo_path.exists() {
            Some(load_pfm(&albedo_path)?)
        } else {
            None
        };
        frames.push(FitFrame {
            pose: poses[i].clone(),
            camera: cameras[k % cameras.len()].clone(),
            target: load_target(&args.targets, &stem)?,
            albedo_target,
            jaw_tracked: None,
        });
    }

    let weights = LossWeights {
        jaw: args.w_jaw,
        lambda1: args.lambda1,
        normal: args.w_normal,
        albedo: args.w_albedo,
        tv: args.w_tv,
    };
    let config = FitConfig {
        weights,
        iters: args.iters,
        step: args.step,
        max_update: args.max_update,
    };
    let result = fit_materials(
        &cloud,
        &rig,
        &frames,
        &env,
        &ShadeParams::default(),
        &config,
    )?;
    save_avatar(&args.out, &result.cloud)?;
    save_trace(&args.trace, &weights, &result.trace)?;
    let first = result.trace.first().map_or(0.0, |r| r.total);
    let best = result.trace[result.best_iteration].total;
    log::info!(
        "loss {first:.6} -> {best:.6} (best at iteration {} of {})",
        result.best_iteration,
        args.iters
    );
    Ok(())
}
