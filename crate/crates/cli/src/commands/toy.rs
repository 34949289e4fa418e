use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use gsav_core::io::{save_animation, save_avatar, save_cameras, save_pfm, save_rig};
use gsav_core::toyrig::{make_scene, sky_panorama, ToyRigSpec};

/// Write a synthetic head: avatar.gsav, rig.gsrg, animation.jsonl,
/// cameras.json and a sky.pfm panorama for `prefilter`.
#[derive(Debug, Args)]
pub struct ToyArgs {
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 5000)]
    pub points: usize,
    /// Camera image size in pixels.
    #[arg(long, default_value_t = 256)]
    pub size: usize,
    /// Animation length.
    #[arg(long, default_value_t = 16)]
    pub frames: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Coarse mesh with a handful of basis functions.
    #[arg(long)]
    pub small: bool,
}

pub fn run(args: &ToyArgs) -> Result<()> {
    let base = if args.small {
        ToyRigSpec::small()
    } else {
        ToyRigSpec::default()
    };
    let spec = ToyRigSpec {
        image_size: args.size,
        frames: args.frames,
        seed: args.seed,
        ..base
    };
    let scene = make_scene(&spec, args.points)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let out = |name: &str| args.out.join(name);
    save_avatar(out("avatar.gsav"), &scene.cloud)?;
    save_rig(out("rig.gsrg"), &scene.rig)?;
    save_animation(out("animation.jsonl"), &scene.animation)?;
    save_cameras(out("cameras.json"), &scene.cameras)?;
    save_pfm(out("sky.pfm"), &sky_panorama(256, 128))?;
    log::info!(
        "toy scene with {} points and {} frames in {}",
        scene.cloud.len(),
        scene.animation.len(),
        args.out.display()
    );
    Ok(())
}
