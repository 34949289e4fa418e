use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::Args;

use gsav_core::io::{encode_png, save_pfm};
use gsav_core::render::{composite, render_frame, Background, Frame};
use gsav_core::shade::ShadeParams;
use gsav_core::Image;

use crate::assets::{frame_stem, load_avatar_rig, load_env, load_poses, CameraArgs};

/// Raw buffers that `--channels` can write next to the PNG.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// Linear shaded color over black.
    Color,
    /// Linear specular part of `color`.
    Specular,
    Albedo,
    Roughness,
    F0,
    Normal,
    Depth,
    Alpha,
}

impl Channel {
    pub const ALL: [Channel; 8] = [
        Channel::Color,
        Channel::Specular,
        Channel::Albedo,
        Channel::Roughness,
        Channel::F0,
        Channel::Normal,
        Channel::Depth,
        Channel::Alpha,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Color => "color",
            Channel::Specular => "specular",
            Channel::Albedo => "albedo",
            Channel::Roughness => "roughness",
            Channel::F0 => "f0",
            Channel::Normal => "normal",
            Channel::Depth => "depth",
            Channel::Alpha => "alpha",
        }
    }

    fn image(self, frame: &Frame) -> Image {
        let g = &frame.gbuffer;
        match self {
            Channel::Color => frame.color.clone(),
            Channel::Specular => frame.specular.clone(),
            Channel::Albedo => g.albedo_image(),
            Channel::Roughness => g.roughness_image(),
            Channel::F0 => g.f0_image(),
            Channel::Normal => g.normal_image(),
            Channel::Depth => g.depth_image(),
            Channel::Alpha => g.alpha_image(),
        }
    }
}

impl FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Channel::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Channel::ALL.iter().map(|c| c.name()).collect();
                format!(
                    "unknown channel {s:?}, expected one of {}",
                    names.join(", ")
                )
            })
    }
}

/// Render frames to PNG.
///
/// PNGs are the linear image composited over the background and encoded
/// with a plain 1/2.2 power curve (not the piecewise sRGB curve). Each
/// animation frame `i` becomes `frame_{i:04}.png`; `--channels` adds raw
/// linear buffers as `frame_{i:04}_{channel}.pfm`. G-buffer channels are
/// alpha-premultiplied.
#[derive(Debug, Args)]
#[command(verbatim_doc_comment)]
pub struct RenderArgs {
    #[arg(long)]
    pub avatar: PathBuf,
    #[arg(long)]
    pub rig: PathBuf,
    /// Animation (.jsonl); the rest pose when omitted.
    #[arg(long)]
    pub pose: Option<PathBuf>,
    /// Light asset from `prefilter`.
    #[arg(long)]
    pub light: PathBuf,
    #[command(flatten)]
    pub camera: CameraArgs,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated raw channels: color, specular, albedo, roughness, f0, normal, depth, alpha.
    #[arg(long, value_delimiter = ',')]
    pub channels: Vec<Channel>,
    /// Render only these animation frames (comma-separated indices).
    #[arg(long, value_delimiter = ',')]
    pub frames: Vec<usize>,
    /// Multiplier on every point's base reflectance.
    #[arg(long, default_value_t = 1.0)]
    pub f0_scale: f64,
    /// Multiplier on every point's roughness.
    #[arg(long, default_value_t = 1.0)]
    pub roughness_scale: f64,
    /// Extra environment rotation about +y, radians.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub env_yaw: f64,
    #[arg(long, default_value_t = 1.0)]
    pub exposure: f64,
    /// Background: black or white.
    #[arg(long, default_value = "black")]
    pub bg: Background,
}

impl RenderArgs {
    pub fn shade_params(&self) -> ShadeParams {
        ShadeParams {
            f0_scale: self.f0_scale,
            roughness_scale: self.roughness_scale,
            env_yaw: self.env_yaw,
            exposure: self.exposure,
            ..ShadeParams::default()
        }
    }
}

pub fn run(args: &RenderArgs) -> Result<()> {
    let (cloud, rig) = load_avatar_rig(&args.avatar, &args.rig)?;
    let env = load_env(&args.light)?;
    let poses = load_poses(args.pose.as_deref(), &rig)?;
    let camera = args.camera.resolve()?;
    let params = args.shade_params();
    params.check()?;

    let selected: Vec<usize> = if args.frames.is_empty() {
        (0..poses.len()).collect()
    } else {
        args.frames.clone()
    };
    if let Some(&bad) = selected.iter().find(|&&i| i >= poses.len()) {
        bail!("frame {bad} requested, the animation has {}", poses.len());
    }

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    for &i in &selected {
        let frame = render_frame(&cloud, &rig, &poses[i], &camera, &env, &params)?;
        let display = composite(&frame.color, &frame.gbuffer.alpha, args.bg);
        let stem = frame_stem(i);
        let png = args.out.join(format!("{stem}.png"));
        std::fs::write(&png, encode_png(&display)?)
            .with_context(|| format!("writing {}", png.display()))?;
        for ch in &args.channels {
            save_pfm(
                args.out.join(format!("{stem}_{}.pfm", ch.name())),
                &ch.image(&frame),
            )?;
        }
        log::info!(
            "{} in {:.1} ms",
            png.display(),
            frame.timings.total().as_secs_f64() * 1e3
        );
    }
    Ok(())
}
