use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::Args;
use serde::Serialize;

use gsav_core::render::{render_frame, StageTimings};
use gsav_core::shade::ShadeParams;
use gsav_core::PoseState;

use crate::assets::{load_avatar_rig, load_env, load_poses, CameraArgs};

/// Time animated renders and report per-stage costs.
///
/// Without `--animation` the head nods and opens its jaw. Thread count comes
/// from the global `--threads` flag or GSAV_THREADS.
#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub avatar: PathBuf,
    #[arg(long)]
    pub rig: PathBuf,
    #[arg(long)]
    pub light: PathBuf,
    #[command(flatten)]
    pub camera: CameraArgs,
    #[arg(long)]
    pub animation: Option<PathBuf>,
    /// Timed frames.
    #[arg(long, default_value_t = 30)]
    pub frames: usize,
    /// Untimed frames rendered first.
    #[arg(long, default_value_t = 1)]
    pub warmup: usize,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub points: usize,
    pub width: usize,
    pub height: usize,
    pub threads: usize,
    pub frames: usize,
    /// Mean milliseconds per frame.
    pub deform_ms: f64,
    pub rasterize_ms: f64,
    pub shade_ms: f64,
    pub total_ms: f64,
    /// Frames per second over the wall-clock time of the timed loop.
    pub fps: f64,
}

impl std::fmt::Display for BenchReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{} points at {}x{}, {} threads, {} frames",
            self.points, self.width, self.height, self.threads, self.frames
        )?;
        writeln!(f, "deform     {:9.2} ms", self.deform_ms)?;
        writeln!(f, "rasterize  {:9.2} ms", self.rasterize_ms)?;
        writeln!(f, "shade      {:9.2} ms", self.shade_ms)?;
        writeln!(f, "total      {:9.2} ms", self.total_ms)?;
        write!(f, "fps        {:9.2}", self.fps)
    }
}

fn nod(rest: &PoseState, jaw_index: usize, n: usize) -> Vec<PoseState> {
    (0..n)
        .map(|k| {
            let t = k as f64 / n.max(1) as f64 * std::f64::consts::TAU;
            let mut p = rest.clone();
            p.theta[0] = [0.1 * t.sin(), 0.2 * (0.5 * t).sin(), 0.0];
            p.theta[jaw_index] = [0.25 * (0.5 - 0.5 * t.cos()), 0.0, 0.0];
            p
        })
        .collect()
}

pub fn run(args: &BenchArgs) -> Result<BenchReport> {
    if args.frames == 0 {
        bail!("--frames must be at least 1");
    }
    let (cloud, rig) = load_avatar_rig(&args.avatar, &args.rig)?;
    let env = load_env(&args.light)?;
    let camera = args.camera.resolve()?;
    let params = ShadeParams::default();
    let poses = match &args.animation {
        Some(p) => load_poses(Some(p), &rig)?,
        None => nod(
            &PoseState::rest(rig.dims, rig.jaw_index),
            rig.jaw_index,
            args.frames,
        ),
    };

    for k in 0..args.warmup {
        render_frame(
            &cloud,
            &rig,
            &poses[k % poses.len()],
            &camera,
            &env,
            &params,
        )?;
    }
    let mut stages = StageTimings::default();
    let start = Instant::now();
    for k in 0..args.frames {
        let frame = render_frame(
            &cloud,
            &rig,
            &poses[k % poses.len()],
            &camera,
            &env,
            &params,
        )?;
        stages += frame.timings;
    }
    let wall = start.elapsed().as_secs_f64();
    let per = |d: std::time::Duration| d.as_secs_f64() * 1e3 / args.frames as f64;
    let report = BenchReport {
        points: cloud.len(),
        width: camera.width,
        height: camera.height,
        threads: rayon::current_num_threads(),
        frames: args.frames,
        deform_ms: per(stages.deform),
        rasterize_ms: per(stages.rasterize),
        shade_ms: per(stages.shade),
        total_ms: per(stages.total()),
        fps: args.frames as f64 / wall,
    };
    if args.json {
        println!("{}", serde_json::to_string(&report)?);
    } else {
        println!("{report}");
    }
    Ok(report)
}
