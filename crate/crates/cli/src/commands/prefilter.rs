use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use gsav_core::envlight::{bake_environment, equirect_to_cubemap, BakeSettings};
use gsav_core::io::{load_panorama, save_light, LightAsset};

/// Bake a panorama (.hdr or .pfm) into a light asset.
#[derive(Debug, Args)]
pub struct PrefilterArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Irradiance cubemap face size.
    #[arg(long, default_value_t = 16)]
    pub irr_res: usize,
    /// Face size of the sharpest prefiltered level.
    #[arg(long, default_value_t = 32)]
    pub env_res: usize,
    /// Prefiltered levels, roughness 0 to 1.
    #[arg(long, default_value_t = 3)]
    pub mips: usize,
    /// BRDF table size.
    #[arg(long, default_value_t = 64)]
    pub lut_res: usize,
    /// GGX samples per prefiltered texel.
    #[arg(long, default_value_t = 512)]
    pub samples: usize,
    /// Samples per BRDF table cell.
    #[arg(long, default_value_t = 1024)]
    pub lut_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Stored rotation of the light about +y, radians.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub yaw: f64,
}

pub fn run(args: &PrefilterArgs) -> Result<()> {
    let settings = BakeSettings {
        irr_res: args.irr_res,
        env_res: args.env_res,
        mips: args.mips,
        lut_res: args.lut_res,
        samples: args.samples,
        lut_samples: args.lut_samples,
        seed: args.seed,
    };
    settings.check()?;
    let pano =
        load_panorama(&args.input).with_context(|| format!("loading {}", args.input.display()))?;
    // source cube at twice the sharpest level keeps mirror lookups crisp
    let cube = equirect_to_cubemap(&pano, 2 * args.env_res)?;
    let mut light = bake_environment(&cube, &settings)?;
    light.yaw = args.yaw;
    save_light(
        &args.output,
        &LightAsset {
            light,
            bake: settings,
        },
    )?;
    log::info!(
        "baked {} into {}",
        args.input.display(),
        args.output.display()
    );
    Ok(())
}
