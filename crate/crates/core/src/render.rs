//! Full frame rendering: deform, rasterize, shade, composite.

use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::deform::pose_splats;
use crate::math::luminance;
use crate::model::{Camera, EnvironmentLight, GBuffer, GaussianCloud, Image, PoseState, Rig};
use crate::rasterize::{rasterize, ChannelSet};
use crate::shade::{shade_split, ShadeParams};
use crate::{Error, Result};

/// Display encoding is a plain power curve, not the piecewise sRGB one.
pub const DISPLAY_GAMMA: f64 = 2.2;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Background {
    #[default]
    Black,
    White,
}

impl Background {
    pub fn value(self) -> f64 {
        match self {
            Background::Black => 0.0,
            Background::White => 1.0,
        }
    }
}

impl FromStr for Background {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "black" => Ok(Background::Black),
            "white" => Ok(Background::White),
            _ => Err(Error::invalid(
                "background",
                format!("{s:?}, expected black or white"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub deform: Duration,
    pub rasterize: Duration,
    pub shade: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.deform + self.rasterize + self.shade
    }
}

impl std::ops::AddAssign for StageTimings {
    fn add_assign(&mut self, rhs: Self) {
        self.deform += rhs.deform;
        self.rasterize += rhs.rasterize;
        self.shade += rhs.shade;
    }
}

/// One rendered frame. `color` and `specular` are linear and composited over
/// black; use [`composite`] for other backgrounds.
#[derive(Debug, Clone)]
pub struct Frame {
    pub gbuffer: GBuffer,
    pub color: Image,
    pub specular: Image,
    pub timings: StageTimings,
}

pub fn render_frame(
    cloud: &GaussianCloud,
    rig: &Rig,
    pose: &PoseState,
    camera: &Camera,
    env: &EnvironmentLight,
    params: &ShadeParams,
) -> Result<Frame> {
    let t0 = Instant::now();
    let splats = pose_splats(cloud, rig, pose)?;
    let t1 = Instant::now();
    let gbuffer = rasterize(&splats, camera, ChannelSet::ALL)?;
    let t2 = Instant::now();
    let (color, specular) = shade_split(&gbuffer, camera, env, params)?;
    let t3 = Instant::now();
    Ok(Frame {
        gbuffer,
        color,
        specular,
        timings: StageTimings {
            deform: t1 - t0,
            rasterize: t2 - t1,
            shade: t3 - t2,
        },
    })
}

/// Premultiplied `color` over a constant background.
pub fn composite(color: &Image, alpha: &[f64], background: Background) -> Image {
    let bg = background.value();
    let mut out = color.clone();
    if bg != 0.0 {
        for (px, a) in out.data.chunks_mut(color.channels).zip(alpha) {
            for v in px {
                *v += (1.0 - a) * bg;
            }
        }
    }
    out
}

/// Linear value to an 8-bit display code.
pub fn encode_display(v: f64) -> u8 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (v.powf(1.0 / DISPLAY_GAMMA) * 255.0).round() as u8
}

/// Interleaved 8-bit display codes of a linear image.
pub fn to_display_bytes(image: &Image) -> Vec<u8> {
    image.data.iter().map(|&v| encode_display(v)).collect()
}

/// Mean Rec. 709 luminance of an RGB image.
pub fn mean_luminance(image: &Image) -> f64 {
    if image.num_pixels() == 0 {
        return 0.0;
    }
    let sum: f64 = image
        .data
        .chunks(image.channels)
        .map(|p| luminance([p[0], p[1], p[2]]))
        .sum();
    sum / image.num_pixels() as f64
}
