use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use gsav_core::io::{load_animation, load_avatar, load_cameras, load_light, load_rig};
use gsav_core::model::{validate, Camera, GaussianCloud, PoseState, Rig};
use gsav_core::EnvironmentLight;

use crate::session::{Orbit, View};

/// Avatar and rig, checked against each other.
pub fn load_avatar_rig(avatar: &Path, rig_path: &Path) -> Result<(GaussianCloud, Rig)> {
    let cloud = load_avatar(avatar).with_context(|| format!("loading {}", avatar.display()))?;
    let rig = load_rig(rig_path).with_context(|| format!("loading {}", rig_path.display()))?;
    let problems = validate(&cloud, &rig);
    if let Some(first) = problems.first() {
        bail!(
            "{} does not fit {}: {first} ({} problems)",
            avatar.display(),
            rig_path.display(),
            problems.len()
        );
    }
    Ok((cloud, rig))
}

pub fn load_env(path: &Path) -> Result<EnvironmentLight> {
    Ok(load_light(path)
        .with_context(|| format!("loading {}", path.display()))?
        .light)
}

/// Frames of an animation file, or the rest pose when none is given.
pub fn load_poses(path: Option<&Path>, rig: &Rig) -> Result<Vec<PoseState>> {
    match path {
        Some(p) => {
            let frames = load_animation(p, rig.dims, rig.jaw_index)
                .with_context(|| format!("loading {}", p.display()))?;
            if frames.is_empty() {
                bail!("{} has no frames", p.display());
            }
            Ok(frames)
        }
        None => Ok(vec![PoseState::rest(rig.dims, rig.jaw_index)]),
    }
}

pub fn load_camera_list(path: &Path) -> Result<Vec<Camera>> {
    let cams = load_cameras(path).with_context(|| format!("loading {}", path.display()))?;
    if cams.is_empty() {
        bail!("{} holds no cameras", path.display());
    }
    Ok(cams)
}

/// Where a render's camera comes from: a camera file entry or an orbit.
#[derive(Debug, Clone, clap::Args)]
pub struct CameraArgs {
    /// Camera file (JSON object or array).
    #[arg(long, conflicts_with = "orbit")]
    pub camera: Option<PathBuf>,
    /// Entry of the camera file to use.
    #[arg(long, default_value_t = 0)]
    pub camera_index: usize,
    /// Orbit camera as AZIMUTH,ELEVATION,DISTANCE (degrees, degrees, world units).
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    pub orbit: Option<[f64; 3]>,
    /// Orbit image size, WIDTHxHEIGHT or a single number for square images.
    #[arg(long, default_value = "512", value_parser = parse_size)]
    pub size: (usize, usize),
    /// Orbit vertical field of view in degrees.
    #[arg(long, default_value_t = 30.0)]
    pub fov: f64,
    /// Orbit target as X,Y,Z.
    #[arg(long, default_value = "0,0,0", value_parser = parse_triple, allow_hyphen_values = true)]
    pub target: [f64; 3],
}

impl CameraArgs {
    pub fn view(&self) -> View {
        View {
            width: self.size.0,
            height: self.size.1,
            fov: self.fov,
            target: self.target,
        }
    }

    pub fn resolve(&self) -> Result<Camera> {
        let cam = match (&self.camera, self.orbit) {
            (Some(path), _) => {
                let cams = load_camera_list(path)?;
                cams.get(self.camera_index).cloned().with_context(|| {
                    format!(
                        "{} has {} cameras, index {} requested",
                        path.display(),
                        cams.len(),
                        self.camera_index
                    )
                })?
            }
            (None, Some([azimuth, elevation, distance])) => self.view().camera(&Orbit {
                azimuth,
                elevation,
                distance,
            }),
            (None, None) => bail!("pass --camera FILE or --orbit AZ,EL,DIST"),
        };
        cam.check()?;
        Ok(cam)
    }
}

pub fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got {s:?}"));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p.parse().map_err(|e| format!("{p:?}: {e}"))?;
    }
    Ok(out)
}

pub fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let parse = |p: &str| -> Result<usize, String> {
        match p.trim().parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("bad image size {s:?}")),
            Ok(v) => Ok(v),
        }
    };
    match s.split_once(['x', 'X']) {
        Some((w, h)) => Ok((parse(w)?, parse(h)?)),
        None => {
            let v = parse(s)?;
            Ok((v, v))
        }
    }
}

/// Output name of animation frame `i`.
pub fn frame_stem(i: usize) -> String {
    format!("frame_{i:04}")
}
