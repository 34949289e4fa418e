//! `GSAV` avatar container.
//!
//! ```text
//! "GSAV"  u16 version (1)  u16 flags
//! u32 N  u32 |β|  u32 |ψ|  u32 K
//! f32 arrays: positions 3N, rotations 4N, log-scales 3N, opacities N,
//!             albedo 3N, roughness N, f0 N, S 3N|β|, E 3N|ψ|, P 3N·9K, W N(K+1)
//! ```
//!
//! Flag bit 0: pose features are the row-major entries of `R(θ_k) − I` for
//! joints `1..=K`. Bit 1: blend weights are row-major per point, root first.
//! Both are required.

use std::path::Path;

use super::bytes::{chunk3, chunk4, put_f32s, Reader};
use super::{read_file, FormatError};
use crate::model::{DeformationBases, GaussianCloud, RigDims, Splats};
use crate::Result;

pub const MAGIC: &str = "GSAV";
pub const VERSION: u16 = 1;
pub const FLAG_POSE_ROW_MAJOR: u16 = 1;
pub const FLAG_WEIGHTS_ROOT_FIRST: u16 = 2;
const FLAGS: u16 = FLAG_POSE_ROW_MAJOR | FLAG_WEIGHTS_ROOT_FIRST;

fn as_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v)
        .map_err(|_| FormatError::DimInconsistency(format!("{what} = {v} exceeds u32")).into())
}

pub fn encode_avatar(cloud: &GaussianCloud) -> Result<Vec<u8>> {
    cloud.check_lengths()?;
    let s = &cloud.splats;
    let b = &cloud.bases;
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC.as_bytes());
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&FLAGS.to_le_bytes());
    for (what, v) in [
        ("N", cloud.len()),
        ("shape dims", b.dims.n_shape),
        ("expression dims", b.dims.n_expr),
        ("joints", b.dims.n_joints),
    ] {
        out.extend_from_slice(&as_u32(v, what)?.to_le_bytes());
    }
    put_f32s(&mut out, s.positions.iter().flatten());
    put_f32s(&mut out, s.rotations.iter().flatten());
    put_f32s(&mut out, s.log_scales.iter().flatten());
    put_f32s(&mut out, &s.opacities);
    put_f32s(&mut out, s.albedo.iter().flatten());
    put_f32s(&mut out, &s.roughness);
    put_f32s(&mut out, &s.f0);
    put_f32s(&mut out, &b.shape);
    put_f32s(&mut out, &b.expr);
    put_f32s(&mut out, &b.pose);
    put_f32s(&mut out, &b.weights);
    Ok(out)
}

pub fn decode_avatar(data: &[u8]) -> Result<GaussianCloud> {
    let mut r = Reader::new(data);
    r.magic(MAGIC)?;
    let version = r.u16("header")?;
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version as u32).into());
    }
    let flags = r.u16("header")?;
    if flags != FLAGS {
        return Err(FormatError::UnsupportedFlags(flags).into());
    }
    let n = r.u32("header")? as usize;
    let dims = RigDims::new(
        r.u32("header")? as usize,
        r.u32("header")? as usize,
        r.u32("header")? as usize,
    );

    let positions = chunk3(&r.f32s(3 * n, "positions")?);
    let rotations = chunk4(&r.f32s(4 * n, "rotations")?);
    let log_scales = chunk3(&r.f32s(3 * n, "log-scales")?);
    let opacities = r.f32s(n, "opacities")?;
    let albedo = chunk3(&r.f32s(3 * n, "albedo")?);
    let roughness = r.f32s(n, "roughness")?;
    let f0 = r.f32s(n, "f0")?;
    let shape = r.f32s(3 * n * dims.n_shape, "shape basis")?;
    let expr = r.f32s(3 * n * dims.n_expr, "expression basis")?;
    let pose = r.f32s(3 * n * dims.n_pose_features(), "pose basis")?;
    let weights = r.f32s(n * dims.n_transforms(), "blend weights")?;
    r.finish()?;
    Ok(GaussianCloud {
        splats: Splats {
            positions,
            rotations,
            log_scales,
            opacities,
            albedo,
            roughness,
            f0,
        },
        bases: DeformationBases {
            dims,
            shape,
            expr,
            pose,
            weights,
        },
    })
}

pub fn save_avatar(path: impl AsRef<Path>, cloud: &GaussianCloud) -> Result<()> {
    Ok(std::fs::write(path, encode_avatar(cloud)?)?)
}

pub fn load_avatar(path: impl AsRef<Path>) -> Result<GaussianCloud> {
    decode_avatar(&read_file(path.as_ref())?)
}
