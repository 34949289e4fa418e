//! `GSLT` light container.
//!
//! ```text
//! "GSLT"  u16 version (1)  u32 metadata length  metadata JSON  payloads
//! ```
//!
//! Payloads are PFM files: the irradiance cubemap, one per prefiltered level
//! and the BRDF table. A cubemap is stored as a `res × 6·res` strip with the
//! faces stacked top to bottom in +x, −x, +y, −y, +z, −z order. The table is
//! `res × res` RGB with roughness down the rows, n·v across the columns and
//! channels (scale, bias, 0).

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bytes::Reader;
use super::{decode_pfm, encode_pfm, read_file, FormatError};
use crate::envlight::{BakeSettings, MIRROR_ROUGHNESS};
use crate::model::{BrdfLut, Cubemap, EnvironmentLight, Image};
use crate::shade::{FRESNEL_A, FRESNEL_B};
use crate::Result;

pub const MAGIC: &str = "GSLT";
pub const VERSION: u16 = 1;

/// A baked light together with the settings that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct LightAsset {
    pub light: EnvironmentLight,
    pub bake: BakeSettings,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct Microfacet {
    distribution: String,
    geometry: String,
    alpha: String,
    mirror_roughness: f64,
    fresnel_exponents: [f64; 2],
}

impl Microfacet {
    fn current() -> Self {
        Self {
            distribution: "ggx".into(),
            geometry: "smith-schlick k=alpha/2".into(),
            alpha: "roughness^2".into(),
            mirror_roughness: MIRROR_ROUGHNESS,
            fresnel_exponents: [FRESNEL_A, FRESNEL_B],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct Payload {
    name: String,
    offset: usize,
    len: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct Metadata {
    bake: BakeSettings,
    microfacet: Microfacet,
    yaw: f64,
    irr_res: usize,
    env_res: usize,
    mips: usize,
    lut_res: usize,
    payloads: Vec<Payload>,
}

fn cubemap_image(c: &Cubemap) -> Image {
    Image {
        width: c.res,
        height: 6 * c.res,
        channels: 3,
        data: c.texels.iter().flatten().map(|&v| v as f64).collect(),
    }
}

fn image_cubemap(img: &Image, res: usize, name: &str) -> Result<Cubemap> {
    if img.shape() != (res, 6 * res, 3) {
        return Err(FormatError::DimInconsistency(format!(
            "{name}: {:?}, expected ({res}, {}, 3)",
            img.shape(),
            6 * res
        ))
        .into());
    }
    Ok(Cubemap {
        res,
        texels: img
            .data
            .chunks_exact(3)
            .map(|p| [p[0] as f32, p[1] as f32, p[2] as f32])
            .collect(),
    })
}

fn lut_image(lut: &BrdfLut) -> Image {
    Image {
        width: lut.res,
        height: lut.res,
        channels: 3,
        data: lut
            .data
            .iter()
            .flat_map(|v| [v[0] as f64, v[1] as f64, 0.0])
            .collect(),
    }
}

pub fn encode_light(asset: &LightAsset) -> Result<Vec<u8>> {
    let env = &asset.light;
    env.check()?;
    let mut blobs = vec![(
        "irradiance".to_string(),
        encode_pfm(&cubemap_image(&env.irradiance))?,
    )];
    for (m, level) in env.prefiltered.iter().enumerate() {
        blobs.push((
            format!("prefiltered_{m}"),
            encode_pfm(&cubemap_image(level))?,
        ));
    }
    blobs.push(("brdf_lut".into(), encode_pfm(&lut_image(&env.brdf_lut))?));

    let mut payloads = Vec::new();
    let mut offset = 0;
    for (name, b) in &blobs {
        payloads.push(Payload {
            name: name.clone(),
            offset,
            len: b.len(),
        });
        offset += b.len();
    }
    let meta = Metadata {
        bake: asset.bake,
        microfacet: Microfacet::current(),
        yaw: env.yaw,
        irr_res: env.irradiance.res,
        env_res: env.prefiltered[0].res,
        mips: env.prefiltered.len(),
        lut_res: env.brdf_lut.res,
        payloads,
    };
    let json = serde_json::to_vec_pretty(&meta).map_err(|e| FormatError::Parse(e.to_string()))?;
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC.as_bytes());
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for (_, b) in blobs {
        out.extend_from_slice(&b);
    }
    Ok(out)
}

pub fn decode_light(data: &[u8]) -> Result<LightAsset> {
    let mut r = Reader::new(data);
    r.magic(MAGIC)?;
    let version = r.u16("header")?;
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version as u32).into());
    }
    let len = r.u32("header")? as usize;
    let meta: Metadata = serde_json::from_slice(r.take(len, "metadata")?)
        .map_err(|e| FormatError::Parse(format!("light metadata: {e}")))?;
    let blob = r.take(r.remaining(), "payloads")?;

    let mut expected: Vec<String> = vec!["irradiance".into()];
    expected.extend((0..meta.mips).map(|m| format!("prefiltered_{m}")));
    expected.push("brdf_lut".into());
    let names: Vec<&String> = meta.payloads.iter().map(|p| &p.name).collect();
    if names.iter().copied().ne(expected.iter()) {
        return Err(FormatError::DimInconsistency(format!(
            "payloads {names:?}, expected {expected:?}"
        ))
        .into());
    }
    let payload = |i: usize| -> Result<Image> {
        let p = &meta.payloads[i];
        let bytes = p
            .offset
            .checked_add(p.len)
            .and_then(|end| blob.get(p.offset..end))
            .ok_or(FormatError::Truncated {
                array: "light payload",
            })?;
        decode_pfm(bytes)
    };

    let irradiance = image_cubemap(&payload(0)?, meta.irr_res, "irradiance")?;
    let prefiltered = (0..meta.mips)
        .map(|m| {
            image_cubemap(
                &payload(1 + m)?,
                (meta.env_res >> m).max(1),
                "prefiltered level",
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let lut_img = payload(1 + meta.mips)?;
    if lut_img.shape() != (meta.lut_res, meta.lut_res, 3) {
        return Err(
            FormatError::DimInconsistency(format!("brdf_lut {:?}", lut_img.shape())).into(),
        );
    }
    let brdf_lut = BrdfLut {
        res: meta.lut_res,
        data: lut_img
            .data
            .chunks_exact(3)
            .map(|p| [p[0] as f32, p[1] as f32])
            .collect(),
    };
    let light = EnvironmentLight {
        irradiance,
        prefiltered,
        brdf_lut,
        yaw: meta.yaw,
    };
    light.check()?;
    Ok(LightAsset {
        light,
        bake: meta.bake,
    })
}

pub fn save_light(path: impl AsRef<Path>, asset: &LightAsset) -> Result<()> {
    Ok(std::fs::write(path, encode_light(asset)?)?)
}

pub fn load_light(path: impl AsRef<Path>) -> Result<LightAsset> {
    decode_light(&read_file(path.as_ref())?)
}
