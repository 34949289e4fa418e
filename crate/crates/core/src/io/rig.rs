//! `GSRG` rig container: a JSON descriptor followed by a binary blob.
//!
//! ```text
//! "GSRG"  u16 version (1)  u32 descriptor length  descriptor JSON  blob
//! ```
//!
//! The descriptor lists dims, joint parents (`null` for the root), the jaw
//! index and the byte offset and element count of each blob array. Faces are
//! `u32`, everything else `f32`, all little-endian.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bytes::{chunk3, put_f32s, put_u32s, Reader};
use super::{read_file, FormatError};
use crate::model::{validate_rig, Rig, RigDims};
use crate::{Error, Result};

pub const MAGIC: &str = "GSRG";
pub const VERSION: u16 = 1;

const ARRAYS: [&str; 7] = [
    "vertices",
    "faces",
    "rest_joints",
    "shape_basis",
    "expr_basis",
    "pose_basis",
    "weights",
];

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct ArrayEntry {
    name: String,
    dtype: String,
    offset: usize,
    count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct Descriptor {
    dims: RigDims,
    num_vertices: usize,
    num_faces: usize,
    joint_parents: Vec<Option<usize>>,
    jaw_index: usize,
    arrays: Vec<ArrayEntry>,
}

pub fn encode_rig(rig: &Rig) -> Result<Vec<u8>> {
    let mut blob = Vec::new();
    let mut arrays = Vec::new();
    let mut push = |name: &str, dtype: &str, count: usize, bytes: &mut dyn FnMut(&mut Vec<u8>)| {
        arrays.push(ArrayEntry {
            name: name.into(),
            dtype: dtype.into(),
            offset: blob.len(),
            count,
        });
        bytes(&mut blob);
    };
    push("vertices", "f32", 3 * rig.vertices.len(), &mut |b| {
        put_f32s(b, rig.vertices.iter().flatten())
    });
    push("faces", "u32", 3 * rig.faces.len(), &mut |b| {
        put_u32s(b, rig.faces.iter().flatten())
    });
    push("rest_joints", "f32", 3 * rig.rest_joints.len(), &mut |b| {
        put_f32s(b, rig.rest_joints.iter().flatten())
    });
    push("shape_basis", "f32", rig.shape_basis.len(), &mut |b| {
        put_f32s(b, &rig.shape_basis)
    });
    push("expr_basis", "f32", rig.expr_basis.len(), &mut |b| {
        put_f32s(b, &rig.expr_basis)
    });
    push("pose_basis", "f32", rig.pose_basis.len(), &mut |b| {
        put_f32s(b, &rig.pose_basis)
    });
    push("weights", "f32", rig.weights.len(), &mut |b| {
        put_f32s(b, &rig.weights)
    });

    let desc = Descriptor {
        dims: rig.dims,
        num_vertices: rig.vertices.len(),
        num_faces: rig.faces.len(),
        joint_parents: rig.joint_parents.clone(),
        jaw_index: rig.jaw_index,
        arrays,
    };
    let json = serde_json::to_vec_pretty(&desc).map_err(|e| FormatError::Parse(e.to_string()))?;
    let mut out = Vec::with_capacity(10 + json.len() + blob.len());
    out.extend_from_slice(MAGIC.as_bytes());
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&blob);
    Ok(out)
}

fn expected_count(name: &str, d: &Descriptor) -> usize {
    let (nv, k) = (d.num_vertices, d.dims.n_transforms());
    match name {
        "vertices" => 3 * nv,
        "faces" => 3 * d.num_faces,
        "rest_joints" => 3 * k,
        "shape_basis" => 3 * nv * d.dims.n_shape,
        "expr_basis" => 3 * nv * d.dims.n_expr,
        "pose_basis" => 3 * nv * d.dims.n_pose_features(),
        _ => nv * k,
    }
}

pub fn decode_rig(data: &[u8]) -> Result<Rig> {
    let mut r = Reader::new(data);
    r.magic(MAGIC)?;
    let version = r.u16("header")?;
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version as u32).into());
    }
    let len = r.u32("header")? as usize;
    let desc: Descriptor = serde_json::from_slice(r.take(len, "descriptor")?)
        .map_err(|e| FormatError::Parse(format!("rig descriptor: {e}")))?;
    let blob = r.take(r.remaining(), "blob")?;

    let names: Vec<&str> = desc.arrays.iter().map(|a| a.name.as_str()).collect();
    if names != ARRAYS {
        return Err(FormatError::DimInconsistency(format!(
            "rig arrays {names:?}, expected {ARRAYS:?}"
        ))
        .into());
    }
    let mut end = 0usize;
    for (a, name) in desc.arrays.iter().zip(ARRAYS) {
        let dtype = if name == "faces" { "u32" } else { "f32" };
        if a.dtype != dtype {
            return Err(FormatError::Parse(format!(
                "{name}: dtype {} (expected {dtype})",
                a.dtype
            ))
            .into());
        }
        let want = expected_count(name, &desc);
        if a.count != want {
            return Err(FormatError::DimInconsistency(format!(
                "{name} has {} values, dims imply {want}",
                a.count
            ))
            .into());
        }
        if a.offset != end {
            return Err(FormatError::DimInconsistency(format!(
                "{name} offset {} (expected {end})",
                a.offset
            ))
            .into());
        }
        end += 4 * a.count;
    }
    let mut b = Reader::new(blob);
    let vertices = chunk3(&b.f32s(desc.arrays[0].count, "vertices")?);
    let faces = chunk3(&b.u32s(desc.arrays[1].count, "faces")?);
    let rest_joints = chunk3(&b.f32s(desc.arrays[2].count, "rest_joints")?);
    let shape_basis = b.f32s(desc.arrays[3].count, "shape_basis")?;
    let expr_basis = b.f32s(desc.arrays[4].count, "expr_basis")?;
    let pose_basis = b.f32s(desc.arrays[5].count, "pose_basis")?;
    let weights = b.f32s(desc.arrays[6].count, "weights")?;
    b.finish()?;

    let rig = Rig {
        dims: desc.dims,
        vertices,
        faces,
        joint_parents: desc.joint_parents,
        rest_joints,
        shape_basis,
        expr_basis,
        pose_basis,
        weights,
        jaw_index: desc.jaw_index,
    };
    if let Some(v) = validate_rig(&rig).first() {
        return Err(Error::invalid("rig", v.to_string()));
    }
    Ok(rig)
}

pub fn save_rig(path: impl AsRef<Path>, rig: &Rig) -> Result<()> {
    Ok(std::fs::write(path, encode_rig(rig)?)?)
}

pub fn load_rig(path: impl AsRef<Path>) -> Result<Rig> {
    decode_rig(&read_file(path.as_ref())?)
}
