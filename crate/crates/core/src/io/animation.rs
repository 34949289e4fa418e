//! Animations as JSON lines, one frame per line:
//!
//! ```text
//! {"frame":0,"beta":[..],"psi":[..],"theta":[[x,y,z],..],"translation":[x,y,z]}
//! ```
//!
//! `beta` may be left out, in which case the most recent frame's β applies
//! (zeros before the first one). Blank lines are ignored.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FormatError;
use crate::model::{PoseState, RigDims};
use crate::Result;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    frame: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<Vec<f64>>,
    psi: Vec<f64>,
    theta: Vec<[f64; 3]>,
    translation: [f64; 3],
}

/// Write frames; β is written on the first frame only when every frame
/// shares it.
pub fn write_animation(mut out: impl Write, frames: &[PoseState]) -> Result<()> {
    let shared = frames.windows(2).all(|w| w[0].beta == w[1].beta);
    for (i, f) in frames.iter().enumerate() {
        let rec = Record {
            frame: i,
            beta: (!shared || i == 0).then(|| f.beta.clone()),
            psi: f.psi.clone(),
            theta: f.theta.clone(),
            translation: f.translation,
        };
        serde_json::to_writer(&mut out, &rec).map_err(|e| FormatError::Parse(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn save_animation(path: impl AsRef<Path>, frames: &[PoseState]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_animation(&mut f, frames)?;
    Ok(f.flush()?)
}

/// Read frames for a rig of `dims` whose jaw is joint `jaw_index`.
pub fn parse_animation(
    input: impl BufRead,
    dims: RigDims,
    jaw_index: usize,
) -> Result<Vec<PoseState>> {
    let mut frames = Vec::new();
    let mut beta = vec![0.0; dims.n_shape];
    for (line_no, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line)
            .map_err(|e| FormatError::Parse(format!("animation line {}: {e}", line_no + 1)))?;
        if rec.frame != frames.len() {
            return Err(FormatError::Parse(format!(
                "animation line {}: frame {} out of sequence (expected {})",
                line_no + 1,
                rec.frame,
                frames.len()
            ))
            .into());
        }
        if let Some(b) = rec.beta {
            beta = b;
        }
        let pose = PoseState {
            beta: beta.clone(),
            psi: rec.psi,
            theta: rec.theta,
            translation: rec.translation,
            jaw_index,
        };
        pose.check(dims).map_err(|e| {
            FormatError::DimInconsistency(format!("animation frame {}: {e}", rec.frame))
        })?;
        frames.push(pose);
    }
    Ok(frames)
}

pub fn load_animation(
    path: impl AsRef<Path>,
    dims: RigDims,
    jaw_index: usize,
) -> Result<Vec<PoseState>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    parse_animation(std::io::BufReader::new(f), dims, jaw_index)
}
