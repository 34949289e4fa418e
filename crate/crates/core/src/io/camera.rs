//! Cameras as JSON: one [`Camera`] object or an array of them.

use std::path::Path;

use super::{read_file, FormatError};
use crate::model::Camera;
use crate::Result;

pub fn parse_cameras(text: &[u8]) -> Result<Vec<Camera>> {
    let value: serde_json::Value = serde_json::from_slice(text)
        .map_err(|e| FormatError::Parse(format!("camera json: {e}")))?;
    let cams: Vec<Camera> = if value.is_array() {
        serde_json::from_value(value)
    } else {
        serde_json::from_value(value).map(|c| vec![c])
    }
    .map_err(|e| FormatError::Parse(format!("camera json: {e}")))?;
    for c in &cams {
        c.check()?;
    }
    Ok(cams)
}

pub fn load_cameras(path: impl AsRef<Path>) -> Result<Vec<Camera>> {
    parse_cameras(&read_file(path.as_ref())?)
}

pub fn save_cameras(path: impl AsRef<Path>, cameras: &[Camera]) -> Result<()> {
    let text =
        serde_json::to_string_pretty(cameras).map_err(|e| FormatError::Parse(e.to_string()))?;
    Ok(std::fs::write(path, text + "\n")?)
}
