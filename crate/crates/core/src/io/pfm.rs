//! Portable float maps: `PF` (RGB) or `Pf` (gray), rows stored bottom-up.

use std::path::Path;

use super::{read_file, FormatError};
use crate::model::Image;
use crate::{Error, Result};

/// Little-endian PFM of a 1- or 3-channel image. Values are narrowed to f32.
pub fn encode_pfm(image: &Image) -> Result<Vec<u8>> {
    let tag = match image.channels {
        1 => "Pf",
        3 => "PF",
        c => {
            return Err(Error::invalid(
                "pfm",
                format!("{c} channels; PFM holds 1 or 3"),
            ))
        }
    };
    let mut out = format!("{tag}\n{} {}\n-1.0\n", image.width, image.height).into_bytes();
    let row = image.width * image.channels;
    for y in (0..image.height).rev() {
        for v in &image.data[y * row..(y + 1) * row] {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    Ok(out)
}

fn header_token<'a>(data: &'a [u8], pos: &mut usize) -> Result<&'a str, FormatError> {
    while *pos < data.len() && data[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let start = *pos;
    while *pos < data.len() && !data[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(FormatError::Truncated {
            array: "pfm header",
        });
    }
    std::str::from_utf8(&data[start..*pos])
        .map_err(|_| FormatError::Parse("pfm header is not ASCII".into()))
}

pub fn decode_pfm(data: &[u8]) -> Result<Image> {
    let mut pos = 0;
    let channels = match header_token(data, &mut pos) {
        Ok("PF") => 3,
        Ok("Pf") => 1,
        _ => {
            return Err(FormatError::BadMagic {
                expected: "PF or Pf",
            }
            .into())
        }
    };
    let mut number = |what: &str| -> Result<&str, FormatError> {
        header_token(data, &mut pos).map_err(|_| FormatError::Parse(format!("pfm {what} missing")))
    };
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| FormatError::Parse(format!("pfm dimension {s:?}")))
    };
    let width = parse_dim(number("width")?)?;
    let height = parse_dim(number("height")?)?;
    let scale: f64 = number("scale")?
        .parse()
        .map_err(|_| FormatError::Parse("pfm scale".into()))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(FormatError::Parse("pfm scale must be nonzero".into()).into());
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let count = width
        .checked_mul(height)
        .and_then(|v| v.checked_mul(channels))
        .ok_or_else(|| FormatError::DimInconsistency("pfm size overflows".into()))?;
    let raster = data.get(pos..).unwrap_or(&[]);
    if raster.len() < 4 * count {
        return Err(FormatError::Truncated {
            array: "pfm raster",
        }
        .into());
    }
    if raster.len() > 4 * count {
        return Err(FormatError::DimInconsistency(format!(
            "{} bytes after pfm raster",
            raster.len() - 4 * count
        ))
        .into());
    }
    let little = scale < 0.0;
    let mut image = Image::new(width, height, channels);
    let row = width * channels;
    for (k, b) in raster.chunks_exact(4).enumerate() {
        let b: [u8; 4] = b.try_into().unwrap();
        let v = if little {
            f32::from_le_bytes(b)
        } else {
            f32::from_be_bytes(b)
        };
        let (file_row, col) = (k / row.max(1), k % row.max(1));
        image.data[(height - 1 - file_row) * row + col] = v as f64;
    }
    Ok(image)
}

pub fn save_pfm(path: impl AsRef<Path>, image: &Image) -> Result<()> {
    Ok(std::fs::write(path, encode_pfm(image)?)?)
}

pub fn load_pfm(path: impl AsRef<Path>) -> Result<Image> {
    decode_pfm(&read_file(path.as_ref())?)
}
