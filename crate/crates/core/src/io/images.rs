//! 8-bit PNG output and Radiance HDR input.

use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, RgbImage};

use super::{load_pfm, read_file, FormatError};
use crate::model::Image;
use crate::render::to_display_bytes;
use crate::{Error, Result};

/// RGB PNG of a linear image, display-encoded with gamma 1/2.2.
pub fn encode_png(image: &Image) -> Result<Vec<u8>> {
    if image.channels != 3 {
        return Err(Error::invalid(
            "png",
            format!("{} channels, expected 3", image.channels),
        ));
    }
    let rgb = RgbImage::from_raw(
        image.width as u32,
        image.height as u32,
        to_display_bytes(image),
    )
    .ok_or_else(|| Error::invalid("png", "buffer size mismatch"))?;
    let mut out = Cursor::new(Vec::new());
    rgb.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::invalid("png", e.to_string()))?;
    Ok(out.into_inner())
}

pub fn save_png(path: impl AsRef<Path>, image: &Image) -> Result<()> {
    Ok(std::fs::write(path, encode_png(image)?)?)
}

/// Linear RGB from a Radiance `.hdr` file.
pub fn load_hdr(path: impl AsRef<Path>) -> Result<Image> {
    let bytes = read_file(path.as_ref())?;
    let img = image::load_from_memory_with_format(&bytes, ImageFormat::Hdr)
        .map_err(|e| FormatError::Parse(format!("hdr: {e}")))?
        .to_rgb32f();
    Ok(Image {
        width: img.width() as usize,
        height: img.height() as usize,
        channels: 3,
        data: img.into_raw().into_iter().map(f64::from).collect(),
    })
}

/// An equirectangular panorama from `.hdr` or `.pfm`, chosen by extension.
pub fn load_panorama(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let image = match ext.as_deref() {
        Some("hdr") => load_hdr(path)?,
        Some("pfm") => load_pfm(path)?,
        _ => {
            return Err(Error::invalid(
                "panorama",
                format!("{}: expected .hdr or .pfm", path.display()),
            ))
        }
    };
    if image.channels != 3 {
        return Err(Error::invalid("panorama", "needs 3 channels"));
    }
    Ok(image)
}
