//! On-disk formats.
//!
//! | kind      | file                         | module        |
//! |-----------|------------------------------|---------------|
//! | avatar    | `GSAV` binary                | [`avatar`]    |
//! | rig       | `GSRG` descriptor + blob     | [`rig`]       |
//! | animation | JSON lines                   | [`animation`] |
//! | light     | `GSLT` metadata + PFM blobs  | [`light`]     |
//! | images    | PFM, PNG, Radiance HDR       | [`pfm`], [`images`] |
//! | cameras   | JSON                         | [`camera`]    |
//! | fit trace | CSV                          | [`trace`]     |
//!
//! Every binary container stores little-endian values and a `u16` version
//! right after its magic.

pub mod animation;
pub mod avatar;
mod bytes;
pub mod camera;
pub mod images;
pub mod light;
pub mod pfm;
pub mod rig;
pub mod trace;

pub use animation::{load_animation, parse_animation, save_animation, write_animation};
pub use avatar::{decode_avatar, encode_avatar, load_avatar, save_avatar};
pub use camera::{load_cameras, parse_cameras, save_cameras};
pub use images::{encode_png, load_hdr, load_panorama, save_png};
pub use light::{decode_light, encode_light, load_light, save_light, LightAsset};
pub use pfm::{decode_pfm, encode_pfm, load_pfm, save_pfm};
pub use rig::{decode_rig, encode_rig, load_rig, save_rig};
pub use trace::{save_trace, write_trace};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },
    #[error("unsupported version {0}")]
    UnsupportedVersion(u32),
    #[error("unsupported convention flags {0:#06x}")]
    UnsupportedFlags(u16),
    #[error("truncated {array}")]
    Truncated { array: &'static str },
    #[error("inconsistent dimensions: {0}")]
    DimInconsistency(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub(crate) fn read_file(path: &std::path::Path) -> crate::Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| {
        crate::Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}
