//! Relightable Gaussian head avatars on the CPU.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`deform`] moves canonical points into pose space with shape, expression
//!    and pose blendshapes followed by linear blend skinning.
//! 2. [`rasterize`] splats the posed cloud into a [`GBuffer`] with 16×16 tiles
//!    and front-to-back alpha blending.
//! 3. [`shade`] evaluates split-sum image-based lighting per pixel against a
//!    baked [`EnvironmentLight`].
//! 4. [`losses`] and [`fit`] measure and reduce the error against target images.
//!
//! [`envlight`] bakes lights from HDR panoramas, [`toyrig`] generates synthetic
//! heads, and [`io`] holds the on-disk containers.

pub mod deform;
pub mod envlight;
mod error;
pub mod fit;
pub mod io;
pub mod losses;
pub mod math;
pub mod model;
pub mod rasterize;
pub mod reference;
pub mod render;
pub mod shade;
pub mod toyrig;

pub use error::{Error, Result};
pub use model::{
    validate, BrdfLut, Camera, Cubemap, DeformationBases, EnvironmentLight, GBuffer, GaussianCloud,
    Image, MaterialRanges, PoseState, Rig, RigDims, Splats, Violation,
};
