//! Shared data model: clouds, rigs, poses, cameras, images and lights.
//!
//! All types are plain values. Per-point and per-texel storage is `f32`
//! (matching the on-disk containers); arithmetic happens in `f64`.

mod camera;
mod cloud;
mod cubemap;
mod image;
mod light;
mod pose;
mod rig;
mod validate;

pub use camera::Camera;
pub use cloud::{DeformationBases, GaussianCloud, MaterialRanges, Splats};
pub use cubemap::{CubeFace, Cubemap};
pub use image::{GBuffer, Image, SurfaceSample};
pub use light::{BrdfLut, EnvironmentLight, LutSample};
pub use pose::PoseState;
pub use rig::{Rig, RigDims};
pub use validate::{validate, validate_rig, validate_with, Violation};
