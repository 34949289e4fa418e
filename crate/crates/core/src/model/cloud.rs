use serde::{Deserialize, Serialize};

use super::RigDims;
use crate::{Error, Result};

/// Attributes consumed by the rasterizer and the shader.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Splats {
    pub positions: Vec<[f32; 3]>,
    /// Unit quaternions, `[w, x, y, z]`.
    pub rotations: Vec<[f32; 4]>,
    /// Natural log of the per-axis standard deviations.
    pub log_scales: Vec<[f32; 3]>,
    pub opacities: Vec<f32>,
    /// Linear RGB.
    pub albedo: Vec<[f32; 3]>,
    pub roughness: Vec<f32>,
    /// Scalar base reflectance, broadcast to RGB when shading.
    pub f0: Vec<f32>,
}

impl Splats {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Positive per-axis scale of point `i`.
    pub fn scale(&self, i: usize) -> [f64; 3] {
        let s = self.log_scales[i];
        [
            (s[0] as f64).exp(),
            (s[1] as f64).exp(),
            (s[2] as f64).exp(),
        ]
    }

    pub fn set_scale(&mut self, i: usize, scale: [f64; 3]) {
        self.log_scales[i] = [
            scale[0].ln() as f32,
            scale[1].ln() as f32,
            scale[2].ln() as f32,
        ];
    }

    pub fn push(&mut self, other: &Splats, i: usize) {
        self.positions.push(other.positions[i]);
        self.rotations.push(other.rotations[i]);
        self.log_scales.push(other.log_scales[i]);
        self.opacities.push(other.opacities[i]);
        self.albedo.push(other.albedo[i]);
        self.roughness.push(other.roughness[i]);
        self.f0.push(other.f0[i]);
    }

    pub fn check_lengths(&self) -> Result<()> {
        let n = self.positions.len();
        let lens = [
            ("rotations", self.rotations.len()),
            ("log_scales", self.log_scales.len()),
            ("opacities", self.opacities.len()),
            ("albedo", self.albedo.len()),
            ("roughness", self.roughness.len()),
            ("f0", self.f0.len()),
        ];
        for (what, got) in lens {
            if got != n {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: n,
                    got,
                });
            }
        }
        Ok(())
    }
}

/// Per-point deformation attributes.
///
/// Layouts are row-major: `shape[(i * 3 + axis) * n_shape + m]`, likewise for
/// `expr` and `pose`; `weights[i * (K + 1) + k]` with column 0 the root.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DeformationBases {
    pub dims: RigDims,
    pub shape: Vec<f32>,
    pub expr: Vec<f32>,
    pub pose: Vec<f32>,
    pub weights: Vec<f32>,
}

impl DeformationBases {
    pub fn zeros(n: usize, dims: RigDims) -> Self {
        let mut weights = vec![0.0; n * dims.n_transforms()];
        for row in weights.chunks_mut(dims.n_transforms()) {
            row[0] = 1.0;
        }
        Self {
            dims,
            shape: vec![0.0; n * 3 * dims.n_shape],
            expr: vec![0.0; n * 3 * dims.n_expr],
            pose: vec![0.0; n * 3 * dims.n_pose_features()],
            weights,
        }
    }

    pub fn weight_row(&self, i: usize) -> &[f32] {
        let k = self.dims.n_transforms();
        &self.weights[i * k..(i + 1) * k]
    }

    pub(crate) fn check_lengths(&self, n: usize) -> Result<()> {
        let d = self.dims;
        let lens = [
            ("shape basis", n * 3 * d.n_shape, self.shape.len()),
            ("expression basis", n * 3 * d.n_expr, self.expr.len()),
            ("pose basis", n * 3 * d.n_pose_features(), self.pose.len()),
            ("blend weights", n * d.n_transforms(), self.weights.len()),
        ];
        for (what, expected, got) in lens {
            if expected != got {
                return Err(Error::DimensionMismatch {
                    what,
                    expected,
                    got,
                });
            }
        }
        Ok(())
    }
}

/// A Gaussian avatar in canonical space.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GaussianCloud {
    pub splats: Splats,
    pub bases: DeformationBases,
}

impl GaussianCloud {
    pub fn len(&self) -> usize {
        self.splats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splats.is_empty()
    }

    pub fn dims(&self) -> RigDims {
        self.bases.dims
    }

    pub fn check_lengths(&self) -> Result<()> {
        self.splats.check_lengths()?;
        self.bases.check_lengths(self.len())
    }

    /// Clamp roughness and base reflectance into `ranges`; nothing else changes.
    pub fn clamp_materials(&self, ranges: &MaterialRanges) -> Result<GaussianCloud> {
        ranges.check()?;
        let mut out = self.clone();
        ranges.clamp_in_place(&mut out.splats);
        Ok(out)
    }
}

/// Allowed intervals for roughness and base reflectance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialRanges {
    pub roughness: (f64, f64),
    pub f0: (f64, f64),
}

impl Default for MaterialRanges {
    fn default() -> Self {
        Self {
            roughness: (0.1, 1.0),
            f0: (0.02, 0.2),
        }
    }
}

impl MaterialRanges {
    pub fn check(&self) -> Result<()> {
        for (what, (min, max)) in [("roughness", self.roughness), ("f0", self.f0)] {
            if !(min < max) {
                return Err(Error::InvalidRange { what, min, max });
            }
        }
        Ok(())
    }

    pub fn clamp_roughness(&self, o: f64) -> f64 {
        o.clamp(self.roughness.0, self.roughness.1)
    }

    pub fn clamp_f0(&self, f0: f64) -> f64 {
        f0.clamp(self.f0.0, self.f0.1)
    }

    pub(crate) fn clamp_in_place(&self, splats: &mut Splats) {
        for o in &mut splats.roughness {
            *o = self.clamp_roughness(*o as f64) as f32;
        }
        for f in &mut splats.f0 {
            *f = self.clamp_f0(*f as f64) as f32;
        }
    }
}
