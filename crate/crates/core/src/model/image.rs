use crate::math::{Mat3, Vec3};
use crate::{Error, Result};

/// Interleaved float image, row-major from the top-left pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        Self {
            width,
            height,
            channels,
            data: vec![0.0; width * height * channels],
        }
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Self {
        Self {
            width,
            height,
            channels,
            data: vec![value; width * height * channels],
        }
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Self {
            width,
            height,
            channels,
            data,
        }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }

    pub fn num_pixels(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    pub fn pixel(&self, i: usize) -> &[f64] {
        &self.data[i * self.channels..(i + 1) * self.channels]
    }

    pub fn pixel_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.channels..(i + 1) * self.channels]
    }

    pub fn ensure_same_shape(&self, other: &Image) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                a: self.shape(),
                b: other.shape(),
            });
        }
        Ok(())
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite {
                what: "image",
                index,
            }),
            None => Ok(()),
        }
    }

    /// Single channel `c` as its own image.
    pub fn channel(&self, c: usize) -> Image {
        Image {
            width: self.width,
            height: self.height,
            channels: 1,
            data: self
                .data
                .iter()
                .skip(c)
                .step_by(self.channels)
                .copied()
                .collect(),
        }
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

/// Per-pixel rendered attributes.
///
/// Material channels and depth hold the alpha-weighted sums produced by
/// front-to-back blending (premultiplied), so a half-covered pixel stores
/// half of its albedo. Normals are world-space and renormalized wherever
/// `alpha > 0.5`.
#[derive(Debug, Clone, PartialEq)]
pub struct GBuffer {
    pub width: usize,
    pub height: usize,
    pub albedo: Vec<[f64; 3]>,
    pub roughness: Vec<f64>,
    pub f0: Vec<f64>,
    pub normal: Vec<[f64; 3]>,
    /// Blended camera-space z.
    pub depth: Vec<f64>,
    pub alpha: Vec<f64>,
}

/// Un-premultiplied surface attributes of one pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub albedo: [f64; 3],
    pub roughness: f64,
    pub f0: f64,
    /// Unit world-space normal.
    pub normal: Vec3,
    pub alpha: f64,
}

impl GBuffer {
    pub fn new(width: usize, height: usize) -> Self {
        let n = width * height;
        Self {
            width,
            height,
            albedo: vec![[0.0; 3]; n],
            roughness: vec![0.0; n],
            f0: vec![0.0; n],
            normal: vec![[0.0; 3]; n],
            depth: vec![0.0; n],
            alpha: vec![0.0; n],
        }
    }

    pub fn num_pixels(&self) -> usize {
        self.width * self.height
    }

    /// Surface of pixel `i`, or `None` when nothing covers it or its normal
    /// is degenerate.
    pub fn surface(&self, i: usize) -> Option<SurfaceSample> {
        let alpha = self.alpha[i];
        if alpha <= 0.0 {
            return None;
        }
        let n = Vec3::from(self.normal[i]);
        let len = n.norm();
        if !(len > 0.0) {
            return None;
        }
        let a = self.albedo[i];
        Some(SurfaceSample {
            albedo: [a[0] / alpha, a[1] / alpha, a[2] / alpha],
            roughness: self.roughness[i] / alpha,
            f0: self.f0[i] / alpha,
            normal: n / len,
            alpha,
        })
    }

    /// Blended depth divided by coverage.
    pub fn linear_depth(&self, i: usize) -> f64 {
        if self.alpha[i] > 0.0 {
            self.depth[i] / self.alpha[i]
        } else {
            0.0
        }
    }

    pub fn alpha_image(&self) -> Image {
        self.scalar_image(&self.alpha)
    }

    pub fn depth_image(&self) -> Image {
        self.scalar_image(&self.depth)
    }

    pub fn roughness_image(&self) -> Image {
        self.scalar_image(&self.roughness)
    }

    pub fn f0_image(&self) -> Image {
        self.scalar_image(&self.f0)
    }

    pub fn albedo_image(&self) -> Image {
        self.vector_image(&self.albedo)
    }

    pub fn normal_image(&self) -> Image {
        self.vector_image(&self.normal)
    }

    /// Normals rotated into the camera frame.
    pub fn normal_image_camera(&self, world_to_camera: &Mat3) -> Image {
        let rotated: Vec<[f64; 3]> = self
            .normal
            .iter()
            .map(|n| (world_to_camera * Vec3::from(*n)).into())
            .collect();
        self.vector_image(&rotated)
    }

    /// Foreground mask `alpha > 0.5`.
    pub fn foreground_mask(&self) -> Vec<bool> {
        self.alpha.iter().map(|&a| a > 0.5).collect()
    }

    fn scalar_image(&self, values: &[f64]) -> Image {
        Image {
            width: self.width,
            height: self.height,
            channels: 1,
            data: values.to_vec(),
        }
    }

    fn vector_image(&self, values: &[[f64; 3]]) -> Image {
        Image {
            width: self.width,
            height: self.height,
            channels: 3,
            data: values.iter().flatten().copied().collect(),
        }
    }
}
