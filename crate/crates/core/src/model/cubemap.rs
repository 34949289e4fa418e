use std::f64::consts::PI;

use rayon::prelude::*;

use crate::math::{Mat3, Vec3};
use crate::{Error, Result};

/// Cube faces in storage order.
///
/// With `u, v ∈ [-1, 1]` (texel centers at `2(i + 0.5)/res − 1`, `v` growing
/// downward) the unnormalized face directions are:
///
/// | face | direction      |
/// |------|----------------|
/// | +x   | `( 1, −v, −u)` |
/// | −x   | `(−1, −v,  u)` |
/// | +y   | `( u,  1,  v)` |
/// | −y   | `( u, −1, −v)` |
/// | +z   | `( u, −v,  1)` |
/// | −z   | `(−u, −v, −1)` |
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubeFace {
    PosX = 0,
    NegX = 1,
    PosY = 2,
    NegY = 3,
    PosZ = 4,
    NegZ = 5,
}

impl CubeFace {
    pub const ALL: [CubeFace; 6] = [
        CubeFace::PosX,
        CubeFace::NegX,
        CubeFace::PosY,
        CubeFace::NegY,
        CubeFace::PosZ,
        CubeFace::NegZ,
    ];

    pub fn from_index(i: usize) -> CubeFace {
        Self::ALL[i]
    }

    /// Unnormalized direction through face coordinates `(u, v)`.
    pub fn direction(self, u: f64, v: f64) -> Vec3 {
        match self {
            CubeFace::PosX => Vec3::new(1.0, -v, -u),
            CubeFace::NegX => Vec3::new(-1.0, -v, u),
            CubeFace::PosY => Vec3::new(u, 1.0, v),
            CubeFace::NegY => Vec3::new(u, -1.0, -v),
            CubeFace::PosZ => Vec3::new(u, -v, 1.0),
            CubeFace::NegZ => Vec3::new(-u, -v, -1.0),
        }
    }

    /// Face and `(u, v)` hit by a direction (need not be normalized).
    pub fn locate(d: &Vec3) -> (CubeFace, f64, f64) {
        let (ax, ay, az) = (d.x.abs(), d.y.abs(), d.z.abs());
        if ax >= ay && ax >= az {
            if d.x > 0.0 {
                (CubeFace::PosX, -d.z / ax, -d.y / ax)
            } else {
                (CubeFace::NegX, d.z / ax, -d.y / ax)
            }
        } else if ay >= az {
            if d.y > 0.0 {
                (CubeFace::PosY, d.x / ay, d.z / ay)
            } else {
                (CubeFace::NegY, d.x / ay, -d.z / ay)
            }
        } else if d.z > 0.0 {
            (CubeFace::PosZ, d.x / az, -d.y / az)
        } else {
            (CubeFace::NegZ, -d.x / az, -d.y / az)
        }
    }
}

/// Six square faces of linear RGB radiance.
#[derive(Debug, Clone, PartialEq)]
pub struct Cubemap {
    pub res: usize,
    /// `texels[face * res² + row * res + col]`
    pub texels: Vec<[f32; 3]>,
}

impl Cubemap {
    pub fn new(res: usize) -> Self {
        Self {
            res,
            texels: vec![[0.0; 3]; 6 * res * res],
        }
    }

    pub fn constant(res: usize, rgb: [f64; 3]) -> Self {
        Self {
            res,
            texels: vec![[rgb[0] as f32, rgb[1] as f32, rgb[2] as f32]; 6 * res * res],
        }
    }

    /// Evaluate `f` at every texel-center direction.
    pub fn from_fn<F>(res: usize, f: F) -> Self
    where
        F: Fn(&Vec3) -> [f64; 3] + Sync,
    {
        let texels = (0..6 * res * res)
            .into_par_iter()
            .map(|i| {
                let (face, col, row) = Self::unindex(res, i);
                let rgb = f(&Self::texel_direction(res, face, col, row));
                [rgb[0] as f32, rgb[1] as f32, rgb[2] as f32]
            })
            .collect();
        Self { res, texels }
    }

    #[inline]
    pub fn index(&self, face: CubeFace, col: usize, row: usize) -> usize {
        (face as usize * self.res + row) * self.res + col
    }

    pub fn unindex(res: usize, i: usize) -> (CubeFace, usize, usize) {
        let face = i / (res * res);
        let rem = i % (res * res);
        (CubeFace::from_index(face), rem % res, rem / res)
    }

    #[inline]
    pub fn texel_coord(res: usize, i: f64) -> f64 {
        2.0 * (i + 0.5) / res as f64 - 1.0
    }

    /// Unit direction through a texel center.
    pub fn texel_direction(res: usize, face: CubeFace, col: usize, row: usize) -> Vec3 {
        face.direction(
            Self::texel_coord(res, col as f64),
            Self::texel_coord(res, row as f64),
        )
        .normalize()
    }

    /// Exact solid angle subtended by a texel.
    pub fn texel_solid_angle(res: usize, col: usize, row: usize) -> f64 {
        fn area(x: f64, y: f64) -> f64 {
            (x * y).atan2((x * x + y * y + 1.0).sqrt())
        }
        let step = 2.0 / res as f64;
        let x0 = -1.0 + col as f64 * step;
        let y0 = -1.0 + row as f64 * step;
        let (x1, y1) = (x0 + step, y0 + step);
        area(x0, y0) - area(x0, y1) - area(x1, y0) + area(x1, y1)
    }

    #[inline]
    pub fn fetch(&self, face: CubeFace, col: usize, row: usize) -> [f64; 3] {
        let t = self.texels[self.index(face, col, row)];
        [t[0] as f64, t[1] as f64, t[2] as f64]
    }

    pub fn sample_nearest(&self, dir: &Vec3) -> [f64; 3] {
        let (face, u, v) = CubeFace::locate(dir);
        let col = self.coord_to_texel(u);
        let row = self.coord_to_texel(v);
        self.fetch(face, col, row)
    }

    fn coord_to_texel(&self, u: f64) -> usize {
        let t = ((u + 1.0) * 0.5 * self.res as f64).floor();
        (t.max(0.0) as usize).min(self.res - 1)
    }

    /// Bilinear lookup. Taps that fall past a face edge are resolved to the
    /// nearest texel of the neighbouring face, so filtering is seamless.
    pub fn sample_bilinear(&self, dir: &Vec3) -> [f64; 3] {
        let (face, u, v) = CubeFace::locate(dir);
        let res = self.res as f64;
        let s = (u + 1.0) * 0.5 * res - 0.5;
        let t = (v + 1.0) * 0.5 * res - 0.5;
        let c0 = s.floor();
        let r0 = t.floor();
        let fs = s - c0;
        let ft = t - r0;
        let mut out = [0.0; 3];
        for (dc, dr, w) in [
            (0.0, 0.0, (1.0 - fs) * (1.0 - ft)),
            (1.0, 0.0, fs * (1.0 - ft)),
            (0.0, 1.0, (1.0 - fs) * ft),
            (1.0, 1.0, fs * ft),
        ] {
            if w == 0.0 {
                continue;
            }
            let texel = self.tap(face, c0 + dc, r0 + dr);
            for k in 0..3 {
                out[k] += w * texel[k];
            }
        }
        out
    }

    fn tap(&self, face: CubeFace, col: f64, row: f64) -> [f64; 3] {
        let res = self.res as f64;
        if col >= 0.0 && row >= 0.0 && col < res && row < res {
            return self.fetch(face, col as usize, row as usize);
        }
        let d = face.direction(
            Self::texel_coord(self.res, col),
            Self::texel_coord(self.res, row),
        );
        self.sample_nearest(&d)
    }

    pub fn check(&self) -> Result<()> {
        if self.texels.len() != 6 * self.res * self.res {
            return Err(Error::DimensionMismatch {
                what: "cubemap texels",
                expected: 6 * self.res * self.res,
                got: self.texels.len(),
            });
        }
        for (index, t) in self.texels.iter().enumerate() {
            if t.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::NonFinite {
                    what: "cubemap texel (finite, nonnegative)",
                    index,
                });
            }
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> Cubemap {
        Cubemap {
            res: self.res,
            texels: self
                .texels
                .iter()
                .map(|t| {
                    [
                        (t[0] as f64 * s) as f32,
                        (t[1] as f64 * s) as f32,
                        (t[2] as f64 * s) as f32,
                    ]
                })
                .collect(),
        }
    }

    /// 2×2 box-filtered copy at half resolution.
    pub fn downsample(&self) -> Cubemap {
        let half = (self.res / 2).max(1);
        if half == self.res {
            return self.clone();
        }
        let mut out = Cubemap::new(half);
        for face in CubeFace::ALL {
            for row in 0..half {
                for col in 0..half {
                    let mut acc = [0.0f64; 3];
                    for (dc, dr) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                        let t = self.fetch(face, 2 * col + dc, 2 * row + dr);
                        for k in 0..3 {
                            acc[k] += 0.25 * t[k];
                        }
                    }
                    let i = out.index(face, col, row);
                    out.texels[i] = [acc[0] as f32, acc[1] as f32, acc[2] as f32];
                }
            }
        }
        out
    }

    /// Resample so that the content is rotated by `rot`:
    /// `result(d) = self(rotᵀ d)`.
    pub fn rotated(&self, rot: &Mat3) -> Cubemap {
        let inv = rot.transpose();
        Cubemap::from_fn(self.res, |d| self.sample_bilinear(&(inv * d)))
    }

    /// Mean radiance weighted by solid angle.
    pub fn mean_radiance(&self) -> [f64; 3] {
        let mut acc = [0.0; 3];
        for i in 0..self.texels.len() {
            let (_, col, row) = Self::unindex(self.res, i);
            let w = Self::texel_solid_angle(self.res, col, row);
            for k in 0..3 {
                acc[k] += w * self.texels[i][k] as f64;
            }
        }
        acc.map(|v| v / (4.0 * PI))
    }
}
