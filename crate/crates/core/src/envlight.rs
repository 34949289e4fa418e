//! Environment-light baking and the Monte Carlo reference integrator.
//!
//! Microfacet model: GGX distribution with `α = o²`, Smith-Schlick geometry
//! with `k = α/2`, Schlick Fresnel on a scalar `f0`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::math::{tangent_frame, Vec3};
use crate::model::{BrdfLut, CubeFace, Cubemap, EnvironmentLight, Image};
use crate::{Error, Result};

/// Roughness used for prefiltered level 0 instead of a perfect mirror.
pub const MIRROR_ROUGHNESS: f64 = 0.02;
/// Smallest `n·v` used when baking the LUT.
pub const MIN_NDOTV: f64 = 1e-4;

/// Bake resolutions, sample counts and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BakeSettings {
    pub irr_res: usize,
    pub env_res: usize,
    pub mips: usize,
    pub lut_res: usize,
    /// GGX samples per prefiltered texel.
    pub samples: usize,
    /// Samples per LUT cell.
    pub lut_samples: usize,
    pub seed: u64,
}

impl Default for BakeSettings {
    fn default() -> Self {
        Self {
            irr_res: 16,
            env_res: 32,
            mips: 3,
            lut_res: 64,
            samples: 512,
            lut_samples: 1024,
            seed: 0,
        }
    }
}

impl BakeSettings {
    pub fn check(&self) -> Result<()> {
        if self.irr_res == 0 || self.env_res == 0 || self.mips == 0 {
            return Err(Error::invalid(
                "bake settings",
                "resolutions and mips must be ≥ 1",
            ));
        }
        if self.env_res >> (self.mips - 1) == 0 {
            return Err(Error::invalid(
                "bake settings",
                format!("{} mips do not fit a {} base", self.mips, self.env_res),
            ));
        }
        if self.lut_res < 2 || self.samples == 0 || self.lut_samples == 0 {
            return Err(Error::invalid(
                "bake settings",
                "lut res ≥ 2 and sample counts ≥ 1",
            ));
        }
        Ok(())
    }
}

/// Panorama coordinates `(u, v) ∈ [0,1]²` of a direction: `u` is longitude
/// with −z at the center, `v` runs from +y (top) to −y.
pub fn direction_to_equirect(d: &Vec3) -> (f64, f64) {
    let d = d.normalize();
    let u = 0.5 + d.x.atan2(-d.z) / (2.0 * PI);
    let v = d.y.clamp(-1.0, 1.0).acos() / PI;
    (u, v)
}

pub fn equirect_to_direction(u: f64, v: f64) -> Vec3 {
    let phi = (u - 0.5) * 2.0 * PI;
    let theta = v * PI;
    Vec3::new(
        theta.sin() * phi.sin(),
        theta.cos(),
        -theta.sin() * phi.cos(),
    )
}

fn sample_equirect(img: &Image, u: f64, v: f64) -> [f64; 3] {
    let (w, h) = (img.width as isize, img.height as isize);
    let x = u * w as f64 - 0.5;
    let y = v * h as f64 - 0.5;
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let mut out = [0.0; 3];
    for (dx, dy, wgt) in [
        (0, 0, (1.0 - fx) * (1.0 - fy)),
        (1, 0, fx * (1.0 - fy)),
        (0, 1, (1.0 - fx) * fy),
        (1, 1, fx * fy),
    ] {
        let col = (x0 as isize + dx).rem_euclid(w) as usize;
        let row = (y0 as isize + dy).clamp(0, h - 1) as usize;
        for c in 0..3 {
            out[c] += wgt * img.get(col, row, c.min(img.channels - 1));
        }
    }
    out
}

/// Resample a longitude/latitude panorama onto a cubemap.
pub fn equirect_to_cubemap(image: &Image, face_res: usize) -> Result<Cubemap> {
    if image.width == 0 || image.height == 0 || face_res == 0 {
        return Err(Error::invalid(
            "equirect image",
            "empty image or zero face size",
        ));
    }
    if let Some(index) = image.data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "equirect image",
            index,
        });
    }
    if let Some(index) = image.data.iter().position(|&v| v < 0.0) {
        return Err(Error::invalid(
            "equirect image",
            format!("negative radiance at element {index}"),
        ));
    }
    Ok(Cubemap::from_fn(face_res, |d| {
        let (u, v) = direction_to_equirect(d);
        sample_equirect(image, u, v)
    }))
}

struct Texels {
    dirs: Vec<Vec3>,
    solid_angle: Vec<f64>,
    radiance: Vec<[f64; 3]>,
}

fn texels(cube: &Cubemap) -> Texels {
    let n = cube.texels.len();
    let mut t = Texels {
        dirs: Vec::with_capacity(n),
        solid_angle: Vec::with_capacity(n),
        radiance: Vec::with_capacity(n),
    };
    for i in 0..n {
        let (face, col, row) = Cubemap::unindex(cube.res, i);
        t.dirs
            .push(Cubemap::texel_direction(cube.res, face, col, row));
        t.solid_angle
            .push(Cubemap::texel_solid_angle(cube.res, col, row));
        t.radiance.push(cube.fetch(face, col, row));
    }
    t
}

/// Cosine convolution over every input texel with exact solid angles,
/// divided by the discrete `Σ max(0, n·ω) dω` so a constant map stays
/// exactly constant (the continuous value of that sum is π).
pub fn compute_irradiance(cube: &Cubemap, out_res: usize) -> Cubemap {
    let src = texels(cube);
    Cubemap::from_fn(out_res, |n| {
        let mut acc = [0.0; 3];
        let mut norm = 0.0;
        for i in 0..src.dirs.len() {
            let c = n.dot(&src.dirs[i]);
            if c <= 0.0 {
                continue;
            }
            let w = c * src.solid_angle[i];
            norm += w;
            for k in 0..3 {
                acc[k] += w * src.radiance[i][k];
            }
        }
        acc.map(|v| v / norm)
    })
}

/// Van der Corput radical inverse in base 2.
fn radical_inverse(i: u32) -> f64 {
    i.reverse_bits() as f64 * (1.0 / 4_294_967_296.0)
}

/// Hammersley points shifted by a seeded Cranley-Patterson rotation.
fn rotated_hammersley(n: usize, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let (s0, s1): (f64, f64) = (rng.random(), rng.random());
    (0..n)
        .map(|i| {
            let a = (i as f64 + 0.5) / n as f64 + s0;
            let b = radical_inverse(i as u32) + s1;
            (a.fract(), b.fract())
        })
        .collect()
}

/// GGX half-vector in the local frame (+z = normal).
#[inline]
fn ggx_half_vector(alpha: f64, xi: (f64, f64)) -> Vec3 {
    let a2 = alpha * alpha;
    let cos_t = ((1.0 - xi.0) / (1.0 + (a2 - 1.0) * xi.0)).max(0.0).sqrt();
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let phi = 2.0 * PI * xi.1;
    Vec3::new(sin_t * phi.cos(), sin_t * phi.sin(), cos_t)
}

/// GGX normal distribution `D(h)`.
pub fn ggx_d(alpha: f64, ndoth: f64) -> f64 {
    let a2 = alpha * alpha;
    let d = ndoth * ndoth * (a2 - 1.0) + 1.0;
    a2 / (PI * d * d)
}

/// Smith-Schlick joint masking term with `k = α/2`.
pub fn smith_g(alpha: f64, ndotv: f64, ndotl: f64) -> f64 {
    let k = alpha / 2.0;
    let g1 = |x: f64| x / (x * (1.0 - k) + k);
    g1(ndotv) * g1(ndotl)
}

fn to_world(local: &Vec3, n: &Vec3) -> Vec3 {
    let (t, b) = tangent_frame(n);
    t * local.x + b * local.y + n * local.z
}

/// Cubemap plus its box-filtered pyramid, for filtered importance sampling.
struct Pyramid {
    levels: Vec<Cubemap>,
}

impl Pyramid {
    fn new(cube: &Cubemap) -> Self {
        let mut levels = vec![cube.clone()];
        while levels.last().unwrap().res > 1 {
            let next = levels.last().unwrap().downsample();
            levels.push(next);
        }
        Self { levels }
    }

    fn sample(&self, d: &Vec3, lod: f64) -> [f64; 3] {
        let lod = lod.clamp(0.0, (self.levels.len() - 1) as f64);
        let l0 = lod.floor() as usize;
        let f = lod - l0 as f64;
        let a = self.levels[l0].sample_bilinear(d);
        if f == 0.0 {
            return a;
        }
        let b = self.levels[(l0 + 1).min(self.levels.len() - 1)].sample_bilinear(d);
        [0, 1, 2].map(|k| a[k] + f * (b[k] - a[k]))
    }
}

/// Roughness assigned to prefiltered level `m` of `mips`.
pub fn level_roughness(m: usize, mips: usize) -> f64 {
    if mips <= 1 {
        return MIRROR_ROUGHNESS;
    }
    (m as f64 / (mips - 1) as f64).max(MIRROR_ROUGHNESS)
}

/// GGX-prefiltered mip chain with `n = v = r`, weighted by `n·l`.
///
/// Samples read a box-filtered pyramid of the source at a level matched to
/// their solid angle, which keeps low sample counts noise-free.
pub fn prefilter_ggx(
    cube: &Cubemap,
    base_res: usize,
    mips: usize,
    samples: usize,
    seed: u64,
) -> Vec<Cubemap> {
    let pyramid = Pyramid::new(cube);
    let texel_angle = 4.0 * PI / (6.0 * (cube.res * cube.res) as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..mips)
        .map(|m| {
            let res = (base_res >> m).max(1);
            let alpha = level_roughness(m, mips).powi(2);
            let points = rotated_hammersley(samples, &mut rng);
            // local sample directions and lods are shared by every texel
            let local: Vec<(Vec3, f64, f64)> = points
                .iter()
                .filter_map(|&xi| {
                    let h = ggx_half_vector(alpha, xi);
                    // n = v = +z
                    let l = 2.0 * h.z * h - Vec3::z();
                    if l.z <= 0.0 {
                        return None;
                    }
                    let pdf = ggx_d(alpha, h.z) / 4.0;
                    let sample_angle = 1.0 / (samples as f64 * pdf);
                    let lod = (0.5 * (sample_angle / texel_angle).log2() + 1.0).max(0.0);
                    Some((l, l.z, lod))
                })
                .collect();
            Cubemap::from_fn(res, |r| {
                let mut acc = [0.0; 3];
                let mut wsum = 0.0;
                for (l, w, lod) in &local {
                    let rad = pyramid.sample(&to_world(l, r), *lod);
                    for k in 0..3 {
                        acc[k] += w * rad[k];
                    }
                    wsum += w;
                }
                acc.map(|v| v / wsum)
            })
        })
        .collect()
}

/// Split-sum BRDF table: `scale = ∫(1 − Fc)·G_vis`, `bias = ∫Fc·G_vis` with
/// `Fc = (1 − v·h)⁵`, so specular ≈ prefiltered · (f0·scale + bias).
pub fn compute_brdf_lut(res: usize, samples: usize, seed: u64) -> BrdfLut {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = rotated_hammersley(samples, &mut rng);
    let last = (res - 1) as f64;
    let data = (0..res * res)
        .into_par_iter()
        .map(|cell| {
            let o = (cell / res) as f64 / last;
            let ndotv = ((cell % res) as f64 / last).max(MIN_NDOTV);
            let (scale, bias) = integrate_brdf(o * o, ndotv, &points);
            [scale.clamp(0.0, 1.0) as f32, bias.clamp(0.0, 1.0) as f32]
        })
        .collect();
    BrdfLut { res, data }
}

fn integrate_brdf(alpha: f64, ndotv: f64, points: &[(f64, f64)]) -> (f64, f64) {
    let v = Vec3::new((1.0 - ndotv * ndotv).sqrt(), 0.0, ndotv);
    let (mut a, mut b) = (0.0, 0.0);
    for &xi in points {
        let h = ggx_half_vector(alpha, xi);
        let vdoth = v.dot(&h);
        let l = 2.0 * vdoth * h - v;
        if l.z <= 0.0 || vdoth <= 0.0 {
            continue;
        }
        let g_vis = smith_g(alpha, ndotv, l.z) * vdoth / (h.z * ndotv);
        let fc = (1.0 - vdoth).powi(5);
        a += (1.0 - fc) * g_vis;
        b += fc * g_vis;
    }
    let n = points.len() as f64;
    (a / n, b / n)
}

/// Bake all three maps from a source cubemap.
pub fn bake_environment(cube: &Cubemap, settings: &BakeSettings) -> Result<EnvironmentLight> {
    settings.check()?;
    cube.check()?;
    Ok(EnvironmentLight {
        irradiance: compute_irradiance(cube, settings.irr_res),
        prefiltered: prefilter_ggx(
            cube,
            settings.env_res,
            settings.mips,
            settings.samples,
            settings.seed,
        ),
        brdf_lut: compute_brdf_lut(settings.lut_res, settings.lut_samples, settings.seed),
        yaw: 0.0,
    })
}

/// Monte Carlo estimate of reflected radiance with per-channel standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub diffuse: [f64; 3],
    pub specular: [f64; 3],
    pub diffuse_stderr: [f64; 3],
    pub specular_stderr: [f64; 3],
}

#[derive(Default)]
struct Moments {
    sum: [f64; 3],
    sq: [f64; 3],
}

impl Moments {
    fn add(&mut self, x: [f64; 3]) {
        for k in 0..3 {
            self.sum[k] += x[k];
            self.sq[k] += x[k] * x[k];
        }
    }

    fn finish(&self, n: usize) -> ([f64; 3], [f64; 3]) {
        let n = n as f64;
        let mean = self.sum.map(|s| s / n);
        let mut err = [0.0; 3];
        for k in 0..3 {
            let var = (self.sq[k] / n - mean[k] * mean[k]).max(0.0);
            err[k] = (var / n).sqrt();
        }
        (mean, err)
    }
}

/// Unbiased estimates of the diffuse integral `∫(a/π)·L·(n·l)` (cosine
/// sampling) and the specular integral `∫D·F·G/(4(n·l)(n·v))·L·(n·l)` (GGX
/// sampling, Schlick Fresnel on `f0`).
#[allow(clippy::too_many_arguments)]
pub fn mc_reference(
    cube: &Cubemap,
    n: &Vec3,
    v: &Vec3,
    albedo: [f64; 3],
    roughness: f64,
    f0: f64,
    samples: usize,
    seed: u64,
) -> McEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n.normalize();
    let v = v.normalize();
    let ndotv = n.dot(&v).max(MIN_NDOTV);
    let alpha = roughness * roughness;

    let mut diff = Moments::default();
    let mut spec = Moments::default();
    for _ in 0..samples {
        // cosine-weighted: estimator reduces to albedo · L
        let (u1, u2): (f64, f64) = (rng.random(), rng.random());
        let r = u1.sqrt();
        let phi = 2.0 * PI * u2;
        let local = Vec3::new(r * phi.cos(), r * phi.sin(), (1.0 - u1).max(0.0).sqrt());
        let l = to_world(&local, &n);
        let rad = cube.sample_bilinear(&l);
        diff.add([0, 1, 2].map(|k| albedo[k] * rad[k]));

        let xi: (f64, f64) = (rng.random(), rng.random());
        let h = to_world(&ggx_half_vector(alpha, xi), &n);
        let vdoth = v.dot(&h);
        let l = 2.0 * vdoth * h - v;
        let ndotl = n.dot(&l);
        if ndotl <= 0.0 || vdoth <= 0.0 {
            spec.add([0.0; 3]);
            continue;
        }
        let ndoth = n.dot(&h);
        let fresnel = f0 + (1.0 - f0) * (1.0 - vdoth).powi(5);
        let weight = fresnel * smith_g(alpha, ndotv, ndotl) * vdoth / (ndoth * ndotv);
        let rad = cube.sample_bilinear(&l);
        spec.add(rad.map(|x| weight * x));
    }
    let (diffuse, diffuse_stderr) = diff.finish(samples);
    let (specular, specular_stderr) = spec.finish(samples);
    McEstimate {
        diffuse,
        specular,
        diffuse_stderr,
        specular_stderr,
    }
}

/// Center direction of each face, in storage order.
pub fn face_centers() -> [Vec3; 6] {
    CubeFace::ALL.map(|f| f.direction(0.0, 0.0))
}
