//! Deferred split-sum shading of G-buffers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::math::{rotation_y, Mat3, Vec3};
use crate::model::{Camera, EnvironmentLight, GBuffer, Image, MaterialRanges, SurfaceSample};
use crate::{Error, Result};

/// Exponent constants of the approximate Fresnel term.
pub const FRESNEL_A: f64 = -5.55473;
pub const FRESNEL_B: f64 = -6.698316;

/// Material-editing and display controls applied at shading time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadeParams {
    pub f0_scale: f64,
    pub roughness_scale: f64,
    /// Added to the light's own yaw, radians.
    pub env_yaw: f64,
    pub exposure: f64,
    pub ranges: MaterialRanges,
}

impl Default for ShadeParams {
    fn default() -> Self {
        Self {
            f0_scale: 1.0,
            roughness_scale: 1.0,
            env_yaw: 0.0,
            exposure: 1.0,
            ranges: MaterialRanges::default(),
        }
    }
}

impl ShadeParams {
    pub fn check(&self) -> Result<()> {
        let ok = self.f0_scale.is_finite()
            && self.f0_scale >= 0.0
            && self.roughness_scale.is_finite()
            && self.roughness_scale > 0.0
            && self.exposure.is_finite()
            && self.exposure > 0.0
            && self.env_yaw.is_finite();
        if !ok {
            return Err(Error::invalid(
                "shade params",
                "scales and exposure must be finite, f0_scale ≥ 0, the others > 0",
            ));
        }
        self.ranges.check()
    }

    /// Effective roughness and its derivative with respect to `o`.
    pub fn roughness(&self, o: f64) -> (f64, f64) {
        clamp_with_slope(
            o * self.roughness_scale,
            self.ranges.roughness,
            self.roughness_scale,
        )
    }

    /// Effective base reflectance and its derivative with respect to `f0`.
    pub fn f0(&self, f0: f64) -> (f64, f64) {
        clamp_with_slope(f0 * self.f0_scale, self.ranges.f0, self.f0_scale)
    }
}

fn clamp_with_slope(x: f64, (lo, hi): (f64, f64), slope: f64) -> (f64, f64) {
    if x < lo {
        (lo, 0.0)
    } else if x > hi {
        (hi, 0.0)
    } else {
        (x, slope)
    }
}

/// Mirror `v` about `n`: `2(n·v)n − v`.
pub fn reflect(n: &Vec3, v: &Vec3) -> Vec3 {
    2.0 * n.dot(v) * n - v
}

/// `2^((A·ndotv + B)·ndotv)`
pub fn fresnel_power(ndotv: f64) -> f64 {
    ((FRESNEL_A * ndotv + FRESNEL_B) * ndotv).exp2()
}

/// Roughness-aware approximate Fresnel term,
/// `f0 + (m − f0)·p` with `m = max(1 − o, f0)`, arranged so that `p = 1`
/// gives `m` and `m = f0` gives `f0` without rounding.
pub fn fresnel_ks(ndotv: f64, roughness: f64, f0: f64) -> f64 {
    let m = (1.0 - roughness).max(f0);
    m - (m - f0) * (1.0 - fresnel_power(ndotv))
}

/// `(∂ks/∂o, ∂ks/∂f0)`
fn fresnel_ks_grad(ndotv: f64, roughness: f64, f0: f64) -> (f64, f64) {
    let p = fresnel_power(ndotv);
    if 1.0 - roughness > f0 {
        (-p, 1.0 - p)
    } else {
        (0.0, 1.0)
    }
}

/// Lookup frame for a total yaw: directions are turned by `−yaw` about +y.
/// Whole turns are dropped first so `yaw` and `yaw + 2π` shade identically.
fn yaw_frame(yaw: f64) -> Mat3 {
    rotation_y(-yaw.rem_euclid(std::f64::consts::TAU))
}

/// Diffuse irradiance (1/π folded in) along `n`.
pub fn sample_irradiance(env: &EnvironmentLight, n: &Vec3) -> [f64; 3] {
    env.irradiance.sample_bilinear(&(yaw_frame(env.yaw) * n))
}

/// Prefiltered radiance along `r` at roughness `o`; `o ∈ [0,1]` maps
/// linearly onto mip levels `[0, M−1]`.
pub fn sample_prefiltered(env: &EnvironmentLight, r: &Vec3, roughness: f64) -> [f64; 3] {
    prefiltered_with_slope(env, &(yaw_frame(env.yaw) * r), roughness).0
}

/// Value and derivative with respect to roughness, direction already in the
/// lookup frame.
fn prefiltered_with_slope(
    env: &EnvironmentLight,
    d: &Vec3,
    roughness: f64,
) -> ([f64; 3], [f64; 3]) {
    let levels = env.num_mips();
    if levels == 1 {
        return (env.prefiltered[0].sample_bilinear(d), [0.0; 3]);
    }
    let last = (levels - 1) as f64;
    let lod = roughness.clamp(0.0, 1.0) * last;
    let m0 = (lod.floor() as usize).min(levels - 2);
    let f = lod - m0 as f64;
    let a = env.prefiltered[m0].sample_bilinear(d);
    let b = env.prefiltered[m0 + 1].sample_bilinear(d);
    let inside = (0.0..=1.0).contains(&roughness);
    let value = [0, 1, 2].map(|k| a[k] + f * (b[k] - a[k]));
    let slope = [0, 1, 2].map(|k| if inside { (b[k] - a[k]) * last } else { 0.0 });
    (value, slope)
}

/// Bilinear `(scale, bias)` from the BRDF table.
pub fn sample_brdf_lut(env: &EnvironmentLight, roughness: f64, ndotv: f64) -> [f64; 2] {
    env.brdf_lut.sample(roughness, ndotv)
}

/// Straight (not alpha-weighted) shading terms of one surface sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceShading {
    pub diffuse: [f64; 3],
    pub specular: [f64; 3],
}

impl SurfaceShading {
    pub fn total(&self) -> [f64; 3] {
        [0, 1, 2].map(|k| self.diffuse[k] + self.specular[k])
    }
}

/// Partial derivatives of one pixel's output (exposure and alpha included)
/// with respect to its straight material values. Albedo acts per channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadingGradients {
    pub output: [f64; 3],
    pub d_albedo: [f64; 3],
    pub d_roughness: [f64; 3],
    pub d_f0: [f64; 3],
}

/// Shading and its material gradients for a surface seen along `view`
/// (unit vector from the surface toward the camera).
pub fn shading_gradients(
    surface: &SurfaceSample,
    view: &Vec3,
    env: &EnvironmentLight,
    params: &ShadeParams,
) -> ShadingGradients {
    let frame = yaw_frame(env.yaw + params.env_yaw);
    let n = surface.normal;
    let ndotv = n.dot(view).clamp(0.0, 1.0);
    let r = reflect(&n, view);
    let (o, do_do) = params.roughness(surface.roughness);
    let (f0, df0_df0) = params.f0(surface.f0);

    let irr = env.irradiance.sample_bilinear(&(frame * n));
    let (pref, dpref) = prefiltered_with_slope(env, &(frame * r), o);
    let lut = env.brdf_lut.sample_with_slope(o, ndotv);
    let ks = fresnel_ks(ndotv, o, f0);
    let (dks_do, dks_df0) = fresnel_ks_grad(ndotv, o, f0);

    let brdf = ks * lut.scale + lut.bias;
    let dbrdf_do = dks_do * lut.scale + ks * lut.d_scale_d_roughness + lut.d_bias_d_roughness;
    let k = params.exposure * surface.alpha;
    let mut g = ShadingGradients {
        output: [0.0; 3],
        d_albedo: [0.0; 3],
        d_roughness: [0.0; 3],
        d_f0: [0.0; 3],
    };
    for c in 0..3 {
        g.output[c] = k * (surface.albedo[c] * irr[c] + pref[c] * brdf);
        g.d_albedo[c] = k * irr[c];
        g.d_roughness[c] = k * (dpref[c] * brdf + pref[c] * dbrdf_do) * do_do;
        g.d_f0[c] = k * pref[c] * dks_df0 * lut.scale * df0_df0;
    }
    g
}

/// Diffuse and specular terms of one surface sample.
pub fn shade_surface(
    surface: &SurfaceSample,
    view: &Vec3,
    env: &EnvironmentLight,
    params: &ShadeParams,
) -> SurfaceShading {
    let frame = yaw_frame(env.yaw + params.env_yaw);
    let n = surface.normal;
    let ndotv = n.dot(view).clamp(0.0, 1.0);
    let r = reflect(&n, view);
    let (o, _) = params.roughness(surface.roughness);
    let (f0, _) = params.f0(surface.f0);

    let irr = env.irradiance.sample_bilinear(&(frame * n));
    let (pref, _) = prefiltered_with_slope(env, &(frame * r), o);
    let [scale, bias] = env.brdf_lut.sample(o, ndotv);
    let brdf = fresnel_ks(ndotv, o, f0) * scale + bias;
    SurfaceShading {
        diffuse: [0, 1, 2].map(|c| surface.albedo[c] * irr[c]),
        specular: pref.map(|p| p * brdf),
    }
}

/// Unit direction from pixel `(x, y)`'s surface toward the camera.
pub fn view_direction(camera: &Camera, x: usize, y: usize) -> Vec3 {
    -camera.ray_direction(x as f64, y as f64)
}

/// Shade a G-buffer into an RGB image composited over black.
pub fn shade(
    gbuffer: &GBuffer,
    camera: &Camera,
    env: &EnvironmentLight,
    params: &ShadeParams,
) -> Result<Image> {
    shade_split(gbuffer, camera, env, params).map(|(img, _)| img)
}

/// Like [`shade`], also returning the specular contribution alone (with the
/// same alpha and exposure weighting).
pub fn shade_split(
    gbuffer: &GBuffer,
    camera: &Camera,
    env: &EnvironmentLight,
    params: &ShadeParams,
) -> Result<(Image, Image)> {
    if (gbuffer.width, gbuffer.height) != (camera.width, camera.height) {
        return Err(Error::ResolutionMismatch {
            expected: (camera.width, camera.height),
            got: (gbuffer.width, gbuffer.height),
        });
    }
    params.check()?;
    let (w, h) = (gbuffer.width, gbuffer.height);
    let mut out = Image::new(w, h, 3);
    let mut spec = Image::new(w, h, 3);
    out.data
        .par_chunks_mut(3 * w)
        .zip(spec.data.par_chunks_mut(3 * w))
        .enumerate()
        .for_each(|(y, (row, srow))| {
            for x in 0..w {
                let Some(s) = gbuffer.surface(y * w + x) else {
                    continue;
                };
                let sh = shade_surface(&s, &view_direction(camera, x, y), env, params);
                let k = params.exposure * s.alpha;
                for c in 0..3 {
                    row[3 * x + c] = k * (sh.diffuse[c] + sh.specular[c]);
                    srow[3 * x + c] = k * sh.specular[c];
                }
            }
        });
    Ok((out, spec))
}
