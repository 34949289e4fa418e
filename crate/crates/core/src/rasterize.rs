//! Tile-based Gaussian splatting into G-buffers.
//!
//! Gaussians are projected with the affine (EWA) approximation, binned into
//! 16×16 tiles by their 3σ extent, sorted by `(depth, index)` and blended
//! front to back per pixel. Pixel `(x, y)` has its center at integer
//! coordinates.

use rayon::prelude::*;

use crate::math::{quat_f64, quat_to_mat, vec3, Mat3, Vec3};
use crate::model::{Camera, GBuffer, Image, Splats};
use crate::{Error, Result};

pub const TILE_SIZE: usize = 16;
/// Added to the diagonal of every projected covariance, in px².
pub const DILATION: f64 = 0.3;
pub const MAX_ALPHA: f64 = 0.99;
pub const MIN_TRANSMITTANCE: f64 = 1e-4;
/// Squared Mahalanobis cutoff (3σ support).
pub const CUTOFF: f64 = 9.0;

/// `Σ = R S Sᵀ Rᵀ` for a (normalized) wxyz quaternion and axis scales.
pub fn covariance3d(rotation: [f64; 4], scale: [f64; 3]) -> Mat3 {
    let m = quat_to_mat(rotation) * Mat3::from_diagonal(&Vec3::from(scale));
    m * m.transpose()
}

/// Screen-space footprint of one Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedGaussian {
    /// Pixel coordinates of the projected mean.
    pub mean: [f64; 2],
    /// Symmetric 2×2 covariance `(xx, xy, yy)`, dilation included.
    pub cov: [f64; 3],
    /// Inverse of `cov`, same layout.
    pub conic: [f64; 3],
    /// Camera-space z of the mean.
    pub depth: f64,
    /// Binning radius in pixels, `3·sqrt(λ_max)`.
    pub radius: f64,
    pub index: usize,
}

/// Project a world-space Gaussian. `None` when it lies outside
/// `(near, far]` or its 3σ footprint misses every pixel center.
pub fn project_gaussian(
    position: &Vec3,
    cov3: &Mat3,
    camera: &Camera,
    index: usize,
) -> Option<ProjectedGaussian> {
    let t = camera.to_camera(position);
    if !(t.z > camera.near) || t.z > camera.far {
        return None;
    }
    let (fx, fy) = (camera.fx, camera.fy);
    let iz = 1.0 / t.z;
    let mean = [fx * t.x * iz + camera.cx, fy * t.y * iz + camera.cy];

    let w = camera.rotation();
    let cam_cov = w * cov3 * w.transpose();
    // rows of the projection Jacobian at t
    let j0 = Vec3::new(fx * iz, 0.0, -fx * t.x * iz * iz);
    let j1 = Vec3::new(0.0, fy * iz, -fy * t.y * iz * iz);
    let a = j0.dot(&(cam_cov * j0)) + DILATION;
    let b = j0.dot(&(cam_cov * j1));
    let c = j1.dot(&(cam_cov * j1)) + DILATION;

    let det = a * c - b * b;
    if !(det > 0.0) {
        return None;
    }
    let conic = [c / det, -b / det, a / det];
    let half = 0.5 * (a - c);
    let lambda_max = 0.5 * (a + c) + (half * half + b * b).sqrt();
    let radius = 3.0 * lambda_max.sqrt();

    let (w_px, h_px) = (camera.width as f64, camera.height as f64);
    if mean[0] + radius < 0.0
        || mean[1] + radius < 0.0
        || mean[0] - radius > w_px - 1.0
        || mean[1] - radius > h_px - 1.0
    {
        return None;
    }
    Some(ProjectedGaussian {
        mean,
        cov: [a, b, c],
        conic,
        depth: t.z,
        radius,
        index,
    })
}

/// Project point `i` of `splats`.
pub fn project(splats: &Splats, i: usize, camera: &Camera) -> Option<ProjectedGaussian> {
    let cov = covariance3d(quat_f64(splats.rotations[i]), splats.scale(i));
    project_gaussian(&vec3(splats.positions[i]), &cov, camera, i)
}

/// Squared Mahalanobis distance of `pixel` from the footprint.
#[inline]
pub fn mahalanobis(pixel: [f64; 2], g: &ProjectedGaussian) -> f64 {
    let dx = pixel[0] - g.mean[0];
    let dy = pixel[1] - g.mean[1];
    g.conic[0] * dx * dx + 2.0 * g.conic[1] * dx * dy + g.conic[2] * dy * dy
}

/// `exp(−½ dᵀ Σ⁻¹ d)`
pub fn gaussian_weight(pixel: [f64; 2], g: &ProjectedGaussian) -> f64 {
    (-0.5 * mahalanobis(pixel, g)).exp()
}

/// Shortest local axis of the Gaussian, flipped to face `to_camera`.
/// Ties go to the lowest axis index.
pub fn point_normal(rotation: [f64; 4], scale: [f64; 3], to_camera: &Vec3) -> Vec3 {
    let mut axis = 0;
    for k in 1..3 {
        if scale[k] < scale[axis] {
            axis = k;
        }
    }
    let n: Vec3 = quat_to_mat(rotation).column(axis).into();
    if n.dot(to_camera) < 0.0 {
        -n
    } else {
        n
    }
}

/// Which G-buffer channels to blend. Alpha is always produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelSet {
    pub albedo: bool,
    pub roughness: bool,
    pub f0: bool,
    pub normal: bool,
    pub depth: bool,
}

impl ChannelSet {
    pub const ALL: ChannelSet = ChannelSet {
        albedo: true,
        roughness: true,
        f0: true,
        normal: true,
        depth: true,
    };
}

impl Default for ChannelSet {
    fn default() -> Self {
        Self::ALL
    }
}

/// One point's share of a pixel: `σ_i · Π_{j<i}(1 − σ_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contribution {
    pub index: u32,
    pub weight: f64,
}

/// Per-pixel contribution lists, row-major.
pub type Contributions = Vec<Vec<Contribution>>;

/// Everything blending needs for one visible Gaussian.
#[derive(Debug, Clone, Copy)]
struct Prepared {
    proj: ProjectedGaussian,
    opacity: f64,
    albedo: [f64; 3],
    roughness: f64,
    f0: f64,
    normal: [f64; 3],
}

fn prepare(splats: &Splats, camera: &Camera) -> Vec<Prepared> {
    let eye = camera.center();
    (0..splats.len())
        .into_par_iter()
        .filter_map(|i| {
            let q = quat_f64(splats.rotations[i]);
            let scale = splats.scale(i);
            let pos = vec3(splats.positions[i]);
            let proj = project_gaussian(&pos, &covariance3d(q, scale), camera, i)?;
            Some(Prepared {
                proj,
                opacity: splats.opacities[i] as f64,
                albedo: splats.albedo[i].map(|v| v as f64),
                roughness: splats.roughness[i] as f64,
                f0: splats.f0[i] as f64,
                normal: point_normal(q, scale, &(eye - pos)).into(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
struct Accum {
    albedo: [f64; 3],
    roughness: f64,
    f0: f64,
    normal: [f64; 3],
    depth: f64,
    alpha: f64,
}

/// Front-to-back blend of `list` (already in depth order) at one pixel.
fn blend_pixel<'a>(
    pixel: [f64; 2],
    list: impl Iterator<Item = &'a Prepared>,
    channels: ChannelSet,
    mut record: Option<&mut Vec<Contribution>>,
) -> Accum {
    let mut acc = Accum::default();
    let mut transmittance = 1.0;
    for g in list {
        let power = mahalanobis(pixel, &g.proj);
        if power > CUTOFF {
            continue;
        }
        let sigma = ((-0.5 * power).exp() * g.opacity).min(MAX_ALPHA);
        let next = transmittance * (1.0 - sigma);
        if next < MIN_TRANSMITTANCE {
            break;
        }
        let w = sigma * transmittance;
        if channels.albedo {
            for c in 0..3 {
                acc.albedo[c] += w * g.albedo[c];
            }
        }
        if channels.roughness {
            acc.roughness += w * g.roughness;
        }
        if channels.f0 {
            acc.f0 += w * g.f0;
        }
        if channels.normal {
            for c in 0..3 {
                acc.normal[c] += w * g.normal[c];
            }
        }
        if channels.depth {
            acc.depth += w * g.proj.depth;
        }
        if let Some(r) = record.as_deref_mut() {
            r.push(Contribution {
                index: g.proj.index as u32,
                weight: w,
            });
        }
        transmittance = next;
    }
    acc.alpha = 1.0 - transmittance;
    if channels.normal && acc.alpha > 0.5 {
        let n = Vec3::from(acc.normal);
        let len = n.norm();
        if len > 0.0 {
            acc.normal = (n / len).into();
        }
    }
    acc
}

/// Splat `splats` (already posed) into a G-buffer.
pub fn rasterize(splats: &Splats, camera: &Camera, channels: ChannelSet) -> Result<GBuffer> {
    Ok(run(splats, camera, channels, false)?.0)
}

/// Like [`rasterize`], also returning every pixel's contribution list.
pub fn rasterize_with_contributions(
    splats: &Splats,
    camera: &Camera,
    channels: ChannelSet,
) -> Result<(GBuffer, Contributions)> {
    let (gbuf, contrib) = run(splats, camera, channels, true)?;
    Ok((gbuf, contrib.unwrap_or_default()))
}

fn run(
    splats: &Splats,
    camera: &Camera,
    channels: ChannelSet,
    record: bool,
) -> Result<(GBuffer, Option<Contributions>)> {
    camera.check()?;
    splats.check_lengths()?;
    let (width, height) = (camera.width, camera.height);
    let tiles_x = width.div_ceil(TILE_SIZE);
    let tiles_y = height.div_ceil(TILE_SIZE);
    let prepared = prepare(splats, camera);

    // (tile, depth, point) keys; depth is positive so its bits sort like the value
    let mut keys: Vec<(u32, u64, u32)> = prepared
        .par_iter()
        .enumerate()
        .flat_map_iter(|(slot, g)| {
            let p = &g.proj;
            let x0 = ((p.mean[0] - p.radius).max(0.0) / TILE_SIZE as f64) as usize;
            let y0 = ((p.mean[1] - p.radius).max(0.0) / TILE_SIZE as f64) as usize;
            let x1 = ((p.mean[0] + p.radius).min(width as f64 - 1.0) / TILE_SIZE as f64) as usize;
            let y1 = ((p.mean[1] + p.radius).min(height as f64 - 1.0) / TILE_SIZE as f64) as usize;
            let depth = p.depth.to_bits();
            (y0..=y1).flat_map(move |ty| {
                (x0..=x1).map(move |tx| ((ty * tiles_x + tx) as u32, depth, slot as u32))
            })
        })
        .collect();
    // slots are in point order, so the third key breaks depth ties by index
    keys.par_sort_unstable();

    let mut ranges = vec![(0usize, 0usize); tiles_x * tiles_y];
    let mut start = 0;
    while start < keys.len() {
        let tile = keys[start].0;
        let end = start + keys[start..].partition_point(|k| k.0 == tile);
        ranges[tile as usize] = (start, end);
        start = end;
    }

    let tiles: Vec<(Vec<Accum>, Option<Contributions>)> = (0..tiles_x * tiles_y)
        .into_par_iter()
        .map(|tile| {
            let (tx, ty) = (tile % tiles_x, tile / tiles_x);
            let list = &keys[ranges[tile].0..ranges[tile].1];
            let xs = tx * TILE_SIZE..((tx + 1) * TILE_SIZE).min(width);
            let ys = ty * TILE_SIZE..((ty + 1) * TILE_SIZE).min(height);
            let n = xs.len() * ys.len();
            let mut accs = Vec::with_capacity(n);
            let mut contribs = record.then(|| Vec::with_capacity(n));
            for y in ys {
                for x in xs.clone() {
                    let gs = list.iter().map(|k| &prepared[k.2 as usize]);
                    let px = [x as f64, y as f64];
                    match contribs.as_mut() {
                        Some(c) => {
                            let mut r = Vec::new();
                            accs.push(blend_pixel(px, gs, channels, Some(&mut r)));
                            c.push(r);
                        }
                        None => accs.push(blend_pixel(px, gs, channels, None)),
                    }
                }
            }
            (accs, contribs)
        })
        .collect();

    let mut gbuf = GBuffer::new(width, height);
    let mut all = record.then(|| vec![Vec::new(); width * height]);
    for (tile, (accs, contribs)) in tiles.into_iter().enumerate() {
        let (tx, ty) = (tile % tiles_x, tile / tiles_x);
        let x0 = tx * TILE_SIZE;
        let tw = (x0 + TILE_SIZE).min(width) - x0;
        let mut contribs = contribs.map(|c| c.into_iter());
        for (k, a) in accs.into_iter().enumerate() {
            let i = (ty * TILE_SIZE + k / tw) * width + x0 + k % tw;
            gbuf.albedo[i] = a.albedo;
            gbuf.roughness[i] = a.roughness;
            gbuf.f0[i] = a.f0;
            gbuf.normal[i] = a.normal;
            gbuf.depth[i] = a.depth;
            gbuf.alpha[i] = a.alpha;
            if let (Some(all), Some(c)) = (all.as_mut(), contribs.as_mut()) {
                all[i] = c.next().unwrap_or_default();
            }
        }
    }
    Ok((gbuf, all))
}

/// Camera-space normals from a camera-z depth map.
///
/// Each pixel is back-projected; the normal is the cross product of central
/// differences, facing the camera. Pixels with `alpha < 0.5`, or whose four
/// neighbours are not all covered, get a zero normal.
pub fn normals_from_depth(depth: &Image, alpha: &Image, camera: &Camera) -> Result<Image> {
    depth.ensure_same_shape(alpha)?;
    if (depth.width, depth.height) != (camera.width, camera.height) {
        return Err(Error::ResolutionMismatch {
            expected: (camera.width, camera.height),
            got: (depth.width, depth.height),
        });
    }
    let (w, h) = (depth.width, depth.height);
    let covered = |x: usize, y: usize| alpha.get(x, y, 0) >= 0.5;
    let point = |x: usize, y: usize| {
        let z = depth.get(x, y, 0);
        Vec3::new(
            (x as f64 - camera.cx) / camera.fx * z,
            (y as f64 - camera.cy) / camera.fy * z,
            z,
        )
    };
    let mut out = Image::new(w, h, 3);
    out.data
        .par_chunks_mut(3 * w)
        .enumerate()
        .for_each(|(y, row)| {
            if y == 0 || y + 1 >= h {
                return;
            }
            for x in 1..w.saturating_sub(1) {
                let ok = covered(x, y)
                    && covered(x - 1, y)
                    && covered(x + 1, y)
                    && covered(x, y - 1)
                    && covered(x, y + 1);
                if !ok {
                    continue;
                }
                let dx = point(x + 1, y) - point(x - 1, y);
                let dy = point(x, y + 1) - point(x, y - 1);
                let n = dx.cross(&dy);
                let len = n.norm();
                if !(len > 0.0) {
                    continue;
                }
                let mut n = n / len;
                if n.dot(&point(x, y)) > 0.0 {
                    n = -n;
                }
                row[3 * x..3 * x + 3].copy_from_slice(n.as_slice());
            }
        });
    Ok(out)
}

/// [`normals_from_depth`] on a rendered G-buffer.
pub fn gbuffer_depth_normals(gbuf: &GBuffer, camera: &Camera) -> Result<Image> {
    let depth = Image {
        width: gbuf.width,
        height: gbuf.height,
        channels: 1,
        data: (0..gbuf.num_pixels())
            .map(|i| gbuf.linear_depth(i))
            .collect(),
    };
    normals_from_depth(&depth, &gbuf.alpha_image(), camera)
}
