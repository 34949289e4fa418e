//! Desk-scale fitting of per-point materials against target images.
//!
//! Geometry is held fixed, so each frame is rasterized once and its
//! per-pixel contribution lists are reused: the material maps of every
//! iteration are rebuilt as `Σ w_i · m_i`, shaded with analytic gradients, and
//! the image-space gradient is scattered back through the same weights.

use rayon::prelude::*;

use crate::deform::pose_splats;
use crate::losses::{
    l_albedo_with_grad, l_jaw, l_normal, l_rgb_with_grad, tv_with_grad, LossReport, LossWeights,
};
use crate::model::{Camera, EnvironmentLight, GBuffer, GaussianCloud, Image, PoseState, Rig};
use crate::rasterize::{
    gbuffer_depth_normals, rasterize_with_contributions, ChannelSet, Contributions,
};
use crate::shade::{shading_gradients, view_direction, ShadeParams};
use crate::{Error, Result};

pub const MAX_FIT_POINTS: usize = 5000;
pub const MAX_FIT_FRAMES: usize = 10;

/// One training view.
#[derive(Debug, Clone)]
pub struct FitFrame {
    pub pose: PoseState,
    pub camera: Camera,
    /// Linear RGB composited over black.
    pub target: Image,
    /// Premultiplied albedo map; the albedo term is skipped without it.
    pub albedo_target: Option<Image>,
    /// Tracked jaw pose; defaults to the frame's own jaw.
    pub jaw_tracked: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub weights: LossWeights,
    pub iters: usize,
    pub step: f64,
    /// Largest change of any attribute in one iteration.
    pub max_update: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            weights: LossWeights::default(),
            iters: 500,
            step: 0.01,
            max_update: 0.05,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    /// Materials of the lowest-loss iterate.
    pub cloud: GaussianCloud,
    /// Frame-averaged losses: entry `k` is the loss after `k` steps.
    pub trace: Vec<LossReport>,
    pub best_iteration: usize,
    /// Summed blending weight of each point over all frames; 0 for points
    /// no frame sees, whose materials are never updated.
    pub footprint: Vec<f64>,
}

struct Prepared {
    camera: Camera,
    target: Image,
    albedo_target: Option<Image>,
    contributions: Contributions,
    /// Coverage, normals and depth from the initial raster; materials are refilled.
    gbuffer: GBuffer,
    mask: Vec<bool>,
    normal_term: f64,
    jaw_term: f64,
}

#[derive(Debug, Clone)]
struct Materials {
    albedo: Vec<[f64; 3]>,
    roughness: Vec<f64>,
    f0: Vec<f64>,
}

impl Materials {
    fn zeros(n: usize) -> Self {
        Self {
            albedo: vec![[0.0; 3]; n],
            roughness: vec![0.0; n],
            f0: vec![0.0; n],
        }
    }

    fn add(&mut self, other: &Materials) {
        for i in 0..self.roughness.len() {
            for c in 0..3 {
                self.albedo[i][c] += other.albedo[i][c];
            }
            self.roughness[i] += other.roughness[i];
            self.f0[i] += other.f0[i];
        }
    }
}

fn check_limits(cloud: &GaussianCloud, frames: &[FitFrame]) -> Result<()> {
    if cloud.len() > MAX_FIT_POINTS {
        return Err(Error::ScaleLimit {
            what: "points",
            got: cloud.len(),
            limit: MAX_FIT_POINTS,
        });
    }
    if frames.len() > MAX_FIT_FRAMES {
        return Err(Error::ScaleLimit {
            what: "frames",
            got: frames.len(),
            limit: MAX_FIT_FRAMES,
        });
    }
    if frames.is_empty() {
        return Err(Error::invalid("fit", "no frames"));
    }
    Ok(())
}

fn prepare(cloud: &GaussianCloud, rig: &Rig, frame: &FitFrame) -> Result<Prepared> {
    let cam = &frame.camera;
    let expected = (cam.width, cam.height, 3);
    if frame.target.shape() != expected {
        return Err(Error::ShapeMismatch {
            a: expected,
            b: frame.target.shape(),
        });
    }
    if let Some(a) = &frame.albedo_target {
        frame.target.ensure_same_shape(a)?;
    }
    let splats = pose_splats(cloud, rig, &frame.pose)?;
    let (gbuffer, contributions) = rasterize_with_contributions(&splats, cam, ChannelSet::ALL)?;
    let mask = gbuffer.foreground_mask();
    let from_depth = gbuffer_depth_normals(&gbuffer, cam)?;
    let rendered = gbuffer.normal_image_camera(&cam.rotation());
    let normal_term = l_normal(&rendered, &from_depth, &mask)?.value;
    let jaw_term = l_jaw(
        frame.pose.jaw(),
        frame.jaw_tracked.unwrap_or(frame.pose.jaw()),
    );
    Ok(Prepared {
        camera: cam.clone(),
        target: frame.target.clone(),
        albedo_target: frame.albedo_target.clone(),
        contributions,
        gbuffer,
        mask,
        normal_term,
        jaw_term,
    })
}

/// Loss of one frame and its gradient with respect to every point's
/// materials.
fn frame_loss(
    frame: &Prepared,
    mats: &Materials,
    env: &EnvironmentLight,
    params: &ShadeParams,
    weights: &LossWeights,
) -> Result<(LossReport, Materials)> {
    let cam = &frame.camera;
    let w = cam.width;
    let mut gbuf = frame.gbuffer.clone();
    for (p, list) in frame.contributions.iter().enumerate() {
        let (mut a, mut o, mut f) = ([0.0; 3], 0.0, 0.0);
        for c in list {
            let i = c.index as usize;
            for k in 0..3 {
                a[k] += c.weight * mats.albedo[i][k];
            }
            o += c.weight * mats.roughness[i];
            f += c.weight * mats.f0[i];
        }
        gbuf.albedo[p] = a;
        gbuf.roughness[p] = o;
        gbuf.f0[p] = f;
    }

    let n = gbuf.num_pixels();
    let shaded: Vec<_> = (0..n)
        .into_par_iter()
        .map(|p| {
            gbuf.surface(p)
                .map(|s| shading_gradients(&s, &view_direction(cam, p % w, p / w), env, params))
        })
        .collect();
    let mut pred = Image::new(w, cam.height, 3);
    for (p, g) in shaded.iter().enumerate() {
        if let Some(g) = g {
            pred.pixel_mut(p).copy_from_slice(&g.output);
        }
    }

    let (rgb, d_pred) = l_rgb_with_grad(&pred, &frame.target, weights.lambda1)?;
    let (albedo, d_albedo_map) = match &frame.albedo_target {
        Some(t) => {
            let (l, g) = l_albedo_with_grad(&gbuf.albedo_image(), t, &frame.mask)?;
            (l.value, Some(g))
        }
        None => (0.0, None),
    };
    let (tv, d_rough_map) = tv_with_grad(&gbuf.roughness_image(), &frame.mask)?;
    let report =
        LossReport::from_terms(rgb, frame.jaw_term, frame.normal_term, albedo, tv, weights);

    let mut grad = Materials::zeros(mats.roughness.len());
    for (p, list) in frame.contributions.iter().enumerate() {
        // adjoints on the premultiplied maps of this pixel
        let mut ga = [0.0; 3];
        let mut go = weights.tv * d_rough_map.data[p];
        let mut gf = 0.0;
        if let Some(g) = &shaded[p] {
            let inv_alpha = 1.0 / gbuf.alpha[p];
            let dl = d_pred.pixel(p);
            for c in 0..3 {
                ga[c] += dl[c] * g.d_albedo[c] * inv_alpha;
                go += dl[c] * g.d_roughness[c] * inv_alpha;
                gf += dl[c] * g.d_f0[c] * inv_alpha;
            }
        }
        if let Some(d) = &d_albedo_map {
            for c in 0..3 {
                ga[c] += weights.albedo * d.data[3 * p + c];
            }
        }
        for c in list {
            let i = c.index as usize;
            for k in 0..3 {
                grad.albedo[i][k] += c.weight * ga[k];
            }
            grad.roughness[i] += c.weight * go;
            grad.f0[i] += c.weight * gf;
        }
    }
    Ok((report, grad))
}

fn average(reports: &[LossReport], weights: &LossWeights) -> LossReport {
    let k = reports.len() as f64;
    let mean = |f: fn(&LossReport) -> f64| reports.iter().map(f).sum::<f64>() / k;
    LossReport::from_terms(
        mean(|r| r.rgb),
        mean(|r| r.jaw),
        mean(|r| r.normal),
        mean(|r| r.albedo),
        mean(|r| r.tv),
        weights,
    )
}

fn evaluate(
    frames: &[Prepared],
    mats: &Materials,
    env: &EnvironmentLight,
    params: &ShadeParams,
    weights: &LossWeights,
) -> Result<(LossReport, Materials)> {
    let per_frame: Vec<(LossReport, Materials)> = frames
        .par_iter()
        .map(|f| frame_loss(f, mats, env, params, weights))
        .collect::<Result<_>>()?;
    let mut grad = Materials::zeros(mats.roughness.len());
    for (_, g) in &per_frame {
        grad.add(g);
    }
    let k = frames.len() as f64;
    for i in 0..grad.roughness.len() {
        grad.albedo[i] = grad.albedo[i].map(|v| v / k);
        grad.roughness[i] /= k;
        grad.f0[i] /= k;
    }
    let reports: Vec<LossReport> = per_frame.iter().map(|(r, _)| *r).collect();
    Ok((average(&reports, weights), grad))
}

/// Fit per-point albedo, roughness and base reflectance by preconditioned
/// gradient descent.
///
/// Each point's gradient is divided by its share of all rendered pixels, so
/// the step size reads as "attribute units per iteration" independent of
/// splat size and resolution. Every update is capped at
/// [`FitConfig::max_update`] and re-clamped into the material ranges.
pub fn fit_materials(
    cloud: &GaussianCloud,
    rig: &Rig,
    frames: &[FitFrame],
    env: &EnvironmentLight,
    params: &ShadeParams,
    config: &FitConfig,
) -> Result<FitResult> {
    check_limits(cloud, frames)?;
    config.weights.check()?;
    params.check()?;
    env.check()?;
    if !(config.step.is_finite() && config.step >= 0.0 && config.max_update > 0.0) {
        return Err(Error::invalid(
            "fit config",
            "step must be ≥ 0 and max_update > 0",
        ));
    }
    let prepared: Vec<Prepared> = frames
        .iter()
        .map(|f| prepare(cloud, rig, f))
        .collect::<Result<_>>()?;

    let n = cloud.len();
    let mut footprint = vec![0.0; n];
    let mut elements = 0.0;
    for f in &prepared {
        elements += f.gbuffer.num_pixels() as f64;
        for list in &f.contributions {
            for c in list {
                footprint[c.index as usize] += c.weight;
            }
        }
    }
    // footprint as a fraction of the frame-averaged pixel count
    let precond: Vec<f64> = footprint
        .iter()
        .map(|&s| if s > 0.0 { 3.0 * elements / s } else { 0.0 })
        .collect();

    let s = &cloud.splats;
    let mut mats = Materials {
        albedo: s.albedo.iter().map(|a| a.map(|v| v as f64)).collect(),
        roughness: s.roughness.iter().map(|&v| v as f64).collect(),
        f0: s.f0.iter().map(|&v| v as f64).collect(),
    };
    let ranges = params.ranges;
    let (mut report, mut grad) = evaluate(&prepared, &mats, env, params, &config.weights)?;
    let mut trace = vec![report];
    let mut best = (report.total, 0, mats.clone());
    let cap = config.max_update;
    let update = |x: f64, g: f64, p: f64| x - (config.step * g * p).clamp(-cap, cap);

    for it in 1..=config.iters {
        for i in 0..n {
            let p = precond[i];
            for c in 0..3 {
                mats.albedo[i][c] = update(mats.albedo[i][c], grad.albedo[i][c], p).clamp(0.0, 1.0);
            }
            mats.roughness[i] =
                ranges.clamp_roughness(update(mats.roughness[i], grad.roughness[i], p));
            mats.f0[i] = ranges.clamp_f0(update(mats.f0[i], grad.f0[i], p));
        }
        (report, grad) = evaluate(&prepared, &mats, env, params, &config.weights)?;
        trace.push(report);
        if report.total < best.0 {
            best = (report.total, it, mats.clone());
        }
    }

    let mut out = cloud.clone();
    if best.1 > 0 {
        let m = best.2;
        for i in 0..n {
            out.splats.albedo[i] = m.albedo[i].map(|v| v as f32);
            out.splats.roughness[i] = m.roughness[i] as f32;
            out.splats.f0[i] = m.f0[i] as f32;
        }
    }
    Ok(FitResult {
        cloud: out,
        trace,
        best_iteration: best.1,
        footprint,
    })
}
