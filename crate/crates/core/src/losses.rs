//! Image metrics and training losses.

use serde::{Deserialize, Serialize};

use crate::model::Image;
use crate::{Error, Result};

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_C1: f64 = 0.01 * 0.01;
pub const SSIM_C2: f64 = 0.03 * 0.03;

/// Mean absolute difference over every element.
pub fn mae(a: &Image, b: &Image) -> Result<f64> {
    a.ensure_same_shape(b)?;
    let sum: f64 = a.data.iter().zip(&b.data).map(|(x, y)| (x - y).abs()).sum();
    Ok(sum / a.data.len().max(1) as f64)
}

/// MAE × 100.
pub fn mae_star(a: &Image, b: &Image) -> Result<f64> {
    Ok(mae(a, b)? * 100.0)
}

pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    a.ensure_same_shape(b)?;
    let sum: f64 = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.data.len().max(1) as f64)
}

/// `10·log10(1/MSE)` in dB; identical images give `+∞`.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    let m = mse(a, b)?;
    Ok(if m == 0.0 {
        f64::INFINITY
    } else {
        -10.0 * m.log10()
    })
}

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let half = (SSIM_WINDOW / 2) as f64;
    let mut k = [0.0; SSIM_WINDOW];
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - half;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let sum: f64 = k.iter().sum();
    k.map(|v| v / sum)
}

/// Separable "same" filtering of a single-channel plane with zero padding.
fn blur(plane: &[f64], w: usize, h: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let r = (SSIM_WINDOW / 2) as isize;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (t, kv) in k.iter().enumerate() {
                let sx = x as isize + t as isize - r;
                if sx >= 0 && (sx as usize) < w {
                    acc += kv * plane[y * w + sx as usize];
                }
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (t, kv) in k.iter().enumerate() {
                let sy = y as isize + t as isize - r;
                if sy >= 0 && (sy as usize) < h {
                    acc += kv * tmp[sy as usize * w + x];
                }
            }
            out[y * w + x] = acc;
        }
    }
    out
}

fn plane(img: &Image, c: usize) -> Vec<f64> {
    img.data
        .iter()
        .skip(c)
        .step_by(img.channels)
        .copied()
        .collect()
}

/// SSIM averaged over pixels and channels, with its gradient with respect
/// to `a` when requested.
fn ssim_impl(a: &Image, b: &Image, want_grad: bool) -> Result<(f64, Option<Image>)> {
    a.ensure_same_shape(b)?;
    let (w, h, ch) = a.shape();
    let k = gaussian_kernel();
    let n = (w * h * ch).max(1) as f64;
    let mut total = 0.0;
    let mut grad = want_grad.then(|| Image::new(w, h, ch));
    for c in 0..ch {
        let x = plane(a, c);
        let y = plane(b, c);
        let sq =
            |p: &[f64], q: &[f64]| -> Vec<f64> { p.iter().zip(q).map(|(u, v)| u * v).collect() };
        let mu_x = blur(&x, w, h, &k);
        let mu_y = blur(&y, w, h, &k);
        let m_xx = blur(&sq(&x, &x), w, h, &k);
        let m_yy = blur(&sq(&y, &y), w, h, &k);
        let m_xy = blur(&sq(&x, &y), w, h, &k);
        let mut d_mu = vec![0.0; w * h];
        let mut d_xx = vec![0.0; w * h];
        let mut d_xy = vec![0.0; w * h];
        for p in 0..w * h {
            let (mx, my) = (mu_x[p], mu_y[p]);
            let a1 = 2.0 * mx * my + SSIM_C1;
            let a2 = 2.0 * (m_xy[p] - mx * my) + SSIM_C2;
            let b1 = mx * mx + my * my + SSIM_C1;
            let b2 = (m_xx[p] - mx * mx) + (m_yy[p] - my * my) + SSIM_C2;
            let f = a1 * a2 / (b1 * b2);
            total += f;
            if want_grad {
                d_mu[p] = f * (2.0 * my / a1 - 2.0 * my / a2 - 2.0 * mx / b1 + 2.0 * mx / b2);
                d_xx[p] = -f / b2;
                d_xy[p] = 2.0 * f / a2;
            }
        }
        if let Some(g) = grad.as_mut() {
            // the window is symmetric, so the adjoint of the blur is the blur
            let g_mu = blur(&d_mu, w, h, &k);
            let g_xx = blur(&d_xx, w, h, &k);
            let g_xy = blur(&d_xy, w, h, &k);
            for p in 0..w * h {
                g.data[p * ch + c] = (g_mu[p] + 2.0 * x[p] * g_xx[p] + y[p] * g_xy[p]) / n;
            }
        }
    }
    Ok((total / n, grad))
}

/// Structural similarity: 11×11 Gaussian window (σ = 1.5), zero padding,
/// averaged over pixels and channels.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    Ok(ssim_impl(a, b, false)?.0)
}

/// `(1 − SSIM)/2`
pub fn d_ssim(a: &Image, b: &Image) -> Result<f64> {
    Ok((1.0 - ssim(a, b)?) / 2.0)
}

/// `λ1·MAE + (1 − λ1)·D-SSIM`
pub fn l_rgb(pred: &Image, gt: &Image, lambda1: f64) -> Result<f64> {
    let l1 = mae(pred, gt)?;
    if lambda1 == 1.0 {
        return Ok(l1);
    }
    Ok(lambda1 * l1 + (1.0 - lambda1) * d_ssim(pred, gt)?)
}

/// [`l_rgb`] and its gradient with respect to `pred`.
pub fn l_rgb_with_grad(pred: &Image, gt: &Image, lambda1: f64) -> Result<(f64, Image)> {
    let l1 = mae(pred, gt)?;
    let (s, s_grad) = ssim_impl(pred, gt, true)?;
    let s_grad = s_grad.expect("gradient requested");
    let n = pred.data.len().max(1) as f64;
    let mut grad = Image::new(pred.width, pred.height, pred.channels);
    for i in 0..pred.data.len() {
        let sign =
            (pred.data[i] - gt.data[i]).signum() * ((pred.data[i] != gt.data[i]) as u8 as f64);
        grad.data[i] = lambda1 * sign / n - (1.0 - lambda1) * 0.5 * s_grad.data[i];
    }
    Ok((lambda1 * l1 + (1.0 - lambda1) * (1.0 - s) / 2.0, grad))
}

/// Euclidean distance between two axis-angle jaw poses.
pub fn l_jaw(pred: [f64; 3], tracked: [f64; 3]) -> f64 {
    let d: f64 = (0..3).map(|k| (pred[k] - tracked[k]).powi(2)).sum();
    d.sqrt()
}

/// A masked mean; `empty_mask` is set when no pixel was selected and the
/// value defaulted to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskedLoss {
    pub value: f64,
    pub empty_mask: bool,
}

fn check_mask(img: &Image, mask: &[bool]) -> Result<()> {
    if mask.len() != img.num_pixels() {
        return Err(Error::DimensionMismatch {
            what: "mask",
            expected: img.num_pixels(),
            got: mask.len(),
        });
    }
    Ok(())
}

/// Mean of `|1 − N·N̂|` over masked pixels of two 3-channel normal maps.
pub fn l_normal(rendered: &Image, from_depth: &Image, mask: &[bool]) -> Result<MaskedLoss> {
    rendered.ensure_same_shape(from_depth)?;
    check_mask(rendered, mask)?;
    if rendered.channels != 3 {
        return Err(Error::invalid("normal map", "needs 3 channels"));
    }
    let (mut sum, mut count) = (0.0, 0usize);
    for (p, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        let a = rendered.pixel(p);
        let b = from_depth.pixel(p);
        let dot: f64 = (0..3).map(|k| a[k] * b[k]).sum();
        sum += (1.0 - dot).abs();
        count += 1;
    }
    Ok(masked(sum, count))
}

fn masked(sum: f64, count: usize) -> MaskedLoss {
    if count == 0 {
        log::warn!("loss mask selects no pixels; reporting 0");
        MaskedLoss {
            value: 0.0,
            empty_mask: true,
        }
    } else {
        MaskedLoss {
            value: sum / count as f64,
            empty_mask: false,
        }
    }
}

/// Mean absolute difference over the channels of masked pixels.
pub fn l_albedo(rendered: &Image, target: &Image, mask: &[bool]) -> Result<MaskedLoss> {
    Ok(l_albedo_with_grad(rendered, target, mask)?.0)
}

/// [`l_albedo`] and its gradient with respect to `rendered`.
pub fn l_albedo_with_grad(
    rendered: &Image,
    target: &Image,
    mask: &[bool],
) -> Result<(MaskedLoss, Image)> {
    rendered.ensure_same_shape(target)?;
    check_mask(rendered, mask)?;
    let ch = rendered.channels;
    let count = mask.iter().filter(|&&m| m).count() * ch;
    let mut grad = Image::new(rendered.width, rendered.height, ch);
    let mut sum = 0.0;
    for (p, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        for c in 0..ch {
            let d = rendered.data[p * ch + c] - target.data[p * ch + c];
            sum += d.abs();
            if d != 0.0 {
                grad.data[p * ch + c] = d.signum() / count as f64;
            }
        }
    }
    Ok((masked(sum, count), grad))
}

/// Masked total variation of a single-channel map: per masked pixel
/// `|I(x+1,y) − I(x,y)| + |I(x,y+1) − I(x,y)|`, each difference counted when
/// the neighbour exists and is masked, averaged over masked pixels.
pub fn tv(map: &Image, mask: &[bool]) -> Result<f64> {
    Ok(tv_with_grad(map, mask)?.0)
}

pub fn tv_with_grad(map: &Image, mask: &[bool]) -> Result<(f64, Image)> {
    check_mask(map, mask)?;
    if map.channels != 1 {
        return Err(Error::invalid("tv map", "needs 1 channel"));
    }
    let (w, h) = (map.width, map.height);
    let count = mask.iter().filter(|&&m| m).count();
    let mut grad = Image::new(w, h, 1);
    if count == 0 {
        return Ok((0.0, grad));
    }
    let inv = 1.0 / count as f64;
    let mut sum = 0.0;
    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            if !mask[p] {
                continue;
            }
            for q in [(x + 1 < w).then(|| p + 1), (y + 1 < h).then(|| p + w)]
                .into_iter()
                .flatten()
            {
                if !mask[q] {
                    continue;
                }
                let d = map.data[q] - map.data[p];
                sum += d.abs();
                if d != 0.0 {
                    grad.data[q] += d.signum() * inv;
                    grad.data[p] -= d.signum() * inv;
                }
            }
        }
    }
    Ok((sum * inv, grad))
}

/// Loss weights; `lambda1` splits the RGB term between MAE and D-SSIM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub jaw: f64,
    pub lambda1: f64,
    pub normal: f64,
    pub albedo: f64,
    pub tv: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            jaw: 0.1,
            lambda1: 0.8,
            normal: 1e-5,
            albedo: 0.25,
            tv: 0.02,
        }
    }
}

impl LossWeights {
    pub fn check(&self) -> Result<()> {
        let all = [self.jaw, self.lambda1, self.normal, self.albedo, self.tv];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) || self.lambda1 > 1.0 {
            return Err(Error::invalid(
                "loss weights",
                "weights must be finite and nonnegative, lambda1 in [0, 1]",
            ));
        }
        Ok(())
    }
}

/// Each term plus the weighted total.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossReport {
    pub rgb: f64,
    pub jaw: f64,
    pub normal: f64,
    pub albedo: f64,
    pub tv: f64,
    pub total: f64,
}

impl LossReport {
    pub fn from_terms(
        rgb: f64,
        jaw: f64,
        normal: f64,
        albedo: f64,
        tv: f64,
        w: &LossWeights,
    ) -> Self {
        Self {
            rgb,
            jaw,
            normal,
            albedo,
            tv,
            total: rgb + w.jaw * jaw + w.normal * normal + w.albedo * albedo + w.tv * tv,
        }
    }
}

/// Inputs of one frame's loss. Optional maps contribute 0 when absent.
#[derive(Debug, Clone, Copy)]
pub struct LossInputs<'a> {
    pub pred: &'a Image,
    pub gt: &'a Image,
    pub jaw_pred: [f64; 3],
    pub jaw_tracked: [f64; 3],
    pub normal_rendered: Option<&'a Image>,
    pub normal_from_depth: Option<&'a Image>,
    pub albedo_rendered: Option<&'a Image>,
    pub albedo_target: Option<&'a Image>,
    pub roughness: Option<&'a Image>,
    /// Foreground mask for the normal, albedo and TV terms; all pixels when absent.
    pub mask: Option<&'a [bool]>,
}

impl<'a> LossInputs<'a> {
    pub fn rgb_only(pred: &'a Image, gt: &'a Image) -> Self {
        Self {
            pred,
            gt,
            jaw_pred: [0.0; 3],
            jaw_tracked: [0.0; 3],
            normal_rendered: None,
            normal_from_depth: None,
            albedo_rendered: None,
            albedo_target: None,
            roughness: None,
            mask: None,
        }
    }
}

/// `L_rgb + λ_jaw·L_jaw + λ_normal·L_normal + λ_albedo·L_albedo + λ_tv·TV(O)`
pub fn total_loss(inputs: &LossInputs, weights: &LossWeights) -> Result<LossReport> {
    weights.check()?;
    let full;
    let mask = match inputs.mask {
        Some(m) => m,
        None => {
            full = vec![true; inputs.pred.num_pixels()];
            &full
        }
    };
    let rgb = l_rgb(inputs.pred, inputs.gt, weights.lambda1)?;
    let jaw = l_jaw(inputs.jaw_pred, inputs.jaw_tracked);
    let normal = match (inputs.normal_rendered, inputs.normal_from_depth) {
        (Some(a), Some(b)) => l_normal(a, b, mask)?.value,
        _ => 0.0,
    };
    let albedo = match (inputs.albedo_rendered, inputs.albedo_target) {
        (Some(a), Some(b)) => l_albedo(a, b, mask)?.value,
        _ => 0.0,
    };
    let tv_term = match inputs.roughness {
        Some(o) => tv(o, mask)?,
        None => 0.0,
    };
    Ok(LossReport::from_terms(
        rgb, jaw, normal, albedo, tv_term, weights,
    ))
}
