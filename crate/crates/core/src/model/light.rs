use super::Cubemap;
use crate::{Error, Result};

/// Split-sum BRDF table over `(roughness, n·v)`.
///
/// Grid point `(i, j)` stores the `(scale, bias)` pair at roughness
/// `i / (res − 1)` and `n·v = j / (res − 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrdfLut {
    pub res: usize,
    /// `data[roughness_index * res + ndotv_index]`
    pub data: Vec<[f32; 2]>,
}

/// Bilinear lookup result plus its slope along the roughness axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LutSample {
    pub scale: f64,
    pub bias: f64,
    pub d_scale_d_roughness: f64,
    pub d_bias_d_roughness: f64,
}

impl BrdfLut {
    #[inline]
    pub fn at(&self, roughness_index: usize, ndotv_index: usize) -> [f64; 2] {
        let v = self.data[roughness_index * self.res + ndotv_index];
        [v[0] as f64, v[1] as f64]
    }

    /// Bilinear fetch with inputs clamped to `[0, 1]`.
    pub fn sample(&self, roughness: f64, ndotv: f64) -> [f64; 2] {
        let s = self.sample_with_slope(roughness, ndotv);
        [s.scale, s.bias]
    }

    pub fn sample_with_slope(&self, roughness: f64, ndotv: f64) -> LutSample {
        let last = (self.res - 1) as f64;
        let (i0, fx, inside) = Self::split(roughness, last);
        let (j0, fy, _) = Self::split(ndotv, last);
        let i1 = (i0 + 1).min(self.res - 1);
        let j1 = (j0 + 1).min(self.res - 1);
        let (a, b, c, d) = (
            self.at(i0, j0),
            self.at(i0, j1),
            self.at(i1, j0),
            self.at(i1, j1),
        );
        let lo = [a[0] + (b[0] - a[0]) * fy, a[1] + (b[1] - a[1]) * fy];
        let hi = [c[0] + (d[0] - c[0]) * fy, c[1] + (d[1] - c[1]) * fy];
        let slope = if inside { last } else { 0.0 };
        LutSample {
            scale: lo[0] + (hi[0] - lo[0]) * fx,
            bias: lo[1] + (hi[1] - lo[1]) * fx,
            d_scale_d_roughness: (hi[0] - lo[0]) * slope,
            d_bias_d_roughness: (hi[1] - lo[1]) * slope,
        }
    }

    fn split(t: f64, last: f64) -> (usize, f64, bool) {
        let inside = (0.0..=1.0).contains(&t);
        let x = t.clamp(0.0, 1.0) * last;
        let i0 = (x.floor() as usize).min(last as usize - 1);
        (i0, x - i0 as f64, inside)
    }

    pub fn check(&self) -> Result<()> {
        if self.res < 2 || self.data.len() != self.res * self.res {
            return Err(Error::invalid("BRDF LUT", "needs res ≥ 2 and res² cells"));
        }
        for (index, v) in self.data.iter().enumerate() {
            let ok = v.iter().all(|x| x.is_finite() && (0.0..=1.0).contains(x))
                && (v[0] as f64 + v[1] as f64) <= 1.0 + 1e-3;
            if !ok {
                return Err(Error::NonFinite {
                    what: "BRDF LUT cell (scale, bias in [0,1], sum ≤ 1)",
                    index,
                });
            }
        }
        Ok(())
    }
}

/// Baked image-based lighting.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentLight {
    /// Cosine-convolved radiance with the 1/π folded in: diffuse = albedo · sample.
    pub irradiance: Cubemap,
    /// Level `m` of `M` holds GGX-prefiltered radiance for roughness
    /// `m / (M − 1)` at resolution `base >> m`.
    pub prefiltered: Vec<Cubemap>,
    pub brdf_lut: BrdfLut,
    /// Rotation about +y applied at lookup time, radians.
    pub yaw: f64,
}

impl EnvironmentLight {
    /// Light whose maps are all the constant radiance `rgb`.
    pub fn uniform(
        rgb: [f64; 3],
        irr_res: usize,
        env_res: usize,
        mips: usize,
        lut: BrdfLut,
    ) -> Self {
        Self {
            irradiance: Cubemap::constant(irr_res, rgb),
            prefiltered: (0..mips)
                .map(|m| Cubemap::constant((env_res >> m).max(1), rgb))
                .collect(),
            brdf_lut: lut,
            yaw: 0.0,
        }
    }

    pub fn num_mips(&self) -> usize {
        self.prefiltered.len()
    }

    /// Every radiance texel multiplied by `s`; the LUT is light-independent.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            irradiance: self.irradiance.scaled(s),
            prefiltered: self.prefiltered.iter().map(|c| c.scaled(s)).collect(),
            brdf_lut: self.brdf_lut.clone(),
            yaw: self.yaw,
        }
    }

    pub fn check(&self) -> Result<()> {
        self.irradiance.check()?;
        if self.prefiltered.is_empty() {
            return Err(Error::invalid("environment light", "no prefiltered levels"));
        }
        let base = self.prefiltered[0].res;
        for (m, level) in self.prefiltered.iter().enumerate() {
            level.check()?;
            let expected = base >> m;
            if expected < 1 || level.res != expected {
                return Err(Error::DimensionMismatch {
                    what: "prefiltered mip resolution",
                    expected,
                    got: level.res,
                });
            }
        }
        if !self.yaw.is_finite() {
            return Err(Error::invalid("environment light", "non-finite yaw"));
        }
        self.brdf_lut.check()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_lut(res: usize) -> BrdfLut {
        let last = (res - 1) as f32;
        let mut data = Vec::new();
        for i in 0..res {
            for j in 0..res {
                data.push([0.5 * i as f32 / last, 0.25 * j as f32 / last]);
            }
        }
        BrdfLut { res, data }
    }

    #[test]
    fn grid_points_return_stored_values() {
        let lut = ramp_lut(5);
        let v = lut.sample(0.25, 0.75);
        assert_eq!(v, lut.at(1, 3));
        assert_eq!(lut.sample(1.0, 1.0), lut.at(4, 4));
    }

    #[test]
    fn slope_matches_linear_ramp() {
        let lut = ramp_lut(5);
        let s = lut.sample_with_slope(0.4, 0.3);
        assert!((s.scale - 0.2).abs() < 1e-7);
        assert!((s.d_scale_d_roughness - 0.5).abs() < 1e-6);
        assert_eq!(s.d_bias_d_roughness, 0.0);
        assert_eq!(lut.sample_with_slope(1.3, 0.3).d_scale_d_roughness, 0.0);
    }

    #[test]
    fn check_rejects_energy_gain() {
        let mut lut = ramp_lut(3);
        assert!(lut.check().is_ok());
        lut.data[0] = [0.9, 0.2];
        assert!(lut.check().is_err());
    }
}
