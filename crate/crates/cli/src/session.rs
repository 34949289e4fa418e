//! Interactive session state shared by `serve` and `render`.
//!
//! The JSON field names here are the wire format of the serve endpoint.

use serde::{Deserialize, Serialize};

use gsav_core::math::Vec3;
use gsav_core::model::{Camera, EnvironmentLight, GaussianCloud, Image, PoseState, Rig};
use gsav_core::render::{composite, render_frame, Background};
use gsav_core::shade::ShadeParams;

/// Camera on a sphere around the view target, angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Orbit {
    pub azimuth: f64,
    pub elevation: f64,
    pub distance: f64,
}

impl Default for Orbit {
    fn default() -> Self {
        Self {
            azimuth: 0.0,
            elevation: 0.0,
            distance: 0.45,
        }
    }
}

/// Image size, field of view and orbit target; fixed for a serve session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct View {
    pub width: usize,
    pub height: usize,
    pub fov: f64,
    pub target: [f64; 3],
}

impl Default for View {
    fn default() -> Self {
        Self {
            width: 512,
            height: 512,
            fov: 30.0,
            target: [0.0; 3],
        }
    }
}

impl View {
    pub fn camera(&self, orbit: &Orbit) -> Camera {
        Camera::orbit(
            Vec3::from(self.target),
            orbit.azimuth,
            orbit.elevation,
            orbit.distance,
            self.width,
            self.height,
            self.fov,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    /// Shape coefficients β.
    pub shape: Vec<f64>,
    /// Expression coefficients ψ.
    pub expression: Vec<f64>,
    /// Axis-angle per joint in radians, root first.
    pub joints: Vec<[f64; 3]>,
    pub translation: [f64; 3],
    /// Environment rotation about +y, radians.
    pub env_yaw: f64,
    pub f0_scale: f64,
    pub roughness_scale: f64,
    pub exposure: f64,
    pub background: Background,
    pub camera: Orbit,
    pub light: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitPatch {
    pub azimuth: Option<f64>,
    pub elevation: Option<f64>,
    pub distance: Option<f64>,
}

/// Partial update; absent fields keep their value.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsPatch {
    pub shape: Option<Vec<f64>>,
    pub expression: Option<Vec<f64>>,
    pub joints: Option<Vec<[f64; 3]>>,
    pub translation: Option<[f64; 3]>,
    pub env_yaw: Option<f64>,
    pub f0_scale: Option<f64>,
    pub roughness_scale: Option<f64>,
    pub exposure: Option<f64>,
    pub background: Option<Background>,
    pub camera: Option<OrbitPatch>,
    pub light: Option<String>,
}

impl SessionState {
    pub fn new(rig: &Rig, light: String) -> Self {
        let rest = PoseState::rest(rig.dims, rig.jaw_index);
        Self {
            shape: rest.beta,
            expression: rest.psi,
            joints: rest.theta,
            translation: rest.translation,
            env_yaw: 0.0,
            f0_scale: 1.0,
            roughness_scale: 1.0,
            exposure: 1.0,
            background: Background::Black,
            camera: Orbit::default(),
            light,
        }
    }

    pub fn pose(&self, rig: &Rig) -> PoseState {
        PoseState {
            beta: self.shape.clone(),
            psi: self.expression.clone(),
            theta: self.joints.clone(),
            translation: self.translation,
            jaw_index: rig.jaw_index,
        }
    }

    pub fn shade_params(&self) -> ShadeParams {
        ShadeParams {
            f0_scale: self.f0_scale,
            roughness_scale: self.roughness_scale,
            env_yaw: self.env_yaw,
            exposure: self.exposure,
            ..ShadeParams::default()
        }
    }

    /// The merged state, or a message naming the first offending field.
    pub fn merged(&self, patch: ParamsPatch, rig: &Rig, lights: &[String]) -> Result<Self, String> {
        let mut s = self.clone();
        if let Some(v) = patch.shape {
            s.shape = v;
        }
        if let Some(v) = patch.expression {
            s.expression = v;
        }
        if let Some(v) = patch.joints {
            s.joints = v;
        }
        if let Some(v) = patch.translation {
            s.translation = v;
        }
        if let Some(v) = patch.env_yaw {
            s.env_yaw = v;
        }
        if let Some(v) = patch.f0_scale {
            s.f0_scale = v;
        }
        if let Some(v) = patch.roughness_scale {
            s.roughness_scale = v;
        }
        if let Some(v) = patch.exposure {
            s.exposure = v;
        }
        if let Some(v) = patch.background {
            s.background = v;
        }
        if let Some(c) = patch.camera {
            s.camera.azimuth = c.azimuth.unwrap_or(s.camera.azimuth);
            s.camera.elevation = c.elevation.unwrap_or(s.camera.elevation);
            s.camera.distance = c.distance.unwrap_or(s.camera.distance);
        }
        if let Some(v) = patch.light {
            s.light = v;
        }
        s.check(rig, lights)?;
        Ok(s)
    }

    pub fn check(&self, rig: &Rig, lights: &[String]) -> Result<(), String> {
        let dims = rig.dims;
        let lengths = [
            ("shape", dims.n_shape, self.shape.len()),
            ("expression", dims.n_expr, self.expression.len()),
            ("joints", dims.n_transforms(), self.joints.len()),
        ];
        for (field, expected, got) in lengths {
            if expected != got {
                return Err(format!("{field}: expected {expected} entries, got {got}"));
            }
        }
        let finite = [
            ("shape", self.shape.iter().all(|v| v.is_finite())),
            ("expression", self.expression.iter().all(|v| v.is_finite())),
            (
                "joints",
                self.joints.iter().flatten().all(|v| v.is_finite()),
            ),
            (
                "translation",
                self.translation.iter().all(|v| v.is_finite()),
            ),
            ("env_yaw", self.env_yaw.is_finite()),
            ("camera.azimuth", self.camera.azimuth.is_finite()),
            ("camera.elevation", self.camera.elevation.is_finite()),
        ];
        if let Some((field, _)) = finite.iter().find(|(_, ok)| !ok) {
            return Err(format!("{field}: values must be finite"));
        }
        let positive = [
            ("roughness_scale", self.roughness_scale),
            ("exposure", self.exposure),
            ("camera.distance", self.camera.distance),
        ];
        if let Some((field, _)) = positive.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(format!("{field}: must be finite and > 0"));
        }
        if !(self.f0_scale.is_finite() && self.f0_scale >= 0.0) {
            return Err("f0_scale: must be finite and ≥ 0".into());
        }
        if !lights.contains(&self.light) {
            return Err(format!("light: unknown light {:?}", self.light));
        }
        Ok(())
    }
}

/// Shade one frame and composite it over the background; the result is
/// what gets written as PNG.
pub fn render_display(
    cloud: &GaussianCloud,
    rig: &Rig,
    pose: &PoseState,
    camera: &Camera,
    env: &EnvironmentLight,
    params: &ShadeParams,
    background: Background,
) -> gsav_core::Result<Image> {
    let frame = render_frame(cloud, rig, pose, camera, env, params)?;
    Ok(composite(&frame.color, &frame.gbuffer.alpha, background))
}

#[cfg(test)]
mod tests {
    use super::*;
    use gsav_core::toyrig::{make_rig, ToyRigSpec};

    fn state() -> (SessionState, Rig, Vec<String>) {
        let rig = make_rig(&ToyRigSpec::small());
        (
            SessionState::new(&rig, "sky".into()),
            rig,
            vec!["sky".into(), "studio".into()],
        )
    }

    #[test]
    fn partial_patch_keeps_other_fields() {
        let (s, rig, lights) = state();
        let patch: ParamsPatch =
            serde_json::from_str(r#"{"f0_scale":2,"camera":{"azimuth":30}}"#).unwrap();
        let m = s.merged(patch, &rig, &lights).unwrap();
        assert_eq!(m.f0_scale, 2.0);
        assert_eq!(m.camera.azimuth, 30.0);
        assert_eq!(m.camera.distance, s.camera.distance);
        assert_eq!(m.expression, s.expression);
    }

    #[test]
    fn unknown_fields_are_named() {
        let err = serde_json::from_str::<ParamsPatch>(r#"{"f0scale":2}"#).unwrap_err();
        assert!(err.to_string().contains("f0scale"));
        let err = serde_json::from_str::<ParamsPatch>(r#"{"camera":{"zoom":2}}"#).unwrap_err();
        assert!(err.to_string().contains("zoom"));
    }

    #[test]
    fn invalid_values_name_the_field() {
        let (s, rig, lights) = state();
        let bad = |json: &str| {
            let patch: ParamsPatch = serde_json::from_str(json).unwrap();
            s.merged(patch, &rig, &lights).unwrap_err()
        };
        assert!(bad(r#"{"expression":[1]}"#).starts_with("expression"));
        assert!(bad(r#"{"exposure":0}"#).starts_with("exposure"));
        assert!(bad(r#"{"light":"moon"}"#).starts_with("light"));
        assert!(bad(r#"{"camera":{"distance":-1}}"#).starts_with("camera.distance"));
    }

    #[test]
    fn full_state_round_trips_as_patch() {
        let (s, rig, lights) = state();
        let json = serde_json::to_string(&s).unwrap();
        let patch: ParamsPatch = serde_json::from_str(&json).unwrap();
        assert_eq!(s.merged(patch, &rig, &lights).unwrap(), s);
    }
}
