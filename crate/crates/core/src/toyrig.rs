//! Procedural head rigs for tests and demos.
//!
//! An ellipsoid skull facing +z with a hinged jaw and two eyeballs. Joints:
//! 0 root, 1 neck, 2 jaw, 3 left eye, 4 right eye. Lengths are meters.

use std::f64::consts::PI;

use nalgebra::{Unit, UnitQuaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::deform::{init_from_rig, Sampling};
use crate::envlight::equirect_to_direction;
use crate::math::{vec3, Vec3};
use crate::model::{Camera, GaussianCloud, Image, PoseState, Rig, RigDims};
use crate::Result;

pub const ROOT: usize = 0;
pub const NECK: usize = 1;
pub const JAW: usize = 2;
pub const LEFT_EYE: usize = 3;
pub const RIGHT_EYE: usize = 4;
pub const NUM_JOINTS: usize = 4;

/// Expression slot that opens the mouth along with the jaw.
pub const EXPR_JAW_ASSIST: usize = 0;
/// Expression slot that lowers the brow region over the eyes.
pub const EXPR_BLINK: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ToyRigSpec {
    /// Latitude bands of the skull mesh; eyes use half as many.
    pub rings: usize,
    pub skull_radii: [f64; 3],
    pub jaw_hinge: [f64; 3],
    /// Axis the animation opens the jaw about.
    pub jaw_axis: [f64; 3],
    pub eye_centers: [[f64; 3]; 2],
    pub eye_radius: f64,
    pub n_shape: usize,
    pub n_expr: usize,
    /// Animation length produced by [`make_scene`].
    pub frames: usize,
    /// Square resolution of the scene cameras.
    pub image_size: usize,
    pub seed: u64,
}

impl Default for ToyRigSpec {
    fn default() -> Self {
        Self {
            rings: 24,
            skull_radii: [0.08, 0.1, 0.09],
            jaw_hinge: [0.0, -0.03, 0.0],
            jaw_axis: [1.0, 0.0, 0.0],
            eye_centers: [[0.032, 0.02, 0.07], [-0.032, 0.02, 0.07]],
            eye_radius: 0.012,
            n_shape: 100,
            n_expr: 50,
            frames: 16,
            image_size: 256,
            seed: 0,
        }
    }
}

impl ToyRigSpec {
    /// Small bases and a coarse mesh, for fast tests.
    pub fn small() -> Self {
        Self {
            rings: 12,
            n_shape: 4,
            n_expr: 6,
            frames: 4,
            image_size: 64,
            ..Self::default()
        }
    }

    pub fn dims(&self) -> RigDims {
        RigDims::new(self.n_shape, self.n_expr, NUM_JOINTS)
    }
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Cosine bump: 1 at angle 0, falling to exactly 0 at `width`.
fn bump(angle: f64, width: f64) -> f64 {
    if angle >= width {
        0.0
    } else {
        0.5 * (1.0 + (PI * angle / width).cos())
    }
}

fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    a.normalize().dot(&b.normalize()).clamp(-1.0, 1.0).acos()
}

/// Latitude/longitude sphere scaled by `radii` around `center`.
fn ellipsoid(
    center: Vec3,
    radii: Vec3,
    rings: usize,
    verts: &mut Vec<Vec3>,
    faces: &mut Vec<[u32; 3]>,
) {
    let segments = 2 * rings;
    let base = verts.len() as u32;
    let point = |theta: f64, phi: f64| {
        let d = Vec3::new(
            theta.sin() * phi.sin(),
            theta.cos(),
            theta.sin() * phi.cos(),
        );
        center + d.component_mul(&radii)
    };
    verts.push(point(0.0, 0.0));
    for r in 1..rings {
        let theta = PI * r as f64 / rings as f64;
        for s in 0..segments {
            verts.push(point(theta, 2.0 * PI * s as f64 / segments as f64));
        }
    }
    verts.push(point(PI, 0.0));
    let ring = |r: usize, s: usize| base + 1 + ((r - 1) * segments + s % segments) as u32;
    let south = base + 1 + ((rings - 1) * segments) as u32;
    for s in 0..segments {
        faces.push([base, ring(1, s), ring(1, s + 1)]);
        faces.push([south, ring(rings - 1, s + 1), ring(rings - 1, s)]);
    }
    for r in 1..rings - 1 {
        for s in 0..segments {
            faces.push([ring(r, s), ring(r + 1, s), ring(r + 1, s + 1)]);
            faces.push([ring(r, s), ring(r + 1, s + 1), ring(r, s + 1)]);
        }
    }
}

/// Which part of the head a vertex belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    Skull,
    Eye(usize),
}

struct Layout {
    verts: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    parts: Vec<Part>,
}

fn layout(spec: &ToyRigSpec) -> Layout {
    let mut verts = Vec::new();
    let mut faces = Vec::new();
    let mut parts = Vec::new();
    let rings = spec.rings.max(4);
    ellipsoid(
        Vec3::zeros(),
        Vec3::from(spec.skull_radii),
        rings,
        &mut verts,
        &mut faces,
    );
    parts.resize(verts.len(), Part::Skull);
    for (e, c) in spec.eye_centers.iter().enumerate() {
        ellipsoid(
            Vec3::from(*c),
            Vec3::repeat(spec.eye_radius),
            (rings / 2).max(4),
            &mut verts,
            &mut faces,
        );
        parts.resize(verts.len(), Part::Eye(e));
    }
    Layout {
        verts,
        faces,
        parts,
    }
}

/// Jaw influence: zero above the hinge, rising smoothly toward the chin.
fn jaw_weight(spec: &ToyRigSpec, p: &Vec3) -> f64 {
    let h = Vec3::from(spec.jaw_hinge);
    smoothstep((h.y - p.y) / 0.035) * smoothstep((p.z - h.z + 0.01) / 0.035)
}

fn skull_normal(spec: &ToyRigSpec, p: &Vec3) -> Vec3 {
    let r = Vec3::from(spec.skull_radii);
    Vec3::new(p.x / (r.x * r.x), p.y / (r.y * r.y), p.z / (r.z * r.z)).normalize()
}

fn weight_row(spec: &ToyRigSpec, part: Part, p: &Vec3) -> [f64; NUM_JOINTS + 1] {
    let mut row = [0.0; NUM_JOINTS + 1];
    match part {
        Part::Eye(e) => row[LEFT_EYE + e] = 1.0,
        Part::Skull => {
            let jaw = jaw_weight(spec, p);
            // the base of the skull stays with the body
            let root = smoothstep((-0.07 - p.y) / 0.025) * (1.0 - jaw);
            row[JAW] = jaw;
            row[ROOT] = root;
            row[NECK] = 1.0 - jaw - root;
        }
    }
    row
}

/// Unit-direction bump centers and widths for one random basis.
fn bump_set(rng: &mut ChaCha8Rng, count: usize, front_only: bool) -> Vec<(Vec3, f64)> {
    (0..count)
        .map(|_| loop {
            let d = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let len = d.norm();
            if len < 0.1 || len > 1.0 || (front_only && d.z / len < 0.3) {
                continue;
            }
            break (d / len, rng.random_range(0.5..1.0));
        })
        .collect()
}

/// Build the rig described by `spec`. Deterministic in the seed.
pub fn make_rig(spec: &ToyRigSpec) -> Rig {
    let dims = spec.dims();
    let Layout {
        verts,
        faces,
        parts,
    } = layout(spec);
    let nv = verts.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let shape_bumps = bump_set(&mut rng, spec.n_shape, false);
    let expr_bumps = bump_set(&mut rng, spec.n_expr, true);

    let eyes = spec.eye_centers.map(Vec3::from);
    // eyes ride rigidly with the skull patch they sit in
    let anchor = |i: usize| match parts[i] {
        Part::Skull => verts[i],
        Part::Eye(e) => eyes[e],
    };

    let (ns, ne, np) = (dims.n_shape, dims.n_expr, dims.n_pose_features());
    let mut shape_basis = vec![0.0f32; nv * 3 * ns];
    let mut expr_basis = vec![0.0f32; nv * 3 * ne];
    let mut pose_basis = vec![0.0f32; nv * 3 * np];
    let mut weights = Vec::with_capacity(nv * (NUM_JOINTS + 1));

    for i in 0..nv {
        let p = anchor(i);
        let normal = skull_normal(spec, &p);
        for (m, (c, width)) in shape_bumps.iter().enumerate() {
            let d = 0.003 * bump(angle_between(&p, c), *width) * normal;
            for a in 0..3 {
                shape_basis[(i * 3 + a) * ns + m] = d[a] as f32;
            }
        }

        let jaw = if parts[i] == Part::Skull {
            jaw_weight(spec, &p)
        } else {
            0.0
        };
        for m in 0..ne {
            let d = match m {
                EXPR_JAW_ASSIST => Vec3::new(0.0, -0.004 * jaw, 0.001 * jaw),
                EXPR_BLINK if parts[i] == Part::Skull => {
                    let near = eyes
                        .iter()
                        .map(|e| bump(angle_between(&p, e), 0.35) * (p.y > e.y) as u8 as f64)
                        .fold(0.0, f64::max);
                    Vec3::new(0.0, -0.004 * near, 0.0)
                }
                EXPR_BLINK => Vec3::zeros(),
                _ => {
                    let (c, width) = expr_bumps[m];
                    0.002 * bump(angle_between(&p, &c), width * 0.6) * normal
                }
            };
            for a in 0..3 {
                expr_basis[(i * 3 + a) * ne + m] = d[a] as f32;
            }
        }

        // correctives driven by the jaw's rotation features only
        for e in 0..9 {
            let col = (JAW - 1) * 9 + e;
            let sign = if e % 2 == 0 { 1.0 } else { -1.0 };
            let d = Vec3::new(0.0, 0.0015 * sign, 0.001) * jaw * ((e / 3 + 1) as f64 / 3.0);
            for a in 0..3 {
                pose_basis[(i * 3 + a) * np + col] = d[a] as f32;
            }
        }

        weights.extend(weight_row(spec, parts[i], &verts[i]).map(|w| w as f32));
    }

    Rig {
        dims,
        vertices: verts.iter().map(|v| v.map(|x| x as f32).into()).collect(),
        faces,
        joint_parents: vec![None, Some(ROOT), Some(NECK), Some(NECK), Some(NECK)],
        rest_joints: vec![
            [0.0; 3],
            [0.0, -0.08, -0.02],
            spec.jaw_hinge.map(|v| v as f32),
            spec.eye_centers[0].map(|v| v as f32),
            spec.eye_centers[1].map(|v| v as f32),
        ],
        shape_basis,
        expr_basis,
        pose_basis,
        weights,
        jaw_index: JAW,
    }
}

/// Rig, avatar, animation and cameras generated together.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyScene {
    pub rig: Rig,
    pub cloud: GaussianCloud,
    pub animation: Vec<PoseState>,
    pub cameras: Vec<Camera>,
}

/// Material of a surface point, by part and rest position.
fn toy_material(spec: &ToyRigSpec, eye: Option<usize>, p: &Vec3) -> ([f64; 3], f64, f64) {
    if let Some(e) = eye {
        let c = Vec3::from(spec.eye_centers[e]);
        let front = (p - c).normalize().z;
        return if front > 0.8 {
            ([0.25, 0.35, 0.55], 0.15, 0.06)
        } else {
            ([0.9, 0.88, 0.85], 0.15, 0.05)
        };
    }
    let wave = (23.0 * p.x).sin() * (19.0 * p.y).cos() + 0.5 * (31.0 * p.z).sin();
    let lips = p.z > 0.05 && (-0.06..-0.035).contains(&p.y) && p.x.abs() < 0.025;
    let albedo = if lips {
        [0.7, 0.32, 0.3]
    } else {
        [0.78 + 0.06 * wave, 0.56 + 0.05 * wave, 0.45 + 0.04 * wave]
    };
    let roughness = if lips {
        0.35
    } else {
        0.55 + 0.15 * wave.tanh()
    };
    let f0 = 0.04 + 0.015 * (13.0 * p.y).sin();
    (albedo, roughness, f0)
}

/// A scene of `n_points` Gaussians on the toy rig, oriented along the surface
/// with varied materials, plus an animation loop and three orbit cameras at
/// azimuths 0°, 120° and 240°.
pub fn make_scene(spec: &ToyRigSpec, n_points: usize) -> Result<ToyScene> {
    let rig = make_rig(spec);
    let mut cloud = init_from_rig(&rig, Sampling::Total(n_points), spec.seed)?;
    let area: f64 = rig
        .faces
        .iter()
        .map(|f| {
            let [a, b, c] = f.map(|v| vec3(rig.vertices[v as usize]));
            0.5 * (b - a).cross(&(c - a)).norm()
        })
        .sum();
    let s = 0.75 * (area / n_points.max(1) as f64).sqrt();

    let k = rig.dims.n_transforms();
    let splats = &mut cloud.splats;
    for i in 0..splats.len() {
        let p = vec3(splats.positions[i]);
        let row = &cloud.bases.weights[i * k..(i + 1) * k];
        let eye = (0..2).find(|&e| row[LEFT_EYE + e] == 1.0);
        let normal = match eye {
            Some(e) => (p - Vec3::from(spec.eye_centers[e])).normalize(),
            None => skull_normal(spec, &p),
        };
        let q = UnitQuaternion::rotation_between(&Vec3::z(), &normal).unwrap_or_else(|| {
            UnitQuaternion::from_axis_angle(&Unit::new_normalize(Vec3::x()), PI)
        });
        splats.rotations[i] = [q.w as f32, q.i as f32, q.j as f32, q.k as f32];
        splats.set_scale(i, [s, s, 0.25 * s]);
        splats.opacities[i] = 0.9;
        let (albedo, roughness, f0) = toy_material(spec, eye, &p);
        splats.albedo[i] = albedo.map(|v| v as f32);
        splats.roughness[i] = roughness as f32;
        splats.f0[i] = f0 as f32;
    }

    Ok(ToyScene {
        animation: make_animation(spec),
        cameras: [0.0, 120.0, 240.0]
            .iter()
            .map(|&az| {
                Camera::orbit(
                    Vec3::zeros(),
                    az,
                    0.0,
                    0.45,
                    spec.image_size,
                    spec.image_size,
                    30.0,
                )
            })
            .collect(),
        rig,
        cloud,
    })
}

/// Looping talk-and-blink animation with a shared shape.
pub fn make_animation(spec: &ToyRigSpec) -> Vec<PoseState> {
    let dims = spec.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed);
    let beta: Vec<f64> = (0..dims.n_shape)
        .map(|_| rng.random_range(-0.5..0.5))
        .collect();
    let axis = Vec3::from(spec.jaw_axis).normalize();
    (0..spec.frames)
        .map(|t| {
            let phase = 2.0 * PI * t as f64 / spec.frames.max(1) as f64;
            let open = 0.25 * (0.5 - 0.5 * phase.cos());
            let mut pose = PoseState::rest(dims, JAW);
            pose.beta = beta.clone();
            pose.theta[ROOT] = [0.0, 0.15 * phase.sin(), 0.0];
            pose.theta[NECK] = [0.05 * (2.0 * phase).sin(), 0.0, 0.0];
            pose.theta[JAW] = (axis * open).into();
            pose.theta[LEFT_EYE] = [0.0, 0.2 * phase.sin(), 0.0];
            pose.theta[RIGHT_EYE] = pose.theta[LEFT_EYE];
            for (m, psi) in pose.psi.iter_mut().enumerate() {
                *psi = match m {
                    EXPR_JAW_ASSIST => open * 4.0,
                    EXPR_BLINK => (1.0 - ((phase - 1.5 * PI).abs() * 3.0).min(1.0)).max(0.0),
                    _ => 0.5 * (phase + m as f64).sin(),
                };
            }
            pose
        })
        .collect()
}

/// Studio-style HDR panorama: graded sky, dark floor, a warm key light up
/// and to the front-left of +z and a dim cool rim light behind.
pub fn sky_panorama(width: usize, height: usize) -> Image {
    let key = Vec3::new(-0.5, 0.55, 0.67).normalize();
    let rim = Vec3::new(0.6, 0.2, -0.77).normalize();
    Image::from_fn(width, height, 3, |x, y, c| {
        let u = (x as f64 + 0.5) / width as f64;
        let v = (y as f64 + 0.5) / height as f64;
        let d = equirect_to_direction(u, v);
        let up = d.y.max(0.0);
        let base = if d.y >= 0.0 {
            [0.35 + 0.25 * up, 0.42 + 0.25 * up, 0.55 + 0.35 * up][c]
        } else {
            [0.12, 0.1, 0.08][c]
        };
        let k = d.dot(&key).max(0.0).powi(64) * 24.0;
        let r = d.dot(&rim).max(0.0).powi(32) * 6.0;
        base + k * [1.0, 0.85, 0.7][c] + r * [0.6, 0.75, 1.0][c]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deform::{forward_kinematics, lbs, pose_cloud};
    use crate::model::{validate, validate_rig};

    #[test]
    fn sky_panorama_is_bright_above() {
        let img = sky_panorama(64, 32);
        assert!(img.data.iter().all(|v| v.is_finite() && *v > 0.0));
        let top: f64 = (0..64).map(|x| img.get(x, 2, 1)).sum();
        let bottom: f64 = (0..64).map(|x| img.get(x, 29, 1)).sum();
        assert!(top > bottom);
    }

    #[test]
    fn rig_is_valid_and_deterministic() {
        let spec = ToyRigSpec::small();
        let a = make_rig(&spec);
        assert!(validate_rig(&a).is_empty(), "{:?}", validate_rig(&a));
        assert_eq!(a, make_rig(&spec));
        let other = make_rig(&ToyRigSpec { seed: 9, ..spec });
        assert_ne!(a.shape_basis, other.shape_basis);
    }

    #[test]
    fn scene_passes_validation() {
        let scene = make_scene(&ToyRigSpec::small(), 300).unwrap();
        let v = validate(&scene.cloud, &scene.rig);
        assert!(v.is_empty(), "{:?}", &v[..v.len().min(5)]);
        assert_eq!(scene.cameras.len(), 3);
        assert_eq!(scene.animation.len(), 4);
    }

    #[test]
    fn jaw_opening_moves_chin_only() {
        let spec = ToyRigSpec::small();
        let rig = make_rig(&spec);
        let mut pose = PoseState::rest(rig.dims, JAW);
        pose.theta[JAW] = [0.3, 0.0, 0.0];
        let fk = forward_kinematics(&rig, &pose).unwrap();
        let pts: Vec<[f64; 3]> = rig.vertices.iter().map(|v| vec3(*v).into()).collect();
        let (posed, _) = lbs(&pts, &fk, &rig.weights).unwrap();
        let mut chin_moved = false;
        for (i, (a, b)) in pts.iter().zip(&posed).enumerate() {
            let shift = (Vec3::from(*a) - Vec3::from(*b)).norm();
            if a[1] > 0.05 {
                assert!(shift < 1e-6, "vertex {i} moved {shift}");
            }
            if a[1] < -0.07 && a[2] > 0.03 {
                chin_moved |= shift > 1e-3;
            }
        }
        assert!(chin_moved);
    }

    #[test]
    fn rest_pose_keeps_template() {
        let spec = ToyRigSpec::small();
        let scene = make_scene(&spec, 200).unwrap();
        let posed = pose_cloud(
            &scene.cloud,
            &scene.rig,
            &PoseState::rest(scene.rig.dims, JAW),
        )
        .unwrap();
        assert_eq!(posed.splats.positions, scene.cloud.splats.positions);
    }
}
