//! Canonical-to-pose deformation: linear blendshapes followed by linear blend
//! skinning, plus point initialization from a rig mesh.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::math::{
    mat_to_quat, nearest_rotation, normalize_quat, quat_f64, quat_mul, to_f32, vec3, Mat3, Vec3,
};
use crate::model::{DeformationBases, GaussianCloud, PoseState, Rig, Splats};
use crate::{Error, Result};

/// Initial roughness, base reflectance and albedo of new points.
pub const INIT_ROUGHNESS: f32 = 0.9;
pub const INIT_F0: f32 = 0.04;
pub const INIT_ALBEDO: f32 = 0.5;
pub const INIT_OPACITY: f32 = 0.5;

/// Rotation matrix of an axis-angle vector.
pub fn rodrigues(axis_angle: [f64; 3]) -> Mat3 {
    let v = Vec3::from(axis_angle);
    let angle = v.norm();
    if angle == 0.0 {
        return Mat3::identity();
    }
    let k = skew(&v);
    if angle < 1e-8 {
        // second-order expansion; the closed form loses precision here
        return Mat3::identity() + k + 0.5 * k * k;
    }
    let k = k / angle;
    Mat3::identity() + angle.sin() * k + (1.0 - angle.cos()) * (k * k)
}

fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// `offsets[i] = Σ_m coeffs[m] · basis[i, :, m]` for a basis laid out N×3×C.
pub fn blendshape_offset(coeffs: &[f64], basis: &[f32], n_points: usize) -> Result<Vec<[f64; 3]>> {
    let c = coeffs.len();
    if basis.len() != n_points * 3 * c {
        return Err(Error::DimensionMismatch {
            what: "blendshape basis",
            expected: n_points * 3 * c,
            got: basis.len(),
        });
    }
    Ok((0..n_points)
        .map(|i| basis_offset(coeffs, basis, i).into())
        .collect())
}

#[inline]
fn basis_offset(coeffs: &[f64], basis: &[f32], i: usize) -> Vec3 {
    let c = coeffs.len();
    let mut out = Vec3::zeros();
    if c == 0 {
        return out;
    }
    for axis in 0..3 {
        let row = &basis[(i * 3 + axis) * c..(i * 3 + axis + 1) * c];
        out[axis] = row.iter().zip(coeffs).map(|(&b, &w)| b as f64 * w).sum();
    }
    out
}

/// `R(θ_k) − I` flattened row-major for every non-root joint, 9 values each.
pub fn pose_feature(theta: &[[f64; 3]]) -> Vec<f64> {
    let mut out = Vec::with_capacity(9 * theta.len().saturating_sub(1));
    for aa in theta.iter().skip(1) {
        let delta = rodrigues(*aa) - Mat3::identity();
        for r in 0..3 {
            for c in 0..3 {
                out.push(delta[(r, c)]);
            }
        }
    }
    out
}

/// Rigid map `x ↦ rotation · x + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }
}

/// Output of forward kinematics, one entry per transform (root first).
#[derive(Debug, Clone, PartialEq)]
pub struct JointTransforms {
    /// Maps rest-pose points to posed points for each joint.
    pub skinning: Vec<RigidTransform>,
    /// Rotation of each joint relative to its parent.
    pub relative_rotations: Vec<Mat3>,
    /// Posed joint locations.
    pub joint_positions: Vec<Vec3>,
}

/// Forward kinematics over the rig hierarchy.
///
/// Each joint rotates about its rest location, composed parent-to-child; the
/// root additionally applies the global translation.
pub fn forward_kinematics(rig: &Rig, pose: &PoseState) -> Result<JointTransforms> {
    pose.check(rig.dims)?;
    let rest: Vec<Vec3> = rig.rest_joints.iter().map(|j| vec3(*j)).collect();
    chain_kinematics(&rig.joint_parents, &rest, &pose.theta, pose.translation)
}

/// Forward kinematics for an explicit joint hierarchy.
pub fn chain_kinematics(
    parents: &[Option<usize>],
    rest_joints: &[Vec3],
    theta: &[[f64; 3]],
    translation: [f64; 3],
) -> Result<JointTransforms> {
    let n = parents.len();
    for (what, got) in [("rest joints", rest_joints.len()), ("theta", theta.len())] {
        if got != n {
            return Err(Error::DimensionMismatch {
                what,
                expected: n,
                got,
            });
        }
    }
    let order = Rig {
        joint_parents: parents.to_vec(),
        ..Default::default()
    }
    .joint_order()
    .ok_or_else(|| Error::invalid("joint hierarchy", "not a tree rooted at joint 0"))?;

    let relative: Vec<Mat3> = theta.iter().map(|aa| rodrigues(*aa)).collect();
    let mut skinning = vec![RigidTransform::identity(); n];
    for &k in &order {
        let j = rest_joints[k];
        // rotation about the rest joint location: x ↦ R(x − j) + j
        let local = RigidTransform {
            rotation: relative[k],
            translation: j - relative[k] * j,
        };
        skinning[k] = match parents[k] {
            Some(p) => skinning[p].compose(&local),
            None => RigidTransform {
                rotation: local.rotation,
                translation: local.translation + Vec3::from(translation),
            },
        };
    }
    let joint_positions = (0..n).map(|k| skinning[k].apply(&rest_joints[k])).collect();
    Ok(JointTransforms {
        skinning,
        relative_rotations: relative,
        joint_positions,
    })
}

#[inline]
/// Weighted sum of the transforms, divided by the row sum so rows stored in
/// f32 (sum 1 ± 1e-7) still reproduce identity transforms exactly.
fn blend_transform(transforms: &[RigidTransform], weights: &[f32]) -> (Mat3, Vec3) {
    let mut rot = Mat3::zeros();
    let mut trans = Vec3::zeros();
    let mut sum = 0.0;
    for (t, &w) in transforms.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        let w = w as f64;
        rot += w * t.rotation;
        trans += w * t.translation;
        sum += w;
    }
    if sum != 1.0 && sum > 0.0 {
        rot /= sum;
        trans /= sum;
    }
    (rot, trans)
}

/// Linear blend skinning of `points` with per-point weight rows (K+1 each).
///
/// Returns the posed points and the blended 3×3 block per point.
pub fn lbs(
    points: &[[f64; 3]],
    transforms: &JointTransforms,
    weights: &[f32],
) -> Result<(Vec<[f64; 3]>, Vec<Mat3>)> {
    let k = transforms.skinning.len();
    if weights.len() != points.len() * k {
        return Err(Error::DimensionMismatch {
            what: "blend weights",
            expected: points.len() * k,
            got: weights.len(),
        });
    }
    Ok(points
        .iter()
        .zip(weights.chunks(k))
        .map(|(p, w)| {
            let (rot, trans) = blend_transform(&transforms.skinning, w);
            (<[f64; 3]>::from(rot * Vec3::from(*p) + trans), rot)
        })
        .unzip())
}

fn check_cloud(cloud: &GaussianCloud, rig: &Rig) -> Result<()> {
    let (cd, rd) = (cloud.dims(), rig.dims);
    for (what, expected, got) in [
        ("shape basis size", rd.n_shape, cd.n_shape),
        ("expression basis size", rd.n_expr, cd.n_expr),
        ("joint count", rd.n_joints, cd.n_joints),
    ] {
        if expected != got {
            return Err(Error::DimensionMismatch {
                what,
                expected,
                got,
            });
        }
    }
    cloud.check_lengths()
}

/// Deform the cloud into pose space, returning only the render attributes.
pub fn pose_splats(cloud: &GaussianCloud, rig: &Rig, pose: &PoseState) -> Result<Splats> {
    check_cloud(cloud, rig)?;
    let fk = forward_kinematics(rig, pose)?;
    let feature = pose_feature(&pose.theta);
    let bases = &cloud.bases;
    let src = &cloud.splats;

    let (positions, rotations): (Vec<[f32; 3]>, Vec<[f32; 4]>) = (0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let canonical = vec3(src.positions[i]) + basis_offset(&pose.beta, &bases.shape, i);
            let expressed = canonical
                + (basis_offset(&pose.psi, &bases.expr, i)
                    + basis_offset(&feature, &bases.pose, i));
            let (rot, trans) = blend_transform(&fk.skinning, bases.weight_row(i));
            let posed = rot * expressed + trans;
            let q = normalize_quat(quat_mul(
                mat_to_quat(&nearest_rotation(&rot)),
                quat_f64(src.rotations[i]),
            ));
            (to_f32(&posed), q.map(|v| v as f32))
        })
        .unzip();

    Ok(Splats {
        positions,
        rotations,
        ..src.clone()
    })
}

/// Deform the cloud into pose space; deformation attributes are copied.
pub fn pose_cloud(cloud: &GaussianCloud, rig: &Rig, pose: &PoseState) -> Result<GaussianCloud> {
    Ok(GaussianCloud {
        splats: pose_splats(cloud, rig, pose)?,
        bases: cloud.bases.clone(),
    })
}

/// How many points to draw from the rig mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// This many samples on every face.
    PerFace(usize),
    /// This many samples in total, faces drawn proportionally to area.
    Total(usize),
}

fn face_area(rig: &Rig, face: usize) -> f64 {
    let [a, b, c] = rig.faces[face].map(|v| vec3(rig.vertices[v as usize]));
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// Point on `face` at barycentric coordinates `bary` with every per-vertex
/// attribute interpolated. Appends to `splats` and `bases`.
pub fn push_face_sample(
    rig: &Rig,
    face: usize,
    bary: [f64; 3],
    splats: &mut Splats,
    bases: &mut DeformationBases,
) {
    let verts = rig.faces[face].map(|v| v as usize);
    let lerp3 = |get: &dyn Fn(usize) -> f64| -> f64 {
        bary[0] * get(verts[0]) + bary[1] * get(verts[1]) + bary[2] * get(verts[2])
    };

    let mut pos = [0.0f32; 3];
    for (axis, p) in pos.iter_mut().enumerate() {
        *p = lerp3(&|v| rig.vertices[v][axis] as f64) as f32;
    }

    let d = rig.dims;
    for (src, dst, c) in [
        (&rig.shape_basis, &mut bases.shape, d.n_shape),
        (&rig.expr_basis, &mut bases.expr, d.n_expr),
        (&rig.pose_basis, &mut bases.pose, d.n_pose_features()),
    ] {
        for j in 0..3 * c {
            dst.push(lerp3(&|v| src[v * 3 * c + j] as f64) as f32);
        }
    }

    let k = d.n_transforms();
    let mut row: Vec<f64> = (0..k)
        .map(|j| lerp3(&|v| rig.weights[v * k + j] as f64))
        .collect();
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > 1e-7 {
        row.iter_mut().for_each(|w| *w /= sum);
    }
    bases.weights.extend(row.iter().map(|&w| w as f32));

    let scale = (face_area(rig, face).sqrt() / 3.0).max(1e-6);
    splats.positions.push(pos);
    splats.rotations.push([1.0, 0.0, 0.0, 0.0]);
    splats.log_scales.push([scale.ln() as f32; 3]);
    splats.opacities.push(INIT_OPACITY);
    splats.albedo.push([INIT_ALBEDO; 3]);
    splats.roughness.push(INIT_ROUGHNESS);
    splats.f0.push(INIT_F0);
}

/// Scatter points over the rig's faces, interpolating position, bases and
/// blend weights barycentrically. Deterministic for a given seed.
pub fn init_from_rig(rig: &Rig, sampling: Sampling, seed: u64) -> Result<GaussianCloud> {
    if rig.faces.is_empty() || rig.vertices.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let faces: Vec<usize> = match sampling {
        Sampling::PerFace(k) => (0..rig.faces.len())
            .flat_map(|f| std::iter::repeat_n(f, k))
            .collect(),
        Sampling::Total(n) => {
            let areas: Vec<f64> = (0..rig.faces.len()).map(|f| face_area(rig, f)).collect();
            let dist = WeightedIndex::new(&areas)
                .map_err(|e| Error::invalid("rig mesh", format!("face areas: {e}")))?;
            (0..n).map(|_| dist.sample(&mut rng)).collect()
        }
    };

    let mut splats = Splats::default();
    let mut bases = DeformationBases {
        dims: rig.dims,
        ..Default::default()
    };
    for face in faces {
        let r1: f64 = rng.random();
        let r2: f64 = rng.random();
        let s = r1.sqrt();
        let bary = [1.0 - s, s * (1.0 - r2), s * r2];
        push_face_sample(rig, face, bary, &mut splats, &mut bases);
    }
    Ok(GaussianCloud { splats, bases })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use super::*;
    use crate::model::RigDims;

    fn close(a: &Mat3, b: &Mat3, tol: f64) -> bool {
        (a - b).abs().max() <= tol
    }

    #[test]
    fn rodrigues_zero_is_identity() {
        assert_eq!(rodrigues([0.0; 3]), Mat3::identity());
    }

    #[test]
    fn rodrigues_quarter_turn_about_z() {
        let p = rodrigues([0.0, 0.0, FRAC_PI_2]) * Vec3::x();
        assert!((p - Vec3::y()).norm() < 1e-12);
    }

    #[test]
    fn rodrigues_half_turn_about_x() {
        let expected = Mat3::from_diagonal(&Vec3::new(1.0, -1.0, -1.0));
        assert!(close(&rodrigues([PI, 0.0, 0.0]), &expected, 1e-12));
    }

    #[test]
    fn rodrigues_tiny_angles_stay_orthonormal() {
        let r = rodrigues([1e-10, -3e-10, 2e-10]);
        assert!(close(&(r.transpose() * r), &Mat3::identity(), 1e-15));
    }

    // basis for 2 points, 2 coefficients: values are distinct so slices are traceable
    const BASIS: [f32; 12] = [
        1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0,
    ];

    #[test]
    fn blendshape_zero_coeffs_give_zero() {
        let off = blendshape_offset(&[0.0, 0.0], &BASIS, 2).unwrap();
        assert!(off.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn blendshape_one_hot_selects_slice() {
        let off = blendshape_offset(&[0.0, 1.0], &BASIS, 2).unwrap();
        assert_eq!(off, vec![[2.0, 4.0, 6.0], [8.0, 10.0, 12.0]]);
    }

    #[test]
    fn blendshape_is_additive() {
        let (a, b) = ([0.3, -1.2], [2.5, 0.7]);
        let sum = blendshape_offset(&[a[0] + b[0], a[1] + b[1]], &BASIS, 2).unwrap();
        let fa = blendshape_offset(&a, &BASIS, 2).unwrap();
        let fb = blendshape_offset(&b, &BASIS, 2).unwrap();
        for i in 0..2 {
            for k in 0..3 {
                assert!((sum[i][k] - (fa[i][k] + fb[i][k])).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn blendshape_rejects_bad_dims() {
        assert!(matches!(
            blendshape_offset(&[1.0; 3], &BASIS, 2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pose_feature_rest_is_zero() {
        let f = pose_feature(&[[0.0; 3]; 5]);
        assert_eq!(f.len(), 36);
        assert!(f.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pose_feature_jaw_quarter_turn() {
        let mut theta = [[0.0; 3]; 5];
        theta[2] = [0.0, 0.0, FRAC_PI_2];
        let f = pose_feature(&theta);
        // Rz(π/2) − I, row-major
        let expected = [-1.0, -1.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0];
        for (i, v) in f.iter().enumerate() {
            let want = if (9..18).contains(&i) {
                expected[i - 9]
            } else {
                0.0
            };
            assert!((v - want).abs() < 1e-12, "entry {i}: {v} vs {want}");
        }
    }

    #[test]
    fn fk_rest_pose_is_identity() {
        let parents = [None, Some(0), Some(1)];
        let rest = [
            Vec3::zeros(),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 1.5, 0.3),
        ];
        let fk = chain_kinematics(&parents, &rest, &[[0.0; 3]; 3], [0.0; 3]).unwrap();
        for t in &fk.skinning {
            assert_eq!(*t, RigidTransform::identity());
        }
    }

    #[test]
    fn fk_global_rotation_moves_every_joint_rigidly() {
        let parents = [None, Some(0), Some(1)];
        let rest = [
            Vec3::new(0.1, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 1.5, 0.3),
        ];
        let theta = [[0.2, -0.4, 0.9], [0.0; 3], [0.0; 3]];
        let t = [0.5, -1.0, 2.0];
        let fk = chain_kinematics(&parents, &rest, &theta, t).unwrap();
        let rg = rodrigues(theta[0]);
        let expected_t = rest[0] - rg * rest[0] + Vec3::from(t);
        for s in &fk.skinning {
            assert!(close(&s.rotation, &rg, 1e-15));
            assert!((s.translation - expected_t).norm() < 1e-15);
        }
    }

    #[test]
    fn fk_two_joint_chain_matches_hand_composition() {
        // root at the origin, child at (1,0,0), both turned a quarter about z.
        // (2,0,0): child turn about (1,0,0) → (1,1,0); root turn → (−1,1,0).
        let parents = [None, Some(0)];
        let rest = [Vec3::zeros(), Vec3::x()];
        let theta = [[0.0, 0.0, FRAC_PI_2], [0.0, 0.0, FRAC_PI_2]];
        let fk = chain_kinematics(&parents, &rest, &theta, [0.0; 3]).unwrap();
        let p = fk.skinning[1].apply(&Vec3::new(2.0, 0.0, 0.0));
        assert!((p - Vec3::new(-1.0, 1.0, 0.0)).norm() < 1e-12);
        let half_turn = Mat3::from_diagonal(&Vec3::new(-1.0, -1.0, 1.0));
        assert!(close(&fk.skinning[1].rotation, &half_turn, 1e-12));
        assert!((fk.joint_positions[1] - Vec3::y()).norm() < 1e-12);
    }

    fn transforms(list: Vec<RigidTransform>) -> JointTransforms {
        JointTransforms {
            relative_rotations: vec![Mat3::identity(); list.len()],
            joint_positions: vec![Vec3::zeros(); list.len()],
            skinning: list,
        }
    }

    #[test]
    fn lbs_identity_transforms_leave_points() {
        let t = transforms(vec![RigidTransform::identity(); 2]);
        let pts = [[0.3, -0.2, 1.0], [5.0, 6.0, 7.0]];
        let (out, rots) = lbs(&pts, &t, &[0.25, 0.75, 1.0, 0.0]).unwrap();
        assert_eq!(out, pts.to_vec());
        assert!(rots.iter().all(|r| *r == Mat3::identity()));
    }

    #[test]
    fn lbs_one_hot_follows_joint() {
        let g = RigidTransform {
            rotation: rodrigues([0.1, 0.7, -0.3]),
            translation: Vec3::new(1.0, 2.0, 3.0),
        };
        let t = transforms(vec![RigidTransform::identity(), g]);
        let p = [0.4, -0.5, 0.6];
        let (out, _) = lbs(&[p], &t, &[0.0, 1.0]).unwrap();
        let direct = g.apply(&Vec3::from(p));
        assert!((Vec3::from(out[0]) - direct).norm() < 1e-12);
    }

    #[test]
    fn lbs_half_blend_of_translation() {
        let shift = RigidTransform {
            rotation: Mat3::identity(),
            translation: Vec3::x(),
        };
        let t = transforms(vec![RigidTransform::identity(), shift]);
        let (out, _) = lbs(&[[1.0, 2.0, 3.0]], &t, &[0.5, 0.5]).unwrap();
        assert_eq!(out[0], [1.5, 2.0, 3.0]);
    }

    fn single_point_rig() -> (Rig, GaussianCloud) {
        let dims = RigDims::new(1, 1, 2);
        let rig = Rig {
            dims,
            vertices: vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            faces: vec![[0, 1, 2]],
            joint_parents: vec![None, Some(0), Some(1)],
            rest_joints: vec![[0.0; 3], [0.0, -0.2, 0.0], [0.0, -0.3, 0.4]],
            shape_basis: vec![0.0; 3 * 3],
            expr_basis: vec![0.0; 3 * 3],
            pose_basis: vec![0.0; 3 * 3 * 18],
            weights: vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            jaw_index: 2,
        };
        let mut bases = DeformationBases::zeros(1, dims);
        bases.weights = vec![0.0, 0.0, 1.0];
        let cloud = GaussianCloud {
            splats: Splats {
                positions: vec![[0.1, -0.5, 0.6]],
                rotations: vec![[1.0, 0.0, 0.0, 0.0]],
                log_scales: vec![[-2.0; 3]],
                opacities: vec![0.5],
                albedo: vec![[0.5; 3]],
                roughness: vec![0.9],
                f0: vec![0.04],
            },
            bases,
        };
        (rig, cloud)
    }

    #[test]
    fn pose_cloud_rest_pose_is_identity() {
        let (rig, cloud) = single_point_rig();
        let posed = pose_cloud(&cloud, &rig, &PoseState::rest(rig.dims, 2)).unwrap();
        assert_eq!(posed, cloud);
    }

    #[test]
    fn pose_cloud_jaw_rotation_about_hinge() {
        let (rig, cloud) = single_point_rig();
        let mut pose = PoseState::rest(rig.dims, 2);
        pose.theta[2] = [0.0, 0.0, 0.3];
        let posed = pose_cloud(&cloud, &rig, &pose).unwrap();
        // hand rotation about the jaw rest joint (0, −0.3, 0.4) by 0.3 rad about z
        let (s, c) = 0.3f64.sin_cos();
        let (dx, dy) = (0.1 - 0.0, -0.5 - (-0.3));
        let expected = [c * dx - s * dy, s * dx + c * dy - 0.3, 0.6];
        for k in 0..3 {
            assert!((posed.splats.positions[0][k] as f64 - expected[k]).abs() < 1e-6);
        }
        let q = posed.splats.rotations[0];
        let half = 0.15f64;
        assert!((q[0] as f64 - half.cos()).abs() < 1e-6);
        assert!((q[3] as f64 - half.sin()).abs() < 1e-6);
    }

    #[test]
    fn pose_cloud_rejects_wrong_pose_dims() {
        let (rig, cloud) = single_point_rig();
        let mut pose = PoseState::rest(rig.dims, 2);
        pose.psi.push(1.0);
        assert!(matches!(
            pose_cloud(&cloud, &rig, &pose),
            Err(Error::DimensionMismatch { what: "psi", .. })
        ));
    }

    #[test]
    fn init_uses_default_materials() {
        let (rig, _) = single_point_rig();
        let cloud = init_from_rig(&rig, Sampling::PerFace(4), 7).unwrap();
        assert_eq!(cloud.len(), 4);
        assert!(cloud.splats.roughness.iter().all(|&o| o == 0.9));
        assert!(cloud.splats.f0.iter().all(|&f| f == 0.04));
        assert!(cloud.splats.albedo.iter().flatten().all(|&a| a == 0.5));
    }

    #[test]
    fn init_sample_at_vertex_copies_vertex_attributes() {
        let (mut rig, _) = single_point_rig();
        rig.shape_basis = (0..9).map(|v| v as f32 * 0.1).collect();
        rig.weights = vec![0.2, 0.3, 0.5, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let mut splats = Splats::default();
        let mut bases = DeformationBases {
            dims: rig.dims,
            ..Default::default()
        };
        push_face_sample(&rig, 0, [1.0, 0.0, 0.0], &mut splats, &mut bases);
        assert_eq!(splats.positions[0], rig.vertices[0]);
        assert_eq!(bases.shape, rig.shape_basis[0..3].to_vec());
        assert_eq!(bases.weights, vec![0.2, 0.3, 0.5]);
    }

    #[test]
    fn init_is_deterministic_and_rejects_empty_mesh() {
        let (rig, _) = single_point_rig();
        let a = init_from_rig(&rig, Sampling::Total(16), 3).unwrap();
        let b = init_from_rig(&rig, Sampling::Total(16), 3).unwrap();
        assert_eq!(a, b);
        let empty = Rig {
            faces: vec![],
            ..rig
        };
        assert!(matches!(
            init_from_rig(&empty, Sampling::Total(4), 0),
            Err(Error::EmptyMesh)
        ));
    }
}
