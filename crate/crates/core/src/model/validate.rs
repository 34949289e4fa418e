use std::fmt;

use super::{GaussianCloud, MaterialRanges, Rig};
use crate::math::quat_norm;

const UNIT_TOLERANCE: f64 = 1e-6;

/// One broken invariant: the field, the offending element and its value.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub index: Option<usize>,
    pub value: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{}[{}] = {}", self.field, i, self.value),
            None => write!(f, "{}: {}", self.field, self.value),
        }
    }
}

fn violation(field: &'static str, index: Option<usize>, value: impl ToString) -> Violation {
    Violation {
        field,
        index,
        value: value.to_string(),
    }
}

/// Check every cloud and rig invariant with the default material ranges.
pub fn validate(cloud: &GaussianCloud, rig: &Rig) -> Vec<Violation> {
    validate_with(cloud, rig, &MaterialRanges::default())
}

pub fn validate_with(cloud: &GaussianCloud, rig: &Rig, ranges: &MaterialRanges) -> Vec<Violation> {
    let mut out = validate_rig(rig);
    if cloud.dims() != rig.dims {
        out.push(violation(
            "dims",
            None,
            format!("cloud {:?} vs rig {:?}", cloud.dims(), rig.dims),
        ));
    }
    if let Err(e) = cloud.check_lengths() {
        out.push(violation("arrays", None, e));
        return out;
    }
    let s = &cloud.splats;
    for i in 0..cloud.len() {
        if s.positions[i].iter().any(|v| !v.is_finite()) {
            out.push(violation(
                "positions",
                Some(i),
                format!("{:?}", s.positions[i]),
            ));
        }
        let q = s.rotations[i];
        let norm = quat_norm([q[0] as f64, q[1] as f64, q[2] as f64, q[3] as f64]);
        if !((norm - 1.0).abs() <= UNIT_TOLERANCE) {
            out.push(violation(
                "rotations",
                Some(i),
                format!("{:?} (norm {norm})", q),
            ));
        }
        if s.log_scales[i].iter().any(|v| !v.is_finite()) {
            out.push(violation(
                "log_scales",
                Some(i),
                format!("{:?}", s.log_scales[i]),
            ));
        }
        if !(0.0..=1.0).contains(&s.opacities[i]) {
            out.push(violation("opacities", Some(i), s.opacities[i]));
        }
        if s.albedo[i].iter().any(|c| !(0.0..=1.0).contains(c)) {
            out.push(violation("albedo", Some(i), format!("{:?}", s.albedo[i])));
        }
        // compared at storage precision so clamped endpoints pass
        let (o, f0) = (s.roughness[i], s.f0[i]);
        if !(ranges.roughness.0 as f32..=ranges.roughness.1 as f32).contains(&o) {
            out.push(violation("roughness", Some(i), o));
        }
        if !(ranges.f0.0 as f32..=ranges.f0.1 as f32).contains(&f0) {
            out.push(violation("f0", Some(i), f0));
        }
    }
    for i in 0..cloud.len() {
        if let Some(v) = weight_row_violation("blend_weights", i, cloud.bases.weight_row(i)) {
            out.push(v);
        }
    }
    let bases = [
        ("shape_basis", &cloud.bases.shape),
        ("expr_basis", &cloud.bases.expr),
        ("pose_basis", &cloud.bases.pose),
    ];
    for (field, values) in bases {
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            out.push(violation(field, Some(idx), values[idx]));
        }
    }
    out
}

fn weight_row_violation(field: &'static str, i: usize, row: &[f32]) -> Option<Violation> {
    let sum: f64 = row.iter().map(|&w| w as f64).sum();
    let negative = row.iter().any(|&w| !(w >= 0.0));
    if negative || !((sum - 1.0).abs() <= UNIT_TOLERANCE) {
        Some(violation(field, Some(i), format!("{:?} (sum {sum})", row)))
    } else {
        None
    }
}

/// Check rig invariants: joint tree, weight rows, face indices, array sizes.
pub fn validate_rig(rig: &Rig) -> Vec<Violation> {
    let mut out = Vec::new();
    let d = rig.dims;
    let v = rig.num_vertices();
    if rig.joint_parents.len() != d.n_transforms() {
        out.push(violation(
            "joint_parents",
            None,
            format!(
                "{} entries, expected {}",
                rig.joint_parents.len(),
                d.n_transforms()
            ),
        ));
    }
    if rig.rest_joints.len() != d.n_transforms() {
        out.push(violation(
            "rest_joints",
            None,
            format!("{} entries", rig.rest_joints.len()),
        ));
    }
    if rig.joint_order().is_none() {
        out.push(violation(
            "joint_parents",
            None,
            "not a tree rooted at joint 0",
        ));
    }
    if rig.jaw_index >= d.n_transforms() {
        out.push(violation("jaw_index", None, rig.jaw_index));
    }
    let sizes = [
        ("shape_basis", v * 3 * d.n_shape, rig.shape_basis.len()),
        ("expr_basis", v * 3 * d.n_expr, rig.expr_basis.len()),
        (
            "pose_basis",
            v * 3 * d.n_pose_features(),
            rig.pose_basis.len(),
        ),
        ("vertex_weights", v * d.n_transforms(), rig.weights.len()),
    ];
    let mut sizes_ok = true;
    for (field, expected, got) in sizes {
        if expected != got {
            sizes_ok = false;
            out.push(violation(
                field,
                None,
                format!("{got} values, expected {expected}"),
            ));
        }
    }
    for (i, f) in rig.faces.iter().enumerate() {
        if f.iter().any(|&idx| idx as usize >= v) {
            out.push(violation("faces", Some(i), format!("{:?}", f)));
        }
    }
    if sizes_ok {
        for i in 0..v {
            if let Some(viol) = weight_row_violation("vertex_weights", i, rig.weight_row(i)) {
                out.push(viol);
            }
        }
    }
    out
}
