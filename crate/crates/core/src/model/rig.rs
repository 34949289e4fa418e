use serde::{Deserialize, Serialize};

/// Parameter dimensions shared by a rig and the clouds built from it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RigDims {
    /// |β|
    pub n_shape: usize,
    /// |ψ|
    pub n_expr: usize,
    /// K, joints excluding the root.
    pub n_joints: usize,
}

impl RigDims {
    pub const fn new(n_shape: usize, n_expr: usize, n_joints: usize) -> Self {
        Self {
            n_shape,
            n_expr,
            n_joints,
        }
    }

    /// 9K: one flattened 3×3 rotation delta per non-root joint.
    pub const fn n_pose_features(&self) -> usize {
        9 * self.n_joints
    }

    /// K + 1 skinning transforms (root first).
    pub const fn n_transforms(&self) -> usize {
        self.n_joints + 1
    }
}

/// Template mesh with skinning and blendshape data.
///
/// Vertex arrays use the same layouts as [`crate::DeformationBases`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Rig {
    pub dims: RigDims,
    pub vertices: Vec<[f32; 3]>,
    pub faces: Vec<[u32; 3]>,
    /// `None` for the root; the root must be joint 0.
    pub joint_parents: Vec<Option<usize>>,
    /// Rest joint locations J(β), root first.
    pub rest_joints: Vec<[f32; 3]>,
    pub shape_basis: Vec<f32>,
    pub expr_basis: Vec<f32>,
    pub pose_basis: Vec<f32>,
    pub weights: Vec<f32>,
    pub jaw_index: usize,
}

impl Rig {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn weight_row(&self, v: usize) -> &[f32] {
        let k = self.dims.n_transforms();
        &self.weights[v * k..(v + 1) * k]
    }

    /// Parent-before-child ordering of the joints, or `None` when the
    /// hierarchy is not a tree rooted at joint 0.
    pub fn joint_order(&self) -> Option<Vec<usize>> {
        let n = self.joint_parents.len();
        if n == 0 || self.joint_parents[0].is_some() {
            return None;
        }
        let mut depth = vec![usize::MAX; n];
        depth[0] = 0;
        for start in 1..n {
            let mut chain = Vec::new();
            let mut j = start;
            while depth[j] == usize::MAX {
                if chain.len() > n {
                    return None;
                }
                chain.push(j);
                j = match self.joint_parents[j] {
                    Some(p) if p < n && p != j => p,
                    _ => return None,
                };
            }
            let mut d = depth[j];
            for &c in chain.iter().rev() {
                d += 1;
                depth[c] = d;
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&j| (depth[j], j));
        Some(order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rig_with_parents(parents: Vec<Option<usize>>) -> Rig {
        Rig {
            joint_parents: parents,
            ..Default::default()
        }
    }

    #[test]
    fn orders_parents_first() {
        let rig = rig_with_parents(vec![None, Some(2), Some(0)]);
        assert_eq!(rig.joint_order(), Some(vec![0, 2, 1]));
    }

    #[test]
    fn rejects_cycles_and_bad_roots() {
        assert_eq!(
            rig_with_parents(vec![None, Some(2), Some(1)]).joint_order(),
            None
        );
        assert_eq!(rig_with_parents(vec![Some(0)]).joint_order(), None);
        assert_eq!(rig_with_parents(vec![None, Some(7)]).joint_order(), None);
    }
}
