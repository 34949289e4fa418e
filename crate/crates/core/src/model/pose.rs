use serde::{Deserialize, Serialize};

use super::RigDims;
use crate::{Error, Result};

/// Parameters of one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseState {
    /// Shape coefficients β.
    pub beta: Vec<f64>,
    /// Expression coefficients ψ.
    pub psi: Vec<f64>,
    /// Axis-angle per transform in radians, index 0 is the global rotation.
    pub theta: Vec<[f64; 3]>,
    pub translation: [f64; 3],
    /// Which joint carries the jaw (used by the jaw regularizer).
    pub jaw_index: usize,
}

impl PoseState {
    pub fn rest(dims: RigDims, jaw_index: usize) -> Self {
        Self {
            beta: vec![0.0; dims.n_shape],
            psi: vec![0.0; dims.n_expr],
            theta: vec![[0.0; 3]; dims.n_transforms()],
            translation: [0.0; 3],
            jaw_index,
        }
    }

    pub fn jaw(&self) -> [f64; 3] {
        self.theta.get(self.jaw_index).copied().unwrap_or([0.0; 3])
    }

    pub fn check(&self, dims: RigDims) -> Result<()> {
        let checks = [
            ("beta", dims.n_shape, self.beta.len()),
            ("psi", dims.n_expr, self.psi.len()),
            ("theta", dims.n_transforms(), self.theta.len()),
        ];
        for (what, expected, got) in checks {
            if expected != got {
                return Err(Error::DimensionMismatch {
                    what,
                    expected,
                    got,
                });
            }
        }
        let finite = self.beta.iter().chain(&self.psi).all(|v| v.is_finite())
            && self.theta.iter().flatten().all(|v| v.is_finite())
            && self.translation.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("pose", "non-finite parameter"));
        }
        if self.jaw_index >= dims.n_transforms() {
            return Err(Error::invalid(
                "pose",
                format!("jaw index {} out of range", self.jaw_index),
            ));
        }
        Ok(())
    }
}
