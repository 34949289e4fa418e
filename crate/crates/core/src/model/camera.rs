use serde::{Deserialize, Serialize};

use crate::math::{Mat3, Vec3};
use crate::{Error, Result};

/// Pinhole camera, OpenCV convention: +x right, +y down, +z forward.
///
/// Pixel centers sit at integer coordinates, so a point on the optical axis
/// lands exactly on pixel `(cx, cy)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub width: usize,
    pub height: usize,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Rows of the 3×4 rigid world-to-camera transform.
    pub world_to_camera: [[f64; 4]; 3],
    pub near: f64,
    pub far: f64,
}

impl Camera {
    /// Camera at `eye` looking at `target` with world `up`, vertical field of
    /// view in degrees.
    pub fn look_at(
        eye: Vec3,
        target: Vec3,
        up: Vec3,
        width: usize,
        height: usize,
        fov_y_deg: f64,
    ) -> Self {
        let forward = (target - eye).normalize();
        let right = forward.cross(&up).normalize();
        let down = forward.cross(&right);
        let rot = Mat3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
        let t = -(rot * eye);
        let f = 0.5 * height as f64 / (0.5 * fov_y_deg.to_radians()).tan();
        let mut world_to_camera = [[0.0; 4]; 3];
        for (r, row) in world_to_camera.iter_mut().enumerate() {
            for c in 0..3 {
                row[c] = rot[(r, c)];
            }
            row[3] = t[r];
        }
        Self {
            width,
            height,
            fx: f,
            fy: f,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
            world_to_camera,
            near: 0.01,
            far: 100.0,
        }
    }

    /// Camera on a sphere around `target` (world +y up). Azimuth 0 sits on
    /// +z, positive azimuth swings toward +x, positive elevation goes up.
    /// Angles in degrees.
    pub fn orbit(
        target: Vec3,
        azimuth_deg: f64,
        elevation_deg: f64,
        distance: f64,
        width: usize,
        height: usize,
        fov_y_deg: f64,
    ) -> Self {
        let (az, el) = (azimuth_deg.to_radians(), elevation_deg.to_radians());
        let offset = Vec3::new(el.cos() * az.sin(), el.sin(), el.cos() * az.cos()) * distance;
        // keep `up` off the viewing axis near the poles
        let up = if el.cos() < 1e-6 {
            Vec3::new(-az.sin(), 0.0, -az.cos())
        } else {
            Vec3::y()
        };
        Self::look_at(target + offset, target, up, width, height, fov_y_deg)
    }

    pub fn check(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("camera", "zero resolution"));
        }
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::invalid("camera", "focal lengths must be positive"));
        }
        if !(self.near > 0.0 && self.near < self.far) {
            return Err(Error::invalid("camera", "need 0 < near < far"));
        }
        Ok(())
    }

    pub fn rotation(&self) -> Mat3 {
        let w = &self.world_to_camera;
        Mat3::new(
            w[0][0], w[0][1], w[0][2], w[1][0], w[1][1], w[1][2], w[2][0], w[2][1], w[2][2],
        )
    }

    pub fn translation(&self) -> Vec3 {
        let w = &self.world_to_camera;
        Vec3::new(w[0][3], w[1][3], w[2][3])
    }

    pub fn to_camera(&self, p: &Vec3) -> Vec3 {
        self.rotation() * p + self.translation()
    }

    /// Camera center in world space.
    pub fn center(&self) -> Vec3 {
        -(self.rotation().transpose() * self.translation())
    }

    /// Unit world-space direction of the ray through pixel `(x, y)`.
    pub fn ray_direction(&self, x: f64, y: f64) -> Vec3 {
        let d = Vec3::new((x - self.cx) / self.fx, (y - self.cy) / self.fy, 1.0);
        (self.rotation().transpose() * d).normalize()
    }

    /// Same camera with the rigid transform `p ↦ rot·p + shift` applied to
    /// the world, so rendering a transformed scene yields the same image.
    pub fn transformed(&self, rot: &Mat3, shift: &Vec3) -> Camera {
        // world' = rot·world + shift  ⇒  cam = R·rotᵀ·(world' − shift) + t
        let r = self.rotation() * rot.transpose();
        let t = self.translation() - r * shift;
        let mut out = self.clone();
        for row in 0..3 {
            for c in 0..3 {
                out.world_to_camera[row][c] = r[(row, c)];
            }
            out.world_to_camera[row][3] = t[row];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn look_at_projects_target_to_center() {
        let cam = Camera::look_at(
            Vec3::new(0.0, 0.0, 2.0),
            Vec3::zeros(),
            Vec3::y(),
            64,
            48,
            40.0,
        );
        let p = cam.to_camera(&Vec3::zeros());
        assert!(p.x.abs() < 1e-12 && p.y.abs() < 1e-12);
        assert!((p.z - 2.0).abs() < 1e-12);
        // world +y is image up, i.e. camera −y
        let up = cam.to_camera(&Vec3::new(0.0, 1.0, 0.0));
        assert!(up.y < 0.0);
        assert!((cam.center() - Vec3::new(0.0, 0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn orbit_azimuth_zero_sits_on_plus_z() {
        let cam = Camera::orbit(Vec3::zeros(), 0.0, 0.0, 3.0, 32, 32, 45.0);
        assert!((cam.center() - Vec3::new(0.0, 0.0, 3.0)).norm() < 1e-12);
        let side = Camera::orbit(Vec3::zeros(), 90.0, 0.0, 3.0, 32, 32, 45.0);
        assert!((side.center() - Vec3::new(3.0, 0.0, 0.0)).norm() < 1e-12);
        let top = Camera::orbit(Vec3::zeros(), 0.0, 90.0, 2.0, 32, 32, 45.0);
        assert!((top.center() - Vec3::new(0.0, 2.0, 0.0)).norm() < 1e-12);
        assert!(top.to_camera(&Vec3::zeros()).z > 1.99);
    }

    #[test]
    fn check_rejects_bad_planes() {
        let mut cam = Camera::look_at(Vec3::z(), Vec3::zeros(), Vec3::y(), 8, 8, 60.0);
        assert!(cam.check().is_ok());
        cam.near = 5.0;
        cam.far = 1.0;
        assert!(cam.check().is_err());
        cam.near = 0.1;
        cam.fx = 0.0;
        assert!(cam.check().is_err());
    }
}
