//! Brute-force splatting used to check the tiled rasterizer.
//!
//! Every pixel visits every Gaussian after one full depth sort; there are no
//! tiles and no radius culling. Projection is written independently with
//! nalgebra matrix products. Only the 3σ support test, the dilation and the
//! blending constants are shared by definition.

use nalgebra::{
    Matrix2, Matrix2x3, Matrix3, Matrix3x4, Quaternion, UnitQuaternion, Vector3, Vector4,
};

use crate::model::{Camera, GBuffer, Splats};
use crate::rasterize::{CUTOFF, DILATION, MAX_ALPHA, MIN_TRANSMITTANCE};

struct Footprint {
    mean: [f64; 2],
    inv_cov: Matrix2<f64>,
    depth: f64,
    index: usize,
    normal: Vector3<f64>,
}

fn footprint(splats: &Splats, i: usize, camera: &Camera) -> Option<Footprint> {
    let w = Matrix3x4::from_fn(|r, c| camera.world_to_camera[r][c]);
    let p = splats.positions[i].map(|v| v as f64);
    let t = w * Vector4::new(p[0], p[1], p[2], 1.0);
    if t.z <= camera.near || t.z > camera.far {
        return None;
    }
    let q = splats.rotations[i].map(|v| v as f64);
    let rot = UnitQuaternion::from_quaternion(Quaternion::new(q[0], q[1], q[2], q[3]));
    let r = rot.to_rotation_matrix().into_inner();
    let s = splats.log_scales[i].map(|v| (v as f64).exp());
    let scale = Matrix3::from_diagonal(&Vector3::from(s));
    let sigma = r * scale * scale.transpose() * r.transpose();

    let j = Matrix2x3::new(
        camera.fx / t.z,
        0.0,
        -camera.fx * t.x / (t.z * t.z),
        0.0,
        camera.fy / t.z,
        -camera.fy * t.y / (t.z * t.z),
    );
    let wr = w.fixed_view::<3, 3>(0, 0).into_owned();
    let cov = j * wr * sigma * wr.transpose() * j.transpose() + Matrix2::identity() * DILATION;
    let inv_cov = cov.try_inverse()?;

    let axis = (0..3).fold(0, |best, k| if s[k] < s[best] { k } else { best });
    let mut normal: Vector3<f64> = r.column(axis).into();
    let eye = -(wr.transpose() * w.column(3));
    if normal.dot(&(eye - Vector3::from(p))) < 0.0 {
        normal = -normal;
    }
    Some(Footprint {
        mean: [
            camera.fx * t.x / t.z + camera.cx,
            camera.fy * t.y / t.z + camera.cy,
        ],
        inv_cov,
        depth: t.z,
        index: i,
        normal,
    })
}

/// Reference G-buffer with every channel blended.
pub fn reference_rasterize(splats: &Splats, camera: &Camera) -> GBuffer {
    let mut list: Vec<Footprint> = (0..splats.len())
        .filter_map(|i| footprint(splats, i, camera))
        .collect();
    list.sort_by(|a, b| a.depth.total_cmp(&b.depth).then(a.index.cmp(&b.index)));

    let mut out = GBuffer::new(camera.width, camera.height);
    for y in 0..camera.height {
        for x in 0..camera.width {
            let px = y * camera.width + x;
            let mut t = 1.0;
            for f in &list {
                let d = nalgebra::Vector2::new(x as f64 - f.mean[0], y as f64 - f.mean[1]);
                let power = (d.transpose() * f.inv_cov * d)[(0, 0)];
                if power > CUTOFF {
                    continue;
                }
                let i = f.index;
                let sigma = ((-0.5 * power).exp() * splats.opacities[i] as f64).min(MAX_ALPHA);
                if t * (1.0 - sigma) < MIN_TRANSMITTANCE {
                    break;
                }
                let w = sigma * t;
                for c in 0..3 {
                    out.albedo[px][c] += w * splats.albedo[i][c] as f64;
                    out.normal[px][c] += w * f.normal[c];
                }
                out.roughness[px] += w * splats.roughness[i] as f64;
                out.f0[px] += w * splats.f0[i] as f64;
                out.depth[px] += w * f.depth;
                t *= 1.0 - sigma;
            }
            out.alpha[px] = 1.0 - t;
            let n = Vector3::from(out.normal[px]);
            if out.alpha[px] > 0.5 && n.norm() > 0.0 {
                out.normal[px] = n.normalize().into();
            }
        }
    }
    out
}
