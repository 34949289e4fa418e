use gsav_core::envlight::{bake_environment, BakeSettings};
use gsav_core::math::Vec3;
use gsav_core::model::{Cubemap, EnvironmentLight, SurfaceSample};
use gsav_core::rasterize::{rasterize, ChannelSet};
use gsav_core::shade::{shade_surface, shading_gradients, view_direction, ShadeParams};
use gsav_core::toyrig::{make_scene, ToyRigSpec};
use gsav_core::{deform::pose_splats, PoseState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-4;
const TOL: f64 = 1e-3;

fn sky_light(settings: &BakeSettings) -> EnvironmentLight {
    let cube = Cubemap::from_fn(settings.env_res, |d| {
        let sun = d
            .dot(&Vec3::new(0.4, 0.7, 0.6).normalize())
            .max(0.0)
            .powi(8);
        [
            0.3 + 0.4 * d.y.max(0.0) + 3.0 * sun,
            0.4 + 0.3 * d.y.max(0.0) + 2.5 * sun,
            0.6 + 2.0 * sun,
        ]
    });
    bake_environment(&cube, settings).unwrap()
}

fn output(s: &SurfaceSample, v: &Vec3, env: &EnvironmentLight, p: &ShadeParams) -> [f64; 3] {
    let t = shade_surface(s, v, env, p).total();
    t.map(|x| x * p.exposure * s.alpha)
}

fn central(f: impl Fn(f64) -> [f64; 3]) -> [f64; 3] {
    let (a, b) = (f(H), f(-H));
    [0, 1, 2].map(|c| (a[c] - b[c]) / (2.0 * H))
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    // floor keeps exactly-zero derivatives (dark channels) comparable
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Whether `x` lies within the finite-difference stencil of any knot.
fn near(x: f64, knots: &[f64], scale: f64) -> bool {
    knots.iter().any(|k| (x - k).abs() <= 2.0 * H * scale)
}

#[test]
fn material_gradients_match_finite_differences() {
    let settings = BakeSettings {
        irr_res: 8,
        env_res: 16,
        mips: 3,
        lut_res: 32,
        samples: 64,
        lut_samples: 64,
        seed: 3,
    };
    let env = sky_light(&settings);
    let scene = make_scene(&ToyRigSpec::small(), 800).unwrap();
    let pose = PoseState::rest(scene.rig.dims, scene.rig.jaw_index);
    let camera = &scene.cameras[1];
    let splats = pose_splats(&scene.cloud, &scene.rig, &pose).unwrap();
    let gbuffer = rasterize(&splats, camera, ChannelSet::ALL).unwrap();
    let params = ShadeParams {
        f0_scale: 1.5,
        roughness_scale: 0.9,
        env_yaw: 0.4,
        exposure: 1.3,
        ..ShadeParams::default()
    };

    let mut knots_o: Vec<f64> = (0..settings.lut_res)
        .map(|i| i as f64 / (settings.lut_res - 1) as f64)
        .collect();
    knots_o.extend((0..settings.mips).map(|m| m as f64 / (settings.mips - 1) as f64));
    knots_o.extend([params.ranges.roughness.0, params.ranges.roughness.1]);
    let knots_f0 = [params.ranges.f0.0, params.ranges.f0.1];

    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut checked, mut worst, mut draws) = (0, 0.0f64, 0);
    while checked < 100 {
        draws += 1;
        assert!(draws < 10_000, "not enough usable pixels");
        let (x, y) = (
            rng.random_range(0..camera.width),
            rng.random_range(0..camera.height),
        );
        let Some(mut s) = gbuffer.surface(y * camera.width + x) else {
            continue;
        };
        // spread materials over the whole editable range
        s.roughness = rng.random_range(0.15..1.05);
        s.f0 = rng.random_range(0.015..0.14);
        let o = s.roughness * params.roughness_scale;
        let f0 = s.f0 * params.f0_scale;
        let (o_eff, f0_eff) = (params.roughness(s.roughness).0, params.f0(s.f0).0);
        // kink of max(1 − o, f0)
        let kink = (1.0 - o_eff) - f0_eff;
        if near(o, &knots_o, params.roughness_scale)
            || near(f0, &knots_f0, params.f0_scale)
            || kink.abs() <= 2.0 * H * (params.roughness_scale + params.f0_scale)
        {
            continue;
        }

        let v = view_direction(camera, x, y);
        let g = shading_gradients(&s, &v, &env, &params);
        let base = output(&s, &v, &env, &params);
        for c in 0..3 {
            assert!((g.output[c] - base[c]).abs() <= 1e-12 * base[c].abs().max(1.0));
        }
        let d_o = central(|h| {
            output(
                &SurfaceSample {
                    roughness: s.roughness + h,
                    ..s
                },
                &v,
                &env,
                &params,
            )
        });
        let d_f0 = central(|h| output(&SurfaceSample { f0: s.f0 + h, ..s }, &v, &env, &params));
        for c in 0..3 {
            let d_a = central(|h| {
                let mut t = s;
                t.albedo[c] += h;
                output(&t, &v, &env, &params)
            });
            for (an, fd) in [
                (g.d_roughness[c], d_o[c]),
                (g.d_f0[c], d_f0[c]),
                (g.d_albedo[c], d_a[c]),
            ] {
                let e = rel_err(an, fd);
                assert!(
                    e <= TOL,
                    "pixel ({x},{y}) o {} f0 {}: analytic {an} vs numeric {fd}",
                    s.roughness,
                    s.f0
                );
                worst = worst.max(e);
            }
        }
        assert!(g.d_roughness.iter().any(|d| d.abs() > 1e-4));
        checked += 1;
    }
    println!("checked {checked} pixels in {draws} draws, worst relative error {worst:.2e}");
}
