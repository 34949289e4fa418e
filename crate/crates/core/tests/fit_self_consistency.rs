use gsav_core::envlight::{bake_environment, BakeSettings};
use gsav_core::fit::{fit_materials, FitConfig, FitFrame};
use gsav_core::losses::mae_star;
use gsav_core::math::Vec3;
use gsav_core::model::{Cubemap, EnvironmentLight, GaussianCloud};
use gsav_core::render::render_frame;
use gsav_core::shade::ShadeParams;
use gsav_core::toyrig::{make_scene, ToyRigSpec, ToyScene};

fn sky_light() -> EnvironmentLight {
    let cube = Cubemap::from_fn(32, |d| {
        let sun = d
            .dot(&Vec3::new(-0.3, 0.6, 0.75).normalize())
            .max(0.0)
            .powi(6);
        [
            0.5 + 0.3 * d.y + 2.0 * sun,
            0.5 + 0.2 * d.y + 1.8 * sun,
            0.6 + 0.1 * d.x + 1.5 * sun,
        ]
    });
    bake_environment(&cube, &BakeSettings::default()).unwrap()
}

struct Outcome {
    albedo_mae: f64,
    initial_mae_star: f64,
    final_mae_star: f64,
    initial_loss: f64,
    final_loss: f64,
    best_so_far_decreasing: bool,
}

fn run(n_points: usize) -> Outcome {
    let spec = ToyRigSpec {
        image_size: 64,
        ..ToyRigSpec::small()
    };
    let ToyScene {
        rig,
        cloud: truth,
        animation,
        cameras,
    } = make_scene(&spec, n_points).unwrap();
    let env = sky_light();
    let params = ShadeParams::default();
    let frames: Vec<FitFrame> = (0..3)
        .map(|k| {
            let pose = animation[k % animation.len()].clone();
            let target = render_frame(&truth, &rig, &pose, &cameras[k], &env, &params)
                .unwrap()
                .color;
            FitFrame {
                pose,
                camera: cameras[k].clone(),
                target,
                albedo_target: None,
                jaw_tracked: None,
            }
        })
        .collect();

    let mut init: GaussianCloud = truth.clone();
    init.splats.albedo.fill([0.5; 3]);
    init.splats.roughness.fill(0.9);
    init.splats.f0.fill(0.04);

    let result = fit_materials(&init, &rig, &frames, &env, &params, &FitConfig::default()).unwrap();

    let (mut sum, mut count) = (0.0, 0);
    for (i, &w) in result.footprint.iter().enumerate() {
        if w > 0.0 {
            for c in 0..3 {
                sum += (result.cloud.splats.albedo[i][c] - truth.splats.albedo[i][c]).abs() as f64;
            }
            count += 3;
        }
    }
    assert!(count > 0, "no point is visible");

    let frame_mae = |cloud: &GaussianCloud| {
        frames
            .iter()
            .map(|f| {
                let img = render_frame(cloud, &rig, &f.pose, &f.camera, &env, &params)
                    .unwrap()
                    .color;
                mae_star(&img, &f.target).unwrap()
            })
            .sum::<f64>()
            / frames.len() as f64
    };
    let mut best = f64::INFINITY;
    let mut decreasing = true;
    for r in &result.trace {
        if r.total < best {
            best = r.total;
        } else if r.total == best {
            decreasing = false;
        }
    }
    Outcome {
        albedo_mae: sum / count as f64,
        initial_mae_star: frame_mae(&init),
        final_mae_star: frame_mae(&result.cloud),
        initial_loss: result.trace[0].total,
        final_loss: result.trace[result.best_iteration].total,
        best_so_far_decreasing: decreasing,
    }
}

fn check(n_points: usize) {
    let o = run(n_points);
    println!(
        "{n_points} points: albedo MAE {:.4}, MAE* {:.3} -> {:.3}, loss {:.5} -> {:.5}",
        o.albedo_mae, o.initial_mae_star, o.final_mae_star, o.initial_loss, o.final_loss
    );
    assert!(o.albedo_mae < 0.05);
    assert!(o.final_mae_star < 1.0);
    assert!(o.final_mae_star < o.initial_mae_star);
    assert!(o.final_loss <= o.initial_loss);
    assert!(o.best_so_far_decreasing);
}

#[test]
fn recovers_materials_of_a_hundred_point_head() {
    check(100);
}

#[test]
fn recovers_materials_of_a_three_point_head() {
    check(3);
}
