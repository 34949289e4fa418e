#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gsav_core::envlight::{bake_environment, equirect_to_cubemap, BakeSettings};
use gsav_core::io::{save_animation, save_avatar, save_cameras, save_light, save_rig, LightAsset};
use gsav_core::toyrig::{make_scene, sky_panorama, ToyRigSpec};
use gsav_core::{Cubemap, Image};

pub const GSAV: &str = env!("CARGO_BIN_EXE_gsav");

pub struct Fixture {
    pub dir: tempfile::TempDir,
}

impl Fixture {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn str(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }
}

pub fn quick_bake() -> BakeSettings {
    BakeSettings {
        irr_res: 8,
        env_res: 16,
        mips: 3,
        lut_res: 32,
        samples: 128,
        lut_samples: 128,
        seed: 0,
    }
}

/// Toy head with `points` Gaussians, plus `lights/sky.gslt` and
/// `lights/flat.gslt`.
pub fn fixture(points: usize, size: usize) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let spec = ToyRigSpec {
        image_size: size,
        ..ToyRigSpec::small()
    };
    let scene = make_scene(&spec, points).unwrap();
    let p = |n: &str| dir.path().join(n);
    save_avatar(p("avatar.gsav"), &scene.cloud).unwrap();
    save_rig(p("rig.gsrg"), &scene.rig).unwrap();
    save_animation(p("animation.jsonl"), &scene.animation).unwrap();
    save_cameras(p("cameras.json"), &scene.cameras).unwrap();
    std::fs::create_dir(p("lights")).unwrap();
    let settings = quick_bake();
    let sky = equirect_to_cubemap(&sky_panorama(128, 64), 2 * settings.env_res).unwrap();
    for (name, cube) in [
        ("sky", sky),
        ("flat", Cubemap::constant(16, [0.6, 0.6, 0.6])),
    ] {
        let light = bake_environment(&cube, &settings).unwrap();
        save_light(
            p(&format!("lights/{name}.gslt")),
            &LightAsset {
                light,
                bake: settings,
            },
        )
        .unwrap();
    }
    Fixture { dir }
}

pub fn gsav(args: &[&str]) -> Output {
    let out = Command::new(GSAV)
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("running gsav");
    assert!(
        out.status.success(),
        "gsav {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn gsav_fails(args: &[&str]) -> String {
    let out = Command::new(GSAV)
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(
        !out.status.success(),
        "gsav {args:?} unexpectedly succeeded"
    );
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// All files below `dir` with their bytes, sorted by relative path.
pub fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, read(&p)));
            }
        }
    }
    out.sort();
    out
}

pub fn mean_luminance(img: &Image) -> f64 {
    gsav_core::render::mean_luminance(img)
}
