mod common;

use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use serde_json::{json, Value};
use tower::ServiceExt;

use common::{fixture, gsav, read, Fixture};
use gsav_cli::serve::{build_app, router, App, ServeArgs};
use gsav_cli::session::SessionState;

const SIZE: usize = 48;

fn app(fx: &Fixture) -> Arc<App> {
    let args = ServeArgs {
        avatar: fx.path("avatar.gsav"),
        rig: fx.path("rig.gsrg"),
        lights: fx.path("lights"),
        host: "127.0.0.1".into(),
        port: 0,
        size: (SIZE, SIZE),
        fov: 30.0,
        target: [0.0; 3],
    };
    Arc::new(build_app(&args).unwrap())
}

async fn call(
    app: &Arc<App>,
    method: &str,
    uri: &str,
    body: Option<Value>,
) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(v) => req
            .header("content-type", "application/json")
            .body(Body::from(v.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = router(app.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    (
        status,
        to_bytes(resp.into_body(), usize::MAX)
            .await
            .unwrap()
            .to_vec(),
    )
}

async fn state(app: &Arc<App>) -> SessionState {
    let (status, body) = call(app, "GET", "/state", None).await;
    assert_eq!(status, StatusCode::OK);
    serde_json::from_slice(&body).unwrap()
}

async fn frame(app: &Arc<App>) -> Vec<u8> {
    let (status, body) = call(app, "GET", "/frame.png", None).await;
    assert_eq!(status, StatusCode::OK);
    body
}

/// The same frame through the command line.
fn cli_frame(fx: &Fixture, s: &SessionState, tag: &str) -> Vec<u8> {
    let pose = fx.path(&format!("{tag}.jsonl"));
    let line = json!({
        "frame": 0,
        "beta": s.shape,
        "psi": s.expression,
        "theta": s.joints,
        "translation": s.translation,
    });
    std::fs::write(&pose, format!("{line}\n")).unwrap();
    let out = fx.path(tag);
    let orbit = format!(
        "{},{},{}",
        s.camera.azimuth, s.camera.elevation, s.camera.distance
    );
    let light = fx.path(&format!("lights/{}.gslt", s.light));
    let num = |v: f64| v.to_string();
    gsav(&[
        "render",
        "--avatar",
        &fx.str("avatar.gsav"),
        "--rig",
        &fx.str("rig.gsrg"),
        "--pose",
        pose.to_str().unwrap(),
        "--light",
        light.to_str().unwrap(),
        "--orbit",
        &orbit,
        "--size",
        &SIZE.to_string(),
        "--fov",
        "30",
        "--f0-scale",
        &num(s.f0_scale),
        "--roughness-scale",
        &num(s.roughness_scale),
        "--env-yaw",
        &num(s.env_yaw),
        "--exposure",
        &num(s.exposure),
        "--bg",
        if s.background.value() == 0.0 {
            "black"
        } else {
            "white"
        },
        "--out",
        out.to_str().unwrap(),
    ]);
    read(&out.join("frame_0000.png"))
}

#[tokio::test]
async fn initial_state_has_documented_defaults() {
    let fx = fixture(300, SIZE);
    let app = app(&fx);
    let s = state(&app).await;
    assert_eq!(s.f0_scale, 1.0);
    assert_eq!(s.roughness_scale, 1.0);
    assert_eq!(s.exposure, 1.0);
    assert_eq!(s.env_yaw, 0.0);
    assert_eq!(
        (s.camera.azimuth, s.camera.elevation, s.camera.distance),
        (0.0, 0.0, 0.45)
    );
    assert_eq!(s.light, "flat");
    assert!(s.expression.iter().chain(&s.shape).all(|&v| v == 0.0));
    assert!(s.joints.iter().flatten().all(|&v| v == 0.0));

    let (status, body) = call(&app, "GET", "/lights", None).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v, json!({"lights": ["flat", "sky"], "current": "flat"}));
}

#[tokio::test]
async fn bad_requests_name_the_field_and_keep_state() {
    let fx = fixture(300, SIZE);
    let app = app(&fx);
    let before = state(&app).await;
    for (body, field) in [
        (json!({"f0_scale": 2.0, "specular": 1.0}), "specular"),
        (json!({"camera": {"azimuth": 10.0, "roll": 1.0}}), "roll"),
        (json!({"exposure": -1.0}), "exposure"),
        (json!({"expression": [1.0]}), "expression"),
        (json!({"light": "moon"}), "light"),
        (json!({"f0_scale": "high"}), "invalid type"),
    ] {
        let (status, resp) = call(&app, "POST", "/params", Some(body.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        let v: Value = serde_json::from_slice(&resp).unwrap();
        let msg = v["error"].as_str().unwrap();
        assert!(msg.contains(field), "{body}: {msg}");
        assert_eq!(state(&app).await, before);
    }
    let (status, _) = call(&app, "POST", "/params", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn params_merge_and_echo_the_new_state() {
    let fx = fixture(300, SIZE);
    let app = app(&fx);
    let (status, body) = call(
        &app,
        "POST",
        "/params",
        Some(json!({"f0_scale": 2.5, "camera": {"azimuth": 40.0}})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let echoed: SessionState = serde_json::from_slice(&body).unwrap();
    let s = state(&app).await;
    assert_eq!(echoed, s);
    assert_eq!(s.f0_scale, 2.5);
    assert_eq!(s.camera.azimuth, 40.0);
    assert_eq!(s.camera.distance, 0.45);

    // a full GET /state document is itself a valid update
    let (status, body) = call(
        &app,
        "POST",
        "/params",
        Some(serde_json::to_value(&s).unwrap()),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(serde_json::from_slice::<SessionState>(&body).unwrap(), s);
}

#[tokio::test]
async fn frames_match_the_command_line_renderer() {
    let fx = fixture(400, SIZE);
    let app = app(&fx);
    let n_expr = state(&app).await.expression.len();
    let n_joints = state(&app).await.joints.len();
    let mut expr = vec![0.0; n_expr];
    expr[0] = 1.5;
    expr[1] = 0.8;
    let mut joints = vec![[0.0; 3]; n_joints];
    joints[2] = [0.25, 0.0, 0.0];
    joints[0] = [0.0, 0.3, 0.05];

    let scripts: Vec<Vec<Value>> = vec![
        vec![],
        vec![json!({"f0_scale": 3.0})],
        vec![json!({"roughness_scale": 0.5}), json!({"exposure": 1.7})],
        vec![json!({"light": "sky"}), json!({"env_yaw": 1.2})],
        vec![json!({"light": "sky", "camera": {"azimuth": 35.0, "elevation": -10.0}})],
        vec![json!({"expression": expr}), json!({"joints": joints})],
        vec![
            json!({"translation": [0.01, -0.02, 0.0]}),
            json!({"background": "white"}),
        ],
        vec![
            json!({"camera": {"distance": 0.6}}),
            json!({"camera": {"azimuth": -120.0}}),
        ],
        vec![
            json!({"light": "sky", "f0_scale": 0.0}),
            json!({"roughness_scale": 2.0}),
        ],
        vec![json!({"light": "sky", "env_yaw": -2.5, "exposure": 0.6, "background": "white"})],
    ];
    for (k, script) in scripts.iter().enumerate() {
        for step in script {
            let (status, body) = call(&app, "POST", "/params", Some(step.clone())).await;
            assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&body));
        }
        let s = state(&app).await;
        assert_eq!(
            frame(&app).await,
            cli_frame(&fx, &s, &format!("script{k}")),
            "script {k}"
        );
    }
}

#[tokio::test]
async fn full_yaw_turn_gives_the_same_frame() {
    let fx = fixture(300, SIZE);
    let app = app(&fx);
    call(
        &app,
        "POST",
        "/params",
        Some(json!({"light": "sky", "env_yaw": 0.0})),
    )
    .await;
    let a = frame(&app).await;
    call(
        &app,
        "POST",
        "/params",
        Some(json!({"env_yaw": std::f64::consts::TAU})),
    )
    .await;
    assert_eq!(frame(&app).await, a);
    call(&app, "POST", "/params", Some(json!({"env_yaw": 1.0}))).await;
    assert_ne!(frame(&app).await, a);
}

#[tokio::test]
async fn concurrent_updates_are_serialized() {
    let fx = fixture(200, 32);
    let app = app(&fx);
    let posts = (0..16).map(|k| {
        let app = app.clone();
        tokio::spawn(async move {
            call(
                &app,
                "POST",
                "/params",
                Some(json!({"exposure": 1.0 + k as f64, "f0_scale": 1.0 + k as f64})),
            )
            .await
        })
    });
    for p in posts {
        assert_eq!(p.await.unwrap().0, StatusCode::OK);
    }
    let s = state(&app).await;
    // both fields come from the same request
    assert_eq!(s.exposure, s.f0_scale);
}

#[tokio::test]
async fn busy_port_is_reported() {
    let fx = fixture(100, 32);
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let args = ServeArgs {
        avatar: fx.path("avatar.gsav"),
        rig: fx.path("rig.gsrg"),
        lights: fx.path("lights"),
        host: "127.0.0.1".into(),
        port: taken.local_addr().unwrap().port(),
        size: (32, 32),
        fov: 30.0,
        target: [0.0; 3],
    };
    let err = gsav_cli::serve::run(&args).await.unwrap_err();
    assert!(format!("{err:#}").contains("cannot listen"), "{err:#}");
}
